"""Consensus-halving instances, their pizza encodings, and map-backs.

A consensus-halving (CH) instance asks to split an interval among agents
with additive valuations so that every agent values both label classes
equally.  Four encoders turn CH instances into pizza instances (diagonal
overlapping squares, a non-overlapping checkerboard variant, a parabola
tile layout for straight cuts, and an exact variant with quadratic
triangle gadgets); the map-backs convert square-cut paths or straight-line
cuts on the encoded pizza into CH cuts.  Verifiers for all three solution
families work in exact arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cmp_to_key
from math import isqrt, lcm

from .geometry import (
    InstanceError,
    MassDistribution,
    PizzaInstance,
    Point2,
    Transform,
    IDENTITY_TRANSFORM,
    WeightedPolygon,
    format_scalar,
    parse_scalar,
    validate_instance,
)
from .measure import _clip_halfplane, _poly_area, region_mass_oracle, strip_table
from .scpath import FeasibleSolution, point_side, solution_to_path

ZERO = Fraction(0)
ONE = Fraction(1)

VALUATION_KINDS = ("kBlock", "twoBlockUniform", "blockPlusTriangle")

_OPPOSITE = {"+": "-", "-": "+"}


# ---------------------------------------------------------------------------
# Consensus-halving data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CHValuation:
    """One agent's additive valuation on the interval.

    blocks are disjoint (a_left, a_right, density) pieces of uniform
    density; an optional triangle piece on [a, a+1] has cumulative value
    (x - a)^2, i.e. linearly growing density with total value 1.  The whole
    valuation totals exactly 1.
    """

    kind: str
    blocks: tuple[tuple[Fraction, Fraction, Fraction], ...]
    triangle: tuple[Fraction, Fraction] | None = None

    def total_value(self) -> Fraction:
        total = sum((c * (b - a) for a, b, c in self.blocks), ZERO)
        if self.triangle is not None:
            total += ONE
        return total

    @property
    def density(self) -> Fraction:
        """Common block density (uniform kinds)."""
        positive = [c for _, _, c in self.blocks if c > 0]
        return positive[0] if positive else ZERO

    def cumulative(self, x: Fraction) -> Fraction:
        """Value of [min_endpoint, x] (in fact of (-inf, x])."""
        total = ZERO
        for a, b, c in self.blocks:
            total += c * max(ZERO, min(x, b) - a)
        if self.triangle is not None:
            a, b = self.triangle
            t = max(ZERO, min(x, b) - a)
            total += t * t
        return total

    def value(self, lo: Fraction, hi: Fraction) -> Fraction:
        return self.cumulative(hi) - self.cumulative(lo)

    def density_on(self, lo: Fraction, hi: Fraction) -> Fraction:
        """Block density on an interval that no block endpoint splits."""
        for a, b, c in self.blocks:
            if a <= lo and hi <= b:
                return c
        return ZERO


@dataclass(frozen=True)
class CHInstance:
    agents: tuple[CHValuation, ...]

    @property
    def n(self) -> int:
        return len(self.agents)


@dataclass(frozen=True)
class CHSolution:
    """Cut points plus the label of the leftmost piece; labels alternate."""

    cuts: tuple[Fraction, ...]
    first_label: str = "+"

    def __post_init__(self) -> None:
        if self.first_label not in ("+", "-"):
            raise InstanceError("first_label must be '+' or '-'")
        if any(b <= a for a, b in zip(self.cuts, self.cuts[1:])):
            raise InstanceError("cuts must be strictly increasing")

    def segments(self, lo: Fraction, hi: Fraction) -> list[tuple[Fraction, Fraction, str]]:
        """Alternating labeled segments covering [lo, hi]."""
        bounds = [lo, *self.cuts, hi]
        label = self.first_label
        out = []
        for a, b in zip(bounds, bounds[1:]):
            if a < b:
                out.append((a, b, label))
            label = _OPPOSITE[label]
        return out


@dataclass(frozen=True)
class StraightCutSet:
    """Lines a*x + b*y = c cutting the plane; parity of positive sides colors it."""

    lines: tuple[tuple[Fraction, Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        for a, b, _ in self.lines:
            if a == 0 and b == 0:
                raise InstanceError("degenerate line: a = b = 0")


@dataclass(frozen=True)
class SquareRecord:
    """One interval of interest and its square in construction coordinates."""

    x_lo: Fraction
    x_hi: Fraction
    sq_x: Fraction
    sq_y: Fraction
    side: Fraction
    gadget: bool = False


@dataclass(frozen=True)
class ReductionMeta:
    """Everything needed to reconstruct a reduction and map solutions back."""

    kind: str
    points: tuple[Fraction, ...]
    transform: Transform
    eps_out: Fraction | None = None
    intervals: tuple[SquareRecord, ...] = ()
    d: Fraction | None = None
    delta: Fraction | None = None
    budget: int | None = None
    tile_count: int | None = None
    square_sides: tuple[Fraction, ...] = ()
    notes: tuple[str, ...] = ()


def validate_ch_instance(ch: CHInstance) -> None:
    if not ch.agents:
        raise InstanceError("consensus-halving instance has no agents")
    for idx, agent in enumerate(ch.agents, start=1):
        what = f"agent {idx}"
        if agent.kind not in VALUATION_KINDS:
            raise InstanceError(f"{what}: unknown valuation kind {agent.kind!r}")
        for a, b, c in agent.blocks:
            if a >= b:
                raise InstanceError(f"{what}: block [{a}, {b}] is empty or inverted")
            if c < 0:
                raise InstanceError(f"{what}: negative block density")
        by_left = sorted(agent.blocks)
        for (_, b1, _), (a2, _, _) in zip(by_left, by_left[1:]):
            if b1 > a2:
                raise InstanceError(f"{what}: blocks overlap")
        if agent.kind == "twoBlockUniform":
            if agent.triangle is not None:
                raise InstanceError(f"{what}: twoBlockUniform has no triangle part")
            if len(agent.blocks) > 2:
                raise InstanceError(f"{what}: twoBlockUniform allows at most 2 blocks")
            densities = {c for _, _, c in agent.blocks}
            if len(densities) > 1:
                raise InstanceError(f"{what}: twoBlockUniform blocks must share one density")
        if agent.kind == "kBlock" and agent.triangle is not None:
            raise InstanceError(f"{what}: kBlock valuation has no triangle part")
        if agent.kind == "blockPlusTriangle":
            if agent.triangle is None:
                raise InstanceError(f"{what}: blockPlusTriangle needs a triangle")
        if agent.triangle is not None:
            a, b = agent.triangle
            if b - a != 1:
                raise InstanceError(f"{what}: triangle must have width exactly 1")
        if agent.total_value() != 1:
            raise InstanceError(f"{what}: total value is {agent.total_value()}, expected 1")


def points_of_interest(ch: CHInstance) -> list[Fraction]:
    """Sorted, deduplicated endpoints of all blocks and triangles."""
    pts: set[Fraction] = set()
    for agent in ch.agents:
        for a, b, _ in agent.blocks:
            pts.update((a, b))
        if agent.triangle is not None:
            pts.update(agent.triangle)
    return sorted(pts)


# ---------------------------------------------------------------------------
# Construction helpers
# ---------------------------------------------------------------------------


def _exact_sqrt(v: Fraction) -> Fraction | None:
    if v < 0:
        return None
    rn, rd = isqrt(v.numerator), isqrt(v.denominator)
    if rn * rn == v.numerator and rd * rd == v.denominator:
        return Fraction(rn, rd)
    return None


def _sqrt_or_snap(v: Fraction, mode: str, what: str) -> tuple[Fraction, bool]:
    """Exact square root, or a dyadic-denominator snap in approximate mode."""
    root = _exact_sqrt(v)
    if root is not None:
        return root, True
    if mode == "exact":
        raise InstanceError(f"{what} = sqrt({v}) is irrational; use approximate mode")
    return Fraction(math.sqrt(float(v))).limit_denominator(10**6), False


def _square_ring(x: Fraction, y: Fraction, side: Fraction) -> tuple[Point2, ...]:
    return (
        Point2(x, y),
        Point2(x + side, y),
        Point2(x + side, y + side),
        Point2(x, y + side),
    )


def _finalize_instance(
    per_color: dict[int, list[WeightedPolygon]], extra_points: list[Point2]
) -> tuple[PizzaInstance, Transform]:
    """Fit construction-coordinate masses into the unit square, mass-preserving.

    Coordinates shrink by the bounding-square side; weights grow by its
    square, so every mass keeps its construction-coordinate value exactly.
    Conceptual geometry (empty squares, tiles) is included in the bounding
    box via extra_points so the recorded records stay inside [0,1]^2.
    """
    pts = list(extra_points)
    for polys in per_color.values():
        for poly in polys:
            pts.extend(poly.outer)
    if not pts:
        raise InstanceError("reduction produced no geometry")
    min_x = min(p.x for p in pts)
    max_x = max(p.x for p in pts)
    min_y = min(p.y for p in pts)
    max_y = max(p.y for p in pts)
    if ZERO <= min_x and max_x <= ONE and ZERO <= min_y and max_y <= ONE:
        t = IDENTITY_TRANSFORM
        factor = ONE
    else:
        side = max(max_x - min_x, max_y - min_y)
        if side == 0:
            raise InstanceError("reduction produced a degenerate bounding box")
        t = Transform(-min_x, -min_y, ONE / side)
        factor = side * side
    masses = []
    for color in sorted(per_color):
        polys = [
            WeightedPolygon(
                weight=poly.weight * factor,
                outer=tuple(t.apply(p) for p in poly.outer),
            )
            for poly in per_color[color]
        ]
        masses.append(MassDistribution(color_id=color, polygons=tuple(polys)))
    inst = PizzaInstance(masses=tuple(masses), normalized=True)
    validate_instance(inst)
    return inst, t


def _interest_intervals(points: list[Fraction]) -> list[tuple[Fraction, Fraction]]:
    if len(points) < 2:
        raise InstanceError("need at least two points of interest")
    return list(zip(points, points[1:]))


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------


def reduce_overlapping(ch: CHInstance) -> tuple[PizzaInstance, ReductionMeta]:
    """Diagonal unit squares, one per interval of interest; colors overlap.

    Square j sits at (j, j) with side 1; agent i is present on it with
    uniform density c_ij * interval_width, so every CH value survives the
    encoding exactly.
    """
    validate_ch_instance(ch)
    for idx, agent in enumerate(ch.agents, start=1):
        if agent.triangle is not None:
            raise InstanceError(f"agent {idx}: overlapping reduction requires block valuations")
    points = points_of_interest(ch)
    intervals = _interest_intervals(points)
    per_color: dict[int, list[WeightedPolygon]] = {i: [] for i in range(1, ch.n + 1)}
    records = []
    extra: list[Point2] = []
    for j, (lo, hi) in enumerate(intervals, start=1):
        width = hi - lo
        sq = Fraction(j)
        records.append(SquareRecord(lo, hi, sq, sq, ONE))
        extra.extend(_square_ring(sq, sq, ONE))
        for i, agent in enumerate(ch.agents, start=1):
            dens = agent.density_on(lo, hi)
            if dens > 0:
                per_color[i].append(
                    WeightedPolygon(weight=dens * width, outer=_square_ring(sq, sq, ONE))
                )
    inst, t = _finalize_instance(per_color, extra)
    meta = ReductionMeta(
        kind="overlapping", points=tuple(points), transform=t, intervals=tuple(records)
    )
    return inst, meta


def reduce_checkerboard(
    ch: CHInstance, eps: Fraction, mode: str = "exact", granularity: int | None = None
) -> tuple[PizzaInstance, ReductionMeta]:
    """Non-overlapping encoding: diagonal blocks with Latin-pattern squarelets.

    Block j has side sqrt(n * width_j * c_max); it is divided into an
    (n*t_j)^2 cell grid and agent i fills the diagonal cell class
    (col - row) mod n == i-1 with centered squares sized so that the agent's
    block mass is exactly width_j * c_i.  Colors never overlap.  Exact mode
    rejects irrational side lengths; approximate mode snaps them and records
    the worst per-block mass deviation.
    """
    validate_ch_instance(ch)
    if mode not in ("exact", "approx"):
        raise InstanceError(f"unknown checkerboard mode {mode!r}")
    for idx, agent in enumerate(ch.agents, start=1):
        if agent.kind != "twoBlockUniform":
            raise InstanceError(f"agent {idx}: checkerboard reduction needs twoBlockUniform")
    if eps <= 0:
        raise InstanceError("eps must be positive")
    n = ch.n
    c_max = max(agent.density for agent in ch.agents)
    points = points_of_interest(ch)
    intervals = _interest_intervals(points)
    per_color: dict[int, list[WeightedPolygon]] = {i: [] for i in range(1, n + 1)}
    records = []
    extra: list[Point2] = []
    offset = ZERO
    worst_dev = ZERO
    snapped = False
    for (lo, hi) in intervals:
        width = hi - lo
        block_side, side_exact = _sqrt_or_snap(n * width * c_max, mode, "block side")
        snapped = snapped or not side_exact
        if granularity is not None:
            t_j = granularity
        else:
            root = _exact_sqrt(n * width)
            if root is not None and root.denominator == 1:
                t_j = int(root)
            else:
                t_j = max(1, math.ceil(math.sqrt(float(n * width))))
        rows = n * t_j
        cell = block_side / rows
        records.append(SquareRecord(lo, hi, offset, offset, block_side))
        extra.extend(_square_ring(offset, offset, block_side))
        for i, agent in enumerate(ch.agents, start=1):
            c_i = agent.density_on(lo, hi)
            if c_i == 0:
                continue
            target = width * c_i / (n * t_j * t_j)
            sq_side, sq_exact = _sqrt_or_snap(
                width * c_i / n, mode, f"square side for agent {i}"
            )
            sq_side = sq_side / t_j
            if sq_side > cell:
                sq_side = cell
            snapped = snapped or not sq_exact
            dev = abs(sq_side * sq_side - target)
            if target > 0:
                worst_dev = max(worst_dev, dev / target)
            margin = (cell - sq_side) / 2
            for row in range(rows):
                for col in range(rows):
                    if (col - row) % n != i - 1:
                        continue
                    x = offset + col * cell + margin
                    y = offset + row * cell + margin
                    per_color[i].append(
                        WeightedPolygon(weight=ONE, outer=_square_ring(x, y, sq_side))
                    )
        offset += block_side
    inst, t = _finalize_instance(per_color, extra)
    notes = []
    if snapped:
        notes.append(f"approximate sides; worst relative block-mass deviation {worst_dev}")
    meta = ReductionMeta(
        kind="checkerboard",
        points=tuple(points),
        transform=t,
        eps_out=eps * n / c_max,
        intervals=tuple(records),
        notes=tuple(notes),
    )
    return inst, meta


def straight_line_budget(n: int, delta: Fraction) -> int:
    """floor(h + h^(1-delta)) lines for h = ceil(n/2)."""
    h = (n + 1) // 2
    return math.floor(h + h ** (1 - float(delta)))


def reduce_straight(
    ch: CHInstance, eps: Fraction, delta: Fraction, mode: str = "exact"
) -> tuple[PizzaInstance, ReductionMeta]:
    """Parabola tiles for the straight-cut problem.

    The interval is split into steps of d = 1/lcm(endpoint denominators,
    floor(1/eps^2)+1) < eps^2; step j gets the conceptual tile with
    bottom-left corner (j, j^2) and side 1, and each agent valuing the step
    gets a square of side sqrt(c_i)*eps anchored at (j + i/n, j^2 + i/n).
    Squarelet weights are d/eps^2 so each square's mass is exactly the
    agent's value c_i*d of its step.
    """
    validate_ch_instance(ch)
    if mode not in ("exact", "approx"):
        raise InstanceError(f"unknown straight mode {mode!r}")
    for idx, agent in enumerate(ch.agents, start=1):
        if agent.kind != "twoBlockUniform":
            raise InstanceError(f"agent {idx}: straight reduction needs twoBlockUniform")
        for a, b, _ in agent.blocks:
            if a < 0 or b > 1:
                raise InstanceError(f"agent {idx}: straight reduction expects blocks in [0,1]")
    if eps <= 0:
        raise InstanceError("eps must be positive")
    if not (0 < delta < 1):
        raise InstanceError("delta must lie strictly between 0 and 1")
    n = ch.n
    points = points_of_interest(ch)
    denoms = [p.denominator for p in points]
    grid = lcm(*denoms, math.floor(1 / (eps * eps)) + 1)
    d = Fraction(1, grid)
    sides = []
    snapped = False
    for i, agent in enumerate(ch.agents, start=1):
        root, exact = _sqrt_or_snap(agent.density, mode, f"square side for agent {i}")
        sides.append(root * eps)
        snapped = snapped or not exact
    weight = d / (eps * eps)
    per_color: dict[int, list[WeightedPolygon]] = {i: [] for i in range(1, n + 1)}
    extra: list[Point2] = []
    pad = max(max(Fraction(i, n) + sides[i - 1] for i in range(1, n + 1)), ONE)
    for j in range(1, grid + 1):
        lo, hi = Fraction(j - 1, grid), Fraction(j, grid)
        tile = Fraction(j)
        extra.append(Point2(tile, tile * tile))
        extra.append(Point2(tile + pad, tile * tile + pad))
        for i, agent in enumerate(ch.agents, start=1):
            if agent.density_on(lo, hi) == 0:
                continue
            anchor_x = tile + Fraction(i, n)
            anchor_y = tile * tile + Fraction(i, n)
            per_color[i].append(
                WeightedPolygon(
                    weight=weight, outer=_square_ring(anchor_x, anchor_y, sides[i - 1])
                )
            )
    inst, t = _finalize_instance(per_color, extra)
    notes = ["weights d/eps^2 make each square's mass its step value"]
    if snapped:
        notes.append("approximate square sides")
    meta = ReductionMeta(
        kind="straight",
        points=tuple(points),
        transform=t,
        eps_out=eps,
        d=d,
        delta=delta,
        budget=straight_line_budget(n, delta),
        tile_count=grid,
        square_sides=tuple(sides),
        notes=tuple(notes),
    )
    return inst, meta


GADGET_WEIGHT = Fraction(2)


def reduce_exact(ch: CHInstance) -> tuple[PizzaInstance, ReductionMeta]:
    """Overlapping squares plus a quadratic triangle gadget per triangle part.

    A triangle valuation on [a, a+1] becomes the right triangle with
    vertices (j, j+1), (j+1, j), (j+1, j+1) and weight 2: a straight
    crossing of its square at fraction u then cuts off mass exactly u^2,
    matching the valuation's cumulative law.
    """
    validate_ch_instance(ch)
    for idx, agent in enumerate(ch.agents, start=1):
        if agent.kind == "twoBlockUniform":
            raise InstanceError(f"agent {idx}: exact reduction expects kBlock/blockPlusTriangle")
    points = points_of_interest(ch)
    intervals = _interest_intervals(points)
    per_color: dict[int, list[WeightedPolygon]] = {i: [] for i in range(1, ch.n + 1)}
    records = []
    extra: list[Point2] = []
    gadget_at: dict[int, bool] = {}
    for i, agent in enumerate(ch.agents, start=1):
        if agent.triangle is None:
            continue
        a, b = agent.triangle
        j = points.index(a) + 1
        if points[j] != b:
            raise InstanceError(
                f"agent {i}: triangle [{a}, {b}] spans multiple intervals of interest"
            )
        gadget_at[j] = True
    for j, (lo, hi) in enumerate(intervals, start=1):
        width = hi - lo
        sq = Fraction(j)
        records.append(SquareRecord(lo, hi, sq, sq, ONE, gadget=gadget_at.get(j, False)))
        extra.extend(_square_ring(sq, sq, ONE))
        for i, agent in enumerate(ch.agents, start=1):
            dens = agent.density_on(lo, hi)
            if dens > 0:
                per_color[i].append(
                    WeightedPolygon(weight=dens * width, outer=_square_ring(sq, sq, ONE))
                )
            if agent.triangle is not None and agent.triangle[0] == lo:
                per_color[i].append(
                    WeightedPolygon(
                        weight=GADGET_WEIGHT,
                        outer=(Point2(sq, sq + 1), Point2(sq + 1, sq), Point2(sq + 1, sq + 1)),
                    )
                )
    inst, t = _finalize_instance(per_color, extra)
    meta = ReductionMeta(
        kind="exact",
        points=tuple(points),
        transform=t,
        intervals=tuple(records),
        notes=(f"gadget weight {GADGET_WEIGHT}",),
    )
    return inst, meta


# ---------------------------------------------------------------------------
# Map-backs
# ---------------------------------------------------------------------------


def _corner_label(sol: FeasibleSolution, pt: Point2, dx: int, dy: int, base: Fraction) -> str:
    """Side label of pt as the limit along the diagonal ray into the square.

    The side function changes along the ray only where it crosses a slice
    level or a cut abscissa, so stepping half the distance to the nearest
    such crossing lands strictly inside one constant-side cell.
    """
    dists = [base]
    for level in sol.y_levels:
        t = (level - pt.y) * dy
        if t > 0:
            dists.append(t)
    for cut in sol.x:
        t = (cut - pt.x) * dx
        if t > 0:
            dists.append(t)
    step = min(dists) / 2
    q = Point2(pt.x + dx * step, pt.y + dy * step)
    side = point_side(sol, q)
    if side == "boundary":
        raise InstanceError("corner probe landed on the path; degenerate geometry")
    return "+" if side == "A" else "-"


def _square_positive_fraction(
    sol: FeasibleSolution, origin: Point2, side: Fraction
) -> Fraction:
    """Exact fraction of an axis-aligned square lying on side A."""
    area = ZERO
    for _, lo, hi, sign, cut in strip_table(sol):
        band_lo = max(lo, origin.y)
        band_hi = min(hi, origin.y + side)
        if band_hi <= band_lo:
            continue
        if cut is None:
            width = side if sign > 0 else ZERO
        else:
            left = min(max(cut - origin.x, ZERO), side)
            width = left if sign > 0 else side - left
        area += width * (band_hi - band_lo)
    return area / (side * side)


def path_to_ch_cuts(meta: ReductionMeta, sol: FeasibleSolution) -> CHSolution:
    """Map a square-cut path back to consensus-halving cuts.

    Within interval of interest j the positive label receives a run of
    length a_j * width_j, where a_j is the side-A area fraction of square
    j; the run sits at the end of the interval touching the upper corner
    when that corner is on side A, at the start otherwise.  Cuts appear
    where consecutive run labels differ, giving one interior cut when the
    square's corners lie on opposite sides and an extra corner cut when
    they agree.
    """
    if meta.kind not in ("overlapping", "checkerboard", "exact"):
        raise InstanceError(f"map-back needs a square-style reduction, not {meta.kind!r}")
    if not meta.intervals:
        raise InstanceError("reduction meta carries no interval records")
    t = meta.transform
    segs: list[tuple[str, Fraction]] = []
    for rec in meta.intervals:
        width = rec.x_hi - rec.x_lo
        origin = t.apply(Point2(rec.sq_x, rec.sq_y))
        side = rec.side * t.scale
        upper = Point2(origin.x + side, origin.y + side)
        label_hi = _corner_label(sol, upper, -1, -1, side / 4)
        frac = _square_positive_fraction(sol, origin, side)
        plus_run = frac * width
        if label_hi == "+":
            segs.append(("-", width - plus_run))
            segs.append(("+", plus_run))
        else:
            segs.append(("+", plus_run))
            segs.append(("-", width - plus_run))
    cuts: list[Fraction] = []
    first_label: str | None = None
    current: str | None = None
    pos = meta.points[0]
    for label, length in segs:
        if length == 0:
            continue
        if current is None:
            first_label = label
        elif label != current:
            cuts.append(pos)
        current = label
        pos += length
    if first_label is None:
        raise InstanceError("all intervals of interest are empty")
    turns = solution_to_path(sol).turns
    if len(cuts) > turns + 1:
        raise InstanceError(
            f"path leaves the diagonal corridor: {len(cuts)} cuts from {turns} turns"
        )
    return CHSolution(cuts=tuple(cuts), first_label=first_label)


# ---------------------------------------------------------------------------
# Straight-line map-back
# ---------------------------------------------------------------------------


def _tile_rects(meta: ReductionMeta) -> list[tuple[Fraction, Fraction, Fraction, Fraction]]:
    """Normalized bounding boxes of the tiles including their squarelets."""
    if meta.kind != "straight" or meta.tile_count is None:
        raise InstanceError("straight-reduction meta required")
    n = len(meta.square_sides)
    pad = max(
        max((Fraction(i, n) + s for i, s in enumerate(meta.square_sides, start=1)), default=ONE),
        ONE,
    )
    t = meta.transform
    rects = []
    for j in range(1, meta.tile_count + 1):
        x, y = Fraction(j), Fraction(j) ** 2
        rects.append((t.apply_x(x), t.apply_y(y), t.apply_x(x + pad), t.apply_y(y + pad)))
    return rects


def _line_crosses_rect(
    line: tuple[Fraction, Fraction, Fraction],
    rect: tuple[Fraction, Fraction, Fraction, Fraction],
) -> bool:
    a, b, c = line
    x0, y0, x1, y1 = rect
    vals = [a * x + b * y - c for x in (x0, x1) for y in (y0, y1)]
    return min(vals) < 0 < max(vals)


def _canon_dir(v: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
    """Direction representative modulo sign, L1-normalized (angle in [0, pi))."""
    x, y = v
    if y < 0 or (y == 0 and x < 0):
        x, y = -x, -y
    norm = abs(x) + abs(y)
    if norm == 0:
        raise InstanceError("zero direction")
    return (x / norm, y / norm)


def _angle_cmp(u: tuple[Fraction, Fraction], v: tuple[Fraction, Fraction]) -> int:
    cr = u[0] * v[1] - u[1] * v[0]
    if cr > 0:
        return -1
    if cr < 0:
        return 1
    return 0


def _rotate_line(
    line: tuple[Fraction, Fraction, Fraction],
    rects: list[tuple[Fraction, Fraction, Fraction, Fraction]],
    pivot_x: Fraction,
    pivot_y: Fraction,
) -> tuple[Fraction, Fraction, Fraction]:
    """Rotate a tile-crossing line about its pivot until it clears every rect.

    The pivot is the line's intersection with the vertical x = pivot_x
    left of all tiles (for vertical lines, with the horizontal y = pivot_y
    below them).  Candidate orientations are the tangency directions to
    rect corners and one representative inside each wedge between
    consecutive tangencies; the sweep walks counterclockwise from the
    line's own direction and returns the first orientation crossing no
    rect.  Inside a wedge the crossing set is constant, so some candidate
    always succeeds.
    """
    a, b, c = line
    if b != 0:
        pivot = Point2(pivot_x, (c - a * pivot_x) / b)
    else:
        pivot = Point2(c / a, pivot_y)
    corners = set()
    for x0, y0, x1, y1 in rects:
        corners.update((Point2(x, y) for x in (x0, x1) for y in (y0, y1)))
    dirs = sorted(
        {_canon_dir((q.x - pivot.x, q.y - pivot.y)) for q in corners},
        key=cmp_to_key(_angle_cmp),
    )
    candidates: list[tuple[Fraction, Fraction]] = []
    for i, d in enumerate(dirs):
        candidates.append(d)
        if i + 1 < len(dirs):
            nxt = dirs[i + 1]
        else:
            nxt = (-dirs[0][0], -dirs[0][1])
        mid = (d[0] + nxt[0], d[1] + nxt[1])
        if mid == (ZERO, ZERO):
            mid = (-d[1], d[0])
        candidates.append(_canon_dir(mid))
    u0 = _canon_dir((-b, a))
    start = 0
    while start < len(candidates) and _angle_cmp(candidates[start], u0) <= 0:
        start += 1
    for offset in range(len(candidates)):
        w = candidates[(start + offset) % len(candidates)]
        cand = (-w[1], w[0], -w[1] * pivot.x + w[0] * pivot.y)
        if not any(_line_crosses_rect(cand, r) for r in rects):
            return cand
    raise InstanceError("no clearing orientation found; tiles overlap the pivot line")


def rotate_lines(meta: ReductionMeta, lines: StraightCutSet) -> StraightCutSet:
    """Replace every tile-crossing line by a rotated, tile-free one."""
    rects = _tile_rects(meta)
    pivot_x = meta.transform.apply_x(Fraction(-1))
    pivot_y = meta.transform.apply_y(Fraction(-1))
    out = []
    for line in lines.lines:
        if any(_line_crosses_rect(line, r) for r in rects):
            out.append(_rotate_line(line, rects, pivot_x, pivot_y))
        else:
            out.append(line)
    return StraightCutSet(tuple(out))


def tile_labels(meta: ReductionMeta, lines: StraightCutSet) -> list[str]:
    """Parity label of every tile: '+' for an even count of positive sides."""
    if meta.kind != "straight" or meta.tile_count is None:
        raise InstanceError("straight-reduction meta required")
    t = meta.transform
    labels = []
    for j in range(1, meta.tile_count + 1):
        cx = t.apply_x(Fraction(j) + Fraction(1, 2))
        cy = t.apply_y(Fraction(j) ** 2 + Fraction(1, 2))
        positive = sum(1 for a, b, c in lines.lines if a * cx + b * cy - c > 0)
        labels.append("+" if positive % 2 == 0 else "-")
    return labels


def lines_to_ch_cuts(meta: ReductionMeta, lines: StraightCutSet) -> CHSolution:
    """Map straight-line cuts back to consensus-halving cuts.

    Tile-crossing lines are first rotated until tile-free; each tile is
    then classified by the parity of positive line sides at its center and
    a cut is emitted at j*d wherever consecutive tiles' labels change.
    """
    if meta.d is None or meta.tile_count is None:
        raise InstanceError("straight-reduction meta required")
    cleared = rotate_lines(meta, lines)
    labels = tile_labels(meta, cleared)
    cuts = [
        meta.d * j
        for j, (cur, nxt) in enumerate(zip(labels, labels[1:]), start=1)
        if cur != nxt
    ]
    return CHSolution(cuts=tuple(cuts), first_label=labels[0])


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CHReport:
    ok: bool
    eps: Fraction
    gaps: tuple[Fraction, ...]
    positive_values: tuple[Fraction, ...]
    cut_count: int


@dataclass(frozen=True)
class StraightReport:
    ok: bool
    eps: Fraction
    gaps: tuple[Fraction, ...]
    masses: tuple[tuple[Fraction, Fraction], ...]


@dataclass(frozen=True)
class PathReport:
    ok: bool
    eps: Fraction
    gaps: tuple[Fraction, ...]
    masses: tuple[tuple[Fraction, Fraction], ...]
    turns: int
    turn_budget: int
    warnings: tuple[str, ...] = ()


def ch_domain(ch: CHInstance) -> tuple[Fraction, Fraction]:
    pts = points_of_interest(ch)
    return min(ZERO, pts[0]), max(ONE, pts[-1])


def ch_positive_value(ch: CHInstance, sol: CHSolution) -> tuple[Fraction, ...]:
    """Each agent's exact value of the '+' labeled pieces."""
    lo, hi = ch_domain(ch)
    values = []
    for agent in ch.agents:
        total = ZERO
        for a, b, label in sol.segments(lo, hi):
            if label == "+":
                total += agent.value(a, b)
        values.append(total)
    return tuple(values)


def verify_ch(ch: CHInstance, sol: CHSolution, eps: Fraction) -> CHReport:
    """Exact consensus-halving check: every |v_i(+) - v_i(-)| <= eps."""
    validate_ch_instance(ch)
    lo, hi = ch_domain(ch)
    for cut in sol.cuts:
        if not (lo <= cut <= hi):
            raise InstanceError(f"cut {cut} outside the valuation domain [{lo}, {hi}]")
    plus = ch_positive_value(ch, sol)
    gaps = tuple(abs(2 * v - 1) for v in plus)
    return CHReport(
        ok=all(g <= eps for g in gaps),
        eps=eps,
        gaps=gaps,
        positive_values=plus,
        cut_count=len(sol.cuts),
    )


def _split_by_line(
    pts: list[Point2], a: Fraction, b: Fraction, c: Fraction
) -> tuple[list[Point2], list[Point2]]:
    """Split a convex polygon into (positive-side, negative-side) parts."""
    return _clip_halfplane(pts, -a, -b, -c), _clip_halfplane(pts, a, b, c)


def line_side_masses(
    inst: PizzaInstance, lines: StraightCutSet
) -> list[tuple[Fraction, Fraction]]:
    """Exact per-color masses of the even/odd parity classes of a line set."""
    from .geometry import split_obtuse, triangulate

    out = []
    for mass in inst.masses:
        buckets = [ZERO, ZERO]

        def descend(pts: list[Point2], idx: int, positives: int, weight: Fraction) -> None:
            if len(pts) < 3:
                return
            area = _poly_area(pts)
            if area == 0:
                return
            if idx == len(lines.lines):
                buckets[positives % 2] += weight * area
                return
            a, b, c = lines.lines[idx]
            pos, neg = _split_by_line(pts, a, b, c)
            descend(pos, idx + 1, positives + 1, weight)
            descend(neg, idx + 1, positives, weight)

        for poly in mass.polygons:
            for tri in triangulate(poly):
                descend(list(tri.vertices()), 0, 0, tri.weight)
        out.append((buckets[0], buckets[1]))
    return out


def verify_straight(inst: PizzaInstance, lines: StraightCutSet, eps: Fraction) -> StraightReport:
    """Exact straight-cut check via recursive polygon splitting.

    R+ is the even-parity class: cells on the positive side of an even
    number of lines.  Each color's triangles are split along every line and
    the piece areas accumulate into the two parity buckets.
    """
    masses = tuple(line_side_masses(inst, lines))
    gaps = tuple(abs(p - m) for p, m in masses)
    return StraightReport(ok=all(g <= eps for g in gaps), eps=eps, gaps=gaps, masses=masses)


def verify_scpath(
    inst: PizzaInstance,
    sol: FeasibleSolution,
    eps: Fraction,
    meta: ReductionMeta | None = None,
) -> PathReport:
    """Independent square-cut check through the clipping oracle.

    Passes iff every per-color gap is at most eps and the path's turn count
    fits the budget implied by the solution shape.  With exact-reduction
    meta, turns landing strictly inside a gadget square are flagged (they
    break the quadratic gadget's value correspondence).
    """
    masses = tuple(region_mass_oracle(inst, sol))
    gaps = tuple(abs(a - b) for a, b in masses)
    path = solution_to_path(sol)
    budget = (len(sol.z) - 1) + len(sol.x) - 1
    warnings = []
    if meta is not None and meta.kind == "exact":
        from .scpath import path_polyline

        pts, _ = path_polyline(path)
        for j, rec in enumerate(meta.intervals, start=1):
            if not rec.gadget:
                continue
            origin = meta.transform.apply(Point2(rec.sq_x, rec.sq_y))
            side = rec.side * meta.transform.scale
            for q in pts[1:-1]:
                if origin.x < q.x < origin.x + side and origin.y < q.y < origin.y + side:
                    warnings.append(f"path turns inside gadget square {j}")
                    break
    return PathReport(
        ok=all(g <= eps for g in gaps) and path.turns <= budget,
        eps=eps,
        gaps=gaps,
        masses=masses,
        turns=path.turns,
        turn_budget=budget,
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def parse_ch_instance(text: str) -> CHInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "agents" not in doc:
        raise InstanceError("consensus-halving file needs an 'agents' list")
    agents = []
    for raw in doc["agents"]:
        blocks = tuple(
            (parse_scalar(a), parse_scalar(b), parse_scalar(c)) for a, b, c in raw.get("blocks", [])
        )
        triangle = None
        if raw.get("triangle") is not None:
            ta, tb = raw["triangle"]
            triangle = (parse_scalar(ta), parse_scalar(tb))
        agents.append(CHValuation(kind=raw["kind"], blocks=blocks, triangle=triangle))
    ch = CHInstance(agents=tuple(agents))
    validate_ch_instance(ch)
    return ch


def serialize_ch_instance(ch: CHInstance) -> str:
    doc = {
        "agents": [
            {
                "kind": agent.kind,
                "blocks": [
                    [format_scalar(a), format_scalar(b), format_scalar(c)]
                    for a, b, c in agent.blocks
                ],
                **(
                    {"triangle": [format_scalar(agent.triangle[0]), format_scalar(agent.triangle[1])]}
                    if agent.triangle is not None
                    else {}
                ),
            }
            for agent in ch.agents
        ]
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def parse_ch_solution(text: str) -> CHSolution:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from exc
    return CHSolution(
        cuts=tuple(parse_scalar(c) for c in doc.get("cuts", [])),
        first_label=doc.get("first_label", "+"),
    )


def serialize_ch_solution(sol: CHSolution) -> str:
    doc = {"cuts": [format_scalar(c) for c in sol.cuts], "first_label": sol.first_label}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def parse_lines(text: str) -> StraightCutSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "lines" not in doc:
        raise InstanceError("lines file needs a 'lines' list of [a, b, c] triples")
    return StraightCutSet(
        tuple((parse_scalar(a), parse_scalar(b), parse_scalar(c)) for a, b, c in doc["lines"])
    )


def serialize_lines(lines: StraightCutSet) -> str:
    doc = {
        "lines": [[format_scalar(a), format_scalar(b), format_scalar(c)] for a, b, c in lines.lines]
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def serialize_meta(meta: ReductionMeta) -> str:
    doc = {
        "kind": meta.kind,
        "points": [format_scalar(p) for p in meta.points],
        "transform": meta.transform.to_doc(),
        "eps_out": format_scalar(meta.eps_out) if meta.eps_out is not None else None,
        "intervals": [
            {
                "x_lo": format_scalar(r.x_lo),
                "x_hi": format_scalar(r.x_hi),
                "sq_x": format_scalar(r.sq_x),
                "sq_y": format_scalar(r.sq_y),
                "side": format_scalar(r.side),
                "gadget": r.gadget,
            }
            for r in meta.intervals
        ],
        "d": format_scalar(meta.d) if meta.d is not None else None,
        "delta": format_scalar(meta.delta) if meta.delta is not None else None,
        "budget": meta.budget,
        "tile_count": meta.tile_count,
        "square_sides": [format_scalar(s) for s in meta.square_sides],
        "notes": list(meta.notes),
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def parse_meta(text: str) -> ReductionMeta:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from exc
    return ReductionMeta(
        kind=doc["kind"],
        points=tuple(parse_scalar(p) for p in doc["points"]),
        transform=Transform.from_doc(doc["transform"]),
        eps_out=parse_scalar(doc["eps_out"]) if doc.get("eps_out") is not None else None,
        intervals=tuple(
            SquareRecord(
                x_lo=parse_scalar(r["x_lo"]),
                x_hi=parse_scalar(r["x_hi"]),
                sq_x=parse_scalar(r["sq_x"]),
                sq_y=parse_scalar(r["sq_y"]),
                side=parse_scalar(r["side"]),
                gadget=bool(r.get("gadget", False)),
            )
            for r in doc.get("intervals", [])
        ),
        d=parse_scalar(doc["d"]) if doc.get("d") is not None else None,
        delta=parse_scalar(doc["delta"]) if doc.get("delta") is not None else None,
        budget=doc.get("budget"),
        tile_count=doc.get("tile_count"),
        square_sides=tuple(parse_scalar(s) for s in doc.get("square_sides", [])),
        notes=tuple(doc.get("notes", [])),
    )
