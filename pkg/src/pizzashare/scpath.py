"""L1-sphere points, slice/cut solutions, and square-cut paths.

A k-turn budget is encoded by a point on the L1 sphere of radius k+1 in
dimension k+2, laid out as (Z_1..Z_s, R, X_1..X_{k+1-s}) with
s = ceil((k+1)/2).  Decoding produces s+1 signed horizontal slices z_i
(summing to 1 in absolute value) and k+1-s vertical cut abscissae x_i.
Slice i+1 spans [y_i, y_{i+1}] and is split at x = x_i; a + sign puts the
slice's left part on side A, a - sign its right part; the bottom slice (and,
in even-budget layouts, the top slice) has no cut and carries its sign
uniformly.  The region boundary is a y-monotone rectilinear path that may
wrap around horizontally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .geometry import (
    InstanceError,
    Point2,
    Scalar,
    format_scalar,
    parse_scalar,
)

ZERO = Fraction(0)
ONE = Fraction(1)

Side = Literal["A", "B"]


def slice_count(k: int) -> int:
    """Number s of Z coordinates for a k-turn budget."""
    return (k + 2) // 2


@dataclass(frozen=True)
class SpherePoint:
    coords: tuple[Fraction, ...]
    radius: Fraction

    @property
    def k(self) -> int:
        return len(self.coords) - 2

    @property
    def s(self) -> int:
        return slice_count(self.k)


def make_sphere_point(coords: tuple[Fraction, ...] | list[Fraction], radius: Fraction | int) -> SpherePoint:
    coords = tuple(Fraction(c) for c in coords)
    radius = Fraction(radius)
    if len(coords) < 2:
        raise InstanceError("sphere point needs at least 2 coordinates")
    if radius != len(coords) - 1:
        raise InstanceError(
            f"radius {radius} does not match dimension {len(coords)} (expected {len(coords) - 1})"
        )
    total = sum(abs(c) for c in coords)
    if total != radius:
        raise InstanceError(f"coordinates have L1 norm {total}, expected {radius}")
    return SpherePoint(coords, radius)


def antipode(p: SpherePoint) -> SpherePoint:
    """Negate every coordinate; an involution on the sphere."""
    return SpherePoint(tuple(-c for c in p.coords), p.radius)


@dataclass(frozen=True)
class FeasibleSolution:
    """Signed slices z (sum of |z_i| = 1) and cut abscissae x in [0,1].

    z_signs/x_signs keep the decoded signs even for zero-magnitude entries
    (a slice of zero thickness still remembers which sign it came from).
    """

    z: tuple[Fraction, ...]
    z_signs: tuple[int, ...]
    x: tuple[Fraction, ...]
    x_signs: tuple[int, ...]

    def __post_init__(self) -> None:
        if sum(abs(v) for v in self.z) != ONE:
            raise InstanceError("slice thicknesses must sum to 1")
        if any(not (ZERO <= v <= ONE) for v in self.x):
            raise InstanceError("cut abscissae must lie in [0,1]")

    @property
    def y_levels(self) -> tuple[Fraction, ...]:
        """y_0 = 0, y_i = y_{i-1} + |z_i|; y_{len(z)} = 1."""
        levels = [ZERO]
        for v in self.z:
            levels.append(levels[-1] + abs(v))
        return tuple(levels)

    def cut_of(self, slice_idx: int) -> Fraction | None:
        """Cut abscissa of 1-based slice slice_idx, or None if uncut."""
        j = slice_idx - 2
        if 0 <= j < len(self.x):
            return self.x[j]
        return None


def make_solution(z: list[Fraction], x: list[Fraction]) -> FeasibleSolution:
    z = [Fraction(v) for v in z]
    x = [Fraction(v) for v in x]
    return FeasibleSolution(
        z=tuple(z),
        z_signs=tuple(-1 if v < 0 else 1 for v in z),
        x=tuple(x),
        x_signs=tuple(1 for _ in x),
    )


def sphere_to_solution(p: SpherePoint) -> FeasibleSolution:
    """Decode a sphere point into slices and cuts.

    |z_i| = min(sum_{j<=i} |Z_j|, 1) - sum_{j<i} |z_j| (saturating),
    |z_{s+1}| = 1 - sum |z_j|, signs copied from Z_i and R; x_i = min(|X_i|, 1)
    with the sign of X_i recorded but geometrically unused.
    """
    s = p.s
    zs = p.coords[:s]
    r = p.coords[s]
    xs = p.coords[s + 1 :]
    z_vals: list[Fraction] = []
    z_signs: list[int] = []
    u_prev = ZERO
    cum = ZERO
    for coord in zs:
        cum += abs(coord)
        u = min(cum, ONE)
        mag = u - u_prev
        sign = -1 if coord < 0 else 1
        z_vals.append(mag if sign > 0 else -mag)
        z_signs.append(sign)
        u_prev = u
    mag = ONE - u_prev
    sign = -1 if r < 0 else 1
    z_vals.append(mag if sign > 0 else -mag)
    z_signs.append(sign)
    x_vals = [min(abs(coord), ONE) for coord in xs]
    x_signs = [-1 if coord < 0 else 1 for coord in xs]
    return FeasibleSolution(tuple(z_vals), tuple(z_signs), tuple(x_vals), tuple(x_signs))


def solution_to_sphere(sol: FeasibleSolution) -> SpherePoint:
    """Canonical embedding: Z_i = z_i, X_i = x_i, |R| = radius - rest.

    Decoding the embedded point reproduces sol (up to signs of zero entries).
    """
    s = len(sol.z) - 1
    k = s + len(sol.x) - 1
    if slice_count(k) != s:
        raise InstanceError("solution shape matches no turn budget")
    radius = Fraction(k + 1)
    r_mag = radius - sum(abs(v) for v in sol.z[:s]) - sum(sol.x, ZERO)
    if r_mag < 0:
        raise InstanceError("solution does not embed (cuts too large?)")
    r = r_mag if sol.z_signs[s] > 0 else -r_mag
    coords = tuple(sol.z[:s]) + (r,) + tuple(sol.x)
    return SpherePoint(coords, radius)


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HSeg:
    """Horizontal travel at height y from x_from to x_to.

    With wrap=True the travel leaves x_from away from x_to, crosses the
    x=0/x=1 seam, and arrives at x_to from the other side.
    """

    y: Fraction
    x_from: Fraction
    x_to: Fraction
    wrap: bool = False


@dataclass(frozen=True)
class VSeg:
    """Vertical ascent at abscissa x from y_from up to y_to."""

    x: Fraction
    y_from: Fraction
    y_to: Fraction


Segment = HSeg | VSeg


@dataclass(frozen=True)
class SCPath:
    segments: tuple[Segment, ...]
    solution: FeasibleSolution
    turns: int


def _strip_table(sol: FeasibleSolution) -> list[tuple[int, Fraction, Fraction, int, Fraction | None]]:
    """Nonzero strips as (slice_idx, lo, hi, sign, cut-or-None)."""
    levels = sol.y_levels
    strips = []
    for idx in range(1, len(sol.z) + 1):
        lo, hi = levels[idx - 1], levels[idx]
        if lo == hi:
            continue
        strips.append((idx, lo, hi, sol.z_signs[idx - 1], sol.cut_of(idx)))
    return strips


def _interface_arc(
    sign_below: int,
    cut_below: Fraction | None,
    sign_above: int,
    cut_above: Fraction | None,
) -> tuple[Fraction, Fraction, bool] | None:
    """Horizontal boundary arc between two stacked strips.

    Returns (x_from, x_to, wrap) for the arc along which the two strips'
    side-A subsets differ, or None when they agree (no boundary, path
    continues straight up).  Arc endpoints connect to the strips' verticals
    (or to the square boundary for uncut strips).
    """
    same = sign_below == sign_above
    if cut_below is not None and cut_above is not None:
        if same:
            if cut_below == cut_above:
                return None
            return (cut_below, cut_above, False)
        return (cut_below, cut_above, True)
    if cut_below is None and cut_above is None:
        if same:
            return None
        return (ZERO, ONE, False)
    if cut_below is None:
        start = ONE if same else ZERO
        return (start, cut_above, False)
    end = ONE if same else ZERO
    return (cut_below, end, False)


def solution_to_path(sol: FeasibleSolution) -> SCPath:
    """Reconstruct the y-monotone boundary path of the side-A region.

    Within each nonzero cut strip the path ascends the strip's vertical cut;
    between consecutive nonzero strips it travels horizontally (wrapping at
    the x=0/x=1 seam when the strip signs disagree) from the lower cut to the
    upper one.  Zero-thickness strips are skipped.
    """
    strips = _strip_table(sol)
    if not strips:
        raise InstanceError("all slices have zero thickness")
    segments: list[Segment] = []
    for i, (idx, lo, hi, sign, cut) in enumerate(strips):
        if cut is not None:
            if segments and isinstance(segments[-1], VSeg) and segments[-1].x == cut:
                prev = segments.pop()
                segments.append(VSeg(cut, prev.y_from, hi))
            else:
                segments.append(VSeg(cut, lo, hi))
        if i + 1 < len(strips):
            _, _, _, sign_up, cut_up = strips[i + 1]
            arc = _interface_arc(sign, cut, sign_up, cut_up)
            if arc is not None:
                x_from, x_to, wrap = arc
                segments.append(HSeg(hi, x_from, x_to, wrap))
    turns = 0
    for a, b in zip(segments, segments[1:]):
        if isinstance(a, HSeg) != isinstance(b, HSeg):
            turns += 1
    return SCPath(tuple(segments), sol, turns)


def turn_count(path: SCPath) -> int:
    """Number of horizontal/vertical junctions along the path."""
    return path.turns


def point_side(sol: FeasibleSolution, q: Point2) -> Side | Literal["boundary"]:
    """Which side of the cut q lies on: 'A', 'B', or 'boundary'.

    A cut strip with sign + has its left part on side A; sign - its right
    part; an uncut strip lies wholly on side A iff its sign is +.  Points on
    the path (strip interface where the sides differ, or exactly on a
    vertical cut) are classified 'boundary'.
    """
    if not (ZERO <= q.x <= ONE and ZERO <= q.y <= ONE):
        raise InstanceError("query point outside the unit square")
    sides: set[str] = set()
    for idx, lo, hi, sign, cut in _strip_table(sol):
        if not (lo <= q.y <= hi):
            continue
        if cut is None:
            sides.add("A" if sign > 0 else "B")
        elif q.x == cut:
            sides.update(("A", "B"))
        elif (q.x < cut) == (sign > 0):
            sides.add("A")
        else:
            sides.add("B")
    if len(sides) != 1:
        return "boundary"
    return next(iter(sides))  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------


def path_polyline(path: SCPath) -> tuple[list[Point2], list[bool]]:
    """Turn-point polyline plus per-edge wrap flags."""
    pts: list[Point2] = []
    wraps: list[bool] = []
    for seg in path.segments:
        if isinstance(seg, VSeg):
            start = Point2(seg.x, seg.y_from)
            end = Point2(seg.x, seg.y_to)
            wrap = False
        else:
            start = Point2(seg.x_from, seg.y)
            end = Point2(seg.x_to, seg.y)
            wrap = seg.wrap
        if not pts:
            pts.append(start)
        pts.append(end)
        wraps.append(wrap)
    return pts, wraps


def serialize_path(p: SpherePoint) -> str:
    """Path/solution document; the sphere coordinates are authoritative."""
    sol = sphere_to_solution(p)
    path = solution_to_path(sol)
    pts, wraps = path_polyline(path)
    doc = {
        "radius": format_scalar(p.radius),
        "coords": [format_scalar(c) for c in p.coords],
        "z": [format_scalar(v) for v in sol.z],
        "x": [format_scalar(v) for v in sol.x],
        "polyline": [[format_scalar(pt.x), format_scalar(pt.y)] for pt in pts],
        "wraps": wraps,
    }
    return json.dumps(doc, indent=1) + "\n"


def parse_path(text: str) -> SpherePoint:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid path document: {exc}") from exc
    if not isinstance(doc, dict) or "coords" not in doc or "radius" not in doc:
        raise InstanceError('path document must contain "coords" and "radius"')
    coords = tuple(parse_scalar(c) for c in doc["coords"])
    radius = parse_scalar(doc["radius"])
    return make_sphere_point(coords, radius)
