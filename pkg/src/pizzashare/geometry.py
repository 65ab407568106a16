"""Exact planar geometry for pizza-sharing instances.

Parses, validates, normalizes, triangulates, and decomposes polygonal mass
distributions into signed axis-aligned right-triangle atoms.  Every quantity
is an exact rational; no floating point enters this module.

Pipeline: parse_instance -> normalize_instance -> triangulate -> split_obtuse
-> decompose_axis_aligned.  The resulting atoms are the unit of all measure
computations downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class InstanceError(ValueError):
    """Raised for malformed or invalid instance data (CLI exit code 2)."""


def parse_scalar(text: str | int) -> Fraction:
    """Parse an exact rational from "p/q", an integer, or a finite decimal."""
    if isinstance(text, bool):
        raise InstanceError(f"not a numeral: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise InstanceError(f"not a numeral: {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceError(f"malformed numeral: {text!r}") from exc


def format_scalar(value: Fraction) -> str:
    """Canonical lowest-terms string: "p/q", or "p" for integers."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Point2:
    x: Fraction
    y: Fraction

    def __iter__(self) -> Iterator[Fraction]:
        yield self.x
        yield self.y


Chain = tuple[Point2, ...]


@dataclass(frozen=True)
class WeightedPolygon:
    """A solid polygon (CCW outer chain) with optional CW hole chains."""

    weight: Fraction
    outer: Chain
    holes: tuple[Chain, ...] = ()

    def net_area(self) -> Fraction:
        return chain_signed_area(self.outer) + sum(
            (chain_signed_area(h) for h in self.holes), ZERO
        )


@dataclass(frozen=True)
class MassDistribution:
    color_id: int
    polygons: tuple[WeightedPolygon, ...]

    def total_mass(self) -> Fraction:
        return sum((p.weight * p.net_area() for p in self.polygons), ZERO)


@dataclass(frozen=True)
class PizzaInstance:
    masses: tuple[MassDistribution, ...]
    normalized: bool = False

    @property
    def n(self) -> int:
        return len(self.masses)


@dataclass(frozen=True)
class Triangle:
    a: Point2
    b: Point2
    c: Point2
    weight: Fraction

    def vertices(self) -> tuple[Point2, Point2, Point2]:
        return (self.a, self.b, self.c)

    def area(self) -> Fraction:
        return abs(triangle_signed_area(self.a, self.b, self.c))


#: Quadrant orientations for right-triangle atoms.  The name says where the
#: triangle lies relative to its right-angle vertex: Q_I has legs extending
#: +x/+y, Q_II -x/+y, Q_III -x/-y, Q_IV +x/-y.
ORIENTATIONS = ("Q_I", "Q_II", "Q_III", "Q_IV")


@dataclass(frozen=True)
class RightTriangleAtom:
    """Signed, weighted, axis-aligned right triangle.

    The two hypotenuse endpoints determine the shape together with the
    orientation; the right-angle vertex is derived (Q_I/Q_II: at
    (hyp_high.x, hyp_low.y); Q_III/Q_IV: at (hyp_low.x, hyp_high.y)).
    """

    hyp_low: Point2
    hyp_high: Point2
    orientation: str
    sign: int
    weight: Fraction

    def __post_init__(self) -> None:
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"bad orientation {self.orientation!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not self.hyp_low.y < self.hyp_high.y:
            raise ValueError("hypotenuse endpoints must have distinct y")
        if self.hyp_low.x == self.hyp_high.x:
            raise ValueError("hypotenuse must not be vertical")

    @property
    def right_angle(self) -> Point2:
        if self.orientation in ("Q_I", "Q_II"):
            return Point2(self.hyp_high.x, self.hyp_low.y)
        return Point2(self.hyp_low.x, self.hyp_high.y)

    @property
    def leg_x(self) -> Fraction:
        """x of the vertical leg."""
        return self.right_angle.x

    @property
    def hyp_on_right(self) -> bool:
        """True when the hypotenuse bounds the cross-section on the right."""
        return self.orientation in ("Q_I", "Q_IV")

    def hyp_line(self) -> tuple[Fraction, Fraction]:
        """Hypotenuse as x = alpha + beta*y."""
        lo, hi = self.hyp_low, self.hyp_high
        beta = (hi.x - lo.x) / (hi.y - lo.y)
        alpha = lo.x - beta * lo.y
        return alpha, beta

    def area(self) -> Fraction:
        dx = abs(self.hyp_high.x - self.hyp_low.x)
        dy = self.hyp_high.y - self.hyp_low.y
        return dx * dy / 2

    def vertices(self) -> tuple[Point2, Point2, Point2]:
        return (self.hyp_low, self.hyp_high, self.right_angle)


# ---------------------------------------------------------------------------
# Primitive predicates
# ---------------------------------------------------------------------------


def cross(o: Point2, a: Point2, b: Point2) -> Fraction:
    """Cross product (a-o) x (b-o); >0 means b is left of ray o->a."""
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def triangle_signed_area(a: Point2, b: Point2, c: Point2) -> Fraction:
    return cross(a, b, c) / 2


def chain_signed_area(chain: Sequence[Point2]) -> Fraction:
    """Shoelace signed area; positive iff the chain is counterclockwise."""
    if len(chain) < 3:
        raise InstanceError("chain needs at least 3 points")
    total = ZERO
    for p, q in zip(chain, tuple(chain[1:]) + (chain[0],)):
        total += p.x * q.y - q.x * p.y
    return total / 2


def _on_segment(p: Point2, a: Point2, b: Point2) -> bool:
    """True when p lies on the closed segment ab (collinearity assumed)."""
    return (
        min(a.x, b.x) <= p.x <= max(a.x, b.x)
        and min(a.y, b.y) <= p.y <= max(a.y, b.y)
    )


def segments_intersect(
    p1: Point2, p2: Point2, q1: Point2, q2: Point2, *, skip_shared_endpoints: bool = False
) -> bool:
    """Exact closed-segment intersection test.

    With skip_shared_endpoints, contacts that happen exactly at a shared
    endpoint of the two segments are not counted (adjacent polygon edges).
    """
    if skip_shared_endpoints:
        shared = {p for p in (p1, p2)} & {q for q in (q1, q2)}
        if len(shared) >= 2:
            return True  # identical or overlapping adjacent segments
    d1 = cross(q1, q2, p1)
    d2 = cross(q1, q2, p2)
    d3 = cross(p1, p2, q1)
    d4 = cross(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    touches = []
    if d1 == 0 and _on_segment(p1, q1, q2):
        touches.append(p1)
    if d2 == 0 and _on_segment(p2, q1, q2):
        touches.append(p2)
    if d3 == 0 and _on_segment(q1, p1, p2):
        touches.append(q1)
    if d4 == 0 and _on_segment(q2, p1, p2):
        touches.append(q2)
    if not touches:
        return False
    if skip_shared_endpoints:
        shared = {p1, p2} & {q1, q2}
        return any(t not in shared for t in touches)
    return True


def point_in_chain(p: Point2, chain: Sequence[Point2]) -> str:
    """Classify p against a simple closed chain: 'in', 'out', or 'on'.

    Exact even-odd ray crossing with a horizontal ray to +x.
    """
    inside = False
    for a, b in zip(chain, tuple(chain[1:]) + (chain[0],)):
        if cross(a, b, p) == 0 and _on_segment(p, a, b):
            return "on"
        if (a.y > p.y) != (b.y > p.y):
            # x of the edge at height p.y, exact
            x_at = a.x + (b.x - a.x) * (p.y - a.y) / (b.y - a.y)
            if x_at > p.x:
                inside = not inside
    return "in" if inside else "out"


# ---------------------------------------------------------------------------
# Parsing / serialization / validation
# ---------------------------------------------------------------------------


def _parse_chain(raw: object, what: str) -> Chain:
    if not isinstance(raw, list) or len(raw) < 3:
        raise InstanceError(f"{what}: expected a list of at least 3 points")
    pts = []
    for entry in raw:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise InstanceError(f"{what}: point must be a pair, got {entry!r}")
        pts.append(Point2(parse_scalar(entry[0]), parse_scalar(entry[1])))
    return tuple(pts)


def _validate_ring(chain: Chain, what: str) -> None:
    k = len(chain)
    for i in range(k):
        if chain[i] == chain[(i + 1) % k]:
            raise InstanceError(f"{what}: consecutive duplicate point {chain[i]}")
    if chain_signed_area(chain) == 0:
        raise InstanceError(f"{what}: zero signed area")
    edges = [(chain[i], chain[(i + 1) % k]) for i in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            adjacent = j == i + 1 or (i == 0 and j == k - 1)
            if segments_intersect(
                *edges[i], *edges[j], skip_shared_endpoints=adjacent
            ):
                if not adjacent:
                    raise InstanceError(f"{what}: self-intersecting chain")
                raise InstanceError(f"{what}: adjacent edges overlap")


def _validate_polygon(poly: WeightedPolygon, what: str) -> None:
    if poly.weight <= 0:
        raise InstanceError(f"{what}: nonpositive weight {poly.weight}")
    _validate_ring(poly.outer, f"{what} outer")
    if chain_signed_area(poly.outer) < 0:
        raise InstanceError(f"{what}: orientation: expected solid (CCW)")
    for h_idx, hole in enumerate(poly.holes):
        hw = f"{what} hole {h_idx}"
        _validate_ring(hole, hw)
        if chain_signed_area(hole) > 0:
            raise InstanceError(f"{hw}: orientation: expected hollow (CW)")
        for p in hole:
            if point_in_chain(p, poly.outer) != "in":
                raise InstanceError(f"{hw}: not strictly inside the outer chain")
        for i in range(len(hole)):
            a, b = hole[i], hole[(i + 1) % len(hole)]
            for j in range(len(poly.outer)):
                c, d = poly.outer[j], poly.outer[(j + 1) % len(poly.outer)]
                if segments_intersect(a, b, c, d):
                    raise InstanceError(f"{hw}: touches the outer chain")
    for i in range(len(poly.holes)):
        for j in range(i + 1, len(poly.holes)):
            h1, h2 = poly.holes[i], poly.holes[j]
            if any(point_in_chain(p, h2) != "out" for p in h1) or any(
                point_in_chain(p, h1) != "out" for p in h2
            ):
                raise InstanceError(f"{what}: holes {i} and {j} are not disjoint")
            for a, b in zip(h1, h1[1:] + (h1[0],)):
                for c, d in zip(h2, h2[1:] + (h2[0],)):
                    if segments_intersect(a, b, c, d):
                        raise InstanceError(f"{what}: holes {i} and {j} intersect")


def validate_instance(inst: PizzaInstance) -> None:
    """Check every structural invariant; raise InstanceError on violation."""
    if not inst.masses:
        raise InstanceError("instance has no mass distributions")
    seen = set()
    for mass in inst.masses:
        if mass.color_id in seen:
            raise InstanceError(f"duplicate color id {mass.color_id}")
        seen.add(mass.color_id)
        for p_idx, poly in enumerate(mass.polygons):
            _validate_polygon(poly, f"color {mass.color_id} polygon {p_idx}")
        if mass.total_mass() <= 0:
            raise InstanceError(f"color {mass.color_id}: total mass must be positive")
        if inst.normalized:
            for poly in mass.polygons:
                for chain in (poly.outer, *poly.holes):
                    for p in chain:
                        if not (ZERO <= p.x <= ONE and ZERO <= p.y <= ONE):
                            raise InstanceError(
                                f"color {mass.color_id}: point {p} outside the unit square"
                            )


def parse_instance(text: str) -> PizzaInstance:
    """Parse and validate an instance document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid instance document: {exc}") from exc
    if not isinstance(doc, dict) or "masses" not in doc:
        raise InstanceError('instance document must contain "masses"')
    masses = []
    raw_masses = doc["masses"]
    if not isinstance(raw_masses, list) or not raw_masses:
        raise InstanceError('"masses" must be a non-empty list')
    for m_idx, raw in enumerate(raw_masses):
        if not isinstance(raw, dict):
            raise InstanceError(f"mass {m_idx}: expected an object")
        color = raw.get("color", m_idx)
        if not isinstance(color, int):
            raise InstanceError(f"mass {m_idx}: color must be an integer")
        polys = []
        for p_idx, rp in enumerate(raw.get("polygons", [])):
            what = f"color {color} polygon {p_idx}"
            if not isinstance(rp, dict):
                raise InstanceError(f"{what}: expected an object")
            weight = parse_scalar(rp.get("weight", "1"))
            outer = _parse_chain(rp.get("outer"), f"{what} outer")
            holes = tuple(
                _parse_chain(h, f"{what} hole {h_idx}")
                for h_idx, h in enumerate(rp.get("holes", []))
            )
            polys.append(WeightedPolygon(weight=weight, outer=outer, holes=holes))
        masses.append(MassDistribution(color_id=color, polygons=tuple(polys)))
    normalized = bool(doc.get("normalized", False))
    inst = PizzaInstance(masses=tuple(masses), normalized=normalized)
    validate_instance(inst)
    return inst


def serialize_instance(inst: PizzaInstance) -> str:
    """Canonical serialization: colors ascending, lowest-terms rationals."""

    def chain_doc(chain: Chain) -> list[list[str]]:
        return [[format_scalar(p.x), format_scalar(p.y)] for p in chain]

    doc = {
        "masses": [
            {
                "color": mass.color_id,
                "polygons": [
                    {
                        "weight": format_scalar(poly.weight),
                        "outer": chain_doc(poly.outer),
                        "holes": [chain_doc(h) for h in poly.holes],
                    }
                    for poly in mass.polygons
                ],
            }
            for mass in sorted(inst.masses, key=lambda m: m.color_id)
        ],
        "normalized": inst.normalized,
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Transform:
    """Translate by (shift_x, shift_y), then multiply by scale."""

    shift_x: Fraction
    shift_y: Fraction
    scale: Fraction

    def apply(self, p: Point2) -> Point2:
        return Point2((p.x + self.shift_x) * self.scale, (p.y + self.shift_y) * self.scale)

    def apply_x(self, x: Fraction) -> Fraction:
        return (x + self.shift_x) * self.scale

    def apply_y(self, y: Fraction) -> Fraction:
        return (y + self.shift_y) * self.scale

    @property
    def is_identity(self) -> bool:
        return self.shift_x == 0 and self.shift_y == 0 and self.scale == 1

    def to_doc(self) -> dict:
        return {
            "shift": [format_scalar(self.shift_x), format_scalar(self.shift_y)],
            "scale": format_scalar(self.scale),
        }

    @staticmethod
    def from_doc(doc: dict) -> "Transform":
        return Transform(
            parse_scalar(doc["shift"][0]),
            parse_scalar(doc["shift"][1]),
            parse_scalar(doc["scale"]),
        )


IDENTITY_TRANSFORM = Transform(ZERO, ZERO, ONE)


def _instance_points(inst: PizzaInstance) -> Iterable[Point2]:
    for mass in inst.masses:
        for poly in mass.polygons:
            for chain in (poly.outer, *poly.holes):
                yield from chain


def transform_instance(inst: PizzaInstance, t: Transform, *, normalized: bool) -> PizzaInstance:
    def tc(chain: Chain) -> Chain:
        return tuple(t.apply(p) for p in chain)

    return PizzaInstance(
        masses=tuple(
            MassDistribution(
                color_id=mass.color_id,
                polygons=tuple(
                    WeightedPolygon(
                        weight=poly.weight,
                        outer=tc(poly.outer),
                        holes=tuple(tc(h) for h in poly.holes),
                    )
                    for poly in mass.polygons
                ),
            )
            for mass in inst.masses
        ),
        normalized=normalized,
    )


def normalize_instance(inst: PizzaInstance) -> tuple[PizzaInstance, Transform]:
    """Fit the instance into the unit square.

    Translate-then-scale by the side of the smallest axis-aligned bounding
    square.  Instances already inside the unit square pass through unchanged
    (identity transform), which makes the operation idempotent.
    """
    pts = list(_instance_points(inst))
    if not pts:
        raise InstanceError("empty instance cannot be normalized")
    min_x = min(p.x for p in pts)
    max_x = max(p.x for p in pts)
    min_y = min(p.y for p in pts)
    max_y = max(p.y for p in pts)
    if ZERO <= min_x and max_x <= ONE and ZERO <= min_y and max_y <= ONE:
        return PizzaInstance(inst.masses, normalized=True), IDENTITY_TRANSFORM
    side = max(max_x - min_x, max_y - min_y)
    if side == 0:
        raise InstanceError("degenerate instance: zero extent")
    t = Transform(-min_x, -min_y, ONE / side)
    return transform_instance(inst, t, normalized=True), t


# ---------------------------------------------------------------------------
# Triangulation (hole bridging + ear clipping)
# ---------------------------------------------------------------------------


def _bridge_hole(ring: list[Point2], hole: Chain) -> list[Point2]:
    """Merge one CW hole into a CCW ring via a two-way bridge edge.

    The bridge connects a hole vertex M to a visible ring vertex P; the
    merged ring walks ...P, M, (hole cycle), M, P... and stays simple.
    """
    all_edges = []
    for cycle in (ring, list(hole)):
        for i in range(len(cycle)):
            all_edges.append((cycle[i], cycle[(i + 1) % len(cycle)]))
    # rightmost hole vertex is a natural bridge anchor
    m_idx = max(range(len(hole)), key=lambda i: (hole[i].x, hole[i].y))
    m = hole[m_idx]
    candidates = sorted(
        range(len(ring)),
        key=lambda i: ((ring[i].x - m.x) ** 2 + (ring[i].y - m.y) ** 2, i),
    )
    for p_idx in candidates:
        p = ring[p_idx]
        if p == m:
            continue
        clear = True
        for a, b in all_edges:
            if (m, p) in ((a, b), (b, a)):
                clear = False
                break
            if segments_intersect(m, p, a, b, skip_shared_endpoints=True):
                clear = False
                break
        if not clear:
            continue
        rotated = list(hole[m_idx:]) + list(hole[:m_idx])
        return ring[: p_idx + 1] + rotated + [m, p] + ring[p_idx + 1 :]
    raise InstanceError("could not bridge hole into outer ring")


def _ear_clip(ring: list[Point2], weight: Fraction) -> list[Triangle]:
    """Clip ears off a simple (possibly bridge-degenerate) CCW ring."""
    pts = list(ring)
    out: list[Triangle] = []
    guard = 0
    while len(pts) > 3:
        guard += 1
        if guard > 4 * len(ring) * len(ring) + 64:
            raise InstanceError("triangulation failed to converge (invalid polygon?)")
        n = len(pts)
        clipped = False
        for i in range(n):
            u, v, w = pts[(i - 1) % n], pts[i], pts[(i + 1) % n]
            turn = cross(u, v, w)
            if turn < 0:
                continue
            if turn == 0:
                # collinear or spike vertex: remove without emitting
                del pts[i]
                clipped = True
                break
            ok = True
            for q in pts:
                if q in (u, v, w):
                    continue
                if (
                    cross(u, v, q) >= 0
                    and cross(v, w, q) >= 0
                    and cross(w, u, q) >= 0
                ):
                    ok = False
                    break
            if ok:
                out.append(Triangle(u, v, w, weight))
                del pts[i]
                clipped = True
                break
        if not clipped:
            raise InstanceError("no ear found; polygon is not simple")
    if len(pts) == 3:
        if cross(pts[0], pts[1], pts[2]) > 0:
            out.append(Triangle(pts[0], pts[1], pts[2], weight))
    return out


def triangulate(poly: WeightedPolygon) -> list[Triangle]:
    """Exact triangulation of a polygon with holes.

    Bridges each hole into the outer ring, then ear-clips.  The triangles
    partition the solid region; their areas sum to the net polygon area.
    """
    ring = list(poly.outer)
    # bridge holes rightmost-first so earlier bridges cannot block later ones
    for hole in sorted(poly.holes, key=lambda h: max(p.x for p in h), reverse=True):
        ring = _bridge_hole(ring, hole)
    triangles = [t for t in _ear_clip(ring, poly.weight) if t.area() != 0]
    total = sum((t.area() for t in triangles), ZERO)
    if total != poly.net_area():
        raise InstanceError("triangulation area mismatch (invalid polygon?)")
    return triangles


# ---------------------------------------------------------------------------
# Obtuse splitting
# ---------------------------------------------------------------------------


def split_obtuse(t: Triangle) -> list[Triangle]:
    """Split an obtuse triangle into two right triangles.

    Non-obtuse triangles pass through.  Otherwise the foot D of the altitude
    from the obtuse vertex onto the longest side is computed by solving the
    collinearity + perpendicularity constraints (equivalently, by exact
    projection), and the triangle splits at D.
    """
    verts = t.vertices()
    if triangle_signed_area(*verts) == 0:
        raise ValueError("degenerate triangle")

    def sq(p: Point2, q: Point2) -> Fraction:
        return (p.x - q.x) ** 2 + (p.y - q.y) ** 2

    # find the longest side AC and the opposite vertex B
    best = None
    for i in range(3):
        a, b, c = verts[i], verts[(i + 1) % 3], verts[(i + 2) % 3]
        if best is None or sq(a, c) > best[0]:
            best = (sq(a, c), a, b, c)
    ac2, a, b, c = best
    if sq(a, b) + sq(b, c) >= ac2:
        return [t]
    # D on line AC with BD perpendicular to AC
    acx, acy = c.x - a.x, c.y - a.y
    s = ((b.x - a.x) * acx + (b.y - a.y) * acy) / ac2
    d = Point2(a.x + s * acx, a.y + s * acy)
    return [Triangle(a, b, d, t.weight), Triangle(d, b, c, t.weight)]


# ---------------------------------------------------------------------------
# Axis-aligned decomposition
# ---------------------------------------------------------------------------


def _atom_from_hyp(p: Point2, q: Point2, right_angle: Point2, sign: int, weight: Fraction) -> RightTriangleAtom:
    """Build an atom from hypotenuse endpoints and its right-angle vertex."""
    lo, hi = (p, q) if p.y < q.y else (q, p)
    if right_angle == Point2(hi.x, lo.y):
        orientation = "Q_I" if hi.x < lo.x else "Q_II"
    elif right_angle == Point2(lo.x, hi.y):
        orientation = "Q_III" if hi.x < lo.x else "Q_IV"
    else:
        raise ValueError("right-angle vertex does not match the hypotenuse")
    return RightTriangleAtom(lo, hi, orientation, sign, weight)


def _axis_right_vertex(t: Triangle) -> Point2 | None:
    """The right-angle vertex if t is an axis-aligned right triangle."""
    verts = t.vertices()
    for i in range(3):
        v = verts[i]
        u, w = verts[(i + 1) % 3], verts[(i + 2) % 3]
        du = (u.x - v.x, u.y - v.y)
        dw = (w.x - v.x, w.y - v.y)
        for p, q in ((du, dw), (dw, du)):
            if p[1] == 0 and q[0] == 0 and p[0] != 0 and q[1] != 0:
                return v
    return None


def decompose_axis_aligned(t: Triangle) -> list[RightTriangleAtom]:
    """Decompose a non-obtuse triangle into signed axis-aligned right atoms.

    An axis-aligned right triangle is already a single positive atom.  Any
    other triangle is expressed as the two halves of its tight bounding
    rectangle (split along the top-left -> bottom-right diagonal, both
    positive) minus one right triangle per non-axis-parallel edge (negative),
    with zero-area pieces dropped.  The signed coverage reproduces the
    triangle's indicator function pointwise.
    """
    verts = t.vertices()
    area2 = cross(*verts)
    if area2 == 0:
        raise ValueError("degenerate triangle")
    if area2 < 0:
        verts = (verts[0], verts[2], verts[1])

    def sq(p: Point2, q: Point2) -> Fraction:
        return (p.x - q.x) ** 2 + (p.y - q.y) ** 2

    sides = sorted(sq(verts[i], verts[(i + 1) % 3]) for i in range(3))
    if sides[0] + sides[1] < sides[2]:
        raise ValueError("obtuse triangle: split it first")

    ra = _axis_right_vertex(t)
    if ra is not None:
        p, q = [v for v in verts if v != ra]
        return [_atom_from_hyp(p, q, ra, 1, t.weight)]

    min_x = min(v.x for v in verts)
    max_x = max(v.x for v in verts)
    min_y = min(v.y for v in verts)
    max_y = max(v.y for v in verts)
    tl = Point2(min_x, max_y)
    br = Point2(max_x, min_y)
    bl = Point2(min_x, min_y)
    tr = Point2(max_x, max_y)
    atoms = [
        _atom_from_hyp(tl, br, bl, 1, t.weight),
        _atom_from_hyp(tl, br, tr, 1, t.weight),
    ]
    for i in range(3):
        p, q = verts[i], verts[(i + 1) % 3]
        o = verts[(i + 2) % 3]
        if p.x == q.x or p.y == q.y:
            continue  # axis-parallel edge: degenerate complement
        for w in (Point2(p.x, q.y), Point2(q.x, p.y)):
            side_w = cross(p, q, w)
            side_o = cross(p, q, o)
            if side_w != 0 and ((side_w > 0) != (side_o > 0)):
                atoms.append(_atom_from_hyp(p, q, w, -1, t.weight))
                break
        else:
            raise ValueError("complement corner not found (degenerate input?)")
    return atoms
