"""Side-A mass computation and the antipodal residual.

Two independent routes compute region masses:

* ``bu_eval`` — the compiled route: per-color atom lists (triangulate ->
  split_obtuse -> decompose_axis_aligned) integrated strip by strip with a
  closed-form trapezoid clip per atom.  Exact over rationals, with a
  vectorized float twin for solver inner loops.
* ``region_mass_oracle`` — the verification route: clips each pre-atom
  triangle against the strip/half-plane arrangement with polygon clipping
  and sums shoelace areas.

They must agree exactly; tests enforce it.  This module also exports the
existential-theory-of-the-reals formula whose satisfiability encodes the
existence of an exact k-turn solution, together with a small interpreter for
substitution checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .geometry import (
    InstanceError,
    PizzaInstance,
    Point2,
    RightTriangleAtom,
    Triangle,
    chain_signed_area,
    decompose_axis_aligned,
    format_scalar,
    split_obtuse,
    triangulate,
)
from .scpath import (
    FeasibleSolution,
    SpherePoint,
    antipode,
    slice_count,
    sphere_to_solution,
)

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompiledColor:
    color_id: int
    atoms: tuple[RightTriangleAtom, ...]
    total: Fraction


class _FloatAtoms:
    """Vectorized atom table for the float evaluation path."""

    def __init__(self, colors: Sequence[CompiledColor]) -> None:
        rows = []
        for c_idx, color in enumerate(colors):
            for atom in color.atoms:
                alpha, beta = atom.hyp_line()
                rows.append(
                    (
                        float(atom.hyp_low.y),
                        float(atom.hyp_high.y),
                        float(atom.leg_x),
                        float(alpha),
                        float(beta),
                        1.0 if atom.hyp_on_right else 0.0,
                        atom.sign * float(atom.weight),
                        c_idx,
                    )
                )
        table = np.array(rows, dtype=np.float64).reshape(len(rows), 8)
        self.ylo = table[:, 0]
        self.yhi = table[:, 1]
        self.v = table[:, 2]
        self.alpha = table[:, 3]
        self.beta = table[:, 4]
        self.hyp_right = table[:, 5] > 0.5
        self.sw = table[:, 6]
        self.color = table[:, 7].astype(np.int64)
        self.n_colors = len(colors)
        self.totals = np.array([float(c.total) for c in colors])

    def _clip_bounds(self, lo, hi) -> tuple[np.ndarray, np.ndarray]:
        a = np.maximum(lo, self.ylo)
        b = np.minimum(hi, self.yhi)
        return a, np.maximum(a, b)

    def left_mass(self, lo, hi, cut) -> np.ndarray:
        """Unsigned per-atom area of atom ∩ strip ∩ {x <= cut}.

        Scalars give one row per atom; column vectors broadcast to one row
        per strip.
        """
        a, b = self._clip_bounds(lo, hi)
        alpha, beta, v = self.alpha, self.beta, self.v

        def g_int(y: np.ndarray) -> np.ndarray:
            return (alpha - v) * y + 0.5 * beta * y * y

        hr = self.hyp_right
        # hypotenuse on the right: integrate min(c', g(y)-v)
        cp = np.maximum(cut - v, 0.0)
        ystar = np.where(beta != 0.0, (cp + v - alpha) / np.where(beta != 0.0, beta, 1.0), a)
        yt = np.clip(ystar, a, b)
        dec = cp * (yt - a) + (g_int(b) - g_int(yt))
        inc = (g_int(yt) - g_int(a)) + cp * (b - yt)
        out_r = np.where(beta < 0.0, dec, inc)
        # hypotenuse on the left: integrate max(0, c''-g(y))
        cpp = np.minimum(cut, v)

        def h_int(y: np.ndarray) -> np.ndarray:
            return cpp * y - (alpha * y + 0.5 * beta * y * y)

        ystar2 = np.where(beta != 0.0, (cpp - alpha) / np.where(beta != 0.0, beta, 1.0), a)
        yt2 = np.clip(ystar2, a, b)
        out_l = np.where(beta > 0.0, h_int(yt2) - h_int(a), h_int(b) - h_int(yt2))
        out = np.where(hr, out_r, out_l)
        return np.where(b > a, out, 0.0)

    def strip_mass(self, lo, hi) -> np.ndarray:
        """Unsigned per-atom area of atom ∩ strip."""
        a, b = self._clip_bounds(lo, hi)
        alpha, beta, v = self.alpha, self.beta, self.v
        width = (alpha - v) * (b - a) + 0.5 * beta * (b * b - a * a)
        out = np.where(self.hyp_right, width, -width)
        return np.where(b > a, out, 0.0)


@dataclass(frozen=True)
class CompiledInstance:
    colors: tuple[CompiledColor, ...]
    float_atoms: _FloatAtoms = field(compare=False, repr=False)

    @property
    def n(self) -> int:
        return len(self.colors)

    @property
    def totals(self) -> tuple[Fraction, ...]:
        return tuple(c.total for c in self.colors)


def compile_instance(inst: PizzaInstance) -> CompiledInstance:
    """Triangulate, split, and decompose every color into signed atoms."""
    if not inst.normalized:
        raise InstanceError("compile requires a normalized instance")
    colors = []
    for mass in inst.masses:
        atoms: list[RightTriangleAtom] = []
        for poly in mass.polygons:
            for tri in triangulate(poly):
                for piece in split_obtuse(tri):
                    atoms.extend(decompose_axis_aligned(piece))
        total = mass.total_mass()
        atom_sum = sum((a.sign * a.weight * a.area() for a in atoms), ZERO)
        if atom_sum != total:
            raise RuntimeError(
                f"color {mass.color_id}: atom decomposition sums to {atom_sum}, expected {total}"
            )
        colors.append(CompiledColor(mass.color_id, tuple(atoms), total))
    return CompiledInstance(tuple(colors), _FloatAtoms(colors))


# ---------------------------------------------------------------------------
# Exact atom integration
# ---------------------------------------------------------------------------


def atom_strip_mass(
    atom: RightTriangleAtom,
    y_lo: Fraction,
    y_hi: Fraction,
    x_cut: Fraction,
    side: str,
) -> Fraction:
    """Weighted area of atom ∩ strip [y_lo, y_hi] ∩ half-plane at x_cut.

    side 'left' keeps x <= x_cut, 'right' keeps x >= x_cut.  The atom's
    cross-section at height y runs between the vertical leg x = v and the
    hypotenuse x = g(y); the clipped cross-section length is a min/max of
    affine functions, integrated in closed form with an exact breakpoint
    split.
    """
    if y_lo > y_hi:
        raise InstanceError("inverted strip")
    if side not in ("left", "right"):
        raise InstanceError(f"bad side {side!r}")
    a = max(y_lo, atom.hyp_low.y)
    b = min(y_hi, atom.hyp_high.y)
    if a >= b:
        return ZERO
    alpha, beta = atom.hyp_line()
    v = atom.leg_x

    def g_int(y: Fraction) -> Fraction:
        """Antiderivative of g(y) - v."""
        return (alpha - v) * y + beta * y * y / 2

    if atom.hyp_on_right:
        total = g_int(b) - g_int(a)
        cp = max(ZERO, x_cut - v)
        ystar = (cp + v - alpha) / beta
        yt = min(max(ystar, a), b)
        if beta < 0:
            left = cp * (yt - a) + (g_int(b) - g_int(yt))
        else:
            left = (g_int(yt) - g_int(a)) + cp * (b - yt)
    else:
        total = -(g_int(b) - g_int(a))
        cpp = min(x_cut, v)
        ystar = (cpp - alpha) / beta
        yt = min(max(ystar, a), b)

        def h_int(y: Fraction) -> Fraction:
            return cpp * y - (alpha * y + beta * y * y / 2)

        if beta > 0:
            left = h_int(yt) - h_int(a)
        else:
            left = h_int(b) - h_int(yt)
    value = left if side == "left" else total - left
    return atom.weight * value


def strip_table(sol: FeasibleSolution) -> list[tuple[int, Fraction, Fraction, int, Fraction | None]]:
    """Nonzero strips of a solution as (slice_idx, lo, hi, sign, cut_or_None)."""
    levels = sol.y_levels
    out = []
    for idx in range(1, len(sol.z) + 1):
        lo, hi = levels[idx - 1], levels[idx]
        if lo == hi:
            continue
        out.append((idx, lo, hi, sol.z_signs[idx - 1], sol.cut_of(idx)))
    return out


def eval_solution(ci: CompiledInstance, sol: FeasibleSolution) -> tuple[Fraction, ...]:
    """Exact side-A mass per color for a decoded solution."""
    f = [ZERO] * ci.n
    for _, lo, hi, sign, cut in strip_table(sol):
        c = cut if cut is not None else ONE
        side = "left" if sign > 0 else "right"
        for i, color in enumerate(ci.colors):
            acc = ZERO
            for atom in color.atoms:
                acc += atom.sign * atom_strip_mass(atom, lo, hi, c, side)
            f[i] += acc
    return tuple(f)


def bu_eval(ci: CompiledInstance, p: SpherePoint) -> tuple[Fraction, ...]:
    """f(p): per-color side-A mass of the solution encoded by p."""
    return eval_solution(ci, sphere_to_solution(p))


def residual(ci: CompiledInstance, p: SpherePoint) -> Fraction:
    """Antipodal residual max_i |f(p)_i - f(-p)_i|."""
    f = bu_eval(ci, p)
    g = bu_eval(ci, antipode(p))
    return max(abs(a - b) for a, b in zip(f, g))


def per_color_gap(ci: CompiledInstance, p: SpherePoint) -> tuple[Fraction, ...]:
    f = bu_eval(ci, p)
    g = bu_eval(ci, antipode(p))
    return tuple(abs(a - b) for a, b in zip(f, g))


# ---------------------------------------------------------------------------
# Float evaluation path
# ---------------------------------------------------------------------------


def decode_float(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Float twin of sphere_to_solution: signed slices and clamped cuts."""
    dim = coords.shape[0]
    s = slice_count(dim - 2)
    z = np.empty(s + 1)
    u_prev = 0.0
    cum = 0.0
    for i in range(s):
        cum += abs(coords[i])
        u = min(cum, 1.0)
        mag = u - u_prev
        z[i] = mag if coords[i] >= 0 else -mag
        u_prev = u
    mag = 1.0 - u_prev
    z[s] = mag if coords[s] >= 0 else -mag
    x = np.minimum(np.abs(coords[s + 1 :]), 1.0)
    return z, x


def bu_eval_float(ci: CompiledInstance, coords: np.ndarray) -> np.ndarray:
    z, x = decode_float(coords)
    fa = ci.float_atoms
    mags = np.abs(z)
    hi = np.cumsum(mags)
    lo = hi - mags
    cuts = np.ones(len(z))
    if len(x):
        cuts[1 : 1 + len(x)] = x
    # all strips in one broadcasted pass: rows are slices, columns atoms
    left = fa.left_mass(lo[:, None], hi[:, None], cuts[:, None])
    strip = fa.strip_mass(lo[:, None], hi[:, None])
    val = np.where((z > 0.0)[:, None], left, strip - left)
    return np.bincount(fa.color, weights=fa.sw * val.sum(axis=0), minlength=fa.n_colors)


def residual_float(ci: CompiledInstance, coords: np.ndarray) -> float:
    diff = bu_eval_float(ci, coords) - bu_eval_float(ci, -coords)
    return float(np.max(np.abs(diff)))


def solution_gap(ci: CompiledInstance, sol: FeasibleSolution) -> tuple[Fraction, ...]:
    """Exact per-color side imbalance |mu_i(A) - mu_i(B)| of a solution."""
    f = eval_solution(ci, sol)
    return tuple(abs(2 * v - t) for v, t in zip(f, ci.totals))


def balance_residual(ci: CompiledInstance, p: SpherePoint) -> Fraction:
    """Worst per-color side imbalance of the path decoded from p.

    Agrees with the antipodal residual wherever decoding -p mirrors the
    sides of p.  At points with zero coordinates the tie-break sign(0) = +1
    makes both antipodes decode to the same side assignment, so the
    antipodal difference can vanish without the path balancing anything;
    this imbalance is the honest quantity, and what the solver optimizes.
    """
    gaps = solution_gap(ci, sphere_to_solution(p))
    return max(gaps) if gaps else ZERO


def balance_residual_float(ci: CompiledInstance, coords: np.ndarray) -> float:
    f = bu_eval_float(ci, coords)
    return float(np.max(np.abs(2.0 * f - ci.float_atoms.totals)))


# ---------------------------------------------------------------------------
# Independent clipping oracle
# ---------------------------------------------------------------------------


def _clip_halfplane(
    pts: list[Point2], a: Fraction, b: Fraction, c: Fraction
) -> list[Point2]:
    """Keep the part of a convex polygon with a*x + b*y <= c (exact)."""
    if not pts:
        return []
    out: list[Point2] = []
    n = len(pts)
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        fp = a * p.x + b * p.y - c
        fq = a * q.x + b * q.y - c
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append(Point2(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)))
    return out


def _poly_area(pts: list[Point2]) -> Fraction:
    if len(pts) < 3:
        return ZERO
    return abs(chain_signed_area(tuple(pts)))


def region_mass_oracle(
    inst: PizzaInstance, sol: FeasibleSolution
) -> list[tuple[Fraction, Fraction]]:
    """Exact (side A, side B) weighted mass per color via polygon clipping.

    Clips every pre-atom triangle against each strip band and the strip's
    half-plane; entirely independent of the atom decomposition route.
    """
    if not inst.normalized:
        raise InstanceError("oracle requires a normalized instance")
    strips = strip_table(sol)
    results = []
    for mass in inst.masses:
        mass_a = ZERO
        mass_b = ZERO
        for poly in mass.polygons:
            for tri in triangulate(poly):
                pts = list(tri.vertices())
                for _, lo, hi, sign, cut in strips:
                    band = _clip_halfplane(pts, ZERO, -ONE, -lo)  # y >= lo
                    band = _clip_halfplane(band, ZERO, ONE, hi)  # y <= hi
                    if not band:
                        continue
                    if cut is None:
                        area = _poly_area(band)
                        piece_a, piece_b = (area, ZERO) if sign > 0 else (ZERO, area)
                    else:
                        left = _poly_area(_clip_halfplane(band, ONE, ZERO, cut))
                        right = _poly_area(band) - left
                        piece_a, piece_b = (left, right) if sign > 0 else (right, left)
                    mass_a += tri.weight * piece_a
                    mass_b += tri.weight * piece_b
        results.append((mass_a, mass_b))
    return results


# ---------------------------------------------------------------------------
# ETR export
# ---------------------------------------------------------------------------


class _Node:
    __slots__ = ("kind", "payload", "args")

    def __init__(self, kind: str, payload=None, args: tuple["_Node", ...] = ()):
        self.kind = kind
        self.payload = payload
        self.args = args


class _EtrBuilder:
    """Arithmetic DAG over {const, var, +, -, *, max, min}.

    Every max/min occurrence becomes one fresh g-variable with a disjunctive
    constraint pair; all other operations inline into the formula text.
    """

    def __init__(self) -> None:
        self.gates: list[tuple[str, str, _Node, _Node]] = []
        self._zero = self.const(ZERO)

    def const(self, v: Fraction | int) -> _Node:
        return _Node("const", Fraction(v))

    def var(self, name: str) -> _Node:
        return _Node("var", name)

    def add(self, a: _Node, b: _Node) -> _Node:
        return _Node("add", None, (a, b))

    def sub(self, a: _Node, b: _Node) -> _Node:
        return _Node("sub", None, (a, b))

    def neg(self, a: _Node) -> _Node:
        return _Node("neg", None, (a,))

    def mul(self, a: _Node, b: _Node) -> _Node:
        return _Node("mul", None, (a, b))

    def gate(self, kind: str, a: _Node, b: _Node) -> _Node:
        name = f"g_{len(self.gates) + 1}"
        self.gates.append((name, kind, a, b))
        return _Node("var", name)

    def gmax(self, a: _Node, b: _Node) -> _Node:
        return self.gate("max", a, b)

    def gmin(self, a: _Node, b: _Node) -> _Node:
        return self.gate("min", a, b)

    def absolute(self, a: _Node) -> _Node:
        return self.add(self.gmax(a, self._zero), self.gmax(self.neg(a), self._zero))

    def clamp(self, a: _Node, lo: _Node, hi: _Node) -> _Node:
        return self.gmin(self.gmax(a, lo), hi)


def _term_text(node: _Node) -> str:
    if node.kind == "const":
        return format_scalar(node.payload)
    if node.kind == "var":
        return node.payload
    if node.kind == "add":
        return f"(+ {_term_text(node.args[0])} {_term_text(node.args[1])})"
    if node.kind == "sub":
        return f"(- {_term_text(node.args[0])} {_term_text(node.args[1])})"
    if node.kind == "neg":
        return f"(- {_term_text(node.args[0])})"
    if node.kind == "mul":
        return f"(* {_term_text(node.args[0])} {_term_text(node.args[1])})"
    raise ValueError(f"unknown node kind {node.kind}")


def _gate_constraint(name: str, kind: str, a: _Node, b: _Node) -> str:
    y, z = _term_text(a), _term_text(b)
    if kind == "max":
        return f"(or (and (= {name} {y}) (>= {y} {z})) (and (= {name} {z}) (> {z} {y})))"
    return f"(or (and (= {name} {y}) (<= {y} {z})) (and (= {name} {z}) (< {z} {y})))"


@dataclass
class EtrFormula:
    """Existential formula over the reals plus its evaluation structure."""

    variables: tuple[str, ...]
    atom_constraints: tuple[str, ...]
    body: str
    text: str
    max_count: int
    min_count: int
    _gates: list[tuple[str, str, _Node, _Node]] = field(repr=False, default_factory=list)

    def witness(self, point: dict[str, Fraction]) -> dict[str, Fraction]:
        """Extend a P-assignment with the forced values of every g-variable."""
        env = dict(point)

        def ev(node: _Node) -> Fraction:
            if node.kind == "const":
                return node.payload
            if node.kind == "var":
                return env[node.payload]
            if node.kind == "add":
                return ev(node.args[0]) + ev(node.args[1])
            if node.kind == "sub":
                return ev(node.args[0]) - ev(node.args[1])
            if node.kind == "neg":
                return -ev(node.args[0])
            if node.kind == "mul":
                return ev(node.args[0]) * ev(node.args[1])
            raise ValueError(node.kind)

        for name, kind, a, b in self._gates:
            va, vb = ev(a), ev(b)
            env[name] = max(va, vb) if kind == "max" else min(va, vb)
        return env


def _build_f_nodes(
    bld: _EtrBuilder, ci: CompiledInstance, k: int, p_vars: list[_Node]
) -> list[_Node]:
    """per-color side-A mass as DAG nodes, for one orientation of P."""
    s = slice_count(k)
    z_coords = p_vars[:s]
    r_coord = p_vars[s]
    x_coords = p_vars[s + 1 :]
    one = bld.const(ONE)
    zero = bld.const(ZERO)

    # saturating cumulative decode
    u_nodes: list[_Node] = []
    cum: _Node | None = None
    for zc in z_coords:
        a = bld.absolute(zc)
        cum = a if cum is None else bld.add(cum, a)
        u_nodes.append(bld.gmin(cum, one))
    m_nodes: list[_Node] = []
    prev: _Node = zero
    for u in u_nodes:
        m_nodes.append(bld.sub(u, prev))
        prev = u
    m_nodes.append(bld.sub(one, u_nodes[-1]))

    z_nodes = [
        bld.gmax(bld.gmin(zc, m), bld.neg(m)) for zc, m in zip(z_coords, m_nodes[:s])
    ]
    z_nodes.append(bld.gmax(bld.gmin(r_coord, m_nodes[s]), bld.neg(m_nodes[s])))
    x_nodes = [bld.gmin(bld.absolute(xc), one) for xc in x_coords]

    y_nodes: list[_Node] = [zero]
    for m in m_nodes:
        y_nodes.append(bld.add(y_nodes[-1], m))

    def left_mass_node(atom: RightTriangleAtom, a_n: _Node, b_n: _Node, c_n: _Node) -> _Node:
        alpha, beta = atom.hyp_line()
        v = atom.leg_x
        p_lo = bld.const(atom.hyp_low.y)
        p_hi = bld.const(atom.hyp_high.y)
        a2 = bld.clamp(a_n, p_lo, p_hi)
        b2 = bld.clamp(b_n, p_lo, p_hi)

        def g_int(y: _Node) -> _Node:
            return bld.add(
                bld.mul(bld.const(alpha - v), y),
                bld.mul(bld.const(beta / 2), bld.mul(y, y)),
            )

        if atom.hyp_on_right:
            cp = bld.gmax(bld.sub(c_n, bld.const(v)), zero)
            ystar = bld.mul(
                bld.const(ONE / beta), bld.sub(bld.add(cp, bld.const(v)), bld.const(alpha))
            )
            yt = bld.clamp(ystar, a2, b2)
            if beta < 0:
                return bld.add(
                    bld.mul(cp, bld.sub(yt, a2)), bld.sub(g_int(b2), g_int(yt))
                )
            return bld.add(bld.sub(g_int(yt), g_int(a2)), bld.mul(cp, bld.sub(b2, yt)))
        cpp = bld.gmin(c_n, bld.const(v))
        ystar = bld.mul(bld.const(ONE / beta), bld.sub(cpp, bld.const(alpha)))
        yt = bld.clamp(ystar, a2, b2)

        def h_int(y: _Node) -> _Node:
            return bld.sub(
                bld.mul(cpp, y),
                bld.add(bld.mul(bld.const(alpha), y), bld.mul(bld.const(beta / 2), bld.mul(y, y))),
            )

        if beta > 0:
            return bld.sub(h_int(yt), h_int(a2))
        return bld.sub(h_int(b2), h_int(yt))

    def strip_mass_node(atom: RightTriangleAtom, a_n: _Node, b_n: _Node) -> _Node:
        alpha, beta = atom.hyp_line()
        v = atom.leg_x
        a2 = bld.clamp(a_n, bld.const(atom.hyp_low.y), bld.const(atom.hyp_high.y))
        b2 = bld.clamp(b_n, bld.const(atom.hyp_low.y), bld.const(atom.hyp_high.y))
        sgn = ONE if atom.hyp_on_right else -ONE

        def g_int(y: _Node) -> _Node:
            return bld.add(
                bld.mul(bld.const(sgn * (alpha - v)), y),
                bld.mul(bld.const(sgn * beta / 2), bld.mul(y, y)),
            )

        return bld.sub(g_int(b2), g_int(a2))

    f_nodes: list[_Node] = []
    for color in ci.colors:
        acc: _Node = zero
        for strip_idx in range(1, s + 2):
            z_n = z_nodes[strip_idx - 1]
            lo_n = y_nodes[strip_idx - 1]
            t_plus = bld.gmax(z_n, zero)
            t_minus = bld.gmax(bld.neg(z_n), zero)
            b_plus = bld.add(lo_n, t_plus)
            b_minus = bld.add(lo_n, t_minus)
            cut_idx = strip_idx - 2
            c_n = x_nodes[cut_idx] if 0 <= cut_idx < len(x_nodes) else one
            for atom in color.atoms:
                w = bld.const(atom.sign * atom.weight)
                left_pos = left_mass_node(atom, lo_n, b_plus, c_n)
                total_neg = strip_mass_node(atom, lo_n, b_minus)
                left_neg = left_mass_node(atom, lo_n, b_minus, c_n)
                contrib = bld.add(left_pos, bld.sub(total_neg, left_neg))
                acc = bld.add(acc, bld.mul(w, contrib))
        f_nodes.append(acc)
    return f_nodes


def export_etr(ci: CompiledInstance, k: int) -> EtrFormula:
    """Emit the existential formula for exact k-turn solutions.

    Structure: the L1-sphere constraint sum |P_j| = k+1, one disjunctive
    constraint pair per max/min occurrence (each occurrence owning a fresh
    g-variable), and the n antipodal equalities f(P)_i = f(-P)_i with each
    side building its own occurrences.
    """
    if k < 0:
        raise InstanceError("turn budget must be nonnegative")
    dim = k + 2
    bld = _EtrBuilder()
    p_names = [f"P_{j}" for j in range(1, dim + 1)]
    p_vars = [bld.var(name) for name in p_names]
    neg_vars = [bld.neg(v) for v in p_vars]

    f_pos = _build_f_nodes(bld, ci, k, p_vars)
    f_neg = _build_f_nodes(bld, ci, k, neg_vars)

    sphere_sum: _Node | None = None
    for v in p_vars:
        a = bld.absolute(v)
        sphere_sum = a if sphere_sum is None else bld.add(sphere_sum, a)

    constraints: list[str] = [f"(= {_term_text(sphere_sum)} {format_scalar(Fraction(k + 1))})"]
    for name, kind, a, b in bld.gates:
        constraints.append(_gate_constraint(name, kind, a, b))
    for fp, fn in zip(f_pos, f_neg):
        constraints.append(f"(= {_term_text(fp)} {_term_text(fn)})")

    g_names = [name for name, _, _, _ in bld.gates]
    variables = tuple(p_names + g_names)
    body = "(and\n  " + "\n  ".join(constraints) + ")"
    decls = " ".join(f"({name} Real)" for name in variables)
    text = f"(exists ({decls})\n{body})\n"
    return EtrFormula(
        variables=variables,
        atom_constraints=tuple(constraints),
        body=body,
        text=text,
        max_count=sum(1 for _, kind, _, _ in bld.gates if kind == "max"),
        min_count=sum(1 for _, kind, _, _ in bld.gates if kind == "min"),
        _gates=bld.gates,
    )


def build_single_gate_formula(kind: str) -> EtrFormula:
    """Minimal formula with exactly one max/min occurrence: g = kind(P_1, 0)."""
    bld = _EtrBuilder()
    p = bld.var("P_1")
    node = bld.gmax(p, bld.const(ZERO)) if kind == "max" else bld.gmin(p, bld.const(ZERO))
    constraints = [_gate_constraint(*bld.gates[0]), f"(>= {_term_text(node)} 0)"]
    variables = ("P_1",) + tuple(name for name, _, _, _ in bld.gates)
    body = "(and " + " ".join(constraints) + ")"
    decls = " ".join(f"({name} Real)" for name in variables)
    return EtrFormula(
        variables=variables,
        atom_constraints=tuple(constraints),
        body=body,
        text=f"(exists ({decls}) {body})\n",
        max_count=1 if kind == "max" else 0,
        min_count=0 if kind == "max" else 1,
        _gates=bld.gates,
    )


# ---------------------------------------------------------------------------
# Formula interpreter
# ---------------------------------------------------------------------------


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_sexpr(tokens: list[str], pos: int) -> tuple[object, int]:
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while tokens[pos] != ")":
            node, pos = _parse_sexpr(tokens, pos)
            items.append(node)
        return items, pos + 1
    if tok == ")":
        raise InstanceError("unbalanced parentheses in formula")
    return tok, pos + 1


def parse_etr(text: str) -> object:
    tokens = _tokenize(text)
    ast, pos = _parse_sexpr(tokens, 0)
    if pos != len(tokens):
        raise InstanceError("trailing tokens in formula")
    return ast


def _declared_variables(ast: object) -> list[str]:
    if not (isinstance(ast, list) and ast and ast[0] == "exists"):
        raise InstanceError("formula must be an exists sentence")
    return [decl[0] for decl in ast[1]]


def evaluate_etr(text_or_ast: str | object, assignment: dict[str, Fraction]) -> bool:
    """Substitution check: evaluate the body under a full assignment."""
    ast = parse_etr(text_or_ast) if isinstance(text_or_ast, str) else text_or_ast
    for name in _declared_variables(ast):
        if name not in assignment:
            raise InstanceError(f"assignment missing variable {name}")
    body = ast[2]

    def ev_term(node: object) -> Fraction:
        if isinstance(node, str):
            if node in assignment:
                return assignment[node]
            return Fraction(node)
        op = node[0]
        args = [ev_term(a) for a in node[1:]]
        if op == "+":
            return sum(args, ZERO)
        if op == "-":
            return -args[0] if len(args) == 1 else args[0] - args[1]
        if op == "*":
            out = ONE
            for a in args:
                out *= a
            return out
        raise InstanceError(f"unknown term operator {op!r}")

    def ev_formula(node: object) -> bool:
        op = node[0]
        if op == "and":
            return all(ev_formula(a) for a in node[1:])
        if op == "or":
            return any(ev_formula(a) for a in node[1:])
        if op == "not":
            return not ev_formula(node[1])
        lhs, rhs = ev_term(node[1]), ev_term(node[2])
        if op == "<":
            return lhs < rhs
        if op == "<=":
            return lhs <= rhs
        if op == "=":
            return lhs == rhs
        if op == ">=":
            return lhs >= rhs
        if op == ">":
            return lhs > rhs
        raise InstanceError(f"unknown formula operator {op!r}")

    return ev_formula(body)


def serialize_eval_report(
    inst: PizzaInstance, masses: list[tuple[Fraction, Fraction]]
) -> str:
    """Delimited per-color mass report (side A, side B, total, gap)."""
    lines = ["color,massA,massB,total,gap"]
    for mass, (a, b) in zip(inst.masses, masses):
        lines.append(
            ",".join(
                (
                    str(mass.color_id),
                    format_scalar(a),
                    format_scalar(b),
                    format_scalar(a + b),
                    format_scalar(abs(a - b)),
                )
            )
        )
    return "\n".join(lines) + "\n"
