"""Acceptance gate: end-to-end behavioural criteria with runtime budgets.

Each test here pins one release criterion: exactness of the decomposition,
agreement of the two independent measure routes, antipodal conservation,
solver success rates on random corpora, reduction round-trips, formula
export, and robustness on degenerate inputs.  Frozen constants were computed
with the independent clipping oracles before the implementation was trusted;
see the project notes for provenance.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction as F

import numpy as np
import pytest

import oracles
from corpus import (
    random_instance,
    random_non_obtuse_triangle,
    random_sphere_point,
    random_two_block_ch,
)
from pizzashare import (
    CHInstance,
    CHValuation,
    MassDistribution,
    PizzaInstance,
    Point2,
    SolverConfig,
    StraightCutSet,
    Triangle,
    WeightedPolygon,
    antipode,
    balance_residual,
    bu_eval,
    bu_eval_float,
    compile_instance,
    decompose_axis_aligned,
    eval_solution,
    evaluate_etr,
    export_etr,
    lines_to_ch_cuts,
    make_solution,
    make_sphere_point,
    path_to_ch_cuts,
    reduce_checkerboard,
    reduce_overlapping,
    reduce_straight,
    region_mass_oracle,
    residual,
    solve,
    solution_to_path,
    sphere_to_solution,
    verify_ch,
    verify_scpath,
    verify_straight,
)
from pizzashare.reductions import (
    _line_crosses_rect,
    _tile_rects,
    ch_positive_value,
    line_side_masses,
    rotate_lines,
)
from pizzashare.scpath import VSeg

ZERO = F(0)
ONE = F(1)


def ring(*coords) -> tuple[Point2, ...]:
    return tuple(Point2(F(x), F(y)) for x, y in coords)


def one_color_square() -> PizzaInstance:
    outer = ring((0, 0), (1, 0), (1, 1), (0, 1))
    return PizzaInstance(
        masses=[MassDistribution(1, [WeightedPolygon(ONE, outer)])],
        normalized=True,
    )


def polygon_mass(poly: WeightedPolygon) -> F:
    return poly.weight * oracles.poly_area([(p.x, p.y) for p in poly.outer])


def polygon_rect(poly: WeightedPolygon) -> tuple[F, F, F, F]:
    xs = [p.x for p in poly.outer]
    ys = [p.y for p in poly.outer]
    return (min(xs), min(ys), max(xs), max(ys))


def assert_y_monotone(path) -> None:
    """Every vertical segment ascends and the ascent heights never back up."""
    last_y = None
    for seg in path.segments:
        if isinstance(seg, VSeg):
            assert seg.y_from <= seg.y_to
            if last_y is not None:
                assert seg.y_from >= last_y
            last_y = seg.y_to


# ---------------------------------------------------------------------------
# 1. Decomposition exactness
# ---------------------------------------------------------------------------


def test_decomposition_exact_on_thousand_triangles():
    """Signed atom areas of 1,000 random non-obtuse triangles sum to the
    shoelace area with zero tolerance, in under 10 seconds."""
    rng = random.Random(101)
    started = time.monotonic()
    for _ in range(1000):
        pts = random_non_obtuse_triangle(rng)
        tri = Triangle(pts[0], pts[1], pts[2], weight=ONE)
        atoms = decompose_axis_aligned(tri)
        signed = sum((atom.sign * atom.area() for atom in atoms), ZERO)
        assert signed == oracles.shoelace([(p.x, p.y) for p in pts])
    assert time.monotonic() - started < 10.0


# ---------------------------------------------------------------------------
# 2 + 3. Dual-route equivalence and antipodal conservation on one corpus
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def eval_corpus():
    """200 (instance, point) pairs: <= 4 colors, <= 3 triangles per color."""
    rng = random.Random(202)
    pairs = []
    for _ in range(200):
        inst = random_instance(rng, max_colors=4, max_triangles=3)
        point = random_sphere_point(rng, rng.randint(0, 3))
        pairs.append((inst, compile_instance(inst), point))
    return pairs


def test_measure_routes_agree(eval_corpus):
    """bu_eval matches the clipping oracle exactly; the float twin matches
    within 1e-12.  Under 60 seconds for all 200 pairs."""
    started = time.monotonic()
    for inst, ci, point in eval_corpus:
        exact = bu_eval(ci, point)
        oracle = region_mass_oracle(inst, sphere_to_solution(point))
        assert exact == tuple(a for a, _ in oracle)
        coords = np.array([float(c) for c in point.coords])
        approx = bu_eval_float(ci, coords)
        assert max(abs(float(e) - a) for e, a in zip(exact, approx)) <= 1e-12
    assert time.monotonic() - started < 60.0


def test_antipodal_masses_conserve_totals(eval_corpus):
    """f(p) + f(antipode(p)) equals the per-color totals exactly: the
    antipode's side A is this point's side B."""
    for _, ci, point in eval_corpus:
        f_pos = bu_eval(ci, point)
        f_neg = bu_eval(ci, antipode(point))
        assert tuple(a + b for a, b in zip(f_pos, f_neg)) == ci.totals


# ---------------------------------------------------------------------------
# 4. Solver success on random instances
# ---------------------------------------------------------------------------


def test_solver_verifies_fifty_random_instances():
    """50 random instances, turn budget n-1, eps 1e-3: every solve comes
    back verified exact with a monotone path inside the turn budget, in
    under 5 minutes total."""
    rng = random.Random(2026)
    started = time.monotonic()
    seen_colors = set()
    for _ in range(50):
        inst = random_instance(rng)
        n = inst.n
        seen_colors.add(n)
        cfg = SolverConfig(epsilon=F(1, 1000), turns=n - 1, rng_seed=0)
        rep = solve(compile_instance(inst), cfg, inst)
        assert rep.verified_exact, f"unverified solve for n={n}"
        assert rep.status == "ok"
        assert rep.path.turns <= n - 1
        assert_y_monotone(rep.path)
        assert max(rep.per_color_gap) <= F(1, 1000)
    assert seen_colors == {1, 2, 3, 4}
    assert time.monotonic() - started < 300.0


# ---------------------------------------------------------------------------
# 5. Overlapping-reduction round trip
# ---------------------------------------------------------------------------


def test_overlapping_round_trip_preserves_values():
    """25 random two-block instances: reduce, solve at eps 1e-4, map the
    path back to cuts, and re-verify on the interval.  Mapped cut counts
    stay within turns+1 and positive-side values match side-A masses
    exactly."""
    rng = random.Random(11)
    eps = F(1, 10000)
    for _ in range(25):
        ch = random_two_block_ch(rng)
        n = ch.n
        inst, meta = reduce_overlapping(ch)
        cfg = SolverConfig(epsilon=eps, turns=n - 1, rng_seed=0)
        rep = solve(compile_instance(inst), cfg, inst)
        assert rep.verified_exact, f"unverified solve for n={n}"
        mapped = path_to_ch_cuts(meta, rep.solution)
        assert len(mapped.cuts) <= cfg.turns + 1
        assert verify_ch(ch, mapped, eps).ok
        side_a = tuple(a for a, _ in region_mass_oracle(inst, rep.solution))
        assert ch_positive_value(ch, mapped) == side_a


# ---------------------------------------------------------------------------
# 6. Checkerboard invariants
# ---------------------------------------------------------------------------


def checkerboard_corpora() -> list[tuple[CHInstance, F]]:
    four = CHInstance(
        tuple(
            CHValuation("twoBlockUniform", ((F(i, 4), F(i + 1, 4), F(4)),))
            for i in range(4)
        )
    )
    blocks = ((ZERO, F(1, 2), ONE), (F(1, 2), ONE, ONE))
    two = CHInstance((CHValuation("twoBlockUniform", blocks),) * 2)
    return [(four, F(4)), (two, ONE)]


@pytest.mark.parametrize("ch,c_max", checkerboard_corpora(), ids=["four", "two"])
def test_checkerboard_invariants(ch, c_max):
    """Generated squares never overlap, block masses equal width times
    density exactly, each color totals 1, the output tolerance scales by
    n/c_max, and per-color square counts equal n^2/c_i."""
    eps = F(1, 100)
    n = ch.n
    inst, meta = reduce_checkerboard(ch, eps)
    assert meta.eps_out == eps * n / c_max

    rects = [polygon_rect(p) for m in inst.masses for p in m.polygons]
    for i, r1 in enumerate(rects):
        for r2 in rects[i + 1 :]:
            assert oracles.rect_overlap_area(r1, r2) == 0

    t = meta.transform
    for agent, mass in zip(ch.agents, inst.masses):
        c_i = agent.blocks[0][2]
        assert len(mass.polygons) == n * n / c_i
        assert sum(polygon_mass(p) for p in mass.polygons) == 1
        for rec in meta.intervals:
            origin = t.apply(Point2(rec.sq_x, rec.sq_y))
            side = rec.side * t.scale
            block_mass = sum(
                polygon_mass(p)
                for p in mass.polygons
                for rect in [polygon_rect(p)]
                if origin.x < (rect[0] + rect[2]) / 2 < origin.x + side
                and origin.y < (rect[1] + rect[3]) / 2 < origin.y + side
            )
            expected = (rec.x_hi - rec.x_lo) * agent.density_on(rec.x_lo, rec.x_hi)
            assert block_mass == expected


# ---------------------------------------------------------------------------
# 7. Straight-cut pipeline
# ---------------------------------------------------------------------------


def test_straight_pipeline_single_agent():
    """The known bisecting line passes verification exactly; map-back stays
    within twice the line budget; rotating a tile-crossing line moves each
    color's parity mass by at most 2 * c_i * d."""
    ch = CHInstance((CHValuation("twoBlockUniform", ((ZERO, ONE, ONE),)),))
    inst, meta = reduce_straight(ch, F(11, 20), F(1, 4))

    known = StraightCutSet(((ZERO, ONE, meta.transform.apply_y(F(7))),))
    rep = verify_straight(inst, known, F(11, 20))
    assert rep.ok and rep.gaps == (ZERO,)
    mapped = lines_to_ch_cuts(meta, known)
    assert len(mapped.cuts) <= 2 * meta.budget
    assert verify_ch(ch, mapped, ZERO).ok

    crossing = StraightCutSet(((ZERO, ONE, meta.transform.apply_y(F(9, 2))),))
    rects = _tile_rects(meta)
    assert any(_line_crosses_rect(crossing.lines[0], r) for r in rects)
    rotated = rotate_lines(meta, crossing)
    assert all(not _line_crosses_rect(l, r) for l in rotated.lines for r in rects)
    before = line_side_masses(inst, crossing)
    after = line_side_masses(inst, rotated)
    for (b, _), (a, _), agent in zip(before, after, ch.agents):
        assert abs(b - a) <= 2 * agent.density * meta.d


def test_straight_pipeline_two_agents():
    """Two disjoint-block agents: the two vertical lines through the square
    centers bisect both agents exactly, and rotation stays within the
    per-line mass-movement bound."""
    ch = CHInstance(
        (
            CHValuation("twoBlockUniform", ((ZERO, F(1, 4), F(4)),)),
            CHValuation("twoBlockUniform", ((F(1, 2), F(3, 4), F(4)),)),
        )
    )
    inst, meta = reduce_straight(ch, F(11, 20), F(1, 4))
    assert meta.d == F(1, 4) and meta.budget == 2
    assert meta.square_sides == (F(11, 10), F(11, 10))

    t = meta.transform
    known = StraightCutSet(
        ((ONE, ZERO, t.apply_x(F(41, 20))), (ONE, ZERO, t.apply_x(F(91, 20))))
    )
    rep = verify_straight(inst, known, F(11, 20))
    assert rep.ok
    assert rep.masses == ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))
    assert rep.gaps == (ZERO, ZERO)

    mapped = lines_to_ch_cuts(meta, known)
    assert len(mapped.cuts) <= 2 * meta.budget

    rotated = rotate_lines(meta, known)
    before = line_side_masses(inst, known)
    after = line_side_masses(inst, rotated)
    for (b, _), (a, _), agent in zip(before, after, ch.agents):
        assert abs(b - a) <= 2 * agent.density * meta.d


# ---------------------------------------------------------------------------
# 8. Formula export
# ---------------------------------------------------------------------------


def test_etr_export_satisfied_at_bisector():
    """Unit square, one turn: variable count is (k+2) plus one per gate,
    and the witness extension of the known bisecting point satisfies every
    atom under the shipped interpreter."""
    ci = compile_instance(one_color_square())
    k = 1
    formula = export_etr(ci, k)
    m_prime = formula.max_count + formula.min_count
    assert len(formula.variables) == (k + 2) + m_prime
    assert len(formula.variables) == 181  # frozen: 98 max + 80 min gates

    point = {"P_1": F(1, 2), "P_2": F(3, 2), "P_3": ZERO}
    env = formula.witness(point)
    decls = " ".join(f"({name} Real)" for name in formula.variables)
    for atom in formula.atom_constraints:
        assert evaluate_etr(f"(exists ({decls}) {atom})", env)
    assert evaluate_etr(formula.text, env)


# ---------------------------------------------------------------------------
# 9. Degenerate inputs and robustness
# ---------------------------------------------------------------------------


class TestDegenerateInputs:
    def test_zero_thickness_first_slice(self):
        """A vertical line is a zero-thickness first slice; both measure
        routes agree and the path stays within budget."""
        inst = one_color_square()
        ci = compile_instance(inst)
        sol = make_solution([ZERO, ONE], [F(3, 4)])
        masses = region_mass_oracle(inst, sol)
        assert eval_solution(ci, sol) == tuple(a for a, _ in masses)
        assert masses == [(F(3, 4), F(1, 4))]
        path = solution_to_path(sol)
        assert path.turns == 0
        assert verify_scpath(inst, sol, F(1, 2)).ok

    def test_zero_thickness_middle_slice(self):
        inst = one_color_square()
        ci = compile_instance(inst)
        sol = make_solution([F(1, 2), ZERO, F(-1, 2)], [F(1, 4), F(3, 4)])
        masses = region_mass_oracle(inst, sol)
        assert eval_solution(ci, sol) == tuple(a for a, _ in masses)
        assert solution_to_path(sol).turns <= 2

    def test_cuts_at_strip_edges(self):
        """Cuts pinned to 0 and 1 leave everything on one side."""
        inst = one_color_square()
        ci = compile_instance(inst)
        at_zero = make_solution([ZERO, ONE], [ZERO])
        assert eval_solution(ci, at_zero) == (ZERO,)
        at_one = make_solution([ZERO, ONE], [ONE])
        assert eval_solution(ci, at_one) == (ONE,)
        for sol in (at_zero, at_one):
            assert region_mass_oracle(inst, sol) == [
                (eval_solution(ci, sol)[0], ONE - eval_solution(ci, sol)[0])
            ]

    def test_saturated_magnitude_decode(self):
        """A first coordinate past the saturation point absorbs the whole
        unit interval; the remaining slices are empty and conservation
        still holds."""
        ci = compile_instance(one_color_square())
        p = make_sphere_point([F(3, 2), F(1, 4), F(1, 4)], 2)
        sol = sphere_to_solution(p)
        assert sol.y_levels == (ZERO, ONE, ONE)
        assert bu_eval(ci, p) == ci.totals
        f_neg = bu_eval(ci, antipode(p))
        assert tuple(a + b for a, b in zip(bu_eval(ci, p), f_neg)) == ci.totals

    def test_wrap_around_path(self):
        """Alternating signs force a seam-crossing arc; the dual routes
        agree and the turn count stays within budget."""
        inst = one_color_square()
        ci = compile_instance(inst)
        sol = make_solution(
            [F(2, 5), F(-2, 5), F(1, 5)], [F(3, 10), F(3, 5)]
        )
        path = solution_to_path(sol)
        assert any(getattr(seg, "wrap", False) for seg in path.segments)
        assert path.turns <= (len(sol.z) - 1) + len(sol.x) - 1
        masses = region_mass_oracle(inst, sol)
        assert eval_solution(ci, sol) == tuple(a for a, _ in masses)

    def test_sign_tie_break_coincides_at_zero_coordinate(self):
        """A zero sphere coordinate with an unsaturated prefix makes both
        antipodes decode the affected slice with the same sign, so the
        conservation identity fails off the generic region while the
        balance gap stays honest.  Frozen counterexample."""
        ci = compile_instance(one_color_square())
        p = make_sphere_point([F(-5, 6), ZERO, F(-7, 6)], 2)
        q = antipode(p)
        assert sphere_to_solution(p).z_signs[1] == sphere_to_solution(q).z_signs[1] == 1
        assert bu_eval(ci, p) == (F(1, 6),)
        assert bu_eval(ci, q) == (ONE,)
        assert bu_eval(ci, p)[0] + bu_eval(ci, q)[0] != ci.totals[0]
        assert balance_residual(ci, p) == F(2, 3)

    def test_balance_gap_honest_where_antipodal_residual_degenerates(self):
        """At a point whose z block is all zero the antipode decodes to the
        same solution: the antipodal residual vanishes spuriously while the
        balance gap reports the true imbalance.  This is why acceptance is
        judged on the balance gap."""
        ci = compile_instance(one_color_square())
        p = make_sphere_point([ZERO, ZERO, F(-2)], 2)
        assert residual(ci, p) == ZERO
        assert bu_eval(ci, p) == ci.totals
        assert balance_residual(ci, p) == ONE

    def test_zeroed_coordinates_decode_well_formed(self):
        """Points with zero coordinates still decode to feasible solutions:
        monotone levels inside [0, 1], cuts inside [0, 1], masses within
        the per-color totals."""
        rng = random.Random(909)
        ci = compile_instance(one_color_square())
        for _ in range(50):
            k = rng.randint(1, 3)
            raw = [F(rng.randint(-2, 2), 2) for _ in range(k + 2)]
            if all(v == 0 for v in raw):
                raw[0] = ONE
            norm = sum(abs(v) for v in raw)
            p = make_sphere_point([v * F(k + 1) / norm for v in raw], k + 1)
            sol = sphere_to_solution(p)
            levels = sol.y_levels
            assert all(a <= b for a, b in zip(levels, levels[1:]))
            assert levels[0] == ZERO and levels[-1] == ONE
            assert all(ZERO <= c <= ONE for c in sol.x)
            f = bu_eval(ci, p)
            assert all(ZERO <= v <= t for v, t in zip(f, ci.totals))

    def test_point_on_path_boundary(self):
        """Probe points exactly on the cut are reported as boundary."""
        from pizzashare.scpath import point_side

        sol = make_solution([ZERO, ONE], [F(1, 2)])
        assert point_side(sol, Point2(F(1, 2), F(1, 2))) == "boundary"
        assert point_side(sol, Point2(F(1, 4), F(1, 2))) in ("A", "B")
