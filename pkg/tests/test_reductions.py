"""Consensus-halving reductions: encodings, map-backs, and verifiers.

Expected masses and cut positions are frozen from the independent clipping
oracles; the encodings' value correspondence (agent values survive into
per-color region masses exactly) is exercised on both frozen designs and
seeded random instances.
"""

from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from corpus import random_two_block_ch
from pizzashare import (
    CHInstance,
    CHSolution,
    CHValuation,
    StraightCutSet,
    lines_to_ch_cuts,
    parse_ch_instance,
    parse_ch_solution,
    parse_lines,
    parse_meta,
    path_to_ch_cuts,
    points_of_interest,
    reduce_checkerboard,
    reduce_exact,
    reduce_overlapping,
    reduce_straight,
    region_mass_oracle,
    serialize_ch_instance,
    serialize_ch_solution,
    serialize_lines,
    serialize_meta,
    verify_ch,
    verify_scpath,
    verify_straight,
)
from pizzashare.geometry import (
    InstanceError,
    MassDistribution,
    PizzaInstance,
    Point2,
    Transform,
    WeightedPolygon,
)
from pizzashare.reductions import (
    GADGET_WEIGHT,
    ch_positive_value,
    line_side_masses,
    rotate_lines,
    straight_line_budget,
    tile_labels,
    validate_ch_instance,
    _line_crosses_rect,
    _tile_rects,
)
from pizzashare.scpath import make_solution, solution_to_path

import oracles

ZERO = F(0)
ONE = F(1)


def square(x, y, side):
    x, y, side = F(x), F(y), F(side)
    return (
        Point2(x, y),
        Point2(x + side, y),
        Point2(x + side, y + side),
        Point2(x, y + side),
    )


def uniform_agent():
    return CHValuation("kBlock", ((ZERO, ONE, ONE),))


def polygon_mass(poly: WeightedPolygon) -> F:
    return poly.weight * oracles.poly_area([(p.x, p.y) for p in poly.outer])


def polygon_rect(poly: WeightedPolygon) -> tuple[F, F, F, F]:
    xs = [p.x for p in poly.outer]
    ys = [p.y for p in poly.outer]
    return (min(xs), min(ys), max(xs), max(ys))


# ---------------------------------------------------------------------------
# Valuations and instances
# ---------------------------------------------------------------------------


class TestValuation:
    def test_block_cumulative(self):
        v = CHValuation("kBlock", ((F(0), F(1, 2), F(1)), (F(3, 4), F(1), F(2))))
        assert v.total_value() == 1
        assert v.cumulative(F(1, 4)) == F(1, 4)
        assert v.cumulative(F(3, 4)) == F(1, 2)
        assert v.value(F(1, 2), F(7, 8)) == F(1, 4)
        assert v.density_on(F(3, 4), F(1)) == 2
        assert v.density_on(F(1, 2), F(3, 4)) == 0

    def test_triangle_cumulative_is_quadratic(self):
        v = CHValuation("blockPlusTriangle", (), triangle=(F(1), F(2)))
        assert v.total_value() == 1
        for u in (F(0), F(1, 4), F(1, 2), F(1)):
            assert v.cumulative(1 + u) == u * u

    def test_points_of_interest_dedups(self):
        ch = CHInstance(
            (
                CHValuation("kBlock", ((F(0), F(1, 2), F(2)),)),
                CHValuation("kBlock", ((F(0), F(1, 2), F(1)), (F(1, 2), F(1), F(1)))),
            )
        )
        assert points_of_interest(ch) == [F(0), F(1, 2), F(1)]

    @pytest.mark.parametrize(
        "agents,match",
        [
            ((), "no agents"),
            ((CHValuation("mystery", ((ZERO, ONE, ONE),)),), "unknown valuation kind"),
            ((CHValuation("kBlock", ((ONE, ZERO, ONE),)),), "empty or inverted"),
            ((CHValuation("kBlock", ((ZERO, ONE, -ONE),)),), "negative block density"),
            (
                (CHValuation("kBlock", ((ZERO, F(3, 4), ONE), (F(1, 2), ONE, ONE))),),
                "blocks overlap",
            ),
            (
                (
                    CHValuation(
                        "twoBlockUniform",
                        (
                            (ZERO, F(1, 4), F(4, 3)),
                            (F(1, 4), F(1, 2), F(4, 3)),
                            (F(1, 2), F(3, 4), F(4, 3)),
                        ),
                    ),
                ),
                "at most 2 blocks",
            ),
            (
                (CHValuation("twoBlockUniform", ((ZERO, F(1, 2), ONE), (F(1, 2), ONE, F(2)))),),
                "share one density",
            ),
            (
                (CHValuation("kBlock", ((ZERO, ONE, ONE),), triangle=(F(1), F(2))),),
                "no triangle part",
            ),
            ((CHValuation("blockPlusTriangle", ()),), "needs a triangle"),
            (
                (CHValuation("blockPlusTriangle", (), triangle=(F(0), F(3))),),
                "width exactly 1",
            ),
            ((CHValuation("kBlock", ((ZERO, ONE, F(2)),)),), "total value"),
        ],
    )
    def test_validate_rejects(self, agents, match):
        with pytest.raises(InstanceError, match=match):
            validate_ch_instance(CHInstance(tuple(agents)))


class TestCHSolution:
    def test_segments_alternate(self):
        sol = CHSolution(cuts=(F(1, 4), F(1, 2)), first_label="-")
        assert sol.segments(F(0), F(1)) == [
            (F(0), F(1, 4), "-"),
            (F(1, 4), F(1, 2), "+"),
            (F(1, 2), F(1), "-"),
        ]

    def test_degenerate_piece_dropped(self):
        sol = CHSolution(cuts=(F(0), F(1, 2)))
        assert sol.segments(F(0), F(1)) == [(F(0), F(1, 2), "-"), (F(1, 2), F(1), "+")]

    def test_rejects_unsorted_cuts(self):
        with pytest.raises(InstanceError, match="strictly increasing"):
            CHSolution(cuts=(F(1, 2), F(1, 2)))

    def test_rejects_bad_label(self):
        with pytest.raises(InstanceError, match="first_label"):
            CHSolution(cuts=(), first_label="x")


# ---------------------------------------------------------------------------
# Overlapping reduction
# ---------------------------------------------------------------------------


class TestOverlapping:
    def test_single_agent_geometry(self):
        inst, meta = reduce_overlapping(CHInstance((uniform_agent(),)))
        assert meta.kind == "overlapping"
        assert meta.points == (F(0), F(1))
        assert meta.transform == Transform(F(-1), F(-1), F(1))
        rec = meta.intervals[0]
        assert (rec.x_lo, rec.x_hi, rec.sq_x, rec.sq_y, rec.side) == (
            F(0),
            F(1),
            F(1),
            F(1),
            F(1),
        )
        [mass] = inst.masses
        [poly] = mass.polygons
        assert poly.outer == square(0, 0, 1)
        assert poly.weight == 1

    def test_three_agent_overlap(self):
        # densities 2, 4/3, 4 on [0,1/2], [1/4,1], [1/4,1/2]: the middle
        # interval's square carries all three colors
        ch = CHInstance(
            (
                CHValuation("kBlock", ((F(0), F(1, 2), F(2)),)),
                CHValuation("kBlock", ((F(1, 4), F(1), F(4, 3)),)),
                CHValuation("kBlock", ((F(1, 4), F(1, 2), F(4)),)),
            )
        )
        inst, meta = reduce_overlapping(ch)
        assert meta.points == (F(0), F(1, 4), F(1, 2), F(1))
        assert [len(m.polygons) for m in inst.masses] == [2, 2, 1]
        for mass in inst.masses:
            assert sum(polygon_mass(p) for p in mass.polygons) == 1
        shared = meta.transform.apply(Point2(F(2), F(2)))
        on_middle = [
            m.color_id
            for m in inst.masses
            if any(p.outer[0] == shared for p in m.polygons)
        ]
        assert on_middle == [1, 2, 3]
        middle = {
            m.color_id: polygon_mass(p)
            for m in inst.masses
            for p in m.polygons
            if p.outer[0] == shared
        }
        assert middle == {1: F(1, 2), 2: F(1, 3), 3: F(1)}

    def test_rejects_triangle_parts(self):
        ch = CHInstance((CHValuation("blockPlusTriangle", (), triangle=(F(0), F(1))),))
        with pytest.raises(InstanceError, match="requires block valuations"):
            reduce_overlapping(ch)

    def test_value_correspondence_random(self):
        # mapping a path back redistributes each interval's positive length
        # as one run whose agent value equals the square's side-A mass
        rng = random.Random(5)
        checked = 0
        for _ in range(40):
            ch = random_two_block_ch(rng)
            inst, meta = reduce_overlapping(ch)
            k = ch.n - 1
            s = (k + 2) // 2
            mags = [F(rng.randint(0, 8)) for _ in range(s + 1)]
            if sum(mags) == 0:
                mags[0] = ONE
            total = sum(mags)
            z = [m / total * rng.choice([-1, 1]) for m in mags]
            x = [F(rng.randint(0, 16), 16) for _ in range(k + 1 - s)]
            sol = make_solution(z, x)
            mapped = path_to_ch_cuts(meta, sol)
            assert len(mapped.cuts) <= solution_to_path(sol).turns + 1
            masses = region_mass_oracle(inst, sol)
            assert ch_positive_value(ch, mapped) == tuple(a for a, _ in masses)
            checked += 1
        assert checked == 40


# ---------------------------------------------------------------------------
# Checkerboard reduction
# ---------------------------------------------------------------------------


def four_agent_checkerboard() -> CHInstance:
    """Four agents, one block each of length 1/4 and density 4."""
    return CHInstance(
        tuple(
            CHValuation("twoBlockUniform", ((F(i, 4), F(i + 1, 4), F(4)),))
            for i in range(4)
        )
    )


def two_agent_checkerboard() -> CHInstance:
    """Two identical agents valuing [0,1/2] and [1/2,1] at density 1."""
    blocks = ((F(0), F(1, 2), F(1)), (F(1, 2), F(1), F(1)))
    return CHInstance((CHValuation("twoBlockUniform", blocks),) * 2)


class TestCheckerboard:
    def assert_no_overlap(self, inst: PizzaInstance) -> None:
        rects = [polygon_rect(p) for m in inst.masses for p in m.polygons]
        for i, r1 in enumerate(rects):
            for r2 in rects[i + 1 :]:
                assert oracles.rect_overlap_area(r1, r2) == 0

    def test_four_agents(self):
        inst, meta = reduce_checkerboard(four_agent_checkerboard(), F(1, 100))
        assert meta.eps_out == F(1, 100)  # eps * n / c_max with n = c_max = 4
        assert [len(m.polygons) for m in inst.masses] == [4, 4, 4, 4]  # n^2 / c_i
        for mass in inst.masses:
            assert sum(polygon_mass(p) for p in mass.polygons) == 1
        self.assert_no_overlap(inst)
        assert [r.side for r in meta.intervals] == [F(2)] * 4
        assert meta.notes == ()

    def test_two_agents_per_block_mass(self):
        inst, meta = reduce_checkerboard(two_agent_checkerboard(), F(1, 100))
        assert meta.eps_out == F(1, 50)
        assert [len(m.polygons) for m in inst.masses] == [4, 4]
        t = meta.transform
        for mass in inst.masses:
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
                assert block_mass == (rec.x_hi - rec.x_lo) * F(1)
        self.assert_no_overlap(inst)

    def test_granularity_refines_grid(self):
        inst, _ = reduce_checkerboard(two_agent_checkerboard(), F(1, 100), granularity=2)
        assert [len(m.polygons) for m in inst.masses] == [16, 16]
        for mass in inst.masses:
            assert sum(polygon_mass(p) for p in mass.polygons) == 1
        self.assert_no_overlap(inst)

    def test_irrational_side_needs_approx_mode(self):
        thirds = CHInstance(
            (CHValuation("twoBlockUniform", ((F(0), F(1, 3), F(1)), (F(1, 3), F(1), F(1)))),)
        )
        with pytest.raises(InstanceError, match="irrational"):
            reduce_checkerboard(thirds, F(1, 100))
        inst, meta = reduce_checkerboard(thirds, F(1, 100), mode="approx")
        assert meta.notes and "deviation" in meta.notes[0]
        total = sum(polygon_mass(p) for p in inst.masses[0].polygons)
        assert abs(total - 1) < F(1, 1000)

    def test_rejects_other_kinds(self):
        with pytest.raises(InstanceError, match="needs twoBlockUniform"):
            reduce_checkerboard(CHInstance((uniform_agent(),)), F(1, 100))

    def test_rejects_bad_eps_and_mode(self):
        ch = two_agent_checkerboard()
        with pytest.raises(InstanceError, match="eps must be positive"):
            reduce_checkerboard(ch, F(0))
        with pytest.raises(InstanceError, match="unknown checkerboard mode"):
            reduce_checkerboard(ch, F(1, 100), mode="fuzzy")


# ---------------------------------------------------------------------------
# Straight reduction
# ---------------------------------------------------------------------------


def uniform_straight() -> tuple:
    ch = CHInstance((CHValuation("twoBlockUniform", ((F(0), F(1), F(1)),)),))
    inst, meta = reduce_straight(ch, F(11, 20), F(1, 4))
    return ch, inst, meta


class TestStraightBudget:
    def test_frozen_budgets(self):
        assert [straight_line_budget(n, F(1, 4)) for n in range(1, 8)] == [
            2,
            2,
            3,
            3,
            5,
            5,
            6,
        ]

    def test_budget_grows_with_agents(self):
        budgets = [straight_line_budget(n, F(1, 2)) for n in range(1, 30)]
        assert budgets == sorted(budgets)


class TestStraight:
    def test_frozen_layout(self):
        _, inst, meta = uniform_straight()
        assert meta.d == F(1, 4)  # 1/eps^2 = 400/121 rounds up to grid 4
        assert meta.tile_count == 4
        assert meta.budget == 2
        assert meta.square_sides == (F(11, 20),)
        assert meta.eps_out == F(11, 20)
        [mass] = inst.masses
        assert len(mass.polygons) == 4
        assert all(polygon_mass(p) == F(1, 4) for p in mass.polygons)

    def test_known_separating_line(self):
        # construction line y = 7 passes between tiles 2 and 3
        ch, inst, meta = uniform_straight()
        line = (F(0), F(1), meta.transform.apply_y(F(7)))
        rep = verify_straight(inst, StraightCutSet((line,)), F(11, 20))
        assert rep.ok
        assert rep.masses == ((F(1, 2), F(1, 2)),)
        assert rep.gaps == (F(0),)
        mapped = lines_to_ch_cuts(meta, StraightCutSet((line,)))
        assert mapped == CHSolution(cuts=(F(1, 2),), first_label="+")
        assert verify_ch(ch, mapped, F(0)).ok

    def test_tile_crossing_line_rotates_clear(self):
        ch, inst, meta = uniform_straight()
        crossing = StraightCutSet(((F(0), F(1), meta.transform.apply_y(F(9, 2))),))
        rects = _tile_rects(meta)
        assert any(_line_crosses_rect(crossing.lines[0], r) for r in rects)
        rotated = rotate_lines(meta, crossing)
        assert all(
            not _line_crosses_rect(line, r) for line in rotated.lines for r in rects
        )
        # rotating moves each color's parity masses by at most 2 * c_i * d
        before = line_side_masses(inst, crossing)
        after = line_side_masses(inst, rotated)
        for (b, _), (a, _), agent in zip(before, after, ch.agents):
            assert abs(b - a) <= 2 * agent.density * meta.d
        assert tile_labels(meta, crossing) == ["+", "+", "-", "-"]
        assert tile_labels(meta, rotated) == ["+", "+", "-", "-"]
        assert lines_to_ch_cuts(meta, crossing) == CHSolution(cuts=(F(1, 2),))

    def test_non_crossing_line_kept(self):
        _, _, meta = uniform_straight()
        line = (F(0), F(1), meta.transform.apply_y(F(7)))
        assert rotate_lines(meta, StraightCutSet((line,))).lines == (line,)

    def test_rejects_bad_inputs(self):
        ch = CHInstance((CHValuation("twoBlockUniform", ((F(0), F(2), F(1, 2)),)),))
        with pytest.raises(InstanceError, match=r"blocks in \[0,1\]"):
            reduce_straight(ch, F(1, 2), F(1, 2))
        good = CHInstance((CHValuation("twoBlockUniform", ((F(0), F(1), F(1)),)),))
        with pytest.raises(InstanceError, match="delta"):
            reduce_straight(good, F(1, 2), F(1))
        with pytest.raises(InstanceError, match="needs twoBlockUniform"):
            reduce_straight(CHInstance((uniform_agent(),)), F(1, 2), F(1, 2))

    def test_irrational_density_needs_approx(self):
        ch = CHInstance(
            (CHValuation("twoBlockUniform", ((F(0), F(1, 2), F(2)),)),)
        )
        inst, meta = reduce_straight(ch, F(11, 20), F(1, 4), mode="approx")
        assert "approximate square sides" in meta.notes
        with pytest.raises(InstanceError, match="irrational"):
            reduce_straight(ch, F(11, 20), F(1, 4))


# ---------------------------------------------------------------------------
# Exact reduction and its gadget
# ---------------------------------------------------------------------------


def gadget_pair() -> tuple:
    ch = CHInstance(
        (
            uniform_agent(),
            CHValuation("blockPlusTriangle", (), triangle=(F(1), F(2))),
        )
    )
    inst, meta = reduce_exact(ch)
    return ch, inst, meta


class TestExact:
    def test_frozen_layout(self):
        _, inst, meta = gadget_pair()
        assert meta.kind == "exact"
        assert meta.points == (F(0), F(1), F(2))
        assert meta.transform == Transform(F(-1), F(-1), F(1, 2))
        assert [r.gadget for r in meta.intervals] == [False, True]
        gadget = inst.masses[1].polygons[0]
        assert gadget.weight == GADGET_WEIGHT * 4  # construction weight * scale^-2
        assert polygon_mass(gadget) == 1

    def test_vertical_crossing_cuts_quadratic_mass(self):
        ch, inst, meta = gadget_pair()
        sol = make_solution([F(0), F(1)], [F(3, 4)])
        masses = region_mass_oracle(inst, sol)
        assert masses == [(F(1), F(0)), (F(1, 4), F(3, 4))]
        mapped = path_to_ch_cuts(meta, sol)
        assert mapped == CHSolution(cuts=(F(3, 2),), first_label="+")
        assert ch_positive_value(ch, mapped) == (F(1), F(1, 4))

    @pytest.mark.parametrize("u", [F(i, 8) for i in range(1, 8)])
    def test_gadget_law_u_squared(self, u):
        # a vertical crossing of the gadget square at fraction u cuts off
        # triangle mass exactly u^2, matching the valuation's cumulative law
        ch, inst, meta = gadget_pair()
        sol = make_solution([F(0), F(1)], [F(1, 2) + u / 2])
        masses = region_mass_oracle(inst, sol)
        assert masses[1] == (u * u, 1 - u * u)
        mapped = path_to_ch_cuts(meta, sol)
        assert ch_positive_value(ch, mapped) == tuple(a for a, _ in masses)

    def test_horizontal_crossing_matches(self):
        ch, inst, meta = gadget_pair()
        sol = make_solution([F(3, 4), F(-1, 4)], [F(1)])
        masses = region_mass_oracle(inst, sol)
        assert masses[1] == (F(1, 4), F(3, 4))
        mapped = path_to_ch_cuts(meta, sol)
        assert mapped == CHSolution(cuts=(F(3, 2),), first_label="+")
        assert ch_positive_value(ch, mapped) == tuple(a for a, _ in masses)

    def test_turn_inside_gadget_is_flagged(self):
        _, inst, meta = gadget_pair()
        sol = make_solution([F(5, 8), F(3, 8)], [F(3, 4)])
        rep = verify_scpath(inst, sol, F(2), meta)
        assert rep.warnings == ("path turns inside gadget square 2",)
        clean = make_solution([F(0), F(1)], [F(3, 4)])
        assert verify_scpath(inst, clean, F(2), meta).warnings == ()

    def test_triangle_spanning_intervals_rejected(self):
        ch = CHInstance(
            (
                CHValuation("blockPlusTriangle", (), triangle=(F(0), F(1))),
                CHValuation("kBlock", ((F(0), F(1, 2), F(2)),)),
            )
        )
        with pytest.raises(InstanceError, match="spans multiple intervals"):
            reduce_exact(ch)

    def test_rejects_two_block_uniform(self):
        ch = CHInstance((CHValuation("twoBlockUniform", ((F(0), F(1), F(1)),)),))
        with pytest.raises(InstanceError, match="expects kBlock"):
            reduce_exact(ch)


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------


class TestVerifyCH:
    def test_balanced_cut_passes(self):
        ch = CHInstance((uniform_agent(),))
        rep = verify_ch(ch, CHSolution(cuts=(F(1, 2),)), F(0))
        assert rep.ok
        assert rep.positive_values == (F(1, 2),)
        assert rep.gaps == (F(0),)
        assert rep.cut_count == 1

    def test_unbalanced_cut_fails(self):
        ch = CHInstance((uniform_agent(),))
        rep = verify_ch(ch, CHSolution(cuts=(F(3, 4),)), F(1, 4))
        assert not rep.ok
        assert rep.gaps == (F(1, 2),)

    def test_cut_outside_domain_rejected(self):
        ch = CHInstance((uniform_agent(),))
        with pytest.raises(InstanceError, match="outside the valuation domain"):
            verify_ch(ch, CHSolution(cuts=(F(3, 2),)), F(1))


class TestVerifyStraight:
    def unit_instance(self) -> PizzaInstance:
        poly = WeightedPolygon(weight=ONE, outer=square(0, 0, 1))
        return PizzaInstance(
            masses=(MassDistribution(color_id=1, polygons=(poly,)),), normalized=True
        )

    def test_single_line_halves(self):
        rep = verify_straight(
            self.unit_instance(), StraightCutSet(((ONE, ZERO, F(1, 2)),)), F(0)
        )
        assert rep.ok
        assert rep.masses == ((F(1, 2), F(1, 2)),)

    def test_two_line_parity(self):
        # even-parity class is the two outer strips of the unit square
        lines = StraightCutSet(((ONE, ZERO, F(1, 4)), (ONE, ZERO, F(3, 4))))
        rep = verify_straight(self.unit_instance(), lines, F(0))
        assert rep.ok
        assert rep.masses == ((F(1, 2), F(1, 2)),)

    def test_gap_exceeding_eps_fails(self):
        rep = verify_straight(
            self.unit_instance(), StraightCutSet(((ONE, ZERO, F(1, 4)),)), F(1, 4)
        )
        assert not rep.ok
        assert rep.gaps == (F(1, 2),)

    def test_degenerate_line_rejected(self):
        with pytest.raises(InstanceError, match="degenerate line"):
            StraightCutSet(((ZERO, ZERO, ONE),))


class TestVerifyPath:
    def test_report_fields(self):
        _, inst, meta = gadget_pair()
        sol = make_solution([F(0), F(1)], [F(3, 4)])
        rep = verify_scpath(inst, sol, F(1), meta)
        assert rep.ok
        assert rep.gaps == (F(1), F(1, 2))
        assert rep.turns == 0
        assert rep.turn_budget == 1

    def test_eps_gate(self):
        _, inst, meta = gadget_pair()
        sol = make_solution([F(0), F(1)], [F(3, 4)])
        assert not verify_scpath(inst, sol, F(1, 4), meta).ok


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


class TestFiles:
    def test_ch_instance_round_trip(self):
        ch = CHInstance(
            (
                CHValuation("kBlock", ((F(0), F(1, 2), F(2)),)),
                CHValuation("blockPlusTriangle", (), triangle=(F(1, 2), F(3, 2))),
            )
        )
        assert parse_ch_instance(serialize_ch_instance(ch)) == ch

    def test_ch_solution_round_trip(self):
        sol = CHSolution(cuts=(F(1, 3), F(2, 3)), first_label="-")
        assert parse_ch_solution(serialize_ch_solution(sol)) == sol

    def test_lines_round_trip(self):
        lines = StraightCutSet(((F(1), F(-2), F(1, 3)), (F(0), F(1), F(7))))
        assert parse_lines(serialize_lines(lines)) == lines

    def test_meta_round_trip(self):
        for builder in (
            lambda: reduce_overlapping(CHInstance((uniform_agent(),))),
            lambda: uniform_straight()[1:],
            lambda: gadget_pair()[1:],
        ):
            meta = builder()[-1]
            assert parse_meta(serialize_meta(meta)) == meta

    def test_malformed_files_rejected(self):
        with pytest.raises(InstanceError, match="invalid JSON"):
            parse_ch_instance("{")
        with pytest.raises(InstanceError, match="agents"):
            parse_ch_instance("{}")
        with pytest.raises(InstanceError, match="lines"):
            parse_lines("{}")
