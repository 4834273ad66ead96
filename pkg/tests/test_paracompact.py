"""
Tests for locally finite refinements and shrinkings
"""

import pytest

from app.clopen import Region
from app.paracompact import (
    ShrinkState,
    TripleSearch,
    finite_lf_family,
    lf_open_shrink_Lp,
    lf_refine_L,
    lf_shrink_Lpp,
    member_region,
)
from app.hyperspaces import OpenName
from app.spaces import Cell


def cyl(*words):
    return [Cell(len(w), w) for w in words]


class TestTripleSearch:
    """The dovetailed search for nested ball pairs"""

    def test_triples_are_nested_in_their_member(self, cantor, cantor_opens):
        Us = [cantor_opens("0"), cantor_opens("1")]
        search = TripleSearch(cantor, Us)
        for t in search.triples(40):
            assert cantor.cell_subset(t.cell, t.parent)
            assert cantor.cell_subset(t.parent, t.ball)
            assert Us[t.e].oracle.covers(t.ball)

    def test_codes_name_the_nested_balls(self, z3):
        search = TripleSearch(z3, [OpenName.from_cells(z3, [Cell(1, 2)])])
        t = search.triple(0)
        assert z3.open_cell(t.a) == t.cell
        assert z3.closed_cell(t.a) == t.parent == z3.open_cell(t.b)
        assert z3.closed_cell(t.b) == t.ball == Cell(1, 2)

    def test_one_ball_splits_into_its_grandchildren(self, cantor, cantor_opens):
        search = TripleSearch(cantor, [cantor_opens("")])
        found = search.triples(1)
        assert [t.cell for t in found] == cyl("00", "01", "10", "11")
        assert all(t.step == 0 and t.ball == Cell(0, "") for t in found)

    def test_repeated_member_adds_no_triples(self, cantor, cantor_opens):
        U = cantor_opens("0")
        search = TripleSearch(cantor, [U, U, cantor_opens("1")])
        found = search.triples(12)
        assert {t.e for t in found} == {0, 2}

    def test_search_covers_the_union(self, cantor, cantor_opens):
        search = TripleSearch(cantor, [cantor_opens("0"), cantor_opens("1")])
        assert search.run_until_covers(Region.whole(cantor), 500)
        assert search.covered() == Region.whole(cantor)

    def test_empty_cover_yields_nothing(self, cantor):
        search = TripleSearch(cantor, [])
        assert search.triple(0, budget=30) is None
        assert search.steps == 30


class TestFiniteFamilies:
    """Exact witnesses for finite clopen families"""

    def test_witness_balls_and_bounds(self, cantor):
        regions = [Region(cantor, cyl("0")), Region(cantor, cyl("01", "1"))]
        family = finite_lf_family(cantor, regions)
        assert cantor.open_cell(family.witness.ball(0)) == Cell(1, "0")
        assert family.witness.bound(0) == {0, 1}
        assert family.witness.bound(1) == {1}
        assert family.witness.ball(5) is None
        assert family.members[1].region(4) == regions[1]


class TestRefinement:
    """Closed refinement with open kernels"""

    def test_kernels_sit_inside_closed_members(self, cantor, cantor_opens):
        Us = [cantor_opens("0"), cantor_opens("01", "11")]
        Vs, family, e = lf_refine_L(Us)
        indices = e.prefix(5)
        for j in range(5):
            t = family.search.triple(j)
            assert indices[j] == t.e
            kernel = Region(cantor, t.v_cells)
            closed = member_region(family, j, t.step + 1)
            assert closed.covers_region(kernel)
            assert Us[t.e].oracle.covers_region(closed)

    def test_kernels_remove_closed_balls_of_earlier_triples(self, cantor, cantor_opens):
        search = lf_refine_L([cantor_opens("")])[1].search
        t = search.triples(1)
        assert Region(cantor, t[0].v_cells) == Region(cantor, cyl("0"))
        # α(b_1) ∖ α(a_0) would leave [01]; the closed ball [0] of a_0 removes it
        assert not Region(cantor, t[1].v_cells)
        assert Region(cantor, t[2].v_cells) == Region(cantor, cyl("1"))

    def test_closed_members_start_from_the_member_ball(self, cantor, cantor_opens):
        search = lf_refine_L([cantor_opens("")])[1].search
        t = search.triples(1)
        assert Region(cantor, t[0].a_cells) == Region.whole(cantor)
        assert Region(cantor, t[3].a_cells) == Region(cantor, cyl("11"))

    def test_open_members_follow_the_search(self, cantor, cantor_opens):
        Vs, family, _ = lf_refine_L([cantor_opens("0")])
        t = family.search.triple(0)
        assert Vs[0].region(t.step + 4) == Region(cantor, t.v_cells)


class TestShrinking:
    """Open shrinkings with separating closed parts"""

    def test_shrinking_separates_and_covers(self, cantor, cantor_opens):
        Us = [cantor_opens("0"), cantor_opens("")]
        Ws, family = lf_shrink_Lpp(Us)
        assert family.search.run_until_covers(Region.whole(cantor), 500)
        steps = family.search.steps
        union = Region.empty(cantor)
        for m in range(2):
            V = member_region(family, m, steps)
            W = Ws[m].region(steps)
            assert Us[m].oracle.covers_region(V)
            assert not V.meets_region(W)
            union = union.union(V)
        assert union == Region.whole(cantor)

    def test_w_cells_avoid_closed_parts(self, cantor, cantor_opens):
        Us = [cantor_opens("0"), cantor_opens("")]
        _, family = lf_shrink_Lpp(Us)
        state = ShrinkState(family.search)
        for t in family.search.triples(20):
            closed = Region(cantor, [c for o in family.search.triples()[: t.index + 1] if o.e == 0 for c in o.a_cells])
            assert not closed.meets_region(Region(cantor, state.w_cells(0, t)))

    def test_open_shrinking_has_shifted_witness(self, cantor, cantor_opens):
        family = lf_open_shrink_Lp([cantor_opens("0")])
        assert family.witness.shifted
        assert family.witness.ball(0) is not None
        assert family.search.run_until_covers(Region(cantor, cyl("0")), 200)
        assert member_region(family, 0, family.search.steps) == Region(cantor, cyl("0"))
        assert not member_region(family, 1, family.search.steps)
