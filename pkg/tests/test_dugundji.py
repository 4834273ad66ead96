"""
Tests for Dugundji systems and their finite-depth verification
"""

from fractions import Fraction

import pytest

from app.clopen import Region
from app.dugundji import (
    b_compose_nu,
    b_realizer,
    delta4_to_delta8,
    delta8_denotation,
    drive,
    dugundji_Q,
    epsilon1_constants,
    pick_near_point,
    verify_dugundji,
)
from app.errors import EmptySet, PreconditionViolation, WholeSpace
from app.hyperspaces import FullClosedName, OpenName, closed_set_from_region, cover_union, whole_space_set
from app.machines import utm_apply
from app.names import Name, cantor_pair, pair_names
from app.spaces import Cell, label_to_name


class TestConstants:
    """Fixed constants of the coefficient-2 construction"""

    def test_epsilon1_constants(self):
        constants = epsilon1_constants()
        assert constants.f == Fraction(1, 4)
        assert constants.anchor_factor == Fraction(5, 4)
        assert constants.center_bound == Fraction(3, 2)
        assert constants.coefficient == 2


class TestPreconditions:
    """Inputs a Dugundji system cannot be built from"""

    def test_nonpositive_eps(self, cylinder_zero):
        with pytest.raises(PreconditionViolation):
            dugundji_Q(0, cylinder_zero)

    def test_empty_set(self, cantor):
        with pytest.raises(EmptySet):
            dugundji_Q(1, closed_set_from_region(Region.empty(cantor)))

    def test_whole_space(self, cantor):
        with pytest.raises(WholeSpace):
            dugundji_Q(1, whole_space_set(cantor))

    def test_factor_out_of_range(self, cylinder_zero):
        with pytest.raises(PreconditionViolation):
            b_realizer(cylinder_zero, 2)


class TestBuildingBlocks:
    """Balls around points and anchor picking"""

    def test_ball_stays_off_the_set(self, cantor, cylinder_zero):
        f = b_realizer(cylinder_zero, Fraction(1, 2))
        ball = OpenName(cantor, utm_apply(f.machine, label_to_name(cantor, "1").stream))
        found = ball.region(8)
        assert found
        assert not found.meets_region(cylinder_zero.oracle)

    def test_ball_is_the_largest_cell_off_the_set(self, z3, nine_z3):
        f = b_realizer(nine_z3, Fraction(1, 2))
        ball = OpenName(z3, utm_apply(f.machine, label_to_name(z3, 3).stream))
        assert ball.region(64) == Region(z3, [Cell(2, 3)])
        depths = [z3.open_cell(code).depth for code in ball.codes(64)]
        assert depths == sorted(set(depths), reverse=True)
        assert depths[-1] == 2

    def test_cylinder_copies_share_balls(self, cylinder_zero):
        Us = b_compose_nu(cylinder_zero, Fraction(1, 4), cylinder=True)
        assert Us[cantor_pair(2, 5)] is Us[cantor_pair(2, 0)]

    def test_system_covers_the_complement(self, cantor, cylinder_zero):
        _, covered = drive(dugundji_Q(1, cylinder_zero), Region(cantor, [Cell(1, "1")]), 4096)
        assert covered

    def test_cover_union_members_are_the_balls(self, cantor, cylinder_zero):
        _, family = cover_union(b_realizer(cylinder_zero, Fraction(1, 2)))
        off = family[cantor.index_of("1")].region(8)
        assert off
        assert not off.meets_region(cylinder_zero.oracle)
        assert not family[cantor.index_of("01")].region(8)

    def test_pick_near_point(self, cantor, cylinder_zero):
        x = label_to_name(cantor, "1")
        y = pick_near_point(cylinder_zero, x, Fraction(3, 2))
        assert cylinder_zero.oracle.contains_point(y.label(0))
        assert pick_near_point(cylinder_zero, x, Fraction(1), budget=12) is None


class TestRepresentations:
    """Conversion between closed-set representations"""

    def test_delta8_round_trip_shape(self, cantor):
        family = pair_names(Name.padded([3]), Name.constant(0))
        name = delta4_to_delta8(pair_names(family, Name.constant(4)))
        range_name, closed = delta8_denotation(cantor, name)
        assert not range_name.is_empty()
        assert range_name.stream[0] == 5
        assert closed.stream[0] == 3


@pytest.mark.slow
class TestVerification:
    """Finite-depth audits of whole systems"""

    @pytest.mark.parametrize("eps", [Fraction(1, 2), Fraction(1)])
    def test_cantor_cylinder(self, cylinder_zero, eps):
        checks = verify_dugundji(dugundji_Q(eps, cylinder_zero), cylinder_zero, 4)
        assert {c.name for c in checks} >= {"cover", "anchors-in-A", "anchor-inequality", "witness-soundness"}
        assert all(c.passed for c in checks), [c for c in checks if not c.passed]

    def test_three_adic_ball(self, nine_z3):
        D = dugundji_Q(1, nine_z3)
        assert D.coefficient == 2
        checks = verify_dugundji(D, nine_z3, 3)
        assert all(c.passed for c in checks), [c for c in checks if not c.passed]

    def test_verification_needs_an_exact_fixture(self, cantor, cylinder_zero):
        D = dugundji_Q(1, cylinder_zero)
        bare = FullClosedName(cantor, cylinder_zero.range, cylinder_zero.dist)
        with pytest.raises(PreconditionViolation):
            verify_dugundji(D, bare, 3)
