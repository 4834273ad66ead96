"""
Tests for partitions of unity, Cantor schemes and the generalized retraction
"""

from fractions import Fraction

import pytest

from app.audit import mixture_system, three_adic_homeo
from app.clopen import Region
from app.errors import DisjointnessViolation, MalformedScheme, PreconditionViolation, UnsupportedSpace
from app.hyperspaces import OpenName
from app.na_retract import (
    CantorScheme,
    beta_compact,
    cantor_scheme_homeo,
    char_partition,
    retract_value,
    theta,
)
from app.schemas import SchemeSpec
from app.spaces import Cell, PadicIntegers, abs_p, label_to_name


def natural_spec(**pieces):
    balls = {word: [{"center": word, "radius": str(Fraction(1, 2 ** len(word)))}] for word in ("0", "1")}
    balls.update(pieces)
    return SchemeSpec(space="cantor", root={"center": "", "radius": "1"}, depth=1, pieces=balls, tail="natural")


class TestCharacteristicPartition:
    """Indicators of disjoint clopen families"""

    def test_indicator_values(self, cantor, q3, cantor_opens):
        pu = char_partition([cantor_opens("0"), cantor_opens("1")], q3)
        x = label_to_name(cantor, "01")
        assert pu.value(0, x).approx(2) == 1
        assert pu.value(1, x).approx(2) == 0
        assert pu.indicator(1, label_to_name(cantor, "1"))

    def test_overlap_is_reported(self, q3, cantor_opens):
        with pytest.raises(DisjointnessViolation):
            char_partition([cantor_opens("0"), cantor_opens("01")], q3, audit_members=2, audit_entries=4)

    def test_empty_family(self, cantor, q3):
        with pytest.raises(PreconditionViolation):
            char_partition([], q3)
        assert char_partition([], q3, space=cantor).count == 0


class TestCantorSchemes:
    """Trees of clopen pieces"""

    def test_natural_scheme(self, cantor):
        scheme = CantorScheme.natural(cantor, Cell(0, ""))
        assert scheme.validate(4)
        assert scheme.locate("01", 3) == (0, 1, 0)

    def test_balanced_scheme_on_padic_ball(self, z3):
        scheme = CantorScheme.balanced(z3, Cell(1, 0))
        assert scheme.piece("0") == Region(z3, [Cell(2, 0), Cell(2, 3)])
        assert scheme.piece("1") == Region(z3, [Cell(2, 6)])
        assert scheme.piece("00") == Region(z3, [Cell(2, 0)])
        assert scheme.validate(3)
        assert scheme.locate(1, 2) is None

    def test_scheme_from_table(self):
        scheme = CantorScheme.from_spec(natural_spec())
        assert scheme.validate(3)

    def test_table_errors(self):
        with pytest.raises(MalformedScheme):
            CantorScheme.from_spec(natural_spec(**{"2": [{"center": "1", "radius": "1/2"}]}))
        overlapping = natural_spec(**{"1": [{"center": "0", "radius": "1/2"}]})
        with pytest.raises(MalformedScheme):
            CantorScheme.from_spec(overlapping).validate(1)

    def test_missing_piece(self):
        spec = SchemeSpec(space="cantor", root={"center": "", "radius": "1"}, depth=1,
                          pieces={"0": [{"center": "0", "radius": "1/2"}]})
        with pytest.raises(MalformedScheme):
            CantorScheme.from_spec(spec)


class TestSchemeHomeomorphisms:
    """Maps between schemes with matching branching"""

    def test_branching_must_match(self, cantor, z3):
        with pytest.raises(MalformedScheme):
            cantor_scheme_homeo(CantorScheme.natural(cantor, Cell(0, "")), CantorScheme.natural(z3, Cell(0, 0)))

    def test_forward_and_back(self, cantor, q3):
        h = three_adic_homeo()
        image = h.evaluate(label_to_name(cantor, "01")).label(4)
        assert abs_p(Fraction(image) - 3, 3) < Fraction(1, 2**4)
        back = h.inverse(domain=q3).evaluate(label_to_name(q3, 3)).label(4)
        assert cantor.dist(back, "01") < Fraction(1, 2**4)


class TestThetaPreimage:
    """Preimages of θ on the two-anchor mixture"""

    def test_witness_ball_enters_when_both_anchors_land_in_u(self, q3):
        A, D, pu = mixture_system()
        U = OpenName.from_cells(q3, [Cell(1, Fraction(0))])
        P = theta(A, D, pu, three_adic_homeo()).preimage(U)
        assert P.region(4).covers(Cell(1, "1"))

    def test_witness_ball_stays_out_when_anchors_split(self, q3):
        A, D, pu = mixture_system()
        U = OpenName.from_cells(q3, [Cell(2, Fraction(0))])
        P = theta(A, D, pu, three_adic_homeo()).preimage(U)
        assert not P.region(6).meets(Cell(1, "1"))


@pytest.mark.slow
class TestTheta:
    """θ on and off the closed set"""

    def test_mixture_off_a(self, cantor):
        A, D, pu = mixture_system()
        value = theta(A, D, pu, three_adic_homeo()).evaluate(label_to_name(cantor, "1")).label(3)
        assert abs_p(Fraction(value) + 6, 3) < Fraction(1, 2**3)

    def test_agrees_with_h_on_a(self, cantor):
        A, D, pu = mixture_system()
        value = theta(A, D, pu, three_adic_homeo()).evaluate(label_to_name(cantor, "01")).label(3)
        assert abs_p(Fraction(value) - 3, 3) < Fraction(1, 2**3)

    def test_retract_value_lands_in_a(self, cantor):
        A, D, pu = mixture_system()
        value = retract_value(A, D, pu, three_adic_homeo(), label_to_name(cantor, "1"), 3)
        assert A.oracle.contains_point(value)

    def test_retract_value_needs_scheme_homeo(self, cantor):
        A, D, pu = mixture_system()
        with pytest.raises(PreconditionViolation):
            retract_value(A, D, pu, three_adic_homeo().cont, label_to_name(cantor, "1"), 3)


class TestCompactBalls:
    """Finite covers of closed balls"""

    def test_covers(self, cantor):
        K = beta_compact(label_to_name(cantor, "01"), 2)
        first, second = K.covers(2)
        assert first == (cantor.closed_code(Cell(2, "01")),)
        assert len(second) == 2

    def test_larger_balls_count_as_covers(self, cantor):
        K = beta_compact(label_to_name(cantor, "01"), 2)
        assert (cantor.closed_code(Cell(0, "")),) in K.covers(4)

    def test_unbounded_space(self, q3):
        with pytest.raises(UnsupportedSpace):
            beta_compact(label_to_name(q3, 0), 2)


class TestDyadicHomeomorphism:
    """Cantor space onto 2ℤ_2 through natural schemes"""

    @pytest.fixture
    def h(self, cantor):
        z2 = PadicIntegers(2)
        return cantor_scheme_homeo(CantorScheme.natural(cantor, Cell(0, "")), CantorScheme.natural(z2, Cell(1, 0)))

    def test_digits_move_up_one_place(self, cantor, h):
        assert h.evaluate(label_to_name(cantor, "01")).label(4) == 4

    @pytest.mark.parametrize("word", ["0", "1", "011", "101"])
    def test_inverse_undoes_h(self, cantor, h, word):
        back = h.inverse().evaluate(h.evaluate(label_to_name(cantor, word))).label(4)
        assert cantor.dist(back, word) < Fraction(1, 2**4)
