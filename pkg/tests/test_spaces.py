"""
Tests for ideal-point numberings, cells and point names
"""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.errors import InvalidIndex, ModulusViolation, UnsupportedSpace
from app.names import cantor_pair
from app.spaces import (
    CantorSpace,
    Cell,
    CylinderSpace,
    LowerRealName,
    PadicField,
    PadicIntegers,
    abs_p,
    formal_below,
    label_to_name,
    point_from_labels,
    positive_rational,
    positive_rational_index,
    rational_from_index,
    rational_index,
    space_from_string,
    valuation,
)

rationals = st.fractions(min_value=-1000, max_value=1000, max_denominator=500)


class TestNumberings:
    """Rational numberings and the p-adic valuation"""

    @given(rationals)
    def test_rational_index_inverts(self, q):
        assert rational_from_index(rational_index(q)) == q

    @given(st.integers(1, 300), st.integers(1, 300))
    def test_positive_rational_index_inverts(self, a, b):
        q = Fraction(a, b)
        assert positive_rational(positive_rational_index(q)) == q

    def test_positive_rational_rejects_zero(self):
        with pytest.raises(InvalidIndex):
            positive_rational_index(0)

    def test_valuation_examples(self):
        assert valuation(12, 3) == 1
        assert valuation(Fraction(5, 18), 3) == -2
        assert valuation(0, 3) is None
        assert abs_p(Fraction(5, 18), 3) == 9
        assert abs_p(27, 3) == Fraction(1, 27)

    @given(rationals, rationals)
    def test_strong_triangle(self, x, y):
        assert abs_p(x + y, 3) <= max(abs_p(x, 3), abs_p(y, 3))


class TestCantorSpace:
    """Binary words padded with zeros"""

    def test_labels(self, cantor):
        assert [cantor.label(n) for n in range(5)] == ["", "0", "1", "00", "01"]
        assert cantor.index_of("01") == 4

    def test_distance(self, cantor):
        assert cantor.dist("0", "1") == 1
        assert cantor.dist("0", "01") == Fraction(1, 2)
        assert cantor.dist("", "000") == 0

    def test_cells(self, cantor):
        assert cantor.cell_of("1", 3) == Cell(3, "100")
        assert cantor.children(Cell(1, "0")) == [Cell(2, "00"), Cell(2, "01")]
        assert len(cantor.stage_cells(3)) == 8

    def test_depths(self, cantor):
        """Test open radii are strict and closed radii are not"""
        assert cantor.depth_below(1) == 1
        assert cantor.depth_atmost(1) == 0
        assert cantor.depth_atmost(Fraction(1, 4)) == 2
        assert cantor.depth_below(Fraction(1, 4)) == 3

    def test_bad_center(self, cantor):
        with pytest.raises(InvalidIndex):
            cantor.parse_center("012")


class TestPadicSpaces:
    """ℤ_p and ℚ_p"""

    def test_integer_cells(self, z3):
        assert z3.cell_of(5, 2) == Cell(2, 5)
        assert z3.cell_of(Fraction(1, 2), 1) == Cell(1, 2)
        assert z3.children(Cell(1, 2)) == [Cell(2, 2), Cell(2, 5), Cell(2, 8)]

    def test_integers_reject_fractions_of_p(self, z3):
        with pytest.raises(InvalidIndex):
            z3.parse_center("1/3")

    def test_field_cells_have_negative_depth(self, q3):
        assert q3.cell_of(Fraction(1, 3), -1) == Cell(-1, Fraction(0))
        assert q3.cell_of(Fraction(1, 3), 0) == Cell(0, Fraction(1, 3))
        assert q3.depth_atmost(9) == -2

    def test_field_is_not_compact(self, q3):
        with pytest.raises(UnsupportedSpace):
            q3.top_cells()

    @pytest.mark.parametrize("cell", [Cell(0, 0), Cell(2, 5), Cell(3, 17)])
    def test_ball_codes_name_their_cell(self, z3, cell):
        assert z3.open_cell(z3.cell_code(cell)) == cell
        assert z3.closed_cell(z3.closed_code(cell)) == cell

    def test_field_ball_codes(self, q3):
        cell = Cell(-1, Fraction(0))
        assert q3.open_cell(q3.cell_code(cell)) == cell

    def test_formal_inclusion(self, z3):
        inner = z3.ball_code(z3.index_of(9), Fraction(1, 27))
        outer = z3.ball_code(z3.index_of(0), Fraction(1, 3))
        assert formal_below(z3, inner, outer)
        assert not formal_below(z3, outer, inner)


class TestSpaceParsing:
    """space_from_string"""

    def test_known_spaces(self):
        assert isinstance(space_from_string("cantor"), CantorSpace)
        assert space_from_string("zp:5") == PadicIntegers(5)
        assert isinstance(space_from_string("QP:3"), PadicField)

    @pytest.mark.parametrize("text", ["zp:4", "zp:1", "reals", "qp:"])
    def test_unsupported(self, text):
        with pytest.raises(UnsupportedSpace):
            space_from_string(text)

    def test_cylinder_space(self, cantor):
        cyl = CylinderSpace(cantor)
        assert cyl.name == "cyl(cantor)"
        assert cyl.label(cantor_pair(3, 7)) == "00"
        assert cyl.base_index(cyl.index_of("00")) == 3


class TestPointNames:
    """Cauchy names and their cells"""

    def test_ideal_point_cell(self, cantor):
        x = label_to_name(cantor, "01")
        assert x.cell(2) == Cell(3, "010")

    def test_modulus_violation(self, cantor):
        x = point_from_labels(cantor, lambda k: "0" * k + "1")
        with pytest.raises(ModulusViolation):
            x.check_modulus(4)

    def test_fast_cauchy_name_passes(self, z3):
        x = point_from_labels(z3, lambda k: sum(3**i for i in range(0, k + 1, 2)))
        x.check_modulus(6)

    def test_lower_real(self):
        lower = LowerRealName.constant(Fraction(1, 2))
        bound = lower.lower_bound(12)
        assert bound is not None and bound < Fraction(1, 2)
