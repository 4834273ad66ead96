"""
Tests for disjointification, clopen Dugundji systems, retractions and the separation operators
"""

import pytest

from app.clopen import Region
from app.dugundji import verify_dugundji
from app.errors import EmptySet, PreconditionViolation, UnsupportedSpace, WholeSpace
from app.fixtures import closed_fixture
from app.hyperspaces import ClosedName, OpenName, Verdict, closed_set_from_region, whole_space_set
from app.spaces import Cell, SpaceDescriptor, label_to_name
from app.zerodim import (
    apply_reduction,
    covering_decide,
    covering_semidecide,
    decode_opens,
    decompose_V,
    decompose_Vprime,
    dugundji_clopen,
    dugundji_disjoint_Rp,
    encode_N_instance,
    realizer_N,
    reduce_N0_to_N,
    reduce_N0_to_S,
    reduce_N_to_N0,
    require_clopen,
    restrict_system,
    retraction_Ep,
    separate_M,
    tilde_S,
)


def cyl(*words):
    return [Cell(len(w), w) for w in words]


class TestCovering:
    """Deciding ball coverings"""

    def test_covering_decide(self, cantor):
        ball = cantor.closed_code(Cell(1, "0"))
        halves = [cantor.closed_code(c) for c in cyl("00", "01")]
        assert covering_decide(cantor, ball, halves)
        assert not covering_decide(cantor, ball, halves[:1])

    def test_semidecide_reports_unknown(self, cantor):
        ball = cantor.closed_code(Cell(1, "0"))
        assert covering_semidecide(cantor, ball, [ball], 0) == Verdict.UNKNOWN
        assert covering_semidecide(cantor, ball, [ball], 1) == Verdict.YES
        assert covering_semidecide(cantor, ball, [], 5) == Verdict.UNKNOWN

    def test_requires_clopen_basis(self):
        with pytest.raises(UnsupportedSpace):
            require_clopen(SpaceDescriptor())


class TestDisjointification:
    """Making covers pairwise disjoint without losing their union"""

    def test_decompose_v(self, cantor):
        U = OpenName.from_cells(cantor, cyl("0", "1", "01"))
        pieces = decompose_V(U)
        assert pieces[0].region(2) == Region(cantor, cyl("0"))
        assert pieces[1].region(2) == Region(cantor, cyl("1"))
        assert not pieces[2].region(2)

    def test_tilde_s(self, cantor, cantor_opens):
        Ws = tilde_S([cantor_opens("0"), cantor_opens("")])
        assert Ws[0].region(4) == Region(cantor, cyl("0"))
        assert Ws[1].region(4) == Region(cantor, cyl("1"))

    def test_decompose_vprime_flags(self, cantor, cantor_opens):
        pieces, flags = decompose_Vprime([cantor_opens("0"), cantor_opens("")])
        assert flags.prefix(3) == [1, 0, 1]
        assert pieces[2].region(2) == Region(cantor, cyl("1"))


class TestClopenSystems:
    """Coefficient-2 systems with pairwise disjoint members"""

    def test_empty_and_whole_sets(self, cantor):
        with pytest.raises(EmptySet):
            dugundji_clopen(closed_set_from_region(Region.empty(cantor)))
        with pytest.raises(WholeSpace):
            dugundji_clopen(whole_space_set(cantor))

    def test_whole_set_gives_empty_family(self, cantor):
        D = dugundji_clopen(whole_space_set(cantor), allow_whole=True)
        assert D.pieces(20) == []

    @pytest.mark.slow
    def test_clopen_system_passes_audit(self, three_z3):
        D = dugundji_clopen(three_z3)
        assert D.coefficient == 2
        checks = verify_dugundji(D, three_z3, 3)
        assert all(c.passed for c in checks), [c for c in checks if not c.passed]

    def test_pieces_are_disjoint(self, cylinder_zero):
        D = dugundji_clopen(cylinder_zero)
        cells = [cell for _, cell in D.pieces(120)]
        assert cells
        for i, a in enumerate(cells):
            assert not cylinder_zero.oracle.meets(a)
            for b in cells[i + 1:]:
                assert not D.space.cells_meet(a, b)


class TestFiniteRetraction:
    """Retraction of a two-cylinder set onto one of its cylinders"""

    @pytest.fixture
    def setting(self, cantor):
        A = ClosedName.from_region(Region(cantor, cyl("1", "00")))
        B = closed_fixture(cantor, [("00", "1/4")])
        return A, B, retraction_Ep(A, B)

    def test_points_of_b_stay_put(self, cantor, setting):
        _, _, f = setting
        assert f.evaluate(label_to_name(cantor, "001")).label(4) == "001"

    def test_points_off_b_land_in_b(self, cantor, setting):
        _, B, f = setting
        for word in ("1", "101", "11"):
            assert B.oracle.contains_point(f.evaluate(label_to_name(cantor, word)).label(4))

    def test_pieces_stay_inside_the_ambient_set(self, cantor, cylinder_zero):
        A = ClosedName.from_region(Region(cantor, cyl("11")))
        relative = restrict_system(dugundji_clopen(cylinder_zero), A)
        cells = [cell for _, cell in relative.pieces(40)]
        assert cells
        assert all(A.oracle.covers(cell) for cell in cells)
        assert all(A.oracle.covers(cell) for cell in relative.family[0].cells(40))


@pytest.mark.slow
class TestRetraction:
    """The retraction of an ambient closed set onto a closed subset"""

    def test_fixes_points_of_b(self, cantor, cylinder_zero):
        f = retraction_Ep(ClosedName.whole(cantor), cylinder_zero)
        assert f.evaluate(label_to_name(cantor, "01")).label(4) == "01"

    def test_moves_points_into_b(self, cantor, cylinder_zero):
        f = retraction_Ep(ClosedName.whole(cantor), cylinder_zero)
        value = f.evaluate(label_to_name(cantor, "1")).label(3)
        assert cylinder_zero.oracle.contains_point(value)

    def test_b_outside_ambient_is_rejected(self, cantor, cylinder_zero):
        ambient = ClosedName.from_region(Region(cantor, cyl("1")))
        with pytest.raises(PreconditionViolation):
            dugundji_disjoint_Rp(ambient, cylinder_zero)


class TestSeparation:
    """Clopen separation around a point and the reduction witnesses"""

    def test_separate_m(self, cantor, cantor_opens):
        V, W = separate_M(label_to_name(cantor, "01"), cantor_opens("0"))
        assert V.oracle == Region(cantor, cyl("01"))
        assert W.oracle == Region(cantor, cyl("00", "1"))

    def test_separate_m_budget(self, cantor, cantor_opens):
        assert separate_M(label_to_name(cantor, "1"), cantor_opens("0"), budget=5) is None

    def test_witness_kinds(self, cantor):
        assert not reduce_N_to_N0(cantor).strong
        assert reduce_N0_to_N(cantor).strong
        assert reduce_N0_to_S(cantor).target == "S"

    def test_n0_through_n(self, cantor):
        A = ClosedName.from_region(Region(cantor, cyl("00")))
        B = ClosedName.from_region(Region(cantor, cyl("1")))
        Y = ClosedName.whole(cantor)
        answer = apply_reduction(reduce_N0_to_N(cantor), realizer_N(cantor), encode_N_instance(A, B, Y))
        U, V = decode_opens(cantor, answer)
        u, v = U.region(16), V.region(16)
        assert u.covers_region(A.oracle)
        assert v.covers_region(B.oracle)
        assert not u.meets_region(v)
