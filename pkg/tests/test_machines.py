"""
Tests for the universal machine, native realizers and s-m-n specialization
"""

import gc

import pytest

from app.errors import DomainViolation, InvalidIndex
from app.machines import (
    ADD_THEN_SHIFT,
    CONST_ZERO,
    IDENTITY,
    PROJECT_SECOND,
    SHIFT_P,
    MachineName,
    Op,
    compile_program,
    decode_program,
    register_native,
    registered_natives,
    smn_specialize,
    utm_apply,
    utm_query,
)
from app.names import NO_OUTPUT, Name, pair_names


class TestPrograms:
    """Register-machine programs"""

    def test_identity(self):
        q = Name.padded([4, 9, 1])
        assert utm_apply(IDENTITY, q).prefix(4) == [4, 9, 1, 0]

    def test_shift(self):
        assert utm_apply(SHIFT_P, Name.padded([3, 1, 5])).prefix(3) == [2, 0, 4]

    def test_shift_fails_on_zero(self):
        with pytest.raises(DomainViolation):
            utm_apply(SHIFT_P, Name.constant(0))[0]

    def test_constant_zero(self):
        assert utm_apply(CONST_ZERO, Name.constant(7)).prefix(3) == [0, 0, 0]

    def test_project_second(self):
        p, q = Name.padded([1, 2, 3]), Name.padded([7, 8, 9])
        assert utm_apply(PROJECT_SECOND, pair_names(p, q)).prefix(3) == [7, 8, 9]

    def test_add_then_shift(self):
        p, q = Name.padded([1, 2, 3]), Name.padded([7, 8, 9])
        assert utm_apply(ADD_THEN_SHIFT, pair_names(p, q)).prefix(3) == [7, 9, 11]

    def test_custom_program(self):
        """Test out_n = 2 * in_n"""
        double = compile_program([(Op.READ, 1, 0), (Op.ADD, 1, 1, 1), (Op.OUT, 1)])
        assert utm_apply(double, Name.padded([1, 5, 6])).prefix(3) == [2, 10, 12]

    def test_program_code_decodes(self):
        instructions = decode_program(IDENTITY.code)
        assert instructions == [(int(Op.READ), 1, 0, 0), (int(Op.OUT), 1, 0, 0)]

    def test_halted_program_never_outputs(self):
        """Test a program without OUT is silent, not an error"""
        assert utm_query(compile_program([]), Name.constant(0), 0, budget=50) is NO_OUTPUT

    def test_budget(self):
        assert utm_query(IDENTITY, Name.constant(3), 0, budget=1) is NO_OUTPUT
        assert utm_query(IDENTITY, Name.constant(3), 0, budget=10) == 3

    def test_unknown_tag(self):
        with pytest.raises(InvalidIndex):
            utm_apply(MachineName(Name.constant(9)), Name.constant(0))


class TestNativesAndSmn:
    """Host realizers and specialization"""

    def test_native_realizer(self):
        def add_param(params, q):
            return Name.from_function(lambda i: q[i] + params[0])

        machine = register_native(add_param, params=Name.constant(5))
        assert utm_apply(machine, Name.padded([1, 2])).prefix(2) == [6, 7]

    def test_smn_matches_paired_input(self):
        """Test η_{smn(f, p)}(q) = η_f⟨p, q⟩"""
        p, q = Name.padded([2, 0, 5, 1]), Name.padded([3, 4, 1, 9])
        direct = utm_apply(ADD_THEN_SHIFT, pair_names(p, q)).prefix(4)
        special = utm_apply(smn_specialize(ADD_THEN_SHIFT, p), q).prefix(4)
        assert special == direct == [4, 3, 5, 9]

    def test_same_realizer_keeps_its_code(self):
        def second(params, r):
            return Name.from_function(lambda i: r[2 * i + 1])

        assert register_native(second).code[1] == register_native(second).code[1]

    def test_dropped_realizers_leave_the_registry(self):
        gc.collect()
        before = registered_natives()
        for shift in range(50):
            machine = register_native(lambda params, q, shift=shift: Name.from_function(lambda i: q[i] + shift))
            assert utm_apply(machine, Name.constant(1))[0] == 1 + shift
        del machine
        gc.collect()
        assert registered_natives() <= before

    def test_smn_of_native(self):
        def second(params, r):
            return Name.from_function(lambda i: r[2 * i + 1])

        machine = smn_specialize(register_native(second), Name.constant(0))
        assert utm_apply(machine, Name.padded([8, 6])).prefix(2) == [8, 6]

    def test_nested_smn(self):
        inner = smn_specialize(PROJECT_SECOND, Name.constant(1))
        outer = smn_specialize(inner, Name.constant(2))
        # inner sees ⟨1, ⟨2, q⟩⟩, so its second component is ⟨2, q⟩
        assert utm_apply(outer, Name.padded([5, 6])).prefix(4) == [2, 5, 2, 6]
