from __future__ import annotations

import itertools
import logging
import threading
import weakref
from collections import defaultdict
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Dict, List, Sequence, Tuple

from .errors import DomainViolation, InvalidIndex
from .names import (
    NO_OUTPUT,
    TICK,
    Name,
    cantor_pair,
    cantor_unpair,
    pair_names,
    tuple_code,
    untuple_code,
)

logger = logging.getLogger(__name__)

PROGRAM_TAG = 0
SPECIALIZED_TAG = 1
NATIVE_TAG = 2


class Op(IntEnum):
    OUT = 0
    READ = 1
    LOADI = 2
    INC = 3
    DEC = 4
    JZ = 5
    JMP = 6
    ADD = 7
    MUL = 8
    PAIR = 9
    UNPAIR = 10
    COPY = 11
    FAIL = 12


Instruction = Tuple[int, int, int, int]
NativeRealizer = Callable[[Name, Name], Name]


@dataclass(frozen=True)
class MachineName:
    """A code interpreted by ``utm_apply`` as a stream transformer."""

    code: Name
    label: str = "machine"


# Register-machine programs
def _normalize(instruction: Sequence[int]) -> Instruction:
    padded = list(instruction) + [0] * (4 - len(instruction))
    return int(padded[0]), int(padded[1]), int(padded[2]), int(padded[3])


def compile_program(instructions: Sequence[Sequence[int]], label: str = "program") -> MachineName:
    words = [PROGRAM_TAG, len(instructions)]
    words += [tuple_code(*_normalize(ins)) for ins in instructions]
    return MachineName(Name.padded(words), label=label)


def decode_program(code: Name) -> List[Instruction]:
    length = code[1]
    return [untuple_code(code[2 + i], 4) for i in range(length)]


def _run_program(program: List[Instruction], q: Name):
    n = 0
    while True:
        regs: Dict[int, int] = defaultdict(int)
        regs[0] = n
        pc = 0
        while True:
            yield TICK
            if pc >= len(program):
                # halted without OUT: no further output, ever
                while True:
                    yield TICK
            op, a, b, c = program[pc]
            pc += 1
            if op == Op.OUT:
                yield regs[a]
                break
            elif op == Op.READ:
                regs[a] = q[regs[b]]
            elif op == Op.LOADI:
                regs[a] = b
            elif op == Op.INC:
                regs[a] += 1
            elif op == Op.DEC:
                regs[a] = max(regs[a] - 1, 0)
            elif op == Op.JZ:
                if regs[a] == 0:
                    pc = b
            elif op == Op.JMP:
                pc = a
            elif op == Op.ADD:
                regs[a] = regs[b] + regs[c]
            elif op == Op.MUL:
                regs[a] = regs[b] * regs[c]
            elif op == Op.PAIR:
                regs[a] = cantor_pair(regs[b], regs[c])
            elif op == Op.UNPAIR:
                regs[a], regs[b] = cantor_unpair(regs[c])
            elif op == Op.COPY:
                regs[a] = regs[b]
            elif op == Op.FAIL:
                raise DomainViolation(f"program failed at output {n}")
            else:
                pc = len(program)
        n += 1


# Host realizers, held only as long as some machine code refers to them
_NATIVES: "weakref.WeakValueDictionary[int, NativeRealizer]" = weakref.WeakValueDictionary()
_IDENTS: "weakref.WeakKeyDictionary[NativeRealizer, int]" = weakref.WeakKeyDictionary()
_next_ident = itertools.count()
_natives_lock = threading.Lock()


def native_ident(fn: NativeRealizer) -> int:
    """The registry key of ``fn``; registering the same realizer twice reuses it."""
    with _natives_lock:
        ident = _IDENTS.get(fn)
        if ident is None:
            ident = next(_next_ident)
            _IDENTS[fn] = ident
            _NATIVES[ident] = fn
        return ident


def registered_natives() -> int:
    return len(_NATIVES)


def register_native(fn: NativeRealizer, params: Name = None, label: str = "native") -> MachineName:
    """Register ``fn(params, q) -> Name`` and return a code for it."""
    ident = native_ident(fn)
    params = params if params is not None else Name.constant(0)

    # _fn holds the realizer while this code exists
    def entry(i, _fn=fn):
        if i == 0:
            return NATIVE_TAG
        if i == 1:
            return ident
        return params[i - 2]

    return MachineName(Name.from_function(entry, label=label), label=label)


def utm_apply(p: MachineName, q: Name) -> Name:
    tag = p.code[0]
    if tag == PROGRAM_TAG:
        program = decode_program(p.code)
        return Name(_run_program(program, q), label=f"utm({p.label})")
    if tag == SPECIALIZED_TAG:
        inner = Name.from_function(lambda i: p.code[1 + 2 * i], label="inner")
        param = Name.from_function(lambda i: p.code[2 + 2 * i], label="param")
        return utm_apply(MachineName(inner, label=p.label), pair_names(param, q))
    if tag == NATIVE_TAG:
        ident = p.code[1]
        if ident not in _NATIVES:
            raise InvalidIndex(f"no native realizer {ident}")
        params = Name.from_function(lambda i: p.code[2 + i], label="params")
        return _NATIVES[ident](params, q)
    raise InvalidIndex(f"unknown machine tag {tag}")


def utm_query(p: MachineName, q: Name, index: int, budget: int):
    """Entry ``index`` of η_p(q), or NO_OUTPUT when ``budget`` steps run out."""
    return utm_apply(p, q).probe(index, budget)


def smn_specialize(f: MachineName, p: Name) -> MachineName:
    def entry(i):
        if i == 0:
            return SPECIALIZED_TAG
        position, parity = divmod(i - 1, 2)
        return f.code[position] if parity == 0 else p[position]

    return MachineName(Name.from_function(entry, label="smn"), label=f"smn({f.label})")


# Stock programs
IDENTITY = compile_program([(Op.READ, 1, 0), (Op.OUT, 1)], label="identity")
SHIFT_P = compile_program(
    [(Op.READ, 1, 0), (Op.JZ, 1, 4), (Op.DEC, 1), (Op.OUT, 1), (Op.FAIL,)], label="shiftP"
)
CONST_ZERO = compile_program([(Op.OUT, 1)], label="zero")
# out_n = in_{2n+1}
PROJECT_SECOND = compile_program(
    [(Op.COPY, 1, 0), (Op.ADD, 1, 1, 1), (Op.INC, 1), (Op.READ, 2, 1), (Op.OUT, 2)],
    label="second",
)
# out_n = in_{2n} + in_{2n+1} - 1
ADD_THEN_SHIFT = compile_program(
    [
        (Op.COPY, 1, 0),
        (Op.ADD, 1, 1, 1),
        (Op.READ, 2, 1),
        (Op.INC, 1),
        (Op.READ, 3, 1),
        (Op.ADD, 4, 2, 3),
        (Op.JZ, 4, 9),
        (Op.DEC, 4),
        (Op.OUT, 4),
        (Op.FAIL,),
    ],
    label="add-shift",
)

__all__ = [
    "ADD_THEN_SHIFT",
    "CONST_ZERO",
    "IDENTITY",
    "MachineName",
    "NO_OUTPUT",
    "Op",
    "PROJECT_SECOND",
    "SHIFT_P",
    "compile_program",
    "register_native",
    "smn_specialize",
    "utm_apply",
    "utm_query",
]
