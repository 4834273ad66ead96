from __future__ import annotations

import logging
import threading
from math import isqrt
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import DomainViolation, InvalidIndex, PrefixExhausted, ToolkitError

logger = logging.getLogger(__name__)


class _Tick:
    """Marker a stream generator yields when it spends a step without output."""

    def __repr__(self):
        return "TICK"


class _NoOutput:
    def __repr__(self):
        return "NO_OUTPUT"

    def __bool__(self):
        return False


TICK = _Tick()
NO_OUTPUT = _NoOutput()


# Natural-number pairing
def cantor_pair(j: int, k: int) -> int:
    return (j + k) * (j + k + 1) // 2 + k


def cantor_unpair(n: int) -> Tuple[int, int]:
    w = (isqrt(8 * n + 1) - 1) // 2
    k = n - w * (w + 1) // 2
    return w - k, k


def tuple_code(*values: int) -> int:
    """Right-nested pairing: ⟨a, b, c⟩ = ⟨a, ⟨b, c⟩⟩."""
    if not values:
        raise InvalidIndex("cannot code an empty tuple")
    code = values[-1]
    for value in reversed(values[:-1]):
        code = cantor_pair(value, code)
    return code


def untuple_code(code: int, arity: int) -> Tuple[int, ...]:
    values = []
    for _ in range(arity - 1):
        head, code = cantor_unpair(code)
        values.append(head)
    values.append(code)
    return tuple(values)


# Finite words and finite sets
def seq_code(word: Sequence[int]) -> int:
    if not word:
        return 0
    return 1 + cantor_pair(len(word) - 1, tuple_code(*word))


def seq_decode(code: int) -> Tuple[int, ...]:
    if code == 0:
        return ()
    length, body = cantor_unpair(code - 1)
    return untuple_code(body, length + 1)


def fs_encode(members: Iterable[int]) -> int:
    code = 0
    for member in set(members):
        code |= 1 << member
    return code


def fs_decode(code: int) -> FrozenSet[int]:
    members = set()
    position = 0
    while code:
        if code & 1:
            members.add(position)
        code >>= 1
        position += 1
    return frozenset(members)


class Name:
    """A lazily computed element of Baire space.

    Values come from an iterator that yields naturals, or TICK for a step that
    produced nothing. Produced values are memoized, so a Name behaves like an
    immutable stream no matter how many consumers read it.
    """

    def __init__(self, source: Iterator[Union[int, _Tick]], label: str = "name"):
        self._source = source
        self._values: List[int] = []
        self._failure: Optional[ToolkitError] = None
        self._lock = threading.RLock()
        self.label = label

    def __repr__(self):
        return f"<Name {self.label} known={self.known()}>"

    def known(self) -> int:
        return len(self._values)

    def probe(self, index: int, budget: Optional[int] = None):
        """Return the value at ``index``, or NO_OUTPUT once ``budget`` steps pass.

        Progress made under a budget is kept, so repeated probes resume the search.
        """
        if index < 0:
            raise InvalidIndex(f"negative index {index}")
        with self._lock:
            spent = 0
            while len(self._values) <= index:
                if self._failure is not None:
                    raise self._failure
                try:
                    item = next(self._source)
                except StopIteration:
                    self._failure = DomainViolation(
                        f"{self.label} stopped after {len(self._values)} values"
                    )
                    raise self._failure
                except ToolkitError as exc:
                    self._failure = exc
                    raise
                if item is TICK:
                    spent += 1
                    if budget is not None and spent >= budget:
                        return NO_OUTPUT
                    continue
                self._values.append(item)
            return self._values[index]

    def __getitem__(self, index: int) -> int:
        return self.probe(index)

    def prefix(self, length: int) -> List[int]:
        if length > 0:
            self.probe(length - 1)
        return list(self._values[:length])

    # Constructors
    @classmethod
    def from_generator(cls, factory: Callable[[], Iterator], label: str = "stream") -> "Name":
        return cls(factory(), label=label)

    @classmethod
    def from_function(cls, fn: Callable[[int], int], label: str = "function") -> "Name":
        return IndexedName(fn, label=label)

    @classmethod
    def constant(cls, value: int) -> "Name":
        return IndexedName(lambda _i: value, label=f"const{value}")

    @classmethod
    def padded(cls, values: Sequence[int], fill: int = 0) -> "Name":
        values = list(values)
        return IndexedName(
            lambda i: values[i] if i < len(values) else fill, label=f"padded{len(values)}"
        )

    @classmethod
    def from_prefix(cls, values: Sequence[int]) -> "Name":
        """A name known only up to ``len(values)``; reading further raises PrefixExhausted."""
        values = list(values)

        def lookup(i):
            if i >= len(values):
                raise PrefixExhausted(i, len(values))
            return values[i]

        return IndexedName(lookup, label=f"prefix{len(values)}")


class IndexedName(Name):
    """A Name whose entries are computed independently from their index."""

    def __init__(self, fn: Callable[[int], int], label: str = "function"):
        super().__init__(iter(()), label=label)
        self._fn = fn
        self._memo: Dict[int, int] = {}

    def known(self) -> int:
        return len(self._memo)

    def probe(self, index: int, budget: Optional[int] = None):
        if index < 0:
            raise InvalidIndex(f"negative index {index}")
        with self._lock:
            if index not in self._memo:
                self._memo[index] = self._fn(index)
            return self._memo[index]

    def prefix(self, length: int) -> List[int]:
        return [self.probe(i) for i in range(length)]


NameSequence = Union[Sequence[Name], Callable[[int], Name]]


def _member(ps: NameSequence, j: int) -> Name:
    if callable(ps):
        return ps(j)
    return ps[j] if j < len(ps) else ZERO


ZERO = Name.constant(0)


# Baire-space combinators
def pair_names(p: Name, q: Name) -> Name:
    return Name.from_function(lambda i: p[i // 2] if i % 2 == 0 else q[i // 2], label="pair")


def unpair_names(r: Name) -> Tuple[Name, Name]:
    return (
        Name.from_function(lambda i: r[2 * i], label="left"),
        Name.from_function(lambda i: r[2 * i + 1], label="right"),
    )


def tuple_seq(ps: NameSequence) -> Name:
    def entry(n):
        j, k = cantor_unpair(n)
        return _member(ps, j)[k]

    return Name.from_function(entry, label="tuple")


def untuple(q: Name, j: int) -> Name:
    return Name.from_function(lambda k: q[cantor_pair(j, k)], label=f"untuple{j}")


def shift_P(p: Name) -> Name:
    def entry(i):
        value = p[i]
        if value == 0:
            raise DomainViolation(f"shift_P undefined: entry {i} is 0")
        return value - 1

    return Name.from_function(entry, label="shiftP")
