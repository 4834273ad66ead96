from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Union

from .errors import InvalidIndex, ModulusViolation, UnsupportedSpace
from .names import TICK, Name, cantor_pair, cantor_unpair

logger = logging.getLogger(__name__)

Label = Union[str, int, Fraction]


# ============================================================================
# Rational numberings
# ============================================================================

def zigzag(a: int) -> int:
    return (a + 1) // 2 if a % 2 else -(a // 2)


def unzigzag(z: int) -> int:
    return 2 * z - 1 if z > 0 else -2 * z


def rational_from_index(n: int) -> Fraction:
    """ν_ℚ: every rational appears, ⟨a,b⟩ ↦ z(a)/(b+1)."""
    a, b = cantor_unpair(n)
    return Fraction(zigzag(a), b + 1)


def rational_index(q) -> int:
    q = Fraction(q)
    return cantor_pair(unzigzag(q.numerator), q.denominator - 1)


def positive_rational(n: int) -> Fraction:
    """ν_ℚ₊: ⟨a,b⟩ ↦ (a+1)/(b+1)."""
    a, b = cantor_unpair(n)
    return Fraction(a + 1, b + 1)


def positive_rational_index(q) -> int:
    q = Fraction(q)
    if q <= 0:
        raise InvalidIndex(f"{q} is not a positive rational")
    return cantor_pair(q.numerator - 1, q.denominator - 1)


def parse_rational(text) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidIndex(f"not a rational: {text!r} ({str(e)})")


# ============================================================================
# p-adic valuation on ℚ
# ============================================================================

def valuation(q, p: int) -> Optional[int]:
    """The exponent n with q = p^n·s/t, p ∤ s, p ∤ t; None for q = 0."""
    q = Fraction(q)
    if q == 0:
        return None
    n = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        n += 1
    while den % p == 0:
        den //= p
        n -= 1
    return n


def abs_p(q, p: int) -> Fraction:
    v = valuation(q, p)
    if v is None:
        return Fraction(0)
    return Fraction(1, p**v) if v >= 0 else Fraction(p ** (-v))


# ============================================================================
# Cells: the clopen balls of an ultrametric space
# ============================================================================

@dataclass(frozen=True, order=True)
class Cell:
    """Closed ball of radius ρ^depth, identified by its canonical representative."""

    depth: int
    rep: Label


class SpaceDescriptor:
    kind: str = ""
    prime: Optional[int] = None
    rho: Fraction = Fraction(1, 2)
    compact: bool = True

    @property
    def name(self) -> str:
        return self.kind if self.prime is None else f"{self.kind}:{self.prime}"

    def __repr__(self):
        return f"<Space {self.name}>"

    def __eq__(self, other):
        return isinstance(other, SpaceDescriptor) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    # Ideal points
    def check_index(self, a) -> int:
        if not isinstance(a, int) or isinstance(a, bool) or a < 0:
            raise InvalidIndex(f"{a!r} is not an ideal-point index of {self.name}")
        return a

    def label(self, index: int) -> Label:
        raise NotImplementedError

    def index_of(self, label: Label) -> int:
        raise NotImplementedError

    def base_index(self, index: int) -> int:
        return index

    def parse_center(self, text: str) -> Label:
        raise NotImplementedError

    def format_label(self, label: Label) -> str:
        return str(label)

    def dist(self, x: Label, y: Label) -> Fraction:
        raise NotImplementedError

    def metric_ideal(self, a: int, b: int) -> Fraction:
        return self.dist(self.label(self.check_index(a)), self.label(self.check_index(b)))

    # Cells
    def cell_of(self, label: Label, depth: int) -> Cell:
        raise NotImplementedError

    def children(self, cell: Cell) -> List[Cell]:
        raise NotImplementedError

    def stage_cells(self, stage: int) -> List[Cell]:
        """Cells of depth ``stage``; on compact spaces all of them."""
        raise NotImplementedError

    def top_cells(self) -> List[Cell]:
        if not self.compact:
            raise UnsupportedSpace(f"{self.name} is not covered by finitely many cells")
        return self.stage_cells(0)

    def radius(self, depth: int) -> Fraction:
        return self.rho**depth

    def cell_contains(self, cell: Cell, label: Label) -> bool:
        return self.cell_of(label, cell.depth) == cell

    def cell_subset(self, inner: Cell, outer: Cell) -> bool:
        return inner.depth >= outer.depth and self.cell_of(inner.rep, outer.depth) == outer

    def cells_meet(self, a: Cell, b: Cell) -> bool:
        return self.cell_subset(a, b) or self.cell_subset(b, a)

    def cells_at(self, cell: Cell, depth: int) -> List[Cell]:
        """All sub-cells of ``cell`` at ``depth``."""
        layer = [cell]
        for _ in range(cell.depth, depth):
            layer = [child for parent in layer for child in self.children(parent)]
        return layer

    def depth_below(self, r) -> int:
        """Smallest m with ρ^m < r: the open ball of radius r is a depth-m cell."""
        return self._depth(Fraction(r), strict=True)

    def depth_atmost(self, r) -> int:
        """Smallest m with ρ^m ≤ r: the closed ball of radius r is a depth-m cell."""
        return self._depth(Fraction(r), strict=False)

    def _depth(self, r: Fraction, strict: bool) -> int:
        if r <= 0:
            raise InvalidIndex(f"radius {r} is not positive")

        def inside(m):
            return self.rho**m < r if strict else self.rho**m <= r

        m = 0
        if inside(m):
            while inside(m - 1):
                m -= 1
        else:
            while not inside(m):
                m += 1
        return max(m, 0) if self.compact else m

    def rep_index(self, cell: Cell) -> int:
        return self.index_of(cell.rep)

    # Ball codes
    def ball_code(self, index: int, radius) -> int:
        return cantor_pair(index, positive_rational_index(radius))

    def decode_ball(self, code: int):
        index, rcode = cantor_unpair(code)
        return index, positive_rational(rcode)

    def open_cell(self, code: int) -> Cell:
        index, radius = self.decode_ball(code)
        return self.cell_of(self.label(index), self.depth_below(radius))

    def closed_cell(self, code: int) -> Cell:
        index, radius = self.decode_ball(code)
        return self.cell_of(self.label(index), self.depth_atmost(radius))

    def cell_code(self, cell: Cell) -> int:
        """Canonical open-ball code of a cell (radius ρ^(m-1))."""
        return self.ball_code(self.rep_index(cell), self.rho ** (cell.depth - 1))

    def closed_code(self, cell: Cell) -> int:
        return self.ball_code(self.rep_index(cell), self.rho**cell.depth)

    def cell_distance(self, a: Cell, b: Cell) -> Fraction:
        if self.cells_meet(a, b):
            return Fraction(0)
        return self.dist(a.rep, b.rep)

    def ideal_labels(self) -> Iterator[Label]:
        n = 0
        while True:
            yield self.label(n)
            n += 1


class CantorSpace(SpaceDescriptor):
    kind = "cantor"
    rho = Fraction(1, 2)
    compact = True

    def label(self, index: int) -> str:
        return bin(self.check_index(index) + 1)[3:]

    def index_of(self, label: str) -> int:
        return int("1" + label, 2) - 1

    def parse_center(self, text: str) -> str:
        text = str(text).strip()
        if text in ("", "e", "ε"):
            return ""
        if any(ch not in "01" for ch in text):
            raise InvalidIndex(f"{text!r} is not a binary word")
        return text

    def format_label(self, label: str) -> str:
        return label + "…"

    def dist(self, x: str, y: str) -> Fraction:
        width = max(len(x), len(y))
        x, y = x.ljust(width, "0"), y.ljust(width, "0")
        for i, (a, b) in enumerate(zip(x, y)):
            if a != b:
                return Fraction(1, 2**i)
        return Fraction(0)

    def cell_of(self, label: str, depth: int) -> Cell:
        depth = max(depth, 0)
        return Cell(depth, label.ljust(depth, "0")[:depth])

    def children(self, cell: Cell) -> List[Cell]:
        return [Cell(cell.depth + 1, cell.rep + "0"), Cell(cell.depth + 1, cell.rep + "1")]

    def stage_cells(self, stage: int) -> List[Cell]:
        return self.cells_at(Cell(0, ""), stage)


class PadicIntegers(SpaceDescriptor):
    kind = "zp"
    compact = True

    def __init__(self, p: int):
        self.prime = p
        self.rho = Fraction(1, p)

    def label(self, index: int) -> int:
        return self.check_index(index)

    def index_of(self, label) -> int:
        label = Fraction(label)
        if label.denominator != 1 or label < 0:
            raise InvalidIndex(f"{label} is not an ideal point of {self.name}")
        return int(label)

    def parse_center(self, text: str):
        value = parse_rational(text)
        if valuation(value, self.prime) is not None and valuation(value, self.prime) < 0:
            raise InvalidIndex(f"{text} does not lie in {self.name}")
        return int(value) if value.denominator == 1 and value >= 0 else value

    def dist(self, x, y) -> Fraction:
        return abs_p(Fraction(x) - Fraction(y), self.prime)

    def cell_of(self, label, depth: int) -> Cell:
        depth = max(depth, 0)
        modulus = self.prime**depth
        value = Fraction(label)
        rep = value.numerator * pow(value.denominator, -1, modulus) % modulus if modulus > 1 else 0
        return Cell(depth, rep)

    def children(self, cell: Cell) -> List[Cell]:
        step = self.prime**cell.depth
        return [Cell(cell.depth + 1, cell.rep + c * step) for c in range(self.prime)]

    def stage_cells(self, stage: int) -> List[Cell]:
        return [Cell(stage, r) for r in range(self.prime**stage)]


class PadicField(SpaceDescriptor):
    kind = "qp"
    compact = False

    def __init__(self, p: int):
        self.prime = p
        self.rho = Fraction(1, p)

    def label(self, index: int) -> Fraction:
        return rational_from_index(self.check_index(index))

    def index_of(self, label) -> int:
        return rational_index(label)

    def parse_center(self, text: str) -> Fraction:
        return parse_rational(text)

    def dist(self, x, y) -> Fraction:
        return abs_p(Fraction(x) - Fraction(y), self.prime)

    def cell_of(self, label, depth: int) -> Cell:
        value = Fraction(label)
        v = valuation(value, self.prime)
        if v is None or v >= depth:
            return Cell(depth, Fraction(0))
        unit = value / Fraction(self.prime) ** v
        modulus = self.prime ** (depth - v)
        digits = unit.numerator * pow(unit.denominator, -1, modulus) % modulus
        return Cell(depth, Fraction(digits) * Fraction(self.prime) ** v)

    def children(self, cell: Cell) -> List[Cell]:
        step = Fraction(self.prime) ** cell.depth
        return [Cell(cell.depth + 1, cell.rep + c * step) for c in range(self.prime)]

    def stage_cells(self, stage: int) -> List[Cell]:
        scale = Fraction(1, self.prime**stage)
        return [Cell(stage, k * scale) for k in range(self.prime ** (2 * stage))]


class CylinderSpace(SpaceDescriptor):
    """Same space, with ideal sequence λ⟨k,l⟩ = ν(k)."""

    def __init__(self, base: SpaceDescriptor):
        self.base = base
        self.kind = base.kind
        self.prime = base.prime
        self.rho = base.rho
        self.compact = base.compact

    @property
    def name(self) -> str:
        return f"cyl({self.base.name})"

    def label(self, index: int) -> Label:
        return self.base.label(self.base_index(self.check_index(index)))

    def index_of(self, label: Label) -> int:
        return cantor_pair(self.base.index_of(label), 0)

    def base_index(self, index: int) -> int:
        return cantor_unpair(index)[0]

    def parse_center(self, text: str) -> Label:
        return self.base.parse_center(text)

    def format_label(self, label: Label) -> str:
        return self.base.format_label(label)

    def dist(self, x, y) -> Fraction:
        return self.base.dist(x, y)

    def cell_of(self, label, depth: int) -> Cell:
        return self.base.cell_of(label, depth)

    def children(self, cell: Cell) -> List[Cell]:
        return self.base.children(cell)

    def stage_cells(self, stage: int) -> List[Cell]:
        return self.base.stage_cells(stage)


def space_from_string(text: str) -> SpaceDescriptor:
    """Parse "cantor", "zp:<prime>" or "qp:<prime>"."""
    text = text.strip().lower()
    if text == "cantor":
        return CantorSpace()
    kind, _, prime = text.partition(":")
    if kind in ("zp", "qp") and prime.isdigit():
        p = int(prime)
        if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise UnsupportedSpace(f"{p} is not a prime")
        return PadicIntegers(p) if kind == "zp" else PadicField(p)
    raise UnsupportedSpace(f"unknown space {text!r}")


def metric_ideal(space: SpaceDescriptor, a: int, b: int) -> Fraction:
    return space.metric_ideal(a, b)


def formal_below(space: SpaceDescriptor, c: int, d: int) -> bool:
    """⟨a,r⟩ ⊏ ⟨b,q⟩ iff d(ν(a), ν(b)) + r < q."""
    a, r = space.decode_ball(c)
    b, q = space.decode_ball(d)
    return space.metric_ideal(a, b) + r < q


def cylindrify(space: SpaceDescriptor) -> CylinderSpace:
    return CylinderSpace(space)


# ============================================================================
# Point names
# ============================================================================

@dataclass(frozen=True)
class PointName:
    space: SpaceDescriptor
    stream: Name

    def query(self, k: int) -> int:
        return self.stream[k]

    def label(self, k: int) -> Label:
        return self.space.label(self.stream[k])

    def cell(self, s: int) -> Cell:
        """The open ball B(x_s, 2^-s), which contains the named point."""
        return self.space.cell_of(self.label(s), self.space.depth_below(Fraction(1, 2**s)))

    def check_modulus(self, upto: int) -> None:
        for j in range(upto):
            for i in range(j):
                distance = self.space.dist(self.label(i), self.label(j))
                if distance >= Fraction(1, 2**i):
                    raise ModulusViolation(i, j, distance)


def cauchy_query(p: PointName, k: int) -> int:
    return p.query(k)


def ideal_to_name(space: SpaceDescriptor, a: int) -> PointName:
    space.check_index(a)
    return PointName(space, Name.constant(a))


def label_to_name(space: SpaceDescriptor, label: Label) -> PointName:
    return ideal_to_name(space, space.index_of(label))


def point_from_labels(space: SpaceDescriptor, approximant: Callable[[int], Label]) -> PointName:
    return PointName(
        space, Name.from_function(lambda k: space.index_of(approximant(k)), label="cauchy")
    )


# ============================================================================
# Real names
# ============================================================================

@dataclass(frozen=True)
class RealName:
    """Cauchy name over (ℚ, |·|) in the numbering ν_ℚ."""

    stream: Name

    def approx(self, i: int) -> Fraction:
        return rational_from_index(self.stream[i])

    @classmethod
    def from_approximants(cls, fn: Callable[[int], Fraction]) -> "RealName":
        return cls(Name.from_function(lambda i: rational_index(fn(i)), label="real"))


@dataclass(frozen=True)
class LowerRealName:
    """Enumerates codes+1 of exactly the rationals below the value; 0 pads."""

    stream: Name

    def lower_bound(self, stage: int) -> Optional[Fraction]:
        best = None
        for i in range(stage + 1):
            entry = self.stream[i]
            if entry:
                q = rational_from_index(entry - 1)
                if best is None or q > best:
                    best = q
        return best

    def scaled(self, factor) -> "LowerRealName":
        factor = Fraction(factor)

        def entry(i):
            code = self.stream[i]
            if code == 0:
                return 0
            return rational_index(rational_from_index(code - 1) * factor) + 1

        return LowerRealName(Name.from_function(entry, label="scaled"))

    @classmethod
    def from_bounds(cls, bound: Callable[[int], Optional[Fraction]]) -> "LowerRealName":
        """``bound(s)`` must return a rational below the value, or None while unknown."""

        def generate():
            emitted = set()
            stage = 0
            while True:
                b = bound(stage)
                produced = False
                if b is not None:
                    candidates = [rational_index(b)]
                    candidates += [n for n in range(stage + 1) if rational_from_index(n) < b]
                    for n in candidates:
                        if n not in emitted:
                            emitted.add(n)
                            produced = True
                            yield n + 1
                if not produced:
                    yield 0
                yield TICK
                stage += 1

        return cls(Name(generate(), label="lower"))

    @classmethod
    def constant(cls, value) -> "LowerRealName":
        value = Fraction(value)
        return cls.from_bounds(lambda s: value - Fraction(1, 2**s))
