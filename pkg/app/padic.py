from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from .errors import InvalidIndex, PreconditionViolation, ToolkitError
from .names import TICK, Name
from .spaces import (
    Cell,
    PadicField,
    PointName,
    RealName,
    abs_p,
    parse_rational,
    valuation,
)

logger = logging.getLogger(__name__)


def abs_p_rational(q, p: int) -> Fraction:
    """|q|_p = p^-n for q = p^n·s/t with p ∤ s, t; 0 for q = 0."""
    return abs_p(q, p)


@dataclass(frozen=True)
class PadicScalar:
    """A point of ℚ_p named by a Cauchy sequence of rationals; ``exact`` is set for ideal points."""

    field: PadicField
    point: PointName
    exact: Optional[Fraction] = None

    @property
    def p(self) -> int:
        return self.field.prime

    def approx(self, k: int) -> Fraction:
        return self.field.label(self.point.query(k))

    def approximants(self, count: int) -> List[Fraction]:
        return [self.approx(k) for k in range(count)]

    @classmethod
    def rational(cls, q, p: int) -> "PadicScalar":
        field = PadicField(p)
        q = Fraction(q)
        return cls(field, PointName(field, Name.constant(field.index_of(q))), exact=q)

    @classmethod
    def from_stream(cls, field: PadicField, generate: Iterator, label: str, exact: Optional[Fraction] = None):
        """Wrap a generator of rational approximants (TICK while searching)."""

        def indices():
            for value in generate:
                yield value if value is TICK else field.index_of(value)

        return cls(field, PointName(field, Name(indices(), label=label)), exact=exact)


def _exact(*values: PadicScalar) -> bool:
    return all(v.exact is not None for v in values)


def _same_field(x: PadicScalar, y: PadicScalar) -> PadicField:
    if x.field != y.field:
        raise PreconditionViolation("same field", f"{x.field.name} and {y.field.name}")
    return x.field


# ============================================================================
# Field operations
# ============================================================================

def add(x: PadicScalar, y: PadicScalar) -> PadicScalar:
    field = _same_field(x, y)
    exact = x.exact + y.exact if _exact(x, y) else None
    if exact is not None:
        return PadicScalar.rational(exact, field.prime)
    point = PointName(field, Name.from_function(lambda k: field.index_of(x.approx(k) + y.approx(k)), label="add"))
    return PadicScalar(field, point)


def neg(x: PadicScalar) -> PadicScalar:
    if x.exact is not None:
        return PadicScalar.rational(-x.exact, x.p)
    field = x.field
    return PadicScalar(field, PointName(field, Name.from_function(lambda k: field.index_of(-x.approx(k)), label="neg")))


def sub(x: PadicScalar, y: PadicScalar) -> PadicScalar:
    return add(x, neg(y))


def _smallest(condition) -> int:
    k = 0
    while not condition(k):
        k += 1
    return k


def mul(x: PadicScalar, y: PadicScalar) -> PadicScalar:
    """Stage i picks l with U_x·2^-l < 2^-i and k with (U_y + 2^-l)·2^-k < 2^-i."""
    field = _same_field(x, y)
    if _exact(x, y):
        return PadicScalar.rational(x.exact * y.exact, field.prime)
    p = field.prime
    upper_x = abs_p(x.approx(0), p) + 1
    upper_y = abs_p(y.approx(0), p) + 1

    def approximant(i: int) -> int:
        eps = Fraction(1, 2**i)
        l = _smallest(lambda l: upper_x / 2**l < eps)
        k = _smallest(lambda k: (upper_y + Fraction(1, 2**l)) / 2**k < eps)
        return field.index_of(x.approx(k) * y.approx(l))

    return PadicScalar(field, PointName(field, Name.from_function(approximant, label="mul")))


def inv(x: PadicScalar, lower: Optional[Fraction] = None) -> PadicScalar:
    """1/x; ticks until some |x_m| > 2^-m shows x ≠ 0, forever when x = 0.

    ``lower`` is an optional positive bound |x| ≥ lower that shortens the search.
    """
    field = x.field
    p = field.prime
    if x.exact is not None:
        if x.exact == 0:
            raise PreconditionViolation("x ≠ 0", "inverse of the exact zero")
        return PadicScalar.rational(1 / x.exact, p)
    start = 0
    if lower is not None:
        lower = Fraction(lower)
        if lower <= 0:
            raise PreconditionViolation("lower bound", f"{lower} is not positive")
        start = _smallest(lambda m: Fraction(1, 2**m) < lower)

    def generate():
        m = start
        while abs_p(x.approx(m), p) <= Fraction(1, 2**m):
            m += 1
            yield TICK
        size = abs_p(x.approx(m), p)
        logger.debug("inv: |x| = %s certified at stage %d", size, m)
        i = 0
        while True:
            eps = Fraction(1, 2**i)
            k = max(m, _smallest(lambda k: Fraction(1, 2**k) < eps * size * size))
            yield 1 / x.approx(k)
            i += 1

    return PadicScalar.from_stream(field, generate(), "inv")


def abs_val(x: PadicScalar) -> RealName:
    """RealName with stage-i rational |x_i|_p."""
    return RealName.from_approximants(lambda i: abs_p(x.approx(i), x.p))


def iota_nat(n: int, p: int) -> PadicScalar:
    """0 ↦ 0_K, n+1 ↦ ι(n) + 1_K."""
    if n < 0:
        raise InvalidIndex(f"{n} is not a natural number")
    one = PadicScalar.rational(1, p)
    value = PadicScalar.rational(0, p)
    for _ in range(n):
        value = add(value, one)
    return value


# ============================================================================
# Ultrametric segments and convexity
# ============================================================================

@dataclass(frozen=True)
class UltraSegment:
    """[x, y] = the closed ball around y of radius |x - y|_p."""

    field: PadicField
    center: Fraction
    radius: Optional[Fraction]
    bracket: Tuple[Fraction, Fraction]
    cell: Optional[Cell] = None

    @property
    def code(self) -> Optional[int]:
        """Closed-ball code; None for the singleton [x, x]."""
        if self.cell is None:
            return None
        return self.field.closed_code(self.cell)

    def contains(self, z) -> bool:
        if self.radius is None:
            raise PreconditionViolation("exact radius", "membership needs ideal endpoints")
        z = Fraction(z)
        if self.radius == 0:
            return z == self.center
        return self.field.dist(z, self.center) <= self.radius


def segment(x: PadicScalar, y: PadicScalar, k: int) -> UltraSegment:
    field = _same_field(x, y)
    p = field.prime
    if _exact(x, y):
        radius = abs_p(x.exact - y.exact, p)
        cell = None
        if radius:
            cell = field.cell_of(y.exact, valuation(x.exact - y.exact, p))
        return UltraSegment(field, y.exact, radius, (radius, radius), cell)
    gap = abs_p(x.approx(k) - y.approx(k), p)
    slack = Fraction(2, 2**k)
    return UltraSegment(field, y.approx(k), None, (max(Fraction(0), gap - slack), gap + slack))


def convex_combination(lam: PadicScalar, x: PadicScalar, y: PadicScalar) -> PadicScalar:
    """λx + (1 - λ)y."""
    one = PadicScalar.rational(1, lam.p)
    return add(mul(lam, x), mul(sub(one, lam), y))


def solve_lambda(z, x, y, p: int) -> Optional[Fraction]:
    """λ with z = λx + (1 - λ)y, None when x = y."""
    z, x, y = Fraction(z), Fraction(x), Fraction(y)
    if x == y:
        return None
    return (z - y) / (x - y)


def in_segment(z, x, y, p: int) -> bool:
    """Decide z ∈ [x, y] for rationals, cross-checked against |λ|_p ≤ 1."""
    z, x, y = Fraction(z), Fraction(x), Fraction(y)
    if x == y:
        return z == x
    direct = abs_p(z - y, p) <= abs_p(x - y, p)
    lam = solve_lambda(z, x, y, p)
    if (abs_p(lam, p) <= 1) != direct:
        raise ToolkitError(f"segment test and solve-back disagree for z={z}, x={x}, y={y}")
    return direct


def _ball_region(field: PadicField, code: int, closed: bool) -> Cell:
    return field.closed_cell(code) if closed else field.open_cell(code)


def cvx_n_check(field: PadicField, code: int, ws: Sequence, alphas: Sequence, closed: bool = True) -> bool:
    """Σ α_i w_i ∈ C for a ball C, given |α_i| ≤ 1, Σ α_i = 1 and every w_i ∈ C."""
    p = field.prime
    ws = [Fraction(w) for w in ws]
    alphas = [Fraction(a) for a in alphas]
    if len(ws) != len(alphas) or not ws:
        raise PreconditionViolation("shape", "ws and alphas need the same nonzero length")
    bad = [a for a in alphas if abs_p(a, p) > 1]
    if bad:
        raise PreconditionViolation("|alpha| <= 1", f"|{bad[0]}|_{p} > 1")
    if sum(alphas) != 1:
        raise PreconditionViolation("sum alpha = 1", f"sum is {sum(alphas)}")
    ball = _ball_region(field, code, closed)
    outside = [w for w in ws if not field.cell_contains(ball, w)]
    if outside:
        raise PreconditionViolation("w in C", f"{outside[0]} lies outside the ball")
    return field.cell_contains(ball, sum(a * w for a, w in zip(alphas, ws)))


# ============================================================================
# Expression evaluator
# ============================================================================

@dataclass(frozen=True)
class RealValue:
    """Result of abs(...): a real, not a field element."""

    name: RealName
    exact: Optional[Fraction] = None


Value = Union[PadicScalar, RealValue]

_TOKEN = re.compile(r"\s*(?:(\d+)|(inv|abs)|(.))")


def _tokenize(text: str) -> List[Tuple[str, str]]:
    tokens = []
    for number, word, symbol in _TOKEN.findall(text):
        if number:
            tokens.append(("num", number))
        elif word:
            tokens.append(("fn", word))
        elif symbol.strip():
            if symbol not in "+-*/()":
                raise InvalidIndex(f"unexpected character {symbol!r} in {text!r}")
            tokens.append(("op", symbol))
    return tokens


class ExpressionParser:
    """Recursive descent over + - * (unary -), rationals a/b, inv(), abs(), parentheses."""

    def __init__(self, text: str, p: int):
        self.text = text
        self.p = p
        self.tokens = _tokenize(text)
        self.pos = 0

    def parse(self) -> Value:
        if not self.tokens:
            raise InvalidIndex("empty expression")
        value = self._expr()
        if self.pos != len(self.tokens):
            raise InvalidIndex(f"trailing input in {self.text!r}")
        return value

    def _peek(self) -> Optional[Tuple[str, str]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _take(self, kind: str, text: Optional[str] = None) -> str:
        token = self._peek()
        if token is None or token[0] != kind or (text is not None and token[1] != text):
            raise InvalidIndex(f"expected {text or kind} at token {self.pos} of {self.text!r}")
        self.pos += 1
        return token[1]

    def _expr(self) -> Value:
        value = self._term()
        while self._peek() in (("op", "+"), ("op", "-")):
            op = self._take("op")
            right = self._term()
            value = add(_field(value), _field(right)) if op == "+" else sub(_field(value), _field(right))
        return value

    def _term(self) -> Value:
        value = self._unary()
        while self._peek() == ("op", "*"):
            self._take("op")
            value = mul(_field(value), _field(self._unary()))
        return value

    def _unary(self) -> Value:
        if self._peek() == ("op", "-"):
            self._take("op")
            return neg(_field(self._unary()))
        return self._atom()

    def _atom(self) -> Value:
        token = self._peek()
        if token is None:
            raise InvalidIndex(f"unexpected end of {self.text!r}")
        if token[0] == "num":
            numerator = self._take("num")
            if self._peek() == ("op", "/"):
                self._take("op")
                return PadicScalar.rational(parse_rational(f"{numerator}/{self._take('num')}"), self.p)
            return PadicScalar.rational(int(numerator), self.p)
        if token[0] == "fn":
            fn = self._take("fn")
            self._take("op", "(")
            inner = _field(self._expr())
            self._take("op", ")")
            if fn == "inv":
                return inv(inner)
            exact = abs_p(inner.exact, self.p) if inner.exact is not None else None
            return RealValue(abs_val(inner), exact)
        self._take("op", "(")
        value = self._expr()
        self._take("op", ")")
        return value


def _field(value: Value) -> PadicScalar:
    if isinstance(value, RealValue):
        raise InvalidIndex("abs(...) is a real number; no field arithmetic on it")
    return value


def evaluate_expression(text: str, p: int) -> Value:
    return ExpressionParser(text, p).parse()


