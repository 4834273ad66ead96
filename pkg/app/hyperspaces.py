from __future__ import annotations

import heapq
import logging
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .clopen import GrowingRegion, Region
from .errors import EmptySet, ToolkitError
from .machines import MachineName, register_native, utm_apply
from .names import NO_OUTPUT, TICK, ZERO, Name, cantor_pair, cantor_unpair, shift_P, tuple_seq, untuple
from .spaces import (
    Cell,
    Label,
    LowerRealName,
    PointName,
    SpaceDescriptor,
    formal_below,
    ideal_to_name,
)

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


def cell_stream(space: SpaceDescriptor, stages: Iterator[Iterable[Cell]], label: str = "open") -> Name:
    """Emit codes+1 of each stage's cells; a stage with no cells emits the padding 0."""

    def generate():
        for batch in stages:
            emitted = False
            for cell in batch:
                emitted = True
                yield space.cell_code(cell) + 1
            if not emitted:
                yield 0
        while True:
            yield 0

    return Name(generate(), label=label)


def _under_emitted(space: SpaceDescriptor, cell: Cell, emitted: set) -> bool:
    low = min((c.depth for c in emitted), default=cell.depth)
    return any(space.cell_of(cell.rep, d) in emitted for d in range(min(low, cell.depth), cell.depth + 1))


# ============================================================================
# Open and closed sets
# ============================================================================

@dataclass(frozen=True)
class OpenName:
    space: SpaceDescriptor
    stream: Name
    oracle: Optional[Region] = None

    def codes(self, upto: int) -> List[int]:
        return [entry - 1 for entry in self.stream.prefix(upto) if entry]

    def cells(self, upto: int) -> List[Cell]:
        return [self.space.open_cell(code) for code in self.codes(upto)]

    def region(self, upto: int) -> Region:
        """The union of the balls among the first ``upto`` entries."""
        return Region(self.space, self.cells(upto))

    @classmethod
    def empty(cls, space: SpaceDescriptor) -> "OpenName":
        return cls(space, ZERO, oracle=Region.empty(space))

    @classmethod
    def whole(cls, space: SpaceDescriptor) -> "OpenName":
        oracle = Region.whole(space) if space.compact else None
        return cls(space, Name.from_function(lambda n: n + 1, label="all-balls"), oracle=oracle)

    @classmethod
    def from_cells(cls, space: SpaceDescriptor, cells: Iterable[Cell]) -> "OpenName":
        cells = sorted(set(cells))
        return cls(
            space,
            Name.padded([space.cell_code(c) + 1 for c in cells]),
            oracle=Region(space, cells),
        )

    @classmethod
    def from_region(cls, region: Region) -> "OpenName":
        return cls.from_cells(region.space, region.cells)

    @classmethod
    def from_stages(cls, space: SpaceDescriptor, stages: Iterator[Iterable[Cell]], label: str = "open") -> "OpenName":
        return cls(space, cell_stream(space, stages, label))


@dataclass(frozen=True)
class ClosedName:
    """A closed set named by an open name of its complement."""

    space: SpaceDescriptor
    complement: OpenName
    oracle: Optional[Region] = None

    @property
    def stream(self) -> Name:
        return self.complement.stream

    def region(self, upto: int) -> Region:
        """Outer approximation from the first ``upto`` complement entries (compact spaces)."""
        return Region.whole(self.space).minus(self.complement.region(upto))

    @classmethod
    def from_region(cls, region: Region) -> "ClosedName":
        space = region.space
        if space.compact:
            complement = OpenName.from_region(region.complement())
        else:
            complement = OpenName(space, cell_stream(space, ([c] for c in region.complement_cells()), "complement"))
        return cls(space, complement, oracle=region)

    @classmethod
    def whole(cls, space: SpaceDescriptor) -> "ClosedName":
        oracle = Region.whole(space) if space.compact else None
        return cls(space, OpenName.empty(space), oracle=oracle)

    @classmethod
    def empty(cls, space: SpaceDescriptor) -> "ClosedName":
        return cls(space, OpenName.whole(space), oracle=Region.empty(space))


@dataclass(frozen=True)
class RangeName:
    space: SpaceDescriptor
    stream: Name

    def is_empty(self) -> bool:
        return self.stream[0] == 0

    def point(self, i: int) -> PointName:
        return PointName(self.space, shift_P(untuple(self.stream, i)))


@dataclass(frozen=True)
class DistName:
    space: SpaceDescriptor
    machine: MachineName

    def lower(self, x: PointName) -> LowerRealName:
        return LowerRealName(utm_apply(self.machine, x.stream))


@dataclass(frozen=True)
class FullClosedName:
    space: SpaceDescriptor
    range: RangeName
    dist: DistName
    oracle: Optional[Region] = None
    whole: bool = False

    def is_empty(self) -> bool:
        return self.range.is_empty()

    def is_whole(self) -> bool:
        if self.whole:
            return True
        return self.oracle is not None and self.space.compact and self.oracle == Region.whole(self.space)


@dataclass(frozen=True)
class CompactName:
    space: SpaceDescriptor
    stream: Name

    def covers(self, upto: int) -> List[Tuple[int, ...]]:
        from .names import seq_decode

        return [seq_decode(self.stream[i]) for i in range(upto)]


@dataclass(frozen=True)
class ContName:
    domain_space: SpaceDescriptor
    target_space: Optional[SpaceDescriptor]
    machine: MachineName
    domain: Optional[Union[ClosedName, OpenName]] = None
    preimage: Optional[Callable[["OpenName"], "OpenName"]] = None

    def evaluate(self, x: PointName) -> PointName:
        return PointName(self.target_space, utm_apply(self.machine, x.stream))


class Family:
    """A lazily built sequence of open names i ↦ U_i."""

    def __init__(self, space: SpaceDescriptor, member: Callable[[int], OpenName], label: str = "family"):
        self.space = space
        self._member = member
        self._memo: Dict[int, OpenName] = {}
        self._lock = threading.RLock()
        self.label = label

    def __getitem__(self, i: int) -> OpenName:
        with self._lock:
            if i not in self._memo:
                self._memo[i] = self._member(i)
            return self._memo[i]

    def __repr__(self):
        return f"<Family {self.label} over {self.space.name}>"

    def name(self) -> Name:
        return tuple_seq(lambda j: self[j].stream)

    def members(self, count: int) -> List[OpenName]:
        return [self[i] for i in range(count)]

    @classmethod
    def finite(cls, space: SpaceDescriptor, opens: Sequence[OpenName], label: str = "family") -> "Family":
        opens = list(opens)
        empty = OpenName.empty(space)
        return cls(space, lambda i: opens[i] if i < len(opens) else empty, label=label)

    @classmethod
    def from_name(cls, space: SpaceDescriptor, q: Name) -> "Family":
        return cls(space, lambda i: OpenName(space, untuple(q, i)))


class CylinderFamily(Family):
    """U_⟨k,l⟩ = B_k: every copy index l shares the member object of ``base``."""

    def __init__(self, base: Family, label: str = "cylinder"):
        super().__init__(base.space, lambda i: base[cantor_unpair(i)[0]], label=label)
        self.base = base


# ============================================================================
# Fixture builders
# ============================================================================

class _RegionPoints:
    """The ideal points of a region, in index order."""

    def __init__(self, region: Region):
        self.region = region
        self._found: List[int] = []
        self._next = 0
        self._lock = threading.Lock()

    def __getitem__(self, i: int) -> int:
        with self._lock:
            while len(self._found) <= i:
                label = self.region.space.label(self._next)
                if self.region.contains_point(label):
                    self._found.append(self._next)
                self._next += 1
            return self._found[i]


def _region_dist_machine(region: Region) -> MachineName:
    space = region.space

    def realize(params: Name, q: Name) -> Name:
        x = PointName(space, q)
        if not region:
            return LowerRealName.from_bounds(lambda s: Fraction(s)).stream

        def bound(s):
            return region.distance(x.label(s)) - Fraction(2, 2**s)

        return LowerRealName.from_bounds(bound).stream

    return register_native(realize, label="fixture-dist")


def closed_set_from_region(region: Region) -> FullClosedName:
    space = region.space
    if not region:
        range_name = RangeName(space, ZERO)
    else:
        points = _RegionPoints(region)
        range_name = RangeName(space, tuple_seq(lambda i: Name.constant(points[i] + 1)))
    return FullClosedName(space, range_name, DistName(space, _region_dist_machine(region)), oracle=region)


def whole_space_set(space: SpaceDescriptor) -> FullClosedName:
    if space.compact:
        return closed_set_from_region(Region.whole(space))

    def realize(params: Name, q: Name) -> Name:
        return LowerRealName.from_bounds(lambda s: -Fraction(1, 2**s)).stream

    range_name = RangeName(space, tuple_seq(lambda i: Name.constant(i + 1)))
    return FullClosedName(space, range_name, DistName(space, register_native(realize)), whole=True)


def fixture_from_balls(space: SpaceDescriptor, balls: Sequence[int], closed: bool = True):
    """Exact names for a finite union of ball codes: closed balls give a FullClosedName,
    open balls an OpenName."""
    if closed:
        return closed_set_from_region(Region(space, [space.closed_cell(code) for code in balls]))
    return OpenName.from_cells(space, [space.open_cell(code) for code in balls])


# ============================================================================
# Operations
# ============================================================================

def open_member(U: OpenName, x: PointName, budget: int) -> Verdict:
    space = U.space
    for s in range(budget):
        probe = space.ball_code(x.query(s), Fraction(1, 2**s))
        for code in U.codes(s + 1):
            if formal_below(space, probe, code):
                return Verdict.YES
    return Verdict.UNKNOWN


def range_point(A: FullClosedName, i: int) -> PointName:
    if A.is_empty():
        raise EmptySet("the range of the empty set has no points")
    return A.range.point(i)


def dist_lower_query(A: FullClosedName, x: PointName, k: int, budget: Optional[int] = None):
    """A rational q < d_A(x) with d_A(x) - q < 2^-k, or NO_OUTPUT once ``budget`` stages pass."""
    if A.is_empty():
        raise EmptySet("d_A is infinite for the empty set")
    space = A.space
    lower = A.dist.lower(x)
    target = Fraction(1, 2**k)
    s = 0
    while budget is None or s < budget:
        q = lower.lower_bound(s)
        if q is not None:
            here = x.label(s)
            upper = min(
                space.dist(here, A.range.point(i).label(s)) + Fraction(2, 2**s) for i in range(s + 1)
            )
            if upper - q < target:
                return q
        s += 1
    logger.debug("no distance bound within 2^-%d after %s stages", k, budget)
    return NO_OUTPUT


def full_to_negative(A: FullClosedName) -> ClosedName:
    space = A.space
    lowers: Dict[Cell, LowerRealName] = {}

    def stages():
        emitted = set()
        s = 0
        while True:
            batch = []
            for cell in space.stage_cells(s):
                if _under_emitted(space, cell, emitted):
                    continue
                if cell not in lowers:
                    lowers[cell] = A.dist.lower(ideal_to_name(space, space.rep_index(cell)))
                q = lowers[cell].lower_bound(s)
                if q is not None and q >= space.radius(cell.depth):
                    emitted.add(cell)
                    batch.append(cell)
            yield batch
            s += 1

    return ClosedName(space, OpenName.from_stages(space, stages(), "negative"), oracle=A.oracle)


Item = Tuple[int, Optional[Cell]]
NO_BUCKET = -1


class Disjointifier:
    """Dovetailed disjointification: each item (bucket, cell) lands in its bucket
    minus everything placed before it.

    ``item(n)`` supplies one item per round, ``batch(r)`` every item of round r.
    A round without items records one empty step owned by ``NO_BUCKET``.
    """

    def __init__(
        self,
        space: SpaceDescriptor,
        item: Optional[Callable[[int], Item]] = None,
        batch: Optional[Callable[[int], Sequence[Item]]] = None,
    ):
        if (item is None) == (batch is None):
            raise ValueError("give exactly one of item and batch")
        self.space = space
        self._batch = batch if batch is not None else (lambda n: [item(n)])
        self._covered = GrowingRegion(space)
        self._steps: List[Tuple[int, List[Cell]]] = []
        self._pieces: List[Tuple[int, Cell]] = []
        self._marks: List[int] = []
        self._lock = threading.RLock()

    @property
    def rounds(self) -> int:
        return len(self._marks)

    def _advance(self) -> None:
        items = list(self._batch(len(self._marks))) or [(NO_BUCKET, None)]
        for bucket, cell in items:
            pieces = self._covered.absorb(cell) if cell is not None else []
            self._steps.append((bucket, pieces))
            self._pieces.extend((bucket, piece) for piece in pieces)
        self._marks.append(len(self._pieces))

    def step(self, n: int) -> Tuple[int, List[Cell]]:
        with self._lock:
            while len(self._steps) <= n:
                self._advance()
            return self._steps[n]

    def run(self, rounds: int) -> None:
        with self._lock:
            while len(self._marks) < rounds:
                self._advance()

    def pieces(self, rounds: int) -> List[Tuple[int, Cell]]:
        """(bucket, cell) pairs placed during the first ``rounds`` rounds."""
        if rounds <= 0:
            return []
        with self._lock:
            self.run(rounds)
            return self._pieces[: self._marks[rounds - 1]]

    def bucket(self, bucket: int, label: str = "piece") -> OpenName:
        def stages():
            n = 0
            while True:
                owner, pieces = self.step(n)
                yield pieces if owner == bucket else []
                n += 1

        return OpenName.from_stages(self.space, stages(), label)


def entry_cell(U: OpenName, k: int) -> Optional[Cell]:
    code = U.stream[k]
    return U.space.open_cell(code - 1) if code else None


def t4_separate(A: ClosedName, B: ClosedName) -> Tuple[OpenName, OpenName]:
    """U from the balls of X∖B, V from those of X∖A, each ball minus earlier ones."""
    not_b, not_a = B.complement, A.complement

    def item(n):
        k, side = divmod(n, 2)
        return (0, entry_cell(not_b, k)) if side == 0 else (1, entry_cell(not_a, k))

    process = Disjointifier(A.space, item)
    return process.bucket(0, "t4-U"), process.bucket(1, "t4-V")


def _cylinder_reorder(Us: CylinderFamily) -> Iterator[int]:
    """Same values as the generic scan, one diagonal n = i + k per round.

    Copy ⟨b,l⟩ is first hit at ⟨⟨b,l⟩, κ_b⟩ where κ_b is the first nonzero entry of B_b,
    so once κ_b is known the copies are queued by that position.
    """
    pending: List[int] = []
    queue: List[Tuple[int, int, int]] = []
    kappa: Dict[int, int] = {}
    next_base = 0
    d = 0
    while True:
        while cantor_pair(next_base, 0) <= d:
            pending.append(next_base)
            next_base += 1
        for b in list(pending):
            k = d - cantor_pair(b, 0)
            if Us.base[b].stream[k] >= 1:
                pending.remove(b)
                kappa[b] = k
                heapq.heappush(queue, (cantor_pair(cantor_pair(b, 0), k), b, 0))
        end = (d + 1) * (d + 2) // 2
        emitted = False
        while queue and queue[0][0] < end:
            _, b, l = heapq.heappop(queue)
            emitted = True
            yield cantor_pair(b, l)
            heapq.heappush(queue, (cantor_pair(cantor_pair(b, l + 1), kappa[b]), b, l + 1))
        if not emitted:
            yield TICK
        d += 1


def sigma_reorder(Us: Family) -> Name:
    if isinstance(Us, CylinderFamily):
        return Name(_cylinder_reorder(Us), label="sigma")

    def generate():
        seen = set()
        n = 0
        while True:
            i, k = cantor_unpair(n)
            if i not in seen and Us[i].stream[k] >= 1:
                seen.add(i)
                yield i
            else:
                yield TICK
            n += 1

    return Name(generate(), label="sigma")


def eval_cont(f: ContName, x: PointName) -> PointName:
    return f.evaluate(x)


def _prefix_length(space: SpaceDescriptor, cell: Cell) -> int:
    """Largest L such that every point of the cell has a name starting with rep^L."""
    radius = space.radius(cell.depth)
    length = 0
    while radius < Fraction(1, 2**length):
        length += 1
    return length


def _prefix_run(f: ContName, cell: Cell) -> Optional[Name]:
    """f's output on the finite name rep(cell)^L shared by every point of the cell."""
    space = f.domain_space
    length = _prefix_length(space, cell)
    if length == 0:
        return None
    return utm_apply(f.machine, Name.from_prefix([space.rep_index(cell)] * length))


def prefix_output(f: ContName, cell: Cell, index: int, budget: int):
    """Output ``index`` of f valid on the whole cell, or NO_OUTPUT when it needs more input."""
    out = _prefix_run(f, cell)
    if out is None:
        return NO_OUTPUT
    try:
        return out.probe(index, budget)
    except ToolkitError:
        return NO_OUTPUT


def _maps_into(f: ContName, cell: Cell, u_codes: List[int], outputs: int, budget: int) -> bool:
    target = f.target_space
    out = _prefix_run(f, cell)
    if out is None:
        return False
    for n in range(outputs):
        try:
            b = out.probe(n, budget)
        except ToolkitError:
            return False
        if b is NO_OUTPUT:
            return False
        probe = target.ball_code(b, Fraction(1, 2**n))
        if any(formal_below(target, probe, u) for u in u_codes):
            return True
    return False


def preimage_open(f: ContName, U: OpenName, budget: int = 256) -> OpenName:
    """Balls C with f(C ∩ dom f) ⊆ U, proved by running the realizer on C's prefix."""
    if f.preimage is not None:
        return f.preimage(U)
    space = f.domain_space

    def stages():
        emitted = set()
        s = 0
        while True:
            batch = []
            u_codes = U.codes(s + 1)
            if u_codes:
                for cell in space.stage_cells(s):
                    if not _under_emitted(space, cell, emitted) and _maps_into(f, cell, u_codes, s + 1, budget):
                        emitted.add(cell)
                        batch.append(cell)
            logger.debug("preimage stage %d: %d balls", s, len(batch))
            yield batch
            s += 1

    return OpenName.from_stages(space, stages(), "preimage")


def preimage_closed(f: ContName, A: ClosedName, budget: int = 256) -> ClosedName:
    return ClosedName(f.domain_space, preimage_open(f, A.complement, budget))


def cover_union(u: ContName, zs: Optional[Callable[[int], PointName]] = None) -> Tuple[OpenName, Family]:
    space = u.domain_space
    points = zs if zs is not None else (lambda i: ideal_to_name(space, i))
    family = Family(space, lambda i: OpenName(space, utm_apply(u.machine, points(i).stream)), label="cover")
    return OpenName(space, family.name()), family


# ============================================================================
# Set algebra
# ============================================================================

def open_union(U: OpenName, V: OpenName) -> OpenName:
    return OpenName(U.space, Name.from_function(lambda i: U.stream[i // 2] if i % 2 == 0 else V.stream[i // 2]))


def open_intersection(U: OpenName, V: OpenName) -> OpenName:
    space = U.space

    def stages():
        s = 0
        while True:
            batch = []
            new_u, new_v = entry_cell(U, s), entry_cell(V, s)
            for k in range(s + 1):
                pairs = []
                if new_u is not None:
                    pairs.append((new_u, entry_cell(V, k)))
                if new_v is not None and k < s:
                    pairs.append((entry_cell(U, k), new_v))
                for a, b in pairs:
                    if a is None or b is None:
                        continue
                    if space.cell_subset(a, b):
                        batch.append(a)
                    elif space.cell_subset(b, a):
                        batch.append(b)
            yield batch
            s += 1

    return OpenName.from_stages(space, stages(), "intersection")


def closed_union(A: ClosedName, B: ClosedName) -> ClosedName:
    return ClosedName(A.space, open_intersection(A.complement, B.complement))


def closed_intersection(A: ClosedName, B: ClosedName) -> ClosedName:
    return ClosedName(A.space, open_union(A.complement, B.complement))


def closed_minus_open(Y: ClosedName, V: OpenName) -> ClosedName:
    """Y ∖ V = Y ∩ (X ∖ V)."""
    return ClosedName(Y.space, open_union(Y.complement, V))


# ============================================================================
# Realizer helpers
# ============================================================================

def point_realizer(
    domain: SpaceDescriptor,
    target: SpaceDescriptor,
    output: Callable[[PointName], Iterator],
    label: str = "realizer",
) -> MachineName:
    """Register a native whose output stream is generated from the input point."""

    def realize(params: Name, q: Name) -> Name:
        return Name(output(PointName(domain, q)), label=label)

    return register_native(realize, label=label)


def identity_cont(space: SpaceDescriptor) -> ContName:
    def output(x: PointName):
        n = 0
        while True:
            yield x.query(n)
            n += 1

    return ContName(space, space, point_realizer(space, space, output, "identity"))


def constant_cont(space: SpaceDescriptor, index: int, target: Optional[SpaceDescriptor] = None) -> ContName:
    target = target or space

    def output(x: PointName):
        while True:
            yield index

    return ContName(space, target, point_realizer(space, target, output, "constant"))


def label_map_cont(space: SpaceDescriptor, fn: Callable[[Label], Label], target: Optional[SpaceDescriptor] = None) -> ContName:
    """Continuous map given on labels by a 1-Lipschitz function."""
    target = target or space

    def output(x: PointName):
        n = 0
        while True:
            yield target.index_of(fn(x.label(n)))
            n += 1

    return ContName(space, target, point_realizer(space, target, output, "label-map"))
