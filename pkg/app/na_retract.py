from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from .clopen import Region
from .dugundji import DugundjiSystemName
from .errors import DisjointnessViolation, MalformedScheme, PreconditionViolation, UnsupportedSpace
from .fixtures import ball_cell
from .hyperspaces import (
    CompactName,
    ContName,
    Family,
    FullClosedName,
    OpenName,
    point_realizer,
    prefix_output,
    preimage_open,
)
from .names import NO_OUTPUT, TICK, Name, seq_code, seq_decode
from .padic import PadicScalar, add, mul
from .paracompact import Cover, as_family
from .schemas import SchemeSpec
from .spaces import Cell, Label, PadicField, PadicIntegers, PointName, SpaceDescriptor, space_from_string

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]


# ============================================================================
# Partitions of unity
# ============================================================================

@dataclass(frozen=True)
class PartitionOfUnityName:
    """f_i: X → K with |f_i| ≤ 1, supports in V_i and Σ f_i = 1 on Y = ∪V_i."""

    field: PadicField
    member: Callable[[int], ContName]
    support_family: Family
    domain: OpenName
    count: Optional[int] = None
    indicator: Optional[Callable[[int, PointName], bool]] = dataclass_field(default=None, compare=False)

    def value(self, i: int, x: PointName) -> PadicScalar:
        return PadicScalar(self.field, self.member(i).evaluate(x))


def _memo(build: Callable[[int], ContName]) -> Callable[[int], ContName]:
    cache: Dict[int, ContName] = {}
    lock = threading.Lock()

    def member(i: int) -> ContName:
        with lock:
            if i not in cache:
                cache[i] = build(i)
            return cache[i]

    return member


def _check_disjoint(Ws: Family, members: int, entries: int) -> None:
    regions = [Ws[i].region(entries) for i in range(members)]
    for i in range(members):
        for j in range(i + 1, members):
            if regions[i].meets_region(regions[j]):
                raise DisjointnessViolation(f"W_{i} and W_{j} overlap within {entries} entries")


def char_partition(
    Ws: Cover,
    field: PadicField,
    space: Optional[SpaceDescriptor] = None,
    audit_members: int = 0,
    audit_entries: int = 0,
) -> PartitionOfUnityName:
    """Indicators of a pairwise disjoint clopen family: f_i = 1 on W_i and 0 elsewhere on Y."""
    if not isinstance(Ws, Family) and not Ws:
        if space is None:
            raise PreconditionViolation("space", "an empty family needs an explicit space")
        empty = Family.finite(space, [])
        return PartitionOfUnityName(field, lambda i: None, empty, OpenName.empty(space), count=0)
    count = None if isinstance(Ws, Family) else len(Ws)
    family = as_family(space or (Ws.space if isinstance(Ws, Family) else Ws[0].space), Ws)
    space = family.space
    if audit_members:
        _check_disjoint(family, audit_members, audit_entries)
    one, zero = field.index_of(1), field.index_of(0)

    def decide(i: int, x: PointName, s: int) -> Optional[bool]:
        here = x.cell(s)
        owners = range(count) if count is not None else range(s + 1)
        for j in owners:
            if any(space.cell_subset(here, cell) for cell in family[j].cells(s + 1)):
                return j == i
        return None

    def indicator(i: int, x: PointName) -> bool:
        s = 0
        while True:
            verdict = decide(i, x, s)
            if verdict is not None:
                return verdict
            s += 1

    def build(i: int) -> ContName:
        def output(x: PointName):
            s = 0
            while True:
                verdict = decide(i, x, s)
                if verdict is not None:
                    while True:
                        yield one if verdict else zero
                s += 1
                yield TICK

        return ContName(space, field, point_realizer(space, field, output, f"chi{i}"))

    domain = OpenName(space, family.name())
    return PartitionOfUnityName(field, _memo(build), family, domain, count=count, indicator=indicator)


# ============================================================================
# Cantor schemes
# ============================================================================

def _as_word(word) -> Word:
    if isinstance(word, str):
        return tuple(int(c) for c in word)
    return tuple(word)


def _natural_split(space: SpaceDescriptor) -> Callable[[Region], List[Region]]:
    def split(region: Region) -> List[Region]:
        (cell,) = region.cells
        return [Region(space, [child]) for child in space.children(cell)]

    return split


def _balanced_split(space: SpaceDescriptor) -> Callable[[Region], List[Region]]:
    def split(region: Region) -> List[Region]:
        cells = sorted(region.cells)
        if len(cells) == 1:
            cells = space.children(cells[0])
        half = (len(cells) + 1) // 2
        return [Region(space, cells[:half]), Region(space, cells[half:])]

    return split


def _period(branching: int) -> int:
    levels, reach = 1, 2
    while reach < branching:
        reach *= 2
        levels += 1
    return levels


class CantorScheme:
    """A tree of relatively clopen pieces: each piece is partitioned by its children."""

    def __init__(
        self,
        space: SpaceDescriptor,
        root: Region,
        split: Callable[[Region], List[Region]],
        branching: int,
        period: int = 1,
        table: Optional[Dict[Word, Region]] = None,
        label: str = "scheme",
    ):
        self.space = space
        self.root = root
        self.branching = branching
        self.period = period
        self.label = label
        self._split = split
        self._pieces: Dict[Word, Region] = {(): root}
        self._pieces.update(table or {})
        self._lock = threading.RLock()

    def __repr__(self):
        return f"<CantorScheme {self.label} over {self.space.name} branching={self.branching}>"

    @classmethod
    def natural(cls, space: SpaceDescriptor, cell: Cell) -> "CantorScheme":
        branching = len(space.children(cell))
        return cls(space, Region(space, [cell]), _natural_split(space), branching, label="natural")

    @classmethod
    def balanced(cls, space: SpaceDescriptor, root: Union[Cell, Region]) -> "CantorScheme":
        region = root if isinstance(root, Region) else Region(space, [root])
        branching = len(space.children(sorted(region.cells)[0]))
        return cls(space, region, _balanced_split(space), 2, period=_period(branching), label="balanced")

    @classmethod
    def from_spec(cls, spec: SchemeSpec) -> "CantorScheme":
        space = space_from_string(spec.space)
        root = Region(space, [ball_cell(space, spec.root)])
        table = {}
        for word, balls in spec.pieces.items():
            if any(c not in "01" for c in word) or len(word) > spec.depth:
                raise MalformedScheme(f"piece word {word!r} is not a binary word of length ≤ {spec.depth}")
            table[_as_word(word)] = Region(space, [ball_cell(space, ball) for ball in balls])
        missing = [w for w in _words(2, spec.depth) if w and w not in table]
        if missing:
            raise MalformedScheme(f"scheme table lacks piece {''.join(map(str, missing[0]))}")
        if spec.tail == "natural":
            tail = _natural_split(space)
            branching = len(space.children(sorted(root.cells)[0]))
            if branching != 2:
                raise MalformedScheme("a natural tail needs binary children")
        else:
            tail = _balanced_split(space)
        period = _period(len(space.children(sorted(root.cells)[0])))
        return cls(space, root, tail, 2, period=period, table=table, label="table")

    def children(self, word) -> List[Region]:
        word = _as_word(word)
        return [self.piece(word + (c,)) for c in range(self.branching)]

    def piece(self, word) -> Region:
        word = _as_word(word)
        with self._lock:
            if word not in self._pieces:
                parent = self.piece(word[:-1])
                for c, region in enumerate(self._split(parent)):
                    self._pieces.setdefault(word[:-1] + (c,), region)
                if len(self._split(parent)) != self.branching:
                    raise MalformedScheme(f"piece {word[:-1]} splits into the wrong number of children")
            return self._pieces[word]

    def locate(self, label: Label, depth: int) -> Optional[Word]:
        """The word of length ``depth`` whose piece holds the point, None off the root."""
        word: Word = ()
        if not self.root.contains_point(label):
            return None
        for _ in range(depth):
            for c, region in enumerate(self.children(word)):
                if region.contains_point(label):
                    word += (c,)
                    break
            else:
                return None
        return word

    def validate(self, depth: int) -> bool:
        """Children partition their parent, pieces are nonempty, diameters shrink every period."""
        for level in range(depth):
            for word in _words(self.branching, level):
                parent = self.piece(word)
                kids = self.children(word)
                if any(not kid for kid in kids):
                    raise MalformedScheme(f"an empty piece below {word}")
                union = Region(self.space, [c for kid in kids for c in kid.cells])
                if union != parent:
                    raise MalformedScheme(f"children of {word} do not cover their parent")
                for i, a in enumerate(kids):
                    for b in kids[i + 1:]:
                        if a.meets_region(b):
                            raise MalformedScheme(f"children of {word} overlap")
                if len(word) >= self.period:
                    ancestor = self.piece(word[: len(word) - self.period])
                    if parent.diameter() > self.space.rho * ancestor.diameter():
                        raise MalformedScheme(f"piece {word} does not shrink")
        return True


def _words(branching: int, length: int) -> List[Word]:
    words: List[Word] = [()]
    for _ in range(length):
        words = [w + (c,) for w in words for c in range(branching)]
    return words


def _scheme_label(space: SpaceDescriptor, label: Label) -> Optional[Label]:
    """Read a label of another space in the scheme's space, None when it cannot lie there."""
    if isinstance(space, PadicIntegers):
        value = Fraction(label)
        if value.denominator % space.prime == 0:
            return None
        return value
    return label


@dataclass(frozen=True)
class SchemeHomeo:
    """h = f′∘f⁻¹ for two schemes: the point of branch σ in the source goes to branch σ in the target."""

    cont: ContName
    source: CantorScheme
    target: CantorScheme

    def evaluate(self, x: PointName) -> PointName:
        return self.cont.evaluate(x)

    def inverse(self, domain: Optional[SpaceDescriptor] = None) -> "SchemeHomeo":
        return cantor_scheme_homeo(self.target, self.source, domain=domain or self.cont.target_space)


def cantor_scheme_homeo(
    src: CantorScheme,
    tgt: CantorScheme,
    into: Optional[SpaceDescriptor] = None,
    domain: Optional[SpaceDescriptor] = None,
) -> SchemeHomeo:
    if src.branching != tgt.branching:
        raise MalformedScheme(f"branching {src.branching} does not match {tgt.branching}")
    into = into or tgt.space
    domain = domain or src.space

    def output(x: PointName):
        word: Word = ()
        n = s = 0
        while True:
            if tgt.piece(word).diameter() < Fraction(1, 2 ** (n + 1)):
                first = sorted(tgt.piece(word).cells)[0]
                yield into.index_of(first.rep)
                n += 1
                continue
            label = _scheme_label(src.space, x.label(s))
            here = src.space.cell_of(label, domain.depth_below(Fraction(1, 2**s))) if label is not None else None
            step = None
            if here is not None:
                for c, region in enumerate(src.children(word)):
                    if region.covers(here):
                        step = c
                        break
            if step is None:
                s += 1
                yield TICK
            else:
                word += (step,)

    machine = point_realizer(domain, into, output, f"h[{src.label}->{tgt.label}]")
    return SchemeHomeo(ContName(domain, into, machine), src, tgt)


# ============================================================================
# The generalized retraction θ = h∘r
# ============================================================================

class _ThetaState:
    def __init__(self, A: FullClosedName, D: DugundjiSystemName, pu: PartitionOfUnityName, h: ContName, budget: int):
        self.A, self.D, self.pu, self.h = A, D, pu, h
        self.space = D.space
        self.field = pu.field
        self.budget = budget
        self._images: Dict[int, PointName] = {}
        self._lock = threading.Lock()

    def image(self, j: int) -> PointName:
        """h(y_j), shared by every output and preimage stage."""
        with self._lock:
            if j not in self._images:
                self._images[j] = self.h.evaluate(self.D.anchor(j))
            return self._images[j]

    def near_A(self, x: PointName, n: int, s: int):
        """Output n read off h on a ball around x that holds every anchor serving x."""
        space = self.space
        here = x.label(s)
        gap = min(space.dist(here, self.A.range.point(i).label(s)) for i in range(s + 1))
        radius = max(Fraction(1, 2**s), gap) * max(self.D.coefficient, Fraction(1))
        ball = space.cell_of(here, space.depth_atmost(radius))
        return prefix_output(self.h, ball, n + 1, self.budget)

    def anchor_shift(self) -> int:
        """Levels to descend so a cell of A's points also holds every anchor serving it."""
        space, shift = self.space, 1
        while space.radius(0) / space.radius(shift - 1) < self.D.coefficient:
            shift += 1
        return shift

    def witness_inside(self, k: int, u: Cell, s: int) -> bool:
        members = self.D.family.witness.bound(k)
        if not members:
            return self.field.cell_contains(u, Fraction(0))
        return all(self.field.cell_subset(self.image(j).cell(s), u) for j in members)

    def local_sum(self, x: PointName, s: int) -> Optional[PadicScalar]:
        """Σ_{j ∈ r_k} h(y_j)·f_j(x) at a witness ball q_k around x."""
        space = self.space
        witness = self.D.family.witness
        here = x.cell(s)
        for k in range(s + 1):
            code = witness.ball(k)
            if code is None or not space.cell_subset(here, space.open_cell(code)):
                continue
            total = None
            for j in sorted(witness.bound(k)):
                if self.pu.indicator is not None and not self.pu.indicator(j, x):
                    continue
                image = PadicScalar(self.field, self.image(j))
                term = mul(image, self.pu.value(j, x))
                total = term if total is None else add(total, term)
            if total is None:
                return PadicScalar.rational(0, self.field.prime)
            return total
        return None


def theta(
    A: FullClosedName,
    D: DugundjiSystemName,
    pu: PartitionOfUnityName,
    h: Union[ContName, SchemeHomeo],
    budget: int = 4096,
) -> ContName:
    """x ↦ h(x) on A and Σ h(y_i)·f_i(x) off A.

    The preimage of U collects the witness balls whose anchor images share one ball
    of U, and the cells around A inside h's preimage of U.
    """
    h_cont = h.cont if isinstance(h, SchemeHomeo) else h
    state = _ThetaState(A, D, pu, h_cont, budget)
    space = D.space

    def output(x: PointName):
        total = None
        n = s = 0
        while True:
            if total is not None:
                yield total.point.query(n + 1)
                n += 1
                continue
            value = state.near_A(x, n, s)
            if value is not NO_OUTPUT:
                yield value
                n += 1
                continue
            total = state.local_sum(x, s)
            if total is None:
                s += 1
                yield TICK

    def preimage(U: OpenName) -> OpenName:
        # witness balls: θ stays in any ball holding every h(y_j) of the bound
        # near A: h's preimage cells around points of A, shrunk by the anchor shift
        h_preimage = preimage_open(h_cont, U)
        shift = state.anchor_shift()
        witness = D.family.witness

        def stages():
            emitted = set()
            s = 0
            while True:
                batch = []
                u_cells = U.cells(s + 1)
                for k in range(s + 1):
                    code = witness.ball(k)
                    if code is None:
                        continue
                    ball = space.open_cell(code)
                    if ball not in emitted and any(state.witness_inside(k, u, s) for u in u_cells):
                        emitted.add(ball)
                        batch.append(ball)
                for cell in h_preimage.cells(s + 1):
                    depth = cell.depth + shift
                    for i in range(s + 1):
                        z = A.range.point(i)
                        if z.cell(s).depth < depth:
                            continue
                        near = space.cell_of(z.label(s), depth)
                        if near not in emitted and space.cell_subset(near, cell):
                            emitted.add(near)
                            batch.append(near)
                yield batch
                s += 1

        return OpenName.from_stages(space, stages(), "theta-preimage")

    machine = point_realizer(space, pu.field, output, "theta")
    return ContName(space, pu.field, machine, preimage=preimage)


def retract_value(
    A: FullClosedName,
    D: DugundjiSystemName,
    pu: PartitionOfUnityName,
    h: SchemeHomeo,
    x: PointName,
    k: int,
) -> Label:
    """A 2^-k approximation of r(x) = h⁻¹(θ(x)) in A."""
    if not isinstance(h, SchemeHomeo):
        raise PreconditionViolation("scheme-backed h", "retract_value inverts h through its schemes")
    image = theta(A, D, pu, h).evaluate(x)
    back = h.inverse(domain=pu.field).evaluate(image)
    return back.label(k)


# ============================================================================
# Compact closed balls
# ============================================================================

def beta_compact(x: PointName, N: int) -> CompactName:
    """Every finite cover of the closed ball around x of radius 2^-N by closed balls.

    Word t of ball codes is listed when it covers. The uniform sub-ball covers, one
    level deeper each time, are interleaved at t = 0 and at every power of two.
    """
    space = x.space
    if not space.compact:
        raise UnsupportedSpace(f"closed balls of {space.name} are not compact")
    depth = space.depth_atmost(Fraction(1, 2**N))
    s = 0
    while Fraction(1, 2**s) > space.radius(depth):
        s += 1
    ball = space.cell_of(x.label(s), depth)
    target = Region(space, [ball])

    def generate():
        t = 0
        while True:
            if t & (t - 1) == 0:
                level = space.cells_at(ball, depth + t.bit_length())
                yield seq_code([space.closed_code(cell) for cell in level])
            codes = seq_decode(t)
            cells = [space.closed_cell(code) for code in codes]
            if cells and Region(space, cells).covers_region(target):
                yield seq_code(list(codes))
            else:
                yield TICK
            t += 1

    return CompactName(space, Name(generate(), label="beta"))
