from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from .clopen import GrowingRegion, Region
from .hyperspaces import ClosedName, Family, OpenName, cell_stream
from .names import TICK, Name, fs_decode, fs_encode, pair_names
from .spaces import Cell, SpaceDescriptor

logger = logging.getLogger(__name__)

Cover = Union[Family, Sequence[OpenName]]


def as_family(space: SpaceDescriptor, Us: Cover) -> Family:
    if isinstance(Us, Family):
        return Us
    return Family.finite(space, list(Us))


@dataclass(frozen=True)
class Triple:
    """One hit (a, b, e) of the search: α̂(a) ⊆ α(b) ⊆ α̂(b) ⊆ U_e.

    With canonical codes α(a) = ``cell``, α̂(a) = α(b) = ``parent`` and
    α̂(b) = ``ball``, the ball of U_e the triple was read from.
    """

    index: int
    step: int
    a: int
    b: int
    e: int
    cell: Cell
    parent: Cell
    ball: Cell
    v_cells: Tuple[Cell, ...]
    a_cells: Tuple[Cell, ...]


class TripleSearch:
    """Dovetailed scan of (i, k): the k-th ball of U_i, split into its grandchildren.

    Step n reads every pair with i + k = n. A member that is the same object as an
    earlier member is skipped, since it contributes no new balls.
    """

    def __init__(self, space: SpaceDescriptor, Us: Cover):
        self.space = space
        self.Us = as_family(space, Us)
        self._triples: List[Triple] = []
        self._by_step: Dict[int, List[Triple]] = {}
        self._members: List[Tuple[int, OpenName]] = []
        self._member_ids: Set[int] = set()
        self._closed_a = GrowingRegion(space)
        self._seen = GrowingRegion(space)
        self._steps = 0
        self._lock = threading.RLock()

    def __repr__(self):
        return f"<TripleSearch steps={self._steps} triples={len(self._triples)}>"

    @property
    def steps(self) -> int:
        return self._steps

    def _admit(self, i: int) -> None:
        member = self.Us[i]
        if id(member) not in self._member_ids:
            self._member_ids.add(id(member))
            self._members.append((i, member))

    def _step(self):
        n = self._steps
        self._admit(n)
        found: List[Triple] = []
        for i, member in self._members:
            code = member.stream[n - i]
            if code:
                found.extend(self._split(n, i, self.space.open_cell(code - 1)))
        self._by_step[n] = found
        self._steps += 1

    def _split(self, n: int, i: int, ball: Cell) -> List[Triple]:
        space = self.space
        found = []
        for parent in space.children(ball):
            for cell in space.children(parent):
                a_cells = tuple(self._seen.subtract_from(ball))
                v_cells = tuple(self._closed_a.absorb(parent))
                triple = Triple(
                    index=len(self._triples),
                    step=n,
                    a=space.cell_code(cell),
                    b=space.cell_code(parent),
                    e=i,
                    cell=cell,
                    parent=parent,
                    ball=ball,
                    v_cells=v_cells,
                    a_cells=a_cells,
                )
                self._triples.append(triple)
                self._seen.absorb(cell)
                found.append(triple)
        logger.debug("step %d: ball %s of member %d gives %d triples", n, ball, i, len(found))
        return found

    def run(self, steps: int) -> None:
        with self._lock:
            while self._steps < steps:
                self._step()

    def triple(self, j: int, budget: Optional[int] = None) -> Optional[Triple]:
        """The j-th triple, or None if ``budget`` further steps do not find it."""
        with self._lock:
            spent = 0
            while len(self._triples) <= j:
                if budget is not None and spent >= budget:
                    return None
                self._step()
                spent += 1
            return self._triples[j]

    def found_at(self, step: int) -> List[Triple]:
        self.run(step + 1)
        with self._lock:
            return list(self._by_step[step])

    def triples(self, steps: Optional[int] = None) -> List[Triple]:
        if steps is not None:
            self.run(steps)
        with self._lock:
            return list(self._triples)

    def covered(self) -> Region:
        """Union of the α(a) found so far."""
        with self._lock:
            return self._seen.frozen()

    def run_until_covers(self, region: Region, limit: int) -> bool:
        """Advance until the α(a) cover ``region``; False when ``limit`` steps pass first."""
        with self._lock:
            while not self._seen.covers_region(region):
                if self._steps >= limit:
                    return False
                self._step()
            return True

    # Streams
    def stages(self, cells_of: Callable[[Triple], Sequence[Cell]]) -> Iterator[List[Cell]]:
        step = 0
        while True:
            batch: List[Cell] = []
            for t in self.found_at(step):
                batch.extend(cells_of(t))
            yield batch
            step += 1

    def waiting(self, value_of: Callable[[Triple], int]) -> Name:
        """Stream whose j-th entry is ``value_of(triple j)``, ticking while it is searched for."""

        def generate():
            j = 0
            while True:
                while True:
                    t = self.triple(j, budget=1)
                    if t is not None:
                        break
                    yield TICK
                yield value_of(t)
                j += 1

        return Name(generate(), label="triples")


@dataclass(frozen=True)
class LFWitness:
    cover_balls: Name
    finite_bounds: Name
    shifted: bool = False

    def ball(self, i: int) -> Optional[int]:
        """Code of the i-th witness ball, None for the empty ball of the shifted numbering."""
        code = self.cover_balls[i]
        if self.shifted:
            return code - 1 if code else None
        return code

    def bound(self, i: int):
        return fs_decode(self.finite_bounds[i])


@dataclass(frozen=True)
class LFFamilyName:
    members: Family
    witness: LFWitness
    exact_cover: bool = True
    kind: str = "open"
    search: Optional[TripleSearch] = field(default=None, compare=False)

    @property
    def space(self) -> SpaceDescriptor:
        return self.members.space

    def name(self) -> Name:
        return pair_names(self.members.name(), pair_names(self.witness.cover_balls, self.witness.finite_bounds))


def finite_lf_family(space: SpaceDescriptor, regions: Sequence[Region]) -> LFFamilyName:
    """Exact witnesses for a finite family of clopen regions: one witness ball per member cell."""
    opens = [OpenName.from_region(region) for region in regions]
    balls, bounds = [], []
    for region in regions:
        for cell in sorted(region.cells):
            meeting = [j for j, other in enumerate(regions) if other.meets(cell)]
            balls.append(space.cell_code(cell) + 1)
            bounds.append(fs_encode(meeting))
    witness = LFWitness(Name.padded(balls), Name.padded(bounds), shifted=True)
    return LFFamilyName(Family.finite(space, opens, label="finite"), witness)


def _once_found(search: TripleSearch, j: int) -> Iterator[Triple]:
    """Yield None for every search step before triple j exists, then the triple."""
    step = 0
    while True:
        search.run(step + 1)
        t = search.triple(j, budget=0)
        if t is not None and t.step <= step:
            yield t
            return
        yield None
        step += 1


def _closed_member(search: TripleSearch, j: int) -> ClosedName:
    # until triple j shows up the complement stream is silent
    space = search.space

    def stages():
        for t in _once_found(search, j):
            if t is None:
                yield []
                continue
            region = Region(space, t.a_cells)
            if space.compact:
                yield sorted(region.complement().cells)
            else:
                for cell in region.complement_cells():
                    yield [cell]

    return ClosedName(space, OpenName(space, cell_stream(space, stages(), f"A{j}-complement")))


def _open_member(search: TripleSearch, j: int) -> OpenName:
    def stages():
        for t in _once_found(search, j):
            yield list(t.v_cells) if t is not None else []

    return OpenName.from_stages(search.space, stages(), f"V{j}")


def lf_refine_L(Us: Cover, space: Optional[SpaceDescriptor] = None) -> Tuple[Family, LFFamilyName, Name]:
    """V_j = α(b_j) ∖ ∪_{i<j} α̂(a_i) and A_j = α̂(b_j) ∖ ∪_{i<j} α(a_i) with V_j ⊆ A_j ⊆ U_{e_j}.

    Balls are clopen, so α̂(a_i) is its own closure.
    """
    space = space or _space_of(Us)
    search = TripleSearch(space, Us)
    Vs = Family(space, lambda j: _open_member(search, j), label="refine-V")
    As = Family(space, lambda j: _closed_member(search, j), label="refine-A")
    witness = LFWitness(
        cover_balls=search.waiting(lambda t: t.a),
        finite_bounds=search.waiting(lambda t: fs_encode(range(t.index + 1))),
    )
    e = search.waiting(lambda t: t.e)
    return Vs, LFFamilyName(As, witness, exact_cover=True, kind="closed", search=search), e


def _space_of(Us: Cover) -> SpaceDescriptor:
    if isinstance(Us, Family):
        return Us.space
    if not Us:
        raise ValueError("an empty cover list needs an explicit space")
    return Us[0].space


class ShrinkState:
    """Running data shared by the L″ and L′ outputs."""

    def __init__(self, search: TripleSearch):
        self.search = search
        self._indices: List[set] = []

    def indices_upto(self, k: int) -> set:
        while len(self._indices) <= k:
            t = self.search.triple(len(self._indices))
            previous = self._indices[-1] if self._indices else set()
            self._indices.append(previous | {t.e})
        return self._indices[k]

    def w_cells(self, m: int, t: Triple) -> List[Cell]:
        """t's cell minus every A_j (j ≤ t.index) sent to m."""
        space = self.search.space
        closed = [
            cell
            for other in self.search.triples()[: t.index + 1]
            if other.e == m
            for cell in other.a_cells
        ]
        return Region(space, closed).subtract_from(t.cell)


def _shrink(Us: Cover, space: Optional[SpaceDescriptor]) -> Tuple[ShrinkState, Family, Family]:
    space = space or _space_of(Us)
    state = ShrinkState(TripleSearch(space, Us))
    search = state.search
    Vs = Family(
        space,
        lambda m: OpenName.from_stages(space, search.stages(lambda t: t.v_cells if t.e == m else ()), f"V''{m}"),
        label="shrink-V",
    )
    Ws = Family(
        space,
        lambda m: OpenName.from_stages(space, search.stages(lambda t: state.w_cells(m, t)), f"W{m}"),
        label="shrink-W",
    )
    return state, Vs, Ws


def lf_shrink_Lpp(Us: Cover, space: Optional[SpaceDescriptor] = None) -> Tuple[Family, LFFamilyName]:
    """(W_i), (V_i) with V_i ⊆ Y ∖ W_i ⊆ U_i and ∪V_i = Y = ∪U_i."""
    state, Vs, Ws = _shrink(Us, space)
    witness = LFWitness(
        cover_balls=state.search.waiting(lambda t: t.a),
        finite_bounds=state.search.waiting(lambda t: fs_encode(state.indices_upto(t.index))),
    )
    return Ws, LFFamilyName(Vs, witness, exact_cover=True, kind="open", search=state.search)


def lf_open_shrink_Lp(Us: Cover, space: Optional[SpaceDescriptor] = None) -> LFFamilyName:
    """V_i ⊆ U_i, ∪V_i = ∪U_i, witnesses over the shifted numbering α′ (0 names ∅)."""
    state, Vs, _ = _shrink(Us, space)
    search = state.search

    def entries(value_of):
        def generate():
            step = 0
            while True:
                found = search.found_at(step)
                if not found:
                    yield 0
                for t in found:
                    yield value_of(t)
                step += 1

        return Name(generate(), label="shifted-witness")

    witness = LFWitness(
        cover_balls=entries(lambda t: t.a + 1),
        finite_bounds=entries(lambda t: fs_encode(state.indices_upto(t.index))),
        shifted=True,
    )
    return LFFamilyName(Vs, witness, exact_cover=True, kind="open", search=search)


# Region views used by audits
def member_region(family: LFFamilyName, j: int, steps: int) -> Region:
    """The part of member j emitted within the first ``steps`` search steps."""
    search = family.search
    if search is None:
        return family.members[j].region(steps)
    triples = search.triples(steps)
    if family.kind == "closed":
        cells = [c for t in triples if t.index == j for c in t.a_cells]
    else:
        cells = [c for t in triples if t.e == j for c in t.v_cells]
    return Region(family.space, cells)


