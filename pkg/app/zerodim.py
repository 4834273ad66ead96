from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import count
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .clopen import Region
from .dugundji import DugundjiSystemName, b_compose_nu, dugundji_Q, epsilon1_constants, pick_near_point
from .errors import EmptySet, PreconditionViolation, UnsupportedSpace, WholeSpace
from .hyperspaces import (
    ClosedName,
    ContName,
    Disjointifier,
    Family,
    FullClosedName,
    OpenName,
    Verdict,
    cell_stream,
    closed_intersection,
    closed_minus_open,
    closed_union,
    entry_cell,
    point_realizer,
    t4_separate,
)
from .machines import IDENTITY, MachineName, register_native, utm_apply
from .names import TICK, Name, cantor_unpair, fs_encode, pair_names, tuple_seq, unpair_names, untuple
from .paracompact import Cover, LFFamilyName, LFWitness, as_family
from .spaces import (
    CantorSpace,
    Cell,
    CylinderSpace,
    PadicField,
    PadicIntegers,
    PointName,
    SpaceDescriptor,
    ideal_to_name,
)

logger = logging.getLogger(__name__)

CLOPEN_KINDS = (CantorSpace, PadicIntegers, PadicField, CylinderSpace)


def require_clopen(space: SpaceDescriptor) -> None:
    if not isinstance(space, CLOPEN_KINDS):
        raise UnsupportedSpace(f"{space.name} has no clopen ball basis")


def _space_of(Us: Cover) -> SpaceDescriptor:
    if isinstance(Us, Family):
        return Us.space
    return Us[0].space


# ============================================================================
# Disjointification
# ============================================================================

def decompose_V(U: OpenName) -> Family:
    """W*_i = α(U_i) ∖ ∪_{j<i} α(U_j), each an exact finite union of cells."""
    require_clopen(U.space)
    process = Disjointifier(U.space, lambda n: (n, entry_cell(U, n)))
    return Family(U.space, lambda i: OpenName.from_cells(U.space, process.step(i)[1]), label="decompose")


def tilde_S_process(Vs: Cover, space: Optional[SpaceDescriptor] = None) -> Disjointifier:
    """Round r reads entry r - i of every member i ≤ r."""
    space = space or _space_of(Vs)
    require_clopen(space)
    family = as_family(space, Vs)

    def batch(r):
        found = []
        for i in range(r + 1):
            cell = entry_cell(family[i], r - i)
            if cell is not None:
                found.append((i, cell))
        return found

    return Disjointifier(space, batch=batch)


def tilde_S(Vs: Cover, Y: Optional[ClosedName] = None, space: Optional[SpaceDescriptor] = None) -> Family:
    """Pairwise disjoint W_i ⊆ V_i with ∪W_i = ∪V_i (so in particular on Y)."""
    process = tilde_S_process(Vs, space)
    return Family(process.space, lambda i: process.bucket(i, f"W{i}"), label="tilde-S")


def covering_decide(space: SpaceDescriptor, a: int, w: Sequence[int]) -> bool:
    """b(a) ⊆ ∪ b(w_i), balls read through the closed-ball numbering."""
    require_clopen(space)
    cover = Region(space, [space.closed_cell(code) for code in w])
    return cover.covers(space.closed_cell(a))


def covering_semidecide(space: SpaceDescriptor, a: int, w: Sequence[int], budget: int) -> Verdict:
    if budget <= 0:
        return Verdict.UNKNOWN
    return Verdict.YES if covering_decide(space, a, w) else Verdict.UNKNOWN


def decompose_Vprime(Us: Cover, space: Optional[SpaceDescriptor] = None) -> Tuple[Family, Name]:
    """Pieces W̌_⟨i,j⟩ ⊆ U_i from ball j of U_i, with flags s_k = 1 iff W̌_k ≠ ∅."""
    space = space or _space_of(Us)
    require_clopen(space)
    process = _vprime_process(as_family(space, Us), space)
    pieces = Family(space, lambda n: OpenName.from_cells(space, process.step(n)[1]), label="vprime")
    flags = Name.from_function(lambda n: 1 if process.step(n)[1] else 0, label="flags")
    return pieces, flags


def disjoint_witness(process: Disjointifier) -> LFWitness:
    """Each emitted piece is its own witness ball; it meets only its own member."""

    def entries(value_of):
        def generate():
            n = 0
            while True:
                bucket, pieces = process.step(n)
                if not pieces:
                    yield 0
                for cell in pieces:
                    yield value_of(bucket, cell)
                n += 1

        return Name(generate(), label="disjoint-witness")

    return LFWitness(
        cover_balls=entries(lambda bucket, cell: process.space.cell_code(cell) + 1),
        finite_bounds=entries(lambda bucket, cell: fs_encode([bucket])),
        shifted=True,
    )


# ============================================================================
# Clopen and relative Dugundji systems
# ============================================================================

def dugundji_clopen(A: FullClosedName, allow_whole: bool = False) -> DugundjiSystemName:
    """Coefficient-2 system from the balls ball(ν(i), d_A(ν(i))/4), made pairwise disjoint.

    With ``allow_whole`` the pieces are indexed ⟨i, j⟩ and flagged, and A = X gives
    the empty family.
    """
    require_clopen(A.space)
    constants = epsilon1_constants()
    if A.is_empty():
        raise EmptySet("a Dugundji system needs a nonempty set")
    if A.is_whole() and not allow_whole:
        raise WholeSpace("a Dugundji system needs A ≠ X")
    space = A.space
    Us = b_compose_nu(A, constants.f)

    def anchor_for(i: int) -> PointName:
        x = ideal_to_name(space, i)
        return pick_near_point(A, x, A.dist.lower(x).scaled(constants.anchor_factor))

    if allow_whole:
        process = _vprime_process(Us, space)
        members = Family(space, lambda n: OpenName.from_cells(space, process.step(n)[1]), label="vprime")
        anchors = Family(space, lambda n: anchor_for(cantor_unpair(n)[0]), label="anchors")
    else:
        process = tilde_S_process(Us, space)
        members = Family(space, lambda i: process.bucket(i, f"W{i}"), label="clopen")
        anchors = Family(space, anchor_for, label="anchors")
    family = LFFamilyName(members, disjoint_witness(process), exact_cover=True)
    return DugundjiSystemName(family, anchors, constants.coefficient, pieces_found=process.pieces)


def _vprime_process(Us: Family, space: SpaceDescriptor) -> Disjointifier:
    def item(n):
        i, j = cantor_unpair(n)
        return n, entry_cell(Us[i], j)

    return Disjointifier(space, item)


@dataclass(frozen=True)
class RelativeSystemName:
    ambient: ClosedName
    family: Family
    relative_witness: LFWitness
    anchors: Family
    coefficient: Fraction
    process: Optional[Disjointifier] = field(default=None, compare=False)
    source: Optional[DugundjiSystemName] = field(default=None, compare=False)

    @property
    def space(self) -> SpaceDescriptor:
        return self.family.space

    def anchor(self, i: int) -> PointName:
        return self.anchors[i]

    def pieces(self, steps: int) -> List[Tuple[int, Cell]]:
        if self.process is not None:
            return self.process.pieces(steps)
        region = self.ambient.oracle
        return [(i, piece) for i, cell in self.source.pieces(steps) for piece in _within(region, [cell])]

    def as_system(self) -> DugundjiSystemName:
        family = LFFamilyName(self.family, self.relative_witness, exact_cover=True)
        return DugundjiSystemName(family, self.anchors, self.coefficient, pieces_found=self.pieces)


def _within(region: Optional[Region], cells: Sequence[Cell]) -> List[Cell]:
    """The cells cut down to ``region``; unchanged when the ambient set has no exact region."""
    if region is None:
        return list(cells)
    return sorted(c for cell in cells for c in Region(region.space, [cell]).intersect(region).cells)


def _relative_member(U: OpenName, region: Optional[Region], label: str) -> OpenName:
    if region is None:
        return U
    cells = (entry_cell(U, k) for k in count())
    stages = (_within(region, [cell]) if cell is not None else [] for cell in cells)
    return OpenName.from_stages(U.space, stages, label)


def restrict_system(D: DugundjiSystemName, A: ClosedName) -> RelativeSystemName:
    """Read D's balls through the subspace numbering α_A(c) = α(c) ∩ A.

    The intersection is exact when A carries a region; otherwise the balls are kept
    whole and only their traces on A matter.
    """
    members = D.family.members
    return RelativeSystemName(
        ambient=A,
        family=Family(D.space, lambda i: _relative_member(members[i], A.oracle, f"V{i}∩A"), label="relative"),
        relative_witness=D.family.witness,
        anchors=D.anchors,
        coefficient=D.coefficient,
        source=D,
    )


def _check_subset(B: FullClosedName, A: ClosedName) -> None:
    if B.oracle is not None and A.oracle is not None and not A.oracle.covers_region(B.oracle):
        raise PreconditionViolation("B ⊆ A", "B has points outside the ambient set")


def dugundji_disjoint_Rp(A: ClosedName, B: FullClosedName) -> RelativeSystemName:
    """Dugundji system for B in X, restricted to A, with its balls made disjoint.

    The pieces are read in the order the search finds them, one search step per round.
    """
    _check_subset(B, A)
    D = dugundji_Q(1, B)
    relative = restrict_system(D, A)
    search = D.family.search
    if search is None:
        process = tilde_S_process(relative.family)
    else:
        process = Disjointifier(
            D.space,
            batch=lambda r: [(t.e, cell) for t in search.found_at(r) for cell in _within(A.oracle, t.v_cells)],
        )
    return replace(relative, family=Family(D.space, lambda i: process.bucket(i, f"W{i}"), label="R'"), process=process)


# ============================================================================
# The retraction E′
# ============================================================================

_FIRST_ROUNDS = 8
_ROUND_DOUBLING_CAP = 1024


def _next_rounds(rounds: int) -> int:
    # doubling, then linear steps once the cap is reached
    return rounds * 2 if rounds < _ROUND_DOUBLING_CAP else rounds + _ROUND_DOUBLING_CAP


class _RetractionState:
    """Pieces of the disjoint system, indexed by cell as the process runs."""

    def __init__(self, system: RelativeSystemName, B: FullClosedName):
        self.system = system
        self.B = B
        self._owner: Dict[Cell, int] = {}
        self._indexed = 0
        self._min_depth: Optional[int] = None
        self._lock = threading.Lock()

    def pieces(self, rounds: int) -> List[Tuple[int, Cell]]:
        found = self.system.pieces(rounds)
        with self._lock:
            for i, cell in found[self._indexed:]:
                self._owner[cell] = i
                if self._min_depth is None or cell.depth < self._min_depth:
                    self._min_depth = cell.depth
            self._indexed = max(self._indexed, len(found))
        return found

    def locate(self, x: PointName, s: int, rounds: int) -> Optional[int]:
        """The piece holding x's stage-s cell among the pieces of the first ``rounds`` rounds."""
        self.pieces(rounds)
        space = self.system.space
        here = x.cell(s)
        with self._lock:
            if self._min_depth is None:
                return None
            for depth in range(self._min_depth, here.depth + 1):
                owner = self._owner.get(space.cell_of(here.rep, depth))
                if owner is not None:
                    return owner
        return None

    def near_B(self, x: PointName, n: int, s: int) -> bool:
        """Some range point of B lies within 2^-(n+3) of x, read at stage max(s, n + 3)."""
        space = self.system.space
        stage = max(s, n + 3)
        here = x.label(stage)
        limit = Fraction(1, 2 ** (n + 3))
        return any(space.dist(here, self.B.range.point(i).label(stage)) < limit for i in range(stage + 1))


def retraction_Ep(A: ClosedName, B: FullClosedName) -> ContName:
    """f with f|_B = id and f ≡ y_i on W_i ∩ A, realized by dovetailing the two cases.

    Each failed round doubles the number of construction rounds the piece lookup may use.
    """
    system = dugundji_disjoint_Rp(A, B)
    state = _RetractionState(system, B)
    space = B.space

    def output(x: PointName):
        piece = None
        n = s = 0
        rounds = _FIRST_ROUNDS
        while True:
            if piece is not None:
                yield system.anchor(piece).query(n + 1)
                n += 1
            elif state.near_B(x, n, s):
                yield x.query(n + 1)
                n += 1
            else:
                piece = state.locate(x, s, rounds)
                if piece is None:
                    s += 1
                    rounds = _next_rounds(rounds)
                    yield TICK

    def preimage(U: OpenName) -> OpenName:
        def stages():
            emitted = set()
            pending: Dict[Cell, int] = {}
            s = 0
            while True:
                batch = []
                u_cells = U.cells(s + 1)
                for i, cell in state.pieces(_FIRST_ROUNDS * (s + 1)):
                    if cell not in emitted:
                        pending.setdefault(cell, i)
                for cell, i in list(pending.items()):
                    y_cell = system.anchor(i).cell(s)
                    if any(space.cell_subset(y_cell, u) for u in u_cells):
                        del pending[cell]
                        emitted.add(cell)
                        batch.append(cell)
                for u in u_cells:
                    for i in range(s + 1):
                        z = B.range.point(i)
                        if z.cell(s).depth < u.depth + 1:
                            continue
                        near = space.cell_of(z.label(s), u.depth + 1)
                        if near not in emitted and space.cell_subset(near, u):
                            emitted.add(near)
                            batch.append(near)
                yield batch
                s += 1

        return OpenName.from_stages(space, stages(), "retraction-preimage")

    machine = point_realizer(space, space, output, "E'")
    return ContName(space, space, machine, domain=A, preimage=preimage)


# ============================================================================
# Separation M and the operators N, N0, S
# ============================================================================

def _complement_name(region: Region) -> OpenName:
    if region.space.compact:
        return OpenName.from_region(region.complement())
    return OpenName(region.space, cell_stream(region.space, ([c] for c in region.complement_cells()), "complement"))


def separate_M(
    x: PointName, U: OpenName, Y: Optional[ClosedName] = None, budget: Optional[int] = None
) -> Optional[Tuple[OpenName, OpenName]]:
    """V a clopen ball around x inside U, W its complement; None when ``budget`` runs out."""
    space = U.space
    require_clopen(space)
    s = 0
    while budget is None or s < budget:
        here = x.cell(s)
        if any(space.cell_subset(here, u) for u in U.cells(s)):
            return OpenName.from_cells(space, [here]), _complement_name(Region(space, [here]))
        s += 1
    return None


def op_N(A: ClosedName, B: ClosedName, Y: Optional[ClosedName] = None) -> Tuple[OpenName, OpenName]:
    return t4_separate(A, B)


def op_N0(A: ClosedName, B: ClosedName, Y: ClosedName) -> Tuple[OpenName, OpenName]:
    return t4_separate(closed_intersection(A, Y), closed_intersection(B, Y))


def op_S(Us: Cover, Y: Optional[ClosedName] = None, space: Optional[SpaceDescriptor] = None) -> Family:
    return tilde_S(Us, Y, space)


# Name encodings of instances and outputs
def encode_N_instance(A: ClosedName, B: ClosedName, Y: ClosedName) -> Name:
    return pair_names(pair_names(A.stream, B.stream), Y.stream)


def decode_N_instance(space: SpaceDescriptor, p: Name) -> Tuple[ClosedName, ClosedName, ClosedName]:
    sets, y = unpair_names(p)
    a, b = unpair_names(sets)
    return tuple(ClosedName(space, OpenName(space, stream)) for stream in (a, b, y))


def encode_S_instance(Us: Sequence[OpenName], Y: ClosedName) -> Name:
    return pair_names(tuple_seq([U.stream for U in Us]), Y.stream)


def encode_opens(U: OpenName, V: OpenName) -> Name:
    return pair_names(U.stream, V.stream)


def decode_opens(space: SpaceDescriptor, q: Name) -> Tuple[OpenName, OpenName]:
    u, v = unpair_names(q)
    return OpenName(space, u), OpenName(space, v)


_REALIZERS: Dict[Tuple[str, str], MachineName] = {}
_realizers_lock = threading.Lock()


def _cached(kind: str, space: SpaceDescriptor, build: Callable[[], MachineName]) -> MachineName:
    with _realizers_lock:
        key = (kind, space.name)
        if key not in _REALIZERS:
            _REALIZERS[key] = build()
        return _REALIZERS[key]


def realizer_N(space: SpaceDescriptor) -> MachineName:
    def realize(params: Name, p: Name) -> Name:
        return encode_opens(*op_N(*decode_N_instance(space, p)))

    return _cached("N", space, lambda: register_native(realize, label="N"))


def realizer_N0(space: SpaceDescriptor) -> MachineName:
    def realize(params: Name, p: Name) -> Name:
        return encode_opens(*op_N0(*decode_N_instance(space, p)))

    return _cached("N0", space, lambda: register_native(realize, label="N0"))


def realizer_S(space: SpaceDescriptor) -> MachineName:
    def realize(params: Name, p: Name) -> Name:
        covers, y = unpair_names(p)
        Ws = op_S(Family.from_name(space, covers), ClosedName(space, OpenName(space, y)))
        return Ws.name()

    return _cached("S", space, lambda: register_native(realize, label="S"))


@dataclass(frozen=True)
class ReductionWitness:
    pre_processor: MachineName
    post_processor: MachineName
    strong: bool
    source: str
    target: str


def reduce_N_to_N0(space: SpaceDescriptor) -> ReductionWitness:
    """K = id; H⟨p, q⟩ = t4(A ∪ (Y ∖ V), B ∪ (Y ∖ U))."""

    def post(params: Name, r: Name) -> Name:
        p, q = unpair_names(r)
        A, B, Y = decode_N_instance(space, p)
        U, V = decode_opens(space, q)
        C = closed_union(A, closed_minus_open(Y, V))
        D = closed_union(B, closed_minus_open(Y, U))
        return encode_opens(*t4_separate(C, D))

    H = _cached("H:N<=N0", space, lambda: register_native(post, label="H:N<=N0"))
    return ReductionWitness(IDENTITY, H, strong=False, source="N", target="N0")


def reduce_N0_to_N(space: SpaceDescriptor) -> ReductionWitness:
    """K(A, B, Y) = (A ∩ Y, B ∩ Y, Y); H = id."""

    def pre(params: Name, p: Name) -> Name:
        A, B, Y = decode_N_instance(space, p)
        return encode_N_instance(closed_intersection(A, Y), closed_intersection(B, Y), Y)

    K = _cached("K:N0<=N", space, lambda: register_native(pre, label="K:N0<=N"))
    return ReductionWitness(K, IDENTITY, strong=True, source="N0", target="N")


def _n0_to_s_pre(params: Name, p: Name) -> Name:
    sets, y = unpair_names(p)
    a, b = unpair_names(sets)
    return pair_names(tuple_seq([b, a]), y)


def _n0_to_s_post(params: Name, q: Name) -> Name:
    return pair_names(untuple(q, 0), untuple(q, 1))


_N0_TO_S = (
    register_native(_n0_to_s_pre, label="K:N0<=S"),
    register_native(_n0_to_s_post, label="H:N0<=S"),
)


def reduce_N0_to_S(space: Optional[SpaceDescriptor] = None) -> ReductionWitness:
    """K(p) = ⟨⟨X∖B, X∖A, ∅, …⟩, Y⟩ and H keeps the first two opens."""
    K, H = _N0_TO_S
    return ReductionWitness(K, H, strong=True, source="N0", target="S")


def apply_reduction(witness: ReductionWitness, G: MachineName, p: Name) -> Name:
    """H∘G∘K for strong witnesses, H∘⟨id, G∘K⟩ otherwise."""
    answer = utm_apply(G, utm_apply(witness.pre_processor, p))
    if witness.strong:
        return utm_apply(witness.post_processor, answer)
    return utm_apply(witness.post_processor, pair_names(p, answer))
