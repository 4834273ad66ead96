from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from .clopen import GrowingRegion, Region
from .errors import EmptySet, PreconditionViolation, WholeSpace
from .hyperspaces import (
    ClosedName,
    ContName,
    CylinderFamily,
    Family,
    FullClosedName,
    OpenName,
    RangeName,
    cover_union,
    point_realizer,
    sigma_reorder,
)
from .names import Name, pair_names, unpair_names
from .paracompact import LFFamilyName, lf_open_shrink_Lp
from .schemas import AuditCheck
from .spaces import (
    Cell,
    LowerRealName,
    PointName,
    SpaceDescriptor,
    cylindrify,
    ideal_to_name,
)

logger = logging.getLogger(__name__)

Factor = Union[Fraction, int, str, Callable[[PointName], LowerRealName]]


@dataclass(frozen=True)
class DugundjiSystemName:
    """A locally finite open family (V_i) with anchors y_i ∈ A."""

    family: LFFamilyName
    anchors: Family
    coefficient: Fraction
    centers: Optional[Family] = None
    pieces_found: Optional[Callable[[int], List[Tuple[int, Cell]]]] = field(default=None, compare=False)

    @property
    def space(self) -> SpaceDescriptor:
        return self.family.space

    def anchor(self, i: int) -> PointName:
        return self.anchors[i]

    def pieces(self, steps: int) -> List[Tuple[int, Cell]]:
        """(index, cell) pairs of the family emitted within ``steps`` construction steps."""
        if self.pieces_found is not None:
            return self.pieces_found(steps)
        search = self.family.search
        if search is not None:
            return [(t.e, cell) for t in search.triples(steps) for cell in t.v_cells]
        return [(i, cell) for i in range(steps) for cell in self.family.members[i].cells(steps)]

    def name(self) -> Name:
        """⟨p, q⟩: p names the family with its witnesses, q the anchors."""
        return pair_names(self.family.name(), self.anchors.name())


def _as_lower(f: Factor) -> Callable[[PointName], LowerRealName]:
    if callable(f):
        return f
    value = Fraction(f)
    if value <= 0 or value > 1:
        raise PreconditionViolation("factor range", f"f = {value} must lie in (0, 1]")
    shared = LowerRealName.constant(value)
    return lambda x: shared


_DENSE_STAGES = 64


def _bound_stage(s: int) -> bool:
    # every stage early on, then doubling stages
    return s < _DENSE_STAGES or s & (s - 1) == 0


def b_realizer(A: FullClosedName, f: Factor) -> ContName:
    """x ↦ ball(x, f(x)·d_A(x)) as an open name.

    Distances are powers of ρ, so the open ball of a rational radius r is the
    cell of depth m with ρ^m < r. Each emitted code is the canonical code of a
    strictly larger cell than the one before.
    """
    space = A.space
    factor = _as_lower(f)

    def output(x: PointName):
        f_lower, d_lower = factor(x), A.dist.lower(x)
        depth: Optional[int] = None
        s = 0
        while True:
            emitted = False
            if _bound_stage(s):
                l1, l2 = f_lower.lower_bound(s), d_lower.lower_bound(s)
                if l1 is not None and l2 is not None and l1 > 0 and l2 > 0:
                    cap = l1 * l2
                    m = space.depth_below(cap)
                    if Fraction(1, 2**s) < cap and (depth is None or m < depth):
                        depth = m
                        emitted = True
                        yield space.cell_code(space.cell_of(x.label(s), m)) + 1
            if not emitted:
                yield 0
            s += 1

    return ContName(space, None, point_realizer(space, space, output, "b"))


def b_compose_nu(A: FullClosedName, f: Factor, cylinder: bool = False) -> Family:
    """U_i = ball(λ(i), f·d_A(λ(i))), where λ is ν or its cylindrification.

    In the cylindrified numbering every copy ⟨k,l⟩ shares the member object of k.
    """
    _, family = cover_union(b_realizer(A, f))
    return CylinderFamily(family, label="b-cylinder") if cylinder else family


def pick_near_point(
    A: FullClosedName,
    x: PointName,
    bound: Union[LowerRealName, Fraction],
    budget: Optional[int] = None,
) -> Optional[PointName]:
    """A range point y of A with d(x, y) < bound; None once ``budget`` stages pass."""
    if A.is_empty():
        raise EmptySet("no point to pick from the empty set")
    if not isinstance(bound, LowerRealName):
        bound = LowerRealName.constant(bound)
    space = A.space
    s = 0
    while budget is None or s < budget:
        lower = bound.lower_bound(s)
        if lower is not None:
            here = x.label(s)
            for i in range(s + 1):
                z = A.range.point(i)
                if space.dist(here, z.label(s)) + Fraction(2, 2**s) < lower:
                    return z
        s += 1
    return None


def dugundji_Q(eps, A: FullClosedName) -> DugundjiSystemName:
    eps = Fraction(eps)
    if eps <= 0:
        raise PreconditionViolation("eps", f"eps = {eps} must be positive")
    if A.is_empty():
        raise EmptySet("a Dugundji system needs a nonempty set")
    if A.is_whole():
        raise WholeSpace("a Dugundji system needs A ≠ X")
    space = A.space
    delta = eps / (2 + eps)
    f = delta / 2
    r_tilde = 1 + eps - (2 + eps) * f
    cylinder = cylindrify(space)
    Us = b_compose_nu(A, f, cylinder=True)
    e = sigma_reorder(Us)
    centers = Family(space, lambda j: ideal_to_name(space, cylinder.base_index(e[j])), label="centers")
    reordered = Family(space, lambda j: Us[e[j]], label="reordered-balls")
    family = lf_open_shrink_Lp(reordered)

    def anchor(j: int) -> PointName:
        x = centers[j]
        return pick_near_point(A, x, A.dist.lower(x).scaled(r_tilde))

    logger.debug("dugundji_Q eps=%s delta=%s f=%s r~=%s", eps, delta, f, r_tilde)
    return DugundjiSystemName(family, Family(space, anchor, label="anchors"), 1 + eps, centers=centers)


@dataclass(frozen=True)
class Epsilon1Constants:
    f: Fraction
    anchor_factor: Fraction
    center_bound: Fraction
    point_bound: Fraction

    @property
    def coefficient(self) -> Fraction:
        return self.point_bound


def epsilon1_constants() -> Epsilon1Constants:
    """f = 2^-2, d(x_i, y_i) < 5/4·d_A(x_i), d(x, y_i) ≤ 3/2·d_A(x_i) ≤ 2·d_A(x)."""
    return Epsilon1Constants(
        f=Fraction(1, 4),
        anchor_factor=Fraction(5, 4),
        center_bound=Fraction(3, 2),
        point_bound=Fraction(2),
    )


# Representation converters
def delta4_to_delta8(name: Name) -> Name:
    p, q = unpair_names(name)
    r = Name.from_function(lambda j: q[j] + 1, label="delta8-range")
    return pair_names(r, p)


def delta8_denotation(space: SpaceDescriptor, name: Name) -> Tuple[RangeName, ClosedName]:
    """Decode ⟨r, p⟩: r ranges over a subset of A, p's family lists balls of X ∖ A."""
    r, p = unpair_names(name)
    members, _ = unpair_names(p)
    return RangeName(space, r), ClosedName(space, OpenName(space, members))


# Finite-depth verification
def _target_region(A: FullClosedName) -> Region:
    if A.oracle is None or not A.space.compact:
        raise PreconditionViolation("fixture oracle", "verification needs an exact compact fixture")
    return Region.whole(A.space).minus(A.oracle)


def drive(D: DugundjiSystemName, target: Region, limit: int) -> Tuple[List[Tuple[int, Cell]], bool]:
    """Grow the construction until its pieces cover ``target`` or ``limit`` steps pass."""
    steps = 8
    while True:
        pieces = D.pieces(steps)
        covered = GrowingRegion(D.space)
        for _, cell in pieces:
            covered.absorb(cell)
        if covered.covers_region(target):
            return pieces, True
        if steps >= limit:
            return pieces, False
        steps = min(2 * steps, limit)


def verify_dugundji(D: DugundjiSystemName, A: FullClosedName, depth: int, limit: int = 4096) -> List[AuditCheck]:
    space = A.space
    target = _target_region(A)
    pieces, covered = drive(D, target, limit)
    checks = [AuditCheck(name="cover", depth=depth, passed=covered,
                         counterexample=None if covered else _first_uncovered(space, target, pieces, depth))]

    slack = Fraction(2, 2**depth)
    grouped: Dict[int, List[Cell]] = {}
    for m, cell in pieces:
        grouped.setdefault(m, []).append(cell)

    anchor_bad = None
    for m in sorted(grouped):
        y = D.anchor(m).label(depth + 1)
        if A.oracle.distance(y) >= Fraction(1, 2**depth):
            anchor_bad = f"anchor {m} = {space.format_label(y)} lies off A"
            break
    checks.append(AuditCheck(name="anchors-in-A", depth=depth, passed=anchor_bad is None, counterexample=anchor_bad))

    inequality_bad = None
    for m in sorted(grouped):
        y = D.anchor(m).label(depth + 2)
        for cell in grouped[m]:
            for sub in space.cells_at(cell, max(depth, cell.depth)):
                x = sub.rep
                if space.dist(x, y) > D.coefficient * A.oracle.distance(x) + slack:
                    inequality_bad = f"x = {space.format_label(x)} in V_{m}"
                    break
            if inequality_bad:
                break
        if inequality_bad:
            break
    checks.append(AuditCheck(name="anchor-inequality", depth=depth, passed=inequality_bad is None,
                             counterexample=inequality_bad))

    checks.append(_witness_check(D, grouped, len(pieces), depth))

    trend_bad = None
    for m in sorted(grouped):
        region = Region(space, grouped[m])
        gap = region.distance_to(A.oracle)
        if gap is not None and region.diameter() > 2 * D.coefficient * gap:
            trend_bad = f"V_{m} has diameter {region.diameter()} at distance {gap}"
            break
    checks.append(AuditCheck(name="diameter-trend", depth=depth, passed=trend_bad is None,
                             counterexample=trend_bad, detail="finite-depth evidence only"))
    for check in checks:
        if not check.passed:
            logger.warning("dugundji check %s failed: %s", check.name, check.counterexample)
    return checks


def _first_uncovered(space: SpaceDescriptor, target: Region, pieces, depth: int) -> Optional[str]:
    region = GrowingRegion(space)
    for _, cell in pieces:
        region.absorb(cell)
    for cell in target.refine(depth):
        if not region.covers(cell):
            return f"cell {space.format_label(cell.rep)} at depth {cell.depth}"
    return None


def _witness_check(D: DugundjiSystemName, grouped: Dict[int, List[Cell]], count: int, depth: int) -> AuditCheck:
    space = D.space
    witness = D.family.witness
    regions = {m: Region(space, cells) for m, cells in grouped.items()}
    for i in range(count):
        code = witness.ball(i)
        if code is None:
            continue
        ball = space.open_cell(code)
        allowed = witness.bound(i)
        for m, region in regions.items():
            if m not in allowed and region.meets(ball):
                return AuditCheck(name="witness-soundness", depth=depth, passed=False,
                                  counterexample=f"V_{m} meets witness ball {i} outside its bound")
    return AuditCheck(name="witness-soundness", depth=depth, passed=True)
