"""Finite-depth audits.

Every checker returns ``AuditCheck`` records instead of raising, so a CLI run can
report all failures at once. Counterexamples name a concrete cell or point that
reproduces the failure.
"""
import logging
import random
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .clopen import Region
from .config import settings
from .dugundji import DugundjiSystemName, dugundji_Q, verify_dugundji
from .errors import ToolkitError
from .fixtures import closed_fixture
from .hyperspaces import ClosedName, ContName, Family, FullClosedName, OpenName, constant_cont, preimage_open
from .machines import ADD_THEN_SHIFT, IDENTITY, PROJECT_SECOND, SHIFT_P, smn_specialize, utm_apply, utm_query
from .na_retract import (
    CantorScheme,
    PartitionOfUnityName,
    SchemeHomeo,
    cantor_scheme_homeo,
    char_partition,
    retract_value,
    theta,
)
from .names import (
    NO_OUTPUT,
    Name,
    cantor_pair,
    cantor_unpair,
    fs_decode,
    fs_encode,
    pair_names,
    seq_code,
    seq_decode,
    tuple_code,
    untuple_code,
)
from .padic import (
    PadicScalar,
    abs_p_rational,
    add,
    cvx_n_check,
    in_segment,
    inv,
    mul,
    neg,
    solve_lambda,
)
from .paracompact import LFFamilyName, LFWitness, ShrinkState, lf_open_shrink_Lp, lf_refine_L, lf_shrink_Lpp, member_region
from .schemas import AuditCheck, AuditReport
from .spaces import (
    CantorSpace,
    Cell,
    Label,
    PadicField,
    PadicIntegers,
    PointName,
    SpaceDescriptor,
    label_to_name,
)
from .zerodim import (
    ReductionWitness,
    apply_reduction,
    decode_opens,
    encode_N_instance,
    realizer_N,
    realizer_N0,
    realizer_S,
    reduce_N0_to_N,
    reduce_N0_to_S,
    reduce_N_to_N0,
    dugundji_disjoint_Rp,
    retraction_Ep,
    tilde_S,
)

logger = logging.getLogger(__name__)


def _check(name: str, depth: int, failure: Optional[str], detail: Optional[str] = None) -> AuditCheck:
    if failure is not None:
        logger.warning("audit %s failed at depth %d: %s", name, depth, failure)
    return AuditCheck(name=name, depth=depth, passed=failure is None, counterexample=failure, detail=detail)


def _fmt(space: SpaceDescriptor, label: Label) -> str:
    return space.format_label(label)


def sample_labels(region: Region, depth: int, limit: Optional[int] = None) -> List[Label]:
    """Representatives of the depth-``depth`` cells of a region, in cell order."""
    reps = [cell.rep for cell in region.refine(depth)]
    return reps if limit is None else reps[:limit]


def _union_region(space: SpaceDescriptor, opens: Sequence[OpenName], entries: int) -> Region:
    return Region(space, [cell for U in opens for cell in U.cells(entries)])


# ============================================================================
# Paracompactness
# ============================================================================

def paracompact_checks(space: SpaceDescriptor, Us: Sequence[OpenName], entries: int = 16, limit: int = 4096) -> List[AuditCheck]:
    """Union preservation and containment chains of the three refinements on a finite cover."""
    Y = _union_region(space, Us, entries)
    u_regions = [U.region(entries) for U in Us]
    checks: List[AuditCheck] = []

    _, As, _ = lf_refine_L(Us, space)
    search = As.search
    covered = search.run_until_covers(Y, limit)
    checks.append(_check("refine-union", 0, None if covered else "the triples stop short of ∪U_i"))
    chain_bad = None
    for t in search.triples():
        v, a = Region(space, t.v_cells), Region(space, t.a_cells)
        if not a.covers_region(v):
            chain_bad = f"V_{t.index} ⊄ A_{t.index}"
        elif t.e >= len(u_regions) or not u_regions[t.e].covers_region(a):
            chain_bad = f"A_{t.index} ⊄ U_{t.e}"
        elif not Y.covers_region(v):
            chain_bad = f"V_{t.index} leaves ∪U_i"
        if chain_bad:
            break
    checks.append(_check("refine-chain", 0, chain_bad))

    _, Vs = lf_shrink_Lpp(Us, space)
    Vs.search.run_until_covers(Y, limit)
    v_by, w_by = _grouped(Vs, len(Us))
    shrink_bad = None
    for m, u in enumerate(u_regions):
        v, w = v_by[m], w_by[m]
        if not u.covers_region(v):
            shrink_bad = f"V_{m} ⊄ U_{m}"
        elif v.meets_region(w):
            shrink_bad = f"V_{m} meets W_{m}"
        elif not w.covers_region(Y.minus(u)):
            shrink_bad = f"Y ∖ W_{m} ⊄ U_{m}"
        if shrink_bad:
            break
    union = Region(space, [c for m in v_by for c in v_by[m].cells])
    if shrink_bad is None and not union.covers_region(Y):
        shrink_bad = "∪V_i misses part of Y"
    checks.append(_check("shrink-chain", 0, shrink_bad))

    Lp = lf_open_shrink_Lp(Us, space)
    Lp.search.run_until_covers(Y, limit)
    lp_v, _ = _grouped(Lp, len(Us))
    lp_bad = None
    for m, u in enumerate(u_regions):
        if not u.covers_region(lp_v[m]):
            lp_bad = f"V_{m} ⊄ U_{m}"
            break
    lp_union = Region(space, [c for m in lp_v for c in lp_v[m].cells])
    if lp_bad is None and not (lp_union.covers_region(Y) and Y.covers_region(lp_union)):
        lp_bad = "∪V_i differs from ∪U_i"
    checks.append(_check("open-shrink-union", 0, lp_bad))
    checks.append(_witness_soundness(space, Lp, lp_v, Lp.search.steps))
    return checks


def _grouped(family: LFFamilyName, count: int) -> Tuple[Dict[int, Region], Dict[int, Region]]:
    """Members V_m and their shrink complements W_m as far as the search has run."""
    search = family.search
    steps = search.steps
    state = ShrinkState(search)
    triples = search.triples()
    v_by = {m: member_region(family, m, steps) for m in range(count)}
    w_by = {m: Region(search.space, [c for t in triples for c in state.w_cells(m, t)]) for m in range(count)}
    return v_by, w_by


def _witness_soundness(space: SpaceDescriptor, family, regions: Dict[int, Region], entries: int) -> AuditCheck:
    witness = family.witness
    for i in range(entries):
        code = witness.ball(i)
        if code is None:
            continue
        ball = space.open_cell(code)
        allowed = witness.bound(i)
        for m, region in regions.items():
            if m not in allowed and region.meets(ball):
                return _check("witness-soundness", 0, f"member {m} meets witness ball {i}")
    return _check("witness-soundness", 0, None)


# ============================================================================
# Disjointification
# ============================================================================

def disjoint_union_checks(space: SpaceDescriptor, Vs: Sequence[OpenName], Ws: Family, entries: int, depth: int) -> List[AuditCheck]:
    """W_i ⊆ V_i, pairwise disjoint, ∪W_i = ∪V_i on the emitted parts."""
    count = len(Vs)
    v_regions = [V.region(entries) for V in Vs]
    w_regions = [Ws[i].region(entries * count * count + entries) for i in range(count)]
    bad = None
    for i in range(count):
        if not v_regions[i].covers_region(w_regions[i]):
            bad = f"W_{i} ⊄ V_{i}"
            break
        for j in range(i + 1, count):
            if w_regions[i].meets_region(w_regions[j]):
                bad = f"W_{i} meets W_{j}"
                break
        if bad:
            break
    checks = [_check("pairwise-disjoint", depth, bad)]
    union_v = Region(space, [c for r in v_regions for c in r.cells])
    union_w = Region(space, [c for r in w_regions for c in r.cells])
    missing = None if union_w.covers_region(union_v) else "∪W_i misses part of ∪V_i"
    checks.append(_check("union-preserved", depth, missing))
    return checks


# ============================================================================
# Retractions
# ============================================================================

def retraction_checks(
    A: FullClosedName,
    B: FullClosedName,
    f: ContName,
    k: int,
    depth: int,
    samples: Optional[int] = None,
    U: Optional[OpenName] = None,
) -> List[AuditCheck]:
    space = B.space
    tolerance = Fraction(1, 2**k)
    slack = Fraction(2, 2**k)
    points = sample_labels(A.oracle, depth, samples)
    identity_bad = into_bad = coefficient_bad = idempotence_bad = None
    for label in points:
        x = label_to_name(space, label)
        fx = f.evaluate(x)
        value = fx.label(k)
        if B.oracle.contains_point(label) and space.dist(value, label) >= tolerance and identity_bad is None:
            identity_bad = f"f({_fmt(space, label)}) = {_fmt(space, value)}"
        if B.oracle.distance(value) >= tolerance and into_bad is None:
            into_bad = f"f({_fmt(space, label)}) ≈ {_fmt(space, value)} lies off B"
        if space.dist(label, value) > 2 * B.oracle.distance(label) + slack and coefficient_bad is None:
            coefficient_bad = f"d(x, f(x)) too large at x = {_fmt(space, label)}"
        twice = f.evaluate(fx).label(k)
        if space.dist(twice, value) > slack and idempotence_bad is None:
            idempotence_bad = f"f(f(x)) ≠ f(x) at x = {_fmt(space, label)}"
    checks = [
        _check("identity-on-B", k, identity_bad),
        _check("image-in-B", k, into_bad),
        _check("coefficient-2", k, coefficient_bad),
        _check("idempotence", k, idempotence_bad),
    ]
    if U is not None and f.preimage is not None:
        checks.append(preimage_checks(A, f, U, k, depth, points))
        checks.append(preimage_exact_checks(A, f, U, k, depth))
    return checks


def preimage_checks(A: FullClosedName, f: ContName, U: OpenName, k: int, depth: int, points: Sequence[Label]) -> AuditCheck:
    """Every sampled A-point of an emitted preimage ball maps into U."""
    space = f.domain_space
    target = U.region(depth + 4)
    emitted = f.preimage(U).cells(depth + 4)
    for cell in emitted:
        for label in points:
            if not space.cell_contains(cell, label):
                continue
            value = f.evaluate(label_to_name(space, label)).label(k + 8)
            if not target.contains_point(value):
                return _check("preimage-sound", k, f"{_fmt(space, label)} in the preimage maps outside U")
    return _check("preimage-sound", k, None, detail=f"{len(emitted)} balls emitted")


def brute_preimage(A: FullClosedName, f: ContName, U: OpenName, k: int, depth: int) -> List[Label]:
    """Centers of the depth-``depth`` cells of A that f maps into U."""
    space = f.domain_space
    target = U.region(depth + 4)
    return [
        cell.rep
        for cell in A.oracle.refine(depth)
        if target.contains_point(f.evaluate(label_to_name(space, cell.rep)).label(k + 8))
    ]


def preimage_exact_checks(A: FullClosedName, f: ContName, U: OpenName, k: int, depth: int, limit: int = 256) -> AuditCheck:
    """The emitted preimage, cut to A, holds exactly the centers the brute-force preimage holds.

    The preimage stream is read with a doubling entry budget until it covers every
    brute-force center or ``limit`` entries pass.
    """
    space = f.domain_space
    level = depth + 1
    inside = brute_preimage(A, f, U, k, level)
    preimage = preimage_open(f, U)
    entries = 16
    while True:
        emitted = preimage.region(entries).intersect(A.oracle)
        missing = [label for label in inside if not emitted.contains_point(label)]
        if not missing or entries >= limit:
            break
        entries = min(2 * entries, limit)
    if missing:
        return _check("preimage-exact", k, f"{_fmt(space, missing[0])} maps into U but was never emitted")
    expected = set(inside)
    for cell in A.oracle.refine(level):
        if emitted.contains_point(cell.rep) and cell.rep not in expected:
            return _check("preimage-exact", k, f"{_fmt(space, cell.rep)} in the preimage maps outside U")
    return _check("preimage-exact", k, None, detail=f"{len(inside)} centers after {entries} entries")


# ============================================================================
# θ = h∘r
# ============================================================================

def theta_on_A_checks(theta: ContName, h: ContName, A: FullClosedName, k: int, depth: int, samples: int = 8) -> AuditCheck:
    space, target = A.space, theta.target_space
    for label in sample_labels(A.oracle, depth, samples):
        x = label_to_name(space, label)
        if target.dist(theta.evaluate(x).label(k), h.evaluate(x).label(k)) > Fraction(2, 2**k):
            return _check("theta-equals-h-on-A", k, f"x = {_fmt(space, label)}")
    return _check("theta-equals-h-on-A", k, None)


def theta_agreement_checks(theta: ContName, other: Callable[[PointName], PointName], points: Sequence[Label], space: SpaceDescriptor, k: int, name: str) -> AuditCheck:
    target = theta.target_space
    for label in points:
        x = label_to_name(space, label)
        if target.dist(theta.evaluate(x).label(k), other(x).label(k)) > Fraction(2, 2**k):
            return _check(name, k, f"x = {_fmt(space, label)}")
    return _check(name, k, None)


def theta_segment_checks(theta: ContName, ends: Tuple[PointName, PointName], points: Sequence[Label], space: SpaceDescriptor, k: int) -> AuditCheck:
    p = theta.target_space.prime
    left, right = ends[0].label(k), ends[1].label(k)
    for label in points:
        value = theta.evaluate(label_to_name(space, label)).label(k)
        if not in_segment(value, left, right, p):
            return _check("theta-in-segment", k, f"θ({_fmt(space, label)}) = {value} outside [{left}, {right}]")
    return _check("theta-in-segment", k, None)


def into_A_checks(A: FullClosedName, values: Sequence[Tuple[Label, Label]], k: int) -> AuditCheck:
    space = A.space
    for x, r in values:
        if A.oracle.distance(r) >= Fraction(1, 2**k):
            return _check("retract-in-A", k, f"r({_fmt(space, x)}) = {_fmt(space, r)}")
    return _check("retract-in-A", k, None)


# ============================================================================
# Reductions
# ============================================================================

def reduction_setup(which: str, space: SpaceDescriptor) -> Tuple[ReductionWitness, object, str]:
    """(witness, direct realizer of the target, source operator) for a reduction name."""
    if which == "n-to-n0":
        return reduce_N_to_N0(space), realizer_N0(space), "N"
    if which == "n0-to-n":
        return reduce_N0_to_N(space), realizer_N(space), "N0"
    if which == "n0-to-s":
        return reduce_N0_to_S(space), realizer_S(space), "N0"
    raise ToolkitError(f"unknown reduction {which!r}")


def separation_checks(source: str, A: Region, B: Region, Y: Region, U: OpenName, V: OpenName, limit: int = 256) -> List[AuditCheck]:
    """The postcondition of N (A ⊆ U, B ⊆ V, U ∩ V = ∅, Y ⊆ U ∪ V) or of N₀ (the same inside Y)."""
    space = U.space
    if source == "N0":
        A, B = A.intersect(Y), B.intersect(Y)
    entries = 8
    while True:
        u, v = U.region(entries), V.region(entries)
        both = u.union(v)
        done = u.covers_region(A) and v.covers_region(B) and both.covers_region(Y)
        if done or entries >= limit:
            break
        entries *= 2
    clash = u.intersect(v)
    if source == "N0":
        clash = clash.intersect(Y)
    return [
        _check(f"{source}-A-in-U", entries, None if u.covers_region(A) else "A ⊄ U"),
        _check(f"{source}-B-in-V", entries, None if v.covers_region(B) else "B ⊄ V"),
        _check(f"{source}-Y-covered", entries, None if both.covers_region(Y) else "Y ⊄ U ∪ V"),
        _check(f"{source}-disjoint", entries, None if not clash else f"U and V share {sorted(clash.cells)[0]}"),
    ]


def reduction_checks(which: str, space: SpaceDescriptor, instances: Sequence[Tuple[ClosedName, ClosedName, ClosedName]], limit: int = 256) -> List[AuditCheck]:
    witness, G, source = reduction_setup(which, space)
    checks: List[AuditCheck] = []
    for A, B, Y in instances:
        out = apply_reduction(witness, G, encode_N_instance(A, B, Y))
        U, V = decode_opens(space, out)
        checks.extend(separation_checks(source, A.oracle, B.oracle, Y.oracle, U, V, limit))
    return checks


# ============================================================================
# Verify suites
# ============================================================================

def kernel_suite(trials: int, rng: random.Random) -> List[AuditCheck]:
    bad = None
    for j in range(40):
        for k in range(40):
            if cantor_unpair(cantor_pair(j, k)) != (j, k):
                bad = f"pairing ⟨{j},{k}⟩"
    for n in range(500):
        if cantor_pair(*cantor_unpair(n)) != n:
            bad = f"unpairing {n}"
    checks = [_check("pairing-roundtrip", 40, bad)]

    bad = None
    for _ in range(trials):
        word = [rng.randrange(50) for _ in range(rng.randrange(1, 5))]
        if seq_decode(seq_code(word)) != tuple(word) or untuple_code(tuple_code(*word), len(word)) != tuple(word):
            bad = f"word {word}"
        members = {rng.randrange(30) for _ in range(rng.randrange(6))}
        if fs_decode(fs_encode(members)) != members:
            bad = f"finite set {sorted(members)}"
    checks.append(_check("finite-codes", trials, bad))

    bad = None
    for _ in range(trials):
        values = [rng.randrange(1, 40) for _ in range(8)]
        q = Name.padded(values)
        if utm_apply(IDENTITY, q).prefix(8) != values:
            bad = f"identity on {values}"
        if utm_apply(SHIFT_P, q).prefix(8) != [v - 1 for v in values]:
            bad = f"shift on {values}"
        p = Name.padded([rng.randrange(40) for _ in range(8)])
        direct = utm_apply(ADD_THEN_SHIFT, pair_names(p, q)).prefix(6)
        special = utm_apply(smn_specialize(ADD_THEN_SHIFT, p), q).prefix(6)
        if direct != special:
            bad = f"smn coherence on {values}"
        if utm_apply(PROJECT_SECOND, pair_names(p, q)).prefix(6) != values[:6]:
            bad = f"projection on {values}"
    if utm_query(IDENTITY, Name.constant(1), 0, budget=1) is not NO_OUTPUT:
        bad = "budget not honoured"
    checks.append(_check("utm-smn", trials, bad))
    return checks


def _random_rational(rng: random.Random, p: int) -> Fraction:
    numerator = rng.randrange(-200, 201)
    denominator = rng.randrange(1, 60) * p ** rng.randrange(0, 3)
    return Fraction(numerator, denominator)


PADIC_PRIMES = (2, 3, 5)


def _streamed(q: Fraction, p: int) -> PadicScalar:
    """q named by its cell representatives, so arithmetic runs the stage-wise path."""
    field = PadicField(p)

    def generate():
        depth, k = 0, 0
        while True:
            # smallest depth with p^-depth < 2^-k
            while p**depth <= 2**k:
                depth += 1
            yield field.cell_of(q, depth + 1).rep
            k += 1

    return PadicScalar.from_stream(field, generate(), "sample")


def padic_suite(primes: Sequence[int], trials: int, rng: random.Random, precision: int = 12) -> List[AuditCheck]:
    """Every sampled pair goes through the stage-wise add, mul, neg and inv."""
    checks: List[AuditCheck] = []
    for p in primes:
        for check in _padic_field_checks(p, trials, rng, precision):
            check.detail = f"qp:{p}"
            checks.append(check)
    return checks


def _padic_field_checks(p: int, trials: int, rng: random.Random, precision: int) -> List[AuditCheck]:
    field = PadicField(p)
    eps = Fraction(1, 2**precision)
    triangle = multiplicative = arithmetic = inverse = None
    for _ in range(trials):
        x, y = _random_rational(rng, p), _random_rational(rng, p)
        ax, ay = abs_p_rational(x, p), abs_p_rational(y, p)
        if abs_p_rational(x + y, p) > max(ax, ay) or (ax != ay and abs_p_rational(x + y, p) != max(ax, ay)):
            triangle = f"x={x}, y={y}"
        if abs_p_rational(x * y, p) != ax * ay:
            multiplicative = f"x={x}, y={y}"
        sx, sy = _streamed(x, p), _streamed(y, p)
        for value, oracle, label in ((add(sx, sy), x + y, "add"), (mul(sx, sy), x * y, "mul"), (neg(sx), -x, "neg")):
            if field.dist(value.approx(precision), oracle) >= eps:
                arithmetic = f"{label} on x={x}, y={y}"
        if x != 0 and field.dist(mul(sx, inv(sx)).approx(precision), 1) >= eps:
            inverse = f"x·inv(x) for x={x}"
    return [
        _check("strong-triangle", precision, triangle),
        _check("multiplicativity", precision, multiplicative),
        _check("field-operations", precision, arithmetic),
        _check("inverse", precision, inverse),
    ]


def convexity_suite(p: int, trials: int, rng: random.Random, depth: int = 3) -> List[AuditCheck]:
    modulus = p**depth
    segment_bad = None
    for _ in range(20):
        x, y = rng.randrange(modulus), rng.randrange(modulus)
        for z in range(modulus):
            lam = solve_lambda(z, x, y, p)
            exists = (z == x) if lam is None else abs_p_rational(lam, p) <= 1
            if in_segment(z, x, y, p) != exists:
                segment_bad = f"z={z}, x={x}, y={y}"
    field = PadicField(p)
    cvx_bad = None
    for _ in range(trials):
        center = rng.randrange(modulus)
        level = rng.randrange(0, depth)
        cell = field.cell_of(center, level)
        n = rng.randrange(1, 5)
        ws = [cell.rep + rng.randrange(0, 50) * p**level for _ in range(n)]
        alphas = [rng.randrange(-9, 10) * p for _ in range(n - 1)]
        alphas.append(1 - sum(alphas))
        if abs_p_rational(alphas[-1], p) > 1:
            continue
        if not cvx_n_check(field, field.closed_code(cell), ws, alphas):
            cvx_bad = f"ball {cell}, w={ws}, α={alphas}"
    return [_check("segment-vs-lambda", depth, segment_bad), _check("cvx-n", depth, cvx_bad)]


def dugundji_suite(limit: Optional[int] = None) -> List[AuditCheck]:
    limit = limit or settings.audit_stage_limit
    z3, cantor = PadicIntegers(3), CantorSpace()
    fixtures = [
        (closed_fixture(z3, [("0", "1/3")]), 3),
        (closed_fixture(z3, [("0", "1/9")]), 3),
        (closed_fixture(cantor, [("0", "1/2")]), 6),
    ]
    checks = []
    for A, depth in fixtures:
        for eps in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
            for check in verify_dugundji(dugundji_Q(eps, A), A, depth, limit):
                check.detail = f"{A.space.name} eps={eps}"
                checks.append(check)
    return checks


def _cells(space: SpaceDescriptor, *specs: str) -> OpenName:
    """Open union of cells: prefix words on Cantor space, ``residue@depth`` on ℤ_p."""
    cells = []
    for spec in specs:
        if isinstance(space, CantorSpace):
            cells.append(Cell(len(spec), spec))
        else:
            center, depth = spec.split("@")
            cells.append(space.cell_of(space.parse_center(center), int(depth)))
    return OpenName.from_cells(space, cells)


def sample_covers() -> List[Tuple[SpaceDescriptor, List[OpenName]]]:
    cantor, z3 = CantorSpace(), PadicIntegers(3)
    return [
        (cantor, [_cells(cantor, "0"), _cells(cantor, "01", "1"), _cells(cantor, "11")]),
        (z3, [_cells(z3, "0@1", "1@1"), _cells(z3, "1@1", "2@1"), _cells(z3, "4@2")]),
        (cantor, [_cells(cantor, "00"), _cells(cantor, "001", "11")]),
        (z3, [_cells(z3, "0@0"), _cells(z3, "0@1")]),
        (cantor, [_cells(cantor, "")]),
    ]


def paracompact_suite(limit: Optional[int] = None) -> List[AuditCheck]:
    limit = limit or settings.audit_stage_limit
    checks = []
    for space, Us in sample_covers():
        for check in paracompact_checks(space, Us, limit=limit):
            check.detail = space.name
            checks.append(check)
        Ws = tilde_S(Us, space=space)
        checks.extend(disjoint_union_checks(space, Us, Ws, entries=8, depth=0))
    return checks


def sample_retractions() -> List[Tuple[ClosedName, FullClosedName, OpenName]]:
    """(A, B, U): retract A onto B ⊆ A and test preimages of U."""
    cantor, z3 = CantorSpace(), PadicIntegers(3)
    return [
        (ClosedName.whole(cantor), closed_fixture(cantor, [("0", "1/2")]), _cells(cantor, "00")),
        (ClosedName.from_region(Region(cantor, [Cell(1, "1"), Cell(2, "00")])),
         closed_fixture(cantor, [("00", "1/4")]), _cells(cantor, "000")),
        (ClosedName.whole(z3), closed_fixture(z3, [("0", "1/9")]), _cells(z3, "0@3")),
    ]


def retraction_suite(k: int = 5, depth: int = 3) -> List[AuditCheck]:
    checks = []
    for A, B, U in sample_retractions():
        f = retraction_Ep(A, B)
        for check in retraction_checks(A, B, f, k, depth, U=U):
            check.detail = f"{B.space.name} B={sorted(B.oracle.cells)}"
            checks.append(check)
    return checks


def sample_instances(space: SpaceDescriptor, source: str) -> List[Tuple[ClosedName, ClosedName, ClosedName]]:
    """Separation instances: three disjoint pairs, plus for N₀ a pair that only separates inside Y."""
    whole = Region.whole(space)
    top = space.top_cells()[0]
    a, b, *_ = space.children(top)
    a0, a1, *_ = space.children(a)
    instances = [
        (ClosedName.from_region(Region(space, [a0])), ClosedName.from_region(Region(space, [b])),
         ClosedName.from_region(whole)),
        (ClosedName.from_region(Region(space, [a0])), ClosedName.from_region(Region(space, [a1])),
         ClosedName.from_region(Region(space, [a]))),
        (ClosedName.from_region(Region(space, [b])), ClosedName.from_region(Region(space, [a1])),
         ClosedName.from_region(Region(space, [a1, b]))),
    ]
    if source == "N0":
        instances.append((
            ClosedName.from_region(Region(space, [a])),
            ClosedName.from_region(Region(space, [a1])),
            ClosedName.from_region(Region(space, [a0, b])),
        ))
    return instances


def weihrauch_suite(spaces: Sequence[SpaceDescriptor] = ()) -> List[AuditCheck]:
    spaces = list(spaces) or [CantorSpace(), PadicIntegers(3)]
    checks = []
    for space in spaces:
        for which in ("n-to-n0", "n0-to-n", "n0-to-s"):
            _, _, source = reduction_setup(which, space)
            for check in reduction_checks(which, space, sample_instances(space, source)):
                check.detail = f"{which} on {space.name}"
                checks.append(check)
    return checks


# θ fixtures
def three_adic_homeo() -> SchemeHomeo:
    """Cantor space onto 3ℤ₃ through the balanced scheme, landing in ℚ₃."""
    cantor, z3 = CantorSpace(), PadicIntegers(3)
    src = CantorScheme.natural(cantor, Cell(0, ""))
    tgt = CantorScheme.balanced(z3, Cell(1, 0))
    return cantor_scheme_homeo(src, tgt, into=PadicField(3))


def mixture_system() -> Tuple[FullClosedName, DugundjiSystemName, PartitionOfUnityName]:
    """A = [0], both pieces equal to [1] with anchors 0… and 01…, weights 3 and -2 in ℚ₃."""
    cantor, q3 = CantorSpace(), PadicField(3)
    A = closed_fixture(cantor, [("0", "1/2")])
    V = OpenName.from_cells(cantor, [Cell(1, "1")])
    members = Family.finite(cantor, [V, V], label="mixture")
    witness = LFWitness(
        Name.padded([cantor.cell_code(Cell(1, "1")) + 1]),
        Name.padded([fs_encode([0, 1])]),
        shifted=True,
    )
    anchors = Family(cantor, lambda i: label_to_name(cantor, "0" if i == 0 else "01"), label="anchors")
    D = DugundjiSystemName(LFFamilyName(members, witness), anchors, Fraction(1))
    weights = {0: q3.index_of(3), 1: q3.index_of(-2)}
    pu = PartitionOfUnityName(
        q3,
        lambda i: constant_cont(cantor, weights.get(i, q3.index_of(0)), target=q3),
        members,
        V,
        count=2,
    )
    return A, D, pu


def theta_suite(k: int = 4, depth: int = 3) -> List[AuditCheck]:
    cantor = CantorSpace()
    h = three_adic_homeo()
    checks = []

    A, D, pu = mixture_system()
    mixed = theta(A, D, pu, h)
    off_A = sample_labels(Region(cantor, [Cell(1, "1")]), depth)
    checks.append(theta_on_A_checks(mixed, h.cont, A, k, depth))
    checks.append(theta_segment_checks(mixed, (h.evaluate(D.anchor(0)), h.evaluate(D.anchor(1))), off_A, cantor, k))
    U = OpenName.from_cells(PadicField(3), [Cell(2, Fraction(0))])
    on_A = sample_labels(A.oracle, depth)
    checks.append(preimage_checks(A, mixed, U, k, depth, off_A + on_A))
    values = [(x, retract_value(A, D, pu, h, label_to_name(cantor, x), k)) for x in off_A]
    checks.append(into_A_checks(A, values, k))

    whole = ClosedName.whole(cantor)
    B = closed_fixture(cantor, [("0", "1/2")])
    system = dugundji_disjoint_Rp(whole, B)
    Dc = system.as_system()
    chi = char_partition(system.family, PadicField(3), space=cantor)
    char_theta = theta(B, Dc, chi, h)
    E = retraction_Ep(whole, B)
    checks.append(theta_agreement_checks(
        char_theta, lambda x: h.evaluate(E.evaluate(x)), off_A, cantor, k, "theta-char-equals-h-after-E'"
    ))
    return checks


SUITES = ("kernel", "padic-field", "convexity", "paracompact", "dugundji", "retraction", "theta", "weihrauch")


def run_suite(name: str, seed: int, trials: Optional[int] = None, p: Optional[int] = None) -> AuditReport:
    """Run one named verify suite; ``all`` runs every suite into one report.

    ``padic-field`` covers ℚ_2, ℚ_3 and ℚ_5 with 500 samples each unless ``p`` or
    ``trials`` narrow it.
    """
    rng = random.Random(seed)
    if name == "all":
        report = AuditReport(command="verify all", seed=seed)
        for suite in SUITES:
            report.add(run_suite(suite, seed, trials, p).checks)
        return report
    logger.info("verify %s seed=%d trials=%s", name, seed, trials)
    primes = (p,) if p is not None else PADIC_PRIMES
    if name == "kernel":
        checks = kernel_suite(trials or 200, rng)
    elif name == "padic-field":
        checks = padic_suite(primes, trials or 500, rng)
    elif name == "convexity":
        checks = convexity_suite(p or 3, trials or 200, rng)
    elif name == "paracompact":
        checks = paracompact_suite()
    elif name == "dugundji":
        checks = dugundji_suite()
    elif name == "retraction":
        checks = retraction_suite()
    elif name == "theta":
        checks = theta_suite()
    elif name == "weihrauch":
        checks = weihrauch_suite()
    else:
        raise ToolkitError(f"unknown suite {name!r}")
    space = None
    if name == "padic-field":
        space = ",".join(f"qp:{q}" for q in primes)
    elif name == "convexity":
        space = f"qp:{p or 3}"
    return build_report(f"verify {name}", seed, space, checks)


def build_report(command: str, seed: int, space: Optional[str], checks: List[AuditCheck]) -> AuditReport:
    return AuditReport(command=command, seed=seed, space=space).add(checks)
