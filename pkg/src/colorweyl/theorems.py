"""Structural checks on a concrete pair (A, D) and the built-in instance corpus.

Every check tests its hypotheses instead of assuming them. A record's verdict
says whether the instance is consistent with the statement: a conclusion that
fails while a hypothesis is also violated is consistent, and is flagged.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    DerivationSpace,
    GradedAlgebra,
    coordinate_derivation,
    free_truncated_algebra,
    graded_D_simplicity,
    invariants_F1,
    make_D,
)
from .foundation import (
    CERTIFIED_FALSE,
    CERTIFIED_TRUE,
    EVIDENCE,
    Bicharacter,
    ConstructionError,
    Field,
    Grading,
    Verdict,
    make_field,
    super_bicharacter,
    trivial_bicharacter,
)
from .liecolor import (
    LieColorAlgebra,
    assoc_graded_simplicity,
    center,
    derived_subspace,
    graded_simplicity,
    lieify,
    quotient,
    restrict,
)
from .linalg import Span, SubspaceBasis, from_span, intersect, rank, subspace
from .weyl import (
    DEFAULT_SIZE_CAP,
    IndexSet,
    WeylAlgebra,
    WeylContext,
    WeylElement,
    bracket,
    freeness_check,
    freeness_check_cutoff,
    full_matrix_certificate,
    index_set,
    materialize_AD,
    script_D,
)

DEFAULT_BUDGET = 10**6
DEFAULT_TRIALS = 200
DEFAULT_CUTOFF = 4


class Instance:
    """A pair (A, D) with lazily computed derived objects.

    ``window`` marks polynomial-window mode: ``algebra`` is then an envelope
    truncation of a polynomial algebra and ``window`` lists the basis indices
    whose products are still exact there.
    """

    def __init__(
        self,
        algebra: GradedAlgebra,
        D: DerivationSpace,
        name: str = "instance",
        window: list[int] | None = None,
        size_cap: int = DEFAULT_SIZE_CAP,
    ):
        self.algebra = algebra
        self.D = D
        self.name = name
        self.window = window
        self.size_cap = size_cap
        self._d_simple: dict = {}
        self._ad_simple: dict = {}
        self._window_bounds: list | None = None

    @property
    def field(self) -> Field:
        return self.algebra.field

    @property
    def bichar(self) -> Bicharacter:
        return self.algebra.bichar

    @property
    def dim_A(self) -> int:
        return len(self.window) if self.window is not None else self.algebra.dim

    @cached_property
    def F1(self) -> SubspaceBasis:
        return invariants_F1(self.algebra, self.D)

    @cached_property
    def script_D(self) -> DerivationSpace:
        if self.window is not None:
            return self.D
        return script_D(self.algebra, self.D, self.F1)

    @cached_property
    def jset(self) -> IndexSet:
        return index_set(self.script_D, self.field)

    @cached_property
    def ctx(self) -> WeylContext:
        return WeylContext(self.algebra, self.script_D, self.jset)

    def require_finite(self):
        if not self.jset.finite:
            raise ConstructionError(
                "INFINITE_INDEX_SET",
                "this check needs a finite index set (even derivations in characteristic 0 give an infinite one)",
            )

    @cached_property
    def AD(self) -> WeylAlgebra:
        self.require_finite()
        return materialize_AD(self.ctx, self.size_cap)

    @cached_property
    def lie(self) -> LieColorAlgebra:
        return lieify(self.AD)

    @cached_property
    def W(self) -> SubspaceBasis:
        return derived_subspace(self.lie)

    @cached_property
    def Z(self) -> SubspaceBasis:
        return center(self.lie)

    @cached_property
    def F1_in_AD(self) -> SubspaceBasis:
        AD = self.AD
        rows = []
        for r in self.F1.rows:
            v = self.field.zeros(AD.dim)
            v[AD.block(self.jset.elements()[0])] = r
            rows.append(v)
        return subspace(self.field, "L", rows, AD.colors)

    @cached_property
    def DA(self) -> SubspaceBasis:
        """Span of d(b) over the basis of script D and the basis of A."""
        f = self.field
        vecs = [M[:, j] for M in self.script_D.matrices for j in range(self.algebra.dim)]
        vecs = [v for v in vecs if np.any(v)]
        return subspace(f, "A", vecs, self.algebra.colors)

    def d_simplicity(self, budget: int = DEFAULT_BUDGET, trials: int = DEFAULT_TRIALS, rng_seed: int = 0) -> Verdict:
        key = (budget, trials, rng_seed)
        if key not in self._d_simple:
            self._d_simple[key] = graded_D_simplicity(self.algebra, self.D, budget, trials, rng_seed)
        return self._d_simple[key]

    def AD_simplicity(self, budget: int = DEFAULT_BUDGET, trials: int = DEFAULT_TRIALS, rng_seed: int = 0) -> Verdict:
        """Graded simplicity of A[D]; a bijective operator map settles it without seed enumeration."""
        key = (budget, trials, rng_seed)
        if key not in self._ad_simple:
            cert = full_matrix_certificate(self.AD)
            if cert is None:
                cert = assoc_graded_simplicity(self.AD, budget, trials, rng_seed)
            self._ad_simple[key] = cert
        return self._ad_simple[key]

    @cached_property
    def exceptional_shape(self) -> bool:
        """A = F1 + F1*t with t odd and script D spanned by one odd derivation."""
        b, A, SD, F1 = self.bichar, self.algebra, self.script_D, self.F1
        return (
            self.window is None
            and len(SD) == 1
            and b.is_odd(SD.colors[0])
            and A.dim == 2 * F1.dim
            and not any(b.is_odd(c) for c in F1.colors)
            and any(b.is_odd(c) for c in A.colors)
        )

    @cached_property
    def nontrivial_invariants(self) -> bool:
        """Degree-zero invariants bigger than the scalars."""
        zero = self.bichar.grading.zero
        return sum(1 for c in self.F1.colors if c == zero) > 1

    def describe(self) -> dict:
        g = self.bichar.grading
        A = self.algebra
        gens = A.generators or []
        if self.window is not None:
            bounds = self._window_bounds
            gens = [(n, c, bd) for (n, c, _), bd in zip(gens, bounds)]
        return {
            "name": self.name,
            "field": self.field.name,
            "group": {"free_rank": g.free_rank, "torsion": list(g.torsion_moduli)},
            "generators": [{"name": n, "color": list(c), "bound": bd} for n, c, bd in gens],
            "D": list(self.D.names),
            "dim_A": self.dim_A,
            "polynomial_window": self.window is not None,
        }


# -- reports -------------------------------------------------------------

@dataclass
class CheckRecord:
    id: str
    paper_ref: str
    verdict: Verdict
    dims: dict = dc_field(default_factory=dict)
    flags: list = dc_field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "paper_ref": self.paper_ref,
            "verdict": self.verdict.status,
            "dims": dict(self.dims),
        }
        if self.verdict.witness is not None:
            out["witness"] = self.verdict.witness
        out["flags"] = sorted(self.flags)
        return out


@dataclass
class Report:
    instance: dict
    checks: list
    rng_seed: int = 0

    @property
    def exit_code(self) -> int:
        statuses = [c.verdict.status for c in self.checks]
        if CERTIFIED_FALSE in statuses:
            return 1
        if EVIDENCE in statuses:
            return 3
        return 0


def _with_hypothesis(hyp: Verdict | None, concl: Verdict, flags: list) -> Verdict:
    """Fold a hypothesis verdict into the record verdict."""
    if hyp is None:
        flags.append("hypothesis_not_checked")
        return concl
    if hyp.is_false:
        flags.append("hypothesis_violated")
        flags.append(f"conclusion_{concl.status}")
        return Verdict(CERTIFIED_TRUE, witness={"hypothesis": hyp.witness, "conclusion": concl.witness}
                       if concl.witness is not None else {"hypothesis": hyp.witness})
    if hyp.is_evidence:
        flags.append("hypothesis_evidence_only")
        if concl.is_false:
            return Verdict(EVIDENCE, witness=concl.witness, trials=hyp.trials)
    return concl


def _hypothesis(inst: Instance, budget: int, trials: int, rng_seed: int) -> Verdict | None:
    if inst.window is not None:
        return None
    return inst.d_simplicity(budget, trials, rng_seed)


def _vector_label(L: LieColorAlgebra, v: np.ndarray) -> str:
    return L.format(v)


def check_center(inst: Instance, **_) -> CheckRecord:
    inst.require_finite()
    f, AD = inst.field, inst.AD
    nA = inst.algebra.dim
    ops = AD.basis_operators.reshape(AD.dim, -1)
    r_a, r_rest, r_all = rank(f, ops[:nA]), rank(f, ops[nA:]), rank(f, ops)
    meet = r_a + r_rest - r_all
    Z, F1 = inst.Z, inst.F1_in_AD
    dims = {"dim_AD": AD.dim, "dim_F1": F1.dim, "dim_center": Z.dim, "dim_A_meet_ADD": meet}
    if meet:
        return CheckRecord("2.1", "", Verdict(CERTIFIED_FALSE, witness={"rule": "A_meets_ADD", "dim": meet}), dims)
    if Z != F1:
        zs, fs = Z.span(f), F1.span(f)
        extra = next((r for r in Z.rows if not fs.contains(r)), None)
        missing = next((r for r in F1.rows if not zs.contains(r)), None)
        wit = {"rule": "center_differs"}
        if extra is not None:
            wit["central_not_invariant"] = inst.lie.format(extra)
        if missing is not None:
            wit["invariant_not_central"] = inst.lie.format(missing)
        return CheckRecord("2.1", "", Verdict(CERTIFIED_FALSE, witness=wit), dims)
    return CheckRecord("2.1", "", Verdict(CERTIFIED_TRUE), dims)


def check_simplicity_equivalence(
    inst: Instance, budget: int = DEFAULT_BUDGET, trials: int = DEFAULT_TRIALS, rng_seed: int = 0, **_
) -> CheckRecord:
    inst.require_finite()
    dv = inst.d_simplicity(budget, trials, rng_seed)
    av = inst.AD_simplicity(budget, trials, rng_seed)
    dims = {"dim_A": inst.algebra.dim, "dim_AD": inst.AD.dim,
            "closures_A": dv.detail.get("closures", 0), "closures_AD": av.detail.get("closures", 0)}
    flags = [f"A_d_simple_{dv.status}", f"AD_graded_simple_{av.status}"]
    if av.detail.get("rule") == "full_matrix_algebra":
        flags.append("AD_full_matrix_algebra")
    wit = {}
    if dv.witness is not None:
        wit["d_stable_ideal"] = dv.witness
    if av.witness is not None:
        wit["AD_ideal"] = av.witness
    wit = wit or None
    if dv.is_evidence or av.is_evidence:
        if dv.status != av.status and not (dv.is_evidence and av.is_evidence):
            # one side certified false, the other only sampled: the sample missed
            certified = dv if not dv.is_evidence else av
            if certified.is_false:
                flags.append("sampling_missed_ideal")
        v = Verdict(EVIDENCE, witness=wit, trials=max(dv.trials, av.trials, 1))
    elif dv.status == av.status:
        v = Verdict(CERTIFIED_TRUE, witness=wit)
    else:
        v = Verdict(CERTIFIED_FALSE, witness={"rule": "REFUTATION", **(wit or {})})
    return CheckRecord("2.2", "", v, dims, flags)


def check_freeness(
    inst: Instance,
    cutoff: int | None = None,
    budget: int = DEFAULT_BUDGET,
    trials: int = DEFAULT_TRIALS,
    rng_seed: int = 0,
    **_,
) -> CheckRecord:
    flags: list = []
    if inst.jset.finite:
        concl = freeness_check(inst.ctx)
        size = inst.jset.size
        dims = {"dim_A": inst.dim_A, "index_set_size": size, "rank": concl.detail["rank"],
                "dim_AD": inst.dim_A * size}
    else:
        if cutoff is None:
            raise ConstructionError("MISSING_CUTOFF", "infinite index set: supply a cutoff level")
        res = freeness_check_cutoff(inst.ctx, cutoff, coefficients=inst.window)
        dims = {"dim_A": inst.dim_A, "cutoff": cutoff, "index_count": res.detail["index_count"],
                "rank": res.detail["rank"], "expected_rank": res.detail["expected_rank"]}
        flags.append("level_cutoff")
        if res.is_true:
            concl = Verdict(EVIDENCE, trials=res.detail["index_count"])
        elif inst.window is not None:
            # a relation on the envelope need not survive on the polynomial algebra
            flags.append("inconclusive_on_envelope")
            concl = Verdict(EVIDENCE, witness=res.witness, trials=res.detail["index_count"])
        else:
            concl = res
    hyp = _hypothesis(inst, budget, trials, rng_seed)
    return CheckRecord("3.2", "", _with_hypothesis(hyp, concl, flags), dims, flags)


def _predicted_W(inst: Instance) -> SubspaceBasis:
    AD, f = inst.AD, inst.field
    gamma = inst.jset.max_index
    rows = []
    for alpha in AD.indices:
        if alpha == gamma:
            for r in inst.DA.rows:
                v = f.zeros(AD.dim)
                v[AD.block(alpha)] = r
                rows.append(v)
        else:
            for i in range(inst.algebra.dim):
                rows.append(AD.basis(AD.index(i, alpha)))
    return subspace(f, "L", rows, AD.colors)


def derived_quotient(inst: Instance) -> LieColorAlgebra:
    """W / (F1 & W) as a Lie color algebra."""
    f, W = inst.field, inst.W
    LW = restrict(inst.lie, W)
    meet = intersect(f, W.rows, inst.F1_in_AD.rows)
    coords = meet[:, list(W.pivots)] if len(meet) else f.zeros((0, W.dim))
    ideal = from_span(Span(f, W.dim, coords if len(coords) else None), "L", LW.colors)
    return quotient(LW, ideal)


def check_derived_structure(
    inst: Instance,
    cutoff: int | None = None,
    budget: int = DEFAULT_BUDGET,
    trials: int = DEFAULT_TRIALS,
    rng_seed: int = 0,
    **_,
) -> CheckRecord:
    hyp = _hypothesis(inst, budget, trials, rng_seed)
    flags: list = []
    if not inst.jset.finite:
        if cutoff is None:
            raise ConstructionError("MISSING_CUTOFF", "infinite index set: supply a cutoff level")
        concl, dims = _derived_equals_all(inst, cutoff)
        flags.append("level_cutoff")
        return CheckRecord("3.9", "", _with_hypothesis(hyp, concl, flags), dims, flags)

    f, AD, W = inst.field, inst.AD, inst.W
    pred = _predicted_W(inst)
    Q = derived_quotient(inst)
    dims = {
        "dim_A": inst.algebra.dim,
        "dim_AD": AD.dim,
        "dim_W": W.dim,
        "dim_W_predicted": pred.dim,
        "dim_DA": inst.DA.dim,
        "dim_F1": inst.F1.dim,
        "dim_quotient": Q.dim,
    }
    if AD.dim <= 4 * max(inst.F1.dim, 1):
        flags.append("small_over_center")
    witness = {}
    shape_ok = pred == W
    if not shape_ok:
        ws, ps = W.span(f), pred.span(f)
        extra = next((r for r in W.rows if not ps.contains(r)), None)
        missing = next((r for r in pred.rows if not ws.contains(r)), None)
        witness["shape"] = {
            "in_W_not_predicted": inst.lie.format(extra) if extra is not None else None,
            "predicted_not_in_W": inst.lie.format(missing) if missing is not None else None,
        }
    qv = graded_simplicity(Q, budget, trials, rng_seed)
    dims["quotient_closures"] = qv.detail.get("closures", 0)
    flags.append(f"quotient_simple_{qv.status}")
    if inst.exceptional_shape:
        flags.append("exceptional_shape")
        simple_part = (
            Verdict(CERTIFIED_TRUE) if qv.is_false
            else Verdict(CERTIFIED_FALSE, witness={"rule": "exceptional_quotient_simple"}) if qv.is_true
            else Verdict(EVIDENCE, trials=qv.trials)
        )
        if qv.is_false:
            witness["quotient_ideal"] = qv.witness
    else:
        simple_part = qv
        if qv.witness is not None:
            witness["quotient_ideal"] = qv.witness
    if not shape_ok:
        concl = Verdict(CERTIFIED_FALSE, witness=witness)
    elif simple_part.is_false:
        concl = Verdict(CERTIFIED_FALSE, witness=witness)
    elif simple_part.is_evidence:
        concl = Verdict(EVIDENCE, witness=witness or None, trials=simple_part.trials)
    else:
        concl = Verdict(CERTIFIED_TRUE, witness=witness or None)
    return CheckRecord("3.9", "", _with_hypothesis(hyp, concl, flags), dims, flags)


def _derived_equals_all(inst: Instance, cutoff: int) -> tuple[Verdict, dict]:
    """Single brackets of generators up to level cutoff+1 must span every A d^alpha, |alpha| <= cutoff."""
    ctx, f = inst.ctx, inst.field
    coeffs = inst.window if inst.window is not None else list(range(inst.algebra.dim))
    n = inst.algebra.dim
    gens = [WeylElement.basis(ctx, i, beta) for beta in inst.jset.elements(cutoff + 1) for i in coeffs]
    positions: dict = {}
    rows = []

    def encode(x: WeylElement) -> dict:
        for alpha in x.terms:
            if alpha not in positions:
                positions[alpha] = len(positions)
        return x.terms

    encoded = []
    for k, x in enumerate(gens):
        for y in gens[k:]:
            z = bracket(x, y)
            if z:
                encoded.append(encode(z))
    targets = [(i, alpha) for alpha in inst.jset.elements(cutoff) for i in coeffs]
    for _, alpha in targets:
        if alpha not in positions:
            positions[alpha] = len(positions)
    width = n * len(positions)

    def flat(terms: dict) -> np.ndarray:
        v = f.zeros(width)
        for alpha, u in terms.items():
            k = positions[alpha] * n
            v[k : k + n] = u
        return v

    span = Span(f, width, np.array([flat(t) for t in encoded]) if encoded else None)
    unresolved = []
    for i, alpha in targets:
        if not span.contains(flat({alpha: inst.algebra.basis(i)})):
            unresolved.append(ctx.label(i, alpha))
    dims = {
        "dim_A": inst.dim_A,
        "cutoff": cutoff,
        "generators": len(gens),
        "targets": len(targets),
        "bracket_span_dim": span.dim,
        "unresolved": len(unresolved),
    }
    witness = {"unresolved": unresolved[:10]} if unresolved else None
    return Verdict(EVIDENCE, witness=witness, trials=len(targets)), dims


def check_A_and_Ad_in_W(
    inst: Instance, budget: int = DEFAULT_BUDGET, trials: int = DEFAULT_TRIALS, rng_seed: int = 0, **_
) -> CheckRecord:
    inst.require_finite()
    f, AD, W = inst.field, inst.AD, inst.W
    span = W.span(f)
    nA = inst.algebra.dim
    zero = inst.jset.elements()[0]
    flags: list = []
    missing = [AD.labels[AD.index(i, zero)] for i in range(nA) if not span.contains(AD.basis(AD.index(i, zero)))]
    SD = inst.script_D
    hyp36 = len(SD) > 1 or any(not inst.bichar.is_odd(c) for c in SD.colors)
    dims = {"dim_W": W.dim, "A_missing": len(missing)}
    d_missing: list = []
    unit_d = [tuple(int(k == i) for k in range(len(SD))) for i in range(len(SD))]
    for alpha in unit_d:
        if not inst.jset.contains(alpha):
            continue
        miss = [AD.labels[AD.index(i, alpha)] for i in range(nA) if not span.contains(AD.basis(AD.index(i, alpha)))]
        d_missing.extend(miss)
    if hyp36:
        dims["Ad_missing"] = len(d_missing)
    else:
        flags.append("derivation_part_skipped")
        dims["Ad_missing_unchecked"] = len(d_missing)
    bad = missing + (d_missing if hyp36 else [])
    concl = Verdict(CERTIFIED_FALSE, witness={"not_in_W": bad[:10]}) if bad else Verdict(CERTIFIED_TRUE)
    hyp = _hypothesis(inst, budget, trials, rng_seed)
    return CheckRecord("3.6", "", _with_hypothesis(hyp, concl, flags), dims, flags)


def check_top_coefficient(
    inst: Instance, budget: int = DEFAULT_BUDGET, trials: int = DEFAULT_TRIALS, rng_seed: int = 0, **_
) -> CheckRecord:
    inst.require_finite()
    f, AD, L = inst.field, inst.AD, inst.lie
    J = inst.jset
    gamma = J.max_index
    nA = inst.algebra.dim
    da = inst.DA.span(f)
    gblock = AD.block(gamma)
    pairs = violations = 0
    first = None
    for alpha in AD.indices:
        for beta in AD.indices:
            diff = tuple(a + b - g for a, b, g in zip(alpha, beta, gamma))
            if not J.contains(diff) or not any(diff):
                continue
            coeffs = L.table[AD.block(alpha), AD.block(beta), gblock].reshape(nA * nA, nA)
            red = da.reduce(coeffs)
            bad = np.flatnonzero(np.any(red != 0, axis=1))
            pairs += nA * nA
            violations += len(bad)
            if len(bad) and first is None:
                i, j = divmod(int(bad[0]), nA)
                first = [AD.labels[AD.index(i, alpha)], AD.labels[AD.index(j, beta)]]
    dims = {"pairs_checked": pairs, "violations": violations, "dim_DA": inst.DA.dim}
    flags = ["binomial_identity_bypassed"]
    concl = Verdict(CERTIFIED_FALSE, witness={"pair": first}) if violations else Verdict(CERTIFIED_TRUE)
    hyp = _hypothesis(inst, budget, trials, rng_seed)
    return CheckRecord("3.18", "", _with_hypothesis(hyp, concl, flags), dims, flags)


CHECKS: dict[str, tuple[str, Callable]] = {
    "2.1": ("center of A[D] equals the invariants F1, and A meets A[D]D trivially", check_center),
    "2.2": ("A[D] is graded simple exactly when A is graded D-simple", check_simplicity_equivalence),
    "3.2": ("A[D] is a free A-module on the monomials d^alpha", check_freeness),
    "3.6": ("A and A*d lie in the derived ideal W for every basis derivation d", check_A_and_Ad_in_W),
    "3.9": ("W is the predicted span and W/F1 is simple outside the exceptional shape", check_derived_structure),
    "3.18": ("the top coefficient of every bracket lies in span D(A)", check_top_coefficient),
}
CHECK_ORDER = ["2.1", "2.2", "3.2", "3.6", "3.9", "3.18"]


def run_check(inst: Instance, check_id: str, rng_seed: int = 0, **params) -> CheckRecord:
    if check_id not in CHECKS:
        raise ConstructionError("UNKNOWN_CHECK", f"unknown check {check_id!r}; choose from {CHECK_ORDER}")
    ref, fn = CHECKS[check_id]
    t0 = time.perf_counter()
    rec = fn(inst, rng_seed=rng_seed, **params)
    rec.paper_ref = ref
    if inst.nontrivial_invariants:
        rec.flags.append("nontrivial_invariants")
    rec.seconds = time.perf_counter() - t0
    return rec


def run_checks(inst: Instance, selection: Sequence, rng_seed: int = 0) -> Report:
    """``selection`` holds check ids or (id, params) pairs; records follow the fixed check order."""
    items = [(s, {}) if isinstance(s, str) else (s[0], dict(s[1])) for s in selection]
    items.sort(key=lambda it: CHECK_ORDER.index(it[0]) if it[0] in CHECK_ORDER else len(CHECK_ORDER))
    records = [run_check(inst, cid, rng_seed=rng_seed, **params) for cid, params in items]
    return Report(inst.describe(), records, rng_seed)


# -- corpus --------------------------------------------------------------

def _coordinate_D(A: GradedAlgebra, names: Sequence[str] | None = None, indices=None) -> DerivationSpace:
    indices = range(len(A.generators)) if indices is None else indices
    ders = []
    for k, i in enumerate(indices):
        d = coordinate_derivation(A, i)
        if names is not None:
            d.name = names[k]
        ders.append(d)
    return make_D(A, ders)


def h2n_instance(n: int, field: Field | None = None) -> Instance:
    """Exterior algebra on n odd generators with all coordinate derivations."""
    if n < 2:
        raise ConstructionError("N_TOO_SMALL", f"n must be at least 2, got {n}")
    field = field or make_field("gf", 3)
    A = free_truncated_algebra(field, super_bicharacter(field), [(f"x{i + 1}", (1,), 2) for i in range(n)])
    return Instance(A, _coordinate_D(A, [f"d{i + 1}" for i in range(n)]), f"h2n_n{n}")


def truncated_witt_instance(field: Field | None = None) -> Instance:
    """F_p[t]/(t^p) with d/dt."""
    field = field or make_field("gf", 3)
    if not field.characteristic:
        raise ConstructionError("NEEDS_FINITE_FIELD", "the truncated polynomial instance needs characteristic p")
    A = free_truncated_algebra(field, trivial_bicharacter(field), [("t", (), field.characteristic)])
    return Instance(A, _coordinate_D(A, ["d"]), "truncated_witt")


def exceptional_instance(field: Field | None = None) -> Instance:
    """F[t]/(t^2) with t odd and the odd derivation d/dt."""
    field = field or make_field("gf", 3)
    A = free_truncated_algebra(field, super_bicharacter(field), [("t", (1,), 2)])
    return Instance(A, _coordinate_D(A, ["d"]), "exceptional")


def tensor_counterexample_instance(field: Field | None = None) -> Instance:
    """F_p[t]/(t^p) (x) F_p[s]/(s^p) with only d/dt; the ideal (s) is D-stable."""
    field = field or make_field("gf", 3)
    if not field.characteristic:
        raise ConstructionError("NEEDS_FINITE_FIELD", "the tensor instance needs characteristic p")
    p = field.characteristic
    A = free_truncated_algebra(field, trivial_bicharacter(field), [("t", (), p), ("s", (), p)])
    return Instance(A, _coordinate_D(A, ["d"], indices=[0]), "tensor_counterexample")


def window_instance(
    field: Field,
    bichar: Bicharacter,
    gens: Sequence[tuple],
    der_gens: Sequence[int],
    names: Sequence[str] | None = None,
    name: str = "polynomial_window",
) -> Instance:
    """Polynomial algebra in characteristic 0, read through a degree window.

    Even generator bounds are window sizes; products of window elements are
    computed exactly in an envelope truncation of bound 2b-1.
    """
    if field.characteristic:
        raise ConstructionError("WINDOW_NEEDS_CHAR_0", "polynomial windows are for characteristic 0")
    env = []
    for nm, c, b in gens:
        c = bichar.grading.color(c)
        env.append((nm, c, b if bichar.is_odd(c) else 2 * int(b) - 1))
    A = free_truncated_algebra(field, bichar, env)
    bounds = [int(b) for _, _, b in gens]
    ders = []
    for k, i in enumerate(der_gens):
        d = coordinate_derivation(A, i, validate=False)
        if names is not None:
            d.name = names[k]
        ders.append(d)
    D = DerivationSpace(A, ders, True)
    window = [k for k, e in enumerate(A.exponents) if all(x < b for x, b in zip(e, bounds))]
    inst = Instance(A, D, name, window=window)
    inst._window_bounds = bounds
    return inst


def rational_weyl_instance(bound: int = 3) -> Instance:
    """Q[t] with d/dt, coefficients from the window 1, t, ..., t^(bound-1)."""
    f = make_field("rational")
    return window_instance(f, trivial_bicharacter(f), [("t", (), bound)], [0], ["d"], "rational_weyl")


CORPUS = {
    "h2n": h2n_instance,
    "truncated_witt": truncated_witt_instance,
    "exceptional": exceptional_instance,
    "tensor_counterexample": tensor_counterexample_instance,
    "rational_weyl": rational_weyl_instance,
}
