"""Acceptance criteria 1-9, each at its stated tolerance and time limit.

Every test records its outcome; a PASS/FAIL line per criterion is printed in
the terminal summary.
"""

import itertools
import time

import numpy as np
import pytest

from colorweyl import CERTIFIED_FALSE, CERTIFIED_TRUE, EVIDENCE, make_field
from colorweyl.algebra import d_stable_ideal_closure
from colorweyl.cli import main
from colorweyl.config import emit_config, example_config
from colorweyl.liecolor import assoc_graded_simplicity, graded_simplicity, lieify
from colorweyl.theorems import (
    derived_quotient,
    exceptional_instance,
    h2n_instance,
    rational_weyl_instance,
    run_check,
    tensor_counterexample_instance,
    truncated_witt_instance,
)
from colorweyl.weyl import WeylElement, bracket, leibniz_expand, operator_matrix, operator_oracle, weyl_mul

from conftest import ACCEPTANCE


def record(crit, part, ok, detail=""):
    ACCEPTANCE.append((crit, part, bool(ok), detail))
    return ok


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def checked(crit, part, cond, detail=""):
    record(crit, part, cond, detail)
    assert cond, f"criterion {crit} {part}: {detail}"


# -- 1, 2: exterior algebra family ----------------------------------------

def _h2n_dims(n, field):
    inst = h2n_instance(n, field)
    rec = run_check(inst, "3.9")
    return inst, rec


@pytest.mark.parametrize("field_name", ["gf3", "rational"])
def test_criterion_1_h2n_n2(field_name):
    field = make_field("gf", 3) if field_name == "gf3" else make_field("rational")
    (inst, rec), secs = timed(lambda: _h2n_dims(2, field))
    d = rec.dims
    dims = (inst.algebra.dim, inst.AD.dim, inst.W.dim, d["dim_quotient"])
    checked(1, f"dims over {field.name}", dims == (4, 16, 15, 14) and 14 == 2 ** (2 * 2) - 2, str(dims))
    if field_name == "gf3":
        checked(1, "quotient simplicity over F_3", "quotient_simple_certified_true" in rec.flags
                and rec.verdict.status == CERTIFIED_TRUE, str(rec.flags))
    checked(1, f"runtime over {field.name}", secs < 5, f"{secs:.2f}s < 5s")


def test_criterion_2_h2n_n3():
    (inst, rec), secs = timed(lambda: _h2n_dims(3, make_field("gf", 3)))
    q = rec.dims["dim_quotient"]
    checked(2, "dim W/F1", q == 62 == 2 ** 6 - 2, str(q))
    checked(2, "simplicity recorded", rec.verdict.status in (CERTIFIED_TRUE, EVIDENCE), rec.verdict.status)
    checked(2, "runtime", secs < 60, f"{secs:.2f}s < 60s")


# -- 3: truncated polynomial ring -------------------------------------------

def test_criterion_3_truncated_witt():
    def run():
        inst = truncated_witt_instance()
        return inst, run_check(inst, "3.2"), run_check(inst, "3.9")

    (inst, free, rec), secs = timed(run)
    f, AD = inst.field, inst.AD
    unit = AD.from_element(WeylElement.one(inst.ctx))
    checked(3, "center is F*1", inst.Z.dim == 1 and inst.Z.contains(f, unit), f"dim {inst.Z.dim}")
    checked(3, "dim A[D] and rank", AD.dim == 9 and free.dims["rank"] == 9, str(free.dims))
    A = inst.algebra
    expected_DA = inst.DA.span(f)
    da_ok = inst.DA.dim == 2 and all(expected_DA.contains(A.basis(k)) for k in (0, 1))
    checked(3, "D(A) = span{1, t}", da_ok, f"dim {inst.DA.dim}")
    checked(3, "dim W = 3*2 + dim D(A)", inst.W.dim == 8 == 3 * 2 + inst.DA.dim
            and rec.dims["dim_W_predicted"] == 8, str(inst.W.dim))
    checked(3, "quotient dim 7 certified simple",
            rec.dims["dim_quotient"] == 7 and "quotient_simple_certified_true" in rec.flags, str(rec.flags))
    checked(3, "runtime", secs < 5, f"{secs:.2f}s < 5s")


# -- 4: exceptional shape -----------------------------------------------------

def test_criterion_4_exceptional():
    def run():
        inst = exceptional_instance()
        Q = derived_quotient(inst)
        return inst, Q, graded_simplicity(Q), run_check(inst, "3.9")

    (inst, Q, verdict, rec), secs = timed(run)
    f, AD = inst.field, inst.AD
    checked(4, "shape detected", inst.exceptional_shape and "exceptional_shape" in rec.flags, str(rec.flags))
    want = [AD.index(0, (0,)), AD.index(1, (0,)), AD.index(0, (1,))]
    W = inst.W.span(f)
    checked(4, "W = span{1, t, d}", inst.W.dim == 3 and all(W.contains(f.eye(AD.dim)[k]) for k in want),
            ", ".join(AD.labels[k] for k in want))
    checked(4, "quotient dim 2 and abelian", Q.dim == 2 and Q.is_abelian, f"dim {Q.dim}")
    checked(4, "simplicity certified_false", verdict.status == CERTIFIED_FALSE and verdict.witness, verdict.status)
    checked(4, "runtime", secs < 1, f"{secs:.2f}s < 1s")


# -- 5: two notions of simplicity ------------------------------------------------

@pytest.mark.parametrize("builder, expected", [
    (lambda: h2n_instance(2), CERTIFIED_TRUE),
    (lambda: h2n_instance(3), CERTIFIED_TRUE),
    (truncated_witt_instance, CERTIFIED_TRUE),
    (tensor_counterexample_instance, CERTIFIED_FALSE),
], ids=["h2n_n2", "h2n_n3", "truncated_witt", "tensor"])
def test_criterion_5_simplicity_equivalence(builder, expected):
    inst = builder()
    a_side = inst.d_simplicity()
    ad_side = inst.AD_simplicity()
    ok = a_side.status == ad_side.status == expected
    route = ad_side.detail.get("rule", "seed closure")
    detail = f"A {a_side.status}, A[D] {ad_side.status} via {route}"
    if route == "full_matrix_algebra" and inst.AD.dim <= 16:
        # small enough for the seed enumeration to confirm the shortcut
        ok = ok and assoc_graded_simplicity(inst.AD).status == expected
    if expected == CERTIFIED_FALSE:
        A, AD = inst.algebra, inst.AD
        s = A.basis(A.labels.index("s"))
        ideal = d_stable_ideal_closure(A, inst.D, s)
        ok = ok and a_side.witness["seed"] == [["s", "1"]] and ideal.contains(inst.field, s) \
            and 0 < ideal.dim < A.dim
        ok = ok and ad_side.witness["seed"] == [["s", "1"]] and ad_side.witness["closure_dim"] < AD.dim
    checked(5, inst.name, ok, detail)


# -- 6: product realised by operator composition -----------------------------------

MATERIALISED = {
    "truncated_witt": truncated_witt_instance,
    "h2n_n2_gf3": lambda: h2n_instance(2),
    "h2n_n2_rational": lambda: h2n_instance(2, make_field("rational")),
    "h2n_n3": lambda: h2n_instance(3),
    "exceptional": exceptional_instance,
    "tensor": tensor_counterexample_instance,
}


@pytest.mark.parametrize("name", MATERIALISED)
def test_criterion_6_operator_oracle(name):
    inst = MATERIALISED[name]()
    AD, f = inst.AD, inst.field
    assert AD.dim <= 256
    table_route = operator_oracle(AD)
    # independent route: normal-form products of basis elements, no structure table
    ctx = inst.ctx
    basis = [WeylElement.basis(ctx, i, alpha) for alpha in AD.indices for i in range(inst.dim_A)]
    ops = [operator_matrix(x) for x in basis]
    bad = sum(
        1 for k, l in itertools.product(range(AD.dim), repeat=2)
        if not np.array_equal(operator_matrix(weyl_mul(basis[k], basis[l])), f.matmul(ops[k], ops[l]))
    )
    ok = table_route["violations"] == 0 and table_route["pairs"] == AD.dim**2 and bad == 0
    checked(6, name, ok, f"{AD.dim**2} pairs, table route {table_route['violations']}, product route {bad}")


# -- 7: identities ----------------------------------------------------------------

IDENTITY_INSTANCES = dict(MATERIALISED, rational_weyl=rational_weyl_instance)


def _index_pairs(ctx, count, rng):
    caps = [b if b is not None else 6 for b in ctx.jset.bounds]
    for _ in range(count):
        yield (tuple(int(rng.integers(0, c + 1)) for c in caps),
               tuple(int(rng.integers(0, c + 1)) for c in caps))


def _eps_identity(inst, count=1000):
    ctx = inst.ctx
    f, b = ctx.field, ctx.bichar
    rng = np.random.default_rng(2024)
    bad = overlap_bad = corrected_bad = 0
    for a, c in _index_pairs(ctx, count, rng):
        lhs = b.eps(ctx.dcolor(a), ctx.dcolor(c))
        ratio = f(ctx.eps_plus(a, c) * f.inv(ctx.eps_plus(c, a)))
        diag = f(1)
        for col, x, y in zip(ctx.dcolors, a, c):
            diag = f(diag * f.pow(b.eps(col, col), x * y))
        if lhs != ratio:
            bad += 1
            overlap_bad += any(b.is_odd(col) and x and y for col, x, y in zip(ctx.dcolors, a, c))
        corrected_bad += lhs != f(ratio * diag)
    return bad, overlap_bad, corrected_bad


@pytest.mark.parametrize("name", IDENTITY_INSTANCES)
def test_criterion_7_eps_identity_corrected(name):
    """Exact form: the ratio of eps_plus values times the diagonal signs."""
    bad, overlap_bad, corrected = _eps_identity(IDENTITY_INSTANCES[name]())
    ok = corrected == 0 and bad == overlap_bad
    record(7, f"eps identity with diagonal signs on {name}", ok, f"1000 pairs, {corrected} violations")
    assert ok


@pytest.mark.xfail(strict=True, reason="the uncorrected identity fails when an odd derivation occurs in both indices")
@pytest.mark.parametrize("name", ["h2n_n2_gf3", "h2n_n2_rational", "h2n_n3", "exceptional"])
def test_criterion_7_eps_identity_literal_odd(name):
    bad, overlap_bad, _ = _eps_identity(IDENTITY_INSTANCES[name]())
    record(7, f"eps identity as stated on {name}", bad == 0,
           f"1000 pairs, {bad} violations, all {overlap_bad} with a shared odd derivation")
    assert bad == 0


@pytest.mark.parametrize("name", ["truncated_witt", "tensor", "rational_weyl"])
def test_criterion_7_eps_identity_literal(name):
    bad, _, _ = _eps_identity(IDENTITY_INSTANCES[name]())
    checked(7, f"eps identity as stated on {name}", bad == 0, f"1000 pairs, {bad} violations")


@pytest.mark.parametrize("name", IDENTITY_INSTANCES)
def test_criterion_7_leibniz(name):
    inst = IDENTITY_INSTANCES[name]()
    ctx, A, f = inst.ctx, inst.algebra, inst.field
    J = ctx.jset.elements() if ctx.jset.finite else ctx.jset.elements(4)
    J = [a for a in J if sum(a) <= 4]
    basis = inst.window if inst.window is not None else range(A.dim)
    homog = [A.basis(k) for k in basis]
    bad = total = 0
    for alpha in J:
        P = ctx.power(alpha)
        for x, y in itertools.product(homog, repeat=2):
            total += 1
            prod = A.mul(x, y)
            bad += not np.array_equal(leibniz_expand(ctx, alpha, x, y), f.matmul(P, prod))
    checked(7, f"higher Leibniz rule on {name}", bad == 0, f"{total} cases, {bad} violations")


@pytest.mark.parametrize("name", MATERIALISED)
def test_criterion_7_lie_axioms(name):
    inst = MATERIALISED[name]()
    algebras = {"A[D]": inst.lie, "W/F1": derived_quotient(inst), "A": lieify(inst.algebra, validate=False)}
    failures = []
    for label, L in algebras.items():
        hits = (L.grading_violation(), L.skew_violation(), L.jacobi_violation(np.random.default_rng(0)))
        if any(h is not None for h in hits):
            failures.append(label)
    checked(7, f"Lie color axioms on {name}", not failures,
            ", ".join(f"{k} dim {v.dim}" for k, v in algebras.items()) + (f"; failed {failures}" if failures else ""))


# -- 8: top coefficient of brackets -------------------------------------------------

TOP_INSTANCES = {k: MATERIALISED[k] for k in ("h2n_n2_gf3", "h2n_n2_rational", "h2n_n3", "truncated_witt", "exceptional")}


@pytest.mark.parametrize("name", TOP_INSTANCES)
def test_criterion_8_top_coefficient(name):
    inst = TOP_INSTANCES[name]()
    rec = run_check(inst, "3.18")
    ok = rec.dims["violations"] == 0 and rec.verdict.status == CERTIFIED_TRUE
    # second route: brackets of basis elements computed from normal forms
    AD, f, J, ctx = inst.AD, inst.field, inst.jset, inst.ctx
    gamma = J.max_index
    da = inst.DA.span(f)
    basis = {(i, a): WeylElement.basis(ctx, i, a) for a in AD.indices for i in range(inst.dim_A)}
    checked_pairs = bad = 0
    for (i, a), (j, b) in itertools.product(basis, repeat=2):
        diff = tuple(x + y - g for x, y, g in zip(a, b, gamma))
        if not any(diff) or not J.contains(diff):
            continue
        if AD.dim > 64 and (i + j) % 4:
            continue  # subsample on the largest instance
        coeff = bracket(basis[i, a], basis[j, b]).terms.get(gamma)
        checked_pairs += 1
        if coeff is not None and not da.contains(coeff):
            bad += 1
    ok = ok and bad == 0
    checked(8, name, ok, f"{rec.dims['pairs_checked']} pairs via table, {checked_pairs} via normal forms, "
                         f"{rec.dims['violations'] + bad} violations")


# -- 9: characteristic zero evidence ------------------------------------------------

def test_criterion_9_rational_window(tmp_path, capsys):
    inst = rational_weyl_instance()
    rec = run_check(inst, "3.9", cutoff=4)
    ok = rec.verdict.status == EVIDENCE and rec.dims["unresolved"] == 0 and rec.dims["targets"] == 15
    cfg = tmp_path / "rational_weyl.cw"
    cfg.write_text(emit_config(example_config("rational_weyl")))
    code = main(["verify", str(cfg), "--checks", "3.9"])
    capsys.readouterr()
    checked(9, "window check at level cap 5", ok and code == 3,
            f"{rec.verdict.status}, {rec.dims['targets']} targets, {rec.dims['unresolved']} unresolved, exit {code}")
