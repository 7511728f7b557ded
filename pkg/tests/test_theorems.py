import json

import pytest

from colorweyl import CERTIFIED_FALSE, ConstructionError, Verdict, make_field
from colorweyl.report import emit_report
from colorweyl.theorems import (
    CHECK_ORDER,
    Instance,
    _with_hypothesis,
    h2n_instance,
    run_check,
    run_checks,
    tensor_counterexample_instance,
    truncated_witt_instance,
)


def dims(rec):
    return rec.dims


def test_center_check(witt, h2, exceptional):
    for inst in (witt, h2, exceptional):
        rec = run_check(inst, "2.1")
        assert rec.verdict.is_true
        assert rec.dims["dim_center"] == rec.dims["dim_F1"] == 1
        assert rec.dims["dim_A_meet_ADD"] == 0


def test_center_check_with_larger_invariants(tensor):
    rec = run_check(tensor, "2.1")
    assert rec.verdict.is_true and rec.dims["dim_center"] == 3
    assert "nontrivial_invariants" in rec.flags


def test_simplicity_equivalence(witt, h2, tensor):
    for inst in (witt, h2):
        rec = run_check(inst, "2.2")
        assert rec.verdict.is_true
        assert {"A_d_simple_certified_true", "AD_graded_simple_certified_true"} <= set(rec.flags)
    rec = run_check(tensor, "2.2")
    assert rec.verdict.is_true
    assert {"A_d_simple_certified_false", "AD_graded_simple_certified_false"} <= set(rec.flags)
    assert rec.verdict.witness["d_stable_ideal"]["seed"] == [["s", "1"]]
    assert rec.verdict.witness["AD_ideal"]["seed"] == [["s", "1"]]


def test_freeness_check(witt, h2, h3, tensor):
    for inst, size in ((witt, 9), (h2, 16), (h3, 64)):
        rec = run_check(inst, "3.2")
        assert rec.verdict.is_true and rec.dims["rank"] == rec.dims["dim_AD"] == size
    rec = run_check(tensor, "3.2")
    assert rec.verdict.is_true
    assert "hypothesis_violated" in rec.flags and "conclusion_certified_true" in rec.flags


def test_derived_structure(witt, h2, exceptional):
    rec = run_check(witt, "3.9")
    assert rec.verdict.is_true
    assert rec.dims["dim_W"] == rec.dims["dim_W_predicted"] == 8
    assert rec.dims["dim_DA"] == 2 and rec.dims["dim_quotient"] == 7
    rec = run_check(h2, "3.9")
    assert rec.verdict.is_true
    assert (rec.dims["dim_W"], rec.dims["dim_quotient"]) == (15, 14)
    rec = run_check(exceptional, "3.9")
    assert rec.verdict.is_true
    assert "exceptional_shape" in rec.flags and "quotient_simple_certified_false" in rec.flags
    assert rec.dims["dim_W"] == 3 and rec.dims["dim_quotient"] == 2


def test_exceptional_W_is_one_t_d(exceptional):
    AD = exceptional.AD
    labels = sorted(AD.labels[r.nonzero()[0][0]] for r in exceptional.W.rows)
    assert labels == ["1", "d", "t"]
    assert all(len(r.nonzero()[0]) == 1 for r in exceptional.W.rows)


def test_derived_structure_hypothesis_violated(tensor):
    rec = run_check(tensor, "3.9")
    assert rec.verdict.is_true
    assert "hypothesis_violated" in rec.flags
    assert "conclusion_certified_false" in rec.flags
    assert rec.verdict.witness["conclusion"]["quotient_ideal"]["closure_dim"] < rec.dims["dim_quotient"]


def test_A_and_Ad_in_W(witt, h2, exceptional):
    for inst in (witt, h2):
        rec = run_check(inst, "3.6")
        assert rec.verdict.is_true and rec.dims["Ad_missing"] == 0 and rec.dims["A_missing"] == 0
    rec = run_check(exceptional, "3.6")
    assert rec.verdict.is_true and "derivation_part_skipped" in rec.flags
    # t*d is indeed outside W here
    assert rec.dims["Ad_missing_unchecked"] == 1


def test_top_coefficient(finite_corpus):
    for inst in finite_corpus.values():
        rec = run_check(inst, "3.18")
        assert rec.dims["violations"] == 0 and rec.dims["pairs_checked"] > 0
        assert "binomial_identity_bypassed" in rec.flags


def test_infinite_index_set_paths(rational_weyl):
    with pytest.raises(ConstructionError) as e:
        run_check(rational_weyl, "3.9")
    assert e.value.code == "MISSING_CUTOFF"
    with pytest.raises(ConstructionError) as e:
        run_check(rational_weyl, "3.2")
    assert e.value.code == "MISSING_CUTOFF"
    with pytest.raises(ConstructionError) as e:
        run_check(rational_weyl, "2.1")
    assert e.value.code == "INFINITE_INDEX_SET"
    rec = run_check(rational_weyl, "3.9", cutoff=4)
    assert rec.verdict.is_evidence and rec.dims["unresolved"] == 0 and rec.dims["targets"] == 15
    rec = run_check(rational_weyl, "3.2", cutoff=4)
    assert rec.verdict.is_evidence and rec.dims["rank"] == rec.dims["expected_rank"] == 15


def test_with_hypothesis_folding():
    bad = Verdict(CERTIFIED_FALSE, witness={"seed": 1})
    flags = []
    v = _with_hypothesis(bad, Verdict(CERTIFIED_FALSE, witness={"x": 1}), flags)
    assert v.is_true and flags == ["hypothesis_violated", "conclusion_certified_false"]
    flags = []
    v = _with_hypothesis(Verdict("evidence", trials=5), Verdict(CERTIFIED_FALSE, witness={"x": 1}), flags)
    assert v.is_evidence and flags == ["hypothesis_evidence_only"]
    flags = []
    v = _with_hypothesis(None, Verdict("certified_true"), flags)
    assert v.is_true and flags == ["hypothesis_not_checked"]


def test_predicted_W_matches_on_simple_instances(witt, h2, h3):
    for inst in (witt, h2, h3):
        assert inst.d_simplicity().status != CERTIFIED_FALSE
        expected = inst.algebra.dim * (inst.jset.size - 1) + inst.DA.dim
        assert inst.W.dim == expected


def test_exceptional_detector(finite_corpus, h3, mixed_ctx):
    from colorweyl.theorems import exceptional_instance
    fired = {name for name, inst in finite_corpus.items() if inst.exceptional_shape}
    assert fired == {"exceptional"}
    assert not h3.exceptional_shape
    mixed = Instance(mixed_ctx.algebra, mixed_ctx.dspace, "mixed")
    assert not mixed.exceptional_shape
    assert exceptional_instance(make_field("gf", 5)).exceptional_shape


def test_h2n_over_rationals_has_same_dimensions(h2, h2_rational):
    a = run_check(h2, "3.9").dims
    b = run_check(h2_rational, "3.9", trials=20).dims
    for key in ("dim_A", "dim_AD", "dim_W", "dim_W_predicted", "dim_quotient"):
        assert a[key] == b[key]


def test_report_determinism_and_order(witt):
    sel = ["3.18", "2.1", ("3.9", {"budget": 10**6})]
    r1 = run_checks(witt, sel, rng_seed=4)
    r2 = run_checks(truncated_witt_instance(), sel, rng_seed=4)
    assert [c.id for c in r1.checks] == ["2.1", "3.9", "3.18"]
    assert emit_report(r1, "json") == emit_report(r2, "json")
    payload = json.loads(emit_report(r1, "json"))
    assert set(payload) == {"instance", "checks", "rng_seed", "versions"}
    assert set(payload["checks"][0]) >= {"id", "paper_ref", "verdict", "dims", "flags"}


def test_exit_codes(witt, rational_weyl, monkeypatch):
    assert run_checks(witt, CHECK_ORDER).exit_code == 0
    assert run_checks(rational_weyl, [("3.9", {"cutoff": 2})]).exit_code == 3
    assert run_checks(witt, []).exit_code == 0
    from colorweyl import theorems
    ref, _ = theorems.CHECKS["2.1"]
    monkeypatch.setitem(theorems.CHECKS, "2.1", (ref, lambda inst, **kw: theorems.CheckRecord(
        "2.1", "", Verdict(CERTIFIED_FALSE, witness={"rule": "forced"}))))
    assert run_checks(witt, ["2.1"]).exit_code == 1


def test_corpus_builder_errors():
    with pytest.raises(ConstructionError) as e:
        h2n_instance(1)
    assert e.value.code == "N_TOO_SMALL"
    with pytest.raises(ConstructionError) as e:
        tensor_counterexample_instance(make_field("rational"))
    assert e.value.code == "NEEDS_FINITE_FIELD"
    with pytest.raises(ConstructionError):
        run_check(truncated_witt_instance(), "9.9")
