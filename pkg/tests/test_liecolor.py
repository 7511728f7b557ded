import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colorweyl import ConstructionError, LieColorAlgebra, center, derived_subspace, graded_simplicity, lieify, quotient
from colorweyl.linalg import Span, from_span, subspace
from colorweyl.liecolor import (
    assoc_graded_ideal_closure,
    assoc_graded_simplicity,
    bracket_from_assoc,
    lie_ideal_closure,
    restrict,
)
from colorweyl.theorems import derived_quotient
from colorweyl.weyl import materialize_AD


@pytest.fixture(scope="module")
def quotients(witt, h2, exceptional):
    return {"witt": derived_quotient(witt), "h2": derived_quotient(h2), "exceptional": derived_quotient(exceptional)}


@pytest.fixture(scope="module")
def lie_corpus(witt, h2, h3, exceptional, tensor, mixed_ctx, quotients):
    out = {k: inst.lie for k, inst in [("witt", witt), ("h2", h2), ("h3", h3), ("exceptional", exceptional), ("tensor", tensor)]}
    out["mixed"] = lieify(materialize_AD(mixed_ctx))
    out.update({f"{k}_quotient": q for k, q in quotients.items()})
    return out


def test_bracket_from_assoc_examples(witt, exceptional):
    W = witt.AD
    d, t, one = W.basis(W.index(0, (1,))), W.basis(W.index(1, (0,))), W.one()
    assert np.array_equal(bracket_from_assoc(W, d, t), one)
    S = exceptional.AD
    d, x = S.basis(S.index(0, (1,))), S.basis(S.index(1, (0,)))
    assert np.array_equal(bracket_from_assoc(S, d, x), S.one())
    # trivial grading: plain commutator
    u, v = W.basis(W.index(1, (1,))), W.basis(W.index(2, (0,)))
    assert np.array_equal(bracket_from_assoc(W, u, v), W.field.reduce(W.mul(u, v) - W.mul(v, u)))


def test_lieify_matches_bracket_from_assoc(h2):
    L, W = h2.lie, h2.AD
    for i, j in itertools.product(range(W.dim), repeat=2):
        assert np.array_equal(L.bracket(W.basis(i), W.basis(j)), bracket_from_assoc(W, W.basis(i), W.basis(j)))


def test_lieify_of_commutative_is_abelian(witt, h2, tensor):
    for inst in (witt, h2, tensor):
        assert lieify(inst.algebra).is_abelian
    assert witt.lie.dim == 9 and not witt.lie.is_abelian


def test_axioms_on_every_constructed_algebra(lie_corpus):
    for name, L in lie_corpus.items():
        assert L.skew_violation() is None, name
        assert L.grading_violation() is None, name
        assert L.jacobi_violation() is None, name


def test_axiom_failure_detected(F3, trivial3):
    T = F3.zeros((2, 2, 2))
    T[0, 1, 0] = 1  # [a, b] = a but [b, a] = 0
    L = LieColorAlgebra(F3, trivial3, [(), ()], T, ["a", "b"])
    with pytest.raises(ConstructionError) as e:
        L.validate()
    assert e.value.code == "AXIOM_FAILURE" and e.value.witness[0] == "skew_symmetry"
    # skew but not Jacobi: [a,b] = c, [b,c] = a, [c,a] = a
    T = F3.zeros((3, 3, 3))
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 0)]:
        T[i, j, k], T[j, i, k] = 1, 2
    with pytest.raises(ConstructionError) as e:
        LieColorAlgebra(F3, trivial3, [(), (), ()], T).validate()
    assert e.value.witness[0] == "jacobi"


def test_random_jacobi_mode(h3, monkeypatch, F3, trivial3):
    # above the exhaustive cap triples are sampled
    from colorweyl import liecolor
    monkeypatch.setattr(liecolor, "EXHAUSTIVE_TRIPLES", 10)
    assert h3.lie.jacobi_violation(np.random.default_rng(0)) is None
    T = F3.zeros((3, 3, 3))
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 0)]:
        T[i, j, k], T[j, i, k] = 1, 2
    assert LieColorAlgebra(F3, trivial3, [(), (), ()], T).jacobi_violation() is not None


def test_center(witt, h2, exceptional, tensor):
    for inst in (witt, h2, exceptional):
        Z = center(inst.lie)
        assert Z.dim == 1 and Z.rows[0][inst.AD.index(0, inst.jset.elements()[0])] == 1
    assert center(lieify(tensor.algebra)).dim == 9


def test_center_commutes(lie_corpus):
    for L in lie_corpus.values():
        Z = center(L)
        for z in Z.rows:
            for i in range(L.dim):
                assert not np.any(L.bracket(z, L.basis(i)))


def test_lie_ideal_closure_examples(witt, quotients):
    L = witt.lie
    assert lie_ideal_closure(L, L.one() if hasattr(L, "one") else L.basis(0)).dim == 1
    E = quotients["exceptional"]
    t = E.basis(E.labels.index("t"))
    assert lie_ideal_closure(E, t).dim == 1
    Q = quotients["witt"]
    for i in range(Q.dim):
        assert lie_ideal_closure(Q, Q.basis(i)).dim == Q.dim
    with pytest.raises(ConstructionError) as e:
        lie_ideal_closure(Q, Q.basis(0) * 0)
    assert e.value.code == "ZERO_SEED"


def test_closure_rejects_inhomogeneous_seed(h2):
    L = h2.lie
    odd = next(k for k, c in enumerate(L.colors) if c == (1,))
    with pytest.raises(ConstructionError) as e:
        lie_ideal_closure(L, L.basis(0) + L.basis(odd))
    assert e.value.code == "NOT_HOMOGENEOUS"


def test_assoc_ideal_closure(witt, tensor):
    W = witt.AD
    assert assoc_graded_ideal_closure(W, W.one()).dim == 9
    assert assoc_graded_ideal_closure(W, W.basis(W.index(0, (1,)))).dim == 9
    T = tensor.AD
    s = T.basis(T.index(tensor.algebra.labels.index("s"), (0,)))
    I = assoc_graded_ideal_closure(T, s)
    assert I.dim == 18 and not I.contains(T.field, T.one())


def test_derived_subspace(witt, h2, tensor):
    assert derived_subspace(lieify(tensor.algebra)).dim == 0
    assert witt.W.dim == 8
    assert h2.W.dim == 15


def test_derived_subspace_is_an_ideal(lie_corpus):
    for L in lie_corpus.values():
        W = derived_subspace(L)
        span = W.span(L.field)
        for w in W.rows:
            for i in range(L.dim):
                assert span.contains(L.bracket(L.basis(i), w))


def test_quotients(witt, h2, quotients):
    L = witt.lie
    zero = from_span(Span(L.field, L.dim), "L", L.colors)
    Q0 = quotient(L, zero)
    assert Q0.dim == L.dim and np.array_equal(Q0.table, L.table)
    assert quotients["witt"].dim == 7
    assert quotients["h2"].dim == 14


def test_quotient_projection_is_a_homomorphism(h2):
    L = h2.lie
    I = h2.Z
    Q = quotient(L, I)
    f, span = L.field, I.span(L.field)
    keep = [k for k in range(L.dim) if k not in set(I.pivots)]

    def proj(v):
        return span.reduce(v)[0][keep]

    for i, j in itertools.product(range(L.dim), repeat=2):
        x, y = L.basis(i), L.basis(j)
        assert np.array_equal(proj(L.bracket(x, y)), Q.bracket(proj(x), proj(y)))


def test_quotient_and_restrict_errors(witt):
    L = witt.lie
    W = witt.AD
    t = subspace(L.field, "L", [W.basis(W.index(1, (0,)))], L.colors)
    with pytest.raises(ConstructionError) as e:
        quotient(L, t)
    assert e.value.code == "NOT_AN_IDEAL"
    pair = subspace(L.field, "L", [W.basis(W.index(0, (1,))), W.basis(W.index(2, (0,)))], L.colors)
    with pytest.raises(ConstructionError) as e:
        restrict(L, pair)
    assert e.value.code == "NOT_A_SUBALGEBRA"


def test_graded_simplicity_examples(quotients):
    v = graded_simplicity(quotients["exceptional"])
    assert v.is_false and v.witness["rule"] == "abelian"
    assert quotients["exceptional"].is_abelian
    assert graded_simplicity(quotients["witt"]).is_true
    assert graded_simplicity(quotients["h2"]).is_true


def test_graded_simplicity_refutes_with_seed(witt):
    v = graded_simplicity(witt.lie)
    assert v.is_false
    assert v.witness["closure_dim"] < witt.lie.dim


def test_simple_means_every_seed_generates(quotients):
    Q = quotients["h2"]
    assert graded_simplicity(Q).is_true
    rng = np.random.default_rng(5)
    comps = list(Q.components.values())
    for _ in range(50):
        idx = comps[int(rng.integers(len(comps)))]
        v = Q.field.zeros(Q.dim)
        v[idx] = Q.field.random_vector(rng, len(idx))
        if np.any(v):
            assert lie_ideal_closure(Q, v).dim == Q.dim


def test_assoc_graded_simplicity(witt, h2, tensor):
    assert assoc_graded_simplicity(witt.AD).is_true
    assert assoc_graded_simplicity(h2.AD).is_true
    bad = assoc_graded_simplicity(tensor.AD)
    assert bad.is_false and bad.witness["seed"] == [["s", "1"]]


def test_rational_simplicity_is_evidence(h2_rational):
    v = graded_simplicity(derived_quotient(h2_rational), trials=20)
    assert v.is_evidence and v.trials > 0


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_lie_closure_monotone_idempotent(h2, data):
    L = h2.lie
    comps = list(L.components.values())
    idx = comps[data.draw(st.integers(0, len(comps) - 1))]
    coeffs = data.draw(st.lists(st.integers(0, 2), min_size=len(idx), max_size=len(idx)))
    if not any(coeffs):
        return
    v = L.field.zeros(L.dim)
    v[idx] = coeffs
    I = lie_ideal_closure(L, v)
    assert I.contains(L.field, v)
    for r in I.rows:
        J = lie_ideal_closure(L, r)
        assert all(I.contains(L.field, x) for x in J.rows)
