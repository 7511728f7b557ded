"""Finite-dimensional Lie color algebras given by bracket structure constants."""

from __future__ import annotations

from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import GradedAlgebra
from .foundation import CERTIFIED_FALSE, Bicharacter, Color, ConstructionError, Field, Verdict
from .linalg import (
    Span,
    SubspaceBasis,
    certify_graded_simple,
    closure,
    color_components,
    from_span,
    nullspace,
    seed_terms,
)

EXHAUSTIVE_TRIPLES = 10**6
RANDOM_TRIPLES = 10**4
_JACOBI_CHUNK = 2**22


class LieColorAlgebra:
    """``table[i, j]`` is the coordinate vector of [b_i, b_j]."""

    def __init__(
        self,
        field: Field,
        bichar: Bicharacter,
        colors: Sequence[Color],
        table: np.ndarray,
        labels: Sequence[str] | None = None,
    ):
        self.field = field
        self.bichar = bichar
        self.grading = bichar.grading
        self.colors = tuple(self.grading.color(c) for c in colors)
        self.table = table
        n = len(self.colors)
        self.labels = list(labels) if labels is not None else [f"e{i}" for i in range(n)]

    @property
    def dim(self) -> int:
        return len(self.colors)

    def __repr__(self):
        return f"<LieColorAlgebra dim={self.dim} over {self.field}>"

    def basis(self, i: int) -> np.ndarray:
        v = self.field.zeros(self.dim)
        v[i] = 1
        return v

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        f = self.field
        left = f.tensordot(x, self.table, axes=([0], [0]))
        return f.tensordot(y, left, axes=([0], [0]))

    @cached_property
    def ad_ops(self) -> np.ndarray:
        """Stack of adjoint matrices; column j of [i] is [b_i, b_j]."""
        return np.ascontiguousarray(np.transpose(self.table, (0, 2, 1)))

    @cached_property
    def components(self) -> dict:
        return color_components(self.colors)

    @cached_property
    def eps_matrix(self) -> np.ndarray:
        b, cs = self.bichar, self.colors
        return self.field.array([[b.eps(ci, cj) for cj in cs] for ci in cs])

    def format(self, v: np.ndarray) -> str:
        terms = seed_terms(self.field, v, self.labels)
        if not terms:
            return "0"
        return " + ".join(name if c == "1" else f"{c}*{name}" for name, c in terms)

    @property
    def is_abelian(self) -> bool:
        return not np.any(self.table)

    def skew_violation(self):
        f, T = self.field, self.table
        S = f.reduce(T + np.transpose(T, (1, 0, 2)) * self.eps_matrix[:, :, None])
        hits = np.argwhere(np.any(S != 0, axis=2))
        return None if not len(hits) else tuple(int(x) for x in hits[0])

    def grading_violation(self):
        g = self.grading
        for i, j, k in np.argwhere(self.table != 0):
            if self.colors[k] != g.add(self.colors[i], self.colors[j]):
                return int(i), int(j)
        return None

    def jacobi_violation(self, rng: np.random.Generator | None = None):
        """[a,[b,c]] = [[a,b],c] + eps(a,b)[b,[a,c]] on basis triples."""
        n = self.dim
        if n == 0:
            return None
        if n**3 <= EXHAUSTIVE_TRIPLES:
            return self._jacobi_exhaustive()
        rng = rng if rng is not None else np.random.default_rng(0)
        f, T, E = self.field, self.table, self.eps_matrix
        triples = rng.integers(0, n, size=(RANDOM_TRIPLES, 3))
        for a, b, c in triples:
            lhs = f.matmul(T[b, c], T[a])
            r1 = f.matmul(T[a, b], T[:, c, :])
            r2 = f.matmul(T[a, c], T[b])
            if np.any(f.reduce(lhs - r1 - r2 * E[a, b])):
                return int(a), int(b), int(c)
        return None

    def _jacobi_exhaustive(self):
        f, T, E, n = self.field, self.table, self.eps_matrix, self.dim
        step = max(1, _JACOBI_CHUNK // max(1, n**3))
        for lo in range(0, n, step):
            hi = min(n, lo + step)
            Ti = T[lo:hi]
            # [a,[b,c]]: sum_m T[b,c,m] T[a,m,:]
            lhs = np.transpose(f.tensordot(T, Ti, axes=([2], [1])), (2, 0, 1, 3))
            # [[a,b],c]: sum_m T[a,b,m] T[m,c,:]
            r1 = f.tensordot(Ti, T, axes=([2], [0]))
            # [b,[a,c]]: sum_m T[a,c,m] T[b,m,:]
            r2 = np.transpose(f.tensordot(Ti, T, axes=([2], [1])), (0, 2, 1, 3))
            bad = f.reduce(lhs - r1 - r2 * E[lo:hi, :, None, None])
            hits = np.argwhere(np.any(bad != 0, axis=3))
            if len(hits):
                a, b, c = (int(x) for x in hits[0])
                return a + lo, b, c
        return None

    def validate(self, rng: np.random.Generator | None = None):
        for rule, hit in (
            ("grading", self.grading_violation()),
            ("skew_symmetry", self.skew_violation()),
            ("jacobi", self.jacobi_violation(rng)),
        ):
            if hit is not None:
                raise ConstructionError(
                    "AXIOM_FAILURE", f"{rule} fails at {[self.labels[k] for k in hit]}", (rule, hit)
                )
        return self


def bracket_from_assoc(a: GradedAlgebra, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Color commutator xy - eps(x, y) yx, bilinear over homogeneous parts."""
    f, b = a.field, a.bichar
    out = f.zeros(a.dim)
    for cx, px in a.homogeneous_parts(x):
        for cy, py in a.homogeneous_parts(y):
            out = f.reduce(out + a.mul(px, py) - a.mul(py, px) * b.eps(cx, cy))
    return out


def lieify(a: GradedAlgebra, validate: bool = True, rng: np.random.Generator | None = None) -> LieColorAlgebra:
    f, T = a.field, a.table
    E = a.eps_matrix()
    table = f.reduce(T - np.transpose(T, (1, 0, 2)) * E[:, :, None])
    lie = LieColorAlgebra(f, a.bichar, a.colors, table, a.labels)
    return lie.validate(rng) if validate else lie


def center(L: LieColorAlgebra) -> SubspaceBasis:
    """Elements bracketing to zero with everything, solved per color."""
    f, n = L.field, L.dim
    rows = []
    for idx in L.components.values():
        # [x, b_i] for x supported on idx: columns idx of the stacked right-adjoints
        system = np.transpose(L.table[idx], (1, 2, 0)).reshape(n * n, len(idx))
        for sol in nullspace(f, system):
            v = f.zeros(n)
            v[idx] = sol
            rows.append(v)
    return from_span(Span(f, n, np.array(rows) if rows else None), "L", L.colors)


def lie_ideal_closure(L: LieColorAlgebra, seed: np.ndarray) -> SubspaceBasis:
    _check_seed(L.colors, seed)
    return from_span(closure(L.field, L.ad_ops, seed), "L", L.colors)


def assoc_graded_ideal_closure(a: GradedAlgebra, seed: np.ndarray) -> SubspaceBasis:
    _check_seed(a.colors, seed)
    ops = np.concatenate([a.left_ops, a.right_ops], axis=0)
    return from_span(closure(a.field, ops, seed), "A", a.colors)


def _check_seed(colors, seed):
    if not np.any(seed):
        raise ConstructionError("ZERO_SEED", "seed must be nonzero")
    if len({colors[k] for k in np.flatnonzero(seed)}) != 1:
        raise ConstructionError("NOT_HOMOGENEOUS", "seed must be homogeneous")


def derived_subspace(L: LieColorAlgebra) -> SubspaceBasis:
    n = L.dim
    vecs = L.table.reshape(n * n, n)
    vecs = vecs[np.any(vecs != 0, axis=1)]
    return from_span(Span(L.field, n, vecs if len(vecs) else None), "L", L.colors)


def _row_label(L: LieColorAlgebra, row: np.ndarray) -> str:
    nz = np.flatnonzero(row)
    return L.labels[nz[0]] if len(nz) == 1 else f"({L.format(row)})"


def restrict(L: LieColorAlgebra, S: SubspaceBasis) -> LieColorAlgebra:
    """Subalgebra on the rows of ``S``; coordinates are read off at the pivots."""
    f = L.field
    R = S.rows
    left = f.tensordot(R, L.table, axes=([1], [0]))  # (a, j, k)
    prods = f.tensordot(R, left, axes=([1], [1]))  # (b, a, k)
    prods = np.transpose(prods, (1, 0, 2))
    m = S.dim
    flat = prods.reshape(m * m, L.dim)
    span = S.span(f)
    if np.any(span.reduce(flat)) if len(flat) else False:
        raise ConstructionError("NOT_A_SUBALGEBRA", "subspace is not closed under the bracket")
    table = flat[:, list(S.pivots)].reshape(m, m, m)
    labels = [_row_label(L, r) for r in R]
    return LieColorAlgebra(f, L.bichar, S.colors, table, labels)


def quotient(L: LieColorAlgebra, ideal: SubspaceBasis, validate: bool = True) -> LieColorAlgebra:
    """L / ideal on the non-pivot coordinates as representatives."""
    f, n = L.field, L.dim
    if ideal.dim:
        imgs = f.matmul(L.ad_ops, ideal.rows.T)  # (i, n, r)
        cand = np.transpose(imgs, (0, 2, 1)).reshape(-1, n)
        if np.any(ideal.span(f).reduce(cand)):
            raise ConstructionError("NOT_AN_IDEAL", "subspace is not stable under the bracket")
    keep = [k for k in range(n) if k not in set(ideal.pivots)]
    span = ideal.span(f)
    sub = L.table[np.ix_(keep, keep)].reshape(-1, n)
    red = span.reduce(sub) if len(sub) else sub
    table = red[:, keep].reshape(len(keep), len(keep), len(keep))
    Q = LieColorAlgebra(f, L.bichar, [L.colors[k] for k in keep], table, [L.labels[k] for k in keep])
    return Q.validate() if validate else Q


def graded_simplicity(
    L: LieColorAlgebra,
    budget: int = 10**6,
    trials: int = 200,
    rng_seed: int = 0,
) -> Verdict:
    if L.dim <= 1 or L.is_abelian:
        rule = "dimension_at_most_one" if L.dim <= 1 else "abelian"
        seed = [[L.labels[0], "1"]] if L.dim else []
        return Verdict(
            CERTIFIED_FALSE,
            witness={"rule": rule, "seed": seed, "closure_dim": min(1, L.dim), "ambient_dim": L.dim},
        )
    f = L.field
    return certify_graded_simple(
        f,
        L.colors,
        lambda v: closure(f, L.ad_ops, v, stop_dim=L.dim),
        budget=budget,
        trials=trials,
        rng=np.random.default_rng(rng_seed),
        labels=L.labels,
    )


def assoc_graded_simplicity(
    a: GradedAlgebra,
    budget: int = 10**6,
    trials: int = 200,
    rng_seed: int = 0,
) -> Verdict:
    f = a.field
    ops = np.concatenate([a.left_ops, a.right_ops], axis=0)
    return certify_graded_simple(
        f,
        a.colors,
        lambda v: closure(f, ops, v, stop_dim=a.dim),
        budget=budget,
        trials=trials,
        rng=np.random.default_rng(rng_seed),
        labels=a.labels,
    )
