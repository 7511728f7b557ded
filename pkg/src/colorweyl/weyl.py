"""Multi-indices and the Weyl-type algebra A[D] of differential operators.

Elements are kept in normal form ``sum_alpha u_alpha d^alpha`` with
``d^alpha = d_1^{alpha_1} ... d_r^{alpha_r}`` in the fixed order of the
derivation basis. Products follow the Leibniz-type reordering rule; the
operator realisation in End(A) serves as an independent check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    Derivation,
    DerivationSpace,
    GradedAlgebra,
    leibniz_residual,
    make_D,
)
from .foundation import (
    CERTIFIED_FALSE,
    CERTIFIED_TRUE,
    Bicharacter,
    Color,
    ConstructionError,
    Field,
    Verdict,
)
from .linalg import Span, SubspaceBasis, closure, nullspace, rank

MultiIndex = tuple

DEFAULT_SIZE_CAP = 256


def level(alpha: MultiIndex) -> int:
    return sum(alpha)


def delta(i: int, m: int) -> MultiIndex:
    return tuple(int(j == i) for j in range(m))


def index_key(alpha: MultiIndex) -> tuple:
    """Sort key realising the level-then-first-difference order."""
    return (sum(alpha), tuple(alpha))


def index_compare(a: MultiIndex, b: MultiIndex) -> str:
    if len(a) != len(b):
        raise ValueError("multi-indices over different index sets")
    ka, kb = index_key(a), index_key(b)
    return "lt" if ka < kb else ("gt" if ka > kb else "eq")


def sub_indices(alpha: MultiIndex) -> list[MultiIndex]:
    """All gamma with gamma_i <= alpha_i."""
    return list(itertools.product(*(range(a + 1) for a in alpha)))


def multi_binomial(alpha: MultiIndex, gamma: MultiIndex, field: Field):
    val = 1
    for a, g in zip(alpha, gamma):
        if g > a or g < 0:
            return field(0)
        val *= comb(a, g)
    return field(val)


def eps_plus(bichar: Bicharacter, dcolors: Sequence[Color], alpha: MultiIndex, beta: MultiIndex):
    """Scalar with d^alpha d^beta = eps_plus(alpha, beta) d^{alpha+beta}."""
    f = bichar.field
    val = f(1)
    for i, ai in enumerate(alpha):
        if not ai:
            continue
        for j in range(i):
            if beta[j]:
                val = f(val * f.pow(bichar.eps(dcolors[i], dcolors[j]), ai * beta[j]))
    return val


@dataclass(frozen=True)
class IndexSet:
    """Admissible exponents: bound p-1 in characteristic p, bound 1 on odd derivations."""

    bounds: tuple  # int, or None for unbounded
    characteristic: int

    @property
    def rank(self) -> int:
        return len(self.bounds)

    @property
    def finite(self) -> bool:
        return all(b is not None for b in self.bounds)

    @property
    def size(self) -> int | None:
        if not self.finite:
            return None
        out = 1
        for b in self.bounds:
            out *= b + 1
        return out

    @property
    def max_index(self) -> MultiIndex | None:
        return tuple(self.bounds) if self.finite else None

    @property
    def height(self) -> int | None:
        return sum(self.bounds) if self.finite else None

    def contains(self, alpha: MultiIndex) -> bool:
        return len(alpha) == self.rank and all(
            0 <= a and (b is None or a <= b) for a, b in zip(alpha, self.bounds)
        )

    def elements(self, level_cap: int | None = None) -> list[MultiIndex]:
        if level_cap is None and not self.finite:
            raise ConstructionError("INFINITE_INDEX_SET", "index set is infinite; supply a level cap")
        caps = [
            (b if b is not None else level_cap) if level_cap is None else min(level_cap, b if b is not None else level_cap)
            for b in self.bounds
        ]
        out = [a for a in itertools.product(*(range(c + 1) for c in caps))
               if level_cap is None or sum(a) <= level_cap]
        return sorted(out, key=index_key)


def index_set(d: DerivationSpace, f: Field) -> IndexSet:
    b = d.algebra.bichar
    p = f.characteristic
    bounds = []
    for c in d.colors:
        if b.is_odd(c):
            bounds.append(1)
        elif p:
            bounds.append(p - 1)
        else:
            bounds.append(None)
    return IndexSet(tuple(bounds), p)


class WeylContext:
    """Shared data for computing in A[D]: the algebra, ordered derivation basis, index set."""

    def __init__(self, algebra: GradedAlgebra, dspace: DerivationSpace, jset: IndexSet | None = None):
        if dspace.algebra is not algebra:
            raise ConstructionError("MIXED_CONTEXT", "derivations belong to a different algebra")
        self.algebra = algebra
        self.dspace = dspace
        self.field = algebra.field
        self.bichar = algebra.bichar
        self.grading = algebra.grading
        self.jset = jset if jset is not None else index_set(dspace, algebra.field)
        self.dcolors = list(dspace.colors)
        self.m = len(self.dcolors)
        self._powers: dict = {}
        self._eps_plus: dict = {}

    def power(self, alpha: MultiIndex) -> np.ndarray:
        """Matrix of d^alpha = d_1^{a_1} ... d_r^{a_r} (d_r applied first)."""
        hit = self._powers.get(alpha)
        if hit is not None:
            return hit
        f = self.field
        M = f.eye(self.algebra.dim)
        for i, a in enumerate(alpha):
            for _ in range(a):
                M = f.matmul(M, self.dspace.derivations[i].matrix)
        self._powers[alpha] = M
        return M

    def eps_plus(self, alpha: MultiIndex, beta: MultiIndex):
        key = (alpha, beta)
        hit = self._eps_plus.get(key)
        if hit is None:
            hit = eps_plus(self.bichar, self.dcolors, alpha, beta)
            self._eps_plus[key] = hit
        return hit

    def dcolor(self, alpha: MultiIndex) -> Color:
        g = self.grading
        return g.sum(g.scale(c, a) for c, a in zip(self.dcolors, alpha))

    def zero_index(self) -> MultiIndex:
        return (0,) * self.m

    def truncation_defects(self) -> list[int]:
        """Even derivations whose p-th power is a nonzero operator.

        Dropping exponents beyond p-1 is only exact when every such power vanishes.
        """
        p = self.field.characteristic
        if not p:
            return []
        bad = []
        for i, c in enumerate(self.dcolors):
            if not self.bichar.is_odd(c) and np.any(self.power(tuple(p * x for x in delta(i, self.m)))):
                bad.append(i)
        return bad

    def d_label(self, alpha: MultiIndex) -> str:
        names = self.dspace.names
        parts = []
        for nm, a in zip(names, alpha):
            if a == 1:
                parts.append(nm)
            elif a > 1:
                parts.append(f"{nm}^{a}")
        return "*".join(parts)

    def label(self, i: int, alpha: MultiIndex) -> str:
        a = self.algebra.labels[i]
        dl = self.d_label(alpha)
        if not dl:
            return a
        return dl if a == "1" else f"{a}*{dl}"


class WeylElement:
    """Normal-form element sum_alpha u_alpha d^alpha of A[D]."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: WeylContext, terms: dict | None = None):
        self.ctx = ctx
        clean = {}
        for alpha, u in (terms or {}).items():
            if np.any(u):
                clean[tuple(alpha)] = u
        self.terms = dict(sorted(clean.items(), key=lambda kv: index_key(kv[0])))

    @classmethod
    def monomial(cls, ctx: WeylContext, u: np.ndarray, alpha: MultiIndex | None = None) -> "WeylElement":
        alpha = ctx.zero_index() if alpha is None else tuple(alpha)
        return cls(ctx, {alpha: u})

    @classmethod
    def basis(cls, ctx: WeylContext, i: int, alpha: MultiIndex | None = None) -> "WeylElement":
        return cls.monomial(ctx, ctx.algebra.basis(i), alpha)

    @classmethod
    def one(cls, ctx: WeylContext) -> "WeylElement":
        return cls.monomial(ctx, ctx.algebra.one())

    @classmethod
    def d(cls, ctx: WeylContext, i: int) -> "WeylElement":
        return cls.monomial(ctx, ctx.algebra.one(), delta(i, ctx.m))

    def _check(self, other: "WeylElement"):
        if other.ctx is not self.ctx:
            raise ConstructionError("MIXED_CONTEXT", "elements of different Weyl algebras")

    def __add__(self, other: "WeylElement") -> "WeylElement":
        self._check(other)
        f = self.ctx.field
        out = dict(self.terms)
        for a, u in other.terms.items():
            out[a] = f.reduce(out[a] + u) if a in out else u
        return WeylElement(self.ctx, out)

    def scale(self, c) -> "WeylElement":
        f = self.ctx.field
        c = f(c)
        return WeylElement(self.ctx, {a: f.reduce(u * c) for a, u in self.terms.items()})

    def __neg__(self) -> "WeylElement":
        return self.scale(-1)

    def __sub__(self, other: "WeylElement") -> "WeylElement":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, WeylElement):
            return weyl_mul(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        if not isinstance(other, WeylElement) or other.ctx is not self.ctx:
            return NotImplemented
        if self.terms.keys() != other.terms.keys():
            return False
        return all(np.all(self.terms[a] == other.terms[a]) for a in self.terms)

    def __bool__(self):
        return bool(self.terms)

    @property
    def height(self) -> int:
        """Largest level carrying a nonzero coefficient (-1 for zero)."""
        return max((level(a) for a in self.terms), default=-1)

    def homogeneous_parts(self) -> dict:
        ctx, A = self.ctx, self.ctx.algebra
        parts: dict = {}
        for alpha, u in self.terms.items():
            dc = ctx.dcolor(alpha)
            for c, piece in A.homogeneous_parts(u):
                col = ctx.grading.add(c, dc)
                parts.setdefault(col, {})[alpha] = piece
        return {c: WeylElement(ctx, t) for c, t in parts.items()}

    @property
    def color(self) -> Color | None:
        parts = self.homogeneous_parts()
        return next(iter(parts)) if len(parts) == 1 else None

    def __repr__(self):
        if not self.terms:
            return "0"
        ctx, A = self.ctx, self.ctx.algebra
        pieces = []
        for alpha, u in self.terms.items():
            coeff = A.format(u)
            dl = ctx.d_label(alpha)
            if not dl:
                pieces.append(coeff)
            elif coeff == "1":
                pieces.append(dl)
            else:
                pieces.append(f"({coeff})*{dl}" if " + " in coeff else f"{coeff}*{dl}")
        return " + ".join(pieces)


def weyl_mul(x: WeylElement, y: WeylElement) -> WeylElement:
    """Product of normal forms; exponents leaving the index set are dropped."""
    x._check(y)
    ctx = x.ctx
    f, A, b, J = ctx.field, ctx.algebra, ctx.bichar, ctx.jset
    out: dict = {}
    for alpha, u in x.terms.items():
        lams = sub_indices(alpha)
        for beta, v in y.terms.items():
            for vcolor, vc in A.homogeneous_parts(v):
                for lam in lams:
                    target = tuple(p + q for p, q in zip(beta, lam))
                    if not J.contains(target):
                        continue
                    rest = tuple(p - q for p, q in zip(alpha, lam))
                    coef = f(
                        multi_binomial(alpha, lam, f)
                        * f.inv(ctx.eps_plus(rest, lam))
                        * b.eps(ctx.dcolor(lam), vcolor)
                        * ctx.eps_plus(lam, beta)
                    )
                    if coef == 0:
                        continue
                    w = A.mul(u, f.matmul(ctx.power(rest), vc))
                    term = f.reduce(w * coef)
                    out[target] = f.reduce(out[target] + term) if target in out else term
    return WeylElement(ctx, out)


def bracket(x: WeylElement, y: WeylElement) -> WeylElement:
    """Color commutator xy - eps(x, y) yx, extended bilinearly over homogeneous parts."""
    b = x.ctx.bichar
    out = WeylElement(x.ctx)
    for cx, px in x.homogeneous_parts().items():
        for cy, py in y.homogeneous_parts().items():
            out = out + weyl_mul(px, py) - weyl_mul(py, px).scale(b.eps(cx, cy))
    return out


def weyl_apply(x: WeylElement, a: np.ndarray) -> np.ndarray:
    ctx = x.ctx
    f, A = ctx.field, ctx.algebra
    out = f.zeros(A.dim)
    for alpha, u in x.terms.items():
        out = f.reduce(out + A.mul(u, f.matmul(ctx.power(alpha), a)))
    return out


def leibniz_expand(ctx: WeylContext, alpha: MultiIndex, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Right-hand side of the higher Leibniz rule for d^alpha(ab), ``a`` homogeneous."""
    f, A = ctx.field, ctx.algebra
    ca = A.color_of(a)
    if ca is None:
        if not np.any(a):
            return f.zeros(A.dim)
        raise ConstructionError("NOT_HOMOGENEOUS", "first factor must be homogeneous")
    out = f.zeros(A.dim)
    for gam in sub_indices(alpha):
        rest = tuple(p - q for p, q in zip(alpha, gam))
        coef = f(
            multi_binomial(alpha, gam, f)
            * f.inv(ctx.eps_plus(rest, gam))
            * ctx.bichar.eps(ctx.dcolor(gam), ca)
        )
        if coef == 0:
            continue
        left = f.matmul(ctx.power(rest), a)
        right = f.matmul(ctx.power(gam), b)
        out = f.reduce(out + A.mul(left, right) * coef)
    return out


def operator_matrix(x: WeylElement) -> np.ndarray:
    ctx = x.ctx
    f, A = ctx.field, ctx.algebra
    out = f.zeros((A.dim, A.dim))
    for alpha, u in x.terms.items():
        out = f.reduce(out + f.matmul(A.left_matrix(u), ctx.power(alpha)))
    return out


def _basis_operators(ctx: WeylContext, indices: Sequence[MultiIndex], coefficients=None) -> np.ndarray:
    """Row k = flattened operator of b_i d^alpha, k = pos(alpha) * len(coefficients) + pos(i)."""
    f, A = ctx.field, ctx.algebra
    n = A.dim
    left = A.left_ops if coefficients is None else A.left_ops[list(coefficients)]
    rows = []
    for alpha in indices:
        P = ctx.power(alpha)
        ops = f.matmul(left, P)  # (i, n, n)
        rows.append(ops.reshape(len(left), n * n))
    return np.vstack(rows) if rows else f.zeros((0, n * n))


def _freeness(ctx: WeylContext, indices: Sequence[MultiIndex], coefficients=None) -> Verdict:
    f, A = ctx.field, ctx.algebra
    coeffs = list(range(A.dim)) if coefficients is None else list(coefficients)
    m = len(coeffs)
    ops = _basis_operators(ctx, indices, coeffs)
    r = rank(f, ops)
    expected = m * len(indices)
    detail = {"rank": r, "expected_rank": expected, "dim_A": m, "index_count": len(indices)}
    if r == expected:
        return Verdict(CERTIFIED_TRUE, detail=detail)
    ker = nullspace(f, ops.T)[0]
    terms: dict = {}
    for k in np.flatnonzero(ker):
        alpha, i = indices[k // m], coeffs[k % m]
        terms.setdefault(alpha, f.zeros(A.dim))[i] = ker[k]
    witness = {"kernel_element": repr(WeylElement(ctx, terms))}
    return Verdict(CERTIFIED_FALSE, witness=witness, detail=detail)


def freeness_check(ctx: WeylContext) -> Verdict:
    if not ctx.jset.finite:
        raise ConstructionError("INFINITE_INDEX_SET", "use freeness_check_cutoff for infinite index sets")
    return _freeness(ctx, ctx.jset.elements())


def freeness_check_cutoff(ctx: WeylContext, level_cap: int, coefficients=None) -> Verdict:
    """Rank test restricted to levels <= level_cap (and optionally to some coefficient basis vectors)."""
    return _freeness(ctx, ctx.jset.elements(level_cap), coefficients)


def _operator_color(A: GradedAlgebra, M: np.ndarray) -> Color:
    k, j = (int(x) for x in np.argwhere(M != 0)[0])
    g = A.grading
    return g.add(A.colors[k], g.neg(A.colors[j]))


def script_D(a: GradedAlgebra, d: DerivationSpace, f1: SubspaceBasis) -> DerivationSpace:
    """Color derivations lying in the operator algebra generated by F_1 and D.

    The basis starts with the members of ``d`` (in order) that are independent
    over F_1 and is completed by further derivations in a deterministic order.
    """
    f, n = a.field, a.dim
    gens = [a.left_matrix(row) for row in f1.rows] + list(d.matrices)
    eye = f.eye(n)
    # left composition G @ M acts on row-major vec(M) as kron(G, I)
    kops = np.array([np.kron(G, eye) for G in gens])
    ops_span = closure(f, kops, eye.reshape(1, -1))
    by_color: dict = {}
    for row in ops_span.rows:
        M = row.reshape(n, n)
        by_color.setdefault(_operator_color(a, M), []).append(M)
    candidates: list[Derivation] = []
    for lam in sorted(by_color):
        Ms = by_color[lam]
        R = np.array([leibniz_residual(a, M, lam).reshape(-1) for M in Ms]).T
        for sol in nullspace(f, R):
            D_ = f.reduce(sum(f.reduce(c * M) for c, M in zip(sol, Ms)))
            if np.any(D_):
                candidates.append(Derivation(D_, lam))
    f1_mults = [a.left_matrix(row) for row in f1.rows]
    chosen: list[Derivation] = []
    span = Span(f, n * n)

    def try_add(der: Derivation):
        vecs = np.array([f.matmul(L, der.matrix).reshape(-1) for L in f1_mults])
        if all(span.contains(v) for v in vecs):
            return
        chosen.append(der)
        span.extend(vecs)

    for der in d.derivations:
        try_add(der)
    extra = 0
    for der in candidates:
        before = len(chosen)
        try_add(der)
        if len(chosen) > before:
            extra += 1
            der.name = f"e{extra}"
    return make_D(a, chosen)


class WeylAlgebra(GradedAlgebra):
    """A[D] materialised on the basis b_i d^alpha; index = pos(alpha) * dim A + i."""

    def __init__(self, ctx: WeylContext, table: np.ndarray, indices: list[MultiIndex], colors, labels):
        super().__init__(ctx.field, ctx.bichar, colors, table, labels, unit=ctx.algebra.unit)
        self.ctx = ctx
        self.indices = indices
        self.pos = {a: k for k, a in enumerate(indices)}

    @property
    def dim_A(self) -> int:
        return self.ctx.algebra.dim

    def index(self, i: int, alpha: MultiIndex) -> int:
        return self.pos[tuple(alpha)] * self.dim_A + i

    def block(self, alpha: MultiIndex) -> slice:
        k = self.pos[tuple(alpha)] * self.dim_A
        return slice(k, k + self.dim_A)

    def to_element(self, v: np.ndarray) -> WeylElement:
        return WeylElement(self.ctx, {a: v[self.block(a)].copy() for a in self.indices})

    def from_element(self, x: WeylElement) -> np.ndarray:
        v = self.field.zeros(self.dim)
        for a, u in x.terms.items():
            if a not in self.pos:
                raise ConstructionError("OUTSIDE_INDEX_SET", f"index {a} not in the materialised range")
            v[self.block(a)] = u
        return v

    @cached_property
    def basis_operators(self) -> np.ndarray:
        """(N, dim A, dim A) operators of the basis elements."""
        n = self.dim_A
        return _basis_operators(self.ctx, self.indices).reshape(-1, n, n)


def materialize_AD(ctx: WeylContext, size_cap: int = DEFAULT_SIZE_CAP) -> WeylAlgebra:
    if not ctx.jset.finite:
        raise ConstructionError("INFINITE_INDEX_SET", "cannot materialise an infinite index set")
    bad = ctx.truncation_defects()
    if bad:
        raise ConstructionError(
            "UNSUPPORTED_P_POWER",
            "p-th power of derivation(s) "
            + ", ".join(ctx.dspace.names[i] for i in bad)
            + " is nonzero; normal-form truncation would be inexact",
            bad,
        )
    f, A, b = ctx.field, ctx.algebra, ctx.bichar
    J = ctx.jset.elements()
    n = A.dim
    N = n * len(J)
    if N > size_cap:
        raise ConstructionError("SIZE_CAP", f"dim A[D] = {N} exceeds size cap {size_cap}")
    pos = {a: k for k, a in enumerate(J)}
    T = f.zeros((N, N, N))
    applied: dict = {}
    for alpha in J:
        for lam in sub_indices(alpha):
            rest = tuple(p - q for p, q in zip(alpha, lam))
            if rest not in applied:
                # prod[i, j] = b_i * d^rest(b_j)
                applied[rest] = np.transpose(f.tensordot(A.table, ctx.power(rest), axes=([1], [0])), (0, 2, 1))
            prod = applied[rest]
            lam_color = ctx.dcolor(lam)
            vfac = f.array([b.eps(lam_color, A.colors[j]) for j in range(n)])
            base_l = f(multi_binomial(alpha, lam, f) * f.inv(ctx.eps_plus(rest, lam)))
            if base_l == 0:
                continue
            for beta in J:
                target = tuple(p + q for p, q in zip(beta, lam))
                if target not in pos:
                    continue
                coef = f(base_l * ctx.eps_plus(lam, beta))
                blk = f.reduce(prod * f.reduce(vfac * coef)[None, :, None])
                ra, rb, rt = pos[alpha] * n, pos[beta] * n, pos[target] * n
                T[ra : ra + n, rb : rb + n, rt : rt + n] = f.reduce(
                    T[ra : ra + n, rb : rb + n, rt : rt + n] + blk
                )
    g = A.grading
    colors = [g.add(A.colors[i], ctx.dcolor(alpha)) for alpha in J for i in range(n)]
    labels = [ctx.label(i, alpha) for alpha in J for i in range(n)]
    return WeylAlgebra(ctx, T, J, colors, labels)


def full_matrix_certificate(W: WeylAlgebra) -> Verdict | None:
    """Certify simplicity when the operator map A[D] -> End(A) is bijective.

    Then A[D] is a full matrix algebra, simple and so graded simple.  Returns
    None when the dimensions or the rank do not allow the conclusion.
    """
    n = W.dim_A
    if W.dim != n * n:
        return None
    r = rank(W.field, W.basis_operators.reshape(W.dim, n * n))
    if r != W.dim:
        return None
    return Verdict(CERTIFIED_TRUE, detail={"rule": "full_matrix_algebra", "closures": 0, "rank": r})


def operator_oracle(W: WeylAlgebra) -> dict:
    """Compare op(b_k b_l) with op(b_k) op(b_l) on every basis pair."""
    f = W.field
    ops = W.basis_operators
    N, n = ops.shape[0], ops.shape[1]
    prod_ops = f.tensordot(W.table, ops, axes=([2], [0]))  # (k, l, n, n)
    composed = f.matmul(ops[:, None, :, :], ops[None, :, :, :])
    bad = np.argwhere(np.any((prod_ops != composed).reshape(N, N, n * n), axis=2))
    return {
        "pairs": N * N,
        "violations": len(bad),
        "first": [W.labels[int(bad[0][0])], W.labels[int(bad[0][1])]] if len(bad) else None,
    }
