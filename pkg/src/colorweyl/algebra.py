"""Finite-dimensional graded eps-commutative algebras and their color derivations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .foundation import (
    CERTIFIED_FALSE,
    CERTIFIED_TRUE,
    EVIDENCE,
    Bicharacter,
    Color,
    ConstructionError,
    Field,
    Verdict,
)
from .linalg import (
    Span,
    SubspaceBasis,
    certify_graded_simple,
    closure,
    color_components,
    from_span,
    nullspace,
    projective_points,
    rank,
    seed_terms,
    subspace,
)

# associativity checks are chunked so the 4-index tensor stays small
_ASSOC_CHUNK = 2**22


class GradedAlgebra:
    """Associative Gamma-graded algebra with unit, given by structure constants.

    ``table[i, j]`` is the coordinate vector of ``b_i * b_j``. Elements are
    plain coordinate vectors (numpy arrays of the field's dtype).
    """

    def __init__(
        self,
        field: Field,
        bichar: Bicharacter,
        colors: Sequence[Color],
        table: np.ndarray,
        labels: Sequence[str] | None = None,
        unit: int = 0,
    ):
        self.field = field
        self.bichar = bichar
        self.grading = bichar.grading
        self.colors = tuple(self.grading.color(c) for c in colors)
        self.table = table
        n = len(self.colors)
        self.labels = list(labels) if labels is not None else [f"b{i}" for i in range(n)]
        self.unit = unit
        self.generators: list | None = None  # (name, color, bound) for free algebras
        self.exponents: list | None = None

    @property
    def dim(self) -> int:
        return len(self.colors)

    def __repr__(self):
        return f"<GradedAlgebra dim={self.dim} over {self.field}>"

    def basis(self, i: int) -> np.ndarray:
        v = self.field.zeros(self.dim)
        v[i] = 1
        return v

    def one(self) -> np.ndarray:
        return self.basis(self.unit)

    def element(self, terms: Mapping) -> np.ndarray:
        """Vector from ``{label or index: coefficient}``."""
        v = self.field.zeros(self.dim)
        for key, c in terms.items():
            k = self.labels.index(key) if isinstance(key, str) else key
            v[k] = self.field(v[k] + self.field(c))
        return v

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        f = self.field
        left = f.tensordot(x, self.table, axes=([0], [0]))  # (j, k)
        return f.tensordot(y, left, axes=([0], [0]))

    @cached_property
    def left_ops(self) -> np.ndarray:
        """Stack of left-multiplication matrices; column j of [i] is b_i b_j."""
        return np.ascontiguousarray(np.transpose(self.table, (0, 2, 1)))

    @cached_property
    def right_ops(self) -> np.ndarray:
        """Stack of right-multiplication matrices; column i of [j] is b_i b_j."""
        return np.ascontiguousarray(np.transpose(self.table, (1, 2, 0)))

    def left_matrix(self, x: np.ndarray) -> np.ndarray:
        return self.field.tensordot(x, self.left_ops, axes=([0], [0]))

    @cached_property
    def components(self) -> dict:
        return color_components(self.colors)

    def color_of(self, v: np.ndarray) -> Color | None:
        """Color of a nonzero homogeneous vector, else None."""
        cs = {self.colors[k] for k in np.flatnonzero(v)}
        return cs.pop() if len(cs) == 1 else None

    def homogeneous_parts(self, v: np.ndarray) -> list[tuple[Color, np.ndarray]]:
        out = []
        for c, idx in self.components.items():
            if np.any(v[idx]):
                part = self.field.zeros(self.dim)
                part[idx] = v[idx]
                out.append((c, part))
        return out

    def format(self, v: np.ndarray) -> str:
        terms = seed_terms(self.field, v, self.labels)
        if not terms:
            return "0"
        return " + ".join(name if c == "1" else f"{c}*{name}" for name, c in terms)

    # -- structural checks -------------------------------------------------
    def check_unit(self):
        u, n, T = self.unit, self.dim, self.table
        if not 0 <= u < n:
            raise ConstructionError("NO_UNIT", f"unit index {u} out of range")
        eye = self.field.eye(n)
        for j in range(n):
            if np.any(T[u, j] != eye[j]) or np.any(T[j, u] != eye[j]):
                raise ConstructionError(
                    "NO_UNIT", f"{self.labels[u]} is not a two-sided unit at {self.labels[j]}",
                    (self.labels[u], self.labels[j]),
                )

    def check_grading(self):
        g, n, T = self.grading, self.dim, self.table
        for i in range(n):
            for j in range(n):
                target = g.add(self.colors[i], self.colors[j])
                for k in np.flatnonzero(T[i, j]):
                    if self.colors[k] != target:
                        raise ConstructionError(
                            "GRADING_VIOLATION",
                            f"{self.labels[i]}*{self.labels[j]} has a component at {self.labels[k]}",
                            (self.labels[i], self.labels[j]),
                        )

    def check_associative(self):
        f, n, T = self.field, self.dim, self.table
        step = max(1, _ASSOC_CHUNK // max(1, n**3))
        for i0 in range(0, n, step):
            Ti = T[i0 : i0 + step]
            # (b_i b_j) b_k
            lhs = f.tensordot(Ti, T, axes=([2], [0]))  # (i, j, k, out)
            # b_i (b_j b_k)
            rhs = np.transpose(f.tensordot(Ti, T, axes=([1], [2])), (0, 2, 3, 1))
            bad = np.argwhere(np.any(lhs != rhs, axis=3))
            if len(bad):
                i, j, k = (int(x) for x in bad[0])
                lab = self.labels
                raise ConstructionError(
                    "NOT_ASSOCIATIVE",
                    f"({lab[i0 + i]}*{lab[j]})*{lab[k]} != {lab[i0 + i]}*({lab[j]}*{lab[k]})",
                    (lab[i0 + i], lab[j], lab[k]),
                )

    def eps_matrix(self) -> np.ndarray:
        b, n = self.bichar, self.dim
        E = self.field.zeros((n, n))
        for i in range(n):
            for j in range(n):
                E[i, j] = b.eps(self.colors[i], self.colors[j])
        return E

    def check_eps_commutative(self):
        f, n, T = self.field, self.dim, self.table
        E = self.eps_matrix()
        swapped = f.reduce(np.transpose(T, (1, 0, 2)) * E[:, :, None])
        bad = np.argwhere(np.any(T != swapped, axis=2))
        if len(bad):
            i, j = (int(x) for x in bad[0])
            raise ConstructionError(
                "NOT_EPS_COMMUTATIVE",
                f"{self.labels[i]}*{self.labels[j]} != eps * {self.labels[j]}*{self.labels[i]}",
                (self.labels[i], self.labels[j]),
            )

    def is_eps_commutative(self) -> bool:
        try:
            self.check_eps_commutative()
        except ConstructionError:
            return False
        return True


def _dense_table(field: Field, n: int, struct_consts) -> np.ndarray:
    if isinstance(struct_consts, Mapping):
        T = field.zeros((n, n, n))
        for (i, j), prod in struct_consts.items():
            items = prod.items() if isinstance(prod, Mapping) else enumerate(prod)
            for k, c in items:
                T[i, j, k] = field(c)
        return T
    arr = field.array(struct_consts)
    if arr.shape != (n, n, n):
        raise ConstructionError("BAD_SHAPE", f"structure constants must have shape {(n, n, n)}")
    return arr


def build_algebra(
    field: Field,
    bichar: Bicharacter,
    basis_colors: Sequence[Color],
    struct_consts,
    unit_index: int = 0,
    labels: Sequence[str] | None = None,
) -> GradedAlgebra:
    """Validate and build a graded eps-commutative associative algebra.

    ``struct_consts`` is either a sparse ``{(i, j): {k: c}}`` mapping (missing
    pairs are zero products) or a dense (n, n, n) array.
    """
    if bichar.field != field:
        raise ConstructionError("MIXED_CONTEXT", "bicharacter is over a different field")
    n = len(basis_colors)
    T = _dense_table(field, n, struct_consts)
    alg = GradedAlgebra(field, bichar, basis_colors, T, labels, unit_index)
    alg.check_unit()
    alg.check_grading()
    alg.check_associative()
    alg.check_eps_commutative()
    return alg


def _monomial_label(names, exps) -> str:
    parts = []
    for name, e in zip(names, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def free_truncated_algebra(
    field: Field, bichar: Bicharacter, gens: Sequence[tuple], validate: bool = True
) -> GradedAlgebra:
    """Free eps-commutative algebra on ``gens`` = [(name, color, bound), ...] with x^bound = 0.

    Basis monomials are ordered by total degree, then with earlier generators
    first (1, x1, x2, x1*x2, ...).
    """
    g = bichar.grading
    names = [x[0] for x in gens]
    colors = [g.color(x[1]) for x in gens]
    bounds = [int(x[2]) for x in gens]
    for name, c, b in zip(names, colors, bounds):
        if b < 2:
            raise ConstructionError("BAD_BOUND", f"bound of {name} must be at least 2")
        if bichar.is_odd(c) and b != 2:
            raise ConstructionError(
                "ODD_GEN_BAD_BOUND", f"odd generator {name} must have bound 2, got {b}", name
            )
    exps = sorted(
        itertools.product(*(range(b) for b in bounds)),
        key=lambda e: (sum(e), tuple(-x for x in e)),
    )
    index = {e: k for k, e in enumerate(exps)}
    n, r = len(exps), len(gens)
    # sign for moving x_j (j < i) left past x_i
    swap = [[bichar.eps(colors[i], colors[j]) for j in range(r)] for i in range(r)]
    T = field.zeros((n, n, n))
    for a, e in enumerate(exps):
        for b, f_ in enumerate(exps):
            tot = tuple(x + y for x, y in zip(e, f_))
            if any(t >= bd for t, bd in zip(tot, bounds)):
                continue
            sign = field(1)
            for i in range(r):
                if not e[i]:
                    continue
                for j in range(i):
                    if f_[j]:
                        sign = field(sign * field.pow(swap[i][j], e[i] * f_[j]))
            T[a, b, index[tot]] = sign
    mono_colors = [g.sum(g.scale(c, k) for c, k in zip(colors, e)) for e in exps]
    labels = [_monomial_label(names, e) for e in exps]
    alg = GradedAlgebra(field, bichar, mono_colors, T, labels, unit=index[(0,) * r])
    alg.generators = [(nm, c, b) for nm, c, b in zip(names, colors, bounds)]
    alg.exponents = exps
    if validate:
        alg.check_unit()
        alg.check_grading()
        alg.check_associative()
        alg.check_eps_commutative()
    return alg


@dataclass
class Derivation:
    """Homogeneous linear map of A; column j of ``matrix`` is the image of b_j."""

    matrix: np.ndarray
    color: Color
    name: str = ""

    def __call__(self, v: np.ndarray, field: Field) -> np.ndarray:
        return field.matmul(self.matrix, v)


def leibniz_residual(a: GradedAlgebra, M: np.ndarray, color: Color) -> np.ndarray:
    """R[i, j] = M(b_i b_j) - M(b_i) b_j - eps(color, b_i) b_i M(b_j)."""
    f, T, n = a.field, a.table, a.dim
    t1 = f.tensordot(T, M, axes=([2], [1]))  # (i, j, k)
    t2 = f.tensordot(M, T, axes=([0], [0]))  # (i, j, k)
    t3 = np.transpose(f.tensordot(T, M, axes=([1], [0])), (0, 2, 1))  # (i, j, k)
    w = f.array([a.bichar.eps(color, a.colors[i]) for i in range(n)])
    return f.reduce(t1 - t2 - t3 * w[:, None, None])


def _degree_violation(a: GradedAlgebra, M: np.ndarray, color: Color):
    g = a.grading
    for j in range(a.dim):
        target = g.add(a.colors[j], color)
        for k in np.flatnonzero(M[:, j]):
            if a.colors[k] != target:
                return j, int(k)
    return None


def validate_derivation(a: GradedAlgebra, matrix, color: Color) -> Verdict:
    f = a.field
    M = f.array(matrix) if not isinstance(matrix, np.ndarray) else matrix
    color = a.grading.color(color)
    if M.shape != (a.dim, a.dim):
        raise ConstructionError("BAD_SHAPE", f"derivation matrix must be {a.dim}x{a.dim}")
    bad = _degree_violation(a, M, color)
    if bad:
        j, k = bad
        return Verdict(
            CERTIFIED_FALSE,
            witness={"rule": "degree_shift", "basis": a.labels[j], "image_at": a.labels[k]},
        )
    R = leibniz_residual(a, M, color)
    hits = np.argwhere(np.any(R != 0, axis=2))
    if len(hits):
        i, j = (int(x) for x in hits[0])
        return Verdict(
            CERTIFIED_FALSE,
            witness={"rule": "leibniz", "pair": [a.labels[i], a.labels[j]],
                     "residual": a.format(R[i, j])},
        )
    return Verdict(CERTIFIED_TRUE)


def make_derivation(a: GradedAlgebra, matrix, color: Color, name: str = "") -> Derivation:
    f = a.field
    M = matrix if isinstance(matrix, np.ndarray) else f.array(matrix)
    color = a.grading.color(color)
    v = validate_derivation(a, M, color)
    if v.is_false:
        raise ConstructionError("NOT_A_DERIVATION", f"{name or 'map'} fails {v.witness['rule']}", v.witness)
    return Derivation(M, color, name)


def coordinate_derivation(a: GradedAlgebra, gen_index: int, validate: bool = True) -> Derivation:
    """The color partial derivative d/dx_i on a free truncated algebra."""
    if a.generators is None:
        raise ConstructionError("NOT_FREE_ALGEBRA", "algebra was not built by free_truncated_algebra")
    f, g, b = a.field, a.grading, a.bichar
    name, xcolor, _ = a.generators[gen_index]
    dcolor = g.neg(xcolor)
    gen_colors = [c for _, c, _ in a.generators]
    index = {e: k for k, e in enumerate(a.exponents)}
    M = f.zeros((a.dim, a.dim))
    for col, e in enumerate(a.exponents):
        if not e[gen_index]:
            continue
        sign = f(1)
        for j in range(gen_index):
            if e[j]:
                sign = f(sign * f.pow(b.eps(dcolor, gen_colors[j]), e[j]))
        lower = list(e)
        lower[gen_index] -= 1
        M[index[tuple(lower)], col] = f(sign * e[gen_index])
    d = Derivation(M, dcolor, f"d/d{name}")
    if validate:
        v = validate_derivation(a, M, dcolor)
        if v.is_false:
            raise ConstructionError(
                "NOT_A_DERIVATION",
                f"d/d{name} violates {v.witness['rule']} (truncation x^bound = 0 is not "
                "stable under d/dx in this characteristic)",
                v.witness,
            )
    return d


@dataclass
class DerivationSpace:
    """Ordered homogeneous basis of a space of color derivations."""

    algebra: GradedAlgebra
    derivations: list
    color_commutative: bool = True

    @property
    def colors(self) -> list:
        return [d.color for d in self.derivations]

    @property
    def matrices(self) -> list:
        return [d.matrix for d in self.derivations]

    def __len__(self):
        return len(self.derivations)

    @property
    def names(self) -> list:
        return [d.name or f"d{i + 1}" for i, d in enumerate(self.derivations)]


def _flat(ms) -> np.ndarray:
    return np.array([m.reshape(-1) for m in ms])


def make_D(a: GradedAlgebra, ders: Sequence[Derivation]) -> DerivationSpace:
    f = a.field
    ders = list(ders)
    if not ders or all(not np.any(d.matrix) for d in ders):
        raise ConstructionError("ZERO_D", "D must be nonzero")
    for d in ders:
        v = validate_derivation(a, d.matrix, d.color)
        if v.is_false:
            raise ConstructionError("NOT_A_DERIVATION", f"{d.name} is not a color derivation", v.witness)
    if rank(f, _flat([d.matrix for d in ders])) < len(ders):
        raise ConstructionError("DEPENDENT_SET", "derivations are linearly dependent")
    b = a.bichar
    for i, d in enumerate(ders):
        for j in range(i, len(ders)):
            e = ders[j]
            lhs = f.matmul(d.matrix, e.matrix)
            rhs = f.reduce(f.matmul(e.matrix, d.matrix) * b.eps(d.color, e.color))
            if np.any(lhs != rhs):
                raise ConstructionError(
                    "NOT_COLOR_COMMUTATIVE",
                    f"{d.name or i} and {e.name or j} do not color-commute",
                    (d.name or i, e.name or j),
                )
    return DerivationSpace(a, ders, True)


def der_space(a: GradedAlgebra) -> DerivationSpace:
    """Homogeneous basis of all color derivations of ``a``."""
    f, g, n = a.field, a.grading, a.dim
    shifts = sorted({g.add(ck, g.neg(cj)) for ck in a.colors for cj in a.colors})
    basis: list[Derivation] = []
    for lam in shifts:
        slots = [(k, j) for j in range(n) for k in range(n) if a.colors[k] == g.add(a.colors[j], lam)]
        if not slots:
            continue
        cols = []
        for k, j in slots:
            E = f.zeros((n, n))
            E[k, j] = 1
            cols.append(leibniz_residual(a, E, lam).reshape(-1))
        system = np.array(cols).T
        for sol in nullspace(f, system):
            M = f.zeros((n, n))
            for (k, j), c in zip(slots, sol):
                M[k, j] = c
            basis.append(Derivation(M, lam))
    return DerivationSpace(a, basis, color_commutative=False)


def invariants_F1(a: GradedAlgebra, d: DerivationSpace) -> SubspaceBasis:
    """Joint kernel of the derivations in ``d``."""
    f = a.field
    stacked = np.vstack(d.matrices) if len(d) else f.zeros((0, a.dim))
    return subspace(f, "A", nullspace(f, stacked), a.colors)


def _is_invertible(a: GradedAlgebra, u: np.ndarray) -> bool:
    return rank(a.field, a.left_matrix(u)) == a.dim


def graded_field_check(
    a: GradedAlgebra,
    f1: SubspaceBasis,
    budget: int = 10**6,
    trials: int = 200,
    rng: np.random.Generator | None = None,
) -> Verdict:
    """Every nonzero homogeneous element of ``f1`` invertible, and no odd part."""
    f = a.field
    rng = rng if rng is not None else np.random.default_rng(0)
    by_color: dict = {}
    for row, c in zip(f1.rows, f1.colors):
        by_color.setdefault(c, []).append(row)
    for c, rows in by_color.items():
        if a.bichar.is_odd(c):
            return Verdict(CERTIFIED_FALSE, witness={"rule": "odd_invariant", "element": a.format(rows[0])})
    exhaustive = all(len(r) == 1 for r in by_color.values()) or (
        f.is_finite and sum(f.characteristic ** len(r) for r in by_color.values()) <= budget
    )
    checked = 0
    for c, rows in by_color.items():
        R = np.array(rows)
        if exhaustive:
            combos = (row for batch in projective_points_any(f, len(rows)) for row in batch)
        else:
            combos = itertools.chain(
                (f.eye(len(rows))[i] for i in range(len(rows))),
                (v for v in (f.random_vector(rng, len(rows)) for _ in range(trials)) if np.any(v)),
            )
        for coeffs in combos:
            u = f.matmul(coeffs[None, :], R)[0]
            checked += 1
            if not _is_invertible(a, u):
                return Verdict(CERTIFIED_FALSE, witness={"rule": "not_invertible", "element": a.format(u)})
    if exhaustive:
        return Verdict(CERTIFIED_TRUE, detail={"elements": checked})
    return Verdict(EVIDENCE, trials=checked)


def projective_points_any(f: Field, k: int):
    """Projective points; over Q only k == 1 is enumerable."""
    if f.is_finite:
        yield from projective_points(f, k)
    elif k == 1:
        yield f.array([[1]])
    else:
        raise ValueError("cannot enumerate projective space over Q")


def d_stable_ops(a: GradedAlgebra, d: DerivationSpace) -> np.ndarray:
    mats = [a.left_ops] + ([np.array(d.matrices)] if len(d) else [])
    return np.concatenate(mats, axis=0)


def d_stable_ideal_closure(a: GradedAlgebra, d: DerivationSpace, seed: np.ndarray) -> SubspaceBasis:
    """Ideal generated by ``seed`` (one vector or a stack of rows, each homogeneous)."""
    seeds = np.atleast_2d(seed)
    seeds = seeds[np.any(seeds != 0, axis=1)]
    if not len(seeds):
        raise ConstructionError("ZERO_SEED", "seed must be nonzero")
    if any(a.color_of(s) is None for s in seeds):
        raise ConstructionError("NOT_HOMOGENEOUS", "seed must be homogeneous")
    span = closure(a.field, d_stable_ops(a, d), seeds)
    return from_span(span, "A", a.colors)


def graded_D_simplicity(
    a: GradedAlgebra,
    d: DerivationSpace,
    budget: int = 10**6,
    trials: int = 200,
    rng_seed: int = 0,
) -> Verdict:
    ops = d_stable_ops(a, d)
    f = a.field
    return certify_graded_simple(
        f,
        a.colors,
        lambda v: closure(f, ops, v, stop_dim=a.dim),
        budget=budget,
        trials=trials,
        rng=np.random.default_rng(rng_seed),
        labels=a.labels,
    )
