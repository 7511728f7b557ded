"""Exact linear algebra over a :class:`Field` on numpy arrays.

Row-reduced echelon form uses the first nonzero coordinate as pivot,
normalised to 1, so two spans are equal iff their RREF arrays are equal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .foundation import CERTIFIED_FALSE, CERTIFIED_TRUE, EVIDENCE, Field, Verdict, make_field


def rref(field: Field, M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    M = np.array(M, dtype=field.dtype, copy=True)
    if M.ndim != 2:
        raise ValueError("rref expects a matrix")
    rows, cols = M.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            M[[r, k]] = M[[k, r]]
        piv = M[r, c]
        if piv != 1:
            M[r] = field.reduce(M[r] * field.inv(piv))
        col = M[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            M[hit] = field.reduce(M[hit] - np.outer(col[hit], M[r]))
        pivots.append(c)
        r += 1
    return M[:r], pivots


def rank(field: Field, M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    return len(rref(field, M)[1])


def nullspace(field: Field, M: np.ndarray) -> np.ndarray:
    """Rows spanning {x : M x = 0}, in RREF."""
    n = M.shape[1]
    R, piv = rref(field, M) if M.shape[0] else (field.zeros((0, n)), [])
    free = [c for c in range(n) if c not in set(piv)]
    out = field.zeros((len(free), n))
    for k, f in enumerate(free):
        out[k, f] = field(1)
        for i, p in enumerate(piv):
            out[k, p] = field(-R[i, f])
    if not len(free):
        return out
    return rref(field, out)[0]


class Span:
    """Incrementally maintained RREF basis of a subspace of F^n."""

    def __init__(self, field: Field, n: int, vectors: np.ndarray | None = None):
        self.field = field
        self.n = n
        self.rows = field.zeros((0, n))
        self.pivots: list[int] = []
        if vectors is not None and len(vectors):
            self.extend(vectors)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def reduce(self, V: np.ndarray) -> np.ndarray:
        f = self.field
        V = np.atleast_2d(V)
        if not self.pivots:
            return V.astype(f.dtype, copy=True)
        return f.reduce(V - f.matmul(V[:, self.pivots], self.rows))

    def contains(self, v: np.ndarray) -> bool:
        return not np.any(self.reduce(v))

    def extend(self, V: np.ndarray) -> np.ndarray:
        """Add vectors; returns the newly added (reduced) rows."""
        f = self.field
        V = np.atleast_2d(np.asarray(V))
        if V.shape[0] == 0:
            return f.zeros((0, self.n))
        Rv = self.reduce(V)
        keep = np.flatnonzero(np.any(Rv != 0, axis=1))
        if keep.size == 0:
            return f.zeros((0, self.n))
        new, newp = rref(f, Rv[keep])
        old = self.rows
        if len(self.pivots):
            old = f.reduce(old - f.matmul(old[:, newp], new))
        allp = self.pivots + newp
        order = np.argsort(allp, kind="stable")
        self.rows = np.vstack([old, new])[order]
        self.pivots = [allp[i] for i in order]
        return new

    def copy(self) -> "Span":
        s = Span(self.field, self.n)
        s.rows = self.rows.copy()
        s.pivots = list(self.pivots)
        return s


@dataclass
class SubspaceBasis:
    """Echelonised basis of a graded subspace with one color per row."""

    ambient: str
    rows: np.ndarray
    pivots: tuple
    colors: tuple

    @property
    def dim(self) -> int:
        return len(self.pivots)

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    def __eq__(self, other):
        if not isinstance(other, SubspaceBasis):
            return NotImplemented
        return (
            self.ambient == other.ambient
            and self.rows.shape == other.rows.shape
            and self.pivots == other.pivots
            and bool(np.all(self.rows == other.rows))
        )

    def span(self, field: Field) -> Span:
        s = Span(field, self.n)
        s.rows = self.rows.copy()
        s.pivots = list(self.pivots)
        return s

    def contains(self, field: Field, v: np.ndarray) -> bool:
        return self.span(field).contains(v)

    def encode(self) -> tuple:
        return (self.ambient, tuple(tuple(str(x) for x in r) for r in self.rows))


def subspace(field: Field, ambient: str, vectors, coord_colors: Sequence) -> SubspaceBasis:
    """Echelonise ``vectors``; every resulting row must be homogeneous."""
    n = len(coord_colors)
    V = np.asarray(vectors) if len(vectors) else field.zeros((0, n))
    s = Span(field, n, V if len(V) else None)
    return from_span(s, ambient, coord_colors)


def from_span(s: Span, ambient: str, coord_colors: Sequence) -> SubspaceBasis:
    colors = []
    for row in s.rows:
        cs = {coord_colors[k] for k in np.flatnonzero(row)}
        if len(cs) != 1:
            raise ValueError(f"non-homogeneous row in graded subspace: colors {cs}")
        colors.append(cs.pop())
    return SubspaceBasis(ambient, s.rows.copy(), tuple(s.pivots), tuple(colors))


def intersect(field: Field, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """RREF basis of span(U) & span(V)."""
    n = U.shape[1] if len(U) else V.shape[1]
    if not len(U) or not len(V):
        return field.zeros((0, n))
    M = np.vstack([U, field.reduce(-V)]).T
    N = nullspace(field, M)
    if not len(N):
        return field.zeros((0, n))
    W = field.matmul(N[:, : U.shape[0]], U)
    return Span(field, n, W).rows


def in_span(field: Field, rows: np.ndarray, v: np.ndarray) -> bool:
    s = Span(field, len(v), rows if len(rows) else None)
    return s.contains(v)


def closure(field: Field, ops: np.ndarray, seeds: np.ndarray, stop_dim: int | None = None) -> Span:
    """Smallest subspace containing ``seeds`` and stable under every matrix in ``ops``.

    ``ops`` has shape (m, n, n). Iteration stops early once ``stop_dim`` is reached.
    """
    m, n, _ = ops.shape
    if not field.is_finite and stop_dim == n and _reaches_full_mod_p(ops, seeds, n):
        return Span(field, n, field.eye(n))
    span = Span(field, n)
    frontier = span.extend(np.atleast_2d(seeds))
    stop = n if stop_dim is None else stop_dim
    while len(frontier) and span.dim < stop:
        imgs = field.matmul(ops, frontier.T)  # (m, n, f)
        cand = np.transpose(imgs, (0, 2, 1)).reshape(-1, n)
        frontier = span.extend(cand)
    return span


# rank mod p never exceeds rank over Q, so a full closure of the reduction
# certifies a full closure over Q; anything less falls back to exact arithmetic
_SHADOW_PRIME = 1_000_003


def _mod_p(arr: np.ndarray, p: int) -> np.ndarray | None:
    flat = arr.reshape(-1)
    out = np.empty(flat.shape, dtype=np.int64)
    for k, x in enumerate(flat):
        num, den = x.numerator, x.denominator
        if den % p == 0:
            return None
        out[k] = num * pow(den, -1, p) % p
    return out.reshape(arr.shape)


def _reaches_full_mod_p(ops: np.ndarray, seeds: np.ndarray, n: int) -> bool:
    p = _SHADOW_PRIME
    ops_p, seeds_p = _mod_p(ops, p), _mod_p(np.atleast_2d(seeds), p)
    if ops_p is None or seeds_p is None:
        return False
    return closure(make_field("gf", p), ops_p, seeds_p, stop_dim=n).dim == n


def color_components(coord_colors: Sequence) -> dict:
    comps: dict = {}
    for k, c in enumerate(coord_colors):
        comps.setdefault(c, []).append(k)
    return comps


def projective_points(field: Field, k: int):
    """Nonzero vectors of F_q^k with first nonzero coordinate 1, in batches."""
    q = field.characteristic
    for lead in range(k):
        m = k - lead - 1
        combos = list(itertools.product(range(q), repeat=m))
        tails = np.array(combos, dtype=field.dtype).reshape(len(combos), m)
        batch = field.zeros((len(tails), k))
        batch[:, lead] = 1
        batch[:, lead + 1 :] = tails
        yield batch


def seed_terms(field: Field, v: np.ndarray, labels: Sequence[str] | None) -> list:
    out = []
    for k in np.flatnonzero(v):
        name = labels[k] if labels is not None else f"e{k}"
        out.append([name, field.format(v[k])])
    return out


def certify_graded_simple(
    field: Field,
    coord_colors: Sequence,
    closure_of: Callable[[np.ndarray], Span],
    budget: int = 10**6,
    trials: int = 200,
    rng: np.random.Generator | None = None,
    labels: Sequence[str] | None = None,
) -> Verdict:
    """Decide whether every homogeneous seed generates the whole space.

    Basis vectors go first; then either every projective point of every
    homogeneous component (finite field, within budget) or ``trials`` random
    homogeneous seeds.
    """
    n = len(coord_colors)
    rng = rng if rng is not None else np.random.default_rng(0)
    comps = color_components(coord_colors)
    runs = 0

    def refute(v, span):
        return Verdict(
            CERTIFIED_FALSE,
            witness={
                "seed": seed_terms(field, v, labels),
                "closure_dim": span.dim,
                "ambient_dim": n,
            },
            detail={"closures": runs},
        )

    for k in range(n):
        v = field.zeros(n)
        v[k] = 1
        span = closure_of(v)
        runs += 1
        if span.dim < n:
            return refute(v, span)

    exhaustive = field.is_finite and sum(field.characteristic ** len(ix) for ix in comps.values()) <= budget
    if exhaustive:
        for idx in comps.values():
            for batch in projective_points(field, len(idx)):
                for row in batch:
                    if np.count_nonzero(row) == 1:
                        continue
                    v = field.zeros(n)
                    v[idx] = row
                    span = closure_of(v)
                    runs += 1
                    if span.dim < n:
                        return refute(v, span)
        return Verdict(CERTIFIED_TRUE, detail={"mode": "exhaustive", "closures": runs})

    keys = list(comps)
    done = 0
    while done < trials:
        idx = comps[keys[int(rng.integers(len(keys)))]]
        row = field.random_vector(rng, len(idx))
        if not np.any(row):
            continue
        v = field.zeros(n)
        v[idx] = row
        span = closure_of(v)
        runs += 1
        done += 1
        if span.dim < n:
            return refute(v, span)
    return Verdict(EVIDENCE, trials=runs, detail={"mode": "random", "closures": runs})
