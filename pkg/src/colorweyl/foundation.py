"""Exact scalar fields, abelian grading groups, bicharacters and verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import lcm
from typing import Any, Iterable, Sequence

import numpy as np

Color = tuple  # canonical integer coordinates


class ConstructionError(ValueError):
    """Raised when an input violates a structural rule.

    ``code`` names the violated rule (e.g. ``CHAR_TWO``), ``witness`` holds
    whatever basis tuple or value exhibits the violation.
    """

    def __init__(self, code: str, message: str = "", witness: Any = None):
        self.code = code
        self.witness = witness
        super().__init__(f"{code}: {message}" if message else code)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


# float64 holds integers exactly up to 2**53
_FLOAT_EXACT = 2**53


class Field:
    """The rationals or a prime field F_p with p odd.

    Elements of F_p are ints in ``[0, p)`` (arrays use int64), rationals are
    ``Fraction`` (arrays use dtype object). All arithmetic is exact.
    """

    def __init__(self, characteristic: int):
        self.characteristic = characteristic
        p = characteristic
        self.dtype = np.int64 if (p and p < 2**31) else object

    @property
    def kind(self) -> str:
        return "prime" if self.characteristic else "rationals"

    @property
    def is_finite(self) -> bool:
        return self.characteristic > 0

    @property
    def order(self) -> int | None:
        return self.characteristic or None

    def __eq__(self, other):
        return isinstance(other, Field) and other.characteristic == self.characteristic

    def __hash__(self):
        return hash(("Field", self.characteristic))

    def __repr__(self):
        return f"GF({self.characteristic})" if self.characteristic else "QQ"

    @property
    def name(self) -> str:
        return f"gf{self.characteristic}" if self.characteristic else "rational"

    # -- scalars --------------------------------------------------------
    def __call__(self, x) -> int | Fraction:
        p = self.characteristic
        if p:
            if isinstance(x, Fraction):
                return (x.numerator * pow(x.denominator, -1, p)) % p
            return int(x) % p
        return Fraction(x)

    def one(self):
        return self(1)

    def zero(self):
        return self(0)

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        p = self.characteristic
        if p:
            return pow(int(x), -1, p)
        return 1 / Fraction(x)

    def pow(self, x, e: int):
        p = self.characteristic
        if p:
            return pow(int(x), e, p)
        return Fraction(x) ** e

    def elements(self) -> range:
        if not self.characteristic:
            raise ValueError("the rationals are not enumerable")
        return range(self.characteristic)

    def format(self, x) -> str:
        return str(self(x))

    # -- arrays ---------------------------------------------------------
    def array(self, data) -> np.ndarray:
        arr = np.array(data, dtype=object)
        out = np.empty(arr.shape, dtype=self.dtype)
        flat_in = arr.reshape(-1)
        flat_out = out.reshape(-1)
        for k, v in enumerate(flat_in):
            flat_out[k] = self(v)
        return out

    def zeros(self, shape) -> np.ndarray:
        if self.dtype is object:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape, dtype=self.dtype)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self(1)
        return out

    def reduce(self, arr):
        """Canonicalise an integer-valued array (no-op over the rationals)."""
        if self.characteristic:
            return np.mod(arr, self.characteristic)
        return arr

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        p = self.characteristic
        if not p:
            return _rational_product(a, b, np.matmul, a.shape[-1] if a.ndim else 1)
        k = a.shape[-1]
        if (p - 1) ** 2 * max(k, 1) < _FLOAT_EXACT:
            prod = np.matmul(a.astype(np.float64), b.astype(np.float64))
            return np.mod(np.rint(prod).astype(np.int64), p)
        return np.mod(np.matmul(a.astype(object), b.astype(object)), p).astype(self.dtype)

    def tensordot(self, a, b, axes) -> np.ndarray:
        p = self.characteristic
        ax = axes[0] if isinstance(axes, (list, tuple)) else list(range(a.ndim - axes, a.ndim))
        ax = [ax] if isinstance(ax, int) else ax
        k = int(np.prod([a.shape[i] for i in ax])) if len(ax) else 1
        if not p:
            return _rational_product(a, b, lambda x, y: np.tensordot(x, y, axes=axes), k)
        if (p - 1) ** 2 * max(k, 1) < _FLOAT_EXACT:
            prod = np.tensordot(a.astype(np.float64), b.astype(np.float64), axes=axes)
            return np.mod(np.rint(prod).astype(np.int64), p)
        prod = np.tensordot(a.astype(object), b.astype(object), axes=axes)
        return np.mod(prod, p).astype(self.dtype)

    def random_vector(self, rng: np.random.Generator, n: int) -> np.ndarray:
        p = self.characteristic
        if p:
            return rng.integers(0, p, size=n).astype(self.dtype)
        return self.array(rng.integers(-3, 4, size=n))


def _integerize(arr: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Integer numerators over a common denominator, plus the largest magnitude."""
    flat = np.asarray(arr, dtype=object).reshape(-1)
    den = 1
    for x in flat:
        d = getattr(x, "denominator", 1)
        if d != 1:
            den = lcm(den, d)
    nums = [int(x.numerator * (den // x.denominator)) if den != 1 else int(x) for x in flat]
    big = max((abs(v) for v in nums), default=0)
    return np.array(nums, dtype=object).reshape(np.shape(arr)), den, big


def _rational_product(a, b, op, k: int) -> np.ndarray:
    """Exact rational product computed on integers, via float64 when no rounding can occur."""
    ia, da, ma = _integerize(a)
    ib, db, mb = _integerize(b)
    if ma * mb * max(k, 1) < _FLOAT_EXACT:
        prod = np.rint(op(ia.astype(np.float64), ib.astype(np.float64))).astype(np.int64).astype(object)
    else:
        prod = op(ia, ib)
    prod = np.asarray(prod, dtype=object)
    den = da * db
    out = np.empty(prod.shape, dtype=object)
    flat_in, flat_out = prod.reshape(-1), out.reshape(-1)
    for i, v in enumerate(flat_in):
        flat_out[i] = Fraction(int(v), den)
    return out


def make_field(kind: str, p: int | None = None) -> Field:
    if kind in ("rational", "rationals", "Q", "QQ"):
        return Field(0)
    if kind not in ("prime", "gf"):
        raise ConstructionError("BAD_FIELD", f"unknown field kind {kind!r}")
    if p is None:
        raise ConstructionError("BAD_FIELD", "prime field needs p")
    if p == 2:
        raise ConstructionError("CHAR_TWO", "characteristic 2 is excluded")
    if not _is_prime(p):
        raise ConstructionError("NOT_PRIME", f"{p} is not prime")
    return Field(p)


@dataclass(frozen=True)
class Grading:
    """Gamma = Z^free_rank + Z_{n_1} + ... + Z_{n_k}."""

    free_rank: int = 0
    torsion_moduli: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion_moduli", tuple(self.torsion_moduli))
        if self.free_rank < 0 or any(n < 2 for n in self.torsion_moduli):
            raise ConstructionError("BAD_GROUP", f"invalid group {self}")

    @property
    def ngens(self) -> int:
        return self.free_rank + len(self.torsion_moduli)

    @property
    def zero(self) -> Color:
        return (0,) * self.ngens

    def color(self, coords: Iterable[int]) -> Color:
        c = tuple(int(x) for x in coords)
        if len(c) != self.ngens:
            raise ConstructionError(
                "COLOR_ARITY", f"color {c} has {len(c)} coordinates, group needs {self.ngens}"
            )
        r = self.free_rank
        return c[:r] + tuple(x % n for x, n in zip(c[r:], self.torsion_moduli))

    def add(self, a: Color, b: Color) -> Color:
        if len(a) != self.ngens or len(b) != self.ngens:
            raise ConstructionError("COLOR_ARITY", f"cannot add {a} and {b} in {self}")
        return self.color(x + y for x, y in zip(a, b))

    def neg(self, a: Color) -> Color:
        return self.color(-x for x in a)

    def scale(self, a: Color, k: int) -> Color:
        return self.color(k * x for x in a)

    def sum(self, colors: Iterable[Color]) -> Color:
        out = self.zero
        for c in colors:
            out = self.add(out, c)
        return out

    def generators(self) -> list[Color]:
        n = self.ngens
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]

    def random_color(self, rng: np.random.Generator, spread: int = 5) -> Color:
        r = self.free_rank
        free = rng.integers(-spread, spread + 1, size=r).tolist()
        tors = [int(rng.integers(0, n)) for n in self.torsion_moduli]
        return self.color(free + tors)


def color_add(g: Grading, a: Color, b: Color) -> Color:
    return g.add(a, b)


class Bicharacter:
    """Skew-symmetric bicharacter given by its values on generator pairs."""

    def __init__(self, grading: Grading, field: Field, gen_values: Sequence[Sequence]):
        self.grading = grading
        self.field = field
        n = grading.ngens
        rows = [list(r) for r in gen_values]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ConstructionError("BAD_SHAPE", f"bicharacter matrix must be {n}x{n}")
        E = tuple(tuple(field(x) for x in r) for r in rows)
        self.values = E
        self._cache: dict = {}
        self._validate()

    def _validate(self):
        f, E, g = self.field, self.values, self.grading
        n = g.ngens
        one, minus = f(1), f(-1)
        for i in range(n):
            for j in range(n):
                if E[i][j] == 0:
                    raise ConstructionError("ZERO_ENTRY", f"E[{i}][{j}] = 0", (i, j))
                if not f.is_finite and E[i][j] not in (one, minus):
                    raise ConstructionError(
                        "NONRATIONAL_ROOT", f"E[{i}][{j}] = {E[i][j]} is not +-1 over Q", (i, j)
                    )
        for i in range(n):
            for j in range(n):
                if f(E[i][j] * E[j][i]) != one:
                    raise ConstructionError(
                        "SKEW_VIOLATION", f"E[{i}][{j}]*E[{j}][{i}] != 1", (i, j)
                    )
        for i in range(n):
            if E[i][i] not in (one, minus):
                raise ConstructionError("DIAGONAL_NOT_SIGN", f"E[{i}][{i}] = {E[i][i]}", (i, i))
        r = g.free_rank
        for t, order in enumerate(g.torsion_moduli):
            i = r + t
            for j in range(n):
                if f.pow(E[i][j], order) != one or f.pow(E[j][i], order) != one:
                    raise ConstructionError(
                        "TORSION_INCONSISTENT",
                        f"generator {i} has order {order} but E[{i}][{j}]^{order} != 1",
                        (i, j),
                    )

    def __call__(self, a: Color, c: Color):
        return self.eps(a, c)

    def eps(self, a: Color, c: Color):
        key = (a, c)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        f, E = self.field, self.values
        val = f(1)
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j, cj in enumerate(c):
                if cj and E[i][j] != 1:
                    val = f(val * f.pow(E[i][j], ai * cj))
        self._cache[key] = val
        return val

    def parity(self, a: Color) -> str:
        return "plus" if self.eps(a, a) == 1 else "minus"

    def is_odd(self, a: Color) -> bool:
        return self.eps(a, a) != 1

    def __eq__(self, other):
        return (
            isinstance(other, Bicharacter)
            and other.grading == self.grading
            and other.field == self.field
            and other.values == self.values
        )

    def __hash__(self):
        return hash((self.grading, self.field, self.values))

    def __repr__(self):
        return f"Bicharacter({self.grading}, {self.field}, {self.values})"


def make_bicharacter(g: Grading, f: Field, gen_values) -> Bicharacter:
    return Bicharacter(g, f, gen_values)


def eps(b: Bicharacter, a: Color, c: Color):
    return b.eps(a, c)


def parity(b: Bicharacter, a: Color) -> str:
    return b.parity(a)


def super_bicharacter(f: Field) -> Bicharacter:
    """Z_2 with eps(i, j) = (-1)^{ij}."""
    return Bicharacter(Grading(0, (2,)), f, [[-1]])


def trivial_bicharacter(f: Field, grading: Grading | None = None) -> Bicharacter:
    g = grading or Grading()
    n = g.ngens
    return Bicharacter(g, f, [[1] * n for _ in range(n)])


CERTIFIED_TRUE = "certified_true"
CERTIFIED_FALSE = "certified_false"
EVIDENCE = "evidence"


@dataclass
class Verdict:
    status: str
    witness: Any = None
    trials: int = 0
    detail: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (CERTIFIED_TRUE, CERTIFIED_FALSE, EVIDENCE):
            raise ValueError(f"unknown verdict status {self.status!r}")
        if self.status == CERTIFIED_FALSE and self.witness is None:
            raise ValueError("a certified_false verdict needs a witness")
        if self.status == EVIDENCE and self.trials <= 0:
            raise ValueError("an evidence verdict needs trials > 0")

    @property
    def is_true(self) -> bool:
        return self.status == CERTIFIED_TRUE

    @property
    def is_false(self) -> bool:
        return self.status == CERTIFIED_FALSE

    @property
    def is_evidence(self) -> bool:
        return self.status == EVIDENCE

    @property
    def holds(self) -> bool:
        """True unless refuted (evidence counts as holding)."""
        return self.status != CERTIFIED_FALSE

    def __bool__(self):
        raise TypeError("use .is_true / .holds on a Verdict")
