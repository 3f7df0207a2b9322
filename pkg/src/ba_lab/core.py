"""Scalar plumbing and integer linear algebra shared across the package.

Scalars are either exact rationals (``fractions.Fraction``, always in lowest
terms with positive denominator) or Python floats.  Arithmetic between exact
values stays exact; anything mixed with a float decays to float, and callers
that certify exact claims check exactness up front instead of coercing.

Integer vectors are plain tuples of Python ints, so all integer linear
algebra here is arbitrary precision by construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

Scalar = Union[Fraction, float]

DEFAULT_ENUM_BUDGET = 10_000_000


class ParameterError(ValueError):
    """A numeric argument violates an operation's contract."""


class DimensionError(ParameterError):
    """Vector or matrix shapes do not line up."""


class ExactnessError(ParameterError):
    """An exact-only operation received floating-point input."""


class BudgetError(RuntimeError):
    """Candidate enumeration would exceed the configured budget."""

    def __init__(self, required: int, budget: int):
        super().__init__(
            f"enumeration needs at least {required} candidates "
            f"but the budget is {budget}"
        )
        self.required = required
        self.budget = budget


# ---------------------------------------------------------------------------
# scalars

_INT_RE = re.compile(r"^[+-]?\d+$")
_RATIONAL_RE = re.compile(r"^[+-]?\d+\s*/\s*\d+$")
_DECIMAL_RE = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")


def is_exact(x) -> bool:
    """True for ints and Fractions, False for floats."""
    return not isinstance(x, float)


def as_scalar(x) -> Scalar:
    if isinstance(x, float):
        return x
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not a scalar: {x!r}")


def parse_scalar(text: str, force_float: bool = False) -> Scalar:
    """Parse ``num/den``, integer, or decimal notation.

    ``num/den`` and bare integers parse exactly; decimal or exponent
    notation parses to float.  ``force_float`` downgrades everything.
    """
    t = text.strip()
    if _RATIONAL_RE.match(t):
        try:
            value: Scalar = Fraction(t.replace(" ", ""))
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {text!r}")
    elif _INT_RE.match(t):
        value = Fraction(int(t))
    elif _DECIMAL_RE.match(t):
        value = float(t)
    else:
        raise ValueError(f"cannot parse scalar {text!r}")
    if force_float:
        return float(value)
    return value


def format_scalar(x: Scalar) -> str:
    """Inverse of parse_scalar: ``num/den`` for exact, ``%.17g`` for float."""
    if isinstance(x, float):
        return "%.17g" % x
    x = as_scalar(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def sup_norm(v: Sequence) -> Scalar:
    """Largest absolute entry.  Exact when every entry is exact."""
    if len(v) == 0:
        raise DimensionError("sup_norm of an empty vector")
    return max(abs(as_scalar(x)) for x in v)


def nearest_int(x: Scalar) -> int:
    """Nearest integer, ties resolved so the residual is +1/2, not -1/2."""
    if isinstance(x, float):
        return math.ceil(x - 0.5)
    return math.ceil(as_scalar(x) - Fraction(1, 2))


def dist_to_integers(v: Sequence):
    """Distance from a vector to the integer lattice in the sup norm.

    Returns ``(d, p)`` where ``p`` is an integer vector minimizing
    ``sup_norm(v + p)`` and ``d`` is that minimum.  Always ``d <= 1/2``,
    with equality only at half-integral coordinates.
    """
    if len(v) == 0:
        raise DimensionError("dist_to_integers of an empty vector")
    offsets = []
    residuals = []
    for x in v:
        x = as_scalar(x)
        k = nearest_int(x)
        offsets.append(-k)
        residuals.append(abs(x - k))
    return max(residuals), tuple(offsets)


# ---------------------------------------------------------------------------
# integer linear algebra

def _xgcd(a: int, b: int):
    """Extended Euclid: returns (g, x, y) with g = ax + by, g >= 0."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        qt = g // next_g
        x, next_x = next_x, x - qt * next_x
        y, next_y = next_y, y - qt * next_y
        g, next_g = next_g, g - qt * next_g
    if g < 0:
        g, x, y = -g, -x, -y
    return g, x, y


def hnf_row_basis(vectors: Sequence[Sequence[int]]):
    """Row-style Hermite normal form basis of the lattice the rows span.

    Pivots are positive, entries above each pivot are reduced into
    [0, pivot).  Zero rows are dropped.  The result is a canonical basis,
    so equal lattices produce equal output.
    """
    mat = [list(map(int, v)) for v in vectors if any(v)]
    if not mat:
        return ()
    ncols = len(mat[0])
    if any(len(row) != ncols for row in mat):
        raise DimensionError("ragged rows in hnf_row_basis")
    rank = 0
    for col in range(ncols):
        piv = None
        for i in range(rank, len(mat)):
            if mat[i][col] == 0:
                continue
            if piv is None:
                piv = i
                continue
            a, b = mat[piv][col], mat[i][col]
            g, x, y = _xgcd(a, b)
            ag, bg = a // g, b // g
            rp, ri = mat[piv], mat[i]
            for j in range(ncols):
                old_p, old_i = rp[j], ri[j]
                rp[j] = x * old_p + y * old_i
                ri[j] = ag * old_i - bg * old_p
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        if mat[rank][col] < 0:
            mat[rank] = [-e for e in mat[rank]]
        for i in range(rank):
            f = mat[i][col] // mat[rank][col]
            if f:
                mat[i] = [e - f * pe for e, pe in zip(mat[i], mat[rank])]
        rank += 1
    return tuple(tuple(row) for row in mat[:rank])


def hnf_solve(mat: Sequence[Sequence[int]], rhs: Sequence[int]):
    """Solve M x = c over the integers via column Hermite reduction.

    Returns ``(x0, kernel)`` where ``x0`` is one integer solution and
    ``kernel`` is a canonical basis of the integer nullspace of M, or
    ``None`` when no integer solution exists.  Unimodular column
    operations are tracked so the answer is exact at any size.
    """
    H = [list(map(int, row)) for row in mat]
    c = [int(x) for x in rhs]
    nrows = len(H)
    if nrows == 0:
        raise DimensionError("empty matrix")
    ncols = len(H[0])
    if any(len(row) != ncols for row in H):
        raise DimensionError("ragged matrix")
    if len(c) != nrows:
        raise DimensionError("rhs length does not match row count")

    U = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def swap_cols(j1, j2):
        if j1 == j2:
            return
        for row in H:
            row[j1], row[j2] = row[j2], row[j1]
        for row in U:
            row[j1], row[j2] = row[j2], row[j1]

    def combine(i, j1, j2):
        # zero H[i][j2] against pivot H[i][j1] with a unimodular pair
        a, b = H[i][j1], H[i][j2]
        if b % a == 0:
            f = b // a
            for row in H:
                row[j2] -= f * row[j1]
            for row in U:
                row[j2] -= f * row[j1]
            return
        g, x, y = _xgcd(a, b)
        ag, bg = a // g, b // g
        for row in H:
            o1, o2 = row[j1], row[j2]
            row[j1] = x * o1 + y * o2
            row[j2] = ag * o2 - bg * o1
        for row in U:
            o1, o2 = row[j1], row[j2]
            row[j1] = x * o1 + y * o2
            row[j2] = ag * o2 - bg * o1

    pivots = {}  # row index -> pivot column
    col = 0
    for i in range(nrows):
        if col == ncols:
            break
        nz = [j for j in range(col, ncols) if H[i][j] != 0]
        if not nz:
            continue
        swap_cols(col, nz[0])
        for j in range(col + 1, ncols):
            if H[i][j] != 0:
                combine(i, col, j)
        if H[i][col] < 0:
            for row in H:
                row[col] = -row[col]
            for row in U:
                row[col] = -row[col]
        for j in range(col):
            f = H[i][j] // H[i][col]
            if f:
                for row in H:
                    row[j] -= f * row[col]
                for row in U:
                    row[j] -= f * row[col]
        pivots[i] = col
        col += 1

    y = [0] * ncols
    for i in range(nrows):
        s = c[i] - sum(H[i][t] * y[t] for t in range(col) if H[i][t])
        if i in pivots:
            t = pivots[i]
            if s % H[i][t] != 0:
                return None
            y[t] = s // H[i][t]
        elif s != 0:
            return None

    x0 = tuple(sum(U[i][t] * y[t] for t in range(ncols)) for i in range(ncols))
    kernel_cols = [tuple(U[i][j] for i in range(ncols)) for j in range(col, ncols)]
    return x0, hnf_row_basis(kernel_cols)


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class IntegerCandidate:
    """An integer pair (p, q) entering the approximation product."""

    p: tuple
    q: tuple

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(int(x) for x in self.p))
        object.__setattr__(self, "q", tuple(int(x) for x in self.q))


@dataclass(frozen=True, eq=True)
class AffineSystem:
    """m affine forms in n variables: the map q -> A q + b.

    Entries are Fractions or floats.  A system is exact when every entry
    of A and b is a Fraction; exact-only witnesses refuse float systems.
    """

    a: tuple
    b: tuple

    def __post_init__(self):
        rows = tuple(tuple(as_scalar(x) for x in row) for row in self.a)
        rhs = tuple(as_scalar(x) for x in self.b)
        if len(rows) == 0 or len(rhs) == 0:
            raise DimensionError("need at least one form")
        width = len(rows[0])
        if width == 0:
            raise DimensionError("need at least one variable")
        if any(len(r) != width for r in rows):
            raise DimensionError("ragged coefficient matrix")
        if len(rhs) != len(rows):
            raise DimensionError("offset length must equal the number of forms")
        object.__setattr__(self, "a", rows)
        object.__setattr__(self, "b", rhs)

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def n(self) -> int:
        return len(self.a[0])

    @cached_property
    def is_exact(self) -> bool:
        return all(is_exact(x) for row in self.a for x in row) and all(
            is_exact(x) for x in self.b
        )

    @classmethod
    def one_dim(cls, a: Scalar, b: Scalar) -> "AffineSystem":
        return cls(((a,),), (b,))

    @classmethod
    def parse(cls, m: int, n: int, a_entries: Sequence[str],
              b_entries: Sequence[str], force_float: bool = False) -> "AffineSystem":
        """Build from row-major text entries, shared by the CLI and scripts."""
        if len(a_entries) != m * n:
            raise DimensionError(f"expected {m * n} coefficient entries, got {len(a_entries)}")
        if len(b_entries) != m:
            raise DimensionError(f"expected {m} offset entries, got {len(b_entries)}")
        vals = [parse_scalar(s, force_float) for s in a_entries]
        rows = tuple(tuple(vals[i * n:(i + 1) * n]) for i in range(m))
        rhs = tuple(parse_scalar(s, force_float) for s in b_entries)
        return cls(rows, rhs)

    # exact integer clearing: a_scaled / scale == a, b_scaled / scale == b
    @cached_property
    def scale(self) -> int:
        if not self.is_exact:
            raise ExactnessError("denominator clearing needs an exact system")
        L = 1
        for row in self.a:
            for x in row:
                L = L * x.denominator // math.gcd(L, x.denominator)
        for x in self.b:
            L = L * x.denominator // math.gcd(L, x.denominator)
        return L

    @cached_property
    def a_scaled(self) -> tuple:
        L = self.scale
        return tuple(tuple(int(x * L) for x in row) for row in self.a)

    @cached_property
    def b_scaled(self) -> tuple:
        L = self.scale
        return tuple(int(x * L) for x in self.b)

    @cached_property
    def a_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.a], dtype=np.float64)

    @cached_property
    def b_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.b], dtype=np.float64)

    def residual(self, q: Sequence[int]) -> tuple:
        """A q + b, exact when the system is."""
        if len(q) != self.n:
            raise DimensionError(f"q must have length {self.n}")
        return tuple(
            sum(aij * qj for aij, qj in zip(row, q)) + bi
            for row, bi in zip(self.a, self.b)
        )

    def residual_with(self, cand: IntegerCandidate) -> tuple:
        """A q + b + p for a candidate pair."""
        if len(cand.p) != self.m:
            raise DimensionError(f"p must have length {self.m}")
        r = self.residual(cand.q)
        return tuple(ri + pi for ri, pi in zip(r, cand.p))
