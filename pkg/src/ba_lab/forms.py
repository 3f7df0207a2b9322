"""Approximation products for affine forms and their exact certificates.

The central quantity is the product sup|A q + b + p|^m * sup|q|^n over
integer pairs (p, q).  Scanning it over an annulus of q gives a truncated
version of the badly-approximable constant; integer linear algebra gives
the two exact certificates that settle the constant without scanning
(a rational solution, or a dual vector in the sense of Kronecker's
theorem on inhomogeneous approximation).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import (
    AffineSystem,
    DimensionError,
    ExactnessError,
    IntegerCandidate,
    ParameterError,
    Scalar,
    as_scalar,
    dist_to_integers,
    hnf_row_basis,
    hnf_solve,
    is_exact,
    nearest_int,
)
from .shells import shell_vectors

_CHUNK = 1 << 18
_INT64_SAFE = 1 << 62


def _ipow(x, k: int):
    out = x
    for _ in range(k - 1):
        out = out * x
    return out if k >= 1 else 1


def _npow(arr: np.ndarray, k: int) -> np.ndarray:
    out = arr.copy()
    for _ in range(k - 1):
        out = out * arr
    return out


@dataclass(frozen=True)
class ApproxStatistic:
    value: Scalar
    witness: IntegerCandidate
    q_norm: int


def product_statistic(sys: AffineSystem, q: Sequence[int]) -> ApproxStatistic:
    """sup|A q + b + p|^m * sup|q|^n with the optimal integer p."""
    q = tuple(int(x) for x in q)
    r = sys.residual(q)
    d, p = dist_to_integers(r)
    beta = max(abs(x) for x in q)
    value = _ipow(d, sys.m) * _ipow(beta, sys.n)
    return ApproxStatistic(value, IntegerCandidate(p, q), beta)


# ---------------------------------------------------------------------------
# truncated constant

@dataclass(frozen=True)
class TruncatedConstant:
    value: Scalar
    witness: IntegerCandidate
    q_min: int
    q_max: int
    exact: bool


def _interleaved_range(lo: int, hi: int, dtype) -> np.ndarray:
    s = np.arange(lo, hi + 1, dtype=dtype)
    q = np.empty(2 * s.size, dtype=dtype)
    q[0::2] = -s
    q[1::2] = s
    return q


def _scan_exact_int64(sys: AffineSystem, lo: int, hi: int):
    L = sys.scale
    m, n = sys.m, sys.n
    a_col = np.array([row[0] for row in sys.a_scaled], dtype=np.int64).reshape(-1, 1)
    b_col = np.array(sys.b_scaled, dtype=np.int64).reshape(-1, 1)
    best_key = None
    best_q = None
    start = lo
    while start <= hi:
        stop = min(hi, start + _CHUNK - 1)
        q = _interleaved_range(start, stop, np.int64)
        r = a_col * q[None, :] + b_col
        u = r % L
        d = np.minimum(u, L - u).max(axis=0)
        key = _npow(d, m) * _npow(np.abs(q), n)
        i = int(np.argmin(key))
        if best_key is None or int(key[i]) < best_key:
            best_key = int(key[i])
            best_q = int(q[i])
            if best_key == 0:
                break
        start = stop + 1

    # rebuild the witness and the exact value from the winning q
    p = []
    dmax = 0
    for ai, bi in zip(sys.a_scaled, sys.b_scaled):
        ri = ai[0] * best_q + bi
        ui = ri % L
        rho = ui if 2 * ui <= L else ui - L
        p.append(-((ri - rho) // L))
        dmax = max(dmax, min(ui, L - ui))
    value = Fraction(_ipow(dmax, m) * _ipow(abs(best_q), n), _ipow(L, m))
    return value, IntegerCandidate(tuple(p), (best_q,))


def _scan_float_1d(sys: AffineSystem, lo: int, hi: int):
    m, n = sys.m, sys.n
    a_col = sys.a_float.reshape(-1, 1)
    b_col = sys.b_float.reshape(-1, 1)
    best_key = None
    best_q = None
    start = lo
    while start <= hi:
        stop = min(hi, start + _CHUNK - 1)
        q = _interleaved_range(start, stop, np.float64)
        x = a_col * q[None, :] + b_col
        res = x - np.ceil(x - 0.5)
        alpha = np.abs(res).max(axis=0)
        key = _npow(alpha, m) * _npow(np.abs(q), n)
        i = int(np.argmin(key))
        if best_key is None or float(key[i]) < best_key:
            best_key = float(key[i])
            best_q = int(q[i])
            if best_key == 0.0:
                break
        start = stop + 1

    p = []
    for i in range(m):
        xi = float(a_col[i, 0]) * float(best_q) + float(b_col[i, 0])
        p.append(-nearest_int(xi))
    return best_key, IntegerCandidate(tuple(p), (best_q,))


def _scan_generic(sys: AffineSystem, lo: int, hi: int, floor_eps=None):
    m, n = sys.m, sys.n
    best_key = None
    best = None
    for s in range(lo, hi + 1):
        if best_key is not None:
            if best_key == 0:
                break
            if floor_eps is not None and _ipow(floor_eps, m) * _ipow(s, n) >= best_key:
                break
        for q in shell_vectors(n, s):
            d, p = dist_to_integers(sys.residual(q))
            key = _ipow(d, m) * _ipow(s, n)
            if best_key is None or key < best_key:
                best_key = key
                best = IntegerCandidate(p, q)
    return best_key, best


def _int64_bounds_ok(sys: AffineSystem, hi: int) -> bool:
    L = sys.scale
    amax = max(abs(e) for row in sys.a_scaled for e in row)
    bmax = max(abs(e) for e in sys.b_scaled)
    if amax * hi + bmax >= _INT64_SAFE:
        return False
    return _ipow(max(L // 2, 1), sys.m) * _ipow(max(hi, 1), sys.n) < _INT64_SAFE


def truncated_constant(sys: AffineSystem, q_min: int, q_max: int,
                       prune: bool = True) -> TruncatedConstant:
    """Minimum of the approximation product over q_min <= sup|q| <= q_max.

    Exact systems give an exact rational value.  The witness is the first
    minimizer in shell order (lexicographic inside a shell).  A dual
    vector, when one exists, lower-bounds all later shells and lets the
    scan stop early without changing the result.
    """
    q_min = int(q_min)
    q_max = int(q_max)
    if q_min < 1 or q_max < q_min:
        raise ParameterError("need 1 <= q_min <= q_max")
    if sys.is_exact:
        if sys.n == 1 and _int64_bounds_ok(sys, q_max):
            value, witness = _scan_exact_int64(sys, q_min, q_max)
        else:
            floor_eps = None
            if prune:
                u = kronecker_witness(sys)
                if u is not None:
                    floor_eps = kronecker_epsilon(sys, u)
            value, witness = _scan_generic(sys, q_min, q_max, floor_eps)
        return TruncatedConstant(value, witness, q_min, q_max, True)
    if sys.n == 1:
        value, witness = _scan_float_1d(sys, q_min, q_max)
    else:
        value, witness = _scan_generic(sys, q_min, q_max)
    return TruncatedConstant(value, witness, q_min, q_max, False)


# ---------------------------------------------------------------------------
# exact certificates

def rationality_witness(sys: AffineSystem) -> Optional[IntegerCandidate]:
    """Integer pair (p0, q0) with A q0 + b + p0 = 0, if one exists.

    Existence makes the constant inherit from the linear part A, so the
    offset b can be removed by translating the candidates.
    """
    if not sys.is_exact:
        raise ExactnessError("rationality certificate needs an exact system")
    m, n = sys.m, sys.n
    L = sys.scale
    mat = [list(sys.a_scaled[i]) + [L if j == i else 0 for j in range(m)]
           for i in range(m)]
    rhs = [-x for x in sys.b_scaled]
    sol = hnf_solve(mat, rhs)
    if sol is None:
        return None
    x0, _ = sol
    return IntegerCandidate(tuple(x0[n:]), tuple(x0[:n]))


def kronecker_witness(sys: AffineSystem) -> Optional[tuple]:
    """Integer u with Aᵀu integral and bᵀu nonintegral, if one exists.

    Such a dual vector certifies a positive uniform gap for every
    candidate, hence an infinite constant: the residual A q + b + p pairs
    with u to bᵀu modulo 1.
    """
    if not sys.is_exact:
        raise ExactnessError("dual certificate needs an exact system")
    m, n = sys.m, sys.n
    L = sys.scale
    # unknowns (u, w): Aᵀu = w over the integers, cleared by L
    mat = [[sys.a_scaled[i][j] for i in range(m)]
           + [-L if k == j else 0 for k in range(n)]
           for j in range(n)]
    sol = hnf_solve(mat, [0] * n)
    assert sol is not None  # homogeneous system
    _, kernel = sol
    u_basis = hnf_row_basis([vec[:m] for vec in kernel])
    for u in u_basis:
        pairing = sum(bi * ui for bi, ui in zip(sys.b, u))
        if as_scalar(pairing).denominator != 1:
            return tuple(u)
    return None


def kronecker_epsilon(sys: AffineSystem, u: Sequence[int]) -> Fraction:
    """Uniform residual gap certified by a dual vector u.

    The pairing uᵀ(A q + b + p) is congruent to bᵀu modulo 1, and is at
    most sup|A q + b + p| times the l1 norm of u, so the sup norm of every
    residual is at least dist(bᵀu, Z) / l1(u).
    """
    if not sys.is_exact:
        raise ExactnessError("gap certificate needs an exact system")
    u = tuple(int(x) for x in u)
    if len(u) != sys.m:
        raise DimensionError(f"u must have length {sys.m}")
    if not any(u):
        raise ParameterError("u must be nonzero")
    for j in range(sys.n):
        col = sum(sys.a[i][j] * u[i] for i in range(sys.m))
        if as_scalar(col).denominator != 1:
            raise ParameterError("u is not a dual vector: A^T u is not integral")
    pairing = as_scalar(sum(bi * ui for bi, ui in zip(sys.b, u)))
    gap = abs(pairing - nearest_int(pairing))
    if gap == 0:
        raise ParameterError("u pairs b into the integers and certifies nothing")
    return gap / sum(abs(x) for x in u)


class SystemKind(enum.Enum):
    RATIONAL = "Rational"
    KRONECKER_INFINITE = "KroneckerInfinite"
    NEEDS_NUMERIC = "NeedsNumeric"


@dataclass(frozen=True)
class Classification:
    kind: SystemKind
    witness: Union[IntegerCandidate, tuple, None]
    note: str


def classify(sys: AffineSystem) -> Classification:
    """Settle the constant exactly where integer linear algebra can.

    The three kinds are mutually exclusive: a rational solution forces
    bᵀu integral for every dual vector u, so the dual certificate can
    only fire when no rational solution exists.
    """
    rw = rationality_witness(sys)
    if rw is not None:
        return Classification(
            SystemKind.RATIONAL, rw,
            "integer solution found; the constant equals that of the linear part",
        )
    kw = kronecker_witness(sys)
    if kw is not None:
        return Classification(
            SystemKind.KRONECKER_INFINITE, kw,
            "dual vector certifies a uniform residual gap; the constant is infinite",
        )
    return Classification(
        SystemKind.NEEDS_NUMERIC, None,
        "no exact certificate at this level; use truncated scans",
    )


# ---------------------------------------------------------------------------
# psi-approximability

@dataclass(frozen=True)
class PowerLawPsi:
    """psi(x) = eps / x, the critical decay for the product condition."""

    eps: Scalar = Fraction(1)

    def __post_init__(self):
        if not self.eps > 0:
            raise ParameterError("eps must be positive")
        object.__setattr__(self, "eps", as_scalar(self.eps))

    def __call__(self, x):
        if not x > 0:
            raise ParameterError("psi argument must be positive")
        return self.eps / x


class TablePsi:
    """Step function from a table of (x, value) pairs.

    The abscissas must increase strictly and the values must be positive
    and nonincreasing.  A query takes the value at the largest tabulated
    abscissa not exceeding it.
    """

    def __init__(self, points: Sequence):
        pts = [(as_scalar(x), as_scalar(v)) for x, v in points]
        if not pts:
            raise ParameterError("empty psi table")
        xs = [x for x, _ in pts]
        vs = [v for _, v in pts]
        if any(x2 <= x1 for x1, x2 in zip(xs, xs[1:])):
            raise ParameterError("psi table abscissas must increase strictly")
        if any(not v > 0 for v in vs):
            raise ParameterError("psi table values must be positive")
        if any(v2 > v1 for v1, v2 in zip(vs, vs[1:])):
            raise ParameterError("psi table values must be nonincreasing")
        self.points = tuple(pts)

    def __call__(self, x):
        if x < self.points[0][0]:
            raise ParameterError("psi query below the tabulated range")
        out = self.points[0][1]
        for xi, vi in self.points:
            if xi <= x:
                out = vi
            else:
                break
        return out


def psi_approx_witnesses(sys: AffineSystem, psi: Callable, q_max: int):
    """All q with 1 <= sup|q| <= q_max whose best residual satisfies
    sup|A q + b + p|^m <= psi(sup|q|^n).

    For the power law psi(x) = eps/x this is exactly the set of q whose
    approximation product is at most eps.
    """
    q_max = int(q_max)
    if q_max < 1:
        raise ParameterError("q_max must be at least 1")
    hits = []
    m, n = sys.m, sys.n
    for s in range(1, q_max + 1):
        bound = psi(_ipow(s, n))
        for q in shell_vectors(n, s):
            d, p = dist_to_integers(sys.residual(q))
            if _ipow(d, m) <= bound:
                hits.append(IntegerCandidate(p, q))
    return hits
