"""Diagonal flows acting on affine lattices built from affine forms.

A system q -> A q + b embeds as the affine lattice with block-triangular
basis [[I, A], [0, I]] and translation (b, 0).  The one-parameter diagonal
flow expands the first m coordinates at rate 1/m and contracts the last n
at rate 1/n, so the image of an integer pair (p, q) has norm
max(e^{t/m} sup|A q + b + p|, e^{-t/n} sup|q|).  Minima of that norm over
time and over candidates carry the same information as the approximation
products in :mod:`ba_lab.forms`, which is what the scans here exploit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import (
    DEFAULT_ENUM_BUDGET,
    AffineSystem,
    BudgetError,
    DimensionError,
    IntegerCandidate,
    ParameterError,
    Scalar,
    as_scalar,
    dist_to_integers,
    is_exact,
    nearest_int,
)
from .forms import _ipow, _npow, kronecker_epsilon, kronecker_witness
from .shells import annulus_size, shell_size, shell_vectors

_SHELL_BLOCK = 1 << 15


@dataclass(frozen=True)
class FlowSpec:
    """Dimensions and rates of the diagonal flow for an (m, n) system."""

    m: int
    n: int

    def __post_init__(self):
        if not (isinstance(self.m, int) and isinstance(self.n, int)):
            raise ParameterError("dimensions must be integers")
        if self.m < 1 or self.n < 1:
            raise ParameterError("dimensions must be positive")

    @classmethod
    def for_system(cls, sys: AffineSystem) -> "FlowSpec":
        return cls(sys.m, sys.n)

    @property
    def expand_rate(self) -> Fraction:
        return Fraction(1, self.m)

    @property
    def contract_rate(self) -> Fraction:
        return Fraction(1, self.n)

    @property
    def volume_rate(self) -> Fraction:
        # sum of expansion rates over the m*n matrix directions and the
        # m offset directions; collapses to m + n + 1
        return (self.m * self.n * (self.expand_rate + self.contract_rate)
                + self.m * self.expand_rate)

    @property
    def min_rate(self) -> Fraction:
        # the offset directions expand at 1/m, the matrix directions at
        # 1/m + 1/n, so 1/m is the slowest rate
        return self.expand_rate

    @property
    def expanding_dim(self) -> int:
        return self.m * self.n + self.m

    def _check(self, sys: AffineSystem):
        if sys.m != self.m or sys.n != self.n:
            raise DimensionError("flow and system dimensions disagree")


def flow_matrix(fs: FlowSpec, t: float) -> np.ndarray:
    """Diagonal matrix diag(e^{t/m} I_m, e^{-t/n} I_n)."""
    eu = math.exp(t / fs.m)
    ed = math.exp(-t / fs.n)
    return np.diag([eu] * fs.m + [ed] * fs.n).astype(np.float64)


# ---------------------------------------------------------------------------
# affine lattice states

def _exact_det(rows):
    a = [list(r) for r in rows]
    k = len(a)
    det = Fraction(1)
    for i in range(k):
        piv = next((r for r in range(i, k) if a[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            a[i], a[piv] = a[piv], a[i]
            det = -det
        det *= a[i][i]
        for r in range(i + 1, k):
            if a[r][i]:
                f = a[r][i] / a[i][i]
                a[r] = [x - f * y for x, y in zip(a[r], a[i])]
    return det


@dataclass(frozen=True, eq=False)
class AffineLatticeState:
    """A unimodular basis together with a translation vector."""

    basis: tuple
    translation: tuple

    def __post_init__(self):
        basis = tuple(tuple(as_scalar(x) for x in row) for row in self.basis)
        shift = tuple(as_scalar(x) for x in self.translation)
        k = len(basis)
        if k == 0 or any(len(row) != k for row in basis):
            raise DimensionError("basis must be square")
        if len(shift) != k:
            raise DimensionError("translation length must match the basis")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "translation", shift)
        if all(is_exact(x) for row in basis for x in row):
            if _exact_det(basis) != 1:
                raise ParameterError("basis determinant must be 1")
        else:
            det = float(np.linalg.det(np.array(basis, dtype=np.float64)))
            if abs(det - 1.0) > 1e-9:
                raise ParameterError(f"basis determinant {det} is not within 1e-9 of 1")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def apply(self, v: Sequence) -> tuple:
        """Image of a vector under the affine map."""
        if len(v) != self.dim:
            raise DimensionError("vector length must match the basis")
        return tuple(
            sum(bij * as_scalar(vj) for bij, vj in zip(row, v)) + wi
            for row, wi in zip(self.basis, self.translation)
        )

    def compose(self, other: "AffineLatticeState") -> "AffineLatticeState":
        """self after other, as affine maps."""
        if self.dim != other.dim:
            raise DimensionError("cannot compose maps of different dimension")
        k = self.dim
        prod = tuple(
            tuple(sum(self.basis[i][l] * other.basis[l][j] for l in range(k))
                  for j in range(k))
            for i in range(k)
        )
        shift = tuple(
            sum(self.basis[i][l] * other.translation[l] for l in range(k))
            + self.translation[i]
            for i in range(k)
        )
        return AffineLatticeState(prod, shift)


def affine_lattice(sys: AffineSystem) -> AffineLatticeState:
    """The block-triangular state [[I, A], [0, I]] with translation (b, 0)."""
    m, n = sys.m, sys.n
    one, zero = Fraction(1), Fraction(0)
    rows = []
    for i in range(m):
        rows.append(tuple(one if j == i else zero for j in range(m)) + sys.a[i])
    for j in range(n):
        rows.append(tuple(zero for _ in range(m))
                    + tuple(one if l == j else zero for l in range(n)))
    shift = sys.b + tuple(zero for _ in range(n))
    return AffineLatticeState(tuple(rows), shift)


def vector_image(fs: FlowSpec, sys: AffineSystem, cand: IntegerCandidate,
                 t: float) -> np.ndarray:
    """g_t applied to the lattice point of (p, q): the concatenation of
    e^{t/m} (A q + b + p) and e^{-t/n} q."""
    fs._check(sys)
    r = sys.residual_with(cand)
    eu = math.exp(t / fs.m)
    ed = math.exp(-t / fs.n)
    top = [eu * float(x) for x in r]
    bottom = [ed * float(x) for x in cand.q]
    return np.array(top + bottom, dtype=np.float64)


def conjugate_flow(fs: FlowSpec, sys: AffineSystem, t: float) -> AffineSystem:
    """System whose lattice state is g_t (state of sys) g_{-t}.

    The matrix picks up e^{(1/m + 1/n) t} and the offset e^{t/m}; at t = 0
    the system is returned unchanged, exact entries included.
    """
    fs._check(sys)
    if t == 0:
        return sys
    fa = math.exp((1.0 / fs.m + 1.0 / fs.n) * t)
    fb = math.exp(t / fs.m)
    rows = tuple(tuple(float(x) * fa for x in row) for row in sys.a)
    shift = tuple(float(x) * fb for x in sys.b)
    return AffineSystem(rows, shift)


# ---------------------------------------------------------------------------
# per-vector flow minimum

def _root(x: float, k: int) -> float:
    if k == 2:
        return math.sqrt(x)
    return x ** (1.0 / k)


@dataclass(frozen=True)
class FlowMin:
    """Minimum over t >= 0 of the flowed norm of one candidate.

    ``best_time`` is None when the residual vanishes: the norm then decays
    forever and the infimum 0 is not attained at any finite time.
    ``value_power`` is the exact (m+n)-th power of the value whenever the
    system is exact.
    """

    value: float
    best_time: Optional[float]
    resid_norm: Scalar
    q_norm: int
    value_power: Scalar


def flow_minimum(fs: FlowSpec, sys: AffineSystem, cand: IntegerCandidate) -> FlowMin:
    """Closed form for min_{t >= 0} max(e^{t/m} alpha, e^{-t/n} beta).

    With alpha = sup|A q + b + p| and beta = sup|q|: if beta >= alpha the
    two branches balance at t* = (m n / (m+n)) log(beta/alpha) and the
    minimum is (alpha^m beta^n)^{1/(m+n)}; otherwise the max is already
    the expanding branch at t = 0 and the minimum is alpha.
    """
    fs._check(sys)
    r = sys.residual_with(cand)
    alpha = max(abs(as_scalar(x)) for x in r)
    beta = max(abs(x) for x in cand.q)
    k = fs.m + fs.n
    if alpha == 0:
        return FlowMin(0.0, None, alpha, beta, _ipow(alpha, k))
    if beta >= alpha:
        power = _ipow(alpha, fs.m) * _ipow(beta, fs.n)
        value = _root(float(power), k)
        t_star = (fs.m * fs.n / k) * math.log(float(beta) / float(alpha))
        return FlowMin(value, t_star, alpha, beta, power)
    return FlowMin(float(alpha), 0.0, alpha, beta, _ipow(alpha, k))


# ---------------------------------------------------------------------------
# orbit gaps: infimum of the flowed norm over candidates and all t >= 0

@dataclass(frozen=True)
class GapReport:
    value: float
    witness: IntegerCandidate
    q_max: int
    exact: bool
    value_power: Scalar


def _zeros(n: int) -> tuple:
    return (0,) * n


def _gap_scan_generic(sys: AffineSystem, q_max: int, state, floor_eps):
    m, n = sys.m, sys.n
    k = m + n
    best_key, best_w, best_pure, best_alpha = state
    for s in range(1, q_max + 1):
        if best_key == 0:
            break
        if floor_eps is not None and _ipow(floor_eps, m) * _ipow(s, n) >= best_key:
            break
        for q in shell_vectors(n, s):
            alpha, p = dist_to_integers(sys.residual(q))
            if s >= alpha:
                key = _ipow(alpha, m) * _ipow(s, n)
                pure = False
            else:
                key = _ipow(alpha, k)
                pure = True
            if key < best_key:
                best_key, best_w = key, IntegerCandidate(p, q)
                best_pure, best_alpha = pure, alpha
    return best_key, best_w, best_pure, best_alpha


def _gap_scan_float_1d(sys: AffineSystem, q_max: int, state):
    m, n = sys.m, sys.n
    k = m + n
    best_key, best_w, best_pure, best_alpha = state
    a_col = sys.a_float.reshape(-1, 1)
    b_col = sys.b_float.reshape(-1, 1)
    start = 1
    while start <= q_max and best_key > 0:
        stop = min(q_max, start + (1 << 17) - 1)
        s = np.arange(start, stop + 1, dtype=np.float64)
        q = np.empty(2 * s.size, dtype=np.float64)
        q[0::2] = -s
        q[1::2] = s
        x = a_col * q[None, :] + b_col
        res = x - np.ceil(x - 0.5)
        alpha = np.abs(res).max(axis=0)
        beta = np.abs(q)
        mixed = _npow(alpha, m) * _npow(beta, n)
        key = np.where(beta >= alpha, mixed, _npow(alpha, k))
        i = int(np.argmin(key))
        if float(key[i]) < best_key:
            best_key = float(key[i])
            qi = int(q[i])
            p = tuple(-nearest_int(float(a_col[j, 0]) * qi + float(b_col[j, 0]))
                      for j in range(m))
            best_w = IntegerCandidate(p, (qi,))
            best_pure = float(beta[i]) < float(alpha[i])
            best_alpha = float(alpha[i])
        start = stop + 1
    return best_key, best_w, best_pure, best_alpha


def _finish_gap(sys, q_max, state) -> GapReport:
    key, witness, pure, alpha = state
    k = sys.m + sys.n
    value = float(alpha) if pure else _root(float(key), k)
    if key == 0:
        value = 0.0
    return GapReport(value, witness, q_max, sys.is_exact, key)


def _check_gap_budget(n: int, q_max: int, budget: Optional[int]):
    budget = DEFAULT_ENUM_BUDGET if budget is None else int(budget)
    required = annulus_size(n, 0, q_max)
    if required > budget:
        raise BudgetError(required, budget)
    return budget


def affine_orbit_gap(fs: FlowSpec, sys: AffineSystem, q_max: int,
                     budget: Optional[int] = None) -> GapReport:
    """Infimum over integer pairs (p, q) with sup|q| <= q_max, q = 0
    included, of the per-candidate flow minimum.

    Equals the (m+n)-th root of the smallest product key; a vanishing
    residual anywhere makes the gap 0.
    """
    fs._check(sys)
    q_max = int(q_max)
    if q_max < 0:
        raise ParameterError("q_max must be nonnegative")
    _check_gap_budget(sys.n, q_max, budget)
    k = fs.m + fs.n
    alpha0, p0 = dist_to_integers(sys.b)
    state = (_ipow(alpha0, k), IntegerCandidate(p0, _zeros(sys.n)), True, alpha0)
    if sys.is_exact:
        floor_eps = None
        u = kronecker_witness(sys)
        if u is not None:
            floor_eps = kronecker_epsilon(sys, u)
        state = _gap_scan_generic(sys, q_max, state, floor_eps)
    elif sys.n == 1:
        state = _gap_scan_float_1d(sys, q_max, state)
    else:
        state = _gap_scan_generic(sys, q_max, state, None)
    return _finish_gap(sys, q_max, state)


def homogeneous_orbit_gap(fs: FlowSpec, a, q_max: int,
                          budget: Optional[int] = None) -> GapReport:
    """Same infimum for the offset-free system, over nonzero (p, q).

    q = 0 contributes the class of pure integer vectors, represented by
    its minimizer (e_1, 0) of norm 1.  A matrix with a rational relation
    drives the gap to 0, which is what separates the two scans: with an
    offset the zero vector is excluded from nothing, without one it must
    be excluded by hand.
    """
    rows = tuple(tuple(x for x in row) for row in a)
    sys = AffineSystem(rows, _zeros(len(rows)))
    fs._check(sys)
    q_max = int(q_max)
    if q_max < 1:
        raise ParameterError("q_max must be at least 1")
    _check_gap_budget(sys.n, q_max, budget)
    k = fs.m + fs.n
    one = Fraction(1) if sys.is_exact else 1.0
    e1 = (1,) + (0,) * (sys.m - 1)
    state = (_ipow(one, k), IntegerCandidate(e1, _zeros(sys.n)), True, one)
    if sys.is_exact:
        state = _gap_scan_generic(sys, q_max, state, None)
    elif sys.n == 1:
        state = _gap_scan_float_1d(sys, q_max, state)
    else:
        state = _gap_scan_generic(sys, q_max, state, None)
    return _finish_gap(sys, q_max, state)


# ---------------------------------------------------------------------------
# fixed-time scans

def shortest_vectors_at(fs: FlowSpec, sys: AffineSystem, t: float, radius: float,
                        budget: Optional[int] = None):
    """All candidates whose flowed image at time t has norm <= radius.

    Returns (candidate, norm) pairs sorted by norm, then by shell and
    lexicographic position, so the ordering is deterministic.
    """
    fs._check(sys)
    if not radius > 0:
        raise ParameterError("radius must be positive")
    budget = DEFAULT_ENUM_BUDGET if budget is None else int(budget)
    eu = math.exp(t / fs.m)
    ed = math.exp(-t / fs.n)
    q_cap = int(math.floor(radius / ed))
    required = annulus_size(fs.n, 0, q_cap)
    if required > budget:
        raise BudgetError(required, budget)
    rho = radius / eu
    out = []
    for s in range(0, q_cap + 1):
        for q in shell_vectors(fs.n, s):
            r = [float(x) for x in sys.residual(q)]
            ranges = []
            feasible = True
            for ri in r:
                lo = math.ceil(-ri - rho)
                hi = math.floor(-ri + rho)
                if lo > hi:
                    feasible = False
                    break
                ranges.append(range(lo, hi + 1))
            if not feasible:
                continue
            total = 1
            for rg in ranges:
                total *= len(rg)
            if len(out) + total > budget:
                raise BudgetError(len(out) + total, budget)
            for p in _cartesian(ranges):
                alpha = max(abs(ri + pi) for ri, pi in zip(r, p))
                norm = max(eu * alpha, ed * s)
                if norm <= radius:
                    out.append((IntegerCandidate(p, q), norm))
    out.sort(key=lambda item: (item[1], max(map(abs, item[0].q), default=0),
                               item[0].q, item[0].p))
    return out


def _cartesian(ranges):
    if not ranges:
        yield ()
        return
    head, tail = ranges[0], ranges[1:]
    for x in head:
        for rest in _cartesian(tail):
            yield (x,) + rest


# ---------------------------------------------------------------------------
# orbit traces

@dataclass(frozen=True)
class OrbitDiagnostics:
    """Sampled shortest-vector data along a flow orbit.

    ``lambda1`` ignores the translation (nonzero lattice vectors only);
    ``affine_min`` is over all translated lattice points, zero included.
    Escape to infinity shows as both series growing; a homogeneous-side
    relation shows as lambda1 decaying while affine_min grows.
    """

    times: tuple
    lambda1: tuple
    affine_min: tuple
    witnesses: tuple

    def to_csv(self) -> str:
        lines = ["t,lambda1,affine_min,witness_p,witness_q"]
        for t, l1, am, w in zip(self.times, self.lambda1, self.affine_min,
                                self.witnesses):
            lines.append(",".join([
                "%.17g" % t,
                "%.17g" % l1,
                "%.17g" % am,
                ";".join(str(x) for x in w.p),
                ";".join(str(x) for x in w.q),
            ]))
        return "\n".join(lines) + "\n"


def _flow_norm_min(fs: FlowSpec, sys: AffineSystem, t: float, homogeneous: bool,
                   budget: int, alpha_floor=None):
    eu = math.exp(t / fs.m)
    ed = math.exp(-t / fs.n)
    m, n = fs.m, fs.n
    if homogeneous:
        best = eu * 1.0
        best_w = IntegerCandidate((1,) + (0,) * (m - 1), _zeros(n))
    else:
        d0, p0 = dist_to_integers(sys.b)
        best = eu * float(d0)
        best_w = IntegerCandidate(p0, _zeros(n))
    floor_norm = eu * float(alpha_floor) if alpha_floor is not None else None
    a_f = sys.a_float
    b_f = sys.b_float if not homogeneous else np.zeros(m)
    count = 1
    s = 1
    while True:
        if best == 0.0:
            break
        if ed * s >= best:
            break
        if floor_norm is not None and best <= floor_norm:
            break
        if n == 1:
            # bounded span of shells, refreshed as the minimum improves
            span_end = min(s + _SHELL_BLOCK - 1, int(math.floor(best / ed)))
            count += 2 * (span_end - s + 1)
            if count > budget:
                raise BudgetError(count, budget)
            sv = np.arange(s, span_end + 1, dtype=np.float64)
            q = np.empty(2 * sv.size, dtype=np.float64)
            q[0::2] = -sv
            q[1::2] = sv
            x = a_f.reshape(-1, 1) * q[None, :] + b_f.reshape(-1, 1)
            res = x - np.ceil(x - 0.5)
            alpha = np.abs(res).max(axis=0)
            norm = np.maximum(eu * alpha, ed * np.abs(q))
            i = int(np.argmin(norm))
            if float(norm[i]) < best:
                best = float(norm[i])
                qi = int(q[i])
                p = tuple(-nearest_int(float(a_f[j, 0]) * qi + float(b_f[j]))
                          for j in range(m))
                best_w = IntegerCandidate(p, (qi,))
            s = span_end + 1
        else:
            count += shell_size(n, s)
            if count > budget:
                raise BudgetError(count, budget)
            for q in shell_vectors(n, s):
                x = a_f @ np.array(q, dtype=np.float64) + b_f
                res = x - np.ceil(x - 0.5)
                alpha = float(np.abs(res).max())
                norm = max(eu * alpha, ed * s)
                if norm < best:
                    best = norm
                    best_w = IntegerCandidate(
                        tuple(int(-math.ceil(v - 0.5)) for v in x), q)
            s += 1
    return best, best_w


def orbit_trace(fs: FlowSpec, sys: AffineSystem, t_grid: Sequence[float],
                budget: Optional[int] = None) -> OrbitDiagnostics:
    """lambda1 and affine minimum along g_t for the times in t_grid."""
    fs._check(sys)
    times = [float(t) for t in t_grid]
    if not times:
        raise ParameterError("empty time grid")
    if any(not math.isfinite(t) for t in times):
        raise ParameterError("times must be finite")
    if times[0] < 0 or any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
        raise ParameterError("times must be nonnegative and strictly increasing")
    budget = DEFAULT_ENUM_BUDGET if budget is None else int(budget)
    alpha_floor = None
    if sys.is_exact:
        u = kronecker_witness(sys)
        if u is not None:
            alpha_floor = kronecker_epsilon(sys, u)
    lam1 = []
    aff = []
    wits = []
    for t in times:
        l1, _ = _flow_norm_min(fs, sys, t, True, budget)
        am, w = _flow_norm_min(fs, sys, t, False, budget, alpha_floor)
        lam1.append(l1)
        aff.append(am)
        wits.append(w)
    return OrbitDiagnostics(tuple(times), tuple(lam1), tuple(aff), tuple(wits))
