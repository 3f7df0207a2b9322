"""Dimension machinery: tree-like lower bounds, tessellation counts under
the expanding flow, box counting, and slice scans of the badly
approximable locus.

The tree bound and the expansion bound are small formulas evaluated
carefully (logs of exact rationals are taken as log(num) - log(den), so
tiny diameters never underflow).  Tessellation counting is exact integer
arithmetic on cell indices whenever the expansion factor is an exact
scalar.  The slice scan is the one heavy kernel: it rasterizes, for a
grid of one-dimensional systems (a, b), whether the smallest flowed-norm
gap up to depth Q clears a threshold.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence
import warnings

import numpy as np

from .core import (
    DEFAULT_ENUM_BUDGET,
    BudgetError,
    DimensionError,
    ParameterError,
    Scalar,
    as_scalar,
    is_exact,
)
from .flows import FlowSpec

__all__ = [
    "TreeLevelData", "TreeBound", "tree_dim_lower_bound",
    "expansion_dim_bound", "TessellationCounts", "tessellation_counts",
    "GridIndicator", "BoxDimEstimate", "box_dim_estimate",
    "SliceScan", "ba_slice_scan",
]


def _log(x: Scalar) -> float:
    """log of a positive scalar; exact rationals split into two logs so
    denominators like 3^200 neither overflow nor underflow."""
    x = as_scalar(x)
    if not x > 0:
        raise ParameterError("log argument must be positive")
    if isinstance(x, float):
        return math.log(x)
    return math.log(x.numerator) - math.log(x.denominator)


# ---------------------------------------------------------------------------
# tree-like collections

@dataclass(frozen=True)
class TreeLevelData:
    """Per-level data of a nested construction: at level j a fraction
    delta_j of children is kept and pieces have diameter ratio d_j."""

    k: int
    deltas: tuple
    diams: tuple

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ParameterError("ambient dimension k must be a positive integer")
        deltas = tuple(as_scalar(x) for x in self.deltas)
        diams = tuple(as_scalar(x) for x in self.diams)
        if len(deltas) == 0 or len(deltas) != len(diams):
            raise DimensionError("deltas and diams must have equal positive length")
        if any(not (0 < d <= 1) for d in deltas):
            raise ParameterError("densities must lie in (0, 1]")
        if any(not d > 0 for d in diams):
            raise ParameterError("diameters must be positive")
        object.__setattr__(self, "deltas", deltas)
        object.__setattr__(self, "diams", diams)
        if len(diams) > 1 and not diams[-1] < diams[0]:
            warnings.warn("diameters do not decrease; the construction is not "
                          "tree-like and the bound is meaningless", stacklevel=3)

    @property
    def levels(self) -> int:
        return len(self.deltas)


@dataclass(frozen=True)
class TreeBound:
    value: float
    ratios: tuple  # partial-sum ratio at every level, nan where diam >= 1


def tree_dim_lower_bound(data: TreeLevelData) -> TreeBound:
    """Lower bound k - (sum of log densities)/(log final diameter).

    The limsup over levels is approximated by the final-level ratio; the
    whole ratio sequence is returned so the flatness of its tail can be
    inspected rather than trusted.  Levels with diameter >= 1 make the
    ratio meaningless: allowed as an initial transient (nan entries) but
    rejected at the final level.
    """
    if not data.diams[-1] < 1:
        raise ParameterError("final diameter ratio must be below 1")
    csum = 0.0
    ratios = []
    for delta, diam in zip(data.deltas, data.diams):
        csum += _log(delta)
        ratios.append(csum / _log(diam) if diam < 1 else math.nan)
    return TreeBound(data.k - ratios[-1], tuple(ratios))


def expansion_dim_bound(k: int, density: Scalar, rate: Scalar, t: Scalar) -> float:
    """Dimension lower bound k - log(1/density) / (rate*t - log 4).

    ``density`` is the retained measure fraction of the target set within
    the unit cell, ``rate`` the slowest expansion rate of the flow, and
    the bound only bites once rate*t exceeds log 4.
    """
    if not isinstance(k, int) or k < 1:
        raise ParameterError("ambient dimension k must be a positive integer")
    density = as_scalar(density)
    if not (0 < density <= 1):
        raise ParameterError("density must lie in (0, 1]")
    rt = float(rate) * float(t)
    if not rt > math.log(4.0):
        raise ParameterError("expansion too weak: rate*t must exceed log 4")
    return k - (-_log(density)) / (rt - math.log(4.0))


# ---------------------------------------------------------------------------
# tessellation counts

@dataclass(frozen=True)
class TessellationCounts:
    interior: int
    boundary: int
    volume_ratio: Scalar
    axis_scales: tuple


def _axis_counts(scale):
    inside = 2 * math.floor((scale - 1) / 2) + 1
    meets = 2 * math.floor((scale + 1) / 2) + 1
    return int(inside), int(meets)


def tessellation_counts(fs: FlowSpec, r: Scalar, t: Optional[Scalar] = None,
                        expansion: Optional[Scalar] = None,
                        budget: Optional[int] = None) -> TessellationCounts:
    """Translate counts for the flowed cube in expanding coordinates.

    The expanding block has mn matrix directions scaled by e^{(1/m+1/n)t}
    and m offset directions scaled by e^{t/m}.  The cube of side
    r/sqrt(k') centered at the origin is flowed and compared against its
    own translate lattice (spacing equal to the side): ``interior`` counts
    translates contained in the image, ``boundary`` those meeting its
    boundary.  Both are invariant under the common scale r, which is
    validated but does not enter the counts.

    Pass ``expansion`` = e^t as an exact scalar to keep every count and
    the volume ratio in exact arithmetic; passing ``t`` computes the
    scales in floating point.
    """
    r = as_scalar(r)
    if not (0 < r <= 1):
        raise ParameterError("cube scale r must lie in (0, 1]")
    if (t is None) == (expansion is None):
        raise ParameterError("give exactly one of t and expansion")
    budget = DEFAULT_ENUM_BUDGET if budget is None else int(budget)

    exp_matrix = fs.expand_rate + fs.contract_rate  # exponent on matrix axes
    exp_offset = fs.expand_rate                     # exponent on offset axes
    if expansion is not None:
        expansion = as_scalar(expansion)
        if not expansion >= 1:
            raise ParameterError("expansion must be at least 1 (t >= 0)")
        if is_exact(expansion) and exp_matrix.denominator == 1 \
                and exp_offset.denominator == 1:
            scale_m = expansion ** int(exp_matrix)
            scale_o = expansion ** int(exp_offset)
            volume_ratio: Scalar = expansion ** int(fs.volume_rate)
        else:
            e = float(expansion)
            scale_m = e ** float(exp_matrix)
            scale_o = e ** float(exp_offset)
            volume_ratio = e ** float(fs.volume_rate)
    else:
        t = float(t)
        if not (math.isfinite(t) and t >= 0):
            raise ParameterError("t must be finite and nonnegative")
        scale_m = math.exp(float(exp_matrix) * t)
        scale_o = math.exp(float(exp_offset) * t)
        volume_ratio = math.exp(float(fs.volume_rate) * t)

    in_m, meet_m = _axis_counts(scale_m)
    in_o, meet_o = _axis_counts(scale_o)
    mn = fs.m * fs.n
    interior = in_m ** mn * in_o ** fs.m
    meets = meet_m ** mn * meet_o ** fs.m
    if meets > budget:
        raise BudgetError(meets, budget)
    scales = (scale_m,) * mn + (scale_o,) * fs.m
    return TessellationCounts(interior, meets - interior, volume_ratio, scales)


# ---------------------------------------------------------------------------
# grids and box counting

@dataclass(frozen=True, eq=False)
class GridIndicator:
    """Boolean occupancy of a uniform grid over a box in R^d.

    ``bitmap[i0, i1, ...]`` covers the cell whose center along axis a is
    ``lo_a + (i_a + 1/2) * (hi_a - lo_a) / resolution``.
    """

    resolution: int
    bitmap: np.ndarray
    bounds: tuple

    def __post_init__(self):
        if not isinstance(self.resolution, int) or self.resolution < 1:
            raise ParameterError("resolution must be a positive integer")
        bitmap = np.asarray(self.bitmap, dtype=bool)
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if bitmap.ndim != len(bounds):
            raise DimensionError("bounds must give one interval per bitmap axis")
        if bitmap.shape != (self.resolution,) * bitmap.ndim:
            raise DimensionError("bitmap must be resolution^d cells")
        if any(not lo < hi for lo, hi in bounds):
            raise ParameterError("box bounds must be nondegenerate")
        object.__setattr__(self, "bitmap", bitmap)
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self) -> int:
        return self.bitmap.ndim

    def centers(self) -> np.ndarray:
        """Centers of marked cells, one row per cell, in row-major index
        order."""
        idx = np.argwhere(self.bitmap)
        out = np.empty(idx.shape, dtype=np.float64)
        for axis, (lo, hi) in enumerate(self.bounds):
            step = (hi - lo) / self.resolution
            out[:, axis] = lo + (idx[:, axis] + 0.5) * step
        return out

    def to_pgm(self) -> bytes:
        """Binary PGM, one byte per cell, 255 = marked; row i is
        bitmap[i, :], written top to bottom."""
        if self.dim != 2:
            raise DimensionError("PGM output needs a two-dimensional grid")
        h, w = self.bitmap.shape
        header = f"P5\n{w} {h}\n255\n".encode("ascii")
        return header + (self.bitmap.astype(np.uint8) * 255).tobytes()

    @classmethod
    def from_pgm(cls, data: bytes, bounds=((0.0, 1.0), (0.0, 1.0))) -> "GridIndicator":
        fields = []
        pos = 2
        if data[:2] != b"P5":
            raise ParameterError("not a binary PGM file")
        while len(fields) < 3:
            while pos < len(data) and data[pos:pos + 1].isspace():
                pos += 1
            if data[pos:pos + 1] == b"#":
                while pos < len(data) and data[pos:pos + 1] != b"\n":
                    pos += 1
                continue
            start = pos
            while pos < len(data) and not data[pos:pos + 1].isspace():
                pos += 1
            fields.append(int(data[start:pos]))
        pos += 1  # single whitespace byte after maxval
        w, h, _maxval = fields
        if w != h:
            raise ParameterError("grid must be square")
        raw = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos)
        return cls(w, raw.reshape(h, w) > 0, tuple(bounds))


@dataclass(frozen=True)
class BoxDimEstimate:
    slope: float
    counts: tuple  # ((scale, count), ...)
    degenerate: bool


def box_dim_estimate(ind: GridIndicator, scales: Sequence[Scalar]) -> BoxDimEstimate:
    """Least-squares slope of log N(r) against log(1/r).

    Each scale r is a relative cell size; r times the grid resolution
    must be an integer block size dividing the resolution.  N(r) counts
    blocks containing at least one marked cell.  Cell-center sampling
    biases counts downward for thin sets; callers that care should
    bracket with a refined grid.  An empty bitmap returns slope 0 with
    the degenerate flag set.
    """
    scales = [as_scalar(s) for s in scales]
    if len(scales) < 3:
        raise ParameterError("need at least 3 scales")
    res = ind.resolution
    blocks = []
    for s in scales:
        size = s * res
        block = int(round(float(size)))
        if abs(float(size) - block) > 1e-9 or block < 1 or res % block != 0:
            raise ParameterError(
                f"scale {s} does not give an integer block dividing {res}")
        blocks.append(block)
    counts = []
    for s, block in zip(scales, blocks):
        nb = res // block
        # group each axis into (nb, block) and reduce the block axes
        shape = ()
        for _ in range(ind.dim):
            shape += (nb, block)
        grouped = ind.bitmap.reshape(shape)
        reduced = grouped.any(axis=tuple(range(1, 2 * ind.dim, 2)))
        counts.append((float(s), int(np.count_nonzero(reduced))))
    if all(c == 0 for _, c in counts):
        return BoxDimEstimate(0.0, tuple(counts), True)
    xs = np.log([1.0 / r for r, _ in counts])
    ys = np.log([c for _, c in counts])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return BoxDimEstimate(slope, tuple(counts), False)


# ---------------------------------------------------------------------------
# slice scans

@dataclass(frozen=True)
class SliceScan:
    """Occupancy of the thresholded gap over a grid of (a, b) systems.

    ``grid`` marks cells whose gap at depth q_max clears the threshold;
    ``grid_refined`` repeats the scan at doubled depth.  Cells marked in
    the refined grid are a subset of the primary marks, bracketing the
    drift still in the truncation.
    """

    threshold: float
    q_max: int
    grid: GridIndicator
    grid_refined: GridIndicator


def _scan_rows(a_vals: np.ndarray, b_vals: np.ndarray, q_max: int,
               threshold: float, row_indices, out: np.ndarray):
    q = np.arange(-q_max, q_max + 1, dtype=np.float64)
    beta = np.abs(q)[:, None]
    for i in row_indices:
        x = a_vals[i] * q[:, None] + b_vals[None, :]
        res = x - np.ceil(x - 0.5)
        alpha = np.abs(res)
        value = np.where(beta >= alpha, np.sqrt(alpha * beta), alpha)
        gap = value.min(axis=0)
        out[i, :] = gap >= threshold


def ba_slice_scan(threshold: float, resolution: int, q_max: int,
                  region=((0.0, 1.0), (0.0, 1.0)),
                  budget: Optional[int] = None,
                  threads: Optional[int] = None) -> SliceScan:
    """Mark grid cells (a, b) whose flowed-norm gap stays >= threshold.

    One-dimensional systems only: the gap of cell center (a, b) is the
    minimum over |q| <= q_max (q = 0 included) of the per-candidate flow
    minimum, i.e. sqrt(dist(aq+b, Z) |q|) on balanced candidates and
    dist(aq+b, Z) on unbalanced ones.  Rows are scanned in fixed order;
    an optional thread pool splits rows without changing the output.
    """
    threshold = float(threshold)
    if threshold < 0:
        raise ParameterError("threshold must be nonnegative")
    if not isinstance(resolution, int) or resolution < 1:
        raise ParameterError("resolution must be a positive integer")
    q_max = int(q_max)
    if q_max < 1:
        raise ParameterError("q_max must be at least 1")
    budget = DEFAULT_ENUM_BUDGET if budget is None else int(budget)
    per_cell = (2 * q_max + 1) + (4 * q_max + 1)  # both depths, q = 0 included
    if per_cell > budget:
        raise BudgetError(per_cell, budget)
    (a_lo, a_hi), (b_lo, b_hi) = ((float(lo), float(hi)) for lo, hi in region)
    if not (a_lo < a_hi and b_lo < b_hi):
        raise ParameterError("region must be a nondegenerate box")

    idx = np.arange(resolution, dtype=np.float64) + 0.5
    a_vals = a_lo + idx * (a_hi - a_lo) / resolution
    b_vals = b_lo + idx * (b_hi - b_lo) / resolution

    grids = []
    for depth in (q_max, 2 * q_max):
        out = np.zeros((resolution, resolution), dtype=bool)
        rows = range(resolution)
        if threads and threads > 1:
            chunks = [range(j, resolution, threads) for j in range(threads)]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(
                    lambda ch: _scan_rows(a_vals, b_vals, depth, threshold, ch, out),
                    chunks))
        else:
            _scan_rows(a_vals, b_vals, depth, threshold, rows, out)
        grids.append(GridIndicator(resolution, out, ((a_lo, a_hi), (b_lo, b_hi))))
    return SliceScan(threshold, q_max, grids[0], grids[1])
