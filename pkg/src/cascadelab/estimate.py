"""Empirical estimators confronting realizations with the predictions.

Everything here is a numerical surrogate: Hausdorff dimensions are
estimated by box counting (slope of log(count) against log(1/scale)),
Holder exponents and partition functions by least-squares slopes of
b-adic oscillation statistics across levels.  All estimators are
read-only over realizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cascade
from .cascade import CascadeRealization
from .errors import (
    ConfigError,
    DegenerateRangeError,
    ZeroOscillationError,
)
from .weights import Fractional
from .words import Word, word_from_index

IMAGE_EXTRA_LEVELS = 4  # refinement below the test-set level
COARSE_SCALES_DROPPED = 2
MIN_FIT_POINTS = 4


@dataclass(frozen=True)
class TestSet:
    """A self-similar Cantor-type subset of [0, 1] with known dimension.

    Generations act on blocks of ``block`` base-b digits, so a base-2
    cascade can carry e.g. a base-4 Cantor set (block = 2).  The set has
    Hausdorff = packing dimension log(m) / (block * log(b)) with m kept
    block-digits per generation, and positive Hausdorff measure at that
    exponent (self-similar, open set condition).
    """

    base: int
    block: int
    keep_digits: tuple[int, ...]
    generations: int

    def __post_init__(self):
        if self.block < 1 or self.generations < 0:
            raise ConfigError("block and generations must be positive")
        big = self.base**self.block
        if not self.keep_digits:
            raise ConfigError("keep_digits must be nonempty")
        if len(set(self.keep_digits)) != len(self.keep_digits):
            raise ConfigError("keep_digits must be distinct")
        if any(not 0 <= d < big for d in self.keep_digits):
            raise ConfigError(f"keep digit out of range [0, {big})")
        object.__setattr__(self, "keep_digits", tuple(sorted(self.keep_digits)))

    @property
    def word_level(self) -> int:
        """Depth of the surviving words in base-b digits."""
        return self.block * self.generations

    @property
    def dimension(self) -> float:
        return math.log(len(self.keep_digits)) / (self.block * math.log(self.base))

    def word_indices(self) -> np.ndarray:
        """Integer indices of the surviving words at ``word_level``."""
        big = self.base**self.block
        keep = np.array(self.keep_digits, dtype=np.int64)
        idx = np.zeros(1, dtype=np.int64)
        for _ in range(self.generations):
            idx = (idx[:, None] * big + keep[None, :]).ravel()
        return idx

    def words(self) -> list[Word]:
        return [word_from_index(int(j), self.word_level, self.base) for j in self.word_indices()]


def cantor_set(base: int, keep_digits, generations: int, block: int = 1) -> TestSet:
    return TestSet(base, block, tuple(keep_digits), generations)


@dataclass(frozen=True)
class DimensionEstimate:
    """Least-squares slope estimate from a log-log scaling plot."""

    value: float
    stderr: float
    scale_range: tuple[int, int]
    r_squared: float
    counts_per_scale: tuple = ()
    empty: bool = False


def fit_loglog(xs, ys) -> tuple[float, float, float]:
    """OLS slope of ys against xs with its standard error and R^2."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n = len(xs)
    if n < 2:
        raise DegenerateRangeError(f"need >= 2 points to fit, got {n}")
    xm, ym = xs.mean(), ys.mean()
    sxx = ((xs - xm) ** 2).sum()
    if sxx == 0.0:
        raise DegenerateRangeError("degenerate abscissa in regression")
    slope = ((xs - xm) * (ys - ym)).sum() / sxx
    resid = ys - (ym + slope * (xs - xm))
    ss_res = (resid**2).sum()
    ss_tot = ((ys - ym) ** 2).sum()
    stderr = math.sqrt(ss_res / (n - 2) / sxx) if n > 2 else 0.0
    # an exactly-linear (or exactly-flat) relation is a perfect fit even
    # when ss_tot is pure rounding noise
    r2 = 1.0 if ss_res <= 1e-20 or ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(stderr), float(r2)


# ---------------------------------------------------------------------------
# image box counting


def _bounding_boxes(real: CascadeRealization, ts: TestSet, extra_levels: int):
    """Per-interval bounding boxes of F over the refined surviving words."""
    if ts.base != real.base:
        raise ConfigError(f"test set base {ts.base} != model base {real.base}")
    level = real.depth - extra_levels
    if ts.word_level > level:
        raise ConfigError(
            f"test set level {ts.word_level} exceeds depth - {extra_levels}"
        )
    refine = real.base ** (level - ts.word_level)
    parents = ts.word_indices()
    idx = (parents[:, None] * refine + np.arange(refine)[None, :]).ravel()
    (min1, max1), (min2, max2) = cascade.grid_min_max(real, level)
    return min1[idx], max1[idx], min2[idx], max2[idx]


def _count_squares(x0, x1, y0, y1, j: int) -> int:
    """Distinct dyadic squares of side 2**-j intersecting any closed box."""
    scale = float(2**j)
    ix0 = np.floor(x0 * scale).astype(np.int64)
    ix1 = np.floor(x1 * scale).astype(np.int64)
    iy0 = np.floor(y0 * scale).astype(np.int64)
    iy1 = np.floor(y1 * scale).astype(np.int64)
    shift = min(ix0.min(), iy0.min())
    ix0 -= shift
    ix1 -= shift
    iy0 -= shift
    iy1 -= shift
    width = int(max(ix1.max(), iy1.max())) + 2
    single = (ix0 == ix1) & (iy0 == iy1)
    keys = set((ix0[single] * width + iy0[single]).tolist())
    for a0, a1, b0, b1 in zip(ix0[~single], ix1[~single], iy0[~single], iy1[~single]):
        for ix in range(a0, a1 + 1):
            base_key = ix * width
            keys.update(range(base_key + b0, base_key + b1 + 1))
    return len(keys)


def image_box_dim(
    real: CascadeRealization,
    ts: TestSet,
    extra_levels: int = IMAGE_EXTRA_LEVELS,
) -> DimensionEstimate:
    """Box-counting dimension of F(K) for a Cantor-type K.

    Covers the image by per-interval bounding boxes (conservative: the
    over-count shifts the intercept, not the slope), counts occupied
    dyadic squares at scales 2**-j for j = 2 .. j_max, where j_max is
    the finest scale the covering boxes can still resolve, and regresses
    after dropping the two coarsest scales (and up to two of the finest,
    when available, where box-vs-square straddling biases the count).
    """
    x0, x1, y0, y1 = _bounding_boxes(real, ts, extra_levels)
    # resolvability guard: never count below the size of the covering
    # boxes themselves, or the regression sees the boxes (dimension-1
    # interval pieces), not the set.  A high quantile (not the max) sets
    # the guard because heavy-tailed cell oscillations otherwise collapse
    # the scale window to nothing on lognormal-factor models.
    finest = float(np.quantile(np.maximum(x1 - x0, y1 - y0), 0.9))
    if finest <= 0.0:
        raise ZeroOscillationError("degenerate realization: zero finest-cell size")
    j_max = int(math.floor(-math.log2(finest))) if finest < 1.0 else 2
    j_max = min(j_max, 26)
    js = list(range(2, j_max + 1))
    counts = [_count_squares(x0, x1, y0, y1, j) for j in js]
    fit_js = js[COARSE_SCALES_DROPPED:]
    fit_counts = counts[COARSE_SCALES_DROPPED:]
    # near j_max each box still straddles up to 2 squares per axis, which
    # inflates the slope; shed up to 2 of the finest scales when the fit
    # window can spare them
    spare = len(fit_js) - MIN_FIT_POINTS
    trim = min(2, max(spare, 0))
    if trim:
        fit_js = fit_js[:-trim]
        fit_counts = fit_counts[:-trim]
    if len(fit_js) < MIN_FIT_POINTS:
        raise DegenerateRangeError(
            f"only {len(fit_js)} usable scales (need {MIN_FIT_POINTS})"
        )
    if max(fit_counts) == 1:  # single occupied square at all scales: a point
        return DimensionEstimate(
            0.0, 0.0, (fit_js[0], fit_js[-1]), 1.0, tuple(zip(js, counts))
        )
    slope, stderr, r2 = fit_loglog(fit_js, np.log2(fit_counts))
    return DimensionEstimate(
        slope, stderr, (fit_js[0], fit_js[-1]), r2, tuple(zip(js, counts))
    )


# ---------------------------------------------------------------------------
# partition function / Holder exponents


def partition_function(
    real: CascadeRealization, q: tuple[float, float], level_lo: int, level_hi: int
) -> DimensionEstimate:
    """Scaling exponent of S_m = sum_w O1(w)**q1 * O2(w)**q2 across levels.

    The fitted slope of log_b S_m against m is expected to equal
    1 - phi(q) (counting factor b**m times the moment decay b**-m*phi).
    """
    q1, q2 = q
    if not 1 <= level_lo <= level_hi <= real.depth:
        raise ConfigError(f"bad level window [{level_lo}, {level_hi}]")
    ms = list(range(level_lo, level_hi + 1))
    logs = []
    for m in ms:
        table = cascade.oscillations(real, m)
        if ((q1 < 0) and (table.o1 == 0.0).any()) or (
            (q2 < 0) and (table.o2 == 0.0).any()
        ):
            raise ZeroOscillationError(f"zero oscillation at level {m} with negative q")
        with np.errstate(divide="ignore"):
            s = float((table.o1**q1 * table.o2**q2).sum()) if (q1, q2) != (0.0, 0.0) else float(len(table.o1))
        if s <= 0.0:
            raise ZeroOscillationError(f"partition sum vanished at level {m}")
        logs.append(math.log(s) / math.log(real.base))
    slope, stderr, r2 = fit_loglog(ms, logs)
    return DimensionEstimate(slope, stderr, (level_lo, level_hi), r2, tuple(zip(ms, logs)))


def oscillation_tables(real: CascadeRealization, level_lo: int, level_hi: int):
    """Oscillation tables for a window of levels, for reuse across queries."""
    return {m: cascade.oscillations(real, m) for m in range(level_lo, level_hi + 1)}


def holder_exponents(
    real: CascadeRealization,
    word_indices,
    level_lo: int,
    level_hi: int,
    tables=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Estimated Holder pair for each depth-``level_hi`` word index.

    The estimate for component k is minus the least-squares slope of
    log_b O_k(I_m(x)) against m over the window.
    """
    if not 1 <= level_lo < level_hi <= real.depth:
        raise ConfigError(f"bad level window [{level_lo}, {level_hi}]")
    if tables is None:
        tables = oscillation_tables(real, level_lo, level_hi)
    idx = np.asarray(word_indices, dtype=np.int64)
    ms = np.arange(level_lo, level_hi + 1)
    logs1 = np.empty((len(ms), len(idx)))
    logs2 = np.empty((len(ms), len(idx)))
    lb = math.log(real.base)
    for row, m in enumerate(ms):
        prefix = idx // real.base ** (level_hi - m)
        t = tables[m]
        o1, o2 = t.o1[prefix], t.o2[prefix]
        if (o1 == 0.0).any() or (o2 == 0.0).any():
            raise ZeroOscillationError(f"zero oscillation at level {m}")
        logs1[row] = np.log(o1) / lb
        logs2[row] = np.log(o2) / lb
    mc = ms - ms.mean()
    sxx = (mc**2).sum()
    h1 = -(mc[:, None] * (logs1 - logs1.mean(axis=0))).sum(axis=0) / sxx
    h2 = -(mc[:, None] * (logs2 - logs2.mean(axis=0))).sum(axis=0) / sxx
    return h1, h2


def holder_exponent(
    real: CascadeRealization, w: Word, level_lo: int, level_hi: int
) -> tuple[float, float]:
    """Holder pair at the point addressed by a single word."""
    if len(w) < level_hi:
        raise ConfigError(f"word length {len(w)} shorter than window top {level_hi}")
    idx = w.prefix(level_hi).index
    h1, h2 = holder_exponents(real, [idx], level_lo, level_hi)
    return float(h1[0]), float(h2[0])


# ---------------------------------------------------------------------------
# level sets and occupation measure


def level_crossing_counts(
    real: CascadeRealization, k: int, y: float, level_lo: int, level_hi: int
) -> np.ndarray:
    """Number of level-m intervals whose refined grid brackets y, per m."""
    if k not in (1, 2):
        raise ConfigError(f"component k must be 1 or 2, got {k}")
    counts = []
    for m in range(level_lo, level_hi + 1):
        mm = cascade.grid_min_max(real, m)[k - 1]
        counts.append(int(((mm[0] <= y) & (y <= mm[1])).sum()))
    return np.array(counts, dtype=np.int64)


def level_set(
    real: CascadeRealization,
    k: int,
    y: float,
    level: int,
    fit_lo: int = 2,
) -> tuple[list[Word], DimensionEstimate]:
    """Crossing intervals of {F_k = y} at one level, plus a dimension fit.

    An interval w counts as crossing when the refined grid of F_k over
    closed I_w brackets y (min <= y <= max); endpoint sign changes would
    miss double crossings.  The dimension is the slope of log_b(count)
    against the level over [fit_lo, level].  An empty level set is a
    valid outcome, reported as dimension 0 with the ``empty`` flag.
    """
    if not 1 <= fit_lo <= level <= real.depth:
        raise ConfigError(f"bad level window [{fit_lo}, {level}]")
    mm = cascade.grid_min_max(real, level)[k - 1]
    hits = np.nonzero((mm[0] <= y) & (y <= mm[1]))[0]
    words = [word_from_index(int(j), level, real.base) for j in hits]
    counts = level_crossing_counts(real, k, y, fit_lo, level)
    ms = np.arange(fit_lo, level + 1)
    if len(hits) == 0 or (counts == 0).any():
        est = DimensionEstimate(
            0.0, 0.0, (fit_lo, level), 1.0, tuple(zip(ms.tolist(), counts.tolist())), empty=len(hits) == 0
        )
        return words, est
    slope, stderr, r2 = fit_loglog(ms, np.log(counts) / math.log(real.base))
    est = DimensionEstimate(
        slope, stderr, (fit_lo, level), r2, tuple(zip(ms.tolist(), counts.tolist()))
    )
    return words, est


def occupation_histogram(
    real: CascadeRealization, k: int, bin_count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Fraction of depth-n grid cells whose F_k value falls in each bin.

    Returns (bin_edges, masses) with masses summing to 1.  Used to pick
    'Lebesgue almost every' levels y for level-set experiments.
    """
    if bin_count < 8:
        raise ConfigError(f"bin_count must be >= 8, got {bin_count}")
    if k not in (1, 2):
        raise ConfigError(f"component k must be 1 or 2, got {k}")
    values = real.grid[k - 1][:-1]
    lo, hi = float(real.grid[k - 1].min()), float(real.grid[k - 1].max())
    if hi == lo:
        hi = lo + 1e-12
    counts, edges = np.histogram(values, bins=bin_count, range=(lo, hi))
    return edges, counts / len(values)


def sample_occupation_levels(
    edges: np.ndarray, masses: np.ndarray, rng: np.random.Generator, count: int
) -> np.ndarray:
    """Draw y values from an occupation histogram (uniform within bins)."""
    cum = np.cumsum(masses)
    cum /= cum[-1]
    bins = np.searchsorted(cum, rng.random(count), side="right")
    bins = np.minimum(bins, len(masses) - 1)
    u = rng.random(count)
    return edges[bins] + u * (edges[bins + 1] - edges[bins])


# ---------------------------------------------------------------------------
# uniform dimension sweep


@dataclass(frozen=True)
class SweepRow:
    xi0: float
    estimate: DimensionEstimate
    prediction: float


def uniform_sweep(real: CascadeRealization, test_sets) -> list[SweepRow]:
    """Image dimension of several test sets on one fixed realization.

    Scope: the uniform dimension law dim F(K) = dim K / alpha holds for
    the fractional kind with equal exponents and P(W1 = W2) < 1 only.
    """
    model = real.model
    if not isinstance(model, Fractional) or model.alpha1 != model.alpha2:
        raise ConfigError("uniform sweep needs a Fractional model with alpha1 == alpha2")
    if model.identical_weights():
        raise ConfigError("uniform sweep needs P(W1 = W2) < 1")
    alpha = model.alpha1
    rows = []
    for ts in test_sets:
        est = image_box_dim(real, ts)
        rows.append(SweepRow(ts.dimension, est, ts.dimension / alpha))
    return rows
