"""Monte Carlo mutual-information estimation via histogram entropies.

The exact MI of the splitting receiver is the difference between the
differential entropy of the combined observation and its conditional entropy
given the transmitted symbol.  Neither has a closed form at finite SNR, so
both are estimated from samples with multidimensional histograms:

* the joint entropy from one large batch of unconditional observations;
* the conditional entropy as the average, over freshly drawn symbols, of the
  histogram entropy of a batch of observations with the symbol held fixed.

Histogram entropy estimates carry two opposing biases: binning smooths the
density (pushing the estimate up) while finite counts per occupied cell push
it down.  The bin counts used here are calibrated so the two roughly cancel;
see :func:`conditional_bins` and :func:`joint_bins` for the rules.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import (ReceiverConfig, as_generator, observation_matrix,
                    sample_symbols)

#: Fixed shard count for the joint sample batch, so results do not depend on
#: how many workers happen to execute the shards.
N_JOINT_SHARDS = 32

#: Pilot batches used to probe the conditional spread when auto-binning.
N_PILOT_BATCHES = 8
PILOT_BATCH_SIZE = 2048

#: Calibrated conditional bin counts per dimension at a 10^4-sample budget.
_COND_BINS_BASE = {1: 48, 2: 24, 3: 12}

#: Joint binning: initial width as a multiple of the conditional spread, an
#: occupied-cell budget (as a fraction of the joint sample count) that spare
#: resolution is spent toward, and a high-water mark beyond which the grid is
#: coarsened to keep the per-cell counts from collapsing.
_JOINT_WIDTH_FACTOR = 1.4
_JOINT_OCCUPANCY_TARGET = 0.05
_JOINT_OCCUPANCY_CEILING = 0.25
_MAX_BINS = 4096


class EstimationError(ValueError):
    """An entropy/MI estimate could not be formed.

    ``code`` is one of ``empty-sample-set``, ``degenerate-range``,
    ``bad-dimension`` or ``bad-bins``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class UndersampledHistogramWarning(UserWarning):
    """Fewer samples than the 10-per-cell recommendation for the grid size."""


@dataclass
class McSettings:
    """Sample budgets and binning for :func:`estimate_mi`.

    ``bins_per_dim = None`` (the default) lets the estimator choose the joint
    histogram resolution from the data: the noise scale is probed with a few
    pilot batches and the bin widths are set to resolve it, subject to an
    occupied-cell budget.  An explicit integer pins the joint histogram to
    that many bins per dimension instead; the conditional histograms always
    use the sample-budget rule of :func:`conditional_bins`.
    """

    n_joint: int = 2_000_000
    n_outer: int = 1000
    n_inner: int = 10_000
    bins_per_dim: int | None = None
    seed: int = 0

    def check(self):
        if self.n_joint < 1 or self.n_outer < 1 or self.n_inner < 1:
            raise EstimationError("bad-bins", "sample counts must be >= 1")
        if self.bins_per_dim is not None and self.bins_per_dim < 2:
            raise EstimationError("bad-bins", "bins_per_dim must be >= 2")


MONTE_CARLO = "monte-carlo"
CLOSED_FORM = "closed-form"


@dataclass
class MiEstimate:
    """An MI value in bits with its provenance.

    ``std_error`` is the jackknife standard error for Monte Carlo estimates
    and exactly zero for closed forms.  ``bins_used`` echoes the histogram
    resolution a Monte Carlo estimate actually used, for reproducibility.
    """

    value: float
    std_error: float
    method: str
    settings: McSettings | None = None
    bins_used: dict | None = None


# ---------------------------------------------------------------------------
# Histogram entropy
# ---------------------------------------------------------------------------

def estimate_entropy_histogram(samples, bins_per_dim, warn_undersampled: bool = True) -> float:
    """Differential entropy (bits) of d-dimensional samples, d in {1, 2, 3}.

    Bins are equal-width per dimension spanning the empirical [min, max]
    range.  The estimate is the plug-in entropy of the cell frequencies plus
    the log cell volume; no bias correction is applied.

    Parameters
    ----------
    samples : array_like
        Shape (n,) or (n, d).
    bins_per_dim : int or sequence of int
        Bin count per dimension, every entry >= 2.
    warn_undersampled : bool
        Emit :class:`UndersampledHistogramWarning` when n is below ten samples
        per grid cell.  Internal callers with calibrated budgets disable this.

    Raises
    ------
    EstimationError
        ``empty-sample-set`` for no samples; ``degenerate-range`` when all
        samples coincide along some dimension (the entropy diverges to
        minus infinity); ``bad-dimension`` for d > 3.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise EstimationError("bad-dimension", "samples must be (n,) or (n, d)")
    n, d = pts.shape
    if n == 0:
        raise EstimationError("empty-sample-set", "no samples given")
    if d not in (1, 2, 3):
        raise EstimationError("bad-dimension", f"supported dimensions are 1..3, got {d}")

    bins = np.broadcast_to(np.asarray(bins_per_dim, dtype=int), (d,)).copy()
    if np.any(bins < 2):
        raise EstimationError("bad-bins", "need at least 2 bins per dimension")
    if warn_undersampled and n < 10 * np.prod(bins.astype(float)):
        warnings.warn(
            f"{n} samples for a {'x'.join(map(str, bins))} grid; "
            "at least 10 per cell is recommended",
            UndersampledHistogramWarning, stacklevel=2)

    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    if np.any(hi == lo):
        flat = int(np.argmax(hi == lo))
        raise EstimationError(
            "degenerate-range",
            f"all samples identical along dimension {flat}; entropy is -inf")

    widths = (hi - lo) / bins
    # Sparse cell counting: grids far larger than the occupied set stay cheap.
    idx = np.minimum(((pts - lo) / widths).astype(np.int64), bins - 1)
    cells = np.ravel_multi_index(idx.T, bins)
    counts = np.unique(cells, return_counts=True)[1]
    p = counts / n
    return float(-(p * np.log2(p)).sum() + np.log2(widths).sum())


def _counts_entropy(counts: np.ndarray, n: int, widths: np.ndarray) -> tuple[float, float]:
    """Entropy (bits) and its plug-in sampling variance from cell counts
    (delta method: Var = Var_p[log2 p(cell)] / n)."""
    p = counts / n
    log_p = np.log2(p)
    h_disc = -(p * log_p).sum()
    var = float((p * log_p ** 2).sum() - h_disc ** 2) / n
    return float(h_disc + np.log2(widths).sum()), var


def _entropy_with_variance(pts: np.ndarray, bins) -> tuple[float, float]:
    """Min/max-ranged histogram entropy plus its plug-in variance."""
    n = pts.shape[0]
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    bins = np.broadcast_to(np.asarray(bins, dtype=int), (pts.shape[1],))
    widths = (hi - lo) / bins
    idx = np.minimum(((pts - lo) / widths).astype(np.int64), bins - 1)
    cells = np.ravel_multi_index(idx.T, bins)
    counts = np.unique(cells, return_counts=True)[1]
    return _counts_entropy(counts, n, widths)


def _lattice_cell_counts(pts: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """Occupied-cell counts on a fixed origin-anchored lattice.

    Unlike binning on the empirical [min, max] range, the lattice does not
    move with the sample extremes, so the entropy estimate carries no
    edge-jitter variance and the plug-in variance formula stays honest.
    """
    idx = np.floor(pts / widths).astype(np.int64)
    idx -= idx.min(axis=0)
    sizes = idx.max(axis=0).astype(object) + 1
    total = 1
    for s in sizes:
        total *= int(s)
    if total >= 2 ** 62:  # lattice too fine to index; caller must coarsen
        raise OverflowError("lattice too fine")
    cells = np.ravel_multi_index(idx.T, [int(s) for s in sizes])
    return np.unique(cells, return_counts=True)[1]


def _lattice_entropy_with_variance(pts: np.ndarray, widths: np.ndarray):
    counts = _lattice_cell_counts(pts, widths)
    return _counts_entropy(counts, pts.shape[0], widths)


def conditional_bins(dim: int, n_inner: int) -> int:
    """Bin count per dimension for a conditional batch of ``n_inner`` samples.

    Calibrated on Gaussian batches so the smoothing and finite-count biases
    cancel at the default budget, then scaled with the usual n^(1/(d+2))
    optimal-width law.
    """
    base = _COND_BINS_BASE[dim]
    return int(np.clip(round(base * (n_inner / 1e4) ** (1.0 / (dim + 2))), 2, 1024))


def joint_bin_widths(pts: np.ndarray, conditional_scale: np.ndarray,
                     n_joint: int) -> np.ndarray:
    """Per-dimension lattice widths for the joint histogram.

    The initial width is ``1.4 x`` the conditional spread per dimension: the
    joint distribution concentrates around a manifold whose thickness is the
    conditional noise scale, and bins much wider than it wash the fine
    structure out of the entropy.  The occupied-cell count then steers one
    correction: if it sits well under 5% of the sample count, widths shrink to
    spend the available resolution; if it exceeds 25% (a sample budget too
    small for the noise scale), widths grow until the cell population is
    sustainable again, trading smoothing bias for counting bias.
    """
    span = pts.max(axis=0) - pts.min(axis=0)
    d = pts.shape[1]
    width = _JOINT_WIDTH_FACTOR * np.asarray(conditional_scale, dtype=float)
    width = np.maximum(width, span / _MAX_BINS)
    occupied = _lattice_cell_counts(pts, width).size
    shrink = (occupied / (_JOINT_OCCUPANCY_TARGET * n_joint)) ** (1.0 / d)
    coarsen = (occupied / (_JOINT_OCCUPANCY_CEILING * n_joint)) ** (1.0 / d)
    if shrink < 1.0:
        width = np.maximum(width * shrink, span / _MAX_BINS)
    elif coarsen > 1.0:
        width = width * coarsen
    return width


# ---------------------------------------------------------------------------
# MI estimation
# ---------------------------------------------------------------------------

def _stream(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key))


def _joint_shard(args):
    config, count, seed_key = args
    _, pts = observation_matrix(config, count, np.random.SeedSequence(seed_key))
    return pts


def _conditional_chunk(args):
    config, xs, n_inner, bins, seed, base_index = args
    out = np.empty(len(xs))
    for j, xi in enumerate(xs):
        _, pts = observation_matrix(config, n_inner, _stream(seed, 3, base_index + j),
                                    x=np.full(n_inner, xi))
        out[j] = estimate_entropy_histogram(pts, bins, warn_undersampled=False)
    return out


def _pilot_scale(config: ReceiverConfig, seed: int) -> np.ndarray:
    """Median per-dimension standard deviation of a few conditional batches."""
    rng = as_generator(_stream(seed, 0))
    stds = []
    for _ in range(N_PILOT_BATCHES):
        xi = sample_symbols(rng, 1)[0]
        _, pts = observation_matrix(config, PILOT_BATCH_SIZE, rng,
                                    x=np.full(PILOT_BATCH_SIZE, xi))
        stds.append(pts.std(axis=0))
    scale = np.median(np.array(stds), axis=0)
    # A dimension with no conditional spread cannot happen for valid noise
    # profiles, but guard the division anyway.
    return np.maximum(scale, 1e-300)


def estimate_mi(config: ReceiverConfig, settings: McSettings | None = None,
                threads: int = 1) -> MiEstimate:
    """Monte Carlo estimate of the exact MI between symbol and observation.

    The observation is the 3-D point (Re r1, Im r1, r2) in splitting mode,
    2-D in CD-only mode, 1-D in ED-only mode.  The returned standard error is
    the jackknife over the outer conditioning symbols, which dominate the
    estimator variance.

    Results are reproducible: every sample stream derives from
    ``settings.seed`` and fixed stream indices, so the estimate is identical
    for any ``threads`` value.
    """
    if settings is None:
        settings = McSettings()
    settings.check()
    dim = config.observation_dim
    seed = settings.seed

    shards = min(N_JOINT_SHARDS, settings.n_joint)
    counts = [len(c) for c in np.array_split(np.empty(settings.n_joint), shards)]
    shard_args = [(config, count, (seed, 1, i)) for i, count in enumerate(counts)]

    cond_bins = conditional_bins(dim, settings.n_inner)
    xs = sample_symbols(as_generator(_stream(seed, 2)), settings.n_outer)
    chunk_size = max(1, settings.n_outer // (4 * max(threads, 1)))
    chunks = []
    for start in range(0, settings.n_outer, chunk_size):
        stop = min(start + chunk_size, settings.n_outer)
        chunks.append((config, xs[start:stop], settings.n_inner, cond_bins, seed, start))

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            joint_parts = list(pool.map(_joint_shard, shard_args))
            cond_parts = list(pool.map(_conditional_chunk, chunks))
    else:
        joint_parts = [_joint_shard(a) for a in shard_args]
        cond_parts = [_conditional_chunk(c) for c in chunks]

    pts = np.concatenate(joint_parts, axis=0)
    if settings.bins_per_dim is not None:
        jbins = np.full(dim, settings.bins_per_dim)
        h_joint, joint_var = _entropy_with_variance(pts, jbins)
        joint_echo = {"joint_bins": [int(b) for b in jbins]}
    else:
        widths = joint_bin_widths(pts, _pilot_scale(config, seed), settings.n_joint)
        h_joint, joint_var = _lattice_entropy_with_variance(pts, widths)
        joint_echo = {"joint_bin_widths": [float(w) for w in widths]}

    h_cond = np.concatenate(cond_parts)
    # Conditional part: jackknife over the outer symbols (for a plain mean this
    # equals the classic standard error).  The joint part contributes its
    # plug-in sampling variance; at small budgets it is not negligible.
    cond_var = float(h_cond.var(ddof=1) / settings.n_outer) if settings.n_outer > 1 else 0.0
    se = float(np.sqrt(joint_var + cond_var))
    return MiEstimate(value=float(h_joint - h_cond.mean()), std_error=se,
                      method=MONTE_CARLO, settings=settings,
                      bins_used=dict(joint_echo, conditional_bins=int(cond_bins)))
