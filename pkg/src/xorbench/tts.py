"""Time-to-solution statistics: success posteriors, Bayesian-bootstrap TTS
curves, exponential first-passage fits, and exponential scaling fits.

TTS at runtime t_f for per-run success probability p is
t_f * ln(0.01) / ln(1 - p), divided by the replica parallelization factor
f_p, with the repetition count clamped below at one run. Success
probabilities carry a Jeffreys Beta(0.5, 0.5) prior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

LOG_TARGET = math.log(0.01)  # ln(1 - 0.99)


@dataclass(frozen=True)
class SuccessCounts:
    runs: int
    successes: int

    def __post_init__(self):
        if not (0 <= self.successes <= self.runs):
            raise ValueError("need 0 <= successes <= runs")

    @property
    def posterior_mean(self) -> float:
        return (self.successes + 0.5) / (self.runs + 1)

    def posterior(self):
        """Beta posterior under the Jeffreys prior."""
        return stats.beta(0.5 + self.successes, 0.5 + self.runs - self.successes)


@dataclass(frozen=True)
class TtsCurve:
    size: int
    quantile: float
    f_p: float
    t_f_grid: np.ndarray
    tts_mean: np.ndarray
    tts_sigma: np.ndarray
    opt_tf: float
    opt_tts: float
    sigma_at_opt: float
    boundary: bool
    flags: tuple = ()


@dataclass(frozen=True)
class ScalingFit:
    alpha: float
    beta: float
    alpha_2sigma: float
    beta_2sigma: float
    window: tuple
    quantile: float


def success_counts_at(records, t_f: float) -> SuccessCounts:
    """Success/failure counts at runtime t_f from first-passage records.

    A record succeeding by t_f counts as a success; one still running at t_f
    (success later, or censored at cutoff >= t_f) counts as a failure; a run
    censored before t_f carries no information at t_f and is excluded.
    """
    if t_f <= 0:
        raise ValueError("t_f must be > 0")
    records = list(records)
    if not records:
        raise ValueError("no records")
    ids = {r.instance_id for r in records}
    if len(ids) > 1:
        raise ValueError(f"records span multiple instances: {sorted(ids)}")
    n = n_s = 0
    for r in records:
        if r.success and r.steps_to_solution <= t_f:
            n += 1
            n_s += 1
        elif r.success or r.cutoff_steps >= t_f:
            n += 1
    return SuccessCounts(runs=n, successes=n_s)


def repetition_factor(p: float, clamp: bool = True) -> float:
    """Expected repetitions ln(0.01)/ln(1-p); clamped to >= 1 run by default."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must be in [0, 1]")
    if p == 0.0:
        return math.inf
    r = LOG_TARGET / math.log1p(-p) if p < 1.0 else 0.0
    return max(r, 1.0) if clamp else r


def tts_point(t_f: float, p: float, f_p: float = 1.0, clamp: bool = True) -> float:
    """TTS for one (t_f, p) cell, divided by the parallelization factor."""
    if t_f <= 0:
        raise ValueError("t_f must be > 0")
    if f_p < 1:
        raise ValueError("f_p must be >= 1")
    return t_f * repetition_factor(p, clamp=clamp) / f_p


def _tts_array(t_f, p, f_p):
    with np.errstate(divide="ignore"):
        ratio = LOG_TARGET / np.log1p(-p)
    ratio = np.where(p >= 1.0, 1.0, np.maximum(ratio, 1.0))
    ratio = np.where(p <= 0.0, np.inf, ratio)
    return t_f * ratio / f_p


def bootstrap_tts(per_instance_counts, t_f: float, q: float, f_p: float = 1.0,
                  resamples: int = 1000, rng_seed: int = 0):
    """Bayesian bootstrap of the q-quantile TTS over an instance ensemble.

    Each resample draws instances with replacement, samples each drawn
    instance's success probability from its Beta posterior, converts to TTS,
    and takes the q-quantile (linear interpolation between order statistics).
    Returns (mean, sigma, flags) over the resamples; sigma is the 1-sigma
    confidence interval.
    """
    counts = list(per_instance_counts)
    if not counts:
        raise ValueError("no instances")
    if not (0.0 < q < 1.0):
        raise ValueError("q must be in (0, 1)")
    n = np.array([c.runs for c in counts], dtype=np.float64)
    n_s = np.array([c.successes for c in counts], dtype=np.float64)
    rng = np.random.Generator(np.random.Philox(np.uint64(rng_seed)))
    n_inst = len(counts)
    quantiles = np.empty(resamples)
    for r in range(resamples):
        idx = rng.integers(0, n_inst, n_inst)
        p = rng.beta(0.5 + n_s[idx], 0.5 + n[idx] - n_s[idx])
        tts = _tts_array(t_f, p, f_p)
        quantiles[r] = np.quantile(tts, q)
    flags = ()
    if not np.all(np.isfinite(quantiles)):
        flags = ("infinite_tts",)
        if np.all(np.isinf(quantiles)):
            return math.inf, math.inf, flags
    return float(quantiles.mean()), float(quantiles.std()), flags


def opt_tts(t_f_grid, tts_mean, tts_sigma):
    """Minimum of the mean TTS curve over the runtime grid.

    Ties break toward smaller t_f; a minimizer at either grid endpoint is
    flagged as a boundary optimum (the grid likely does not bracket the true
    optimum). Returns (opt_tf, opt_tts, sigma_at_opt, boundary).
    """
    t_f_grid = np.asarray(t_f_grid, dtype=np.float64)
    tts_mean = np.asarray(tts_mean, dtype=np.float64)
    tts_sigma = np.asarray(tts_sigma, dtype=np.float64)
    if np.any(np.diff(t_f_grid) <= 0):
        raise ValueError("t_f grid must be strictly increasing")
    if not np.any(np.isfinite(tts_mean)):
        raise ValueError("all-infinite TTS curve")
    k = int(np.argmin(tts_mean))
    boundary = k == 0 or k == t_f_grid.size - 1
    return float(t_f_grid[k]), float(tts_mean[k]), float(tts_sigma[k]), boundary


def exponential_tau(samples, censored=()):
    """Exponential MLE of the first-passage scale with right censoring.

    tau = (total observed time including censored cutoffs) / successes, with
    a 2-sigma chi-squared confidence interval and the Kolmogorov-Smirnov
    distance of the uncensored empirical survival against exp(-t/tau).
    """
    samples = np.asarray(list(samples), dtype=np.float64)
    censored = np.asarray(list(censored), dtype=np.float64)
    if samples.size == 0:
        raise ValueError("zero successes")
    if samples.size < 10:
        raise ValueError("need >= 10 uncensored samples")
    k = samples.size
    total = samples.sum() + censored.sum()
    tau = total / k
    # 2*total/tau ~ chi2(2k): two-sided interval at 2 sigma
    alpha = 2 * stats.norm.sf(2.0)
    lo = 2 * total / stats.chi2.ppf(1 - alpha / 2, 2 * k)
    hi = 2 * total / stats.chi2.ppf(alpha / 2, 2 * k)
    ks = stats.kstest(samples, lambda t: stats.expon.cdf(t, scale=tau)).statistic
    return tau, (lo, hi), ks


def _wls_line(n_vals, y, sigma):
    w = 1.0 / sigma**2
    x_mat = np.column_stack([n_vals, np.ones_like(n_vals)])
    wx = x_mat * w[:, None]
    cov_unscaled = np.linalg.inv(x_mat.T @ wx)
    beta_hat = cov_unscaled @ (wx.T @ y)
    resid = y - x_mat @ beta_hat
    dof = y.size - 2
    chi2 = float(np.sum(w * resid**2))
    scale = chi2 / dof if dof > 0 else 0.0
    cov = cov_unscaled * scale
    return beta_hat, cov


def scaling_fit(points, window_policy="AUTO", quantile: float = 0.5,
                window: tuple | None = None) -> ScalingFit:
    """Weighted least-squares fit of log10 TTS = alpha * n + beta.

    Weights are 1/sigma^2; the covariance is scaled by the residual variance
    estimator and parameter intervals are 2 sigma. Window policy AUTO starts
    from the middlemost sizes and extends outward until the next point would
    shift alpha by more than its current 1 sigma; MANUAL uses the caller's
    contiguous size range.

    ``points`` is an iterable of (n, log10_tts, sigma); sigma > 0, and any
    non-finite log10_tts (an all-failure grid point) is not fit-eligible.
    """
    pts = sorted((float(n), float(y), float(s)) for n, y, s in points
                 if math.isfinite(y))
    if len(pts) < 3:
        raise ValueError("need >= 3 finite points")
    if any(s <= 0 for _, _, s in pts):
        raise ValueError("sigma must be > 0")
    arr = np.array(pts)
    n_vals, y, sigma = arr[:, 0], arr[:, 1], arr[:, 2]

    if window_policy == "MANUAL":
        if window is None:
            raise ValueError("MANUAL policy needs a window (n_lo, n_hi)")
        mask = (n_vals >= window[0]) & (n_vals <= window[1])
        lo, hi = int(np.argmax(mask)), int(len(mask) - np.argmax(mask[::-1]) - 1)
        if mask.sum() < 3:
            raise ValueError("fewer than 3 points in the window")
    elif window_policy == "AUTO":
        total = len(pts)
        mid = total // 2
        lo, hi = mid - 1, mid
        # always grow to the 3-point minimum before applying the alpha rule
        grow_lo, grow_hi = lo > 0, hi < total - 1
        while grow_lo or grow_hi:
            cur_fit, cur_cov = _wls_line(n_vals[lo:hi + 1], y[lo:hi + 1], sigma[lo:hi + 1])
            cur_alpha = cur_fit[0]
            sig_alpha = math.sqrt(max(cur_cov[0, 0], 0.0))
            threshold = sig_alpha + 1e-12 * (1.0 + abs(cur_alpha))
            for direction in ("lo", "hi"):
                if direction == "lo" and grow_lo:
                    cand = (lo - 1, hi)
                elif direction == "hi" and grow_hi:
                    cand = (lo, hi + 1)
                else:
                    continue
                new_fit, _ = _wls_line(n_vals[cand[0]:cand[1] + 1],
                                       y[cand[0]:cand[1] + 1],
                                       sigma[cand[0]:cand[1] + 1])
                must_grow = hi - lo + 1 < 3
                if must_grow or abs(new_fit[0] - cur_alpha) <= threshold:
                    lo, hi = cand
                else:
                    if direction == "lo":
                        grow_lo = False
                    else:
                        grow_hi = False
            grow_lo = grow_lo and lo > 0
            grow_hi = grow_hi and hi < total - 1
    else:
        raise ValueError(f"unknown window policy {window_policy!r}")

    sel = slice(lo, hi + 1)
    if hi - lo + 1 < 3:
        raise ValueError("fewer than 3 points in the final window")
    beta_hat, cov = _wls_line(n_vals[sel], y[sel], sigma[sel])
    return ScalingFit(
        alpha=float(beta_hat[0]),
        beta=float(beta_hat[1]),
        alpha_2sigma=2.0 * math.sqrt(max(cov[0, 0], 0.0)),
        beta_2sigma=2.0 * math.sqrt(max(cov[1, 1], 0.0)),
        window=tuple(int(v) for v in n_vals[sel]),
        quantile=quantile,
    )
