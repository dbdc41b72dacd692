"""Chain diagnostics and posterior summaries.

Geweke z-scores compare early and late chain segments with batch-means
long-run variances; HPD intervals are empirical shortest-window (Chen-Shao)
estimates; the posterior mode refines the best stored draw by Nelder-Mead
in log-parameter space against the exact log posterior.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .data import Dataset
from .distribution import Params
from .posterior import Chain, log_posterior

__all__ = [
    "ParamSummary",
    "PosteriorSummary",
    "geweke_z",
    "hpd_interval",
    "posterior_mode",
    "summarize",
    "autocorrelation",
]


def _as_series(x, min_len: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if arr.size < min_len:
        raise ValueError(f"series must have at least {min_len} points, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series must be finite")
    return arr


def _batch_means_lrv(seg: np.ndarray):
    """Long-run variance by sqrt(n) non-overlapping batch means.

    Returns (estimate, points_used). Zero when the segment is constant.
    """
    m = seg.size
    b = max(2, int(math.sqrt(m)))
    s = m // b
    if s < 1:
        b, s = m, 1
    used = b * s
    means = seg[:used].reshape(b, s).mean(axis=1)
    return s * float(np.var(means, ddof=1)), used


def geweke_z(series, first_frac: float = 0.1, last_frac: float = 0.5) -> float:
    """Early-vs-late mean comparison as an asymptotic z-score.

    Compares the first first_frac of the series against the last
    last_frac, normalizing by batch-means long-run variances. A constant
    series scores exactly 0.
    """
    x = _as_series(series, 100)
    if not (0 < first_frac and 0 < last_frac and first_frac + last_frac <= 1):
        raise ValueError("fractions must be positive with sum at most 1")
    if x.max() == x.min():
        # batch means of a constant series can differ from it by one ulp,
        # which would turn 0/0 into an arbitrary finite score
        return 0.0
    n = x.size
    n_a = max(2, int(first_frac * n))
    n_b = max(2, int(last_frac * n))
    a = x[:n_a]
    b = x[n - n_b:]
    lrv_a, used_a = _batch_means_lrv(a)
    lrv_b, used_b = _batch_means_lrv(b)
    denom = lrv_a / used_a + lrv_b / used_b
    if denom == 0.0:
        return 0.0
    return float((a.mean() - b.mean()) / math.sqrt(denom))


def hpd_interval(samples, mass: float = 0.95):
    """Shortest interval among sorted-sample windows holding ceil(mass*n) points.

    Ties go to the leftmost window.
    """
    x = _as_series(samples, 100)
    if not 0.0 < mass < 1.0:
        raise ValueError("mass must lie strictly between 0 and 1")
    x = np.sort(x)
    n = x.size
    m = int(math.ceil(mass * n))
    if m >= n:
        return float(x[0]), float(x[-1])
    widths = x[m - 1:] - x[:n - m + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + m - 1])


def posterior_mode(chain: Chain, data: Dataset) -> Params:
    """Refine the highest-posterior stored draw by Nelder-Mead in log space.

    The returned point's log posterior is never below the best draw's: the
    simplex result is only adopted when it improves on its seed, and a
    non-improving run falls back to the seed with a warning.
    """
    if len(chain) == 0:
        raise ValueError("chain must be nonempty")
    lps = np.array([log_posterior(p, data) for p in chain.draws])
    best = chain.draws[int(np.argmax(lps))]
    x0 = np.log([best.phi, best.mu, best.alpha])

    def neg_lp(u):
        if np.any(np.abs(u) > 300.0):
            return np.inf
        return -log_posterior(Params(*np.exp(u)), data)

    res = optimize.minimize(neg_lp, x0, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-10,
                                     "maxfev": 4000})
    if not np.isfinite(res.fun) or res.fun > neg_lp(x0):
        warnings.warn("posterior mode search did not improve on its seed draw",
                      RuntimeWarning)
        return best
    return Params(*np.exp(res.x))


@dataclass(frozen=True)
class ParamSummary:
    """Mode, spread, HPD interval and Geweke score for one parameter."""

    mode: float
    sd: float
    hpd_low: float
    hpd_high: float
    geweke_z: float

    def __post_init__(self):
        if self.sd < 0:
            raise ValueError("sd must be nonnegative")
        if self.hpd_low > self.hpd_high:
            raise ValueError("hpd_low must not exceed hpd_high")

    def as_dict(self) -> dict:
        return {"mode": self.mode, "sd": self.sd, "hpd_low": self.hpd_low,
                "hpd_high": self.hpd_high, "geweke_z": self.geweke_z}


@dataclass(frozen=True)
class PosteriorSummary:
    """Per-parameter summaries plus any quality flags raised while building them."""

    phi: ParamSummary
    mu: ParamSummary
    alpha: ParamSummary
    flags: tuple = ()

    def as_dict(self) -> dict:
        out = {"phi": self.phi.as_dict(), "mu": self.mu.as_dict(),
               "alpha": self.alpha.as_dict()}
        if self.flags:
            out["flags"] = list(self.flags)
        return out


def summarize(chain: Chain, data: Dataset) -> PosteriorSummary:
    """Assemble mode, sample SD, HPD95 and Geweke z for each parameter."""
    flags = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mode = posterior_mode(chain, data)
    if caught:
        flags.append("mode_search_no_improvement")

    mode_vals = {"phi": mode.phi, "mu": mode.mu, "alpha": mode.alpha}
    parts = {}
    for name in ("phi", "mu", "alpha"):
        series = getattr(chain, name)
        sd = float(series.std(ddof=1))
        if series.min() == series.max():
            # exact constancy; the ddof std can still round to ~1e-19
            sd = 0.0
            flags.append(f"degenerate_chain_{name}")
        lo, hi = hpd_interval(series)
        if not series.min() <= mode_vals[name] <= series.max():
            flags.append(f"mode_outside_sampled_range_{name}")
        parts[name] = ParamSummary(mode=mode_vals[name], sd=sd, hpd_low=lo,
                                   hpd_high=hi, geweke_z=geweke_z(series))
    return PosteriorSummary(phi=parts["phi"], mu=parts["mu"],
                            alpha=parts["alpha"], flags=tuple(flags))


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Biased sample ACF at lags 0..max_lag, with ACF(0) = 1.

    A zero-variance series returns 1 at lag 0 and 0 elsewhere rather than
    dividing by zero.
    """
    x = _as_series(series, 8)
    if not isinstance(max_lag, int) or max_lag < 1:
        raise ValueError("max_lag must be a positive integer")
    n = x.size
    if max_lag >= n / 4:
        raise ValueError("max_lag must be below a quarter of the series length")
    xc = x - x.mean()
    full = np.correlate(xc, xc, mode="full")
    c = full[n - 1:n + max_lag] / n
    if c[0] == 0.0:
        out = np.zeros(max_lag + 1)
        out[0] = 1.0
        return out
    out = c / c[0]
    out[0] = 1.0
    return out
