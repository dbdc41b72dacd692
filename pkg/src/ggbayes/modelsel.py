"""Deviance-based comparison of the generalized gamma model and its nested rivals.

Each candidate is fit by MCMC (or, for the lognormal, by exact conjugate
sampling), then scored by DIC and BIC.  The Weibull and gamma candidates reuse
the generalized gamma sampler with the appropriate shape block frozen, so their
deviances are directly comparable with the full model's.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np
from scipy import optimize

from .data import Dataset
from .distribution import Params
from .posterior import Chain, McmcConfig, _run_mwg, log_likelihood, run_chain
from .priors import modified_alpha_log_density
from .specfun import RandomSource, ln_gamma, trigamma
from . import diagnostics

MODEL_NAMES = ("gg", "weibull", "gamma", "lognormal")

_DISPLAY = {"gg": "GG", "weibull": "Weibull", "gamma": "Gamma",
            "lognormal": "Lognormal"}

_REL_TOL = 1e-9


def deviance(p: Params, data: Dataset) -> float:
    """-2 times the generalized gamma log likelihood."""
    return -2.0 * log_likelihood(p, data)


def _gg_deviance_series(chain: Chain, data: Dataset) -> np.ndarray:
    a = chain.alpha
    f = chain.phi
    lmu = np.log(chain.mu)
    n = data.n
    # log S(alpha) per draw, computed stably as max + log-sum-exp
    z = a[:, None] * data.log_values[None, :]
    zmax = z.max(axis=1)
    log_s = zmax + np.log(np.exp(z - zmax[:, None]).sum(axis=1))
    ll = (n * np.log(a) - n * ln_gamma(f) + n * a * f * lmu
          + (a * f - 1.0) * data.sum_log - np.exp(a * lmu + log_s))
    return -2.0 * ll


def lognormal_log_likelihood(location: float, scale2: float,
                             data: Dataset) -> float:
    """Log likelihood of the lognormal model in (location, squared scale).

    Parameters are those of the normal distribution of log t.  A zero
    squared scale yields +inf when every observation sits exactly at the
    location and -inf otherwise.
    """
    y = data.log_values
    n = data.n
    if scale2 < 0.0 or not math.isfinite(scale2):
        raise ValueError(f"scale2 must be finite and >= 0, got {scale2!r}")
    if scale2 == 0.0:
        return math.inf if np.all(y == location) else -math.inf
    quad = float(np.sum((y - location) ** 2)) / (2.0 * scale2)
    return (-data.sum_log - 0.5 * n * math.log(2.0 * math.pi * scale2) - quad)


@dataclasses.dataclass(frozen=True)
class ModelFit:
    """Scored fit of one candidate model.

    `mode` holds the plug-in point used for BIC (native parameter names);
    `draws` holds the posterior draws per parameter so callers can inspect
    or summarize the fit without re-running it.
    """

    model: str
    k: int
    mean_deviance: float
    deviance_at_mean: float
    p_d: float
    dic: float
    bic: float
    mode: dict
    draws: dict
    flags: tuple = ()

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.model!r}")
        if not isinstance(self.k, int) or self.k <= 0:
            raise ValueError("k must be a positive integer")
        finite = all(math.isfinite(v) for v in
                     (self.mean_deviance, self.deviance_at_mean,
                      self.p_d, self.dic))
        if finite:
            if not math.isclose(self.p_d,
                                self.mean_deviance - self.deviance_at_mean,
                                rel_tol=_REL_TOL, abs_tol=1e-9):
                raise ValueError("p_d inconsistent with deviances")
            if not math.isclose(self.dic, self.mean_deviance + self.p_d,
                                rel_tol=_REL_TOL, abs_tol=1e-9):
                raise ValueError("dic inconsistent with p_d")

    @property
    def display_name(self) -> str:
        return _DISPLAY[self.model]

    def as_dict(self) -> dict:
        out = {
            "model": self.display_name,
            "k": self.k,
            "mean_deviance": self.mean_deviance,
            "deviance_at_mean": self.deviance_at_mean,
            "p_d": self.p_d,
            "dic": self.dic,
            "bic": self.bic,
            "mode": dict(self.mode),
        }
        if self.flags:
            out["flags"] = list(self.flags)
        return out


def dic(chain: Chain, data: Dataset) -> tuple:
    """(mean deviance, deviance at posterior mean, p_d, DIC) for a chain."""
    devs = _gg_deviance_series(chain, data)
    mean_dev = float(np.mean(devs))
    at_mean = deviance(Params(float(np.mean(chain.phi)),
                              float(np.mean(chain.mu)),
                              float(np.mean(chain.alpha))), data)
    p_d = mean_dev - at_mean
    return mean_dev, at_mean, p_d, mean_dev + p_d


def bic(best: Params, data: Dataset, k: int) -> float:
    """-2 log likelihood at the plug-in point plus k log n."""
    if not isinstance(k, int) or k <= 0:
        raise ValueError("k must be a positive integer")
    return deviance(best, data) + k * math.log(data.n)


def _optimize_2d(fun, x0):
    # Nelder-Mead in log-parameter space; fun maps a 2-vector to -objective
    res = optimize.minimize(fun, x0, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-10,
                                     "maxfev": 4000})
    return res.x, -res.fun


def _weibull_log_post(la: float, lmu: float, data: Dataset) -> float:
    if abs(la) > 300.0 or abs(lmu) > 300.0:
        return -math.inf
    a = math.exp(la)
    p = Params(1.0, math.exp(lmu), a)
    return (float(modified_alpha_log_density(a)) - lmu
            + log_likelihood(p, data))


def _gamma_log_post(lf: float, lmu: float, data: Dataset) -> float:
    if abs(lf) > 300.0 or abs(lmu) > 300.0:
        return -math.inf
    f = math.exp(lf)
    p = Params(f, math.exp(lmu), 1.0)
    return 0.5 * math.log(trigamma(f)) - lmu + log_likelihood(p, data)


def _frozen_block_fit(model: str, data: Dataset, config: McmcConfig) -> ModelFit:
    init = Params(1.0, 1.0 / float(np.mean(data.values)), 1.0)
    if model == "weibull":
        chain = _run_mwg(data, config, init, update_phi=False)
        series = chain.alpha
        lp = lambda free, lm: _weibull_log_post(free, lm, data)
        pack = lambda free, mu: Params(1.0, mu, free)
        names = ("alpha", "mu")
    else:
        chain = _run_mwg(data, config, init, update_alpha=False)
        series = chain.phi
        lp = lambda free, lm: _gamma_log_post(free, lm, data)
        pack = lambda free, mu: Params(free, mu, 1.0)
        names = ("phi", "mu")

    # mode search seeded at the draw with the highest restricted posterior
    lps = np.array([lp(lv, lm) for lv, lm in
                    zip(np.log(series), np.log(chain.mu))])
    j = int(np.argmax(lps))
    x0 = np.array([math.log(series[j]), math.log(chain.mu[j])])
    xb, best_lp = _optimize_2d(lambda x: -lp(x[0], x[1]), x0)
    flags = ()
    if best_lp < lps[j]:
        xb = x0
        flags = ("mode_search_no_improvement",)
    best = pack(math.exp(xb[0]), math.exp(xb[1]))

    mean_dev, at_mean, p_d, dic_val = dic(chain, data)
    if p_d < 0.0:
        flags = flags + ("negative_p_d",)
    return ModelFit(
        model=model, k=2,
        mean_deviance=mean_dev, deviance_at_mean=at_mean,
        p_d=p_d, dic=dic_val,
        bic=bic(best, data, 2),
        mode={names[0]: getattr(best, names[0]), "mu": best.mu},
        draws={names[0]: series, "mu": chain.mu},
        flags=flags,
    )


def _lognormal_fit(data: Dataset, config: McmcConfig) -> ModelFit:
    if data.n < 2:
        raise ValueError("lognormal fit needs at least two observations")
    y = data.log_values
    n = data.n
    ybar = float(np.mean(y))
    s2 = float(np.var(y, ddof=1))
    k = config.n_draws
    rng = RandomSource(config.seed)

    # exact conjugate posterior under the scale-invariant prior 1/scale2:
    # scale2 is (n-1) s^2 over a chi-square with n-1 degrees of freedom,
    # then location is normal around the sample mean given scale2
    chi2 = 2.0 * rng.standard_gamma(0.5 * (n - 1), size=k)
    v_draws = (n - 1) * s2 / chi2
    m_draws = ybar + np.sqrt(v_draws / n) * rng.normal(size=k)

    devs = np.array([-2.0 * lognormal_log_likelihood(m, v, data)
                     for m, v in zip(m_draws, v_draws)])
    mean_dev = float(np.mean(devs))
    at_mean = -2.0 * lognormal_log_likelihood(
        float(np.mean(m_draws)), float(np.mean(v_draws)), data)
    p_d = mean_dev - at_mean
    mode_v = (n - 1) * s2 / (n + 2)
    flags = ()
    if not math.isfinite(mean_dev):
        flags = ("degenerate_lognormal_scale",)
    elif p_d < 0.0:
        flags = ("negative_p_d",)
    return ModelFit(
        model="lognormal", k=2,
        mean_deviance=mean_dev, deviance_at_mean=at_mean,
        p_d=p_d, dic=mean_dev + p_d,
        bic=(-2.0 * lognormal_log_likelihood(ybar, mode_v, data)
             + 2.0 * math.log(n)),
        mode={"location": ybar, "scale2": mode_v},
        draws={"location": m_draws, "scale2": v_draws},
        flags=flags,
    )


def _gg_fit(data: Dataset, config: McmcConfig) -> ModelFit:
    chain = run_chain(data, config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        best = diagnostics.posterior_mode(chain, data)
    mean_dev, at_mean, p_d, dic_val = dic(chain, data)
    flags = ("negative_p_d",) if p_d < 0.0 else ()
    return ModelFit(
        model="gg", k=3,
        mean_deviance=mean_dev, deviance_at_mean=at_mean,
        p_d=p_d, dic=dic_val,
        bic=bic(best, data, 3),
        mode={"phi": best.phi, "mu": best.mu, "alpha": best.alpha},
        draws={"phi": chain.phi, "mu": chain.mu, "alpha": chain.alpha},
        flags=flags,
    )


def fit_model(model: str, data: Dataset, config: McmcConfig) -> ModelFit:
    """Fit and score one candidate; model is case-insensitive."""
    key = str(model).strip().lower()
    if key == "gg":
        return _gg_fit(data, config)
    if key in ("weibull", "gamma"):
        return _frozen_block_fit(key, data, config)
    if key == "lognormal":
        return _lognormal_fit(data, config)
    raise ValueError(f"unknown model {model!r}; expected one of "
                     f"{', '.join(MODEL_NAMES)}")


def fit_submodel(model: str, data: Dataset, config: McmcConfig) -> ModelFit:
    """Fit one of the nested candidates (weibull, gamma, lognormal)."""
    key = str(model).strip().lower()
    if key == "gg":
        raise ValueError("fit_submodel covers the nested models only; "
                         "use fit_model for the full model")
    return fit_model(key, data, config)


@dataclasses.dataclass(frozen=True)
class ComparisonResult:
    """All four candidate fits plus the per-criterion winners."""

    fits: tuple
    winner_dic: str
    winner_bic: str

    def __post_init__(self):
        names = [f.model for f in self.fits]
        if names != list(MODEL_NAMES):
            raise ValueError("fits must cover gg, weibull, gamma, lognormal "
                             "in that order")
        for w in (self.winner_dic, self.winner_bic):
            if w not in MODEL_NAMES:
                raise ValueError(f"winner {w!r} is not a fitted model")

    def fit_for(self, model: str) -> ModelFit:
        key = str(model).strip().lower()
        for f in self.fits:
            if f.model == key:
                return f
        raise KeyError(model)

    def as_dict(self) -> dict:
        return {
            "models": [f.as_dict() for f in self.fits],
            "winner_dic": _DISPLAY[self.winner_dic],
            "winner_bic": _DISPLAY[self.winner_bic],
        }


def compare_models(data: Dataset, config: McmcConfig) -> ComparisonResult:
    """Fit all four candidates with the same budget and pick winners.

    Winners minimize the criterion; non-finite scores never win.  DIC for
    a heavy-tailed fit can be distorted by a far-out posterior mean, so the
    DIC winner should be read alongside the per-model flags.
    """
    fits = tuple(fit_model(m, data, config) for m in MODEL_NAMES)

    def _winner(key_fn):
        scored = [(key_fn(f), f.model) for f in fits
                  if math.isfinite(key_fn(f))]
        if not scored:
            raise RuntimeError("no candidate produced a finite score")
        return min(scored)[1]

    return ComparisonResult(
        fits=fits,
        winner_dic=_winner(lambda f: f.dic),
        winner_bic=_winner(lambda f: f.bic),
    )
