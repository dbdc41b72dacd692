"""The three-parameter generalized gamma (GG) distribution.

Parameterization: a positive lifetime T follows GG(phi, mu, alpha) when its
density is

    f(t) = alpha / Gamma(phi) * mu^(alpha*phi) * t^(alpha*phi - 1)
           * exp(-(mu*t)^alpha),    t > 0,

with shape parameters phi, alpha > 0 and scale parameter mu > 0 (units
1/time). phi = 1 gives the Weibull family, alpha = 1 the gamma family.
Equivalently (mu*T)^alpha ~ gamma(shape=phi, rate=1), which is how sampling
and the Fisher-information cross-checks are done.

All density arithmetic is carried out in log space; (mu*t)^alpha is always
formed as exp(alpha*(log mu + log t)) so that alpha near 10 does not
overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfun import (
    RandomSource,
    digamma,
    ln_gamma,
    reg_inc_gamma_lower,
    reg_inc_gamma_upper,
    trigamma,
)

__all__ = [
    "Params",
    "FisherMatrix",
    "log_pdf",
    "cdf",
    "hazard",
    "mean",
    "variance",
    "sample",
    "fisher_info",
]


@dataclass(frozen=True)
class Params:
    """GG parameter triple (phi, mu, alpha), all strictly positive."""

    phi: float
    mu: float
    alpha: float

    def __post_init__(self):
        for name in ("phi", "mu", "alpha"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ValueError(f"Params.{name} must be a positive finite real, got {v!r}")
            object.__setattr__(self, name, float(v))


@dataclass(frozen=True)
class FisherMatrix:
    """Symmetric 3x3 Fisher information, row/column order (alpha, mu, phi).

    The index order intentionally differs from the Params field order
    (phi, mu, alpha); fixing both here prevents silent transposition.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"FisherMatrix must be 3x3, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
            raise ValueError("FisherMatrix must be symmetric")
        if np.any(np.diag(m) <= 0.0):
            raise ValueError("FisherMatrix diagonal must be strictly positive")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def as_array(self) -> np.ndarray:
        return self.matrix


def _check_t(t, allow_zero=False):
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"t must be finite, got {t!r}")
    if allow_zero:
        if np.any(arr < 0.0):
            raise ValueError(f"t must be >= 0, got {t!r}")
    elif np.any(arr <= 0.0):
        raise ValueError(f"t must be > 0, got {t!r}")
    return arr


def log_pdf(p: Params, t):
    """Log density of GG(p) at t > 0 (scalar or array)."""
    t = _check_t(t)
    log_t = np.log(t)
    ap = p.alpha * p.phi
    out = (
        np.log(p.alpha)
        - ln_gamma(p.phi)
        + ap * np.log(p.mu)
        + (ap - 1.0) * log_t
        - np.exp(p.alpha * (np.log(p.mu) + log_t))
    )
    return float(out) if out.ndim == 0 else out


def cdf(p: Params, t):
    """CDF of GG(p): the regularized lower incomplete gamma at (mu*t)^alpha."""
    t = _check_t(t, allow_zero=True)
    with np.errstate(divide="ignore"):
        log_t = np.log(t)
    x = np.exp(p.alpha * (np.log(p.mu) + log_t))
    out = reg_inc_gamma_lower(p.phi, np.where(np.isfinite(x), x, np.inf))
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def hazard(p: Params, t):
    """Hazard rate pdf/survival; raises OverflowError when survival underflows."""
    t = _check_t(t)
    log_t = np.log(t)
    x = np.exp(p.alpha * (np.log(p.mu) + log_t))
    survival = reg_inc_gamma_upper(p.phi, x)
    if np.any(survival <= 0.0):
        raise OverflowError("survival underflowed to 0; hazard not representable")
    out = np.exp(log_pdf(p, t) - np.log(survival))
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def mean(p: Params) -> float:
    """E[T] = Gamma(phi + 1/alpha) / (mu * Gamma(phi))."""
    log_m = ln_gamma(p.phi + 1.0 / p.alpha) - ln_gamma(p.phi) - np.log(p.mu)
    if log_m > 700.0:
        raise OverflowError("mean exceeds double range")
    return float(np.exp(log_m))


def variance(p: Params) -> float:
    """Var[T] per the Gamma-ratio second-moment formula; strictly positive."""
    log_g = ln_gamma(p.phi)
    log_r2 = ln_gamma(p.phi + 2.0 / p.alpha) - log_g
    log_r1 = ln_gamma(p.phi + 1.0 / p.alpha) - log_g
    if max(log_r2, 2.0 * log_r1) > 700.0:
        raise OverflowError("variance exceeds double range")
    v = (np.exp(log_r2) - np.exp(2.0 * log_r1)) / p.mu**2
    return float(v)


def sample(p: Params, n: int, rng: RandomSource):
    """n i.i.d. GG(p) draws via T = G^(1/alpha) / mu with G ~ gamma(phi, 1)."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"n must be a positive integer, got {n!r}")
    g = rng.standard_gamma(p.phi, size=int(n))
    return np.exp(np.log(g) / p.alpha) / p.mu


def fisher_info(p: Params) -> FisherMatrix:
    """Expected information for one observation, indexed (alpha, mu, phi)."""
    psi = digamma(p.phi)
    psi1 = trigamma(p.phi)
    a, m, f = p.alpha, p.mu, p.phi
    i11 = (1.0 + 2.0 * psi + f * psi1 + f * psi**2) / a**2
    # cross-term signs follow the rate parametrization used by log_pdf:
    # E[G log G] = phi psi(phi+1) with G = (mu T)^alpha gives
    # Cov(s_alpha, s_mu) = +(1 + phi psi)/mu and Cov(s_mu, s_phi) = -alpha/mu
    i12 = (1.0 + f * psi) / m
    i13 = -psi / a
    i22 = f * a**2 / m**2
    i23 = -a / m
    i33 = psi1
    return FisherMatrix(
        np.array(
            [
                [i11, i12, i13],
                [i12, i22, i23],
                [i13, i23, i33],
            ]
        )
    )
