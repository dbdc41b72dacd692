"""Log-posterior under the tempered reference prior and its MCMC sampler.

The joint posterior over (phi, mu, alpha) factors so that mu can be
integrated out in closed form, leaving collapsed conditionals for alpha
and phi that depend on the data only through sum(log t_i) and
log sum(t_i^alpha). The sampler exploits this: Gaussian random-walk
Metropolis steps on log(alpha) and log(phi) against the collapsed
conditionals, then an exact conditional draw of mu. Proposal scales are
tuned by Robbins-Monro only during burn-in and frozen afterward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import polygamma

from .data import Dataset
from .distribution import Params
from .specfun import RandomSource, digamma, ln_gamma, trigamma

__all__ = [
    "McmcConfig",
    "Chain",
    "log_likelihood",
    "log_posterior",
    "log_posterior_grad",
    "log_cond_alpha",
    "log_cond_phi",
    "draw_mu",
    "run_chain",
    "run_chains",
]

# random-walk states are confined to e^+-300 to keep every special-function
# evaluation inside float64 range; posterior mass never gets near this
_LOG_STATE_BOUND = 300.0
_ADAPT_TARGET = 0.35
_LOG_SD_MIN = math.log(1e-3)
_LOG_SD_MAX = math.log(10.0)


@dataclass(frozen=True)
class McmcConfig:
    """Length, thinning, proposal and seeding choices for one chain."""

    iterations: int = 31000
    burn_in: int = 1000
    thin: int = 30
    proposal_sd_log_alpha: float = 0.5
    proposal_sd_log_phi: float = 0.5
    seed: int = 0
    adapt_during_burnin: bool = True

    def __post_init__(self):
        if not isinstance(self.iterations, int) or self.iterations <= 0:
            raise ValueError("iterations must be a positive integer")
        if not isinstance(self.burn_in, int) or self.burn_in < 0:
            raise ValueError("burn_in must be a nonnegative integer")
        if self.burn_in >= self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        if not isinstance(self.thin, int) or self.thin <= 0:
            raise ValueError("thin must be a positive integer")
        if self.n_draws < 100:
            raise ValueError("config must allow at least 100 stored draws")
        for name in ("proposal_sd_log_alpha", "proposal_sd_log_phi"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive real")
        if not isinstance(self.seed, int) or not -2**63 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def n_draws(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass(frozen=True)
class Chain:
    """Thinned post-burn-in draws plus per-block acceptance rates."""

    phi: np.ndarray
    mu: np.ndarray
    alpha: np.ndarray
    acceptance_alpha: float
    acceptance_phi: float
    config: McmcConfig

    def __post_init__(self):
        for name in ("phi", "mu", "alpha"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1 or arr.size != self.config.n_draws:
                raise ValueError(f"{name} must hold exactly {self.config.n_draws} draws")
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"{name} draws must be positive and finite")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("acceptance_alpha", "acceptance_phi"):
            rate = float(getattr(self, name))
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, rate)

    def __len__(self) -> int:
        return int(self.phi.size)

    @property
    def draws(self):
        return tuple(Params(p, m, a) for p, m, a in zip(self.phi, self.mu, self.alpha))


def _log_s(alpha: float, log_t: np.ndarray) -> float:
    """log sum(t_i^alpha) without overflow."""
    m = alpha * log_t
    mx = m.max()
    return float(mx + math.log(np.exp(m - mx).sum()))


def _exp_or_inf(x: float) -> float:
    # exp without OverflowError; the caller treats inf as likelihood zero
    return math.exp(x) if x < 709.0 else math.inf


def log_likelihood(p: Params, data: Dataset) -> float:
    """Joint log-density of the sample at p; -inf where it underflows."""
    n = data.n
    lmu = math.log(p.mu)
    return (n * math.log(p.alpha) - n * ln_gamma(p.phi) + n * p.alpha * p.phi * lmu
            + (p.alpha * p.phi - 1.0) * data.sum_log
            - _exp_or_inf(p.alpha * lmu + _log_s(p.alpha, data.log_values)))


def log_posterior(p: Params, data: Dataset) -> float:
    """Unnormalized log posterior under the tempered reference prior."""
    n = data.n
    a = p.alpha
    lmu = math.log(p.mu)
    return ((n + 0.5 - 2.0 * a / (1.0 + a)) * math.log(a)
            + 0.5 * math.log(trigamma(p.phi)) - n * ln_gamma(p.phi)
            + (n * a * p.phi - 1.0) * lmu
            + (a * p.phi - 1.0) * data.sum_log
            - _exp_or_inf(a * lmu + _log_s(a, data.log_values)))


def log_posterior_grad(p: Params, data: Dataset) -> np.ndarray:
    """Gradient of log_posterior in Params field order (phi, mu, alpha)."""
    n = data.n
    a, f, mu = p.alpha, p.phi, p.mu
    lmu = math.log(mu)
    lw = a * (lmu + data.log_values)
    w = np.exp(lw)
    sum_w = float(w.sum())
    sum_w_log = float((w * (lmu + data.log_values)).sum())
    d_phi = (0.5 * float(polygamma(2, f)) / trigamma(f) - n * digamma(f)
             + n * a * lmu + a * data.sum_log)
    d_mu = (n * a * f - 1.0) / mu - (a / mu) * sum_w
    d_alpha = ((n + 0.5 - 2.0 * a / (1.0 + a)) / a
               - 2.0 / (1.0 + a) ** 2 * math.log(a)
               + n * f * lmu + f * data.sum_log - sum_w_log)
    return np.array([d_phi, d_mu, d_alpha])


def log_cond_alpha(alpha: float, phi: float, data: Dataset) -> float:
    """Collapsed conditional of alpha given phi (mu integrated out), up to a constant."""
    a = float(alpha)
    f = float(phi)
    if not (a > 0 and f > 0 and math.isfinite(a) and math.isfinite(f)):
        raise ValueError("alpha and phi must be positive and finite")
    n = data.n
    return ((n - 0.5 - 2.0 * a / (1.0 + a)) * math.log(a)
            + (a * f - 1.0) * data.sum_log
            - n * f * _log_s(a, data.log_values))


def log_cond_phi(phi: float, alpha: float, data: Dataset) -> float:
    """Collapsed conditional of phi given alpha (mu integrated out), up to a constant."""
    a = float(alpha)
    f = float(phi)
    if not (a > 0 and f > 0 and math.isfinite(a) and math.isfinite(f)):
        raise ValueError("alpha and phi must be positive and finite")
    n = data.n
    return (0.5 * math.log(trigamma(f)) + ln_gamma(n * f) - n * ln_gamma(f)
            + (a * f - 1.0) * data.sum_log
            - n * f * _log_s(a, data.log_values))


def _draw_log_mu(n_phi: float, log_s: float, alpha: float, rng: RandomSource) -> float:
    """log of an exact conditional mu draw: W ~ gamma(n*phi, rate S), mu = W^(1/alpha)."""
    w = rng.standard_gamma(n_phi)
    while w == 0.0:
        # shape < 1 can underflow to an exact zero; redraw keeps mu positive
        w = rng.standard_gamma(n_phi)
    return (math.log(w) - log_s) / alpha


def draw_mu(alpha: float, phi: float, data: Dataset, rng: RandomSource) -> float:
    """Exact draw from the conditional posterior of mu given (alpha, phi)."""
    a = float(alpha)
    f = float(phi)
    if not (a > 0 and f > 0 and math.isfinite(a) and math.isfinite(f)):
        raise ValueError("alpha and phi must be positive and finite")
    return math.exp(_draw_log_mu(data.n * f, _log_s(a, data.log_values), a, rng))


def _resolve_init(init, data: Dataset) -> Params:
    if isinstance(init, str):
        if init != "auto":
            raise ValueError("init must be a Params or the string 'auto'")
        return Params(phi=1.0, mu=1.0 / float(np.mean(data.values)), alpha=1.0)
    if not isinstance(init, Params):
        raise TypeError("init must be a Params or 'auto'")
    return init


def run_chain(data: Dataset, config: McmcConfig = McmcConfig(),
              init="auto") -> Chain:
    """Sample the posterior by Metropolis-within-Gibbs.

    Each iteration updates log(alpha) by random-walk Metropolis against
    its collapsed conditional (with the log-scale Jacobian), then log(phi)
    likewise, then draws mu exactly. Deterministic given config.seed.
    """
    return _run_mwg(data, config, init)


def _run_mwg(data: Dataset, config: McmcConfig, init,
             update_alpha: bool = True, update_phi: bool = True) -> Chain:
    """Sampler core; freezing a block at its initial value yields the
    corresponding sub-model sampler (phi frozen at 1: Weibull; alpha
    frozen at 1: gamma). Frozen blocks consume no randomness and report
    acceptance 0."""
    start = _resolve_init(init, data)
    log_t = data.log_values
    sum_log = data.sum_log
    n = data.n
    rng = RandomSource(config.seed)

    la = math.log(start.alpha)
    lp = math.log(start.phi)
    a_cur = start.alpha
    f_cur = start.phi
    ls_cur = _log_s(a_cur, log_t)

    def phi_terms(f: float) -> float:
        return 0.5 * math.log(trigamma(f)) + ln_gamma(n * f) - n * ln_gamma(f)

    c_phi = phi_terms(f_cur)
    lsd_a = math.log(config.proposal_sd_log_alpha)
    lsd_p = math.log(config.proposal_sd_log_phi)

    n_draws = config.n_draws
    out_phi = np.empty(n_draws)
    out_mu = np.empty(n_draws)
    out_alpha = np.empty(n_draws)
    acc_a = 0
    acc_p = 0
    kept = 0
    burn = config.burn_in
    adapt = config.adapt_during_burnin

    for i in range(config.iterations):
        # --- alpha block: collapsed conditional + log-scale Jacobian ---
        if update_alpha:
            la_prop = la + math.exp(lsd_a) * rng.normal()
            u = rng.uniform()
            p_acc = 0.0
            if abs(la_prop) <= _LOG_STATE_BOUND:
                a_prop = math.exp(la_prop)
                ls_prop = _log_s(a_prop, log_t)
                g_cur = ((n - 0.5 - 2.0 * a_cur / (1.0 + a_cur)) * la
                         + (a_cur * f_cur - 1.0) * sum_log - n * f_cur * ls_cur + la)
                g_prop = ((n - 0.5 - 2.0 * a_prop / (1.0 + a_prop)) * la_prop
                          + (a_prop * f_cur - 1.0) * sum_log
                          - n * f_cur * ls_prop + la_prop)
                delta = g_prop - g_cur
                if not math.isnan(delta):
                    p_acc = math.exp(min(0.0, delta))
                    if math.log(u) < delta:
                        la, a_cur, ls_cur = la_prop, a_prop, ls_prop
                        if i >= burn:
                            acc_a += 1
            if adapt and i < burn:
                lsd_a += (i + 1) ** -0.6 * (p_acc - _ADAPT_TARGET)
                lsd_a = min(max(lsd_a, _LOG_SD_MIN), _LOG_SD_MAX)

        # --- phi block ---
        if update_phi:
            lp_prop = lp + math.exp(lsd_p) * rng.normal()
            u = rng.uniform()
            p_acc = 0.0
            if abs(lp_prop) <= _LOG_STATE_BOUND:
                f_prop = math.exp(lp_prop)
                c_prop = phi_terms(f_prop)
                h_cur = c_phi + (a_cur * f_cur - 1.0) * sum_log - n * f_cur * ls_cur + lp
                h_prop = (c_prop + (a_cur * f_prop - 1.0) * sum_log
                          - n * f_prop * ls_cur + lp_prop)
                delta = h_prop - h_cur
                if not math.isnan(delta):
                    p_acc = math.exp(min(0.0, delta))
                    if math.log(u) < delta:
                        lp, f_cur, c_phi = lp_prop, f_prop, c_prop
                        if i >= burn:
                            acc_p += 1
            if adapt and i < burn:
                lsd_p += (i + 1) ** -0.6 * (p_acc - _ADAPT_TARGET)
                lsd_p = min(max(lsd_p, _LOG_SD_MIN), _LOG_SD_MAX)

        # --- mu block: exact conditional draw ---
        l_mu = _draw_log_mu(n * f_cur, ls_cur, a_cur, rng)

        if i >= burn and (i - burn + 1) % config.thin == 0:
            if not -745.0 < l_mu < 709.0:
                # a double cannot hold this mu; near-degenerate datasets push
                # the walk to extreme alpha where the scale collapses or blows up
                raise RuntimeError(
                    "mu draw left the representable range; the posterior mass "
                    "sits beyond double precision for this dataset")
            out_phi[kept] = f_cur
            out_mu[kept] = math.exp(l_mu)
            out_alpha[kept] = a_cur
            kept += 1

    post = config.iterations - burn
    return Chain(phi=out_phi, mu=out_mu, alpha=out_alpha,
                 acceptance_alpha=acc_a / post, acceptance_phi=acc_p / post,
                 config=config)


def run_chains(data: Dataset, config: McmcConfig = McmcConfig(), k: int = 3,
               init="auto") -> tuple:
    """k independent chains with seeds derived deterministically from config.seed."""
    if not isinstance(k, int) or k <= 0:
        raise ValueError("k must be a positive integer")
    chains = []
    for j in range(k):
        entropy = (config.seed & (2**64 - 1), j)
        child_seed = int(np.random.SeedSequence(entropy).generate_state(1)[0])
        chains.append(run_chain(data, replace(config, seed=child_seed), init=init))
    return tuple(chains)
