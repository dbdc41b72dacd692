"""Posterior density, collapsed conditionals, and the Gibbs sampler."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from ggbayes import Dataset, McmcConfig, Params, run_chain, run_chains
from ggbayes.distribution import log_pdf, sample
from ggbayes.posterior import (
    _resolve_init,
    _run_mwg,
    draw_mu,
    log_cond_alpha,
    log_cond_phi,
    log_likelihood,
    log_posterior,
    log_posterior_grad,
)
from ggbayes.priors import PriorSpec, log_prior
from ggbayes.specfun import RandomSource, trigamma

TRUTH = Params(0.4, 1.5, 5.0)


def _random_params(rng, k):
    phi = np.exp(rng.uniform(math.log(0.3), math.log(4.0), size=k))
    mu = np.exp(rng.uniform(math.log(0.2), math.log(5.0), size=k))
    alpha = np.exp(rng.uniform(math.log(0.4), math.log(5.0), size=k))
    return [Params(*t) for t in zip(phi, mu, alpha)]


# --- log_posterior ------------------------------------------------------------

def test_log_posterior_single_unit_observation():
    # every alpha and mu power vanishes; only the trigamma term and -mu^a S survive
    v = log_posterior(Params(1.0, 1.0, 1.0), Dataset((1.0,)))
    assert math.isclose(v, 0.5 * math.log(math.pi ** 2 / 6.0) - 1.0, rel_tol=1e-14)


def test_log_posterior_is_prior_plus_likelihood(rng):
    data = Dataset((0.7, 1.9, 3.4, 0.2, 5.5))
    for p in _random_params(rng, 100):
        lhs = log_posterior(p, data)
        rhs = log_prior(PriorSpec.MODIFIED_REFERENCE, p) + log_likelihood(p, data)
        assert abs(lhs - rhs) < 1e-10


def test_log_likelihood_matches_pdf_sum(rng):
    data = Dataset((0.4, 1.1, 2.6, 0.9))
    for p in _random_params(rng, 25):
        direct = sum(log_pdf(p, t) for t in data.values)
        assert abs(log_likelihood(p, data) - direct) < 1e-10 * max(1.0, abs(direct))


def test_log_likelihood_underflow_is_minus_inf():
    # mu^alpha * S overflows a double; the likelihood is an exact zero
    v = log_likelihood(Params(1.0, 1e6, 300.0), Dataset((2.0, 3.0)))
    assert v == -math.inf


@settings(max_examples=60, deadline=None)
@given(c=st.floats(0.1, 10.0), seed=st.integers(0, 2 ** 16))
def test_log_posterior_scale_equivariance(c, seed):
    # rescaling data by c and mu by 1/c shifts the log posterior by (1 - n) log c
    r = np.random.default_rng(seed)
    vals = tuple(r.uniform(0.5, 4.0, size=6))
    p = Params(1.3, 0.8, 1.7)
    base = log_posterior(p, Dataset(vals))
    moved = log_posterior(Params(1.3, 0.8 / c, 1.7),
                          Dataset(tuple(c * v for v in vals)))
    assert math.isclose(moved, base + (1 - 6) * math.log(c), rel_tol=0, abs_tol=1e-7)


# --- gradient -----------------------------------------------------------------

def _fd_grad(p, data, h=1e-6):
    out = []
    for i, v in enumerate((p.phi, p.mu, p.alpha)):
        step = h * v
        hi = [p.phi, p.mu, p.alpha]
        lo = [p.phi, p.mu, p.alpha]
        hi[i] += step
        lo[i] -= step
        out.append((log_posterior(Params(*hi), data)
                    - log_posterior(Params(*lo), data)) / (2 * step))
    return np.array(out)


def test_gradient_matches_central_differences(rng):
    data = Dataset((0.5, 1.3, 2.1, 0.9))
    for p in _random_params(rng, 20):
        g = log_posterior_grad(p, data)
        fd = _fd_grad(p, data)
        denom = np.maximum(np.abs(fd), 1.0)
        assert np.all(np.abs(g - fd) / denom < 1e-4)


def test_gradient_on_real_data(meeker):
    p = Params(1.2, 1.0 / 200.0, 1.5)
    g = log_posterior_grad(p, meeker)
    fd = _fd_grad(p, meeker)
    assert np.all(np.abs(g - fd) / np.maximum(np.abs(fd), 1.0) < 1e-4)


# --- collapsed conditionals ---------------------------------------------------

def test_mu_marginalization_pins_alpha_conditional():
    # integrating the joint over mu must reproduce the collapsed density up to
    # one phi-only constant, so the log ratio cannot move with alpha
    data = Dataset((1.0, 2.0, 3.0))
    logs = []
    for a in (0.6, 1.0, 1.7, 2.4):
        num, _ = integrate.quad(
            lambda mu: math.exp(log_posterior(Params(0.8, mu, a), data)),
            0, np.inf, limit=200)
        logs.append(math.log(num) - log_cond_alpha(a, 0.8, data))
    assert max(logs) - min(logs) < 1e-8


def test_mu_marginalization_pins_phi_conditional():
    data = Dataset((1.0, 2.0, 3.0))
    logs = []
    for f in (0.5, 0.9, 1.4, 2.2):
        num, _ = integrate.quad(
            lambda mu: math.exp(log_posterior(Params(f, mu, 1.3), data)),
            0, np.inf, limit=200)
        logs.append(math.log(num) - log_cond_phi(f, 1.3, data))
    assert max(logs) - min(logs) < 1e-8


def test_conditional_tails_fall(meeker):
    a_vals = [log_cond_alpha(a, 1.0, meeker) for a in (10.0, 50.0, 100.0)]
    assert a_vals[0] > a_vals[1] > a_vals[2]
    f_vals = [log_cond_phi(f, 1.0, meeker) for f in (1.0, 10.0, 100.0)]
    assert f_vals[0] > f_vals[1] > f_vals[2]


@pytest.mark.parametrize("fn", [log_cond_alpha, log_cond_phi])
@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_conditional_rejects_bad_arguments(fn, bad, meeker):
    with pytest.raises(ValueError):
        fn(bad, 1.0, meeker)
    with pytest.raises(ValueError):
        fn(1.0, bad, meeker)


# --- exact mu draws -----------------------------------------------------------

def test_draw_mu_alpha_one_is_gamma(meeker):
    rng = RandomSource(77)
    m = np.array([draw_mu(1.0, 1.0, meeker, rng) for _ in range(20000)])
    total = float(meeker.values.sum())
    ks = stats.kstest(m, stats.gamma(a=meeker.n, scale=1.0 / total).cdf)
    assert ks.pvalue > 0.01


def test_draw_mu_power_transform_is_gamma(meeker):
    a, f = 5.0, 0.4
    rng = RandomSource(77)
    m = np.array([draw_mu(a, f, meeker, rng) for _ in range(10 ** 5)])
    s = float(np.sum(meeker.values ** a))
    u = m ** a
    ks = stats.kstest(u, stats.gamma(a=meeker.n * f, scale=1.0 / s).cdf)
    assert ks.pvalue > 0.01
    se = math.sqrt(meeker.n * f) / s / math.sqrt(u.size)
    assert abs(u.mean() - meeker.n * f / s) < 4 * se


def test_draw_mu_rejects_bad_arguments(meeker):
    with pytest.raises(ValueError):
        draw_mu(-1.0, 1.0, meeker, RandomSource(0))
    with pytest.raises(ValueError):
        draw_mu(1.0, math.inf, meeker, RandomSource(0))


# --- sampler distributional checks --------------------------------------------

def test_alpha_subchain_detailed_balance(meeker):
    # freeze phi so the alpha walk targets its collapsed conditional exactly;
    # thin=25 leaves retained draws with negligible autocorrelation
    cfg = McmcConfig(iterations=2000 + 25 * 100000, burn_in=2000, thin=25,
                     seed=314159)
    ch = _run_mwg(meeker, cfg, Params(1.0, 1.0 / 203.6, 1.0), update_phi=False)
    al = ch.alpha
    assert np.all(ch.phi == ch.phi[0])

    lo, hi = al.min() * 0.7, al.max() * 1.3
    dens = lambda a: math.exp(log_cond_alpha(a, 1.0, meeker) + 190.0)
    z, _ = integrate.quad(dens, lo, hi, limit=400)
    edges = np.quantile(al, np.linspace(0, 1, 21))
    edges[0], edges[-1] = lo, hi
    probs = np.array([integrate.quad(dens, edges[i], edges[i + 1], limit=400)[0] / z
                      for i in range(20)])
    counts = np.histogram(al, bins=edges)[0]
    n = counts.sum()
    assert n == al.size
    chi2 = float(((counts - n * probs) ** 2 / (n * probs)).sum())
    assert chi2 < stats.chi2.ppf(0.99, 19)


def test_acceptance_rates_stay_in_band(meeker):
    cfg = McmcConfig(iterations=8000, burn_in=1000, thin=7, seed=5)
    cases = [meeker,
             Dataset(tuple(sample(TRUTH, 50, RandomSource(11)))),
             Dataset(tuple(sample(TRUTH, 300, RandomSource(12))))]
    for d in cases:
        ch = run_chain(d, cfg)
        assert 0.15 <= ch.acceptance_alpha <= 0.6
        assert 0.15 <= ch.acceptance_phi <= 0.6


def test_recovers_simulated_truth_at_n300():
    data = Dataset(tuple(sample(TRUTH, 300, RandomSource(2026))))
    ch = run_chain(data, McmcConfig(seed=8))
    assert abs(float(ch.mu.mean()) - TRUTH.mu) / TRUTH.mu < 0.1
    assert 3.5 < float(ch.alpha.mean()) < 5.5


# --- reproducibility and plumbing ---------------------------------------------

def test_run_chain_is_deterministic(meeker, small_cfg):
    a = run_chain(meeker, small_cfg)
    b = run_chain(meeker, small_cfg)
    for name in ("phi", "mu", "alpha"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert a.acceptance_alpha == b.acceptance_alpha
    c = run_chain(meeker, McmcConfig(iterations=4000, burn_in=500, thin=5, seed=100))
    assert not np.array_equal(a.alpha, c.alpha)


def test_run_chains_are_distinct_and_reproducible(meeker, small_cfg):
    first = run_chains(meeker, small_cfg, k=2)
    again = run_chains(meeker, small_cfg, k=2)
    assert len(first) == 2
    assert not np.array_equal(first[0].alpha, first[1].alpha)
    for x, y in zip(first, again):
        assert np.array_equal(x.alpha, y.alpha)


def test_default_budget_keeps_thousand_draws():
    assert McmcConfig().n_draws == 1000


def test_chain_draws_property(meeker_chain):
    ds = meeker_chain.draws
    assert len(ds) == len(meeker_chain)
    assert ds[0] == Params(meeker_chain.phi[0], meeker_chain.mu[0],
                           meeker_chain.alpha[0])


def test_config_validation():
    with pytest.raises(ValueError, match="burn_in"):
        McmcConfig(iterations=100, burn_in=100)
    with pytest.raises(ValueError, match="thin"):
        McmcConfig(thin=0)
    with pytest.raises(ValueError, match="positive integer"):
        McmcConfig(iterations=-5)
    with pytest.raises(ValueError, match="100 stored draws"):
        McmcConfig(iterations=200, burn_in=100, thin=5)
    with pytest.raises(ValueError, match="proposal_sd_log_alpha"):
        McmcConfig(proposal_sd_log_alpha=0.0)
    with pytest.raises(ValueError, match="seed"):
        McmcConfig(seed=2 ** 64)


def test_chain_validation(small_cfg):
    from ggbayes import Chain
    n = small_cfg.n_draws
    ones = np.ones(n)
    with pytest.raises(ValueError, match="exactly"):
        Chain(np.ones(n - 1), ones, ones, 0.3, 0.3, small_cfg)
    with pytest.raises(ValueError, match="positive and finite"):
        Chain(ones, ones, np.zeros(n) + np.nan, 0.3, 0.3, small_cfg)
    with pytest.raises(ValueError, match="acceptance_phi"):
        Chain(ones, ones, ones, 0.3, 1.5, small_cfg)
    ch = Chain(ones, ones, ones, 0.3, 0.3, small_cfg)
    with pytest.raises(ValueError):
        ch.phi[0] = 2.0


def test_resolve_init(meeker):
    p = _resolve_init("auto", meeker)
    assert p == Params(1.0, 1.0 / float(np.mean(meeker.values)), 1.0)
    assert _resolve_init(Params(2.0, 3.0, 4.0), meeker) == Params(2.0, 3.0, 4.0)
    with pytest.raises(ValueError):
        _resolve_init("warm", meeker)
    with pytest.raises(TypeError):
        _resolve_init((1.0, 2.0, 3.0), meeker)
