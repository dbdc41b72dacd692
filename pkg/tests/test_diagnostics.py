"""Geweke scores, HPD intervals, mode refinement, summaries, ACF."""

import math
import types

import numpy as np
import pytest

from ggbayes import Chain, Dataset, McmcConfig, Params, run_chain
from ggbayes.diagnostics import (
    ParamSummary,
    PosteriorSummary,
    autocorrelation,
    geweke_z,
    hpd_interval,
    posterior_mode,
    summarize,
)
from ggbayes.distribution import sample
from ggbayes.posterior import log_posterior
from ggbayes.specfun import RandomSource

Z95 = 1.959963984540054


# --- geweke -------------------------------------------------------------------

def test_geweke_constant_series_is_zero():
    assert geweke_z(np.full(500, 3.7)) == 0.0


def test_geweke_affine_invariance(rng):
    x = rng.standard_normal(1500)
    z = geweke_z(x)
    assert math.isclose(geweke_z(2.5 * x + 7.0), z, rel_tol=1e-10)
    assert math.isclose(geweke_z(-x), -z, rel_tol=1e-10)


def test_geweke_flags_mean_shift(rng):
    drift = np.concatenate([rng.standard_normal(400),
                            rng.standard_normal(1600) + 1.0])
    assert abs(geweke_z(drift)) > 3.0


def test_geweke_calibration_on_iid_series():
    # batch-means variance makes the score slightly heavy-tailed, so the
    # coverage of +-1.96 sits a touch above 92% rather than at the nominal 95
    r = np.random.default_rng(424242)
    zs = np.array([geweke_z(r.standard_normal(2000)) for _ in range(200)])
    assert np.mean(np.abs(zs) < Z95) >= 0.92
    assert np.max(np.abs(zs)) < 5.0


def test_geweke_validation(rng):
    with pytest.raises(ValueError, match="at least 100"):
        geweke_z(np.ones(99))
    with pytest.raises(ValueError, match="fractions"):
        geweke_z(rng.standard_normal(200), first_frac=0.6, last_frac=0.5)
    with pytest.raises(ValueError, match="fractions"):
        geweke_z(rng.standard_normal(200), first_frac=0.0)
    with pytest.raises(ValueError, match="finite"):
        geweke_z(np.r_[np.ones(199), np.nan])
    with pytest.raises(ValueError, match="one-dimensional"):
        geweke_z(np.ones((200, 2)))


# --- hpd ----------------------------------------------------------------------

def test_hpd_uniform_width():
    r = np.random.default_rng(7)
    lo, hi = hpd_interval(r.uniform(0, 1, 20000))
    assert 0.93 < hi - lo < 0.97


def test_hpd_normal_matches_central_interval():
    r = np.random.default_rng(8)
    lo, hi = hpd_interval(r.standard_normal(50000))
    assert abs(lo + Z95) < 0.1
    assert abs(hi - Z95) < 0.1


def test_hpd_exponential_starts_at_zero():
    r = np.random.default_rng(9)
    x = r.exponential(size=50000)
    lo, hi = hpd_interval(x)
    assert lo < 0.005
    assert 2.8 < hi < 3.2


def test_hpd_no_wider_than_equal_tails():
    r = np.random.default_rng(10)
    x = r.standard_normal(50000)
    lo, hi = hpd_interval(x)
    q_lo, q_hi = np.quantile(x, [0.025, 0.975])
    assert hi - lo <= q_hi - q_lo + 1e-9


def test_hpd_affine_equivariance(rng):
    x = rng.standard_normal(2000)
    lo, hi = hpd_interval(x)
    lo2, hi2 = hpd_interval(3.0 * x + 1.0)
    assert math.isclose(lo2, 3.0 * lo + 1.0, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(hi2, 3.0 * hi + 1.0, rel_tol=1e-12, abs_tol=1e-12)


def test_hpd_mass_fraction_of_points(rng):
    x = rng.standard_normal(1000)
    lo, hi = hpd_interval(x, mass=0.5)
    inside = np.count_nonzero((x >= lo) & (x <= hi))
    assert inside >= 500


def test_hpd_validation(rng):
    with pytest.raises(ValueError, match="at least 100"):
        hpd_interval(np.ones(10))
    for bad in (0.0, 1.0, -0.2, 1.4):
        with pytest.raises(ValueError, match="mass"):
            hpd_interval(rng.standard_normal(200), mass=bad)


# --- posterior mode -----------------------------------------------------------

def test_mode_never_below_best_draw(meeker, meeker_chain):
    mode = posterior_mode(meeker_chain, meeker)
    best = max(log_posterior(p, meeker) for p in meeker_chain.draws)
    assert log_posterior(mode, meeker) >= best - 1e-9


def test_mode_agrees_across_seeds():
    data = Dataset(tuple(sample(Params(1.0, 1.0, 2.0), 100, RandomSource(303))))
    modes = []
    for seed in (1, 2):
        cfg = McmcConfig(iterations=6000, burn_in=1000, thin=5, seed=seed)
        modes.append(posterior_mode(run_chain(data, cfg), data))
    a, b = modes
    for x, y in zip((a.phi, a.mu, a.alpha), (b.phi, b.mu, b.alpha)):
        assert abs(x - y) / x < 1e-6


def test_mode_falls_back_on_failed_search(meeker, meeker_chain, monkeypatch):
    from ggbayes import diagnostics

    def broken(fun, x0, **kw):
        return types.SimpleNamespace(fun=np.inf, x=x0)

    monkeypatch.setattr(diagnostics.optimize, "minimize", broken)
    with pytest.warns(RuntimeWarning, match="did not improve"):
        mode = posterior_mode(meeker_chain, meeker)
    lps = [log_posterior(p, meeker) for p in meeker_chain.draws]
    assert mode == meeker_chain.draws[int(np.argmax(lps))]


# --- summaries ----------------------------------------------------------------

def test_summarize_fields_and_flags(meeker, meeker_chain):
    s = summarize(meeker_chain, meeker)
    d = s.as_dict()
    for name in ("phi", "mu", "alpha"):
        block = d[name]
        assert set(block) == {"mode", "sd", "hpd_low", "hpd_high", "geweke_z"}
        assert block["sd"] > 0
        assert block["hpd_low"] < block["hpd_high"]
    assert not any(f.startswith("degenerate") for f in s.flags)


def test_summarize_degenerate_chain(meeker):
    cfg = McmcConfig(iterations=600, burn_in=100, thin=5, seed=0)
    n = cfg.n_draws
    ch = Chain(np.full(n, 1.0), np.full(n, 1.0 / 200.0), np.full(n, 1.0),
               0.0, 0.0, cfg)
    s = summarize(ch, meeker)
    for name in ("phi", "mu", "alpha"):
        assert f"degenerate_chain_{name}" in s.flags
        part = getattr(s, name)
        assert part.sd == 0.0
        assert part.hpd_low == part.hpd_high
        assert part.geweke_z == 0.0


def test_param_summary_validation():
    with pytest.raises(ValueError, match="sd"):
        ParamSummary(mode=1.0, sd=-0.1, hpd_low=0.0, hpd_high=1.0, geweke_z=0.0)
    with pytest.raises(ValueError, match="hpd_low"):
        ParamSummary(mode=1.0, sd=0.1, hpd_low=2.0, hpd_high=1.0, geweke_z=0.0)


def test_posterior_summary_as_dict_flags():
    part = ParamSummary(mode=1.0, sd=0.1, hpd_low=0.5, hpd_high=1.5, geweke_z=0.2)
    s = PosteriorSummary(phi=part, mu=part, alpha=part, flags=("x",))
    assert s.as_dict()["flags"] == ["x"]
    s2 = PosteriorSummary(phi=part, mu=part, alpha=part)
    assert "flags" not in s2.as_dict()


# --- autocorrelation ----------------------------------------------------------

def test_acf_lag_zero_is_one(rng):
    ac = autocorrelation(rng.standard_normal(500), 10)
    assert ac[0] == 1.0
    assert ac.shape == (11,)


def test_acf_white_noise_is_small():
    r = np.random.default_rng(424242)
    ac = autocorrelation(r.standard_normal(4000), 20)
    assert np.max(np.abs(ac[1:])) < 0.08


def test_acf_tracks_ar1_process():
    r = np.random.default_rng(424242)
    x = np.empty(5000)
    x[0] = r.standard_normal()
    eps = r.standard_normal(5000)
    for i in range(1, 5000):
        x[i] = 0.8 * x[i - 1] + eps[i]
    ac = autocorrelation(x, 10)
    assert 0.75 < ac[1] < 0.85
    assert np.all(np.diff(ac[:6]) < 0)


def test_acf_constant_series():
    ac = autocorrelation(np.full(100, 2.0), 5)
    assert ac[0] == 1.0
    assert np.all(ac[1:] == 0.0)


def test_acf_validation(rng):
    with pytest.raises(ValueError, match="quarter"):
        autocorrelation(rng.standard_normal(100), 25)
    with pytest.raises(ValueError, match="max_lag"):
        autocorrelation(rng.standard_normal(100), 0)
    with pytest.raises(ValueError, match="at least 8"):
        autocorrelation(np.ones(5), 1)
