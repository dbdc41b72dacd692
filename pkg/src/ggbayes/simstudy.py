"""Repeated-sampling evaluation of the posterior point and interval estimates.

For each sample size, N datasets are drawn from a fixed truth, each is fit
with a fresh chain, and per-parameter accuracy (mean relative estimate,
mean squared error) and 95% interval behaviour are tabulated.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import replace

import numpy as np

from .data import Dataset
from .distribution import Params, sample
from .posterior import McmcConfig, run_chain
from .specfun import RandomSource
from . import diagnostics

PARAM_NAMES = ("phi", "mu", "alpha")
ESTIMATORS = ("mode", "mean")

_GEWEKE_BOUND = 1.959963984540054  # two-sided 5% normal quantile


@dataclasses.dataclass(frozen=True)
class SimCell:
    """Accuracy and interval bookkeeping for one (parameter, sample size).

    Interval additivity is exact at the count level:
    n_below + n_inside + n_above == replications_used always holds, and the
    three cov_* fractions are those counts over replications_used.
    """

    parameter: str
    n: int
    mre: float
    mse: float
    cov_low: float
    cov_up: float
    cov: float
    n_below: int
    n_inside: int
    n_above: int
    replications_used: int
    geweke_pass_rate: float

    def __post_init__(self):
        if self.parameter not in PARAM_NAMES:
            raise ValueError(f"unknown parameter {self.parameter!r}")
        if self.replications_used <= 0:
            raise ValueError("replications_used must be positive")
        if self.n_below + self.n_inside + self.n_above != self.replications_used:
            raise ValueError("interval counts must add up to the "
                             "replications used")
        for name in ("cov_low", "cov_up", "cov", "geweke_pass_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name)
                for f in dataclasses.fields(self)}


@dataclasses.dataclass(frozen=True)
class SimReport:
    """Full study output: one SimCell per (parameter, sample size)."""

    truth: Params
    n_list: tuple
    n_replications: int
    estimator: str
    master_seed: int
    cells: tuple

    def cell(self, parameter: str, n: int) -> SimCell:
        for c in self.cells:
            if c.parameter == parameter and c.n == n:
                return c
        raise KeyError((parameter, n))

    def as_dict(self) -> dict:
        return {
            "truth": {"phi": self.truth.phi, "mu": self.truth.mu,
                      "alpha": self.truth.alpha},
            "n_list": list(self.n_list),
            "n_replications": self.n_replications,
            "estimator": self.estimator,
            "master_seed": self.master_seed,
            "cells": [c.as_dict() for c in self.cells],
        }


def replication_seeds(master_seed: int, n: int, r: int) -> tuple:
    """(data seed, chain seed) for replication r at sample size n.

    Derived from the tuple (master_seed, n, r) only, so any subset of the
    study can be reproduced without running the rest.
    """
    ss = np.random.SeedSequence([master_seed & (2**64 - 1), n, r])
    st = ss.generate_state(2, dtype=np.uint64)
    return int(st[0]), int(st[1])


def _estimate(chain, data, estimator):
    if estimator == "mode":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = diagnostics.posterior_mode(chain, data)
        return {"phi": p.phi, "mu": p.mu, "alpha": p.alpha}
    return {"phi": float(np.mean(chain.phi)),
            "mu": float(np.mean(chain.mu)),
            "alpha": float(np.mean(chain.alpha))}


def run_study(truth: Params, n_list, N: int, config: McmcConfig,
              master_seed: int, estimator: str = "mode") -> SimReport:
    """Run the full repeated-sampling study.

    Replications that raise (degenerate data, failed fits) are dropped and
    the per-cell replications_used records what remained; replications whose
    Geweke statistic fails are kept, with the pass rate reported alongside.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}, "
                         f"got {estimator!r}")
    if not isinstance(N, int) or N < 2:
        raise ValueError("N must be an integer >= 2")
    n_list = tuple(int(n) for n in n_list)
    if not n_list or any(n < 2 for n in n_list):
        raise ValueError("n_list must hold sample sizes >= 2")
    if not isinstance(master_seed, int):
        raise TypeError("master_seed must be an integer")

    truth_by_name = {"phi": truth.phi, "mu": truth.mu, "alpha": truth.alpha}
    cells = []
    for n in n_list:
        est = {p: [] for p in PARAM_NAMES}
        lo = {p: [] for p in PARAM_NAMES}
        hi = {p: [] for p in PARAM_NAMES}
        gok = {p: [] for p in PARAM_NAMES}
        for r in range(N):
            data_seed, chain_seed = replication_seeds(master_seed, n, r)
            try:
                t = sample(truth, n, RandomSource(data_seed))
                d = Dataset(t)
                chain = run_chain(d, replace(config, seed=chain_seed))
                point = _estimate(chain, d, estimator)
                for p in PARAM_NAMES:
                    series = getattr(chain, p)
                    a, b = diagnostics.hpd_interval(series, 0.95)
                    z = diagnostics.geweke_z(series)
                    est[p].append(point[p])
                    lo[p].append(a)
                    hi[p].append(b)
                    gok[p].append(abs(z) < _GEWEKE_BOUND)
            except (ValueError, RuntimeError, OverflowError):
                continue
        for p in PARAM_NAMES:
            used = len(est[p])
            if used == 0:
                raise RuntimeError(f"every replication failed at n={n}")
            e = np.array(est[p])
            a = np.array(lo[p])
            b = np.array(hi[p])
            tv = truth_by_name[p]
            n_below = int(np.sum(tv < a))
            n_above = int(np.sum(tv > b))
            n_inside = used - n_below - n_above
            cells.append(SimCell(
                parameter=p, n=n,
                mre=float(np.mean(e / tv)),
                mse=float(np.mean((e - tv) ** 2)),
                cov_low=n_below / used,
                cov_up=n_above / used,
                cov=n_inside / used,
                n_below=n_below, n_inside=n_inside, n_above=n_above,
                replications_used=used,
                geweke_pass_rate=float(np.mean(gok[p])),
            ))
    return SimReport(truth=truth, n_list=n_list, n_replications=N,
                     estimator=estimator, master_seed=master_seed,
                     cells=tuple(cells))
