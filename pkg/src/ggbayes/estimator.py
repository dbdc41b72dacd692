"""Scikit-learn style front end for the generalized gamma posterior fit."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .data import Dataset
from .distribution import Params, log_pdf
from .posterior import McmcConfig, run_chain
from .diagnostics import summarize


class GeneralizedGammaBayes(DensityMixin, BaseEstimator):
    """Posterior density estimator for positive univariate data.

    fit() runs the Metropolis-within-Gibbs chain on the flattened input and
    stores the chain, a posterior summary, and the joint posterior mode;
    score_samples() evaluates the plug-in log density at the mode.

    Parameters mirror the chain configuration and follow the estimator
    convention of being validated at fit time, not at construction.
    """

    def __init__(self, iterations=31000, burn_in=1000, thin=30,
                 proposal_sd_log_alpha=0.5, proposal_sd_log_phi=0.5,
                 seed=0):
        self.iterations = iterations
        self.burn_in = burn_in
        self.thin = thin
        self.proposal_sd_log_alpha = proposal_sd_log_alpha
        self.proposal_sd_log_phi = proposal_sd_log_phi
        self.seed = seed

    def _config(self) -> McmcConfig:
        return McmcConfig(
            iterations=self.iterations, burn_in=self.burn_in, thin=self.thin,
            proposal_sd_log_alpha=self.proposal_sd_log_alpha,
            proposal_sd_log_phi=self.proposal_sd_log_phi, seed=self.seed)

    @staticmethod
    def _flatten(X) -> np.ndarray:
        X = check_array(X, ensure_2d=False, dtype=np.float64)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError("expected a single column of observations, "
                                 f"got shape {X.shape}")
            X = X[:, 0]
        return X

    def fit(self, X, y=None):
        x = self._flatten(X)
        data = Dataset(x)
        self.chain_ = run_chain(data, self._config())
        self.summary_ = summarize(self.chain_, data)
        self.mode_ = Params(self.summary_.phi.mode, self.summary_.mu.mode,
                            self.summary_.alpha.mode)
        self.n_features_in_ = 1
        return self

    def score_samples(self, X) -> np.ndarray:
        check_is_fitted(self, "mode_")
        x = self._flatten(X)
        return np.array([log_pdf(self.mode_, t) for t in x])

    def score(self, X, y=None) -> float:
        return float(np.mean(self.score_samples(X)))
