"""Objective Bayesian inference for the three-parameter generalized gamma
distribution: reference-style priors, propriety evidence, a
Metropolis-within-Gibbs sampler, convergence diagnostics, model comparison,
and a repeated-sampling study, all behind one CLI.
"""

__version__ = "0.1.0"

from .data import Dataset, load_dataset, meeker_dataset
from .distribution import Params, FisherMatrix, fisher_info
from .posterior import Chain, McmcConfig, run_chain, run_chains
from .priors import PriorSpec, ProprietyEvidence, propriety_evidence
from .diagnostics import PosteriorSummary, summarize
from .modelsel import ComparisonResult, ModelFit, compare_models, fit_submodel
from .simstudy import SimCell, SimReport, run_study
from .estimator import GeneralizedGammaBayes

__all__ = [
    "__version__",
    "Dataset", "load_dataset", "meeker_dataset",
    "Params", "FisherMatrix", "fisher_info",
    "Chain", "McmcConfig", "run_chain", "run_chains",
    "PriorSpec", "ProprietyEvidence", "propriety_evidence",
    "PosteriorSummary", "summarize",
    "ComparisonResult", "ModelFit", "compare_models", "fit_submodel",
    "SimCell", "SimReport", "run_study",
    "GeneralizedGammaBayes",
]
