"""Exact martingale checks and Kaplan-Meier asymptotics for discrete censored data."""

from .estim import KMEstimate, Sample, greenwood_variance, influence_function, km_confint, km_covariance, km_fit
from .mc import ExperimentConfig, ExperimentResult, run_experiment, sample_latent
from .model import FIXTURES, NSD, U2, LatentLaw, Observation, ObservedLaw, SpecError, TimeGrid, induce_observed, load_spec
from .oracle import run_suite

__version__ = "0.1.0"
