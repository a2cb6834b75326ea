"""Desk-scale verification of Monge-Ampère exhaustions on tangent bundles of
rank-one symmetric spaces and on the flat model."""

from .errors import (CertificateFailure, ChartError, MalabError, NumericalDegeneracyError,
                     PremiseViolation, UnsupportedModelError, UsageError)
from .chart import sample_points
from .euclidean import DDC_CONSTANT, EuclideanModel, analytic_ddc
from .lie import analytic_ad, bracket, build_algebra
from .models import load_model
from .pluripotential import ExhaustionField, ddc_form, ma_certificate, psh_certificate
from .runner import RunConfig, run
from .stenzel import StenzelModel, J_in_chart
from .symmetric import build_pair, verify_lemma33

__version__ = "0.1.0"

__all__ = [
    "CertificateFailure", "ChartError", "MalabError", "NumericalDegeneracyError",
    "PremiseViolation", "UnsupportedModelError", "UsageError",
    "DDC_CONSTANT", "EuclideanModel", "analytic_ddc",
    "analytic_ad", "bracket", "build_algebra", "load_model",
    "ExhaustionField", "ddc_form", "ma_certificate", "psh_certificate",
    "StenzelModel", "J_in_chart", "build_pair", "verify_lemma33",
    "RunConfig", "run", "sample_points",
]
