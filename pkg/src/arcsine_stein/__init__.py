"""Arcsine law for the symmetric random walk: exact laws, Stein operators, W1 rates."""

from .arcsine import cdf, cdf_antiderivative, expect, pdf, quantile, ArcsineMeasure
from .chung_feller import (
    ExactPmf,
    build_pmf,
    c_weight,
    pmf_float,
    psi,
    return_probability,
)
from .exceptions import NumericError, ResourceError
from .functions import PiecewiseLinear
from .stein import (
    DiscreteSteinOperator,
    SteinSolution,
    bounds_audit,
    build_discrete_operator,
    build_general_operator,
    check_continuous_characterization,
    solve_stein,
)
from .walk import WalkBatch, simulate_batch, simulate_path, symmetry_check
from .wasserstein import (
    StepCdf,
    lipschitz_lower_bound,
    optimal_witness,
    w1_discrete_vs_arcsine,
    w1_quadrature_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "ArcsineMeasure",
    "DiscreteSteinOperator",
    "ExactPmf",
    "NumericError",
    "PiecewiseLinear",
    "ResourceError",
    "SteinSolution",
    "StepCdf",
    "WalkBatch",
    "bounds_audit",
    "build_discrete_operator",
    "build_general_operator",
    "build_pmf",
    "c_weight",
    "cdf",
    "cdf_antiderivative",
    "check_continuous_characterization",
    "expect",
    "lipschitz_lower_bound",
    "optimal_witness",
    "pdf",
    "pmf_float",
    "psi",
    "quantile",
    "return_probability",
    "simulate_batch",
    "simulate_path",
    "solve_stein",
    "symmetry_check",
    "w1_discrete_vs_arcsine",
    "w1_quadrature_oracle",
]
