"""Optimized certainty equivalents for bounded losses.

The package computes empirical optimized certainty equivalents and
their inverted counterparts for a catalog of disutility functions,
quantifies how single contamination points move the inverted risk,
derives finite-class generalization bounds, and trains a small linear
classifier under risk-shaped objectives.
"""

from .bounds import (
    BoundInputs,
    BoundReport,
    BracketResult,
    FiniteClassLosses,
    RademacherEstimate,
    binomial_tail_exact,
    bkl,
    bound_report,
    excess_oce_bound,
    expected_loss_bounds,
    prop4_bracket,
    rademacher_exact,
    rademacher_mc,
    uniform_convergence_bound,
)
from .disutility import (
    CVaR,
    DisutilitySpec,
    DisutilityVerdict,
    Entropic,
    Identity,
    MeanVariance,
    SoftCVaR,
    curvature_constant,
    format_phi,
    lipschitz_on,
    parse_phi,
    phi_eval,
    validate_tabulated,
)
from .errors import (
    CsvFormatError,
    DomainError,
    SpecStringError,
    TrainingDivergedError,
)
from .influence import (
    ContaminationQuery,
    DistributionSummary,
    closed_form_influence,
    empirical_influence,
    influence_bound,
)
from .risk import (
    LossVector,
    OceResult,
    inverted_oce_empirical,
    k_slice_average,
    loss_moments,
    oce_empirical,
)
from .training import (
    Dataset,
    Eim,
    Eom,
    Erm,
    Objective,
    RiskSensitiveClassifier,
    Svp,
    SyntheticTask,
    TrainConfig,
    Trajectory,
    batch_objective,
    clipped_cross_entropy,
    evaluation_alpha,
    make_objective,
    make_synthetic,
    stylized_experiment,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "BoundInputs",
    "BoundReport",
    "BracketResult",
    "CVaR",
    "ContaminationQuery",
    "CsvFormatError",
    "Dataset",
    "DisutilitySpec",
    "DisutilityVerdict",
    "DistributionSummary",
    "DomainError",
    "Eim",
    "Entropic",
    "Eom",
    "Erm",
    "FiniteClassLosses",
    "Identity",
    "LossVector",
    "MeanVariance",
    "Objective",
    "OceResult",
    "RademacherEstimate",
    "RiskSensitiveClassifier",
    "SoftCVaR",
    "SpecStringError",
    "Svp",
    "SyntheticTask",
    "TrainConfig",
    "TrainingDivergedError",
    "Trajectory",
    "batch_objective",
    "binomial_tail_exact",
    "bkl",
    "bound_report",
    "clipped_cross_entropy",
    "closed_form_influence",
    "curvature_constant",
    "empirical_influence",
    "evaluation_alpha",
    "excess_oce_bound",
    "expected_loss_bounds",
    "format_phi",
    "influence_bound",
    "inverted_oce_empirical",
    "k_slice_average",
    "lipschitz_on",
    "loss_moments",
    "make_objective",
    "make_synthetic",
    "oce_empirical",
    "parse_phi",
    "phi_eval",
    "prop4_bracket",
    "rademacher_exact",
    "rademacher_mc",
    "stylized_experiment",
    "train",
    "uniform_convergence_bound",
    "validate_tabulated",
]
