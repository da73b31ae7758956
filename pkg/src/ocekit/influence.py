"""Influence diagnostics for inverted optimized certainty equivalents.

The influence of a contamination point z on the inverted risk is the
derivative of roce((1 - eps) P + eps Delta_z) at eps = 0.  This module
offers the finite-epsilon empirical version (a reweighted solve on the
contaminated sample) alongside the closed forms and the uniform upper
bounds available for the entropic, mean-variance, and CVaR specs.

The empirical path reuses the risk solver generalized to arbitrary
nonnegative weights summing to one; that generalization is needed only
here and stays internal to this module.
"""

from dataclasses import dataclass

import numpy as np

from .disutility import CVaR, Entropic, MeanVariance
from .errors import DomainError
from .risk import _TERNARY_MAX_ITER, _TERNARY_TOL

__all__ = [
    "ContaminationQuery",
    "DistributionSummary",
    "empirical_influence",
    "closed_form_influence",
    "influence_bound",
]


@dataclass(frozen=True)
class ContaminationQuery:
    """A contamination point z_loss mixed in with weight epsilon."""

    z_loss: float
    epsilon: float = 1e-6

    def __post_init__(self):
        if not np.isfinite(self.z_loss) or self.z_loss < 0.0:
            raise ValueError(f"z_loss must be nonnegative, got {self.z_loss!r}")
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 0.5), got {self.epsilon!r}")


@dataclass(frozen=True)
class DistributionSummary:
    """The distribution facts the closed forms and bounds consume.

    Only the fields a given spec needs have to be present:
    Entropic uses exp_neg_moment = E[exp(-gamma f)]; MeanVariance uses
    mean and variance; CVaR uses quantile q(alpha) and shortfall_gap =
    E[max(q - f, 0)] and additionally requires a continuous pushforward.
    """

    continuous: bool
    mean: float = None
    variance: float = None
    exp_neg_moment: float = None
    quantile: float = None
    shortfall_gap: float = None

    @classmethod
    def from_losses(cls, losses, spec):
        """Summarize an empirical sample for the given spec (discrete)."""
        v = losses.values
        kwargs = {"continuous": False, "mean": float(v.mean()), "variance": float(v.var())}
        if isinstance(spec, Entropic):
            kwargs["exp_neg_moment"] = float(np.mean(np.exp(-spec.gamma * v)))
        if isinstance(spec, CVaR):
            q = float(np.quantile(v, spec.alpha))
            kwargs["quantile"] = q
            kwargs["shortfall_gap"] = float(np.mean(np.maximum(q - v, 0.0)))
        return cls(**kwargs)


def empirical_influence(losses, spec, query):
    """Finite-epsilon influence of a contamination point on the inverted risk.

    Computes [roce((1 - eps) P_n + eps Delta_z) - roce(P_n)] / eps with
    both risks evaluated by the weighted solver on the interval
    [0, max(bound_m, z_loss)], so discretization errors cancel in the
    difference.
    """
    v = losses.values
    z = float(query.z_loss)
    eps = float(query.epsilon)
    hi = max(losses.bound_m, z)

    n = v.size
    base = _roce_weighted(v, np.full(n, 1.0 / n), spec, hi)
    mixed_vals = np.append(v, z)
    mixed_w = np.append(np.full(n, (1.0 - eps) / n), eps)
    mixed = _roce_weighted(mixed_vals, mixed_w, spec, hi)
    return (mixed - base) / eps


def closed_form_influence(spec, summary, z_loss):
    """Influence function of the inverted risk at contamination point z.

    Available for Entropic, MeanVariance, and (continuous pushforwards
    only) CVaR.  Raises DomainError when CVaR is requested on a discrete
    summary and ValueError for specs without a closed form.
    """
    z = float(z_loss)
    if isinstance(spec, Entropic):
        moment = _require(summary.exp_neg_moment, "exp_neg_moment")
        g = spec.gamma
        return 1.0 / g - np.exp(-g * z) / (g * moment)
    if isinstance(spec, MeanVariance):
        mean = _require(summary.mean, "mean")
        var = _require(summary.variance, "variance")
        dev = z - mean
        return dev + spec.c * (var - dev * dev)
    if isinstance(spec, CVaR):
        if not summary.continuous:
            raise DomainError(
                "the CVaR influence closed form assumes a continuous "
                "pushforward; the summary describes a discrete sample"
            )
        q = _require(summary.quantile, "quantile")
        gap = _require(summary.shortfall_gap, "shortfall_gap")
        a = spec.alpha
        return gap / a - max(q - z, 0.0) / a
    raise ValueError(f"no influence closed form for {type(spec).__name__}")


def influence_bound(spec, summary):
    """Uniform upper bound on the inverted-risk influence over all z."""
    if isinstance(spec, Entropic):
        return 1.0 / spec.gamma
    if isinstance(spec, MeanVariance):
        var = _require(summary.variance, "variance")
        return 3.0 / (4.0 * spec.c) + spec.c * var
    if isinstance(spec, CVaR):
        gap = _require(summary.shortfall_gap, "shortfall_gap")
        return gap / spec.alpha
    raise ValueError(f"no influence bound for {type(spec).__name__}")


def _require(field, name):
    if field is None:
        raise ValueError(f"distribution summary is missing {name}")
    return float(field)


def _roce_weighted(values, weights, spec, hi):
    """Weighted inverted risk: max over [0, hi] of lambda - sum(w phi(lambda - f)).

    Ternary search with the same stopping rule as the unweighted solver;
    anchors that would push any phi argument below the domain floor are
    excluded.
    """
    lo = 0.0
    floor = spec.domain_floor
    if np.isfinite(floor):
        # values.max() <= hi and floor < 0, so the interval stays nonempty.
        lo = max(lo, float(values.max()) + floor)

    def neg_xi(lams):
        args = lams[:, None] - values[None, :]
        return spec.values(args) @ weights - lams

    tol = _TERNARY_TOL * (1.0 + hi)
    pair = np.empty(2)
    pair[0], pair[1] = lo, hi
    vals = neg_xi(pair)
    best_v = float(min(vals[0], vals[1]))
    a, b = lo, hi
    for _ in range(_TERNARY_MAX_ITER):
        if b - a <= tol:
            break
        third = (b - a) / 3.0
        m1 = a + third
        m2 = b - third
        pair[0], pair[1] = m1, m2
        v1, v2 = neg_xi(pair)
        best_v = min(best_v, float(v1), float(v2))
        if v1 < v2:
            b = m2
        elif v1 > v2:
            a = m1
        else:
            a, b = m1, m2
    return -best_v
