"""Empirical optimized certainty equivalents and their inverted forms.

For a loss sample f_1..f_n in [0, M] and disutility phi,

    oce  = min_{lambda}  lambda + mean(phi(f_i - lambda))
    roce = max_{lambda}  lambda - mean(phi(lambda - f_i))

Both optima are attained on [0, M], so the search is restricted to that
interval.  The inverted form equals -oce applied to the negated sample;
oce dominates the sample mean, roce is dominated by it.

Closed forms are used where available (Identity, Entropic, MeanVariance,
CVaR at integer n*alpha); everything else goes through ternary search on
the convex one-dimensional objective.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .disutility import CVaR, Entropic, Identity, MeanVariance
from ._validation import as_float_vector, check_index

# Stopping rule for the ternary solver: 200 iterations or bracket width
# below 1e-12 * (1 + M), whichever comes first.
_TERNARY_MAX_ITER = 200
_TERNARY_TOL = 1e-12

# n*alpha is treated as integer when within this absolute tolerance.
_INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class LossVector:
    """A nonnegative loss sample together with its known upper bound.

    Every value must lie in [0, bound_m].  When bound_m is omitted it
    defaults to the largest observed value (or 1.0 for an all-zero
    sample, where any positive bound is valid).
    """

    values: np.ndarray
    bound_m: float = None

    def __post_init__(self):
        arr = as_float_vector(self.values, "losses")
        if np.any(arr < 0.0):
            raise ValueError(f"losses must be nonnegative, got min {arr.min()}")
        bound = self.bound_m
        if bound is None:
            top = float(arr.max())
            bound = top if top > 0.0 else 1.0
        bound = float(bound)
        if not np.isfinite(bound) or bound <= 0.0:
            raise ValueError(f"bound_m must be positive, got {bound!r}")
        if np.any(arr > bound):
            raise ValueError(
                f"losses must not exceed bound_m={bound}, got max {arr.max()}"
            )
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "bound_m", bound)

    @property
    def n(self):
        return self.values.size


@dataclass(frozen=True)
class OceResult:
    """Optimal value, anchoring lambda, and which solver produced them."""

    value: float
    lambda_star: float
    solver: str


def loss_moments(losses):
    """Sample mean and standard deviation (population divisor n)."""
    v = losses.values
    return float(v.mean()), float(v.std())


def k_slice_average(losses, k, largest=True):
    """Average of the k largest (or smallest) losses."""
    v = losses.values
    k = check_index(k, "k")
    if k > v.size:
        raise ValueError(f"k={k} exceeds sample size {v.size}")
    s = np.sort(v)
    return float(s[-k:].mean()) if largest else float(s[:k].mean())


def oce_empirical(losses, spec, method="auto"):
    """Empirical optimized certainty equivalent of a loss sample.

    Parameters
    ----------
    losses : LossVector
    spec : DisutilitySpec
    method : "auto" uses closed forms where available; "ternary" forces
        the generic one-dimensional solver.

    Returns
    -------
    OceResult with value, the smallest optimal lambda found, and the
    solver used.  For Identity every lambda is optimal and 0 is reported.
    """
    v = losses.values
    if method not in ("auto", "ternary"):
        raise ValueError(f"method must be 'auto' or 'ternary', got {method!r}")
    if method == "auto":
        result = _oce_closed_form(v, spec)
        if result is not None:
            return result
    lo, hi = _oce_interval(v, spec, losses.bound_m)
    lam, val = _ternary_min(_oce_objective(v, spec), lo, hi, losses.bound_m)
    return OceResult(value=val, lambda_star=lam, solver="ternary_search")


def inverted_oce_empirical(losses, spec, method="auto"):
    """Empirical inverted optimized certainty equivalent.

    Maximizes lambda - mean(phi(lambda - f_i)) over [0, bound_m]; equals
    the negated oce of the negated sample.  Same conventions as
    oce_empirical.
    """
    v = losses.values
    if method not in ("auto", "ternary"):
        raise ValueError(f"method must be 'auto' or 'ternary', got {method!r}")
    if method == "auto":
        result = _roce_closed_form(v, spec)
        if result is not None:
            return result
    lo, hi = _roce_interval(v, spec, losses.bound_m)
    neg_obj = _roce_negated_objective(v, spec)
    lam, neg_val = _ternary_min(neg_obj, lo, hi, losses.bound_m)
    return OceResult(value=-neg_val, lambda_star=lam, solver="ternary_search")


# ---------------------------------------------------------------------------
# closed forms


def _oce_closed_form(v, spec):
    if isinstance(spec, Identity):
        return OceResult(float(v.mean()), 0.0, "closed_form")
    if isinstance(spec, Entropic):
        g = spec.gamma
        value = float((logsumexp(g * v) - np.log(v.size)) / g)
        # The optimal anchor coincides with the value itself.
        return OceResult(value, value, "closed_form")
    if isinstance(spec, MeanVariance):
        # zeta(lambda) = mean + c * mean((f - lambda)^2) on the anchor
        # region where every argument stays valid.
        lam = min(float(v.mean()), float(v.min()) - spec.domain_floor)
        value = float(v.mean() + spec.c * np.mean((v - lam) ** 2))
        return OceResult(value, lam, "closed_form")
    if isinstance(spec, CVaR):
        k = _integer_level(spec.alpha, v.size)
        if k is None:
            return None
        s = np.sort(v)
        return OceResult(float(s[v.size - k:].mean()), float(s[v.size - k]), "closed_form")
    return None


def _roce_closed_form(v, spec):
    if isinstance(spec, Identity):
        return OceResult(float(v.mean()), 0.0, "closed_form")
    if isinstance(spec, Entropic):
        g = spec.gamma
        value = float(-(logsumexp(-g * v) - np.log(v.size)) / g)
        return OceResult(value, value, "closed_form")
    if isinstance(spec, MeanVariance):
        lo = max(0.0, float(v.max()) + spec.domain_floor)
        lam = max(float(v.mean()), lo)
        value = float(v.mean() - spec.c * np.mean((lam - v) ** 2))
        return OceResult(value, lam, "closed_form")
    if isinstance(spec, CVaR):
        k = _integer_level(spec.alpha, v.size)
        if k is None:
            return None
        s = np.sort(v)
        return OceResult(float(s[:k].mean()), float(s[k - 1]), "closed_form")
    return None


def _integer_level(alpha, n):
    """Return k when alpha * n is an integer k >= 1, else None."""
    k_float = alpha * n
    k = int(round(k_float))
    if k >= 1 and abs(k_float - k) <= _INTEGER_TOL * max(1.0, k_float):
        return k
    return None


# ---------------------------------------------------------------------------
# generic solver

def _oce_interval(v, spec, bound_m):
    # Anchors with any phi argument below the domain floor are excluded;
    # phi is +inf there in the closed convex extension.
    hi = bound_m
    floor = spec.domain_floor
    if np.isfinite(floor):
        hi = min(hi, float(v.min()) - floor)
    return 0.0, max(hi, 0.0)


def _roce_interval(v, spec, bound_m):
    lo = 0.0
    floor = spec.domain_floor
    if np.isfinite(floor):
        lo = max(lo, float(v.max()) + floor)
    return min(lo, bound_m), bound_m


def _oce_objective(v, spec):
    def zeta(lams):
        args = v[None, :] - lams[:, None]
        return lams + spec.values(args).mean(axis=1)

    return zeta


def _roce_negated_objective(v, spec):
    def neg_xi(lams):
        args = lams[:, None] - v[None, :]
        return spec.values(args).mean(axis=1) - lams

    return neg_xi


def _ternary_min(fun, lo, hi, bound_m):
    """Ternary search for the minimum of a convex function on [lo, hi].

    Runs until the bracket is narrower than 1e-12 * (1 + bound_m) or 200
    iterations have passed.  Returns the smallest minimizer seen among
    evaluated points together with its objective value.
    """
    tol = _TERNARY_TOL * (1.0 + bound_m)
    pair = np.empty(2)
    pair[0], pair[1] = lo, hi
    vals = fun(pair)
    if vals[1] < vals[0]:
        best_x, best_v = hi, float(vals[1])
    else:
        best_x, best_v = lo, float(vals[0])
    for _ in range(_TERNARY_MAX_ITER):
        if hi - lo <= tol:
            break
        third = (hi - lo) / 3.0
        m1 = lo + third
        m2 = hi - third
        pair[0], pair[1] = m1, m2
        v1, v2 = fun(pair)
        if v1 < best_v or (v1 == best_v and m1 < best_x):
            best_v, best_x = float(v1), m1
        if v2 < best_v or (v2 == best_v and m2 < best_x):
            best_v, best_x = float(v2), m2
        if v1 < v2:
            hi = m2
        elif v1 > v2:
            lo = m1
        else:
            # Convexity puts the minimum inside [m1, m2] on exact ties.
            lo, hi = m1, m2
    return best_x, best_v
