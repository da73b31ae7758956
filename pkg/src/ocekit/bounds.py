"""Finite-class generalization bounds and tail calculators.

The bounds here cover a finite hypothesis class whose losses lie in
[0, M]: uniform convergence of the certainty-equivalent risk, the excess
risk of the empirical minimizer, and three routes to an expected-loss
guarantee (a naive Lipschitz pass-through, the variance-corrected route
through the non-inverted risk, and the inverted-risk route).

Also included: the empirical Rademacher average of a finite class, a
binary KL divergence with its quadratic sandwich, an exact binomial
tail, and the two-sided bracket used to compare risk-based selection
against a mean-based one in the stylized two-hypothesis experiment.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ._validation import as_float_matrix, check_index, check_open_unit, check_positive
from .errors import DomainError

# Exhaustive sign enumeration is capped to keep 2^n * H memory sane.
_EXACT_ENUM_MAX_N = 24

# Constant in front of the lower bracket estimate.
_BRACKET_C1 = np.sqrt(2.0) / 3.0


@dataclass(frozen=True)
class FiniteClassLosses:
    """Loss matrix of a finite hypothesis class: rows are hypotheses.

    Entries must lie in [0, bound_m]; bound_m defaults to the largest
    observed entry (or 1.0 for an all-zero matrix).
    """

    matrix: np.ndarray
    bound_m: float = None

    def __post_init__(self):
        arr = as_float_matrix(self.matrix, "loss matrix")
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
        object.__setattr__(self, "matrix", arr)
        object.__setattr__(self, "bound_m", bound)

    @property
    def num_hypotheses(self):
        return self.matrix.shape[0]

    @property
    def n(self):
        return self.matrix.shape[1]


@dataclass(frozen=True)
class RademacherEstimate:
    estimate: float
    mc_std_error: float


def rademacher_mc(losses, num_draws, seed):
    """Monte Carlo estimate of the empirical Rademacher average.

    Each draw samples a uniform sign vector and takes the exact supremum
    over hypothesis rows of the signed mean.  mc_std_error is the sample
    standard deviation of the per-draw suprema divided by sqrt(draws)
    (zero when only one draw is requested).
    """
    num_draws = check_index(num_draws, "num_draws")
    mat = losses.matrix
    n = losses.n
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(num_draws, n)).astype(np.float64) * 2.0 - 1.0
    sups = (signs @ mat.T).max(axis=1) / n
    estimate = float(sups.mean())
    if num_draws == 1:
        return RademacherEstimate(estimate, 0.0)
    se = float(sups.std(ddof=1) / np.sqrt(num_draws))
    return RademacherEstimate(estimate, se)


def rademacher_exact(losses):
    """Exact empirical Rademacher average by enumerating all 2^n signs."""
    mat = losses.matrix
    n = losses.n
    if n > _EXACT_ENUM_MAX_N:
        raise ValueError(
            f"exact enumeration is limited to n <= {_EXACT_ENUM_MAX_N}, got {n}"
        )
    codes = np.arange(2 ** n, dtype=np.int64)
    signs = ((codes[:, None] >> np.arange(n)) & 1).astype(np.float64) * 2.0 - 1.0
    sups = (signs @ mat.T).max(axis=1) / n
    return float(sups.mean())


@dataclass(frozen=True)
class BoundInputs:
    """Ingredients of the finite-class bounds.

    lipschitz is the disutility's Lipschitz constant on [-M, M]; rad is
    an estimate of (or bound on) the expected Rademacher average.  The
    optional fields feed the expected-loss bounds: r_avg and sigma_avg
    are the empirical mean and deviation of the mean-minimizing
    hypothesis, sigma_eim of the inverted-risk minimizer.
    """

    lipschitz: float
    bound_m: float
    n: int
    delta: float
    rad: float
    r_avg: float = None
    sigma_avg: float = None
    sigma_eim: float = None

    def __post_init__(self):
        object.__setattr__(self, "lipschitz", check_positive(self.lipschitz, "lipschitz"))
        object.__setattr__(self, "bound_m", check_positive(self.bound_m, "bound_m"))
        object.__setattr__(self, "n", check_index(self.n, "n"))
        delta = float(self.delta)
        if not 0.0 < delta <= 1.0:
            raise DomainError(f"delta must lie in (0, 1], got {delta!r}")
        object.__setattr__(self, "delta", delta)
        rad = float(self.rad)
        if not np.isfinite(rad) or rad < 0.0:
            raise ValueError(f"rad must be nonnegative, got {rad!r}")
        object.__setattr__(self, "rad", rad)


@dataclass(frozen=True)
class BoundReport:
    uniform_conv: float
    excess_oce: float
    naive_expected_loss: float
    eom_expected_loss: float
    eim_expected_loss: float


def uniform_convergence_bound(inputs):
    """High-probability uniform gap between empirical and population risk."""
    b = inputs
    dev = b.bound_m * (2.0 + np.sqrt(np.log(2.0 / b.delta))) / np.sqrt(b.n)
    return float(b.lipschitz * (2.0 * b.rad + dev))


def excess_oce_bound(inputs):
    """Excess risk of the empirical minimizer: exactly twice the uniform gap."""
    return 2.0 * uniform_convergence_bound(inputs)


def expected_loss_bounds(inputs):
    """The three expected-loss guarantees (naive, via oce, via inverted oce).

    Requires r_avg for all three, sigma_avg for the oce route, and
    sigma_eim for the inverted route.
    """
    b = inputs
    if b.r_avg is None or b.sigma_avg is None or b.sigma_eim is None:
        raise ValueError(
            "expected-loss bounds need r_avg, sigma_avg, and sigma_eim"
        )
    root_n = np.sqrt(b.n)
    naive = b.lipschitz * (
        b.r_avg + 4.0 * b.rad
        + 2.0 * b.bound_m * (2.0 + np.sqrt(np.log(2.0 / b.delta))) / root_n
    )
    eom = (
        b.r_avg + 0.5 * b.lipschitz * b.sigma_avg
        + 4.0 * b.rad + 4.0 * b.bound_m * np.sqrt(np.log(3.0 / b.delta)) / root_n
    )
    eim = (
        b.r_avg + 4.0 * b.rad
        + 4.0 * b.bound_m * np.sqrt(np.log(2.0 / b.delta)) / root_n
        + 0.5 * b.lipschitz * b.sigma_eim
    )
    return float(naive), float(eom), float(eim)


def bound_report(inputs):
    """Assemble every bound into one report."""
    naive, eom, eim = expected_loss_bounds(inputs)
    return BoundReport(
        uniform_conv=uniform_convergence_bound(inputs),
        excess_oce=excess_oce_bound(inputs),
        naive_expected_loss=naive,
        eom_expected_loss=eom,
        eim_expected_loss=eim,
    )


def bkl(p, q):
    """Binary KL divergence between Bernoulli(p) and Bernoulli(q).

    Both arguments must lie strictly inside (0, 1).  For q in (1/2, 3/4)
    the divergence is sandwiched by 2 (p-q)^2 and 8 (p-q)^2.
    """
    p = check_open_unit(p, "p")
    q = check_open_unit(q, "q")
    return float(p * np.log(p / q) + (1.0 - p) * np.log((1.0 - p) / (1.0 - q)))


def binomial_tail_exact(n, p, k):
    """P[Binomial(n, p) <= k], exact in the number of summed terms.

    Terms up to floor(k) are accumulated in log space (shifted by the
    largest exponent) to stay stable far into the tails.  k < 0 gives 0,
    k >= n gives 1.
    """
    n = check_index(n, "n")
    p = check_open_unit(p, "p")
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    top = int(np.floor(k))
    i = np.arange(0, top + 1)
    log_terms = (
        gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
        + i * np.log(p) + (n - i) * np.log1p(-p)
    )
    shift = log_terms.max()
    return float(np.exp(shift) * np.exp(log_terms - shift).sum())


@dataclass(frozen=True)
class BracketResult:
    lower: float
    exact: float
    upper: float


def prop4_bracket(n, epsilon, alpha):
    """Two-sided bracket on the selection-error probability.

    In the stylized two-hypothesis experiment (a constant 1/2 loss versus
    a Bernoulli loss with mean (1 + epsilon)/2, compared by CVaR at level
    alpha), the probability that the risky hypothesis looks no worse
    equals P[Binomial(n, (1+epsilon)/2) <= n alpha / 2].  The exponential
    bracket shows that probability decays at a rate accelerated by
    (epsilon + 1 - alpha)^2 rather than epsilon^2 alone.
    """
    n = check_index(n, "n")
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 0.5), got {epsilon!r}")
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")

    abar = 1.0 - alpha
    rate = (epsilon + abar) ** 2
    upper = float(np.exp(-n * rate / 2.0))
    lower = float(
        _BRACKET_C1
        * np.exp(-4.0 * n * rate - np.log(np.sqrt(n * alpha)) - 16.0 / n)
    )
    exact = binomial_tail_exact(n, (1.0 + epsilon) / 2.0, n * alpha / 2.0)
    return BracketResult(lower=lower, exact=exact, upper=upper)
