"""Disutility functions for optimized certainty equivalents.

A disutility is a nondecreasing closed convex function phi with phi(0) = 0
and 1 contained in the subdifferential at 0.  Every spec in this module
satisfies those axioms on its validity domain, and each one exposes enough
structure (values, right subgradients, domain floor) for the risk solvers
built on top.

Catalog
-------
Identity            phi(t) = t
Entropic(gamma)     phi(t) = (exp(gamma t) - 1) / gamma
MeanVariance(c)     phi(t) = t + c t^2, valid only for t >= -1/(2c)
CVaR(alpha)         phi(t) = max(t, 0) / alpha
SoftCVaR(g1, g2)    phi(t) = g1 max(t, 0) - g2 max(-t, 0), 0 <= g2 < 1 < g1

SoftCVaR behaves like CVaR at the induced level (1 - g2) / (g1 - g2) but
keeps a nonzero slope below the anchor.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, SpecStringError

# Slack applied to the mean-variance domain check so that solver probes
# sitting on the boundary up to roundoff are not rejected.
_DOMAIN_SLACK = 1e-9


@dataclass(frozen=True)
class Identity:
    """phi(t) = t; the induced certainty equivalent is the plain mean."""

    def values(self, t):
        return np.asarray(t, dtype=np.float64) + 0.0

    def right_slopes(self, t):
        return np.ones_like(np.asarray(t, dtype=np.float64))

    @property
    def domain_floor(self):
        return -np.inf


@dataclass(frozen=True)
class Entropic:
    """phi(t) = (exp(gamma t) - 1) / gamma for gamma > 0."""

    gamma: float

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")

    def values(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.expm1(self.gamma * t) / self.gamma

    def right_slopes(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.exp(self.gamma * t)

    @property
    def domain_floor(self):
        return -np.inf


@dataclass(frozen=True)
class MeanVariance:
    """phi(t) = t + c t^2 for c > 0.

    The function is nondecreasing only for t >= -1/(2c); evaluation below
    that floor raises DomainError.  Callers working with losses bounded by
    M either keep M <= 1/(2c) or accept anchors restricted to the region
    where every argument stays valid.
    """

    c: float

    def __post_init__(self):
        if not np.isfinite(self.c) or self.c <= 0.0:
            raise ValueError(f"c must be positive, got {self.c!r}")

    def values(self, t):
        t = np.asarray(t, dtype=np.float64)
        floor = self.domain_floor
        if np.any(t < floor - _DOMAIN_SLACK * max(1.0, abs(floor))):
            raise DomainError(
                f"mean-variance disutility with c={self.c} is only "
                f"nondecreasing for t >= {floor}; got t as low as {t.min()}"
            )
        return t + self.c * t * t

    def right_slopes(self, t):
        t = np.asarray(t, dtype=np.float64)
        floor = self.domain_floor
        if np.any(t < floor - _DOMAIN_SLACK * max(1.0, abs(floor))):
            raise DomainError(
                f"mean-variance disutility with c={self.c} is only "
                f"nondecreasing for t >= {floor}; got t as low as {t.min()}"
            )
        return 1.0 + 2.0 * self.c * t

    @property
    def domain_floor(self):
        return -1.0 / (2.0 * self.c)


@dataclass(frozen=True)
class CVaR:
    """phi(t) = max(t, 0) / alpha for alpha in (0, 1]."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")

    def values(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.maximum(t, 0.0) / self.alpha

    def right_slopes(self, t):
        # Right derivative at the kink t = 0 is 1/alpha.
        t = np.asarray(t, dtype=np.float64)
        return np.where(t >= 0.0, 1.0 / self.alpha, 0.0)

    @property
    def domain_floor(self):
        return -np.inf


@dataclass(frozen=True)
class SoftCVaR:
    """phi(t) = gamma1 max(t, 0) - gamma2 max(-t, 0), 0 <= gamma2 < 1 < gamma1."""

    gamma1: float
    gamma2: float

    def __post_init__(self):
        if not np.isfinite(self.gamma1) or self.gamma1 <= 1.0:
            raise ValueError(f"gamma1 must exceed 1, got {self.gamma1!r}")
        if not 0.0 <= self.gamma2 < 1.0:
            raise ValueError(f"gamma2 must lie in [0, 1), got {self.gamma2!r}")

    def values(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t >= 0.0, self.gamma1 * t, self.gamma2 * t)

    def right_slopes(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t >= 0.0, self.gamma1, self.gamma2)

    @property
    def induced_alpha(self):
        """Quantile level at which this spec mimics CVaR."""
        return (1.0 - self.gamma2) / (self.gamma1 - self.gamma2)

    @property
    def domain_floor(self):
        return -np.inf


DisutilitySpec = Union[Identity, Entropic, MeanVariance, CVaR, SoftCVaR]

_BUILTIN_KINDS = (Identity, Entropic, MeanVariance, CVaR, SoftCVaR)


def phi_eval(spec, t):
    """Evaluate phi at a scalar t.

    Returns (value, right_subgradient).  At kinks the right derivative is
    reported, so CVaR at t = 0 yields 1/alpha.
    """
    t = float(t)
    value = float(spec.values(t))
    slope = float(spec.right_slopes(t))
    return value, slope


def lipschitz_on(spec, bound_m):
    """Lipschitz constant of phi on [-M, M].

    Equals the supremum of the right subgradient over the interval and is
    at least 1 for every valid spec.  MeanVariance requires M <= 1/(2c)
    so the whole interval stays inside the validity domain.
    """
    bound_m = float(bound_m)
    if not np.isfinite(bound_m) or bound_m <= 0.0:
        raise ValueError(f"bound_m must be positive, got {bound_m!r}")
    if isinstance(spec, Identity):
        return 1.0
    if isinstance(spec, Entropic):
        return float(np.exp(spec.gamma * bound_m))
    if isinstance(spec, MeanVariance):
        if -bound_m < spec.domain_floor - _DOMAIN_SLACK:
            raise DomainError(
                f"[-M, M] with M={bound_m} leaves the validity domain of "
                f"mean-variance with c={spec.c} (floor {spec.domain_floor})"
            )
        return 1.0 + 2.0 * spec.c * bound_m
    if isinstance(spec, CVaR):
        return 1.0 / spec.alpha
    if isinstance(spec, SoftCVaR):
        return spec.gamma1
    raise TypeError(f"unknown disutility spec {spec!r}")


def curvature_constant(spec, bound_m):
    """Largest C with phi(t) >= t + C t^2 for 0 < |t| <= M.

    Computed as inf of (phi(t) - t) / t^2 over the punctured interval.
    Closed forms exist for every built-in except Entropic, which falls
    back to grid minimization refined by golden-section steps.
    """
    bound_m = float(bound_m)
    if not np.isfinite(bound_m) or bound_m <= 0.0:
        raise ValueError(f"bound_m must be positive, got {bound_m!r}")
    if isinstance(spec, Identity):
        return 0.0
    if isinstance(spec, MeanVariance):
        if -bound_m < spec.domain_floor - _DOMAIN_SLACK:
            raise DomainError(
                f"[-M, M] with M={bound_m} leaves the validity domain of "
                f"mean-variance with c={spec.c} (floor {spec.domain_floor})"
            )
        return spec.c
    if isinstance(spec, CVaR):
        abar = 1.0 - spec.alpha
        return min(1.0, abar / spec.alpha) / bound_m
    if isinstance(spec, SoftCVaR):
        return min(spec.gamma1 - 1.0, 1.0 - spec.gamma2) / bound_m
    return _curvature_numeric(spec, bound_m)


def _curvature_numeric(spec, bound_m):
    """Grid minimization of (phi(t) - t) / t^2 on 0 < |t| <= M.

    A 10,001-point log-spaced grid on (0, M] is mirrored to negatives,
    then the neighborhood of the grid argmin is tightened with three
    golden-section steps.
    """

    def ratio(t):
        t = np.asarray(t, dtype=np.float64)
        return (spec.values(t) - t) / (t * t)

    half = np.geomspace(1e-9 * bound_m, bound_m, 10001)
    grid = np.concatenate([-half[::-1], half])
    vals = ratio(grid)
    idx = int(np.argmin(vals))
    best = float(vals[idx])

    # Bracket inside the same sign region; the ratio is undefined at 0.
    lo = grid[idx - 1] if idx > 0 and np.sign(grid[idx - 1]) == np.sign(grid[idx]) else grid[idx]
    hi = grid[idx + 1] if idx + 1 < grid.size and np.sign(grid[idx + 1]) == np.sign(grid[idx]) else grid[idx]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    for _ in range(3):
        x1 = b - invphi * (b - a)
        x2 = a + invphi * (b - a)
        f1, f2 = float(ratio(x1)), float(ratio(x2))
        best = min(best, f1, f2)
        if f1 <= f2:
            b = x2
        else:
            a = x1
    return best


@dataclass(frozen=True)
class DisutilityVerdict:
    """Result of checking tabulated values against the disutility axioms.

    ``failures`` lists the violated axioms in canonical order:
    "phi(0) = 0", "1 in subgradient at 0", "nondecreasing", "convex".
    """

    ok: bool
    failures: tuple


def validate_tabulated(ts, phis, tol=1e-9):
    """Check tabulated (t, phi(t)) pairs against the disutility axioms.

    The grid must be symmetric about 0 and contain 0.  The subgradient
    condition 1 in d(phi)(0) is checked through its equivalent global
    form phi(t) >= t; convexity through nondecreasing secant slopes.
    """
    ts = np.asarray(ts, dtype=np.float64)
    phis = np.asarray(phis, dtype=np.float64)
    if ts.shape != phis.shape or ts.ndim != 1 or ts.size < 3:
        raise ValueError("need matching 1-D arrays with at least 3 points")
    order = np.argsort(ts)
    ts, phis = ts[order], phis[order]
    scale = max(1.0, float(np.abs(ts).max()))
    if not np.allclose(ts + ts[::-1], 0.0, atol=1e-12 * scale):
        raise ValueError("grid must be symmetric about 0")
    zero_idx = np.argmin(np.abs(ts))
    if abs(ts[zero_idx]) > 1e-12 * scale:
        raise ValueError("grid must contain 0")

    failures = []
    if abs(phis[zero_idx]) > tol:
        failures.append("phi(0) = 0")
    if np.any(phis < ts - tol):
        failures.append("1 in subgradient at 0")
    if np.any(np.diff(phis) < -tol):
        failures.append("nondecreasing")
    slopes = np.diff(phis) / np.diff(ts)
    if np.any(np.diff(slopes) < -tol):
        failures.append("convex")
    return DisutilityVerdict(ok=not failures, failures=tuple(failures))


def parse_phi(text):
    """Parse a spec string.

    Grammar: ``identity`` | ``entropic:GAMMA`` | ``meanvar:C`` |
    ``cvar:ALPHA`` | ``softcvar:GAMMA1,GAMMA2``.
    """
    if not isinstance(text, str):
        raise SpecStringError(f"spec must be a string, got {type(text).__name__}")
    head, sep, tail = text.strip().partition(":")
    head = head.lower()
    try:
        if head == "identity":
            if sep:
                raise SpecStringError("identity takes no parameters")
            return Identity()
        if head == "entropic":
            return Entropic(gamma=_parse_number(tail, "entropic"))
        if head == "meanvar":
            return MeanVariance(c=_parse_number(tail, "meanvar"))
        if head == "cvar":
            return CVaR(alpha=_parse_number(tail, "cvar"))
        if head == "softcvar":
            parts = tail.split(",")
            if len(parts) != 2:
                raise SpecStringError(
                    f"softcvar takes two comma-separated parameters, got {tail!r}"
                )
            return SoftCVaR(
                gamma1=_parse_number(parts[0], "softcvar"),
                gamma2=_parse_number(parts[1], "softcvar"),
            )
    except ValueError as exc:
        if isinstance(exc, SpecStringError):
            raise
        raise SpecStringError(f"invalid parameter in {text!r}: {exc}") from exc
    raise SpecStringError(
        f"unknown disutility {head!r}; expected identity, entropic:G, "
        f"meanvar:C, cvar:A, or softcvar:G1,G2"
    )


def format_phi(spec):
    """Canonical spec string for a built-in spec; inverse of parse_phi."""
    if isinstance(spec, Identity):
        return "identity"
    if isinstance(spec, Entropic):
        return f"entropic:{spec.gamma:g}"
    if isinstance(spec, MeanVariance):
        return f"meanvar:{spec.c:g}"
    if isinstance(spec, CVaR):
        return f"cvar:{spec.alpha:g}"
    if isinstance(spec, SoftCVaR):
        return f"softcvar:{spec.gamma1:g},{spec.gamma2:g}"
    raise TypeError(f"unknown disutility spec {spec!r}")


def _parse_number(token, kind):
    token = token.strip()
    if not token:
        raise SpecStringError(f"{kind} requires a numeric parameter")
    try:
        return float(token)
    except ValueError:
        raise SpecStringError(f"{kind}: not a number: {token!r}") from None
