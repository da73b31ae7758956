"""Risk-sensitive training of a linear classifier on synthetic data.

The model is logistic regression with clipped sigmoid cross-entropy, so
per-sample losses live in [0, loss_clip_m] and every certainty-equivalent
machine from the rest of the package applies.  Training is plain
mini-batch subgradient descent; the descent direction for the
risk-shaped objectives comes from the envelope rule, which weights each
sample by the disutility's right slope at its distance from the optimal
anchor.

Objectives
----------
Erm            mean loss
Eom(phi)       optimized certainty equivalent of the batch losses
Eim(phi)       inverted optimized certainty equivalent
Svp(lam)       mean + lam * standard deviation

Determinism: the synthetic data stream and the training stream (init and
shuffling) are derived from their seeds through distinct tags, so equal
seed integers never alias the two streams.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .disutility import CVaR, DisutilitySpec, SoftCVaR, parse_phi
from .errors import TrainingDivergedError
from .risk import LossVector, inverted_oce_empirical, oce_empirical
from ._validation import check_index

_DATA_STREAM = 0
_TRAIN_STREAM = 1
_INIT_SCALE = 1.5
_SIGMA_FLOOR = 1e-8
_DEFAULT_EVAL_ALPHA = 0.2


@dataclass(frozen=True)
class SyntheticTask:
    """Two Gaussian clusters at +/- (separation/2) along a random direction.

    Labels are flipped independently with label_noise_rate after the
    features are generated, so the flipped points keep the geometry of
    their true class.  Regenerating with equal fields is bit-identical.
    """

    n_train: int
    n_test: int
    dimension: int
    class_separation: float
    label_noise_rate: float
    seed: int

    def __post_init__(self):
        check_index(self.n_train, "n_train")
        check_index(self.n_test, "n_test")
        check_index(self.dimension, "dimension")
        if self.class_separation < 0.0:
            raise ValueError("class_separation must be nonnegative")
        if not 0.0 <= self.label_noise_rate < 0.5:
            raise ValueError("label_noise_rate must lie in [0, 0.5)")


@dataclass(frozen=True)
class Dataset:
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray


def make_synthetic(task):
    """Generate the two-cluster dataset described by the task."""
    rng = np.random.default_rng((task.seed, _DATA_STREAM))
    d = task.dimension
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    total = task.n_train + task.n_test
    y_true = rng.integers(0, 2, size=total)
    offsets = ((2 * y_true - 1) * (task.class_separation / 2.0))[:, None]
    x = rng.normal(size=(total, d)) + offsets * direction
    flip = rng.random(total) < task.label_noise_rate
    y = np.where(flip, 1 - y_true, y_true)
    return Dataset(
        x_train=x[: task.n_train],
        y_train=y[: task.n_train],
        x_test=x[task.n_train :],
        y_test=y[task.n_train :],
    )


@dataclass(frozen=True)
class Erm:
    pass


@dataclass(frozen=True)
class Eom:
    phi: DisutilitySpec


@dataclass(frozen=True)
class Eim:
    phi: DisutilitySpec


@dataclass(frozen=True)
class Svp:
    penalty_lambda: float

    def __post_init__(self):
        if not np.isfinite(self.penalty_lambda) or self.penalty_lambda < 0.0:
            raise ValueError("penalty_lambda must be nonnegative")


Objective = Union[Erm, Eom, Eim, Svp]


@dataclass(frozen=True)
class TrainConfig:
    objective: Objective
    batch_size: int
    epochs: int
    learning_rate: float
    loss_clip_m: float = 20.0
    seed: int = 0

    def __post_init__(self):
        check_index(self.batch_size, "batch_size")
        if int(self.epochs) != self.epochs or self.epochs < 0:
            raise ValueError("epochs must be a nonnegative integer")
        if not np.isfinite(self.learning_rate) or self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if not np.isfinite(self.loss_clip_m) or self.loss_clip_m <= 0.0:
            raise ValueError("loss_clip_m must be positive")


TRAJECTORY_COLUMNS = (
    "epoch",
    "train_mean",
    "test_mean",
    "train_cvar",
    "test_cvar",
    "train_std",
    "objective_value",
)


@dataclass(frozen=True)
class Trajectory:
    """Per-epoch metrics; row 0 is the state at initialization."""

    rows: np.ndarray

    @property
    def column_names(self):
        return TRAJECTORY_COLUMNS


def clipped_cross_entropy(params, x, y, clip_m):
    """Per-sample clipped cross-entropy and its derivative in the logits.

    params holds the weight vector with the intercept as the last entry.
    Samples whose unclipped loss reaches clip_m sit on the flat branch
    and contribute zero gradient.
    """
    scores = x @ params[:-1] + params[-1]
    ce = np.logaddexp(0.0, scores) - y * scores
    clipped = ce >= clip_m
    losses = np.where(clipped, clip_m, ce)
    grad_logits = np.where(clipped, 0.0, expit(scores) - y)
    return losses, grad_logits


def _objective_value_weights(objective, losses, clip_m):
    """Objective value and per-sample envelope weights for given losses."""
    n = losses.size
    if isinstance(objective, Erm):
        return float(losses.mean()), np.full(n, 1.0 / n)
    if isinstance(objective, Eom):
        res = oce_empirical(LossVector(losses, clip_m), objective.phi)
        w = objective.phi.right_slopes(losses - res.lambda_star) / n
        return res.value, w
    if isinstance(objective, Eim):
        res = inverted_oce_empirical(LossVector(losses, clip_m), objective.phi)
        w = objective.phi.right_slopes(res.lambda_star - losses) / n
        return res.value, w
    if isinstance(objective, Svp):
        mean = losses.mean()
        sd = losses.std()
        value = float(mean + objective.penalty_lambda * sd)
        w = (1.0 + objective.penalty_lambda * (losses - mean) / max(sd, _SIGMA_FLOOR)) / n
        return value, w
    raise TypeError(f"unknown objective {objective!r}")


def batch_objective(params, x, y, config):
    """Objective value and subgradient in the parameters for one batch."""
    losses, grad_logits = clipped_cross_entropy(params, x, y, config.loss_clip_m)
    if not np.all(np.isfinite(losses)):
        raise TrainingDivergedError("per-sample losses became non-finite")
    value, weights = _objective_value_weights(config.objective, losses, config.loss_clip_m)
    x_aug = np.hstack([x, np.ones((x.shape[0], 1))])
    grad = x_aug.T @ (weights * grad_logits)
    return value, grad


def evaluation_alpha(objective):
    """CVaR level used for trajectory reporting.

    Taken from the objective's own disutility when it carries a quantile
    level; 0.2 otherwise.
    """
    if isinstance(objective, (Eom, Eim)):
        if isinstance(objective.phi, CVaR):
            return objective.phi.alpha
        if isinstance(objective.phi, SoftCVaR):
            return objective.phi.induced_alpha
    return _DEFAULT_EVAL_ALPHA


def train(task, config):
    """Train on the synthetic task; returns the per-epoch trajectory."""
    data = make_synthetic(task)
    _, trajectory = _fit_loop(
        data.x_train, data.y_train, data.x_test, data.y_test, config
    )
    return trajectory


def _fit_loop(x_train, y_train, x_eval, y_eval, config):
    n, d = x_train.shape
    rng = np.random.default_rng((config.seed, _TRAIN_STREAM))
    params = np.zeros(d + 1)
    params[:d] = rng.normal(size=d) * (_INIT_SCALE / np.sqrt(d))

    alpha = evaluation_alpha(config.objective)
    rows = np.empty((config.epochs + 1, len(TRAJECTORY_COLUMNS)))
    rows[0] = _evaluate_row(0, params, x_train, y_train, x_eval, y_eval, config, alpha)

    lr = config.learning_rate
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            value, grad = batch_objective(params, x_train[idx], y_train[idx], config)
            if not np.isfinite(value):
                raise TrainingDivergedError(
                    f"objective became non-finite in epoch {epoch}"
                )
            params -= lr * grad
        rows[epoch] = _evaluate_row(
            epoch, params, x_train, y_train, x_eval, y_eval, config, alpha
        )
    return params, Trajectory(rows=rows)


def _evaluate_row(epoch, params, x_train, y_train, x_eval, y_eval, config, alpha):
    train_losses, _ = clipped_cross_entropy(params, x_train, y_train, config.loss_clip_m)
    eval_losses, _ = clipped_cross_entropy(params, x_eval, y_eval, config.loss_clip_m)
    if not (np.all(np.isfinite(train_losses)) and np.all(np.isfinite(eval_losses))):
        raise TrainingDivergedError("per-sample losses became non-finite")
    value, _ = _objective_value_weights(config.objective, train_losses, config.loss_clip_m)
    spec = CVaR(alpha)
    train_cvar = oce_empirical(LossVector(train_losses, config.loss_clip_m), spec).value
    eval_cvar = oce_empirical(LossVector(eval_losses, config.loss_clip_m), spec).value
    return (
        float(epoch),
        float(train_losses.mean()),
        float(eval_losses.mean()),
        train_cvar,
        eval_cvar,
        float(train_losses.std()),
        value,
    )


def make_objective(kind, phi=None, penalty_lambda=0.5):
    """Build an Objective from plain values (spec strings allowed for phi)."""
    kind = str(kind).lower()
    if isinstance(phi, str):
        phi = parse_phi(phi)
    if kind == "erm":
        return Erm()
    if kind == "eom":
        if phi is None:
            raise ValueError("eom requires a disutility spec")
        return Eom(phi=phi)
    if kind == "eim":
        if phi is None:
            raise ValueError("eim requires a disutility spec")
        return Eim(phi=phi)
    if kind == "svp":
        return Svp(penalty_lambda=float(penalty_lambda))
    raise ValueError(f"unknown objective kind {kind!r}")


class RiskSensitiveClassifier(BaseEstimator, ClassifierMixin):
    """Binary linear classifier trained on a risk-shaped loss objective.

    Follows the scikit-learn estimator conventions: constructor arguments
    are stored verbatim, fit returns self and exposes coef_, intercept_,
    and the per-epoch trajectory_.

    Parameters
    ----------
    objective : one of "erm", "eom", "eim", "svp"
    phi : disutility spec string (for eom/eim), e.g. "cvar:0.2"
    penalty_lambda : deviation weight for the svp objective
    """

    def __init__(
        self,
        objective="erm",
        phi=None,
        penalty_lambda=0.5,
        batch_size=100,
        epochs=10,
        learning_rate=0.5,
        loss_clip_m=20.0,
        seed=0,
    ):
        self.objective = objective
        self.phi = phi
        self.penalty_lambda = penalty_lambda
        self.batch_size = batch_size
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.loss_clip_m = loss_clip_m
        self.seed = seed

    def fit(self, X, y, eval_set=None):
        """Fit on X, y in {0, 1}; eval_set=(X_e, y_e) feeds the test columns.

        Without an eval_set the trajectory's test columns report the
        training data.
        """
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValueError("X must be (n, d) and y must be (n,)")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("y must contain only 0 and 1")
        y = y.astype(np.int64)
        if eval_set is None:
            x_eval, y_eval = X, y
        else:
            x_eval = np.asarray(eval_set[0], dtype=np.float64)
            y_eval = np.asarray(eval_set[1]).astype(np.int64)
        config = TrainConfig(
            objective=make_objective(self.objective, self.phi, self.penalty_lambda),
            batch_size=self.batch_size,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            loss_clip_m=self.loss_clip_m,
            seed=self.seed,
        )
        params, trajectory = _fit_loop(X, y, x_eval, y_eval, config)
        self.coef_ = params[:-1].copy()
        self.intercept_ = float(params[-1])
        self.trajectory_ = trajectory
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        scores = self.decision_function(X)
        p1 = 1.0 / (1.0 + np.exp(-scores))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        return (self.decision_function(X) >= 0.0).astype(np.int64)

    def _check_fitted(self):
        if not hasattr(self, "coef_"):
            raise NotFittedError(
                "this RiskSensitiveClassifier instance is not fitted yet"
            )


def stylized_experiment(n, epsilon, alpha, trials, seed):
    """Frequency with which a risky hypothesis beats a safe one by CVaR.

    Each trial draws n Bernoulli losses with success probability
    (1 + epsilon)/2 for the risky hypothesis and compares its empirical
    CVaR(alpha) against that of the constant loss 1/2.  Per-trial
    generators are derived from (seed, trial), so the result does not
    depend on how trials are partitioned.
    """
    n = check_index(n, "n")
    trials = check_index(trials, "trials")
    p = (1.0 + float(epsilon)) / 2.0
    if not 0.0 < p < 1.0:
        raise ValueError(f"epsilon must keep (1 + epsilon)/2 inside (0, 1)")
    spec = CVaR(alpha)
    safe = oce_empirical(LossVector(np.full(n, 0.5), 1.0), spec).value
    hits = 0
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        losses = (rng.random(n) < p).astype(np.float64)
        risky = oce_empirical(LossVector(losses, 1.0), spec).value
        if risky <= safe:
            hits += 1
    return hits / trials
