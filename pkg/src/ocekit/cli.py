"""Command-line interface.

Subcommands: eval, influence, bounds, bracket, train, stylized.
Exit codes: 0 on success, 1 for domain or validation errors, 2 for I/O
errors (including malformed CSV input).
"""

import argparse
import json
import sys

import numpy as np

from . import io as ioformats
from .bounds import (
    BoundInputs,
    FiniteClassLosses,
    bound_report,
    prop4_bracket,
    rademacher_mc,
)
from .disutility import parse_phi
from .errors import CsvFormatError, DomainError, SpecStringError, TrainingDivergedError
from .influence import (
    ContaminationQuery,
    DistributionSummary,
    closed_form_influence,
    empirical_influence,
    influence_bound,
)
from .risk import LossVector, inverted_oce_empirical, oce_empirical
from .training import SyntheticTask, TrainConfig, make_objective, stylized_experiment, train

_INFLUENCE_HEADER = ("empirical", "closed_form", "upper_bound")
_BOUNDS_HEADER = (
    "uniform_conv",
    "excess_oce",
    "naive_expected_loss",
    "eom_expected_loss",
    "eim_expected_loss",
    "rad_estimate",
    "mc_std_error",
)


def _formatter(prog):
    # Pinned width keeps --help output stable across terminals.
    return argparse.HelpFormatter(prog, width=80)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ocekit",
        description="Optimized certainty equivalents: risk evaluation, "
        "influence diagnostics, finite-class bounds, and risk-sensitive training.",
        formatter_class=_formatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser(
        "eval",
        help="evaluate oce and inverted oce of a loss sample",
        formatter_class=_formatter,
    )
    p_eval.add_argument("--phi", required=True, help="disutility spec, e.g. cvar:0.25")
    p_eval.add_argument("--losses", required=True, help="CSV file, one loss per line")
    p_eval.add_argument(
        "--bound-m",
        type=float,
        default=None,
        help="upper bound on losses (default: max observed value)",
    )
    p_eval.set_defaults(handler=_cmd_eval)

    p_infl = sub.add_parser(
        "influence",
        help="contamination influence of a loss point on the inverted oce",
        formatter_class=_formatter,
    )
    p_infl.add_argument("--phi", required=True, help="disutility spec")
    p_infl.add_argument("--losses", required=True, help="CSV file, one loss per line")
    p_infl.add_argument("--z-loss", type=float, required=True, help="contamination point")
    p_infl.add_argument(
        "--epsilon", type=float, default=1e-6, help="contamination weight (default 1e-6)"
    )
    p_infl.add_argument(
        "--bound-m",
        type=float,
        default=None,
        help="upper bound on losses (default: max observed value)",
    )
    p_infl.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p_infl.set_defaults(handler=_cmd_influence)

    p_bounds = sub.add_parser(
        "bounds",
        help="finite-class generalization bounds from a loss matrix",
        formatter_class=_formatter,
    )
    p_bounds.add_argument(
        "--loss-matrix", required=True, help="CSV file, one hypothesis row per line"
    )
    p_bounds.add_argument("--lip", type=float, required=True, help="Lipschitz constant of phi")
    p_bounds.add_argument("--delta", type=float, default=0.05, help="failure probability")
    p_bounds.add_argument(
        "--bound-m",
        type=float,
        default=None,
        help="upper bound on losses (default: max observed entry)",
    )
    p_bounds.add_argument(
        "--draws", type=int, default=10000, help="Monte Carlo sign draws (default 10000)"
    )
    p_bounds.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    p_bounds.add_argument(
        "--r-avg",
        type=float,
        default=None,
        help="empirical risk of the selected hypothesis "
        "(default: smallest row mean)",
    )
    p_bounds.add_argument(
        "--sigma-avg",
        type=float,
        default=None,
        help="loss deviation of the mean-minimizing row (default: derived)",
    )
    p_bounds.add_argument(
        "--sigma-eim",
        type=float,
        default=None,
        help="loss deviation of the inverted-risk minimizer (default: derived)",
    )
    p_bounds.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p_bounds.set_defaults(handler=_cmd_bounds)

    p_bracket = sub.add_parser(
        "bracket",
        help="selection-error bracket for the stylized two-hypothesis setup",
        formatter_class=_formatter,
    )
    p_bracket.add_argument("--n", type=int, required=True, help="sample size")
    p_bracket.add_argument("--epsilon", type=float, required=True, help="mean gap")
    p_bracket.add_argument("--alpha", type=float, required=True, help="CVaR level")
    p_bracket.set_defaults(handler=_cmd_bracket)

    p_train = sub.add_parser(
        "train",
        help="train the linear model described by a JSON config",
        formatter_class=_formatter,
    )
    p_train.add_argument("--config", required=True, help="JSON file with task and config")
    p_train.add_argument("--out", required=True, help="trajectory CSV output path")
    p_train.set_defaults(handler=_cmd_train)

    p_sty = sub.add_parser(
        "stylized",
        help="Monte Carlo frequency of the risky hypothesis winning by CVaR",
        formatter_class=_formatter,
    )
    p_sty.add_argument("--n", type=int, required=True, help="sample size per trial")
    p_sty.add_argument("--epsilon", type=float, required=True, help="mean gap")
    p_sty.add_argument("--alpha", type=float, required=True, help="CVaR level")
    p_sty.add_argument("--trials", type=int, required=True, help="number of trials")
    p_sty.add_argument("--seed", type=int, default=0, help="root seed")
    p_sty.set_defaults(handler=_cmd_stylized)

    return parser


def _fmt(value):
    return f"{value:.12g}"


def _parse_phi_flag(text):
    try:
        return parse_phi(text)
    except SpecStringError as exc:
        raise SpecStringError(f"--phi: {exc}") from None


def _cmd_eval(args):
    spec = _parse_phi_flag(args.phi)
    values = ioformats.read_losses_csv(args.losses)
    losses = LossVector(values, args.bound_m)
    oce = oce_empirical(losses, spec)
    roce = inverted_oce_empirical(losses, spec)
    print(f"oce={_fmt(oce.value)} lambda_star={_fmt(oce.lambda_star)} roce={_fmt(roce.value)}")
    return 0


def _cmd_influence(args):
    spec = _parse_phi_flag(args.phi)
    values = ioformats.read_losses_csv(args.losses)
    losses = LossVector(values, args.bound_m)
    query = ContaminationQuery(z_loss=args.z_loss, epsilon=args.epsilon)
    empirical = empirical_influence(losses, spec, query)
    summary = DistributionSummary.from_losses(losses, spec)
    try:
        closed = closed_form_influence(spec, summary, args.z_loss)
    except (ValueError, DomainError):
        closed = None
    try:
        bound = influence_bound(spec, summary)
    except ValueError:
        bound = None
    text = ioformats.format_row_csv(_INFLUENCE_HEADER, (empirical, closed, bound))
    _write_text(text, args.out)
    return 0


def _cmd_bounds(args):
    matrix = ioformats.read_loss_matrix_csv(args.loss_matrix)
    losses = FiniteClassLosses(matrix, args.bound_m)
    rad = rademacher_mc(losses, args.draws, args.seed)
    best = int(np.argmin(matrix.mean(axis=1)))
    r_avg = args.r_avg if args.r_avg is not None else float(matrix[best].mean())
    sigma_avg = args.sigma_avg if args.sigma_avg is not None else float(matrix[best].std())
    sigma_eim = args.sigma_eim if args.sigma_eim is not None else float(matrix[best].std())
    inputs = BoundInputs(
        lipschitz=args.lip,
        bound_m=losses.bound_m,
        n=losses.n,
        delta=args.delta,
        rad=rad.estimate,
        r_avg=r_avg,
        sigma_avg=sigma_avg,
        sigma_eim=sigma_eim,
    )
    report = bound_report(inputs)
    cells = (
        report.uniform_conv,
        report.excess_oce,
        report.naive_expected_loss,
        report.eom_expected_loss,
        report.eim_expected_loss,
        rad.estimate,
        rad.mc_std_error,
    )
    _write_text(ioformats.format_row_csv(_BOUNDS_HEADER, cells), args.out)
    return 0


def _cmd_bracket(args):
    result = prop4_bracket(args.n, args.epsilon, args.alpha)
    print(f"lower={_fmt(result.lower)} exact={_fmt(result.exact)} upper={_fmt(result.upper)}")
    return 0


def _cmd_train(args):
    with open(args.config, "r", encoding="utf-8") as handle:
        document = json.load(handle)
    task = _build_task(document)
    config = _build_config(document)
    # Fail before training if the output path cannot be written.
    with open(args.out, "w", encoding="utf-8"):
        pass
    trajectory = train(task, config)
    ioformats.write_trajectory_csv(trajectory, args.out)
    final = trajectory.rows[-1]
    print(
        f"wrote {args.out}: epochs={config.epochs} "
        f"final_objective={_fmt(final[-1])} final_test_cvar={_fmt(final[4])}"
    )
    return 0


def _cmd_stylized(args):
    value = stylized_experiment(args.n, args.epsilon, args.alpha, args.trials, args.seed)
    print(f"empirical_delta={_fmt(value)}")
    return 0


def _build_task(document):
    try:
        fields = document["task"]
    except KeyError:
        raise ValueError("config JSON must contain a 'task' object") from None
    try:
        return SyntheticTask(**fields)
    except TypeError as exc:
        raise ValueError(f"task config: {exc}") from None


def _build_config(document):
    try:
        fields = dict(document["config"])
    except KeyError:
        raise ValueError("config JSON must contain a 'config' object") from None
    objective_doc = fields.pop("objective", None)
    if not isinstance(objective_doc, dict) or "kind" not in objective_doc:
        raise ValueError("config.objective must be an object with a 'kind' field")
    objective = make_objective(**objective_doc)
    try:
        return TrainConfig(objective=objective, **fields)
    except TypeError as exc:
        raise ValueError(f"train config: {exc}") from None


def _write_text(text, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except CsvFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
