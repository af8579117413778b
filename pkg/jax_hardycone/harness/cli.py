import argparse
import logging
import math
import sys
from contextlib import contextmanager
from typing import IO, Iterator, Optional, Sequence

import numpy as np

# local imports
from ..barriers import (
    RELATIVE_TOL,
    certify_exterior_barrier,
    certify_tube_supersolution,
    half_ball_samples,
    richardson_check,
    verify_tube_residual,
)
from ..dataclass import (
    BarrierSpec,
    CapSpec,
    CircleWeight,
    HardyProblem,
    PotentialField,
    TubeBarrierSpec,
    TubeSpec,
)
from ..errors import (
    CoercivityError,
    ConfigError,
    DomainError,
    HardyConeError,
    PreconditionError,
)
from ..solver.radial import (
    NODES_PER_DECADE,
    discrete_hardy_minimum,
    log_grid,
    shell_table,
)
from ..spectral import (
    cap_eigenvalue,
    cap_lambda1,
    constant_weight,
    exponent_report,
    hardy_constant,
)
from .config import load_config, resolve_sweep_config
from .output import (
    plot_curve,
    plot_dichotomy,
    write_json,
    write_rows,
    write_sweep_csv,
)
from .sweep import dichotomy_boundary, run_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_REGIME = 2
EXIT_USAGE = 64
EXIT_IO = 74

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
CERTIFY_TARGETS = (
    "exterior-barrier",
    "tube-supersolution",
    "tube-residual",
    "flat-barrier",
)
HARDY_WEIGHTS = {
    "inverse-square": "inverse_square",
    "log-improved": "log_improved",
    "unit": "unit",
}


class UsageParser(argparse.ArgumentParser):
    """
    ArgumentParser whose usage errors exit with EX_USAGE
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextmanager
def open_output(path: Optional[str]) -> Iterator[IO[str]]:
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", newline="") as stream:
        yield stream


def _cap(args) -> CapSpec:
    if args.cap == "hemisphere":
        return CapSpec.hemisphere(args.N)
    if args.cap == "sphere":
        return CapSpec.sphere(args.N)
    if args.delta is None:
        raise ConfigError("--cap cap needs --delta")
    return CapSpec(args.N, args.delta)


def _tube(args) -> TubeSpec:
    q = CircleWeight(args.q_level, args.q_amplitude, args.q_order)
    return TubeSpec(args.N, args.k, args.circle_radius, args.beta, q)


def cmd_exponents(args) -> int:
    cap = _cap(args)
    report = exponent_report(HardyProblem(args.N, args.c, args.s, cap))
    rows = (
        ("lambda1", report.lambda1),
        ("mu", report.mu),
        ("alpha_minus", report.alpha_minus),
        ("p_critical", report.p_critical),
        ("q_critical", report.q_critical),
    )
    for name, value in rows:
        print(f"{name:<12s} {value:.17g}")
    with open_output(args.out) as stream:
        write_json(report, stream)
    return EXIT_OK


def cmd_eigen_curve(args) -> int:
    if not 0.0 < args.theta_min <= args.theta_max < math.pi:
        raise ConfigError("need 0 < theta-min <= theta-max < pi")
    if args.weight_value < 0.0:
        raise ConfigError(
            f"--weight-value must be non-negative, got {args.weight_value}"
        )
    weight = None if args.weight_value == 0.0 else constant_weight(args.weight_value)
    thetas = np.linspace(args.theta_min, args.theta_max, args.count)
    values = [cap_eigenvalue(args.N, theta, weight) for theta in thetas]
    with open_output(args.out) as stream:
        write_rows(stream, ("theta0", "lambda1"), zip(thetas.tolist(), values))
    if args.plot:
        mark = None
        if args.theta_min <= 0.5 * math.pi <= args.theta_max:
            mark = (0.5 * math.pi, cap_eigenvalue(args.N, 0.5 * math.pi, weight))
        plot_curve(args.plot, thetas, values, "theta0", "lambda1", mark)
    return EXIT_OK


def cmd_certify(args) -> int:
    tolerance = RELATIVE_TOL if args.tolerance is None else args.tolerance
    if args.target == "exterior-barrier":
        report = certify_exterior_barrier(args.N, args.c, args.p, tolerance=tolerance)
    elif args.target == "tube-supersolution":
        report = certify_tube_supersolution(_tube(args), args.p)
    elif args.target == "tube-residual":
        report = verify_tube_residual(TubeBarrierSpec(_tube(args), args.a))
    else:
        spec = BarrierSpec(args.N, args.c, args.a, args.K)
        report = richardson_check(spec, half_ball_samples(args.N), tolerance=tolerance)
    logger.info(f"{args.target}: {report.verdict}")
    with open_output(args.out) as stream:
        write_json(report, stream)
    return EXIT_OK if report.passed else EXIT_FAIL


SWEEP_FLAGS = (
    "N",
    "mode",
    "cap_delta",
    "tube_k",
    "circle_radius",
    "beta",
    "q_level",
    "q_amplitude",
    "q_order",
    "c_range",
    "p_range",
    "certify",
    "zeta0",
    "nodes_per_decade",
    "tolerance",
    "out",
    "plot",
)


def cmd_sweep(args) -> int:
    file_values = load_config(args.config) if args.config else None
    overrides = {name: getattr(args, name) for name in SWEEP_FLAGS}
    config = resolve_sweep_config(file_values, overrides)
    cells = run_sweep(config)
    with open_output(config.out) as stream:
        write_sweep_csv(stream, cells, config)
    if config.plot:
        plot_dichotomy(config.plot, cells, config)
    for c, (last_pass, first_fail) in sorted(dichotomy_boundary(cells).items()):
        logger.info(
            f"c={c:.6g}: certifier passes up to p={last_pass:.6g}, "
            f"fails from p={first_fail:.6g}"
        )
    return EXIT_OK


def cmd_hardy_check(args) -> int:
    N = args.N
    if args.tube_k is not None:
        # normal reduction of a k-dimensional submanifold
        N = args.N - args.tube_k
        cap = CapSpec.sphere(N)
    else:
        cap = _cap(args)
    lambda1 = cap_lambda1(cap)
    mu = hardy_constant(N, lambda1)
    weight = HARDY_WEIGHTS[args.weight]
    shells = [(r_min, args.r_max) for r_min in args.shells]
    if weight == "inverse_square":
        potential = None
    else:
        potential = PotentialField.inverse_square(mu)
    rows = shell_table(N, lambda1, shells, potential, weight, args.nodes_per_decade)

    header = ("r_min", "r_max", "minimum", "target")
    table = []
    for r_min, r_max, minimum in rows:
        if weight == "inverse_square":
            nodes = log_grid(r_min, r_max, args.nodes_per_decade)
            target = discrete_hardy_minimum(N, lambda1, nodes)
        else:
            target = 0.0
        table.append((r_min, r_max, minimum, target))
    print(f"mu = {mu:.17g} (N={N}, lambda1={lambda1:.17g}, weight {args.weight})")
    with open_output(args.out) as stream:
        write_rows(stream, header, table)
    if weight != "inverse_square" and any(row[2] <= 0.0 for row in table):
        logger.error("improved Hardy form is not positive on every shell")
        return EXIT_FAIL
    return EXIT_OK


def _add_cap_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--N", type=int, required=True, help="ambient dimension")
    parser.add_argument(
        "--cap", choices=("hemisphere", "sphere", "cap"), default="hemisphere"
    )
    parser.add_argument("--delta", type=float, help="cap {sigma.E1 > delta}")


def _add_tube_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--k", type=int, default=1, help="submanifold dimension")
    parser.add_argument("--circle-radius", type=float, default=1.0)
    parser.add_argument("--beta", type=float, default=0.1, help="tube radius")
    parser.add_argument("--q-level", type=float, default=1.0)
    parser.add_argument("--q-amplitude", type=float, default=0.0)
    parser.add_argument("--q-order", type=float, default=2.0)


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(
        prog="jax_hardycone",
        description="Hardy constants, critical exponents and barrier certificates",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    commands = parser.add_subparsers(dest="command", required=True)

    exponents = commands.add_parser("exponents", help="exponent report of a cone")
    _add_cap_flags(exponents)
    exponents.add_argument("--c", type=float, required=True)
    exponents.add_argument("--s", type=float, default=0.0)
    exponents.add_argument("--out", help="JSON path (stdout by default)")
    exponents.set_defaults(handler=cmd_exponents)

    curve = commands.add_parser("eigen-curve", help="lambda1 of caps against theta0")
    curve.add_argument("--N", type=int, required=True)
    curve.add_argument("--theta-min", type=float, default=math.pi / 4.0)
    curve.add_argument("--theta-max", type=float, default=3.0 * math.pi / 4.0)
    curve.add_argument("--count", type=int, default=17)
    curve.add_argument("--weight-value", type=float, default=0.0)
    curve.add_argument("--out", help="CSV path (stdout by default)")
    curve.add_argument("--plot", help="SVG path")
    curve.set_defaults(handler=cmd_eigen_curve)

    certify = commands.add_parser("certify", help="run a barrier certifier")
    certify.add_argument("target", choices=CERTIFY_TARGETS)
    certify.add_argument("--N", type=int, required=True)
    certify.add_argument("--c", type=float, default=0.0)
    certify.add_argument("--p", type=float, default=2.0)
    certify.add_argument("--a", type=float, default=0.0)
    certify.add_argument("--K", type=float, default=0.0)
    certify.add_argument("--tolerance", type=float)
    _add_tube_flags(certify)
    certify.add_argument("--out", help="JSON path (stdout by default)")
    certify.set_defaults(handler=cmd_certify)

    sweep = commands.add_parser("sweep", help="dichotomy sweep over (c, p)")
    sweep.add_argument("--config", help="TOML or YAML sweep settings")
    sweep.add_argument("--N", type=int)
    sweep.add_argument("--mode", choices=("cone", "tube"))
    sweep.add_argument("--cap-delta", type=float)
    sweep.add_argument("--tube-k", type=int)
    sweep.add_argument("--circle-radius", type=float)
    sweep.add_argument("--beta", type=float)
    sweep.add_argument("--q-level", type=float)
    sweep.add_argument("--q-amplitude", type=float)
    sweep.add_argument("--q-order", type=float)
    sweep.add_argument(
        "--c-range", type=float, nargs=3, metavar=("MIN", "MAX", "COUNT")
    )
    sweep.add_argument(
        "--p-range", type=float, nargs=3, metavar=("MIN", "MAX", "COUNT")
    )
    sweep.add_argument("--certify", action=argparse.BooleanOptionalAction)
    sweep.add_argument("--zeta0", action=argparse.BooleanOptionalAction)
    sweep.add_argument("--nodes-per-decade", type=int)
    sweep.add_argument("--tolerance", type=float)
    sweep.add_argument("--out", help="CSV path (stdout by default)")
    sweep.add_argument("--plot", help="SVG path")
    sweep.set_defaults(handler=cmd_sweep)

    hardy = commands.add_parser("hardy-check", help="discrete Hardy minima on shells")
    _add_cap_flags(hardy)
    hardy.add_argument(
        "--weight", choices=tuple(HARDY_WEIGHTS), default="inverse-square"
    )
    hardy.add_argument("--tube-k", type=int, help="reduce to the normal dimension N-k")
    hardy.add_argument(
        "--shells", type=float, nargs="+", default=(2.0 ** -4, 2.0 ** -8, 2.0 ** -12)
    )
    hardy.add_argument("--r-max", type=float, default=0.5)
    hardy.add_argument("--nodes-per-decade", type=int, default=NODES_PER_DECADE)
    hardy.add_argument("--out", help="CSV path (stdout by default)")
    hardy.set_defaults(handler=cmd_hardy_check)
    return parser


def configure_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: Sequence[str] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args)
    try:
        return args.handler(args)
    except ConfigError as err:
        logger.error(str(err))
        return EXIT_USAGE
    except (DomainError, PreconditionError, CoercivityError) as err:
        logger.error(str(err))
        return EXIT_REGIME
    except HardyConeError as err:
        logger.error(str(err))
        return EXIT_FAIL
    except OSError as err:
        logger.error(f"I/O error: {err}")
        return EXIT_IO
