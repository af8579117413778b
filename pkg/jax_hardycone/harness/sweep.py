import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Sequence, Tuple

import numpy as np

# local imports
from ..barriers import certify_exterior_barrier, certify_tube_supersolution
from ..dataclass import (
    CapSpec,
    CircleWeight,
    ExponentReport,
    HardyProblem,
    SweepCell,
    SweepConfig,
    TubeSpec,
)
from ..errors import HardyConeError, PreconditionError
from ..solver.zeta0 import diverges, zeta0_growth
from ..spectral import exponent_report
from .config import max_workers

logger = logging.getLogger(__name__)


def axis_values(value_range: Tuple[float, float, int]) -> np.ndarray:
    lo, hi, count = value_range
    return np.linspace(lo, hi, count)


def sweep_cap(config: SweepConfig) -> CapSpec:
    if config.mode == "tube":
        # normal reduction: the whole sphere in dimension N - k
        return CapSpec.sphere(config.N - config.tube_k)
    return CapSpec(config.N, config.cap_delta)


def sweep_tube(config: SweepConfig) -> TubeSpec:
    q = CircleWeight(config.q_level, config.q_amplitude, config.q_order)
    return TubeSpec(config.N, config.tube_k, config.circle_radius, config.beta, q)


def _skipped(err: Exception) -> str:
    reason = str(err).splitlines()[0] if str(err) else type(err).__name__
    return f"skipped:{type(err).__name__}: {reason}"


def _certify(config: SweepConfig, c: float, p: float) -> Tuple[str, str, float]:
    """
    Run the certifier matching the sweep mode
    returns: (analytic verdict, numeric verdict, max residual)
    """
    if not config.certify:
        return "skipped:disabled", "skipped:disabled", math.nan
    if config.mode == "tube":
        report = certify_tube_supersolution(sweep_tube(config), p)
    else:
        cap = sweep_cap(config)
        if not cap.is_hemisphere:
            reason = "skipped:exterior barrier needs the hemisphere"
            return reason, reason, math.nan
        if c <= config.N - 1:
            reason = f"skipped:exterior barrier needs c > {config.N - 1}"
            return reason, reason, math.nan
        report = certify_exterior_barrier(config.N, c, p, tolerance=config.tolerance)
    verdict = lambda ok: "pass" if ok else "fail"
    return (
        verdict(report.details["analytic_pass"]),
        verdict(report.details["numeric_pass"]),
        float(report.max_relative_mismatch),
    )


def _zeta0_gamma(config: SweepConfig, c: float, report: ExponentReport) -> float:
    N = config.N - config.tube_k if config.mode == "tube" else config.N
    rows = zeta0_growth(
        N, min(c, report.mu), report.lambda1, nodes_per_decade=config.nodes_per_decade
    )
    return rows[-1][1]


def sweep_cell(
    config: SweepConfig, c: float, p: float, report, gamma
) -> SweepCell:
    """
    Evaluate one (c, p) cell; report and gamma are the per-c exponent report and
    fitted zeta_0 growth, or the exception raised while computing them
    """
    if isinstance(report, Exception):
        reason = _skipped(report)
        logger.warning(f"cell c={c:.6g} p={p:.6g}: {reason}")
        nan = math.nan
        return SweepCell(c, p, nan, nan, nan, nan, reason, reason, reason, nan)
    try:
        analytic, numeric, residual = _certify(config, c, p)
    except HardyConeError as err:
        analytic = numeric = _skipped(err)
        residual = math.nan
        logger.warning(f"cell c={c:.6g} p={p:.6g}: certifier {analytic}")
    if not config.zeta0:
        zeta0 = "skipped:disabled"
    elif isinstance(gamma, Exception):
        zeta0 = _skipped(gamma)
    else:
        N = config.N - config.tube_k if config.mode == "tube" else config.N
        zeta0 = "divergent" if diverges(N, gamma, p) else "finite"
    return SweepCell(
        c,
        p,
        report.lambda1,
        report.mu,
        report.alpha_minus,
        report.p_critical,
        analytic,
        numeric,
        zeta0,
        residual,
    )


def _row_inputs(config: SweepConfig, c: float):
    cap = sweep_cap(config)
    try:
        report = exponent_report(HardyProblem(cap.N, c, cap=cap))
    except HardyConeError as err:
        return err, err
    if not config.zeta0:
        return report, None
    try:
        if c <= report.lambda1:
            raise PreconditionError(
                f"zeta_0 criterion needs c > lambda1={report.lambda1}, got c={c}"
            )
        gamma = _zeta0_gamma(config, c, report)
    except HardyConeError as err:
        logger.warning(f"row c={c:.6g}: zeta_0 {_skipped(err)}")
        gamma = err
    return report, gamma


def sweep_axes(config: SweepConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    c and p values of the sweep; tube mode has the single row c = m^2 max q
    """
    ps = axis_values(config.p_range)
    if config.mode == "tube":
        tube = sweep_tube(config)
        m = tube.normal_order
        c = m * m * tube.q.maximum
        logger.info(f"tube mode: c-range ignored, single row c={c:.6g}")
        return np.array([c]), ps
    return axis_values(config.c_range), ps


def run_sweep(config: SweepConfig, workers: int = None) -> Tuple[SweepCell, ...]:
    """
    Evaluate every (c, p) cell with a bounded thread pool; per-c quantities are
    computed once per row and the cells come back sorted by (c, p)
    """
    cs, ps = sweep_axes(config)
    workers = max_workers() if workers is None else max(1, int(workers))
    logger.info(
        f"sweep N={config.N} {config.mode}: {len(cs)} x {len(ps)} cells, "
        f"{workers} workers"
    )
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows: Dict[float, tuple] = dict(
            zip(cs.tolist(), pool.map(lambda c: _row_inputs(config, c), cs.tolist()))
        )
        futures = [
            pool.submit(sweep_cell, config, c, p, *rows[c])
            for c in cs.tolist()
            for p in ps.tolist()
        ]
        cells = [future.result() for future in futures]
    return tuple(sorted(cells, key=lambda cell: (cell.c, cell.p)))


def dichotomy_boundary(cells: Sequence[SweepCell]) -> Dict[float, Tuple[float, float]]:
    """
    For every c row, the last p where the analytic certifier passes and the first
    p where it fails (nan when absent)
    """
    rows: Dict[float, list] = {}
    for cell in cells:
        rows.setdefault(cell.c, []).append(cell)
    boundary = {}
    for c, row in rows.items():
        row = sorted(row, key=lambda cell: cell.p)
        passing = [cell.p for cell in row if cell.cert_analytic == "pass"]
        failing = [cell.p for cell in row if cell.cert_analytic == "fail"]
        boundary[c] = (
            max(passing) if passing else math.nan,
            min(failing) if failing else math.nan,
        )
    return boundary
