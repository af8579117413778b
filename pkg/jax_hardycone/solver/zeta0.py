import logging
import math
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded

# local imports
from ..dataclass import CapSpec, Grid1D, Zeta0Verdict
from ..errors import FitError, PreconditionError
from ..spectral import REGIME_TOL, alpha_minus, cap_lambda1, hardy_constant
from .radial import _shift, log_grid

logger = logging.getLogger(__name__)

R_MAX = 0.5
R_MINS = (2.0 ** -8, 2.0 ** -12, 2.0 ** -16)
NODES_PER_DECADE = 1024
R_SQUARED_GATE = 0.999
DIVERGENCE_TOL = 1e-6


def zeta0_profile(
    N: int,
    c: float,
    lambda1: float,
    r_min: float,
    r_max: float = R_MAX,
    nodes_per_decade: int = NODES_PER_DECADE,
) -> Grid1D:
    """
    Separated solution of -Δζ - c|x|^-2 ζ = 1 on (0, r_max), ζ(r_max) = 0,
    truncated at r_min by the discrete condition that only the mode decaying
    toward 0 (plus the particular solution) continues below r_min
    """
    kappa = _shift(N) ** 2 + lambda1 - c
    if kappa < 0.0:
        raise PreconditionError(f"c={c} exceeds mu={hardy_constant(N, lambda1)}")
    nodes = log_grid(r_min, r_max, nodes_per_decade)
    h = float(np.log(nodes[1] / nodes[0]))
    m = _shift(N)
    n = nodes.size - 1  # psi at r_max is 0
    half = 1.0 + 0.5 * kappa * h * h
    ratio = half - math.sqrt(half * half - 1.0)
    # discrete particular solution A r^{m+2}
    amplitude = h * h / (2.0 + kappa * h * h - 2.0 * math.cosh((m + 2.0) * h))
    particular = amplitude * nodes ** (m + 2.0)

    banded = np.zeros((3, n))
    rhs = np.empty(n)
    banded[1, 0] = 1.0
    banded[0, 1] = -ratio
    rhs[0] = particular[0] - ratio * particular[1]
    banded[1, 1:] = 2.0 + kappa * h * h
    banded[0, 2:] = -1.0
    banded[2, :-1] = -1.0
    rhs[1:] = h * h * nodes[1:n] ** (m + 2.0)
    psi = solve_banded((1, 1), banded, rhs)
    values = np.zeros(nodes.size)
    values[:n] = nodes[:n] ** -m * psi
    return Grid1D(nodes, values)


def _fit_last_decade(grid: Grid1D) -> Tuple[float, float]:
    nodes = np.asarray(grid.nodes)
    window = nodes <= 10.0 * nodes[0]
    if np.count_nonzero(window) < 3 or nodes[-1] < 10.0 * nodes[0]:
        raise FitError("shell does not contain a full decade above r_min")
    x = np.log(nodes[window])
    y = np.log(np.asarray(grid.values)[window])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    total = np.sum((y - np.mean(y)) ** 2)
    r_squared = 1.0 - np.sum((y - fitted) ** 2) / total if total > 0.0 else 1.0
    return float(-slope), float(r_squared)


def zeta0_growth(
    N: int,
    c: float,
    lambda1: float,
    r_mins: Sequence[float] = R_MINS,
    nodes_per_decade: int = NODES_PER_DECADE,
) -> Tuple[Tuple[float, float, float], ...]:
    """
    Growth exponent gamma of zeta_0 ~ r^-gamma, fitted over the last decade
    above each r_min
    returns: tuple of (r_min, gamma, R^2)
    """
    rows = []
    for r_min in r_mins:
        grid = zeta0_profile(N, c, lambda1, r_min, nodes_per_decade=nodes_per_decade)
        if np.any(np.asarray(grid.values)[:-1] <= 0.0):
            raise FitError(f"zeta_0 is not positive on (r_min={r_min}, {R_MAX})")
        gamma, r_squared = _fit_last_decade(grid)
        if r_squared < R_SQUARED_GATE:
            raise FitError(f"growth fit R^2={r_squared:.6f} below {R_SQUARED_GATE}")
        logger.debug(f"r_min={r_min:.3g}: gamma={gamma:.8f}, R^2={r_squared:.8f}")
        rows.append((float(r_min), gamma, r_squared))
    return tuple(rows)


def diverges(N: int, gamma: float, p: float) -> bool:
    # int_0 r^{-gamma(p+1)} r^{N-1} dr = inf
    return bool(gamma * (p + 1.0) >= N * (1.0 - DIVERGENCE_TOL))


def zeta0_divergence(
    N: int,
    c: float,
    p: float,
    cap: CapSpec = None,
    r_mins: Sequence[float] = R_MINS,
    nodes_per_decade: int = NODES_PER_DECADE,
) -> Zeta0Verdict:
    """
    int zeta_0^{p+1} diverges near 0 iff gamma (p+1) >= N, gamma the fitted growth
    """
    cap = CapSpec.hemisphere(N) if cap is None else cap
    lambda1 = cap_lambda1(cap)
    mu = hardy_constant(N, lambda1)
    if not lambda1 < c <= mu + REGIME_TOL * max(1.0, abs(mu)):
        raise PreconditionError(
            f"zeta_0 criterion needs lambda1={lambda1} < c <= mu={mu}, got c={c}"
        )
    rows = zeta0_growth(N, min(c, mu), lambda1, r_mins, nodes_per_decade)
    gammas = tuple(row[1] for row in rows)
    gamma, r_squared = rows[-1][1], rows[-1][2]
    return Zeta0Verdict(
        divergent=diverges(N, gamma, p),
        gamma=gamma,
        expected_gamma=alpha_minus(N, c, lambda1),
        r_squared=r_squared,
        r_mins=tuple(row[0] for row in rows),
        gammas=gammas,
    )
