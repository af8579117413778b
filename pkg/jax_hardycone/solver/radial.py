import logging
import math
from typing import Callable, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import eigvalsh_tridiagonal, solve_banded

# local imports
from ..dataclass import APVerdict, EFCoefficients, Grid1D, PotentialField, RadialProblem
from ..errors import (
    NONEXISTENCE_NOTE,
    CoercivityError,
    GridError,
    PreconditionError,
)

logger = logging.getLogger(__name__)

NODES_PER_DECADE = 4096
SUPERSOLUTION_TOL = 1e-10
FORM_TOL = 1e-8
WEIGHTS = ("inverse_square", "log_improved", "unit")


def log_grid(r_min: float, r_max: float, nodes_per_decade: int = NODES_PER_DECADE):
    """
    Nodes uniform in log r, at least three
    """
    if not 0.0 < r_min < r_max:
        raise GridError(f"need 0 < r_min < r_max, got ({r_min}, {r_max})")
    n = max(3, int(math.ceil(nodes_per_decade * math.log10(r_max / r_min))) + 1)
    return np.exp(np.linspace(math.log(r_min), math.log(r_max), n))


def _shift(N: int) -> float:
    return 0.5 * (N - 2)


def ef_transform(problem: RadialProblem) -> EFCoefficients:
    """
    u(r) = r^{(2-N)/2} psi(t), t = -log r turns the radial operator into
    -psi'' + ((N-2)^2/4 + lambda - c) psi = e^{-2t} r^{(N-2)/2} f
    """
    m = _shift(problem.N)
    f = problem.f

    def rhs(t):
        r = np.exp(-np.asarray(t, dtype=np.float64))
        if f is None:
            return np.zeros_like(r)
        return r ** (m + 2.0) * np.asarray(f(r), dtype=np.float64)

    return EFCoefficients(m, m * m + problem.mode_eigenvalue - problem.c, rhs)


def _step(nodes: np.ndarray) -> float:
    t = np.log(nodes)
    steps = np.diff(t)
    if nodes.size < 3:
        raise GridError(f"grid needs at least 3 nodes, got {nodes.size}")
    if np.max(np.abs(steps - steps[0])) > 1e-12 * max(1.0, abs(steps[0])):
        raise GridError("grid spacing is not uniform in log r")
    return float(steps[0])


def assemble(N: int, mode_eigenvalue: float, nodes: np.ndarray, b_values=None):
    """
    Interior tridiagonal matrix of -psi'' + ((N-2)^2/4 + lambda - r^2 b) psi
    returns: (diagonal, off-diagonal value, h)
    """
    h = _step(nodes)
    m = _shift(N)
    r = nodes[1:-1]
    diag = np.full(r.size, 2.0 / h ** 2 + m * m + mode_eigenvalue)
    if b_values is not None:
        diag = diag - r ** 2 * np.asarray(b_values, dtype=np.float64)[1:-1]
    return diag, -1.0 / h ** 2, h


def min_eigenvalue(diag: np.ndarray, off: float, mass: np.ndarray = None) -> float:
    """
    Smallest eigenvalue of the tridiagonal pencil (A, diag(mass))
    """
    if mass is not None:
        if not np.all(np.isfinite(mass)) or np.any(mass <= 0.0):
            raise GridError("mass matrix is singular or indefinite on this grid")
        scale = 1.0 / np.sqrt(mass)
        diag = diag * scale ** 2
        offdiag = off * scale[:-1] * scale[1:]
    else:
        offdiag = np.full(diag.size - 1, off)
    return float(
        eigvalsh_tridiagonal(diag, offdiag, select="i", select_range=(0, 0))[0]
    )


def _forcing(problem: RadialProblem, nodes: np.ndarray, h: float) -> np.ndarray:
    m = _shift(problem.N)
    r = nodes[1:-1]
    if problem.f is None:
        rhs = np.zeros(r.size)
    else:
        rhs = r ** (m + 2.0) * np.asarray(problem.f(r), dtype=np.float64)
    lo, hi = problem.boundary
    rhs[0] += nodes[0] ** m * lo / h ** 2
    rhs[-1] += nodes[-1] ** m * hi / h ** 2
    return rhs


def _to_u(N: int, nodes: np.ndarray, psi_interior: np.ndarray, boundary) -> np.ndarray:
    values = np.empty(nodes.size)
    values[0], values[-1] = boundary
    values[1:-1] = nodes[1:-1] ** -_shift(N) * psi_interior
    return values


def radial_solve(
    problem: RadialProblem,
    nodes_per_decade: int = NODES_PER_DECADE,
    potential: PotentialField = None,
) -> Grid1D:
    """
    Second-order difference solution of the separated problem in the
    Emden-Fowler variable, Dirichlet data at r_min and r_max
    potential: b (default c/r^2)
    """
    nodes = log_grid(problem.r_min, problem.r_max, nodes_per_decade)
    if potential is None:
        potential = PotentialField.inverse_square(problem.c)
    diag, off, h = assemble(problem.N, problem.mode_eigenvalue, nodes, potential(nodes))
    lowest = min_eigenvalue(diag, off)
    if lowest <= 0.0:
        raise CoercivityError(
            f"discrete form is not positive definite (lowest eigenvalue {lowest:.3e}); "
            f"{NONEXISTENCE_NOTE}"
        )
    banded = np.zeros((3, diag.size))
    banded[0, 1:] = off
    banded[1] = diag
    banded[2, :-1] = off
    psi = solve_banded((1, 1), banded, _forcing(problem, nodes, h))
    logger.debug(f"radial solve on {nodes.size} nodes, lowest eigenvalue {lowest:.3e}")
    return Grid1D(nodes, _to_u(problem.N, nodes, psi, problem.boundary))


def discrete_residual(
    problem: RadialProblem, grid: Grid1D, potential: PotentialField = None
) -> float:
    """
    Relative sup-norm residual of the t-variable difference equation
    """
    nodes = np.asarray(grid.nodes)
    if potential is None:
        potential = PotentialField.inverse_square(problem.c)
    diag, off, h = assemble(problem.N, problem.mode_eigenvalue, nodes, potential(nodes))
    psi = nodes ** _shift(problem.N) * np.asarray(grid.values)
    inner = psi[1:-1]
    applied = diag * inner + off * (psi[:-2] + psi[2:])
    forcing = _forcing(problem, nodes, h)
    # boundary terms are folded into forcing
    applied[0] -= off * psi[0]
    applied[-1] -= off * psi[-1]
    scale = np.max(np.abs(diag * inner) + 2.0 * abs(off) * np.abs(inner)) + np.max(
        np.abs(forcing)
    )
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(applied - forcing)) / scale)


def _values_on(phi: Union[Grid1D, Callable], nodes: np.ndarray) -> np.ndarray:
    if isinstance(phi, Grid1D):
        return np.asarray(phi.values, dtype=np.float64)
    return np.asarray(phi(nodes), dtype=np.float64)


def quadratic_form(
    potential: PotentialField,
    phi: Union[Grid1D, Callable],
    nodes: np.ndarray,
    N: int = 3,
    mode_eigenvalue: float = 0.0,
) -> float:
    """
    Trapezoid value of int (phi'^2 + lambda phi^2/r^2 - b phi^2) r^{N-1} dr
    """
    nodes = np.asarray(nodes, dtype=np.float64)
    values = _values_on(phi, nodes)
    size = max(1.0, float(np.max(np.abs(values))))
    if abs(values[0]) > 1e-12 * size or abs(values[-1]) > 1e-12 * size:
        raise PreconditionError("test function must vanish at both ends of the shell")
    slope = np.gradient(values, nodes, edge_order=2)
    density = (
        slope ** 2
        + mode_eigenvalue * values ** 2 / nodes ** 2
        - potential(nodes) * values ** 2
    ) * nodes ** (N - 1)
    return float(trapezoid(density, nodes))


def _mass(weight: str, r: np.ndarray) -> np.ndarray:
    # psi-form mass r^2 w(r)
    if weight == "inverse_square":
        return np.ones_like(r)
    if weight == "log_improved":
        with np.errstate(divide="ignore"):
            return np.log(r) ** -2.0
    if weight == "unit":
        return r ** 2
    raise GridError(f"unknown weight {weight!r}, expected one of {WEIGHTS}")


def rayleigh_min(
    potential: PotentialField,
    nodes: np.ndarray,
    N: int,
    mode_eigenvalue: float = 0.0,
    weight: str = "inverse_square",
) -> float:
    """
    Smallest generalized eigenvalue of the Dirichlet form against the weighted
    mass r^{N-1} w(r) dr on the shell; w is r^-2, X_{-2}(r) r^-2 or 1
    """
    nodes = np.asarray(nodes, dtype=np.float64)
    diag, off, _ = assemble(N, mode_eigenvalue, nodes, potential(nodes))
    return min_eigenvalue(diag, off, _mass(weight, nodes[1:-1]))


def discrete_hardy_minimum(N: int, mode_eigenvalue: float, nodes: np.ndarray) -> float:
    """
    Closed form of rayleigh_min for b = 0 and weight r^-2:
    (N-2)^2/4 + lambda + (4/h^2) sin^2(pi / (2(n-1)))
    """
    h = _step(np.asarray(nodes))
    n = len(nodes)
    m = _shift(N)
    gap = 4.0 / h ** 2 * math.sin(0.5 * math.pi / (n - 1)) ** 2
    return m * m + mode_eigenvalue + gap


def ap_check(
    u: Grid1D,
    V: Callable,
    N: int,
    mode_eigenvalue: float = 0.0,
    tolerance: float = FORM_TOL,
) -> APVerdict:
    """
    A positive supersolution of -Δu >= V u makes int |∇phi|^2 - int V phi^2
    non-negative; the supersolution property is checked first on the grid
    """
    nodes = np.asarray(u.nodes, dtype=np.float64)
    values = np.asarray(u.values, dtype=np.float64)
    if np.any(values[1:-1] <= 0.0):
        raise PreconditionError("u must be positive at interior nodes")
    potential = PotentialField(V)
    diag, off, _ = assemble(N, mode_eigenvalue, nodes, potential(nodes))
    psi = nodes ** _shift(N) * values
    inner = psi[1:-1]
    applied = diag * inner + off * (psi[:-2] + psi[2:])
    scale = np.abs(diag * inner) + abs(off) * (np.abs(psi[:-2]) + np.abs(psi[2:]))
    margin = float(np.min(applied / scale))
    if margin < -SUPERSOLUTION_TOL:
        raise PreconditionError(
            f"u is not a discrete supersolution (relative margin {margin:.3e})"
        )
    lowest = min_eigenvalue(diag, off)
    return APVerdict(lowest >= -tolerance, lowest, margin)


def shell_table(
    N: int,
    mode_eigenvalue: float,
    shells,
    potential: PotentialField = None,
    weight: str = "inverse_square",
    nodes_per_decade: int = NODES_PER_DECADE,
) -> Tuple[Tuple[float, float, float], ...]:
    """
    rayleigh_min across a list of shells (r_min, r_max)
    returns: tuple of (r_min, r_max, minimum)
    """
    if potential is None:
        potential = PotentialField.zero()
    rows = []
    for r_min, r_max in shells:
        nodes = log_grid(r_min, r_max, nodes_per_decade)
        rows.append(
            (r_min, r_max, rayleigh_min(potential, nodes, N, mode_eigenvalue, weight))
        )
    return tuple(rows)
