import logging
import math
from collections import namedtuple
from functools import partial
from typing import Tuple

import jax
import jax.numpy as jnp
import numpy as np
from scipy.linalg import eigh_tridiagonal

# local imports
from .dataclass import (
    AngularWeight,
    CapSpec,
    CosinePowerProfile,
    ExponentReport,
    HardyProblem,
    RegimeFlags,
)
from .errors import NONEXISTENCE_NOTE, ConvergenceError, DomainError, SearchError
from .jax_utils import register_pytree_namedtuple, to_host

logger = logging.getLogger(__name__)

NUM_STEPS = 10_000
START_STEPS = 8  # series start at theta = START_STEPS * h
LAMBDA_TOL = 1e-10
MAX_BISECTIONS = 200
MAX_WIDENINGS = 3
REGIME_TOL = 1e-12
DENSE_CELLS = 20_000

ZERO_WEIGHT = AngularWeight.zero()


class _BisectionIterand(
    namedtuple("_BisectionIterand", ["lower", "upper", "num_iters"])
):
    def __new__(cls, lower, upper, num_iters):
        return super(_BisectionIterand, cls).__new__(cls, lower, upper, num_iters)


register_pytree_namedtuple(_BisectionIterand)  # JAX pytree


def _series_start(N: int, lam_eff, theta) -> Tuple[jnp.ndarray, jnp.ndarray]:
    # Phi = 1 + a2 t^2 + a4 t^4 regular at the pole; flux = sin^{N-2} Phi'
    a2 = -lam_eff / (2.0 * (N - 1))
    a4 = a2 * (2.0 * (N - 2) / 3.0 - lam_eff) / (4.0 * (N + 1))
    phi = 1.0 + a2 * theta ** 2 + a4 * theta ** 4
    dphi = 2.0 * a2 * theta + 4.0 * a4 * theta ** 3
    return phi, jnp.sin(theta) ** (N - 2) * dphi


def _rhs(N: int, lam, weight: AngularWeight, theta, phi, flux):
    area = jnp.sin(theta) ** (N - 2)
    return flux / area, -(lam + weight(theta)) * area * phi


def _rk4_step(N, lam, weight, theta, h, phi, flux):
    k1 = _rhs(N, lam, weight, theta, phi, flux)
    mid = theta + 0.5 * h
    k2 = _rhs(N, lam, weight, mid, phi + 0.5 * h * k1[0], flux + 0.5 * h * k1[1])
    k3 = _rhs(N, lam, weight, mid, phi + 0.5 * h * k2[0], flux + 0.5 * h * k2[1])
    k4 = _rhs(N, lam, weight, theta + h, phi + h * k3[0], flux + h * k3[1])
    phi = phi + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    flux = flux + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    return phi, flux


@partial(jax.jit, static_argnames=("N", "weight", "num_steps"))
def _shoot(N, theta0, lam, weight, num_steps):
    """
    Integrate the cap ODE in flux form from the pole to theta0
    returns: (Phi(theta0), whether Phi vanished on the way)
    """
    h = theta0 / num_steps
    start = START_STEPS * h
    phi0, flux0 = _series_start(N, lam + weight(0.0), start)

    def body_fn(i, state):
        phi, flux, crossed = state
        phi, flux = _rk4_step(N, lam, weight, start + i * h, h, phi, flux)
        return phi, flux, crossed | (phi <= 0.0)

    phi, _, crossed = jax.lax.fori_loop(
        0,
        num_steps - START_STEPS,
        body_fn,
        (phi0, flux0, jnp.asarray(False)),
        unroll=8,
    )
    return phi, crossed


def _below(N, theta0, lam, weight, num_steps):
    # lam < lambda_1 iff Phi keeps its sign on (0, theta0]
    phi, crossed = _shoot(N, theta0, lam, weight, num_steps)
    return (~crossed) & (phi > 0.0)


_is_below = jax.jit(_below, static_argnames=("N", "weight", "num_steps"))


@partial(jax.jit, static_argnames=("N", "weight", "num_steps", "max_iter"))
def _bisect(N, theta0, lower, upper, tol, weight, num_steps, max_iter):
    def cond_fn(iterand):
        return (iterand.upper - iterand.lower > tol) & (iterand.num_iters < max_iter)

    def body_fn(iterand):
        mid = 0.5 * (iterand.lower + iterand.upper)
        below = _below(N, theta0, mid, weight, num_steps)
        return _BisectionIterand(
            lower=jnp.where(below, mid, iterand.lower),
            upper=jnp.where(below, iterand.upper, mid),
            num_iters=iterand.num_iters + 1,
        )

    iterand = jax.lax.while_loop(
        cond_fn,
        body_fn,
        _BisectionIterand(
            lower=jnp.asarray(lower, dtype=jnp.float64),
            upper=jnp.asarray(upper, dtype=jnp.float64),
            num_iters=jnp.asarray(0, dtype=jnp.int64),
        ),
    )
    status = jnp.where(iterand.upper - iterand.lower > tol, -1, 0)
    return iterand, status


def _check_cap_args(N: int, theta0: float):
    if int(N) != N or N < 3:
        raise DomainError(f"N must be an integer >= 3, got {N}")
    if not 0.0 < theta0 < np.pi:
        raise DomainError(f"theta0 must lie in (0, pi), got {theta0}")


def _upper_bracket(N: int, theta0: float) -> float:
    # the cap eigenvalue stays below the flat ball one, (j_{nu,1}/theta0)^2, and
    # j_{nu,1} < sqrt(nu + 1)(sqrt(nu + 2) + 1)
    nu = 0.5 * (N - 3)
    bessel_zero = math.sqrt(nu + 1.0) * (math.sqrt(nu + 2.0) + 1.0)
    return max(4.0 * N * N, (bessel_zero / theta0) ** 2 + N * N)


def cap_eigenvalue(
    N: int,
    theta0: float,
    V: AngularWeight = None,
    num_steps: int = NUM_STEPS,
    tol: float = LAMBDA_TOL,
    max_iter: int = MAX_BISECTIONS,
    max_widenings: int = MAX_WIDENINGS,
) -> float:
    """
    First Dirichlet eigenvalue of -Δ_S - V on the cap {theta < theta0}, by shooting
    from the pole and bisection on the eigenvalue
    returns: float
    """
    _check_cap_args(N, theta0)
    N = int(N)
    weight = ZERO_WEIGHT if V is None else V
    theta0 = float(theta0)
    lower = -weight.v_max - 1.0
    upper = _upper_bracket(N, theta0)
    if not bool(_is_below(N, theta0, lower, weight, num_steps)):
        raise SearchError(f"no eigenvalue above the lower bracket {lower}")
    widenings = 0
    while bool(_is_below(N, theta0, upper, weight, num_steps)):
        if widenings == max_widenings:
            raise SearchError(
                f"no eigenvalue below {upper} after {max_widenings} widenings"
            )
        upper *= 2.0
        widenings += 1
    iterand, status = _bisect(
        N, theta0, lower, upper, tol, weight, num_steps, max_iter
    )
    if int(status) != 0:
        raise ConvergenceError(
            f"bisection stopped after {int(iterand.num_iters)} iterations with "
            f"bracket width {float(iterand.upper - iterand.lower)}"
        )
    lam = 0.5 * float(iterand.lower + iterand.upper)
    logger.debug(
        "cap eigenvalue N=%d theta0=%.6f: %.12f (%d bisections)",
        N,
        theta0,
        lam,
        int(iterand.num_iters),
    )
    return lam


def cap_eigenfunction(
    N: int,
    theta0: float,
    lam: float,
    V: AngularWeight = None,
    num_steps: int = NUM_STEPS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Shooting profile Phi on [0, theta0], normalized Phi(0) = 1
    returns: (theta, Phi)
    """
    _check_cap_args(N, theta0)
    weight = ZERO_WEIGHT if V is None else V
    h = theta0 / num_steps
    start = START_STEPS * h
    phi0, flux0 = _series_start(int(N), lam + weight(0.0), start)

    def scan_fn(state, i):
        phi, flux = _rk4_step(int(N), lam, weight, start + i * h, h, *state)
        return (phi, flux), phi

    _, phis = jax.lax.scan(
        scan_fn, (phi0, flux0), jnp.arange(num_steps - START_STEPS)
    )
    theta = np.concatenate(
        [[0.0, start], start + h * np.arange(1, num_steps - START_STEPS + 1)]
    )
    phi = np.concatenate([[1.0, float(phi0)], to_host(phis)])
    return theta, phi


def _dense_eigenvalue(N: int, theta0: float, weight: AngularWeight, n: int) -> float:
    # cell-centred finite volumes, Dirichlet face at theta0, symmetric scaling by mass
    h = theta0 / n
    centers = (np.arange(n) + 0.5) * h
    faces = np.arange(1, n + 1) * h
    area_c = np.sin(centers) ** (N - 2)
    area_f = np.sin(faces) ** (N - 2)
    mass = area_c * h
    stiff = area_f / h
    diag = stiff.copy()
    diag[1:] += stiff[:-1]
    diag[-1] += stiff[-1]  # half-cell distance to the boundary
    off = -stiff[:-1]
    potential = to_host(weight(centers))
    d = diag / mass - potential
    e = off / np.sqrt(mass[:-1] * mass[1:])
    return float(
        eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, 0))[0]
    )


def cap_eigenvalue_dense(
    N: int, theta0: float, V: AngularWeight = None, num_cells: int = DENSE_CELLS
) -> float:
    """
    Matrix eigenvalue oracle for cap_eigenvalue, Richardson-extrapolated from
    num_cells and 2 * num_cells
    """
    _check_cap_args(N, theta0)
    weight = ZERO_WEIGHT if V is None else V
    coarse = _dense_eigenvalue(int(N), float(theta0), weight, num_cells)
    fine = _dense_eigenvalue(int(N), float(theta0), weight, 2 * num_cells)
    return (4.0 * fine - coarse) / 3.0


def cap_lambda1(cap: CapSpec) -> float:
    if cap.is_sphere:
        return 0.0
    if cap.is_hemisphere:
        return float(cap.N - 1)  # eigenfunction cos(theta)
    return cap_eigenvalue(cap.N, cap.theta0)


def hardy_constant(N: int, lambda1: float) -> float:
    return (N - 2) ** 2 / 4.0 + lambda1


def alpha_minus(N: int, c: float, lambda1: float) -> float:
    """
    Smaller root of alpha^2 - (N-2) alpha + c - lambda1 = 0
    """
    mu = hardy_constant(N, lambda1)
    gap = mu - c
    if gap < 0.0:
        if -gap > REGIME_TOL * max(1.0, abs(mu)):
            raise DomainError(f"c={c} > mu={mu}: {NONEXISTENCE_NOTE}")
        gap = 0.0
    return (N - 2) / 2.0 - math.sqrt(gap)


def critical_exponent(alpha_minus: float, s: float = 0.0) -> float:
    if alpha_minus <= 0.0:
        raise DomainError(
            f"critical exponent undefined for alpha_minus={alpha_minus} (c <= lambda1)"
        )
    if s >= 2.0:
        raise DomainError(f"weight exponent s must be below 2, got {s}")
    return 1.0 + (2.0 - s) / alpha_minus


def exponent_report(problem: HardyProblem) -> ExponentReport:
    """
    Cap eigenvalue, Hardy constant, alpha_minus and critical exponents of a problem.
    At s = 2 the weighted exponent 1 + (2 - s)/alpha_minus degenerates to 1,
    which is what q_critical reports
    returns: ExponentReport
    """
    lambda1 = cap_lambda1(problem.cap)
    mu = hardy_constant(problem.N, lambda1)
    flags = RegimeFlags(
        c_above_lambda1=problem.c > lambda1,
        c_at_most_mu=problem.c <= mu + REGIME_TOL * max(1.0, abs(mu)),
    )
    alpha = alpha_minus(problem.N, problem.c, lambda1)
    p_critical = critical_exponent(alpha)
    if problem.s < 2.0:
        q_critical = critical_exponent(alpha, problem.s)
    else:
        q_critical = 1.0
        logger.info("weight exponent s=2: q_critical degenerates to 1")
    return ExponentReport(
        lambda1=lambda1,
        mu=mu,
        alpha_minus=alpha,
        p_critical=p_critical,
        q_critical=q_critical,
        flags=flags,
    )


def constant_weight(value: float) -> AngularWeight:
    return AngularWeight(pieces=((0.0, math.inf, value),))


def indicator_weight(theta_lo: float, theta_hi: float, value: float) -> AngularWeight:
    return AngularWeight(pieces=((theta_lo, theta_hi, value),))


def cosine_power_weight(c: float, eps: float, C: float, p: float) -> AngularWeight:
    """
    V_eps = c + (eps/2) C cos(theta)^{p-1} on the hemisphere
    """
    return AngularWeight(profile=CosinePowerProfile(c, 0.5 * eps * C, p - 1.0))


def shrunken_cap_weight(
    c: float, eps: float, amplitude: float, theta0: float, margin: float = None
) -> AngularWeight:
    """
    c + eps * amplitude on the smaller cap of aperture theta0 - margin
    """
    if margin is None:
        margin = 0.1 * theta0
    if not 0.0 < margin < theta0:
        raise DomainError(f"margin must lie in (0, theta0), got {margin}")
    return AngularWeight(
        pieces=((0.0, math.inf, c), (0.0, theta0 - margin, eps * amplitude))
    )


def lower_bound_exponent(N: int, lambda_1V: float) -> float:
    """
    Exponent of the lower estimate u >= C |x|^e for positive supersolutions
    of -Δu >= V|x|^-2 u, e = (2-N)/2 + sqrt((2-N)^2/4 + lambda_1V)
    """
    radicand = (N - 2) ** 2 / 4.0 + lambda_1V
    if radicand < 0.0:
        raise DomainError(f"lambda_1V={lambda_1V} below -(N-2)^2/4")
    return -(N - 2) / 2.0 + math.sqrt(radicand)


def potential_growth_exponent(N: int, lambda_1V: float, p: float) -> float:
    # u^{p-1}|x|^2 >= C |x|^{e(p-1)+2}; negative means blow-up at the vertex
    return lower_bound_exponent(N, lambda_1V) * (p - 1.0) + 2.0


def perturbed_cap_gap(
    N: int, delta: float, c: float, p: float, eps: float, C: float
) -> float:
    """
    lambda_1 of -Δ - V_eps on the cap {sigma.E1 > delta} minus (N-1-c)
    returns: float, negative when the strict gap holds
    """
    if not 0.0 <= delta < 1.0:
        raise DomainError(f"delta must lie in [0, 1), got {delta}")
    lam = cap_eigenvalue(N, math.acos(delta), cosine_power_weight(c, eps, C, p))
    return lam - (N - 1 - c)


def tube_critical_exponent(N: int, k: int, q_max: float = 1.0) -> float:
    """
    Threshold exponent near a k-dimensional submanifold with weight maximum q_max
    """
    if N - k <= 2:
        raise DomainError(f"need N - k > 2, got N={N}, k={k}")
    if not 0.0 < q_max <= 1.0:
        raise DomainError(f"q_max must lie in (0, 1], got {q_max}")
    m = (N - k - 2) / 2.0
    return critical_exponent(m - m * math.sqrt(1.0 - q_max))
