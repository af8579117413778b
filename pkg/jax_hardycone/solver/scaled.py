import logging
import math
from typing import Callable, Sequence, Tuple

import jax
import jax.numpy as jnp
import numpy as np
from numpy.polynomial.legendre import leggauss

# local imports
from ..dataclass import CircleWeight, CylinderProfile, TubeSpec
from ..errors import DomainError
from ..jax_utils import to_host

logger = logging.getLogger(__name__)

GAUSS_ORDER = 16
FAMILY_ORDERS = (10, 20, 50, 100, 200)


def _composite_gauss(lo: float, hi: float, segments: int, order: int = GAUSS_ORDER):
    x, w = leggauss(order)
    edges = np.linspace(lo, hi, segments + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def smoothstep(t):
    """
    C^1 ramp from 0 (t <= 0) to 1 (t >= 1)
    """
    t = jnp.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def bump(lo: float, hi: float) -> Callable:
    """
    Smooth function supported on [lo, hi], exp(-1/((t-lo)(hi-t))) inside
    """

    def fn(t):
        inside = (t > lo) & (t < hi)
        gap = jnp.where(inside, (t - lo) * (hi - t), 1.0)
        return jnp.where(inside, jnp.exp(-1.0 / gap), 0.0)

    return fn


def _value_and_slope(fn: Callable, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = jnp.asarray(x, dtype=jnp.float64)
    values = jax.vmap(fn)(x)
    slopes = jax.vmap(jax.grad(fn))(x)
    return to_host(values), to_host(slopes)


def _check_dimensions(N: int, k: int):
    if not 1 <= k < N - 2:
        raise DomainError(f"need 1 <= k < N-2, got N={N}, k={k}")


def flat_quotient(
    N: int, k: int, profile: CylinderProfile, C0: float = 0.0, segments: int = 256
) -> float:
    """
    int |∇w|^2 / ((1 + C0) int |y~|^-2 w^2) on R^{N-k} x R^k for
    w = A(|y~|) B(s), s one-dimensional
    """
    _check_dimensions(N, k)
    n = N - k
    t, wt = _composite_gauss(*np.log(profile.rho_support), segments)
    rho = np.exp(t)
    a, da = _value_and_slope(profile.radial, rho)
    s, ws = _composite_gauss(*profile.s_support, segments)
    b, db = _value_and_slope(profile.axial, s)
    measure = wt * rho ** (n - 1) * rho  # rho^{n-1} d rho in log variable
    gradient = np.sum(measure * da ** 2) * np.sum(ws * b ** 2) + np.sum(
        measure * a ** 2
    ) * np.sum(ws * db ** 2)
    weighted = np.sum(measure * a ** 2 / rho ** 2) * np.sum(ws * b ** 2)
    return float(gradient / ((1.0 + C0) * weighted))


def _weight_center(q) -> float:
    if isinstance(q, CircleWeight):
        return q.phase
    grid = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    return float(grid[np.argmax(to_host(q(grid)))])


def scaled_test_quotient(
    tube: TubeSpec,
    profile: CylinderProfile,
    epsilons: Sequence[float],
    C0: float = 0.0,
    segments: int = 64,
    num_angles: int = 32,
) -> Tuple[float, ...]:
    """
    Rayleigh quotient int |∇phi|^2 / int (q + C0 delta^{2 sqrt(1-q)}) delta^-2 phi^2
    for phi_eps(x) = eps^{(2-N)/2} w(Y^{-1}(x) / eps) concentrated at the maximum
    of q; the tube chart has Jacobian 1 + eps rho cos(phi) / R
    returns: one quotient per epsilon
    """
    N, R = tube.N, tube.circle_radius
    n = N - tube.k
    rho_lo, rho_hi = profile.rho_support
    s_lo, s_hi = profile.s_support
    center = _weight_center(tube.q)

    t, wt = _composite_gauss(math.log(rho_lo), math.log(rho_hi), segments)
    rho = np.exp(t)
    a, da = _value_and_slope(profile.radial, rho)
    phi, wphi = _composite_gauss(0.0, np.pi, 1, num_angles)
    s, ws = _composite_gauss(s_lo, s_hi, segments)
    b, db = _value_and_slope(profile.axial, s)

    RHO, PHI, S = np.meshgrid(rho, phi, s, indexing="ij")
    A, DA = a[:, None, None], da[:, None, None]
    B, DB = b[None, None, :], db[None, None, :]
    measure = (
        (wt * rho ** n)[:, None, None]
        * (wphi * np.sin(phi) ** (n - 2))[None, :, None]
        * ws[None, None, :]
    )
    quotients = []
    for eps in epsilons:
        if eps * rho_hi >= tube.beta:
            raise DomainError(
                f"eps={eps}: radial support leaves the tube of radius {tube.beta}"
            )
        if eps * max(abs(s_lo), abs(s_hi)) >= np.pi * R:
            raise DomainError(f"eps={eps}: axial support wraps around the circle")
        J = 1.0 + eps * RHO * np.cos(PHI) / R
        gradient = np.sum(measure * J * ((DA * B) ** 2 + (A * DB / J) ** 2))
        q = to_host(tube.q(center + eps * S / R))
        gap = np.clip(1.0 - q, 0.0, None)
        coefficient = q + C0 * (eps * RHO) ** (2.0 * np.sqrt(gap))
        weighted = np.sum(measure * J * coefficient * (A * B) ** 2 / RHO ** 2)
        quotients.append(float(gradient / weighted))
        logger.debug(f"eps={eps:g}: quotient {quotients[-1]:.8f}")
    return tuple(quotients)


def hardy_family_quotients(
    N: int,
    k: int,
    orders: Sequence[int] = FAMILY_ORDERS,
    ramp: float = 5.0,
    axial_half_width: float = 5.0,
) -> Tuple[Tuple[int, float], ...]:
    """
    Flat quotients of w_j(y~, s) = |y~|^{-(N-k-2)/2 + 1/j} eta_j(log|y~|) B(s)
    with eta_j a plateau on log|y~| in [-10j, 0] and B a plateau of half width
    axial_half_width; the quotients decrease toward (N-k-2)^2/4
    returns: tuple of (j, quotient)
    """
    _check_dimensions(N, k)
    m = 0.5 * (N - k - 2)
    s, ws = _composite_gauss(-axial_half_width - ramp, axial_half_width + ramp, 64)
    axial = lambda x: smoothstep((x + axial_half_width + ramp) / ramp) * smoothstep(
        (axial_half_width + ramp - x) / ramp
    )
    b, db = _value_and_slope(axial, s)
    axial_ratio = np.sum(ws * db ** 2) / np.sum(ws * b ** 2)

    rows = []
    for order in orders:
        eps = 1.0 / order
        length = 10.0 * order
        # A = |y~|^-m a(t), t = log|y~|: radial quotient m^2 + int a'^2 / int a^2
        t, wt = _composite_gauss(-length, 0.0, int(length))
        cutoff = lambda x: smoothstep((x + length) / ramp) * smoothstep(-x / ramp)
        eta, deta = _value_and_slope(cutoff, t)
        growth = np.exp(2.0 * eps * t)
        denominator = np.sum(wt * growth * eta ** 2)
        radial = np.sum(wt * growth * (eps * eta + deta) ** 2) / denominator
        # int A^2 rho^{n-1} / int A^2 rho^{n-3} = <rho^2> under a^2 dt
        spread = np.sum(wt * growth * eta ** 2 * np.exp(2.0 * t)) / denominator
        rows.append((int(order), float(m * m + radial + spread * axial_ratio)))
    return tuple(rows)
