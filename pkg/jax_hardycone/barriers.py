import logging
import math
from typing import Sequence

import jax
import jax.numpy as jnp
import numpy as np
from scipy import integrate, optimize

# local imports
from .dataclass import (
    BarrierSpec,
    FermiChart,
    ResidualReport,
    TubeBarrierSpec,
    TubeSpec,
    WeightIntegral,
)
from .errors import DomainError, SingularPointError
from .geometry import (
    _fermi_inverse,
    _tube_coordinates,
    chart_samples,
    curvature_term,
    dyadic_step,
    fd_laplacian,
    fermi_inverse,
    tube_distance_projection,
    tube_samples,
)
from .jax_utils import as_points, is_traced, safe_norm, to_host
from .spectral import alpha_minus, critical_exponent, tube_critical_exponent

logger = logging.getLogger(__name__)

RELATIVE_TOL = 1e-6
RICHARDSON_BAND = (3.6, 4.4)
RESOLVED_FRACTION = 0.02  # truncation error below this share of h^2 scale is noise
BOUNDED_SPREAD = 10.0
FD_NOISE = 1e-4
ORDER_TOL = 0.05
ROUNDOFF_GAP = 1e-12
REFINE_GAP = 1e-2  # scan minima above this cannot hide a zero of 1 - q
DYADIC_RADII = tuple(2.0 ** -j for j in range(3, 25))


def log_power(t, a: float) -> jnp.ndarray:
    """
    X_a(t) = |log t|^a on (0, 1)
    """
    t = jnp.asarray(t, dtype=jnp.float64)
    if not is_traced(t):
        th = to_host(t)
        if np.any(th <= 0.0) or np.any(th >= 1.0):
            raise DomainError("log_power is defined for 0 < t < 1")
    return jnp.abs(jnp.log(t)) ** a


def _omega_bar(N: int, root: float, a: float, y: jnp.ndarray) -> jnp.ndarray:
    rho = safe_norm(y)
    return y[..., 0] * rho ** (root - 0.5 * N) * jnp.abs(jnp.log(rho)) ** a


def _omega_tilted(spec: BarrierSpec, y: jnp.ndarray) -> jnp.ndarray:
    return jnp.exp(spec.K * y[..., 0]) * _omega_bar(spec.N, spec.root, spec.a, y)


def _check_flat_points(y: jnp.ndarray, need_interior: bool):
    yh = to_host(y)
    rho = np.linalg.norm(yh, axis=-1)
    if np.any(rho <= 0.0) or np.any(rho >= 1.0):
        raise DomainError("barrier points need 0 < |y| < 1")
    if need_interior and np.any(yh[..., 0] <= 0.0):
        raise SingularPointError("residual is singular on {y1 = 0}")
    if np.any(yh[..., 0] < 0.0):
        raise DomainError("barrier points need y1 >= 0")


def omega_bar(spec: BarrierSpec, y, a: float = None) -> jnp.ndarray:
    """
    y1 |y|^{-N/2 + sqrt(N^2/4 - c)} X_a(|y|), harmonic for a = 0 against c|y|^-2
    """
    a = spec.a if a is None else a
    y = as_points(y, spec.N)
    if not is_traced(y):
        _check_flat_points(y, need_interior=False)
    return _omega_bar(spec.N, spec.root, a, y)


def omega_tilted(spec: BarrierSpec, y) -> jnp.ndarray:
    y = as_points(y, spec.N)
    if not is_traced(y):
        _check_flat_points(y, need_interior=False)
    return _omega_tilted(spec, y)


def residual_flat(spec: BarrierSpec, y) -> jnp.ndarray:
    """
    Closed form of (-Δ - c|y|^-2 + a(a-1)|y|^-2 X_{-2}) omega_{a,K} on the half ball
    """
    y = as_points(y, spec.N)
    if not is_traced(y):
        _check_flat_points(y, need_interior=True)
    N, a, K, s = spec.N, spec.a, spec.K, spec.root
    y1 = y[..., 0]
    rho2 = jnp.sum(y * y, axis=-1)
    xm1 = 1.0 / jnp.abs(jnp.log(jnp.sqrt(rho2)))
    factor = (
        -2.0 * K / y1
        + 2.0 * a * s * xm1 / rho2
        + 2.0 * K * (0.5 * N - s + a * xm1) * y1 / rho2
        - K * K
    )
    return factor * _omega_tilted(spec, y)


def _flat_operator(spec: BarrierSpec, field, x, h) -> jnp.ndarray:
    r2 = jnp.sum(x * x, axis=-1)
    value = field(x)
    log_term = spec.a * (spec.a - 1.0) * jnp.log(jnp.sqrt(r2)) ** -2 / r2
    return -fd_laplacian(field, x, h) - spec.c / r2 * value + log_term * value


def flat_operator_fd(spec: BarrierSpec, y, h) -> jnp.ndarray:
    y = as_points(y, spec.N)
    return _flat_operator(spec, lambda z: _omega_tilted(spec, z), y, h)


def half_ball_samples(N: int, count: int = 50) -> np.ndarray:
    """
    Deterministic points with 0.05 <= |y| <= 0.7 and y1 >= |y| sin(0.1 pi)
    """
    j = np.arange(1, count + 1)
    rho = 0.05 + 0.65 * np.mod(j * 0.6180339887498949, 1.0)
    phi = np.pi * (0.1 + 0.8 * np.mod(j * 0.7548776662466927, 1.0))
    turn = 2.0 * np.pi * np.mod(j * 0.5698402909980532, 1.0)
    y = np.zeros((count, N))
    y[:, 0] = rho * np.sin(phi)
    y[:, 1] = rho * np.cos(phi) * np.cos(turn)
    if N > 2:
        y[:, 2] = rho * np.cos(phi) * np.sin(turn)
    return y


def richardson_check(
    spec: BarrierSpec, points, h_rel: float = 0.01, tolerance: float = RELATIVE_TOL
) -> ResidualReport:
    """
    Compare residual_flat with second differences at h and h/2; the extrapolated
    operator must match to tolerance and resolved errors must shrink fourfold
    returns: ResidualReport with ratios E(h)/E(h/2)
    """
    y = as_points(points, spec.N)
    closed = to_host(residual_flat(spec, y))
    yh = to_host(y)
    rho = np.linalg.norm(yh, axis=-1)
    # omega extends smoothly across y1 = 0, so only |y| limits the stencil
    scale = np.minimum(rho, 1.0 - rho)
    h = dyadic_step(h_rel * scale)
    fd_h = to_host(flat_operator_fd(spec, y, h))
    fd_h2 = to_host(flat_operator_fd(spec, y, 0.5 * h))
    omega = to_host(_omega_tilted(spec, y))
    magnitude = np.abs(omega) * rho / (yh[..., 0] * scale ** 2)
    extrapolated = (4.0 * fd_h2 - fd_h) / 3.0
    mismatch = np.abs(extrapolated - closed) / magnitude
    err_h, err_h2 = fd_h - closed, fd_h2 - closed
    resolved = np.abs(err_h) >= RESOLVED_FRACTION * magnitude * (h / scale) ** 2
    ratios = np.where(resolved, err_h / np.where(err_h2 != 0.0, err_h2, 1.0), np.nan)
    lo, hi = RICHARDSON_BAND
    ratios_ok = bool(np.all((ratios[resolved] >= lo) & (ratios[resolved] <= hi)))
    worst = float(np.max(mismatch))
    passed = worst <= tolerance and ratios_ok and bool(np.any(resolved))
    logger.debug(
        f"richardson: worst mismatch {worst:.3e}, "
        f"{int(np.sum(resolved))}/{resolved.size} resolved"
    )
    return ResidualReport(
        points=yh,
        closed_form=closed,
        fd=extrapolated,
        ratios=ratios,
        max_relative_mismatch=worst,
        verdict="pass" if passed else "fail",
        tolerance=tolerance,
        details={
            "h": h,
            "resolved_fraction": float(np.mean(resolved)),
            "ratios_in_band": ratios_ok,
        },
    )


def _pullback(spec: BarrierSpec, x: jnp.ndarray) -> jnp.ndarray:
    y = x if spec.chart is None else _fermi_inverse(spec.chart.sign, x)
    return _omega_tilted(spec, y)


def residual_pullback(
    spec: BarrierSpec, x, h_rel: float = 1e-3, bound: float = BOUNDED_SPREAD
) -> ResidualReport:
    """
    L_x W for W = omega_{a,K} o F^{-1}, minus the leading terms
    -((2K + h_M)/d) W + 2as|x|^-2 X_{-1}(|x|) W; the remainder times |x|/W must
    stay bounded (or vanish to finite-difference accuracy in the flat chart)
    """
    x = as_points(x, spec.N)
    if spec.chart is None:
        y = x
        h_m = jnp.zeros(x.shape[:-1])
    else:
        y = fermi_inverse(spec.chart, x)
        h_m = curvature_term(spec.chart, x)
    xh, yh = to_host(x), to_host(y)
    d = yh[..., 0]
    if np.any(d <= 0.0):
        raise SingularPointError("pullback residual is singular on the boundary")
    r = np.linalg.norm(xh, axis=-1)
    scale = np.minimum(d, r)
    h = dyadic_step(h_rel * scale)
    operator = to_host(_flat_operator(spec, lambda z: _pullback(spec, z), x, h))
    W = to_host(_pullback(spec, x))
    a, K, s = spec.a, spec.K, spec.root
    leading = (
        -(2.0 * K + to_host(h_m)) / d * W
        + 2.0 * a * s / (r ** 2 * np.abs(np.log(r))) * W
    )
    remainder = operator - leading
    ratios = remainder * r / W
    vanishing = bool(np.all(np.abs(remainder) * scale ** 2 <= FD_NOISE * np.abs(W)))
    size = np.abs(ratios)
    spread = float(np.max(size) / np.min(size)) if np.min(size) > 0.0 else math.inf
    passed = vanishing or spread <= bound
    return ResidualReport(
        points=xh,
        closed_form=leading,
        fd=operator,
        ratios=ratios,
        max_relative_mismatch=spread,
        verdict="pass" if passed else "fail",
        tolerance=bound,
        details={"remainder": remainder, "vanishing": vanishing, "h": h},
    )


def certify_exterior_barrier(
    N: int,
    c: float,
    p: float,
    r: float = 0.5,
    radii: Sequence[float] = None,
    num_directions: int = 9,
    tolerance: float = RELATIVE_TOL,
    min_tail: int = 4,
    h_rel: float = 1e-3,
) -> ResidualReport:
    """
    Check that A W, W = omega_{1/(2p), 1-N} pulled back to the exterior of a ball,
    is a supersolution of -Δu - c|x|^-2 u >= u^p near 0 for p < p_critical.
    The analytic verdict is the sign of alpha(p - p_critical); the numeric one
    needs a linear margin above tolerance times its local scale on every direction
    below a threshold radius, over at least min_tail dyadic radii.
    max_relative_mismatch is the worst relative shortfall of the unscaled W on
    that tail; amplitude is the largest A for which A W passes there.
    sufficient_profile evaluates the sufficient inequality per tail radius with
    its constant pinned at the coarsest one
    """
    if p <= 1.0:
        raise DomainError(f"exponent p must exceed 1, got {p}")
    if c <= N - 1:
        raise DomainError(f"exterior barrier needs c > N-1 = {N - 1}, got {c}")
    lambda1 = float(N - 1)
    alpha = alpha_minus(N, c, lambda1)
    p_critical = critical_exponent(alpha)
    exponent = alpha * (p - p_critical)
    analytic = exponent < 0.0

    chart = FermiChart(N, r, "outside")
    spec = BarrierSpec(N, c, a=1.0 / (2.0 * p), K=1.0 - N, chart=chart)
    radii = sorted((rad for rad in (radii or DYADIC_RADII) if rad < r), reverse=True)
    if not radii:
        raise DomainError(f"no sample radius below the chart radius {r}")
    x, y = chart_samples(chart, radii, num_directions)
    field = lambda z: _pullback(spec, z)
    xh, yh = to_host(x), to_host(y)
    rx = np.linalg.norm(xh, axis=-1)
    ry = np.linalg.norm(yh, axis=-1)
    W = to_host(field(x))
    h = dyadic_step(h_rel * np.minimum(yh[..., 0], rx))
    laplacian = to_host(fd_laplacian(field, x, h))
    potential = c / rx ** 2 * W
    margin = -laplacian - potential
    local_scale = np.abs(laplacian) + np.abs(potential)

    row_ok = np.all(margin >= tolerance * local_scale, axis=1)
    tail = 0
    for ok in row_ok[::-1]:
        if not ok:
            break
        tail += 1
    first = len(radii) - tail
    threshold = radii[first] if tail else 0.0

    log_scale = W * np.log(ry) ** -2 / ry ** 2
    nonlinear = W ** p
    with np.errstate(divide="ignore", invalid="ignore"):
        amplitude_rows = np.where(
            row_ok, np.min(margin / nonlinear, axis=1) ** (1.0 / (p - 1.0)), 0.0
        )
    sufficient = {}
    if tail:
        kept = slice(first, None)
        amplitude = float(np.min(amplitude_rows[kept]))
        # C |y|^{alpha(p - p_critical)} |log |y||^{1/(2p) - 5/2} >= 1, C pinned at
        # the coarsest radius of the tail
        pinned = float(np.min(margin[first] / log_scale[first]))
        log_exponent = 0.5 / p - 2.5
        sufficient = {
            rad: pinned * rad ** exponent * abs(math.log(rad)) ** log_exponent
            for rad in radii[first:]
        }
        shortfall = (nonlinear[kept] - margin[kept]) / (
            np.abs(margin[kept]) + nonlinear[kept]
        )
        worst = float(np.max(shortfall))
    else:
        amplitude, pinned, worst = 0.0, math.nan, math.inf
    numeric = tail >= min_tail and amplitude > 0.0
    # omega_bar^p is integrable near 0 once c > N-1
    integrable = (N - 4) / 2.0 - spec.root > -1.0
    logger.info(
        f"exterior barrier N={N} c={c} p={p}: exponent {exponent:.4g}, "
        f"threshold radius {threshold:.3g}, tail {tail}, amplitude {amplitude:.3g}"
    )
    return ResidualReport(
        points=yh,
        closed_form=nonlinear,
        fd=margin,
        ratios=margin / log_scale,
        max_relative_mismatch=worst,
        verdict="pass" if analytic and numeric else "fail",
        tolerance=tolerance,
        details={
            "analytic_exponent": exponent,
            "analytic_pass": analytic,
            "numeric_pass": numeric,
            "alpha_minus": alpha,
            "p_critical": p_critical,
            "threshold_radius": threshold,
            "tail_length": tail,
            "amplitude": amplitude,
            "pinned_constant": pinned,
            "sufficient_profile": sufficient,
            "amplitude_profile": dict(zip(radii, amplitude_rows.tolist())),
            "lp_integrable": integrable,
        },
    )


def _check_tube_radicand(radicand):
    if not is_traced(radicand) and np.any(to_host(radicand) < 0.0):
        raise DomainError("1 - q + delta is negative: q exceeds 1 at this point")


def _tube_alpha(tube: TubeSpec, delta, sigma) -> jnp.ndarray:
    m = tube.normal_order
    radicand = 1.0 - tube.q(sigma) + delta
    _check_tube_radicand(radicand)
    return m - m * jnp.sqrt(radicand)


def _tube_omega(tube: TubeSpec, a: float, delta, sigma) -> jnp.ndarray:
    return delta ** (-_tube_alpha(tube, delta, sigma)) * jnp.abs(jnp.log(delta)) ** a


def tube_alpha(tube: TubeSpec, x) -> jnp.ndarray:
    """
    alpha = m - sqrt(alpha~), alpha~ = m^2 (1 - q(sigma(x)) + delta(x))
    """
    delta, sigma = tube_distance_projection(tube, x)
    return _tube_alpha(tube, delta, sigma)


def _tube_coordinates_checked(tube: TubeSpec, x):
    delta, sigma = tube_distance_projection(tube, x)
    if not is_traced(delta):
        dh = to_host(delta)
        if np.any(dh <= 0.0):
            raise SingularPointError("tube barrier is singular on the circle")
        if np.any(dh >= 1.0):
            raise DomainError("X_a needs delta < 1")
    return delta, sigma


def tube_barrier(spec: TubeBarrierSpec, x) -> jnp.ndarray:
    """
    omega_a = delta^{-alpha} X_a(delta)
    """
    delta, sigma = _tube_coordinates_checked(spec.tube, x)
    return _tube_omega(spec.tube, spec.a, delta, sigma)


def tube_theta(spec: TubeBarrierSpec, x) -> jnp.ndarray:
    delta, sigma = _tube_coordinates_checked(spec.tube, x)
    return _tube_omega(spec.tube, 0.0, delta, sigma) + _tube_omega(
        spec.tube, spec.a, delta, sigma
    )


def _decade_maxima(delta: np.ndarray, values: np.ndarray) -> dict:
    decades = np.floor(np.log10(delta) + 1e-6).astype(int)
    return {int(k): float(np.max(values[decades == k])) for k in np.unique(decades)}


def verify_tube_residual(
    spec: TubeBarrierSpec,
    samples=None,
    h_rel: float = 1e-3,
    bound: float = BOUNDED_SPREAD,
) -> ResidualReport:
    """
    L_q omega_a - 2a sqrt(alpha~) delta^-2 X_{-1} omega_a
    + a(a-1) delta^-2 X_{-2} omega_a
    against |log delta| delta^{-3/2} omega_a: the per-decade maxima of the ratio
    must stay within a factor bound of each other over at least three decades
    """
    tube, a = spec.tube, spec.a
    m = tube.normal_order
    if samples is None:
        deltas = np.logspace(-1.5, -4.5, 13)
        deltas = deltas[deltas < tube.beta]
        sigmas = np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
        samples = tube_samples(tube, deltas, sigmas)
    x = as_points(samples, tube.N)
    delta, sigma = _tube_coordinates_checked(tube, x)
    dh = to_host(delta)
    if np.any(dh >= tube.beta):
        raise DomainError(f"samples must lie inside the tube of radius {tube.beta}")

    R = tube.circle_radius
    field = lambda z: _tube_omega(tube, a, *_tube_coordinates(R, z))
    h = dyadic_step(h_rel * dh)
    omega = to_host(field(x))
    q = to_host(tube.q(sigma))
    lap = to_host(fd_laplacian(field, x, h))
    operator = -lap - m * m * q / dh ** 2 * omega
    alpha_tilde = m * m * (1.0 - q + dh)
    log_abs = np.abs(np.log(dh))
    first_log = 2.0 * a * np.sqrt(alpha_tilde) / (dh ** 2 * log_abs) * omega
    second_log = a * (a - 1.0) / (dh ** 2 * log_abs ** 2) * omega
    lhs = operator - first_log + second_log
    scale = log_abs * dh ** -1.5 * omega
    ratios = lhs / scale
    maxima = _decade_maxima(dh, np.abs(ratios))
    top, bottom = max(maxima.values()), min(maxima.values())
    spread = top / bottom if bottom > 0.0 else math.inf
    passed = len(maxima) >= 3 and spread <= bound
    logger.debug(f"tube residual: decade maxima {maxima}")
    return ResidualReport(
        points=to_host(x),
        closed_form=scale,
        fd=lhs,
        ratios=ratios,
        max_relative_mismatch=spread,
        verdict="pass" if passed else "fail",
        tolerance=bound,
        details={
            "decade_maxima": maxima,
            "first_log_term": first_log,
            "second_log_term": second_log,
            "h": h,
        },
    )


def _weight_maximum(q) -> float:
    if hasattr(q, "maximum"):
        return float(q.maximum)
    grid = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    return float(np.max(to_host(q(grid))))


def certify_tube_supersolution(
    tube: TubeSpec,
    p: float,
    beta: float = None,
    samples=None,
    min_tail: int = 3,
) -> ResidualReport:
    """
    Check that u = omega_0 - omega_{-1} is a supersolution of the tube inequality
    via delta^{-2 + (p-1)alpha} X_{-5}(delta) (1 - X_{-1}(delta))^{1-p} >= 1.
    The analytic verdict is the sign of m(p - p_tube); the numeric one returns the
    largest beta such that every sample with delta <= beta passes
    """
    if p < 1.0:
        raise DomainError(f"exponent p must be >= 1, got {p}")
    m = tube.normal_order
    p_tube = tube_critical_exponent(tube.N, tube.k, 1.0)
    exponent = m * (p - p_tube)
    analytic = exponent < 0.0
    if _weight_maximum(tube.q) < 1.0:
        logger.warning("q stays below 1; the tube certificate assumes max q = 1")

    limit = tube.beta if beta is None else beta
    if samples is None:
        deltas = np.logspace(-1.0, -12.0, 45)
        sigmas = np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
        samples = tube_samples(tube, deltas, sigmas, off_plane_only=True)
    delta, sigma = tube_distance_projection(tube, samples)
    dh, sh = to_host(delta), to_host(sigma)
    inside = (dh > 0.0) & (dh < limit)
    dh, sh = dh[inside], sh[inside]
    if dh.size == 0:
        raise DomainError(f"no sample inside the tube of radius {limit}")

    alpha = to_host(_tube_alpha(tube, jnp.asarray(dh), jnp.asarray(sh)))
    admissible = dh < math.exp(-1.0)
    logs = np.abs(np.log(dh))
    with np.errstate(invalid="ignore", divide="ignore"):
        u = dh ** -alpha * (1.0 - 1.0 / logs)
        log_lhs = (
            (-2.0 + (p - 1.0) * alpha) * np.log(dh)
            - 5.0 * np.log(logs)
            + (1.0 - p) * np.log1p(-1.0 / logs)
        )
    ok = admissible & (u > 0.0) & (log_lhs >= 0.0)

    order = np.argsort(dh)
    levels = np.unique(dh[order])
    beta_pass, tail = 0.0, 0
    for level in levels:
        if not np.all(ok[dh == level]):
            break
        beta_pass, tail = float(level), tail + 1
    numeric = tail >= min_tail
    margin = float(np.min(log_lhs[dh <= beta_pass])) if tail else -math.inf
    logger.info(
        f"tube supersolution N={tube.N} p={p}: exponent {exponent:.4g}, "
        f"beta {beta_pass:.3g}"
    )
    return ResidualReport(
        points=np.stack([dh, sh], axis=-1),
        closed_form=u,
        fd=log_lhs,
        ratios=log_lhs,
        max_relative_mismatch=-margin,
        verdict="pass" if analytic and numeric else "fail",
        tolerance=0.0,
        details={
            "analytic_exponent": exponent,
            "analytic_pass": analytic,
            "numeric_pass": numeric,
            "p_tube": p_tube,
            "beta": beta_pass,
            "tail_length": tail,
        },
    )


def _weight_gap(q, sigma) -> float:
    return 1.0 - float(to_host(q(sigma)))


def _local_order(q, sigma0: float) -> float:
    hs = np.geomspace(1e-2, 1e-5, 8)
    orders = []
    for side in (1.0, -1.0):
        gaps = np.array([_weight_gap(q, sigma0 + side * h) for h in hs])
        if np.any(gaps <= 0.0):
            return math.inf
        orders.append(np.polyfit(np.log(hs), np.log(gaps), 1)[0])
    return float(np.mean(orders))


def gamma_weight_integral(
    tube: TubeSpec, num_scan: int = 4096, zero_tol: float = 1e-10
) -> WeightIntegral:
    """
    Integral of (1 - q)^{-1/2} over the circle; divergent when q = 1 on an arc or
    1 - q vanishes to order >= 2 at a maximum
    """
    q, R = tube.q, tube.circle_radius
    sigma = np.linspace(0.0, 2.0 * np.pi, num_scan, endpoint=False)
    gap = 1.0 - to_host(q(sigma))
    if np.min(gap) < -ROUNDOFF_GAP:
        raise DomainError(f"q exceeds 1 (max {1.0 - np.min(gap):.6g})")
    if np.max(gap) <= zero_tol or np.mean(gap <= zero_tol) > 0.01:
        return WeightIntegral(math.inf, True)

    step = sigma[1] - sigma[0]
    minima = []
    if np.ptp(gap) > zero_tol:
        for i in range(num_scan):
            left, right = gap[i - 1], gap[(i + 1) % num_scan]
            if gap[i] > REFINE_GAP or gap[i] > left or gap[i] > right:
                continue
            if gap[i] < left or gap[i] < right:
                minima.append(i)
    maxima = []
    for i in minima:
        if gap[i] <= zero_tol:
            maxima.append(float(sigma[i]))
            continue
        found = optimize.minimize_scalar(
            lambda s: _weight_gap(q, s),
            bounds=(sigma[i] - step, sigma[i] + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if found.fun <= zero_tol:
            maxima.append(float(np.mod(found.x, 2.0 * np.pi)))
    maxima = sorted(set(maxima))
    orders = [_local_order(q, s0) for s0 in maxima]
    if any(order >= 2.0 - ORDER_TOL for order in orders):
        return WeightIntegral(math.inf, True, maxima, orders)

    integrand = lambda s: _weight_gap(q, s) ** -0.5
    if maxima:
        bounds = list(zip(maxima, maxima[1:] + [maxima[0] + 2.0 * np.pi]))
    else:
        bounds = [(0.0, 2.0 * np.pi)]
    value = sum(integrate.quad(integrand, lo, hi, limit=200)[0] for lo, hi in bounds)
    return WeightIntegral(R * value, False, maxima, orders)


def tube_gradient_energy(
    spec: TubeBarrierSpec,
    beta: float = None,
    delta_min: float = 1e-8,
    n_delta: int = 400,
    n_sigma: int = 256,
) -> float:
    """
    Truncated Dirichlet energy of theta = omega_0 + omega_a over
    {delta_min < delta < beta}, with the flat tube metric
    |S^{N-2}| R delta^{N-2} d delta d sigma
    """
    tube, a = spec.tube, spec.a
    beta = tube.beta if beta is None else beta
    if not 0.0 < delta_min < beta < 1.0:
        raise DomainError(f"need 0 < delta_min < beta < 1, got ({delta_min}, {beta})")
    R, N = tube.circle_radius, tube.N

    def theta(delta, sigma):
        return _tube_omega(tube, 0.0, delta, sigma) + _tube_omega(tube, a, delta, sigma)

    d_delta = jnp.vectorize(jax.grad(theta, argnums=0))
    d_sigma = jnp.vectorize(jax.grad(theta, argnums=1))
    t = np.linspace(np.log(delta_min), np.log(beta), n_delta)
    sigma = (np.arange(n_sigma) + 0.5) * 2.0 * np.pi / n_sigma
    D, S = np.meshgrid(np.exp(t), sigma, indexing="ij")
    D, S = jnp.asarray(D), jnp.asarray(S)
    density = to_host(d_delta(D, S) ** 2 + (d_sigma(D, S) / R) ** 2)
    D = to_host(D)
    sphere = 2.0 * np.pi ** (0.5 * (N - 1)) / math.gamma(0.5 * (N - 1))
    radial = integrate.trapezoid(density * D ** (N - 2) * D, t, axis=0)
    return float(sphere * R * np.sum(radial) * 2.0 * np.pi / n_sigma)
