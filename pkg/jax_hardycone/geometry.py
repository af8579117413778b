import logging
from typing import Callable, Sequence, Tuple

import jax.numpy as jnp
import numpy as np

# local imports
from .dataclass import FermiChart, TubeSpec
from .errors import DomainError
from .jax_utils import as_points, is_traced, safe_norm, to_host

logger = logging.getLogger(__name__)

ROUNDOFF = 1e-12


def dyadic_step(h) -> np.ndarray:
    """
    Round step sizes to the nearest power of two so stencil offsets are exact
    """
    return np.exp2(np.round(np.log2(np.asarray(h, dtype=np.float64))))


def _fermi_map(sign: float, y: jnp.ndarray) -> jnp.ndarray:
    # x1 = sign(1 - cos s) + y1 cos s, xbar = (1 - sign y1) sin(s) ybar/s, s = |ybar|
    y1, ybar = y[..., :1], y[..., 1:]
    s = safe_norm(ybar)[..., None]
    x1 = sign * 2.0 * jnp.sin(0.5 * s) ** 2 + y1 * jnp.cos(s)
    xbar = (1.0 - sign * y1) * jnp.sinc(s / jnp.pi) * ybar
    return jnp.concatenate([x1, xbar], axis=-1)


def _fermi_inverse(sign: float, x: jnp.ndarray) -> jnp.ndarray:
    x1, xbar = x[..., 0], x[..., 1:]
    sq = jnp.sum(x * x, axis=-1)
    dist_center = jnp.sqrt(1.0 - 2.0 * sign * x1 + sq)
    d = (2.0 * x1 - sign * sq) / (1.0 + dist_center)
    nb = safe_norm(xbar)
    s = jnp.arctan2(nb, 1.0 - sign * x1)
    scale = jnp.where(nb > 0.0, s / jnp.where(nb > 0.0, nb, 1.0), 1.0)
    return jnp.concatenate([d[..., None], scale[..., None] * xbar], axis=-1)


def fermi_map(chart: FermiChart, y) -> jnp.ndarray:
    """
    Exact boundary chart of the unit sphere through 0
    returns: jnp.ndarray of points x with d_M(x) = y1
    """
    y = as_points(y, chart.N)
    if not is_traced(y):
        yh = to_host(y)
        if np.any(np.linalg.norm(yh, axis=-1) >= chart.radius):
            raise DomainError(f"|y| must stay below the chart radius {chart.radius}")
        if np.any(yh[..., 0] < 0.0):
            raise DomainError("chart points need y1 >= 0")
    return _fermi_map(chart.sign, y)


def fermi_inverse(chart: FermiChart, x) -> jnp.ndarray:
    """
    Inverse of fermi_map; the first coordinate is the exact distance to the sphere
    """
    x = as_points(x, chart.N)
    y = _fermi_inverse(chart.sign, x)
    if not is_traced(y):
        yh = to_host(y)
        if np.any(yh[..., 0] < -ROUNDOFF) or np.any(
            np.linalg.norm(yh, axis=-1) >= chart.radius
        ):
            raise DomainError("point lies outside the chart image")
    return y


def sphere_distance(chart: FermiChart, x) -> jnp.ndarray:
    return _fermi_inverse(chart.sign, as_points(x, chart.N))[..., 0]


def curvature_term(chart: FermiChart, x, orientation: str = None) -> jnp.ndarray:
    """
    Laplacian of the distance to the sphere
    returns: (N-1)/(1+d) outside the ball, -(N-1)/(1-d) inside
    """
    orientation = orientation or chart.orientation
    model = FermiChart(chart.N, chart.radius, orientation)
    d = sphere_distance(model, x)
    if orientation == "outside":
        return (chart.N - 1) / (1.0 + d)
    if not is_traced(d) and np.any(to_host(d) >= 1.0):
        raise DomainError("interior curvature term needs d < 1")
    return -(chart.N - 1) / (1.0 - d)


def chart_metric(chart: FermiChart, y, h: float = 1e-6) -> jnp.ndarray:
    """
    Pull-back metric g_ij = J^T J with J from central differences of fermi_map
    """
    y = as_points(y, chart.N)
    eye = jnp.eye(chart.N)
    columns = [
        (_fermi_map(chart.sign, y + h * e) - _fermi_map(chart.sign, y - h * e))
        / (2.0 * h)
        for e in eye
    ]
    jac = jnp.stack(columns, axis=-1)
    return jnp.einsum("...ki,...kj->...ij", jac, jac)


def chart_samples(
    chart: FermiChart, radii: Sequence[float], num_directions: int = 9
) -> Tuple[jnp.ndarray, jnp.ndarray]:
    """
    Log-spaced radii times a fan of directions in the y1 > 0 half plane
    returns: (x, y) arrays of shape (len(radii), num_directions, N)
    """
    radii = np.asarray(radii, dtype=np.float64)
    phi = np.pi * (np.arange(num_directions) + 0.5) / num_directions
    fan = np.zeros((num_directions, chart.N))
    fan[:, 0] = np.sin(phi)
    fan[:, 1] = np.cos(phi)
    y = radii[:, None, None] * fan[None, :, :]
    return fermi_map(chart, y), jnp.asarray(y)


def fd_laplacian(field: Callable, x, h=None) -> jnp.ndarray:
    """
    Central second differences on the 2N-point stencil around each x
    returns: jnp.ndarray of Laplacian values, shape x.shape[:-1]
    """
    x = as_points(x)
    N = x.shape[-1]
    if h is None:
        h = dyadic_step(1e-4 * np.maximum(1.0, np.linalg.norm(to_host(x), axis=-1)))
    h = jnp.broadcast_to(jnp.asarray(h, dtype=jnp.float64), x.shape[:-1])
    eye = jnp.eye(N)
    offsets = jnp.concatenate([eye, -eye], axis=0)
    stencil = x[..., None, :] + h[..., None, None] * offsets
    center = field(x)
    neighbours = field(stencil)
    lap = (jnp.sum(neighbours, axis=-1) - 2.0 * N * center) / h ** 2
    if not is_traced(lap) and not np.all(np.isfinite(to_host(lap))):
        raise DomainError("finite-difference stencil left the domain of the field")
    return lap


def fd_gradient(field: Callable, x, h=None) -> jnp.ndarray:
    x = as_points(x)
    N = x.shape[-1]
    if h is None:
        h = dyadic_step(1e-6 * np.maximum(1.0, np.linalg.norm(to_host(x), axis=-1)))
    h = jnp.broadcast_to(jnp.asarray(h, dtype=jnp.float64), x.shape[:-1])
    eye = jnp.eye(N)
    plus = field(x[..., None, :] + h[..., None, None] * eye)
    minus = field(x[..., None, :] - h[..., None, None] * eye)
    return (plus - minus) / (2.0 * h[..., None])


def circle_point(tube: TubeSpec, sigma) -> jnp.ndarray:
    sigma = jnp.asarray(sigma, dtype=jnp.float64)
    plane = tube.circle_radius * jnp.stack([jnp.cos(sigma), jnp.sin(sigma)], axis=-1)
    rest = jnp.zeros(sigma.shape + (tube.N - 2,))
    return jnp.concatenate([plane, rest], axis=-1)


def _tube_coordinates(R: float, x: jnp.ndarray) -> Tuple[jnp.ndarray, jnp.ndarray]:
    rho = safe_norm(x[..., :2])
    off_plane = jnp.sum(x[..., 2:] ** 2, axis=-1)
    delta = jnp.sqrt((rho - R) ** 2 + off_plane)
    sigma = jnp.mod(jnp.arctan2(x[..., 1], x[..., 0]), 2.0 * jnp.pi)
    return delta, sigma


def tube_distance_projection(tube: TubeSpec, x) -> Tuple[jnp.ndarray, jnp.ndarray]:
    """
    Distance to the circle and parameter (angle) of the nearest point
    returns: (delta, sigma)
    """
    x = as_points(x, tube.N)
    delta, sigma = _tube_coordinates(tube.circle_radius, x)
    if not is_traced(delta):
        if np.any(to_host(delta) >= tube.circle_radius):
            raise DomainError(
                f"points at distance >= R={tube.circle_radius} "
                "have no unique projection"
            )
    return delta, sigma


def tube_distance(tube: TubeSpec, x) -> jnp.ndarray:
    return _tube_coordinates(tube.circle_radius, as_points(x, tube.N))[0]


def tube_chart_map(tube: TubeSpec, y) -> jnp.ndarray:
    """
    Normal parameterization of the tube: y = (y~, s) with s the arclength on the circle
    """
    y = as_points(y, tube.N)
    R = tube.circle_radius
    y1, rest, s = y[..., :1], y[..., 1 : tube.N - 1], y[..., tube.N - 1 :]
    plane = (R + y1) * jnp.concatenate([jnp.cos(s / R), jnp.sin(s / R)], axis=-1)
    return jnp.concatenate([plane, rest], axis=-1)


def tube_samples(
    tube: TubeSpec,
    deltas: Sequence[float],
    sigmas: Sequence[float],
    off_plane_only: bool = False,
) -> jnp.ndarray:
    """
    Sample points at given distances and base angles; normal directions are
    outward, inward, off-plane and diagonal (off-plane only if requested, which
    keeps tiny distances exact)
    returns: jnp.ndarray of shape (len(deltas) * len(sigmas) * num_directions, N)
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    sigmas = np.asarray(sigmas, dtype=np.float64)
    points = []
    for sigma in sigmas:
        base = np.zeros(tube.N)
        base[:2] = tube.circle_radius * np.array([np.cos(sigma), np.sin(sigma)])
        radial = np.zeros(tube.N)
        radial[:2] = [np.cos(sigma), np.sin(sigma)]
        normal = np.zeros(tube.N)
        normal[2] = 1.0
        directions = (
            (normal,)
            if off_plane_only
            else (radial, -radial, normal, (radial + normal) / np.sqrt(2.0))
        )
        for direction in directions:
            points.append(base[None, :] + deltas[:, None] * direction[None, :])
    return jnp.asarray(np.concatenate(points, axis=0))
