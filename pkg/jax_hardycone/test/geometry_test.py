import jax.numpy as jnp
import numpy as onp
import pytest

# local imports
from jax_hardycone import geometry
from jax_hardycone.dataclass import FermiChart, TubeSpec
from jax_hardycone.errors import DomainError


def _half_ball(rng, count, N, radius):
    y = rng.normal(size=(count, N))
    y[:, 0] = onp.abs(y[:, 0])
    y *= (radius * rng.uniform(0.05, 1.0, size=count) / onp.linalg.norm(y, axis=1))[
        :, None
    ]
    return y


def test_fermi_map_inverse_round_trip():
    rng = onp.random.default_rng(1)
    for orientation in ("inside", "outside"):
        for N in (3, 5):
            chart = FermiChart(N, 0.5, orientation)
            y = _half_ball(rng, 1000, N, 0.45)
            back = geometry.fermi_inverse(chart, geometry.fermi_map(chart, y))
            onp.testing.assert_allclose(
                back, y, rtol=0, atol=1e-12, err_msg=f"{orientation} N={N}"
            )


def test_fermi_map_distance_is_first_coordinate():
    rng = onp.random.default_rng(2)
    N = 4
    y = _half_ball(rng, 40, N, 0.45)
    for orientation in ("inside", "outside"):
        chart = FermiChart(N, 0.5, orientation)
        x = onp.asarray(geometry.fermi_map(chart, y))
        to_center = onp.linalg.norm(x - onp.asarray(chart.center), axis=1)
        exact = 1.0 - to_center if orientation == "inside" else to_center - 1.0
        onp.testing.assert_allclose(
            exact, y[:, 0], rtol=0, atol=1e-12, err_msg="distance to the sphere"
        )
        onp.testing.assert_allclose(
            geometry.sphere_distance(chart, x),
            y[:, 0],
            rtol=0,
            atol=1e-13,
            err_msg="sphere_distance",
        )


def test_fermi_map_normal_axis():
    chart = FermiChart(3, 0.5, "inside")
    t = onp.array([0.0, 1e-9, 0.1, 0.3])
    y = onp.zeros((4, 3))
    y[:, 0] = t
    onp.testing.assert_allclose(
        geometry.fermi_map(chart, y), y, rtol=0, atol=0, err_msg="F(t, 0) = t E1"
    )


def test_fermi_map_rejects_points_outside_the_chart():
    chart = FermiChart(3, 0.5)
    with pytest.raises(DomainError):
        geometry.fermi_map(chart, [0.4, 0.4, 0.0])
    with pytest.raises(DomainError):
        geometry.fermi_map(chart, [-0.1, 0.0, 0.0])


def test_curvature_term_matches_laplacian_of_distance():
    rng = onp.random.default_rng(3)
    N = 3
    y = _half_ball(rng, 12, N, 0.3)
    y[:, 0] += 0.05
    for orientation in ("inside", "outside"):
        chart = FermiChart(N, 0.5, orientation)
        x = geometry.fermi_map(chart, y)
        fd = geometry.fd_laplacian(lambda z: geometry.sphere_distance(chart, z), x)
        onp.testing.assert_allclose(
            fd,
            geometry.curvature_term(chart, x),
            rtol=1e-5,
            err_msg=f"Laplacian of d, {orientation}",
        )


def test_chart_metric_is_orthogonal_in_the_normal_direction():
    rng = onp.random.default_rng(4)
    chart = FermiChart(4, 0.5, "outside")
    y = _half_ball(rng, 10, 4, 0.4)
    g = onp.asarray(geometry.chart_metric(chart, y))
    onp.testing.assert_allclose(g[:, 0, 0], 1.0, atol=1e-7, err_msg="g_11")
    onp.testing.assert_allclose(g[:, 0, 1:], 0.0, atol=1e-7, err_msg="g_1j")


def test_chart_samples_shape():
    chart = FermiChart(3, 0.5, "outside")
    x, y = geometry.chart_samples(chart, [0.25, 0.125], num_directions=5)
    assert x.shape == (2, 5, 3)
    onp.testing.assert_allclose(
        onp.linalg.norm(onp.asarray(y), axis=-1),
        [[0.25] * 5, [0.125] * 5],
        err_msg="sample radii",
    )
    assert onp.all(onp.asarray(y)[..., 0] > 0.0)


def test_fd_laplacian_and_gradient_on_polynomials():
    rng = onp.random.default_rng(5)
    x = rng.uniform(-1.0, 1.0, size=(20, 4))
    a = onp.array([1.0, -2.0, 0.5, 3.0])
    lap = geometry.fd_laplacian(lambda z: jnp.sum(z * z, axis=-1), x)
    onp.testing.assert_allclose(lap, 8.0, rtol=1e-5, err_msg="Laplacian of |x|^2")
    grad = geometry.fd_gradient(lambda z: z @ a, x)
    onp.testing.assert_allclose(
        grad, onp.broadcast_to(a, x.shape), rtol=1e-6, err_msg="gradient of a.x"
    )


def test_dyadic_step_is_a_power_of_two():
    h = geometry.dyadic_step([3e-4, 1e-3, 0.3])
    onp.testing.assert_allclose(
        onp.log2(h), onp.round(onp.log2(h)), atol=0, err_msg="exponents"
    )
    onp.testing.assert_allclose(h, [2.0 ** -12, 2.0 ** -10, 0.25], err_msg="values")


def test_tube_chart_map_distance_and_projection():
    rng = onp.random.default_rng(6)
    tube = TubeSpec(5, beta=0.1, circle_radius=2.0)
    y = rng.uniform(-0.05, 0.05, size=(30, 5))
    y[:, -1] = rng.uniform(0.2, 12.0, size=30)
    x = geometry.tube_chart_map(tube, y)
    delta, sigma = geometry.tube_distance_projection(tube, x)
    onp.testing.assert_allclose(
        delta, onp.linalg.norm(y[:, :-1], axis=1), rtol=1e-10, err_msg="delta"
    )
    onp.testing.assert_allclose(
        sigma,
        onp.mod(y[:, -1] / 2.0, 2.0 * onp.pi),
        rtol=0,
        atol=1e-12,
        err_msg="sigma",
    )


def test_tube_projection_rejects_the_axis():
    tube = TubeSpec(4)
    with pytest.raises(DomainError):
        geometry.tube_distance_projection(tube, onp.zeros(4))


def test_tube_samples_distances():
    tube = TubeSpec(4, beta=0.2)
    deltas = onp.array([1e-1, 1e-3, 1e-9])
    sigmas = onp.array([0.0, 1.0])
    x = geometry.tube_samples(tube, deltas, sigmas)
    assert x.shape == (2 * 4 * 3, 4)
    exact = geometry.tube_samples(tube, deltas, sigmas, off_plane_only=True)
    onp.testing.assert_allclose(
        geometry.tube_distance(tube, exact),
        onp.tile(deltas, 2),
        rtol=1e-12,
        err_msg="off-plane distances",
    )
    onp.testing.assert_allclose(
        geometry.circle_point(tube, 0.5)[:2],
        [onp.cos(0.5), onp.sin(0.5)],
        err_msg="circle point",
    )


def test_chart_is_close_to_the_identity():
    rng = onp.random.default_rng(7)
    for orientation in ("inside", "outside"):
        for N in (3, 4):
            chart = FermiChart(N, 0.5, orientation)
            y = _half_ball(rng, 50, N, 0.45)
            rho = onp.linalg.norm(y, axis=1)
            g = onp.asarray(geometry.chart_metric(chart, y))
            excess = onp.abs(g - onp.eye(N)).max(axis=(1, 2))
            assert onp.all(excess <= 3.0 * rho), f"{orientation} N={N}"
            x = onp.asarray(geometry.fermi_map(chart, y))
            stretch = onp.abs(onp.linalg.norm(x, axis=1) - rho)
            assert onp.all(stretch <= rho ** 2), f"{orientation} N={N}"


def test_fermi_map_along_the_sphere():
    s = onp.array([0.05, 0.2, 0.4])
    y = onp.zeros((3, 3))
    y[:, 1] = s
    for orientation in ("inside", "outside"):
        x = geometry.fermi_map(FermiChart(3, 0.5, orientation), y)
        onp.testing.assert_allclose(
            onp.linalg.norm(onp.asarray(x), axis=1),
            2.0 * onp.sin(0.5 * s),
            rtol=1e-14,
            err_msg=f"chord length, {orientation}",
        )


def test_point_is_projection_plus_distance_times_gradient():
    rng = onp.random.default_rng(8)
    N = 4
    y = _half_ball(rng, 20, N, 0.4)
    y[:, 0] += 0.02
    for orientation in ("inside", "outside"):
        chart = FermiChart(N, 0.5, orientation)
        x = onp.asarray(geometry.fermi_map(chart, y))
        base = y.copy()
        base[:, 0] = 0.0
        sigma = onp.asarray(geometry.fermi_map(chart, base))
        grad = onp.asarray(
            geometry.fd_gradient(lambda z: geometry.sphere_distance(chart, z), x)
        )
        onp.testing.assert_allclose(
            sigma + y[:, :1] * grad, x, rtol=0, atol=1e-8, err_msg=orientation
        )

    tube = TubeSpec(5, beta=0.1, circle_radius=2.0)
    deltas = onp.array([0.08, 0.01, 1e-3])
    sigmas = onp.array([0.3, 2.0, 5.0])
    x = onp.asarray(geometry.tube_samples(tube, deltas, sigmas))
    delta, angle = geometry.tube_distance_projection(tube, x)
    distance = lambda z: geometry.tube_distance(tube, z)
    grad = onp.asarray(geometry.fd_gradient(distance, x))
    onp.testing.assert_allclose(
        onp.asarray(geometry.circle_point(tube, angle))
        + onp.asarray(delta)[:, None] * grad,
        x,
        rtol=0,
        atol=1e-8,
        err_msg="tube",
    )


def test_fd_laplacian_of_the_fundamental_solution():
    rng = onp.random.default_rng(9)
    for N in (3, 4, 5):
        x = rng.normal(size=(20, N))
        x *= (rng.uniform(0.5, 2.0, size=20) / onp.linalg.norm(x, axis=1))[:, None]
        r = onp.linalg.norm(x, axis=1)
        lap = geometry.fd_laplacian(
            lambda z: jnp.sum(z * z, axis=-1) ** (1.0 - 0.5 * N), x
        )
        onp.testing.assert_allclose(
            onp.asarray(lap) * r ** N, 0.0, atol=1e-5, err_msg=f"N={N}"
        )


if __name__ == "__main__":
    test_fermi_map_inverse_round_trip()
    test_fermi_map_distance_is_first_coordinate()
    test_fermi_map_normal_axis()
    test_fermi_map_rejects_points_outside_the_chart()
    test_curvature_term_matches_laplacian_of_distance()
    test_chart_metric_is_orthogonal_in_the_normal_direction()
    test_chart_samples_shape()
    test_fd_laplacian_and_gradient_on_polynomials()
    test_dyadic_step_is_a_power_of_two()
    test_tube_chart_map_distance_and_projection()
    test_tube_projection_rejects_the_axis()
    test_tube_samples_distances()
    test_chart_is_close_to_the_identity()
    test_fermi_map_along_the_sphere()
    test_point_is_projection_plus_distance_times_gradient()
    test_fd_laplacian_of_the_fundamental_solution()
