import math

import numpy as onp
import pytest

# local imports
from jax_hardycone.dataclass import Grid1D, PotentialField, RadialProblem
from jax_hardycone.errors import CoercivityError, GridError, PreconditionError
from jax_hardycone.solver import monotone, radial


def test_log_grid():
    nodes = radial.log_grid(1e-3, 1.0, 100)
    assert nodes.size == 301
    onp.testing.assert_allclose(nodes[[0, -1]], [1e-3, 1.0], rtol=1e-14, err_msg="ends")
    onp.testing.assert_allclose(
        onp.diff(onp.log(nodes)), math.log(10.0) / 100, rtol=1e-9, err_msg="log step"
    )
    assert radial.log_grid(0.5, 0.6, 1).size == 3
    with pytest.raises(GridError):
        radial.log_grid(1.0, 0.5)
    with pytest.raises(GridError):
        radial.log_grid(0.0, 0.5)


def test_grid_checks():
    with pytest.raises(GridError):
        radial.discrete_hardy_minimum(3, 0.0, onp.array([0.1, 0.2, 0.5, 0.6]))
    with pytest.raises(GridError):
        radial.discrete_hardy_minimum(3, 0.0, onp.array([0.1, 0.2]))
    with pytest.raises(GridError):
        nodes = radial.log_grid(0.1, 0.5, 64)
        radial.rayleigh_min(PotentialField.zero(), nodes, 3, weight="cubic")


def test_ef_transform_mass():
    problem = RadialProblem(5, 4.0, 6.0, 0.1, 1.0, f=lambda r: onp.ones_like(r))
    coefficients = radial.ef_transform(problem)
    assert coefficients.shift == 1.5
    assert coefficients.mass == 2.25 + 4.0 - 6.0
    onp.testing.assert_allclose(
        coefficients.rhs(onp.array([0.0, 1.0])),
        [1.0, math.exp(-3.5)],
        rtol=1e-14,
        err_msg="r^{m+2} f",
    )


def test_radial_solve_harmonic():
    # u = 1/r solves -Δu = 0 in R^3 \ {0}
    problem = RadialProblem(3, 0.0, 0.0, 0.1, 1.0, boundary=(10.0, 1.0))
    grid = radial.radial_solve(problem)
    onp.testing.assert_allclose(
        grid.values, 1.0 / grid.nodes, rtol=1e-6, err_msg="1/r"
    )
    assert radial.discrete_residual(problem, grid) < 1e-10


def test_radial_solve_with_forcing():
    # u = A + B/r - r^2/6 solves -Δu = 1 in R^3
    exact = lambda r: 0.5 + 0.02 / r - r ** 2 / 6.0
    problem = RadialProblem(
        3,
        0.0,
        0.0,
        0.05,
        1.0,
        f=lambda r: onp.ones_like(r),
        boundary=(exact(0.05), exact(1.0)),
    )
    grid = radial.radial_solve(problem)
    onp.testing.assert_allclose(
        grid.values, exact(grid.nodes), rtol=1e-6, atol=1e-9, err_msg="Poisson"
    )
    assert radial.discrete_residual(problem, grid) < 1e-10


def test_radial_solve_with_hardy_potential():
    # hemisphere mode of R^3: r^s with s^2 + s + c - 2 = 0
    c = 2.2
    s = 0.5 * (-1.0 + math.sqrt(1.0 - 4.0 * (c - 2.0)))
    problem = RadialProblem(3, 2.0, c, 1e-3, 0.5, boundary=(1e-3 ** s, 0.5 ** s))
    grid = radial.radial_solve(problem)
    onp.testing.assert_allclose(
        grid.values, grid.nodes ** s, rtol=1e-6, err_msg="r^s"
    )
    assert radial.discrete_residual(problem, grid) < 1e-10


def test_radial_solve_rejects_supercritical_potential():
    problem = RadialProblem(3, 0.0, 1.0, 1e-3, 1.0, boundary=(1.0, 0.0))
    with pytest.raises(CoercivityError, match="mu"):
        radial.radial_solve(problem)


def test_quadratic_form_closed_form():
    # phi = r^{-1/2} sin(pi log(r/r0) / L): the form reduces to
    # (L/2) ((pi/L)^2 + 1/4 + lambda - c)
    r0, r1 = 1e-2, 1.0
    L = math.log(r1 / r0)
    phi = lambda r: r ** -0.5 * onp.sin(math.pi * onp.log(r / r0) / L)
    nodes = radial.log_grid(r0, r1)
    for mode_eigenvalue, c in ((0.0, 0.5), (2.0, 2.5), (2.0, 0.0)):
        exact = 0.5 * L * ((math.pi / L) ** 2 + 0.25 + mode_eigenvalue - c)
        value = radial.quadratic_form(
            PotentialField.inverse_square(c), phi, nodes, 3, mode_eigenvalue
        )
        onp.testing.assert_allclose(
            value, exact, rtol=1e-5, err_msg=f"lambda={mode_eigenvalue}, c={c}"
        )
    grid = Grid1D(nodes, phi(nodes))
    onp.testing.assert_allclose(
        radial.quadratic_form(PotentialField.zero(), grid, nodes),
        radial.quadratic_form(PotentialField.zero(), phi, nodes),
        rtol=1e-14,
        err_msg="grid and callable",
    )


def test_quadratic_form_needs_compact_support():
    nodes = radial.log_grid(0.1, 1.0, 64)
    with pytest.raises(PreconditionError):
        radial.quadratic_form(PotentialField.zero(), lambda r: onp.ones_like(r), nodes)


def test_rayleigh_min_matches_discrete_hardy_constant():
    for N, mode_eigenvalue in ((3, 0.0), (3, 2.0), (5, 0.0)):
        nodes = radial.log_grid(2.0 ** -12, 0.5, 512)
        onp.testing.assert_allclose(
            radial.rayleigh_min(PotentialField.zero(), nodes, N, mode_eigenvalue),
            radial.discrete_hardy_minimum(N, mode_eigenvalue, nodes),
            rtol=1e-8,
            err_msg=f"N={N}, lambda={mode_eigenvalue}",
        )


def test_shell_minima_decrease_toward_the_hardy_constant():
    shells = [(2.0 ** -j, 0.5) for j in (4, 8, 12)]
    for mode_eigenvalue, mu in ((0.0, 0.25), (2.0, 2.25)):
        rows = radial.shell_table(3, mode_eigenvalue, shells, nodes_per_decade=512)
        minima = [row[2] for row in rows]
        assert all(a > b for a, b in zip(minima, minima[1:]))
        assert minima[-1] > mu
        # the gap closes like (pi / log(r_max / r_min))^2
        gap = (math.pi / math.log(0.5 / 2.0 ** -12)) ** 2
        onp.testing.assert_allclose(
            minima[-1] - mu, gap, rtol=1e-3, err_msg=f"lambda={mode_eigenvalue}"
        )


def test_improved_weight_keeps_the_form_positive():
    rows = radial.shell_table(
        3,
        2.0,
        [(2.0 ** -j, 0.5) for j in (4, 8)],
        PotentialField.inverse_square(2.25),
        weight="log_improved",
        nodes_per_decade=512,
    )
    assert all(row[2] > 0.0 for row in rows)


def test_ap_check():
    nodes = radial.log_grid(1e-3, 0.5, 512)
    u = Grid1D(nodes, nodes ** -0.5)
    verdict = radial.ap_check(u, lambda r: 2.0 / r ** 2, 3, 2.0)
    assert verdict.nonnegative
    assert verdict.min_eigenvalue > 0.0
    assert verdict.supersolution_margin > 0.0
    with pytest.raises(PreconditionError):
        radial.ap_check(u, lambda r: 3.0 / r ** 2, 3, 2.0)
    with pytest.raises(PreconditionError):
        radial.ap_check(Grid1D(nodes, -u.values), lambda r: 2.0 / r ** 2, 3, 2.0)


def test_ap_check_on_the_monotone_limit():
    # -Δu = 2u/r^2 + 1 with u^p <= 1 makes u a supersolution against 2/r^2 + u^{p-1}
    p = 3.0
    problem = RadialProblem(3, 2.0, 2.0, 1e-2, 0.5, f=lambda r: onp.ones_like(r))
    trace = monotone.monotone_truncated_solve(
        problem, PotentialField.inverse_square(problem.c), nodes_per_decade=256
    )
    u = Grid1D(trace.nodes, trace.iterates[-1])
    assert onp.max(u.values) ** p < 1.0
    V = lambda r: 2.0 / r ** 2 + onp.interp(r, u.nodes, u.values) ** (p - 1.0)
    verdict = radial.ap_check(u, V, 3, 2.0)
    assert verdict.nonnegative
    assert verdict.min_eigenvalue > 0.0
    assert verdict.supersolution_margin > 0.0


if __name__ == "__main__":
    test_log_grid()
    test_grid_checks()
    test_ef_transform_mass()
    test_radial_solve_harmonic()
    test_radial_solve_with_forcing()
    test_radial_solve_with_hardy_potential()
    test_radial_solve_rejects_supercritical_potential()
    test_quadratic_form_closed_form()
    test_quadratic_form_needs_compact_support()
    test_rayleigh_min_matches_discrete_hardy_constant()
    test_shell_minima_decrease_toward_the_hardy_constant()
    test_improved_weight_keeps_the_form_positive()
    test_ap_check()
    test_ap_check_on_the_monotone_limit()
