import logging
import math

import numpy as onp
import pytest

# local imports
from jax_hardycone import spectral
from jax_hardycone.dataclass import CapSpec, HardyProblem
from jax_hardycone.errors import DomainError


def test_hemisphere_eigenvalue():
    for N in (3, 4, 5, 7):
        onp.testing.assert_allclose(
            spectral.cap_eigenvalue(N, 0.5 * math.pi),
            N - 1.0,
            rtol=0,
            atol=1e-8,
            err_msg=f"lambda1 of the hemisphere, N={N}",
        )


def test_shooting_matches_dense_oracle():
    for N, theta0 in ((3, 1.0), (4, 2.2), (5, 0.6)):
        onp.testing.assert_allclose(
            spectral.cap_eigenvalue(N, theta0),
            spectral.cap_eigenvalue_dense(N, theta0),
            rtol=1e-6,
            err_msg=f"N={N}, theta0={theta0}",
        )


def test_eigenvalue_decreases_with_aperture():
    thetas = onp.linspace(0.5, 2.5, 6)
    values = [spectral.cap_eigenvalue(3, theta) for theta in thetas]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_constant_weight_shifts_the_eigenvalue():
    N = 4
    base = spectral.cap_eigenvalue(N, 1.2)
    for weight in (
        spectral.constant_weight(0.75),
        spectral.indicator_weight(0.0, math.pi, 0.75),
    ):
        onp.testing.assert_allclose(
            spectral.cap_eigenvalue(N, 1.2, weight),
            base - 0.75,
            atol=1e-8,
            err_msg=f"{weight}",
        )


def test_hemisphere_eigenfunction_is_cosine():
    theta, phi = spectral.cap_eigenfunction(3, 0.5 * math.pi, 2.0)
    onp.testing.assert_allclose(phi, onp.cos(theta), atol=1e-7, err_msg="cos(theta)")
    assert theta[0] == 0.0 and phi[0] == 1.0


def test_cap_lambda1_closed_forms():
    assert spectral.cap_lambda1(CapSpec.sphere(5)) == 0.0
    assert spectral.cap_lambda1(CapSpec.hemisphere(5)) == 4.0
    onp.testing.assert_allclose(
        spectral.cap_lambda1(CapSpec.from_angle(3, 1.0)),
        spectral.cap_eigenvalue(3, 1.0),
        rtol=1e-9,
        err_msg="generic cap",
    )


def test_hardy_constants():
    for N in range(3, 9):
        hemisphere = spectral.cap_lambda1(CapSpec.hemisphere(N))
        assert spectral.hardy_constant(N, hemisphere) == N * N / 4.0
        sphere = spectral.hardy_constant(N, spectral.cap_lambda1(CapSpec.sphere(N)))
        assert sphere == (N - 2) ** 2 / 4.0


def test_critical_exponent_at_the_hardy_constant():
    for N in range(3, 9):
        for cap in (CapSpec.sphere(N), CapSpec.hemisphere(N)):
            lambda1 = spectral.cap_lambda1(cap)
            mu = spectral.hardy_constant(N, lambda1)
            report = spectral.exponent_report(HardyProblem(N, mu, cap=cap))
            onp.testing.assert_allclose(
                report.p_critical,
                (N + 2.0) / (N - 2.0),
                rtol=0,
                atol=1e-12,
                err_msg=f"N={N}, {cap}",
            )
            assert report.flags.c_above_lambda1 and report.flags.c_at_most_mu


def test_exponent_report_examples():
    report = spectral.exponent_report(
        HardyProblem(3, 2.25, cap=CapSpec.hemisphere(3))
    )
    onp.testing.assert_allclose(report.alpha_minus, 0.5, err_msg="alpha_minus")
    onp.testing.assert_allclose(report.p_critical, 5.0, err_msg="p_critical")
    report = spectral.exponent_report(HardyProblem(4, 1.0, cap=CapSpec.sphere(4)))
    onp.testing.assert_allclose(report.p_critical, 3.0, err_msg="punctured ball")
    weighted = spectral.exponent_report(
        HardyProblem(3, 2.25, s=1.0, cap=CapSpec.hemisphere(3))
    )
    onp.testing.assert_allclose(weighted.q_critical, 3.0, err_msg="weighted exponent")


def test_nonexistence_regime_is_rejected():
    with pytest.raises(DomainError, match="mu"):
        spectral.exponent_report(HardyProblem(3, 3.0, cap=CapSpec.hemisphere(3)))
    # rounding above mu is absorbed
    mu = 2.25
    onp.testing.assert_allclose(
        spectral.alpha_minus(3, mu * (1.0 + 1e-15), 2.0), 0.5, err_msg="tolerance"
    )
    with pytest.raises(DomainError):
        spectral.critical_exponent(spectral.alpha_minus(3, 2.0, 2.0))
    with pytest.raises(DomainError):
        spectral.critical_exponent(0.5, s=2.0)


def test_tube_critical_exponent():
    for N, k in ((5, 1), (6, 1), (7, 2)):
        onp.testing.assert_allclose(
            spectral.tube_critical_exponent(N, k),
            (N - k + 2.0) / (N - k - 2.0),
            rtol=0,
            atol=1e-12,
            err_msg=f"N={N}, k={k}",
        )
    # a smaller weight maximum raises the threshold
    assert spectral.tube_critical_exponent(5, 1, 0.5) > 3.0
    with pytest.raises(DomainError):
        spectral.tube_critical_exponent(4, 2)


def test_lower_bound_exponent():
    assert spectral.lower_bound_exponent(5, 0.0) == 0.0
    onp.testing.assert_allclose(
        spectral.lower_bound_exponent(4, 3.0), 1.0, err_msg="hemisphere mode"
    )
    onp.testing.assert_allclose(
        spectral.potential_growth_exponent(4, 3.0, 2.0), 3.0, err_msg="growth"
    )
    with pytest.raises(DomainError):
        spectral.lower_bound_exponent(3, -1.0)


def test_perturbed_cap_gap():
    N, c, p = 3, 1.5, 3.0
    onp.testing.assert_allclose(
        spectral.perturbed_cap_gap(N, 0.0, c, p, 0.0, 1.0),
        0.0,
        atol=1e-8,
        err_msg="unperturbed hemisphere",
    )
    assert spectral.perturbed_cap_gap(N, 0.0, c, p, 0.1, 1.0) < 0.0
    # a smaller cap has a larger eigenvalue
    assert spectral.perturbed_cap_gap(N, 0.2, c, p, 0.0, 1.0) > 0.0


def test_shrunken_cap_weight_margin():
    weight = spectral.shrunken_cap_weight(1.0, 0.1, 2.0, 1.0)
    assert float(weight(0.5)) == pytest.approx(1.2)
    assert float(weight(0.95)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        spectral.shrunken_cap_weight(1.0, 0.1, 2.0, 1.0, margin=1.5)


def test_small_caps():
    # first zeros of J_0 and J_2
    cases = ((3, 0.05, 2.404826), (3, 0.1, 2.404826), (7, 0.1, 5.135622))
    for N, theta0, bessel_zero in cases:
        value = spectral.cap_eigenvalue(N, theta0)
        onp.testing.assert_allclose(
            value,
            spectral.cap_eigenvalue_dense(N, theta0),
            rtol=1e-6,
            err_msg=f"N={N}, theta0={theta0}",
        )
        onp.testing.assert_allclose(
            value * theta0 ** 2, bessel_zero ** 2, rtol=1e-2, err_msg="flat limit"
        )


def test_shooting_matches_dense_oracle_on_random_caps():
    rng = onp.random.default_rng(7)
    for N, theta0 in zip(rng.integers(3, 8, size=20), rng.uniform(0.4, 2.6, size=20)):
        onp.testing.assert_allclose(
            spectral.cap_eigenvalue(int(N), theta0),
            spectral.cap_eigenvalue_dense(int(N), theta0),
            rtol=1e-6,
            err_msg=f"N={N}, theta0={theta0}",
        )


def test_eigenvalue_decreases_to_the_hemisphere_value():
    for N in (3, 5):
        deltas = (0.2, 0.1, 0.05, 0.02, 0.01)
        values = [spectral.cap_eigenvalue(N, math.acos(delta)) for delta in deltas]
        assert all(a > b for a, b in zip(values, values[1:])), f"N={N}: {values}"
        assert values[-1] > N - 1.0
        onp.testing.assert_allclose(values[-1], N - 1.0, rtol=5e-2, err_msg=f"N={N}")


def test_alpha_minus_solves_the_quadratic():
    for N in (3, 4, 6):
        for lambda1 in (0.0, N - 1.0, 1.3):
            mu = spectral.hardy_constant(N, lambda1)
            for c in onp.linspace(lambda1 + 0.1, mu, 5):
                alpha = spectral.alpha_minus(N, c, lambda1)
                residual = alpha * alpha - (N - 2) * alpha + c - lambda1
                assert abs(residual) <= 1e-10, f"N={N} lambda1={lambda1} c={c}"


def test_weighted_exponent_degenerates_at_s_two(caplog):
    problem = HardyProblem(3, 2.25, s=2.0, cap=CapSpec.hemisphere(3))
    with caplog.at_level(logging.INFO, logger="jax_hardycone.spectral"):
        report = spectral.exponent_report(problem)
    assert report.q_critical == 1.0
    assert "q_critical degenerates" in caplog.text


if __name__ == "__main__":
    test_hemisphere_eigenvalue()
    test_shooting_matches_dense_oracle()
    test_eigenvalue_decreases_with_aperture()
    test_constant_weight_shifts_the_eigenvalue()
    test_hemisphere_eigenfunction_is_cosine()
    test_cap_lambda1_closed_forms()
    test_hardy_constants()
    test_critical_exponent_at_the_hardy_constant()
    test_exponent_report_examples()
    test_nonexistence_regime_is_rejected()
    test_tube_critical_exponent()
    test_lower_bound_exponent()
    test_perturbed_cap_gap()
    test_shrunken_cap_weight_margin()
    test_small_caps()
    test_shooting_matches_dense_oracle_on_random_caps()
    test_eigenvalue_decreases_to_the_hemisphere_value()
    test_alpha_minus_solves_the_quadratic()
