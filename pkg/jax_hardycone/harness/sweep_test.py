import math

import numpy as onp

# local imports
from jax_hardycone.dataclass import CapSpec, SweepConfig
from jax_hardycone.harness import sweep
from jax_hardycone.spectral import cap_lambda1


def test_cone_sweep_locates_the_critical_exponent():
    config = SweepConfig(
        N=3, c_range=(2.1, 2.25, 2), p_range=(3.0, 6.0, 4), nodes_per_decade=256
    )
    cells = sweep.run_sweep(config, workers=2)
    assert len(cells) == 8
    assert [(cell.c, cell.p) for cell in cells] == sorted(
        (cell.c, cell.p) for cell in cells
    )
    top = [cell for cell in cells if cell.c == 2.25]
    onp.testing.assert_allclose(
        [cell.p_critical for cell in top], 5.0, err_msg="p_critical"
    )
    assert [cell.cert_analytic for cell in top] == ["pass", "pass", "fail", "fail"]
    assert [cell.zeta0_verdict for cell in top] == [
        "finite",
        "finite",
        "divergent",
        "divergent",
    ]
    low = [cell for cell in cells if cell.c == 2.1]
    assert all(cell.cert_analytic == "pass" for cell in low)
    assert all(cell.zeta0_verdict == "finite" for cell in low)

    boundary = sweep.dichotomy_boundary(cells)
    assert boundary[2.25] == (4.0, 5.0)
    assert boundary[2.1][0] == 6.0 and math.isnan(boundary[2.1][1])


def test_cells_outside_the_regime_are_skipped():
    config = SweepConfig(
        N=3, c_range=(1.5, 3.0, 2), p_range=(3.0, 3.0, 1), nodes_per_decade=256
    )
    below, above = sweep.run_sweep(config, workers=1)
    # c < lambda1 and c > mu: no exponent report, the whole cell is skipped
    for cell in (below, above):
        assert cell.cert_analytic.startswith("skipped:DomainError")
        assert cell.zeta0_verdict == cell.cert_analytic
        assert math.isnan(cell.mu) and math.isnan(cell.max_residual)


def test_exterior_certifier_needs_the_hemisphere():
    lambda1 = cap_lambda1(CapSpec(3, 0.2))
    c = lambda1 + 0.1
    config = SweepConfig(
        N=3,
        cap_delta=0.2,
        c_range=(c, c, 1),
        p_range=(3.0, 3.0, 1),
        nodes_per_decade=256,
    )
    (cell,) = sweep.run_sweep(config, workers=1)
    assert cell.cert_analytic == "skipped:exterior barrier needs the hemisphere"
    assert cell.zeta0_verdict == "finite"
    onp.testing.assert_allclose(cell.lambda1, lambda1, err_msg="cap eigenvalue")


def test_disabled_stages():
    config = SweepConfig(
        N=3, c_range=(2.25, 2.25, 1), p_range=(4.0, 4.0, 1), certify=False, zeta0=False
    )
    (cell,) = sweep.run_sweep(config, workers=1)
    assert cell.cert_analytic == cell.cert_numeric == "skipped:disabled"
    assert cell.zeta0_verdict == "skipped:disabled"
    onp.testing.assert_allclose(cell.alpha_minus, 0.5, err_msg="alpha_minus")


def test_tube_sweep_uses_the_normal_reduction():
    config = SweepConfig(N=5, mode="tube", p_range=(2.0, 3.0, 2), nodes_per_decade=256)
    cs, ps = sweep.sweep_axes(config)
    onp.testing.assert_allclose(cs, [1.0], err_msg="m^2 max q")
    first, second = sweep.run_sweep(config, workers=2)
    onp.testing.assert_allclose(first.p_critical, 3.0, err_msg="tube exponent")
    assert first.cert_analytic == "pass" and first.zeta0_verdict == "finite"
    assert second.cert_analytic == "fail" and second.zeta0_verdict == "divergent"


def test_full_grid_brackets_the_critical_exponent_on_every_row():
    # p_critical = 1 + 2/alpha stays inside (3, 6) only for c > 2.24
    config = SweepConfig(
        N=3, c_range=(2.241, 2.25, 20), p_range=(3.0, 6.0, 20), zeta0=False
    )
    cells = sweep.run_sweep(config)
    assert len(cells) == 400
    step = 3.0 / 19.0
    boundary = sweep.dichotomy_boundary(cells)
    assert len(boundary) == 20
    for c, (last_pass, first_fail) in boundary.items():
        (p_critical,) = {cell.p_critical for cell in cells if cell.c == c}
        assert 5.0 <= p_critical < 6.0, f"c={c}"
        assert last_pass < p_critical <= first_fail, f"c={c}: {p_critical}"
        onp.testing.assert_allclose(
            first_fail - last_pass, step, rtol=1e-9, err_msg=f"c={c}"
        )


if __name__ == "__main__":
    test_cone_sweep_locates_the_critical_exponent()
    test_cells_outside_the_regime_are_skipped()
    test_exterior_certifier_needs_the_hemisphere()
    test_disabled_stages()
    test_tube_sweep_uses_the_normal_reduction()
    test_full_grid_brackets_the_critical_exponent_on_every_row()
