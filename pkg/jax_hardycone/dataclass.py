from collections import namedtuple
from typing import Callable

import jax.numpy as jnp
import numpy as np

# local imports
from .errors import DomainError
from .jax_utils import register_pytree_namedtuple


class CapSpec(namedtuple("CapSpec", ["N", "delta"])):
    """
    namedtuple class to store a geodesic cap {sigma in S^{N-1} : sigma.E1 > delta}
    delta = -1 stands for the whole sphere
    """

    def __new__(cls, N, delta):
        if int(N) != N or N < 3:
            raise DomainError(f"cap dimension N must be an integer >= 3, got {N}")
        if not -1.0 <= delta < 1.0:
            raise DomainError(f"cap aperture delta must lie in [-1, 1), got {delta}")
        return super(CapSpec, cls).__new__(cls, int(N), float(delta))

    @classmethod
    def hemisphere(cls, N):
        return cls(N, 0.0)

    @classmethod
    def sphere(cls, N):
        return cls(N, -1.0)

    @classmethod
    def from_angle(cls, N, theta0):
        if not 0.0 < theta0 < np.pi:
            raise DomainError(f"cap angle theta0 must lie in (0, pi), got {theta0}")
        return cls(N, float(np.cos(theta0)))

    @property
    def theta0(self) -> float:
        return float(np.arccos(self.delta))

    @property
    def is_sphere(self) -> bool:
        return self.delta == -1.0

    @property
    def is_hemisphere(self) -> bool:
        return self.delta == 0.0


class FermiChart(namedtuple("FermiChart", ["N", "radius", "orientation", "center"])):
    """
    namedtuple class to store the boundary chart of the unit sphere through 0
    inside: U = B_1(E1); outside: U = complement of the closed ball B_1(-E1)
    """

    def __new__(cls, N, radius=0.5, orientation="inside"):
        if orientation not in ("inside", "outside"):
            raise DomainError(
                f"orientation must be 'inside' or 'outside', got {orientation}"
            )
        if not 0.0 < radius <= 1.0:
            raise DomainError(f"chart radius must lie in (0, 1], got {radius}")
        sign = 1.0 if orientation == "inside" else -1.0
        center = tuple([sign] + [0.0] * (int(N) - 1))
        return super(FermiChart, cls).__new__(
            cls, int(N), float(radius), orientation, center
        )

    @property
    def sign(self) -> float:
        return 1.0 if self.orientation == "inside" else -1.0


class CircleWeight(
    namedtuple("CircleWeight", ["level", "amplitude", "order", "phase"])
):
    """
    q(sigma) = level - amplitude * |sin((sigma - phase) / 2)|**order on the circle
    """

    def __new__(cls, level=1.0, amplitude=0.0, order=2.0, phase=0.0):
        if order <= 0.0:
            raise DomainError(f"weight order must be positive, got {order}")
        return super(CircleWeight, cls).__new__(
            cls, float(level), float(amplitude), float(order), float(phase)
        )

    @classmethod
    def constant(cls, value):
        return cls(level=value, amplitude=0.0)

    def __call__(self, sigma):
        sigma = jnp.asarray(sigma, dtype=jnp.float64)
        if self.amplitude == 0.0:
            return jnp.full_like(sigma, self.level)
        return self.level - self.amplitude * jnp.abs(
            jnp.sin(0.5 * (sigma - self.phase))
        ) ** self.order

    @property
    def maximum(self) -> float:
        return self.level if self.amplitude >= 0.0 else self.level - self.amplitude


class TubeSpec(
    namedtuple("TubeSpec", ["N", "k", "circle_radius", "beta", "q"])
):
    """
    namedtuple class to store a tube of radius beta around a circle in the
    (x1, x2) plane, with the Hardy weight q on the circle
    """

    def __new__(cls, N, k=1, circle_radius=1.0, beta=0.1, q=None):
        if int(N) != N or N < 4:
            raise DomainError(f"tube ambient dimension N must be >= 4, got {N}")
        if not 1 <= k < N - 2:
            raise DomainError(
                f"submanifold dimension must satisfy 1 <= k < N-2, got k={k}"
            )
        if k != 1:
            raise DomainError("only circles (k = 1) are modelled")
        if not 0.0 < beta < circle_radius:
            raise DomainError(
                f"tube radius beta={beta} must lie in (0, R={circle_radius})"
            )
        if q is None:
            q = CircleWeight()
        if isinstance(q, CircleWeight) and q.maximum > 1.0:
            raise DomainError(f"weight q exceeds 1 (max {q.maximum})")
        return super(TubeSpec, cls).__new__(
            cls, int(N), int(k), float(circle_radius), float(beta), q
        )

    @property
    def normal_order(self) -> float:
        # (N-k-2)/2
        return 0.5 * (self.N - self.k - 2)


class HardyProblem(namedtuple("HardyProblem", ["N", "c", "s", "cap"])):
    """
    namedtuple class to store an instance of -Δu - c|x|^-2 u >= |x|^s u^p on a cone
    """

    def __new__(cls, N, c, s=0.0, cap=None):
        if cap is None:
            cap = CapSpec.hemisphere(N)
        if cap.N != N:
            raise DomainError(f"cap dimension {cap.N} differs from N={N}")
        if s > 2.0:
            raise DomainError(f"weight exponent s must be <= 2, got {s}")
        return super(HardyProblem, cls).__new__(cls, int(N), float(c), float(s), cap)


class RegimeFlags(namedtuple("RegimeFlags", ["c_above_lambda1", "c_at_most_mu"])):
    def __new__(cls, c_above_lambda1, c_at_most_mu):
        return super(RegimeFlags, cls).__new__(cls, c_above_lambda1, c_at_most_mu)


register_pytree_namedtuple(RegimeFlags)  # JAX pytree


class ExponentReport(
    namedtuple(
        "ExponentReport",
        ["lambda1", "mu", "alpha_minus", "p_critical", "q_critical", "flags"],
    )
):
    """
    namedtuple class to store cap eigenvalue, Hardy constant and critical exponents
    """

    def __new__(cls, lambda1, mu, alpha_minus, p_critical, q_critical, flags):
        return super(ExponentReport, cls).__new__(
            cls, lambda1, mu, alpha_minus, p_critical, q_critical, flags
        )


register_pytree_namedtuple(ExponentReport)  # JAX pytree


class CosinePowerProfile(
    namedtuple("CosinePowerProfile", ["base", "coefficient", "power"])
):
    """
    V(theta) = base + coefficient * max(cos theta, 0)**power
    """

    def __new__(cls, base, coefficient, power):
        return super(CosinePowerProfile, cls).__new__(
            cls, float(base), float(coefficient), float(power)
        )

    def __call__(self, theta):
        cos = jnp.clip(jnp.cos(theta), 0.0, None)
        return self.base + self.coefficient * cos ** self.power

    @property
    def bound(self) -> float:
        return self.base + max(self.coefficient, 0.0)


class AngularWeight(namedtuple("AngularWeight", ["pieces", "profile", "v_max"])):
    """
    namedtuple class to store an axisymmetric weight V(theta) on a cap:
    a sum of constants on [lo, hi) intervals plus an optional smooth profile
    """

    def __new__(cls, pieces=(), profile=None, v_max=None):
        pieces = tuple((float(lo), float(hi), float(v)) for lo, hi, v in pieces)
        for lo, hi, v in pieces:
            if v < 0.0:
                raise DomainError(f"weight value must be non-negative, got {v}")
            if not lo < hi:
                raise DomainError(f"weight interval [{lo}, {hi}) is empty")
        bound = sum(v for _, _, v in pieces)
        if profile is not None:
            bound += getattr(profile, "bound", 0.0)
        if v_max is None:
            v_max = bound
        if v_max < 0.0 or v_max < bound - 1e-14:
            raise DomainError(f"v_max={v_max} is below the weight bound {bound}")
        return super(AngularWeight, cls).__new__(cls, pieces, profile, float(v_max))

    @classmethod
    def zero(cls):
        return cls()

    def __call__(self, theta):
        theta = jnp.asarray(theta, dtype=jnp.float64)
        value = jnp.zeros_like(theta)
        for lo, hi, v in self.pieces:
            value = value + jnp.where((theta >= lo) & (theta < hi), v, 0.0)
        if self.profile is not None:
            value = value + self.profile(theta)
        return value


class BarrierSpec(namedtuple("BarrierSpec", ["N", "c", "a", "K", "chart"])):
    """
    namedtuple class to store the parameters of omega_{a,K}
    """

    def __new__(cls, N, c, a=0.0, K=0.0, chart=None):
        if N * N / 4.0 - c < 0.0:
            raise DomainError(f"c={c} exceeds N^2/4={N * N / 4.0}")
        if chart is not None and chart.N != N:
            raise DomainError(f"chart dimension {chart.N} differs from N={N}")
        return super(BarrierSpec, cls).__new__(
            cls, int(N), float(c), float(a), float(K), chart
        )

    @property
    def root(self) -> float:
        # sqrt(N^2/4 - c)
        return float(np.sqrt(self.N * self.N / 4.0 - self.c))


class TubeBarrierSpec(namedtuple("TubeBarrierSpec", ["tube", "a"])):
    def __new__(cls, tube, a=0.0):
        return super(TubeBarrierSpec, cls).__new__(cls, tube, float(a))


class ResidualReport(
    namedtuple(
        "ResidualReport",
        [
            "points",
            "closed_form",
            "fd",
            "ratios",
            "max_relative_mismatch",
            "verdict",
            "tolerance",
            "details",
        ],
    )
):
    """
    namedtuple class to store a residual certification: per-sample values and verdict
    """

    def __new__(
        cls,
        points,
        closed_form,
        fd,
        ratios,
        max_relative_mismatch,
        verdict,
        tolerance,
        details=None,
    ):
        return super(ResidualReport, cls).__new__(
            cls,
            points,
            closed_form,
            fd,
            ratios,
            max_relative_mismatch,
            verdict,
            tolerance,
            details if details is not None else {},
        )

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


class WeightIntegral(
    namedtuple("WeightIntegral", ["value", "divergent", "maxima", "orders"])
):
    """
    namedtuple class to store the integral of (1-q)^(-1/2) over the circle
    """

    def __new__(cls, value, divergent, maxima=(), orders=()):
        return super(WeightIntegral, cls).__new__(
            cls, value, divergent, tuple(maxima), tuple(orders)
        )


class RadialProblem(
    namedtuple(
        "RadialProblem",
        ["N", "mode_eigenvalue", "c", "r_min", "r_max", "f", "boundary"],
    )
):
    """
    namedtuple class to store the separated problem
    -(r^{N-1}u')'/r^{N-1} + (lambda - c) u / r^2 = f on (r_min, r_max)
    """

    def __new__(
        cls, N, mode_eigenvalue, c, r_min, r_max, f=None, boundary=(0.0, 0.0)
    ):
        if not 0.0 < r_min < r_max:
            raise DomainError(f"need 0 < r_min < r_max, got ({r_min}, {r_max})")
        return super(RadialProblem, cls).__new__(
            cls,
            int(N),
            float(mode_eigenvalue),
            float(c),
            float(r_min),
            float(r_max),
            f,
            (float(boundary[0]), float(boundary[1])),
        )


class EFCoefficients(namedtuple("EFCoefficients", ["shift", "mass", "rhs"])):
    """
    namedtuple class to store -psi'' + mass psi = rhs(t), u = r^-shift psi, t = -log r
    """

    def __new__(cls, shift, mass, rhs):
        return super(EFCoefficients, cls).__new__(cls, float(shift), float(mass), rhs)


class Grid1D(namedtuple("Grid1D", ["nodes", "values"])):
    """
    namedtuple class to store radial nodes (uniform in log r) and nodal values
    """

    def __new__(cls, nodes, values):
        return super(Grid1D, cls).__new__(cls, nodes, values)


register_pytree_namedtuple(Grid1D)  # JAX pytree


class PotentialField(namedtuple("PotentialField", ["b", "truncation"])):
    """
    namedtuple class to store a non-negative radial potential b and truncation level
    """

    def __new__(cls, b: Callable, truncation=None):
        return super(PotentialField, cls).__new__(cls, b, truncation)

    @classmethod
    def inverse_square(cls, c):
        return cls(lambda r: c / np.asarray(r) ** 2)

    @classmethod
    def zero(cls):
        return cls(lambda r: np.zeros_like(np.asarray(r, dtype=np.float64)))

    def truncated(self, k):
        return PotentialField(self.b, k)

    def __call__(self, r):
        values = np.asarray(self.b(np.asarray(r, dtype=np.float64)), dtype=np.float64)
        if self.truncation is not None:
            values = np.minimum(values, self.truncation)
        return values


class IterationTrace(
    namedtuple(
        "IterationTrace",
        [
            "nodes",
            "levels",
            "iterates",
            "inner_flags",
            "outer_flags",
            "inner_counts",
            "final_residual",
            "cauchy_gap",
        ],
    )
):
    """
    namedtuple class to store the monotone truncated iteration: one limit per level
    """

    def __new__(
        cls,
        nodes,
        levels,
        iterates,
        inner_flags,
        outer_flags,
        inner_counts,
        final_residual,
        cauchy_gap,
    ):
        return super(IterationTrace, cls).__new__(
            cls,
            nodes,
            levels,
            iterates,
            inner_flags,
            outer_flags,
            inner_counts,
            final_residual,
            cauchy_gap,
        )

    @property
    def all_monotone(self) -> bool:
        return all(all(flags) for flags in self.inner_flags) and all(self.outer_flags)


class APVerdict(
    namedtuple("APVerdict", ["nonnegative", "min_eigenvalue", "supersolution_margin"])
):
    def __new__(cls, nonnegative, min_eigenvalue, supersolution_margin):
        return super(APVerdict, cls).__new__(
            cls, nonnegative, min_eigenvalue, supersolution_margin
        )


class Zeta0Verdict(
    namedtuple(
        "Zeta0Verdict",
        ["divergent", "gamma", "expected_gamma", "r_squared", "r_mins", "gammas"],
    )
):
    """
    namedtuple class to store the fitted growth of zeta_0 and the divergence verdict
    """

    def __new__(cls, divergent, gamma, expected_gamma, r_squared, r_mins, gammas):
        return super(Zeta0Verdict, cls).__new__(
            cls, divergent, gamma, expected_gamma, r_squared, r_mins, gammas
        )


class CylinderProfile(
    namedtuple("CylinderProfile", ["radial", "axial", "rho_support", "s_support"])
):
    """
    namedtuple class to store a separable test profile w(y~, s) = A(|y~|) B(s)
    """

    def __new__(cls, radial, axial, rho_support, s_support):
        if not 0.0 < rho_support[0] < rho_support[1]:
            raise DomainError(f"radial support must avoid 0, got {rho_support}")
        return super(CylinderProfile, cls).__new__(
            cls, radial, axial, tuple(rho_support), tuple(s_support)
        )


class SweepConfig(
    namedtuple(
        "SweepConfig",
        [
            "N",
            "mode",
            "cap_delta",
            "tube_k",
            "circle_radius",
            "beta",
            "q_level",
            "q_amplitude",
            "q_order",
            "c_range",
            "p_range",
            "certify",
            "zeta0",
            "nodes_per_decade",
            "tolerance",
            "out",
            "plot",
        ],
    )
):
    """
    namedtuple class to store a dichotomy sweep over (c, p)
    """

    def __new__(
        cls,
        N=3,
        mode="cone",
        cap_delta=0.0,
        tube_k=1,
        circle_radius=1.0,
        beta=0.1,
        q_level=1.0,
        q_amplitude=0.0,
        q_order=2.0,
        c_range=(2.05, 2.25, 20),
        p_range=(3.0, 6.0, 20),
        certify=True,
        zeta0=True,
        nodes_per_decade=1024,
        tolerance=1e-6,
        out=None,
        plot=None,
    ):
        if mode not in ("cone", "tube"):
            raise DomainError(f"sweep mode must be 'cone' or 'tube', got {mode}")
        c_range = (float(c_range[0]), float(c_range[1]), int(c_range[2]))
        p_range = (float(p_range[0]), float(p_range[1]), int(p_range[2]))
        for name, (lo, hi, count) in (("c", c_range), ("p", p_range)):
            if count < 1 or hi < lo:
                raise DomainError(f"{name}-range {lo, hi, count} is empty")
        return super(SweepConfig, cls).__new__(
            cls,
            int(N),
            mode,
            float(cap_delta),
            int(tube_k),
            float(circle_radius),
            float(beta),
            float(q_level),
            float(q_amplitude),
            float(q_order),
            c_range,
            p_range,
            bool(certify),
            bool(zeta0),
            int(nodes_per_decade),
            float(tolerance),
            out,
            plot,
        )


class SweepCell(
    namedtuple(
        "SweepCell",
        [
            "c",
            "p",
            "lambda1",
            "mu",
            "alpha_minus",
            "p_critical",
            "cert_analytic",
            "cert_numeric",
            "zeta0_verdict",
            "max_residual",
        ],
    )
):
    """
    namedtuple class to store one (c, p) cell of a sweep; verdicts are
    'pass'/'fail', 'divergent'/'finite' or 'skipped:<reason>'
    """

    def __new__(
        cls,
        c,
        p,
        lambda1,
        mu,
        alpha_minus,
        p_critical,
        cert_analytic,
        cert_numeric,
        zeta0_verdict,
        max_residual,
    ):
        return super(SweepCell, cls).__new__(
            cls,
            c,
            p,
            lambda1,
            mu,
            alpha_minus,
            p_critical,
            cert_analytic,
            cert_numeric,
            zeta0_verdict,
            max_residual,
        )
