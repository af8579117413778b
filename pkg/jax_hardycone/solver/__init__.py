from . import monotone, radial, scaled, zeta0
from .monotone import monotone_truncated_solve
from .radial import (
    ap_check,
    discrete_residual,
    ef_transform,
    log_grid,
    quadratic_form,
    radial_solve,
    rayleigh_min,
)
from .scaled import flat_quotient, hardy_family_quotients, scaled_test_quotient
from .zeta0 import zeta0_divergence, zeta0_growth, zeta0_profile
