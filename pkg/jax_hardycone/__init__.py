from . import jax_utils  # enables float64 before any array is built
from . import barriers, dataclass, errors, geometry, harness, solver, spectral
