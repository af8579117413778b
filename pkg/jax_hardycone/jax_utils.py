import jax
import jax.numpy as jnp
import numpy as np

# local imports
from .errors import DomainError

jax.config.update("jax_enable_x64", True)


def register_pytree_namedtuple(cls: object):
    jax.tree_util.register_pytree_node(
        cls, lambda xs: (tuple(xs), None), lambda _, xs: cls(*xs)
    )


def is_traced(x) -> bool:
    return isinstance(x, jax.core.Tracer)


def as_points(x, N: int = None) -> jnp.ndarray:
    """
    Convert a point or a batch of points to a float64 array of shape (..., N)
    """
    x = jnp.asarray(x, dtype=jnp.float64)
    if x.ndim == 0:
        x = x[None]
    if N is not None and x.shape[-1] != N:
        raise DomainError(f"expected points in R^{N}, got shape {x.shape}")
    return x


def to_host(x) -> np.ndarray:
    return np.asarray(jax.device_get(x), dtype=np.float64)


def safe_norm(x: jnp.ndarray, axis: int = -1) -> jnp.ndarray:
    # gradient-safe at the origin
    sq = jnp.sum(x * x, axis=axis)
    positive = sq > 0.0
    return jnp.where(positive, jnp.sqrt(jnp.where(positive, sq, 1.0)), 0.0)
