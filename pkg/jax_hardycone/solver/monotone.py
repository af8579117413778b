import logging
from collections import namedtuple
from functools import partial
from typing import Sequence

import jax
import jax.numpy as jnp
import numpy as np

# local imports
from ..dataclass import Grid1D, IterationTrace, PotentialField, RadialProblem
from ..errors import (
    NONEXISTENCE_NOTE,
    CoercivityError,
    ConvergenceError,
    PreconditionError,
)
from ..jax_utils import register_pytree_namedtuple, to_host
from .radial import (
    NODES_PER_DECADE,
    _forcing,
    _shift,
    assemble,
    discrete_residual,
    log_grid,
    min_eigenvalue,
)

logger = logging.getLogger(__name__)

DEFAULT_SCHEDULE = tuple(2.0 ** j for j in range(21))
INNER_TOL = 1e-10
MAX_INNER = 10_000
MONOTONE_TOL = 1e-12


class _InnerIterand(
    namedtuple("_InnerIterand", ["step", "psi", "gap", "flags", "status"])
):
    """
    namedtuple class to store the state of v_n <- solve(-Δv_n = b_k v_{n-1} + f)
    """

    def __new__(cls, step, psi, gap, flags, status):
        return super(_InnerIterand, cls).__new__(cls, step, psi, gap, flags, status)


register_pytree_namedtuple(_InnerIterand)  # JAX pytree


@partial(jax.jit, static_argnums=(5,))
def _inner_iteration(lower, diag, upper, forcing, coupling, max_iter, tol, weight):
    """
    Fixed-point iteration on interior psi values with a fixed tridiagonal operator
    coupling: r^2 b_k per interior node; weight: r^-m, so gaps are measured in u
    """

    def solve(rhs):
        return jax.lax.linalg.tridiagonal_solve(lower, diag, upper, rhs[:, None])[:, 0]

    psi0 = solve(forcing)
    flags = jnp.zeros(max_iter, dtype=bool)

    def cond_fn(iterand):
        return (iterand.gap > tol) & jnp.equal(iterand.status, 0)

    def body_fn(iterand):
        psi = solve(forcing + coupling * iterand.psi)
        change = (psi - iterand.psi) * weight
        scale = jnp.maximum(1.0, jnp.max(jnp.abs(psi * weight)))
        monotone = jnp.min(change) >= -MONOTONE_TOL * scale
        step = iterand.step + 1
        gap = jnp.max(jnp.abs(change)) / scale
        status = jnp.where((step >= max_iter) & (gap > tol), -1, 0).astype(jnp.int32)
        return _InnerIterand(
            step=step,
            psi=psi,
            gap=gap,
            flags=iterand.flags.at[iterand.step].set(monotone),
            status=status,
        )

    init = _InnerIterand(
        step=jnp.asarray(0),
        psi=psi0,
        gap=jnp.asarray(jnp.inf),
        flags=flags,
        status=jnp.asarray(0, dtype=jnp.int32),
    )
    return jax.lax.while_loop(cond_fn, body_fn, init)


def monotone_truncated_solve(
    problem: RadialProblem,
    potential: PotentialField,
    schedule: Sequence[float] = DEFAULT_SCHEDULE,
    max_inner: int = MAX_INNER,
    tol: float = INNER_TOL,
    nodes_per_decade: int = NODES_PER_DECADE,
) -> IterationTrace:
    """
    For each truncation level k: v_0 solves -Δv_0 = f, v_n solves
    -Δv_n = min(b, k) v_{n-1} + f, until the sup-difference is below tol
    returns: IterationTrace with one limit v^k per level
    """
    nodes = log_grid(problem.r_min, problem.r_max, nodes_per_decade)
    r = nodes[1:-1]
    b_full = potential(nodes)
    if np.any(b_full < 0.0):
        raise PreconditionError("potential must be non-negative")
    if problem.f is not None and np.any(np.asarray(problem.f(r)) < 0.0):
        raise PreconditionError("right-hand side f must be non-negative")
    if min(problem.boundary) < 0.0:
        raise PreconditionError("boundary data must be non-negative")

    diag_b, off, _ = assemble(problem.N, problem.mode_eigenvalue, nodes, b_full)
    if min_eigenvalue(diag_b, off) <= 0.0:
        raise CoercivityError(f"untruncated form is not coercive; {NONEXISTENCE_NOTE}")
    diag, off, h = assemble(problem.N, problem.mode_eigenvalue, nodes)
    lower = jnp.asarray(np.concatenate([[0.0], np.full(r.size - 1, off)]))
    upper = jnp.asarray(np.concatenate([np.full(r.size - 1, off), [0.0]]))
    forcing = jnp.asarray(_forcing(problem, nodes, h))
    weight = jnp.asarray(r ** -_shift(problem.N))
    lo, hi = problem.boundary

    levels, iterates, inner_flags, outer_flags, counts = [], [], [], [], []
    previous = None
    for k in schedule:
        b_k = potential.truncated(k)(nodes)
        coupling = jnp.asarray(r ** 2 * b_k[1:-1])
        result = _inner_iteration(
            lower, jnp.asarray(diag), upper, forcing, coupling, max_inner, tol, weight
        )
        if int(result.status) != 0:
            raise ConvergenceError(
                f"inner iteration at k={k} did not converge in {max_inner} steps "
                "(coercivity margin lost)"
            )
        steps = int(result.step)
        values = np.empty(nodes.size)
        values[0], values[-1] = lo, hi
        values[1:-1] = to_host(result.psi * weight)
        flags = tuple(bool(f) for f in np.asarray(result.flags)[:steps])
        if previous is not None:
            scale = max(1.0, float(np.max(np.abs(values))))
            outer_flags.append(bool(np.min(values - previous) >= -MONOTONE_TOL * scale))
        logger.debug(f"k={k:g}: {steps} inner steps, monotone {all(flags)}")
        levels.append(float(k))
        iterates.append(values)
        inner_flags.append(flags)
        counts.append(steps)
        previous = values

    cauchy = 0.0
    if len(iterates) > 1:
        cauchy = float(np.max(np.abs(iterates[-1] - iterates[-2])))
    final = discrete_residual(
        problem, Grid1D(nodes, iterates[-1]), potential.truncated(levels[-1])
    )
    return IterationTrace(
        nodes=nodes,
        levels=tuple(levels),
        iterates=iterates,
        inner_flags=inner_flags,
        outer_flags=outer_flags,
        inner_counts=tuple(counts),
        final_residual=final,
        cauchy_gap=cauchy,
    )

