"""Time-evolution drivers.

Two ways to produce the per-step evolve for the adaptive loop: an explicit
third-order Runge-Kutta collocation solver for PDEs posed on grid values
(with strong Dirichlet imposition), and closed-form target tracking that
re-interpolates a known u(x, t) each step.  Both feed `orchestrate_step`,
so every controller sees the same interface regardless of where the new
time level comes from.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .adapt import (
    AdaptiveState,
    ControllerConfig,
    initial_state,
    orchestrate_step,
    p_adapt_step_2d,
)
from .basis import (
    BasisDescriptor,
    Expansion2D,
    Family,
    SpectralExpansion,
    differentiate,
    node_values,
    nodes_weights,
    to_coefficients,
    to_coefficients_2d,
)
from .indicators import frequency_indicator_axis

__all__ = [
    "EvolutionProblem",
    "rk3_step",
    "advection_rhs",
    "solve_collocation",
    "track_function",
    "track_function_2d",
    "Record2D",
]


@dataclass(frozen=True)
class EvolutionProblem:
    """A right-hand side in collocation form plus stepping data.

    rhs(expansion, t) returns du/dt at the grid nodes; boundary, when
    given, is (node_index, g) and pins value g(t) at that node after
    every stage.
    """

    rhs: Callable
    dt: float
    T: float
    boundary: Optional[tuple] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.T >= self.dt:
            raise ValueError("T must cover at least one step")


def _check_finite(vals, t, what):
    if not np.all(np.isfinite(vals)):
        raise RuntimeError(f"non-finite {what} at t={t:.6g}")
    return vals


def rk3_step(rhs, u: SpectralExpansion, t, dt, boundary=None) -> SpectralExpansion:
    """One Shu-Osher SSP-RK3 step on grid values.

    Stage results approximate times t+dt, t+dt/2, t+dt; the Dirichlet
    value is re-imposed at those times, strongly, at the boundary node.
    """
    d = u.descriptor

    def finish(vals, ts):
        if boundary is not None:
            node, g = boundary
            vals[node] = g(ts)
        return _check_finite(vals, ts, "stage values")

    v0 = node_values(u)
    k1 = _check_finite(np.asarray(rhs(u, t)), t, "right-hand side")
    v1 = finish(v0 + dt * k1, t + dt)
    u1 = to_coefficients(v1, d)
    k2 = _check_finite(np.asarray(rhs(u1, t + dt)), t + dt, "right-hand side")
    v2 = finish(0.75 * v0 + 0.25 * (v1 + dt * k2), t + 0.5 * dt)
    u2 = to_coefficients(v2, d)
    k3 = _check_finite(np.asarray(rhs(u2, t + 0.5 * dt)), t + 0.5 * dt, "right-hand side")
    v3 = finish(v0 / 3.0 + (2.0 / 3.0) * (v2 + dt * k3), t + dt)
    return to_coefficients(v3, d)


def advection_rhs(u: SpectralExpansion, t) -> np.ndarray:
    """((x+2)/(t+1)) du/dx at the grid nodes (boundary handled by rk3_step)."""
    if u.descriptor.family is not Family.CHEBYSHEV:
        raise ValueError("this right-hand side is posed on the Chebyshev grid")
    x = nodes_weights(u.descriptor).nodes
    return (x + 2.0) / (t + 1.0) * node_values(differentiate(u))


def _step_count(dt, T):
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError("T must be an integer number of steps")
    return n


def solve_collocation(
    problem: EvolutionProblem,
    config: ControllerConfig,
    u0: SpectralExpansion,
    on_step=None,
):
    """March a collocation PDE with the adaptive loop around rk3_step."""
    u = u0
    state = initial_state(u, config)
    records = []
    for n in range(_step_count(problem.dt, problem.T)):
        t_n = n * problem.dt

        def evolve(w):
            return rk3_step(problem.rhs, w, t_n, problem.dt, problem.boundary)

        u, state, rec = orchestrate_step(u, state, config, evolve)
        records.append(rec)
        if on_step is not None:
            on_step((n + 1) * problem.dt, u, rec)
    return u, records


def track_function(target, config: ControllerConfig, d0: BasisDescriptor, dt, T, on_step=None):
    """Approximate a closed-form target u(x, t) on an adaptive basis.

    The evolve is plain re-interpolation of target(., t+dt) on whatever
    space the controllers currently prefer, so the time series isolates
    pure approximation behavior from time-integration error.
    """
    rule = nodes_weights(d0)
    u = to_coefficients(np.asarray(target(rule.nodes, 0.0)), d0)
    state = initial_state(u, config)
    records = []
    for n in range(_step_count(dt, T)):
        t_next = (n + 1) * dt

        def evolve(w):
            r = nodes_weights(w.descriptor)
            return to_coefficients(np.asarray(target(r.nodes, t_next)), w.descriptor)

        u, state, rec = orchestrate_step(u, state, config, evolve)
        records.append(rec)
        if on_step is not None:
            on_step(t_next, u, rec)
    return u, records


@dataclass(frozen=True)
class Record2D:
    """Per-step log of a tensor-product tracking run."""

    actions: tuple
    freq_x: float
    freq_y: float
    order_x: int
    order_y: int


def track_function_2d(
    target,
    config: ControllerConfig,
    dx0: BasisDescriptor,
    dy0: BasisDescriptor,
    dt,
    T,
    on_step=None,
):
    """Tensor-product tracking with axis-wise order adaptivity.

    target(X, Y, t) takes meshgrid arrays (indexing='ij').  Bounded
    domains only get order control, so the loop is interpolate -> order
    step each way.
    """
    rx, ry = nodes_weights(dx0), nodes_weights(dy0)
    X, Y = np.meshgrid(rx.nodes, ry.nodes, indexing="ij")
    u = to_coefficients_2d(np.asarray(target(X, Y, 0.0)), dx0, dy0)
    state_x = AdaptiveState(
        freq_ref=frequency_indicator_axis(u, 0, config.indicator),
        scale_ref=0.0,
        exterior_ref=0.0,
        refine_factor=config.eta,
        x_split=float("nan"),
    )
    state_y = AdaptiveState(
        freq_ref=frequency_indicator_axis(u, 1, config.indicator),
        scale_ref=0.0,
        exterior_ref=0.0,
        refine_factor=config.eta,
        x_split=float("nan"),
    )
    records = []
    for n in range(_step_count(dt, T)):
        t_next = (n + 1) * dt
        rx, ry = nodes_weights(u.descriptor_x), nodes_weights(u.descriptor_y)
        X, Y = np.meshgrid(rx.nodes, ry.nodes, indexing="ij")
        u = to_coefficients_2d(np.asarray(target(X, Y, t_next)), u.descriptor_x, u.descriptor_y)
        if config.p_adaptivity:
            u, state_x, state_y, actions = p_adapt_step_2d(u, state_x, state_y, config)
        else:
            actions = []
        rec = Record2D(
            actions=tuple(actions),
            freq_x=frequency_indicator_axis(u, 0, config.indicator),
            freq_y=frequency_indicator_axis(u, 1, config.indicator),
            order_x=u.descriptor_x.order,
            order_y=u.descriptor_y.order,
        )
        records.append(rec)
        if on_step is not None:
            on_step(t_next, u, rec)
    return u, records
