"""Galerkin solver for i dpsi/dt = -psi_xx + (V + V_ex) psi on the line.

The wavefunction lives in a Hermite-function space on an adaptive grid
(order, scaling, shift all movable).  Each step advances the coefficient
vector with the exponential of the exact weak-form generator: the
derivative-derivative term is assembled analytically (pentadiagonal), the
potential term is contracted matrix-free through the quadrature grid, and
the time dependence of the external drive is integrated with a three-point
Gauss-Legendre rule inside the step.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .adapt import ControllerConfig, initial_state, orchestrate_step
from .basis import (
    BasisDescriptor,
    Family,
    SpectralExpansion,
    _values_matrix,
    nodes_weights,
    to_coefficients,
)
from .expm import ExpmConfig, expm_action

__all__ = [
    "SchrodingerProblem",
    "stiffness_matrix",
    "stiffness_apply",
    "potential_apply",
    "propagate_step",
    "adapt_schrodinger_run",
    "gaussian_packet",
]

# 3-point Gauss-Legendre on [0, 1]
_GL3_NODES = np.array([0.5 - math.sqrt(3 / 5) / 2, 0.5, 0.5 + math.sqrt(3 / 5) / 2])
_GL3_WEIGHTS = np.array([5 / 18, 4 / 9, 5 / 18])


@dataclass(frozen=True)
class SchrodingerProblem:
    """Potentials, initial data, and stepping knobs for one run.

    V is the static potential V(x); V_ex(x, t) the time-dependent drive;
    either may be None for identically zero.  m and taylor_tol feed the
    exponential evaluator.
    """

    psi0: Callable
    V: Optional[Callable] = None
    V_ex: Optional[Callable] = None
    dt: float = 0.01
    T: float = 1.0
    m: int = 6
    taylor_tol: float = 1e-15

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.T >= self.dt:
            raise ValueError("T must cover at least one step")
        if self.m < 1:
            raise ValueError("m must be a positive integer")

    @property
    def expm_config(self):
        return ExpmConfig(m=self.m, taylor_tol=self.taylor_tol)


def _require_hermite(d: BasisDescriptor):
    if d.family is not Family.HERMITE_FN:
        raise ValueError("the solver runs in a Hermite-function space")


@lru_cache(maxsize=32)
def _stiffness_bands(d: BasisDescriptor):
    # d/dx B_n = beta (sqrt(n/2) B_{n-1} - sqrt((n+1)/2) B_{n+1}) gives
    # (B_l', B_j') nonzero only at |l-j| in {0, 2}
    n = np.arange(d.size, dtype=float)
    main = d.beta**2 * (2 * n + 1) / 2
    upper2 = -(d.beta**2) * np.sqrt((n[:-2] + 1) * (n[:-2] + 2)) / 2
    main.setflags(write=False)
    upper2.setflags(write=False)
    return main, upper2


def stiffness_matrix(d: BasisDescriptor) -> np.ndarray:
    """Dense (B_l', B_j') matrix: symmetric, pentadiagonal pattern."""
    _require_hermite(d)
    main, upper2 = _stiffness_bands(d)
    s = np.diag(main)
    if len(upper2):
        s += np.diag(upper2, 2) + np.diag(upper2, -2)
    return s


def stiffness_apply(d: BasisDescriptor, x: np.ndarray) -> np.ndarray:
    """S @ x through the two bands, O(N)."""
    _require_hermite(d)
    main, upper2 = _stiffness_bands(d)
    y = main * x
    if len(x) > 2:
        y[:-2] += upper2 * x[2:]
        y[2:] += upper2 * x[:-2]
    return y


@lru_cache(maxsize=6)
def _collocation_matrices(d: BasisDescriptor):
    # phi[i, s] = B_i(x_s); proj[i, s] = w_s B_i(x_s).  Together they give
    # the Galerkin projection of a multiplication operator in two dense
    # passes (the rule is exact for products of two basis functions, so no
    # mass-matrix solve appears).
    phi = _values_matrix(d)
    proj = phi * nodes_weights(d).weights
    phi.setflags(write=False)
    proj.setflags(write=False)
    return phi, proj


def _integrated_potential(d, V, V_ex, t_n, dt):
    """Node values of int_{t_n}^{t_n+dt} (V + V_ex)(x_s, t) dt."""
    x = nodes_weights(d).nodes
    g = np.zeros(len(x))
    if V is not None:
        g = g + np.asarray(V(x), dtype=float) * dt
    if V_ex is not None:
        for xi, wq in zip(_GL3_NODES, _GL3_WEIGHTS):
            g = g + (wq * dt) * np.asarray(V_ex(x, t_n + xi * dt), dtype=float)
    return g


def potential_apply(d: BasisDescriptor, V, V_ex, t_n, dt, X) -> np.ndarray:
    """Time-integrated potential operator times X, matrix-free.

    Returns the coefficient vector of the projection of g(x)*psi where
    g = int (V + V_ex) dt over the step; two (N+1)^2 contractions, no
    explicit matrix.
    """
    _require_hermite(d)
    X = np.asarray(X)
    if X.shape != (d.size,):
        raise ValueError(f"expected {d.size} coefficients, got shape {X.shape}")
    if V is None and V_ex is None:
        return np.zeros_like(X)
    phi, proj = _collocation_matrices(d)
    g = _integrated_potential(d, V, V_ex, t_n, dt)
    return proj @ (g * (phi.T @ X))


def propagate_step(psi, d: BasisDescriptor, problem: SchrodingerProblem, t_n):
    """Advance the coefficient vector by one step of size problem.dt.

    The generator is -i (S dt + Vtilde) with S the derivative-derivative
    matrix and Vtilde the time-integrated potential; the step is its exact
    exponential up to the Taylor tolerance.
    """
    _require_hermite(d)
    psi = np.asarray(psi, dtype=complex)
    dt = problem.dt
    if problem.V is None and problem.V_ex is None:
        apply_a = lambda X: -1j * dt * stiffness_apply(d, X)
    else:
        phi, proj = _collocation_matrices(d)
        g = _integrated_potential(d, problem.V, problem.V_ex, t_n, dt)
        apply_a = lambda X: -1j * (
            dt * stiffness_apply(d, X) + proj @ (g * (phi.T @ X))
        )
    return expm_action(apply_a, psi, problem.expm_config)


def adapt_schrodinger_run(
    problem: SchrodingerProblem,
    config: ControllerConfig,
    d0: BasisDescriptor,
    on_step=None,
):
    """Evolve psi0 from t=0 to t=T with the full adaptive loop.

    Each step propagates, then lets the controllers move/rescale/reorder
    the space; the operator pieces are rebuilt automatically whenever the
    descriptor changes (they are cached per descriptor).  on_step(t, u,
    record) is called after every step.  Returns the final expansion and
    the per-step records.
    """
    _require_hermite(d0)
    rule = nodes_weights(d0)
    u = to_coefficients(np.asarray(problem.psi0(rule.nodes), dtype=complex), d0)
    state = initial_state(u, config)
    n_steps = int(round(problem.T / problem.dt))
    if abs(n_steps * problem.dt - problem.T) > 1e-9 * problem.T:
        raise ValueError("T must be an integer number of steps")
    records = []
    for n in range(n_steps):
        t_n = n * problem.dt

        def evolve(w):
            psi = propagate_step(w.coefficients, w.descriptor, problem, t_n)
            return SpectralExpansion(w.descriptor, psi)

        u, state, rec = orchestrate_step(u, state, config, evolve)
        records.append(rec)
        if on_step is not None:
            on_step((n + 1) * problem.dt, u, rec)
    return u, records


def gaussian_packet(x, t, zeta=0.3, k=1.0):
    """Free-particle wave packet: exact solution of i psi_t = -psi_xx.

    Gaussian of initial width set by zeta, carrier wavenumber k; the
    center travels at speed 2k while the envelope disperses.
    """
    z = zeta + 1j * t
    x = np.asarray(x, dtype=float)
    return np.exp(1j * k * (x - k * t) - (x - 2 * k * t) ** 2 / (4 * z)) / np.sqrt(z)
