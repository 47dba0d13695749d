"""Adaptivity controllers and reconstruction primitives.

Reconstruction: refine/coarsen (order +-1), rescale (new beta), translate
(shift x_left) — all implemented the same way: evaluate the current
expansion at the target space's grid and re-interpolate.  Refinement is
exact (nested spaces); the rest are interpolations.

Controllers: order adaptivity driven by the frequency indicator with a
growing refine threshold and guarded coarsening; scaling that walks beta
by a fixed ratio while trials do not increase the indicator; grid
translation in fixed increments while the exterior indicator exceeds its
reference.  `orchestrate_step` chains evolve -> move -> scale -> order
per step and renews the reference indicators after basis changes.

The translation trigger/increment loop reconstructs behavior summarized
from a companion method (the source describes only the thresholds), and
is flagged as such here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .basis import (
    BasisDescriptor,
    Expansion2D,
    SpectralExpansion,
    evaluate_all,
    nodes_weights,
    to_coefficients,
    to_coefficients_2d,
)
from .indicators import (
    IndicatorConfig,
    default_split_point,
    exterior_error_indicator,
    frequency_indicator,
    frequency_indicator_axis,
)

__all__ = [
    "ControllerConfig",
    "AdaptiveState",
    "StepRecord",
    "refine",
    "coarsen",
    "rescale",
    "translate",
    "resample",
    "resample_2d",
    "p_adapt_step",
    "p_adapt_step_2d",
    "scale_step",
    "move_step",
    "orchestrate_step",
    "initial_state",
]


@dataclass(frozen=True)
class ControllerConfig:
    """Thresholds and bounds for the three controllers.

    eta is the initial refine multiplier (refine when the indicator
    exceeds refine_factor * freq_ref); gamma grows the multiplier after
    each refinement event.  eta0 is the coarsen divisor: coarsening is
    considered when the indicator falls below freq_ref/eta0.  n_max caps
    order increments per call; n_abs, if set, caps the absolute order.
    q in (0,1) is the scaling ratio; a down-scaling trial proposes
    q*beta, an up-scaling trial beta/q, with beta kept inside
    [beta_lo, beta_hi]; nu*scale_ref is the down-scaling trigger.  mu,
    delta, d_max control translation: move right in steps of delta, at
    most d_max per call, while the exterior indicator exceeds
    mu*exterior_ref.
    """

    eta: float = 1.2
    eta0: float = 1.2
    gamma: float = 1.05
    n_max: int = 6
    n_min: int = 0
    n_abs: int | None = None
    q: float = 0.95
    nu: float = 1.0 / 0.95
    beta_lo: float = 0.1
    beta_hi: float = 10.0
    mu: float = 1.0002
    delta: float = 0.005
    d_max: float = 0.1
    p_adaptivity: bool = True
    scaling: bool = True
    moving: bool = True
    indicator: IndicatorConfig | None = None

    def __post_init__(self):
        if not self.eta > 1.0:
            raise ValueError(f"eta must be > 1, got {self.eta}")
        if not self.eta0 > 1.0:
            raise ValueError(f"eta0 must be > 1, got {self.eta0}")
        if not self.gamma >= 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if self.n_max < 0 or self.n_min < 0:
            raise ValueError("n_max and n_min must be nonnegative")
        if self.n_abs is not None and self.n_abs < self.n_min:
            raise ValueError("n_abs must be >= n_min")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must be in (0,1), got {self.q}")
        if not self.nu > 1.0:
            raise ValueError(f"nu must be > 1, got {self.nu}")
        if not 0.0 < self.beta_lo < self.beta_hi:
            raise ValueError("need 0 < beta_lo < beta_hi")
        if not self.mu > 1.0:
            raise ValueError(f"mu must be > 1, got {self.mu}")
        if not self.delta > 0.0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.d_max < 0.0:
            raise ValueError(f"d_max must be >= 0, got {self.d_max}")


@dataclass(frozen=True)
class AdaptiveState:
    """Reference values the controllers compare against.

    freq_ref: indicator at the last order event; scale_ref: indicator at
    the last scaling event; exterior_ref: exterior indicator at the last
    move/renewal; refine_factor: current refine multiplier (grows by
    gamma); x_split: current exterior split point (nan for bounded).
    """

    freq_ref: float
    scale_ref: float
    exterior_ref: float
    refine_factor: float
    x_split: float


@dataclass(frozen=True)
class StepRecord:
    """What one orchestrated step did and saw (time/error added upstream)."""

    actions: tuple[str, ...]
    freq: float
    ext: float
    order: int
    beta: float
    x_left: float


# ---------------------------------------------------- reconstruction


_CROSS_CACHE_LIMIT = 2_000_000  # entries; N=2500-scale pairs bypass the cache


@lru_cache(maxsize=24)
def _cross_matrix_cached(d_from: BasisDescriptor, d_to: BasisDescriptor) -> np.ndarray:
    B = evaluate_all(d_from, nodes_weights(d_to).nodes)
    B.setflags(write=False)
    return B


def _cross_matrix(d_from: BasisDescriptor, d_to: BasisDescriptor) -> np.ndarray:
    if d_from.size * d_to.size <= _CROSS_CACHE_LIMIT:
        return _cross_matrix_cached(d_from, d_to)
    return evaluate_all(d_from, nodes_weights(d_to).nodes)


def resample(u: SpectralExpansion, d_new: BasisDescriptor) -> SpectralExpansion:
    """Interpolate u onto another space's grid (two matrix-vector passes)."""
    if d_new == u.descriptor:
        return u
    vals = _cross_matrix(u.descriptor, d_new).T @ u.coefficients
    return to_coefficients(vals, d_new)


def resample_2d(u: Expansion2D, dx_new: BasisDescriptor, dy_new: BasisDescriptor) -> Expansion2D:
    if dx_new == u.descriptor_x and dy_new == u.descriptor_y:
        return u
    vals = (
        _cross_matrix(u.descriptor_x, dx_new).T
        @ u.coefficients
        @ _cross_matrix(u.descriptor_y, dy_new)
    )
    return to_coefficients_2d(vals, dx_new, dy_new)


def refine(u: SpectralExpansion) -> SpectralExpansion:
    """Order N -> N+1; exact (the spaces are nested)."""
    return resample(u, replace(u.descriptor, order=u.descriptor.order + 1))


def coarsen(u: SpectralExpansion) -> SpectralExpansion:
    """Order N -> N-1 by interpolation; generally lossy."""
    if u.descriptor.order == 0:
        raise ValueError("cannot coarsen below order 0")
    return resample(u, replace(u.descriptor, order=u.descriptor.order - 1))


def rescale(u: SpectralExpansion, beta_new: float) -> SpectralExpansion:
    """Same order, new scaling factor; values at the new grid preserved."""
    if u.descriptor.bounded:
        raise ValueError("rescale applies to unbounded families only")
    return resample(u, replace(u.descriptor, beta=float(beta_new)))


def translate(u: SpectralExpansion, dist: float) -> SpectralExpansion:
    """Same order, grid shifted by dist (positive = rightward)."""
    if u.descriptor.bounded:
        raise ValueError("translate applies to unbounded families only")
    return resample(u, replace(u.descriptor, x_left=u.descriptor.x_left + float(dist)))


# ------------------------------------------------------- controllers


def initial_state(u: SpectralExpansion, config: ControllerConfig) -> AdaptiveState:
    """Reference state from the initial expansion (orchestrator init box)."""
    f = frequency_indicator(u, config.indicator)
    if u.descriptor.bounded:
        x_split = math.nan
        e = 0.0
    else:
        x_split = default_split_point(u.descriptor)
        e = exterior_error_indicator(u, x_split)
    return AdaptiveState(
        freq_ref=f, scale_ref=f, exterior_ref=e, refine_factor=config.eta, x_split=x_split
    )


def p_adapt_step(
    u: SpectralExpansion, state: AdaptiveState, config: ControllerConfig
) -> tuple[SpectralExpansion, AdaptiveState, list[str]]:
    """One order-adaptivity decision.

    Refine while the indicator exceeds refine_factor * freq_ref, at most
    n_max increments (and never past n_abs); afterwards the reference is
    rebased to the current indicator and the refine multiplier grows by
    gamma.  Otherwise, if the indicator sits below freq_ref/eta0 and the
    order exceeds n_min, try a single coarsening and keep it only if it
    strictly lowers the indicator below freq_ref.
    """
    actions: list[str] = []
    f = frequency_indicator(u, config.indicator)
    if f > state.refine_factor * state.freq_ref:
        increments = 0
        while f > state.refine_factor * state.freq_ref and increments < config.n_max:
            if config.n_abs is not None and u.descriptor.order + 1 > config.n_abs:
                break
            u = refine(u)
            increments += 1
            actions.append("refine")
            f = frequency_indicator(u, config.indicator)
        state = replace(
            state, freq_ref=f, refine_factor=config.gamma * state.refine_factor
        )
    elif f < state.freq_ref / config.eta0 and u.descriptor.order > config.n_min:
        trial = coarsen(u)
        f_trial = frequency_indicator(trial, config.indicator)
        if f_trial < state.freq_ref:
            u = trial
            state = replace(state, freq_ref=f_trial)
            actions.append("coarsen")
    return u, state, actions


def _axis_descriptor(u: Expansion2D, axis: int) -> BasisDescriptor:
    return u.descriptor_x if axis == 0 else u.descriptor_y


def _with_axis_order(u: Expansion2D, axis: int, order: int) -> Expansion2D:
    if axis == 0:
        return resample_2d(u, replace(u.descriptor_x, order=order), u.descriptor_y)
    return resample_2d(u, u.descriptor_x, replace(u.descriptor_y, order=order))


def _p_adapt_axis(
    u: Expansion2D, axis: int, state: AdaptiveState, config: ControllerConfig
) -> tuple[int, AdaptiveState, list[str]]:
    """Order decision along one axis with the other axis frozen."""
    suffix = "_x" if axis == 0 else "_y"
    actions: list[str] = []
    work = u
    f = frequency_indicator_axis(work, axis, config.indicator)
    if f > state.refine_factor * state.freq_ref:
        increments = 0
        while f > state.refine_factor * state.freq_ref and increments < config.n_max:
            order = _axis_descriptor(work, axis).order + 1
            if config.n_abs is not None and order > config.n_abs:
                break
            work = _with_axis_order(work, axis, order)
            increments += 1
            actions.append("refine" + suffix)
            f = frequency_indicator_axis(work, axis, config.indicator)
        state = replace(
            state, freq_ref=f, refine_factor=config.gamma * state.refine_factor
        )
    elif (
        f < state.freq_ref / config.eta0
        and _axis_descriptor(work, axis).order > config.n_min
    ):
        trial = _with_axis_order(work, axis, _axis_descriptor(work, axis).order - 1)
        f_trial = frequency_indicator_axis(trial, axis, config.indicator)
        if f_trial < state.freq_ref:
            work = trial
            state = replace(state, freq_ref=f_trial)
            actions.append("coarsen" + suffix)
    return _axis_descriptor(work, axis).order, state, actions


def p_adapt_step_2d(
    u: Expansion2D,
    state_x: AdaptiveState,
    state_y: AdaptiveState,
    config: ControllerConfig,
) -> tuple[Expansion2D, AdaptiveState, AdaptiveState, list[str]]:
    """Axis-wise order adaptivity: decisions made independently from the
    same input (each axis judged with the other frozen), then applied."""
    nx, state_x, ax = _p_adapt_axis(u, 0, state_x, config)
    ny, state_y, ay = _p_adapt_axis(u, 1, state_y, config)
    out = resample_2d(u, replace(u.descriptor_x, order=nx), replace(u.descriptor_y, order=ny))
    return out, state_x, state_y, ax + ay


def scale_step(
    u: SpectralExpansion, state: AdaptiveState, config: ControllerConfig
) -> tuple[SpectralExpansion, AdaptiveState, list[str]]:
    """One scaling decision: walk beta by the ratio q while trials help.

    A trial is kept only if its indicator does not exceed the current one
    and the proposed beta stays inside [beta_lo, beta_hi]; the reference
    indicator follows each accepted trial.  Rejected trials leave the
    expansion untouched.
    """
    if u.descriptor.bounded:
        return u, state, []
    actions: list[str] = []
    f = frequency_indicator(u, config.indicator)
    if f > config.nu * state.scale_ref:
        direction, token = config.q, "scale_down"
    elif f < state.scale_ref:
        direction, token = 1.0 / config.q, "scale_up"
    else:
        return u, state, []
    while True:
        beta_trial = direction * u.descriptor.beta
        if not (config.beta_lo <= beta_trial <= config.beta_hi):
            break
        trial = rescale(u, beta_trial)
        f_trial = frequency_indicator(trial, config.indicator)
        if f_trial <= f:
            u = trial
            f = f_trial
            state = replace(state, scale_ref=f_trial)
            actions.append(token)
        else:
            break
    return u, state, actions


def move_step(
    u: SpectralExpansion, state: AdaptiveState, config: ControllerConfig
) -> tuple[SpectralExpansion, AdaptiveState, list[str]]:
    """One translation decision (reconstructed companion-method loop).

    While the exterior indicator exceeds mu * exterior_ref, shift the grid
    rightward by delta (at most d_max in total, so an integer number of
    increments), re-deriving the split point from the shifted grid; after
    any move the exterior reference and split point are renewed.
    """
    if u.descriptor.bounded:
        return u, state, []
    actions: list[str] = []
    e = exterior_error_indicator(u, state.x_split)
    if e <= config.mu * state.exterior_ref:
        return u, state, []
    moved = 0.0
    x_split = state.x_split
    while e > config.mu * state.exterior_ref and moved + config.delta <= config.d_max * (1 + 1e-12):
        u = translate(u, config.delta)
        moved += config.delta
        actions.append("move")
        x_split = default_split_point(u.descriptor)
        e = exterior_error_indicator(u, x_split)
    if actions:
        state = replace(state, exterior_ref=e, x_split=x_split)
    return u, state, actions


def orchestrate_step(
    u: SpectralExpansion,
    state: AdaptiveState,
    config: ControllerConfig,
    evolve: Callable[[SpectralExpansion], SpectralExpansion],
) -> tuple[SpectralExpansion, AdaptiveState, StepRecord]:
    """One full adaptive step: evolve, then move, scale, and order checks.

    After scaling, the split point follows the rescaled grid; after any
    order change, the scale/exterior references and split point are
    recomputed on the new basis (the order controller has already rebased
    its own reference).
    """
    u = evolve(u)
    actions: list[str] = []
    unbounded = not u.descriptor.bounded

    if config.moving and unbounded:
        u, state, acts = move_step(u, state, config)
        actions += acts

    if config.scaling and unbounded:
        u, state, acts = scale_step(u, state, config)
        actions += acts
        if acts:
            state = replace(state, x_split=default_split_point(u.descriptor))

    if config.p_adaptivity:
        u, state, acts = p_adapt_step(u, state, config)
        actions += acts
        if acts and unbounded:
            x_split = default_split_point(u.descriptor)
            state = replace(
                state,
                scale_ref=frequency_indicator(u, config.indicator),
                exterior_ref=exterior_error_indicator(u, x_split),
                x_split=x_split,
            )
        elif acts:
            state = replace(state, scale_ref=frequency_indicator(u, config.indicator))

    freq = frequency_indicator(u, config.indicator)
    ext = exterior_error_indicator(u, state.x_split) if unbounded else math.nan
    record = StepRecord(
        actions=tuple(actions),
        freq=freq,
        ext=ext,
        order=u.descriptor.order,
        beta=u.descriptor.beta,
        x_left=u.descriptor.x_left,
    )
    return u, state, record
