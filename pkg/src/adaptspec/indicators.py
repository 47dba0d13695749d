"""Scalar diagnostics that drive adaptivity.

Three quantities: the frequency indicator (fraction of weighted energy in
the top modes, 1D and per-axis 2D), the exterior-error indicator (fraction
of the derivative's weighted norm beyond a split point, for unbounded
families), and the relative weighted-L2 error against a reference
function on an oversampled grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .basis import (
    MAX_ORDER,
    BasisDescriptor,
    Expansion2D,
    Family,
    SpectralExpansion,
    differentiate,
    nodes_weights,
    norms,
    to_values,
    to_values_2d,
)

__all__ = [
    "IndicatorConfig",
    "default_tail_width",
    "frequency_indicator",
    "frequency_indicator_axis",
    "exterior_error_indicator",
    "default_split_point",
    "relative_error",
    "relative_error_2d",
]


def default_tail_width(n: int) -> int:
    """Tail width M for order n: floor(n/3), at least 1 (the 2/3 rule)."""
    return max(1, n // 3)


@dataclass(frozen=True)
class IndicatorConfig:
    """How many top modes count as 'tail' when measuring frequency content."""

    m_rule: Callable[[int], int] = field(default=default_tail_width)


_DEFAULT = IndicatorConfig()


def _tail_width(n: int, config: IndicatorConfig | None) -> int:
    m = int((config or _DEFAULT).m_rule(n))
    return max(1, min(m, max(n, 1)))


def frequency_indicator(u: SpectralExpansion, config: IndicatorConfig | None = None) -> float:
    """sqrt(tail energy / total energy) of the expansion, in [0, 1].

    Energy of mode i is gamma_i |u_i|^2 with gamma the continuous squared
    norms.  All-zero coefficients give 0 (nothing to resolve).
    """
    energy = norms(u.descriptor) * np.abs(u.coefficients) ** 2
    total = float(energy.sum())
    if total == 0.0:
        return 0.0
    n = u.descriptor.order
    m = _tail_width(n, config)
    tail = float(energy[max(n - m + 1, 0):].sum())
    return min(math.sqrt(tail / total), 1.0)


def frequency_indicator_axis(
    u: Expansion2D, axis: int, config: IndicatorConfig | None = None
) -> float:
    """Per-axis frequency indicator of a tensor expansion (axis 0 = x)."""
    if axis not in (0, 1):
        raise ValueError(f"axis must be 0 or 1, got {axis}")
    gx = norms(u.descriptor_x)
    gy = norms(u.descriptor_y)
    energy = np.abs(u.coefficients) ** 2 * gx[:, None] * gy[None, :]
    total = float(energy.sum())
    if total == 0.0:
        return 0.0
    d = u.descriptor_x if axis == 0 else u.descriptor_y
    m = _tail_width(d.order, config)
    lo = max(d.order - m + 1, 0)
    tail = float(energy[lo:, :].sum() if axis == 0 else energy[:, lo:].sum())
    return min(math.sqrt(tail / total), 1.0)


# ------------------------------------------------------------ exterior


_PANEL_NODES, _PANEL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _composite_gauss(edges: np.ndarray):
    """Nodes/weights of a 20-point Gauss rule on each panel, concatenated."""
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * _PANEL_NODES[None, :]).ravel()
    wts = (half[:, None] * _PANEL_WEIGHTS[None, :]).ravel()
    return pts, wts


def exterior_error_indicator(u: SpectralExpansion, x_split: float) -> float:
    """Fraction of the derivative's weighted norm living beyond x_split.

    || dU/dx restricted to (x_split, inf) ||_w / || dU/dx ||_w for the
    half-line and whole-line families.  The total norm is exact (the
    derivative expansion lives in an orthonormal family); the exterior
    piece uses composite Gauss panels out to where the basis envelope is
    below ~1e-18 of its peak, one panel per local oscillation wavelength.
    """
    d = u.descriptor
    if d.bounded:
        raise ValueError("exterior indicator requires an unbounded family")
    du = differentiate(u)
    b = du.coefficients
    den2 = float(np.real(np.vdot(b, b)))
    if den2 == 0.0:
        return 0.0
    if d.family is Family.HERMITE_FN:
        num2 = _exterior_energy_hermite(du, x_split)
    else:
        num2 = _exterior_energy_laguerre(du, x_split)
    return min(math.sqrt(max(num2, 0.0) / den2), 1.0)


def _exterior_energy_hermite(du: SpectralExpansion, x_split: float) -> float:
    d = du.descriptor
    n = d.order
    turn = math.sqrt(2.0 * n + 1.0)
    y_cut = turn + 9.3  # envelope below ~1e-18 of peak past the turning point
    y_lo = max(d.beta * (x_split - d.x_left), -y_cut)
    if y_lo >= y_cut:
        return 0.0
    panels = int(math.ceil((y_cut - y_lo) * max(turn, 1.0) / (2.0 * math.pi))) + 1
    y, w = _composite_gauss(np.linspace(y_lo, y_cut, panels + 1))
    vals = to_values(du, y / d.beta + d.x_left)
    return float(w @ np.abs(vals) ** 2) / d.beta


def _exterior_energy_laguerre(du: SpectralExpansion, x_split: float) -> float:
    d = du.descriptor
    n = d.order
    a = d.laguerre_a
    y_cut = 4.0 * (n + a) + 2.0 + 90.0  # exp(-y/2) tail below 1e-18 relative
    y_lo = min(max(d.beta * (x_split - d.x_left), 0.0), y_cut)
    if y_lo >= y_cut:
        return 0.0
    # integrate in s = sqrt(y): the oscillation wavelength is uniform there
    s_lo, s_hi = math.sqrt(y_lo), math.sqrt(y_cut)
    panels = int(math.ceil((s_hi - s_lo) * math.sqrt(n + 1.0) / math.pi)) + 1
    s, w = _composite_gauss(np.linspace(s_lo, s_hi, panels + 1))
    y = s * s
    vals = to_values(du, y / d.beta + d.x_left)
    weight = y**a if a != 0.0 else 1.0
    return 2.0 * float(w @ (np.abs(vals) ** 2 * weight * s)) / d.beta


def default_split_point(d: BasisDescriptor) -> float:
    """Default exterior split: the grid node at roughly the 2/3 quantile.

    Hermite: node index (2N+2)//3 of the N+1 Gauss nodes; Laguerre: index
    (N+2)//3 of the Radau nodes (0-based, ascending).
    """
    if d.bounded:
        raise ValueError("split point is defined for unbounded families only")
    nodes = nodes_weights(d).nodes
    if d.family is Family.HERMITE_FN:
        idx = (2 * d.order + 2) // 3
    else:
        idx = (d.order + 2) // 3
    return float(nodes[min(idx, d.order)])


# ------------------------------------------------------------ errors


def _fine_descriptor(d: BasisDescriptor) -> BasisDescriptor:
    return replace(d, order=min(2 * d.order + 2, MAX_ORDER))


def relative_error(u: SpectralExpansion, reference: Callable) -> float:
    """Weighted-L2 relative error against a callable, oversampled grid.

    The rule of order 2N+2 (>= 2(N+1) points) prevents the difference from
    aliasing to zero.  reference must accept a vector of points.
    """
    d = u.descriptor
    r = nodes_weights(_fine_descriptor(d))
    fv = np.asarray(reference(r.nodes))
    uv = to_values(u, r.nodes)
    den2 = float(r.weights @ np.abs(fv) ** 2)
    if den2 == 0.0:
        raise ValueError("reference has zero weighted norm")
    num2 = float(r.weights @ np.abs(uv - fv) ** 2)
    return math.sqrt(num2 / den2)


def relative_error_2d(u: Expansion2D, reference: Callable) -> float:
    """Tensor-grid version; reference takes meshgrid arrays (indexing='ij')."""
    rx = nodes_weights(_fine_descriptor(u.descriptor_x))
    ry = nodes_weights(_fine_descriptor(u.descriptor_y))
    X, Y = np.meshgrid(rx.nodes, ry.nodes, indexing="ij")
    fv = np.asarray(reference(X, Y))
    uv = to_values_2d(u, rx.nodes, ry.nodes)
    W = rx.weights[:, None] * ry.weights[None, :]
    den2 = float((W * np.abs(fv) ** 2).sum())
    if den2 == 0.0:
        raise ValueError("reference has zero weighted norm")
    num2 = float((W * np.abs(uv - fv) ** 2).sum())
    return math.sqrt(num2 / den2)
