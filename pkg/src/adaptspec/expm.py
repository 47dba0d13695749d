"""Matrix-exponential action on a vector, matrix-free.

exp(A)x is formed as (sum_k (A/m)^k / k!)^m x: the truncated Taylor sum of
the scaled operator applied m times in sequence.  Only products A*v are
needed, so the operator may be a matrix, a stencil, or any linear callable.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["ExpmConfig", "expm_action"]


@dataclass(frozen=True)
class ExpmConfig:
    """Knobs for the scaled Taylor evaluation.

    m is a fixed splitting of the exponent, not auto-selected from norm
    estimates; raise it when the operator is stiff enough that the series
    for A/m converges too slowly.
    """

    m: int = 6
    taylor_tol: float = 1e-15
    max_terms: int = 40

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if not self.taylor_tol > 0:
            raise ValueError("taylor_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be a positive integer")


def _taylor_apply(apply_a, v, inv_m, config):
    # exp(A/m) v summed term by term in index order; the running term is
    # term_k = (A/m)^k v / k!, and the stop test is relative to the input
    # so a near-unitary operator cannot stall the tolerance
    ref = np.linalg.norm(v)
    acc = v.copy()
    term = v
    for k in range(1, config.max_terms + 1):
        term = apply_a(term) * (inv_m / k)
        acc = acc + term
        if np.linalg.norm(term) <= config.taylor_tol * ref:
            return acc
    raise RuntimeError(
        "Taylor series for the scaled operator did not converge: term %d "
        "has norm %.3e against input %.3e; increase m or max_terms"
        % (config.max_terms, np.linalg.norm(term), ref)
    )


def expm_action(apply_a, x, config=ExpmConfig()):
    """Return exp(A) x where A is given only through apply_a(v) = A v.

    x may be any complex or real ndarray; apply_a must be linear and
    shape-preserving.  The result is deterministic for fixed inputs.
    """
    y = np.asarray(x)
    inv_m = 1.0 / config.m
    for _ in range(config.m):
        y = _taylor_apply(apply_a, y, inv_m, config)
    return y
