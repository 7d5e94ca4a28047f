"""Deterministic skeleton of a chaos vector: the iterated integrals with
the Brownian differential replaced by the derivative of a finite-energy
path.

The n-fold simplex integral of a product term is computed by the nested
recursion u_k(t) = integral_0^t u_{k-1} f^k hdot ds (O(n*m) per term), with
per-segment trapezoid in u and midpoint values of f; hdot is constant per
segment, so the rule is exact in hdot and O(m^-2) in f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .chaos import ChaosVector, ProductTerm, sym_cube_norm_sq, truncate, truncation_tail_bound
from .errors import DomainError
from .paths import CameronMartinPath, GridPath, sample_level_set, sup_norm


@dataclass(frozen=True)
class SkeletonResult:
    """Skeleton path plus the per-order contributions that sum to it."""

    path: GridPath
    per_order: dict[int, GridPath]


def _factor_mid_table(term: ProductTerm, m: int) -> np.ndarray:
    from .factors import factor_values

    mid = (np.arange(m) + 0.5) / m
    return np.vstack([factor_values(f, mid) for f in term.factors])


def eval_term(term: ProductTerm, h: CameronMartinPath) -> GridPath:
    """Simplex integral of one product term against hdot, on h's grid."""
    m = h.m
    dw = (h.slopes / m)[None, :]
    z = backend.chain_strat(np.ascontiguousarray(dw), _factor_mid_table(term, m))
    return GridPath(m, term.coeff * z[0])


def eval_skeleton(x: ChaosVector, h: CameronMartinPath) -> SkeletonResult:
    """Sum of eval_term over all kernels and terms.

    Accumulation order is ascending chaos order, then term index, for
    reproducibility.
    """
    m = h.m
    total = np.zeros(m + 1)
    per_order: dict[int, GridPath] = {}
    for k in x.kernels:
        contrib = np.zeros(m + 1)
        for t in k.terms:
            contrib = contrib + eval_term(t, h).values
        per_order[k.order] = GridPath(m, contrib)
        total = total + contrib
    return SkeletonResult(path=GridPath(m, total), per_order=per_order)


def eval_skeleton_batch(x: ChaosVector, slopes: np.ndarray) -> np.ndarray:
    """Skeleton paths for a batch of slope vectors, shape (B, m) -> (B, m+1).

    Same quadrature and summation order as eval_skeleton; used by the
    rate-function optimizer where many candidate paths are evaluated at once.
    """
    nb, m = slopes.shape
    dw = np.ascontiguousarray(slopes / m)
    total = np.zeros((nb, m + 1))
    for k in x.kernels:
        for t in k.terms:
            total = total + t.coeff * backend.chain_strat(dw, _factor_mid_table(t, m))
    return total


def uniform_gap(
    x: ChaosVector,
    N: int,
    L: float,
    samples: int,
    seed: int,
    m: int = 256,
) -> tuple[float, float]:
    """Largest observed sup-norm gap between the full skeleton and its
    order-N truncation over `samples` draws from the energy level set,
    paired with the a-priori truncation tail bound.

    Contract: max_gap <= bound + 10/m^2 (quadrature slack).
    """
    if samples < 1:
        raise DomainError("need at least one sample")
    xN = truncate(x, N)
    max_gap = 0.0
    for i in range(samples):
        h = sample_level_set(L, m, seed, index=i)
        full = eval_skeleton(x, h).path
        trunc = eval_skeleton(xN, h).path
        gap = sup_norm(GridPath(m, full.values - trunc.values))
        max_gap = max(max_gap, gap)
    return max_gap, truncation_tail_bound(x, N, L)


def modulus_bound(x: ChaosVector, s: float, t: float, L: float) -> float:
    """Equicontinuity bound on |F(h)_t - F(h)_s| over the level set
    {energy <= L}:

        e^L * sqrt( sum_n (1/n!) * (||f_n||^2_{[0,t]^n} - ||f_n||^2_{[0,s]^n}) ).
    """
    if not 0.0 <= s <= t <= 1.0:
        raise DomainError("need 0 <= s <= t <= 1")
    total = 0.0
    for k in x.kernels:
        inc = sym_cube_norm_sq(k, t) - sym_cube_norm_sq(k, s)
        total += max(inc, 0.0) / math.factorial(k.order)
    return math.exp(L) * math.sqrt(total)
