"""Brownian grid paths and Monte-Carlo iterated stochastic integrals.

Discrete conventions: left-point sums define the Ito integrals, midpoint
(already-updated lower level) sums define the Stratonovich ones; their
order-2 constant-kernel gap reproduces the deterministic t/2 correction.
Each sample index owns a Philox substream, so estimates are independent of
batching and evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .chaos import ChaosVector, ProductTerm, gamma_scale
from .errors import DomainError
from .factors import factor_values
from .paths import GridPath
from .rng import substream

MC_CHUNK = 4096


@dataclass(frozen=True)
class BrownianPath:
    """Grid Brownian path with its (seed, index, m) provenance."""

    path: GridPath
    seed: int
    index: int

    @property
    def m(self) -> int:
        return self.path.m

    @property
    def values(self) -> np.ndarray:
        return self.path.values

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.path.values)


@dataclass(frozen=True)
class MCEstimate:
    """Monte-Carlo mean with its standard error."""

    mean: float
    stderr: float
    count: int
    is_probability: bool = False


def brownian_increments(m: int, seed: int, index: int) -> np.ndarray:
    """Increments with variance 1/m for sample `index` of stream `seed`."""
    if m < 1:
        raise DomainError("resolution must be >= 1")
    gen = substream(seed, index)
    return gen.standard_normal(m) * math.sqrt(1.0 / m)


def brownian_batch(m: int, seed: int, start: int, count: int) -> np.ndarray:
    """Increment rows for sample indices start..start+count-1."""
    out = np.empty((count, m))
    for j in range(count):
        out[j] = brownian_increments(m, seed, start + j)
    return out


def sample_bm(m: int, seed: int, index: int = 0) -> BrownianPath:
    incr = brownian_increments(m, seed, index)
    values = np.concatenate(([0.0], np.cumsum(incr)))
    return BrownianPath(GridPath(m, values), seed=seed, index=index)


def _left_table(term: ProductTerm, m: int) -> np.ndarray:
    ts = np.arange(m) / m
    return np.vstack([factor_values(f, ts) for f in term.factors])


def _mid_table(term: ProductTerm, m: int) -> np.ndarray:
    ts = (np.arange(m) + 0.5) / m
    return np.vstack([factor_values(f, ts) for f in term.factors])


def ito_iterated(term: ProductTerm, w: BrownianPath) -> GridPath:
    """Discrete Ito iterated integral of one product term:
    Z_0 = coeff; Z_k[i+1] = Z_k[i] + Z_{k-1}[i] f^k(t_i) dw_i."""
    dw = np.ascontiguousarray(w.increments[None, :])
    z = backend.chain_ito(dw, _left_table(term, w.m))
    return GridPath(w.m, term.coeff * z[0])


def strat_iterated(term: ProductTerm, w: BrownianPath) -> GridPath:
    """Midpoint-rule Stratonovich counterpart of ito_iterated."""
    dw = np.ascontiguousarray(w.increments[None, :])
    z = backend.chain_strat(dw, _mid_table(term, w.m))
    return GridPath(w.m, term.coeff * z[0])


def hu_meyer_gap(term: ProductTerm, w: BrownianPath) -> GridPath:
    """Stratonovich minus Ito for an order-2 term; for f = g (x) g this
    converges to (1/2) * integral_0^t g^2."""
    if term.order != 2:
        raise DomainError("the correction gap is implemented for order 2 only")
    s = strat_iterated(term, w)
    i = ito_iterated(term, w)
    return GridPath(w.m, s.values - i.values)


def chaos_paths(x: ChaosVector, dw: np.ndarray, scheme: str = "ito") -> np.ndarray:
    """Sum of per-term iterated integrals for a batch of increment rows.

    Returns (paths, m+1); accumulation in ascending order, term index.
    """
    npaths, m = dw.shape
    dw = np.ascontiguousarray(dw)
    total = np.zeros((npaths, m + 1))
    for k in x.kernels:
        for t in k.terms:
            if scheme == "ito":
                z = backend.chain_ito(dw, _left_table(t, m))
            elif scheme == "strat":
                z = backend.chain_strat(dw, _mid_table(t, m))
            else:
                raise DomainError(f"unknown scheme {scheme!r}")
            total = total + t.coeff * z
    return total


def mc_sup_values(x: ChaosVector, eps: float, M: int, m: int, seed: int) -> np.ndarray:
    """Sup-norm of the scaled chaos path for samples 0..M-1, shape (M,)."""
    if M < 1:
        raise DomainError("need at least one sample")
    scaled = gamma_scale(x, eps)
    sups = np.empty(M)
    for start in range(0, M, MC_CHUNK):
        count = min(MC_CHUNK, M - start)
        dw = brownian_batch(m, seed, start, count)
        paths = chaos_paths(scaled, dw, scheme="ito")
        sups[start : start + count] = np.max(np.abs(paths), axis=1)
    return sups


def mc_sup_tail(
    x: ChaosVector,
    eps: float,
    delta: float,
    M: int,
    m: int,
    seed: int,
) -> MCEstimate:
    """Fraction of Brownian paths whose scaled chaos path exceeds `delta`
    in sup norm, with binomial standard error sqrt(p(1-p)/M)."""
    if delta < 0:
        raise DomainError("threshold must be nonnegative")
    sups = mc_sup_values(x, eps, M, m, seed)
    p_hat = int(np.sum(sups >= delta)) / M
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / M)
    return MCEstimate(mean=p_hat, stderr=stderr, count=M, is_probability=True)


# ---------------------------------------------------------------------------
# explicit tail bounds


def tail_constant(alpha: float, n: int, tol: float = 1e-12) -> float:
    """Hypercontractive tail constant

        C_{alpha,n} = 1 + 4 e^alpha + (2e/sqrt(2 pi)) sum_{k>=n} k^{-1/2} (2 alpha e / n)^k,

    valid for 0 < alpha < n/(2e).  Partial sums are extended until the
    geometric remainder bound k^{-1/2} r^{k+1} / (1-r) drops below `tol`.
    """
    if n < 1:
        raise DomainError("order must be >= 1")
    if not 0.0 < alpha < n / (2.0 * math.e):
        raise DomainError("need 0 < alpha < n/(2e)")
    r = 2.0 * alpha * math.e / n
    total = 0.0
    k = n
    while True:
        total += r**k / math.sqrt(k)
        remainder = r ** (k + 1) / ((1.0 - r) * math.sqrt(k))
        if remainder < tol:
            break
        k += 1
    return 1.0 + 4.0 * math.exp(alpha) + (2.0 * math.e / math.sqrt(2.0 * math.pi)) * total


def hyper_tail_bound(xi_norm: float, n: int, delta: float, alpha: float | None = None) -> float:
    """Tail probability bound C_{alpha,n} exp(-alpha (delta/||xi||)^{2/n})
    for a single-order chaos with terminal L2 norm `xi_norm`.  The default
    alpha is 90% of the admissible supremum n/(2e)."""
    if delta <= 0:
        raise DomainError("threshold must be positive")
    if xi_norm <= 0:
        raise DomainError("norm must be positive")
    if alpha is None:
        alpha = 0.9 * n / (2.0 * math.e)
    c = tail_constant(alpha, n)
    return c * math.exp(-alpha * (delta / xi_norm) ** (2.0 / n))


def doob_bound(xi_norm: float, eps: float, delta: float) -> float:
    """Maximal-inequality tail bound
    (1+eps)^{1+1/eps} (||xi|| / delta)^{1+1/eps}; may exceed 1."""
    if not 0.0 < eps <= 1.0:
        raise DomainError("eps must lie in (0,1]")
    if delta <= 0:
        raise DomainError("threshold must be positive")
    q = 1.0 + 1.0 / eps
    return (1.0 + eps) ** q * (xi_norm / delta) ** q
