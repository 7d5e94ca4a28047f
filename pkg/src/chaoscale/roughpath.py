"""Level-2 rough-path lifts of piecewise-linear paths, multiplicative
(Chen) composition, dilation, and the two-level p-variation metric.

Storage is per-step (O(m)); any interval value is reconstructed from prefix
folds, which is exact because composition is associative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .paths import GridPath


@dataclass(frozen=True)
class GridRoughPath:
    """Per-step increments (m,d) and areas (m,d,d) over t_i = i/m."""

    d: int
    m: int
    level1: np.ndarray = field(repr=False)
    level2: np.ndarray = field(repr=False)

    def __post_init__(self):
        l1 = np.array(self.level1, dtype=float)
        l2 = np.array(self.level2, dtype=float)
        if l1.shape != (self.m, self.d) or l2.shape != (self.m, self.d, self.d):
            raise DomainError("level shapes do not match (m, d)")
        l1.flags.writeable = False
        l2.flags.writeable = False
        object.__setattr__(self, "level1", l1)
        object.__setattr__(self, "level2", l2)


def _as_matrix(path) -> np.ndarray:
    if isinstance(path, GridPath):
        return path.values[:, None]
    if isinstance(path, (list, tuple)) and path and isinstance(path[0], GridPath):
        m = path[0].m
        if any(p.m != m for p in path):
            raise DomainError("coordinate paths must share one grid")
        return np.column_stack([p.values for p in path])
    arr = np.asarray(path, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def lift_piecewise_linear(path) -> GridRoughPath:
    """Canonical lift: per-step increment dx and area (1/2) dx (x) dx,
    exact for a linear segment."""
    values = _as_matrix(path)
    m = values.shape[0] - 1
    if m < 1:
        raise DomainError("need at least one segment")
    d = values.shape[1]
    incr = np.diff(values, axis=0)
    areas = 0.5 * np.einsum("si,sj->sij", incr, incr)
    return GridRoughPath(d=d, m=m, level1=incr, level2=areas)


def chen_compose(a, b):
    """Compose adjacent interval values: (w1,w2) over [s,t] and [t,u] to
    [s,u] via w2_su = w2_st + w2_tu + w1_st (x) w1_tu."""
    w1a, w2a = a
    w1b, w2b = b
    return w1a + w1b, w2a + w2b + np.outer(w1a, w1b)


def prefixes(rp: GridRoughPath) -> tuple[np.ndarray, np.ndarray]:
    """Composed values over [0, t_i] for every grid index i."""
    w1 = np.zeros((rp.m + 1, rp.d))
    np.cumsum(rp.level1, axis=0, out=w1[1:])
    w2 = np.zeros((rp.m + 1, rp.d, rp.d))
    acc = np.zeros((rp.d, rp.d))
    for i in range(rp.m):
        acc = acc + rp.level2[i] + np.outer(w1[i], rp.level1[i])
        w2[i + 1] = acc
    return w1, w2


def pair_value(rp: GridRoughPath, i: int, j: int, pre=None):
    """Composed (w1, w2) over [t_i, t_j]."""
    if not 0 <= i <= j <= rp.m:
        raise DomainError("need 0 <= i <= j <= m")
    w1, w2 = prefixes(rp) if pre is None else pre
    inc = w1[j] - w1[i]
    area = w2[j] - w2[i] - np.outer(w1[i], inc)
    return inc, area


def dilate(rp: GridRoughPath, eps: float) -> GridRoughPath:
    """Level-1 scaled by sqrt(eps), level-2 by eps."""
    if eps <= 0:
        raise DomainError("dilation parameter must be positive")
    return GridRoughPath(
        d=rp.d,
        m=rp.m,
        level1=np.sqrt(eps) * rp.level1,
        level2=eps * rp.level2,
    )


def _pvar_dp(col_fn, npoints: int, p: float) -> float:
    """max over sub-partitions of sum dist[i,j]^p, by
    V[j] = max_{i<j} (V[i] + dist[i,j]^p).

    `col_fn(j)` returns the distances dist[0:j, j]; columns are produced on
    demand so the quadratic pair table is never materialized.
    """
    v = np.zeros(npoints)
    for j in range(1, npoints):
        v[j] = np.max(v[:j] + col_fn(j) ** p)
    return float(v[npoints - 1])


def p_var_level(increments: np.ndarray, p: float) -> float:
    """p-variation of one level over the stored grid:
    (sup_D sum_l |delta over [t_{l-1}, t_l]|^p)^(1/p), the supremum running
    over all sub-partitions of the grid points."""
    if p < 1:
        raise DomainError("need p >= 1")
    incr = np.asarray(increments, dtype=float)
    if incr.ndim == 1:
        incr = incr[:, None]
    cum = np.concatenate([np.zeros((1, incr.shape[1])), np.cumsum(incr, axis=0)])

    def col(j):
        diff = cum[j] - cum[:j]
        return np.sqrt(np.sum(diff * diff, axis=1))

    return _pvar_dp(col, cum.shape[0], p) ** (1.0 / p)


def p_var_dist(x: GridRoughPath, y: GridRoughPath, p: float = 2.5) -> float:
    """Two-level p-variation distance

        sup_D (sum |w1-y1|^p)^(1/p) + sup_D (sum |w2-y2|^(p/2))^(2/p)

    with independent partition suprema per level; interval values of each
    path are Chen-composed separately before subtracting.
    """
    if not 2.0 < p < 3.0:
        raise DomainError("need 2 < p < 3")
    if x.m != y.m or x.d != y.d:
        raise DomainError("rough paths must share grid and dimension")
    w1x, w2x = prefixes(x)
    w1y, w2y = prefixes(y)

    delta1 = w1x - w1y

    def col1(j):
        diff = delta1[j] - delta1[:j]
        return np.sqrt(np.sum(diff * diff, axis=1))

    def col2(j):
        # w2_{ij} = W2[j] - W2[i] - W1[i] (x) (W1[j]-W1[i]), per path
        ax = w2x[j] - w2x[:j] - np.einsum("ia,ib->iab", w1x[:j], w1x[j] - w1x[:j])
        ay = w2y[j] - w2y[:j] - np.einsum("ia,ib->iab", w1y[:j], w1y[j] - w1y[:j])
        diff = ax - ay
        return np.sqrt(np.sum(diff * diff, axis=(1, 2)))

    npoints = x.m + 1
    term1 = _pvar_dp(col1, npoints, p) ** (1.0 / p)
    term2 = _pvar_dp(col2, npoints, p / 2.0) ** (2.0 / p)
    return term1 + term2


def rough_to_json(rp: GridRoughPath) -> dict:
    return {
        "d": rp.d,
        "m": rp.m,
        "level1": rp.level1.tolist(),
        "level2": rp.level2.tolist(),
    }


def rough_from_json(obj: dict) -> GridRoughPath:
    return GridRoughPath(
        d=int(obj["d"]),
        m=int(obj["m"]),
        level1=np.asarray(obj["level1"], dtype=float),
        level2=np.asarray(obj["level2"], dtype=float),
    )
