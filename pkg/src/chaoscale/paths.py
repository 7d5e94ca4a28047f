"""Paths on the uniform grid t_i = i/m and finite-energy (Cameron-Martin)
paths with their piecewise-linear interpretation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .factors import FactorFn, factor_values, require_same_grid
from .rng import substream


@dataclass(frozen=True)
class GridPath:
    """Values at t_i = i/m, i = 0..m, starting at 0.  Immutable."""

    m: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if self.m < 1:
            raise DomainError("grid resolution must be >= 1")
        if vals.shape != (self.m + 1,):
            raise DomainError(f"expected {self.m + 1} values, got {vals.shape}")
        if vals[0] != 0.0:
            raise DomainError("paths start at 0")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m + 1)


@dataclass(frozen=True)
class CameronMartinPath:
    """A GridPath read as piecewise linear, with per-segment derivative
    slope_i = m * (values[i+1] - values[i])."""

    base: GridPath

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    @property
    def slopes(self) -> np.ndarray:
        return self.base.m * np.diff(self.base.values)


def path_from_values(values) -> GridPath:
    values = np.asarray(values, dtype=float)
    return GridPath(m=len(values) - 1, values=values)


def cm_from_slopes(slopes) -> CameronMartinPath:
    slopes = np.asarray(slopes, dtype=float)
    m = len(slopes)
    values = np.concatenate(([0.0], np.cumsum(slopes / m)))
    return CameronMartinPath(GridPath(m=m, values=values))


def cm_from_function(fn, m: int) -> CameronMartinPath:
    """Sample t -> fn(t) on the grid; fn(0) must be 0."""
    ts = np.linspace(0.0, 1.0, m + 1)
    return CameronMartinPath(path_from_values([fn(t) for t in ts]))


def energy(h: CameronMartinPath) -> float:
    """Half the squared H1 norm: (1/2) * sum slope_i^2 / m, exact for
    piecewise-linear paths."""
    s = h.slopes
    return float(0.5 * np.sum(s * s) / h.m)


def sup_norm(w: GridPath | CameronMartinPath) -> float:
    return float(np.max(np.abs(w.values)))


def pairing(f: FactorFn, h: CameronMartinPath) -> float:
    """Integral of f against the derivative of h.

    Per-segment midpoint sampling of f; exact when f is constant on each
    segment, O(m^-2) otherwise.
    """
    require_same_grid(f, h.m)
    mid = (np.arange(h.m) + 0.5) / h.m
    return float(np.sum(factor_values(f, mid) * h.slopes) / h.m)


def sample_level_set(L: float, m: int, seed: int, index: int = 0) -> CameronMartinPath:
    """Draw a path from the energy level set {energy(h) <= L}.

    I.i.d. normal segment slopes, rescaled so that energy(h) = U*L with U
    uniform on [0,1].  Deterministic in (L, m, seed, index); `index` selects
    a substream so batches of draws are order-independent.
    """
    if L < 0:
        raise DomainError("level must be nonnegative")
    gen = substream(seed, index)
    slopes = gen.standard_normal(m)
    target = gen.uniform() * L
    e = 0.5 * float(np.sum(slopes * slopes)) / m
    if e == 0.0 or L == 0.0:
        return cm_from_slopes(np.zeros(m))
    return cm_from_slopes(slopes * np.sqrt(target / e))


def path_add(a: GridPath, b: GridPath) -> GridPath:
    if a.m != b.m:
        raise DomainError("resolution mismatch")
    return GridPath(a.m, a.values + b.values)


def path_sub(a: GridPath, b: GridPath) -> GridPath:
    if a.m != b.m:
        raise DomainError("resolution mismatch")
    return GridPath(a.m, a.values - b.values)


def path_scale(a: GridPath, c: float) -> GridPath:
    return GridPath(a.m, c * a.values)


def path_to_json(p: GridPath) -> dict:
    return {"m": p.m, "values": [float(v) for v in p.values]}


def path_from_json(obj: dict) -> GridPath:
    return GridPath(m=int(obj["m"]), values=np.asarray(obj["values"], dtype=float))


def path_to_csv(p: GridPath, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["t", "value"])
    for t, v in zip(p.times, p.values):
        writer.writerow([repr(float(t)), repr(float(v))])
