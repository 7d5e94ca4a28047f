"""One-dimensional factor functions on [0,1].

Product-form kernels are tensor products of these factors.  Three
representations are supported: constants and polynomials (closed-form
inner products, exact derivatives) and linearly interpolated grid samples
(composite-trapezoid quadrature at the finest resolution involved).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DomainError, ResolutionMismatch


@dataclass(frozen=True)
class FactorFn:
    """A real function on [0,1] in one of the closed or sampled forms.

    `coeffs` are ascending polynomial coefficients (constants are degree-0
    polynomials); grid forms carry `m` uniform segments and `m+1` samples.
    Instances are immutable and safe to share.
    """

    kind: str
    coeffs: tuple[float, ...] | None = None
    m: int | None = None
    samples: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind in ("constant", "poly"):
            if not self.coeffs:
                raise DomainError("closed-form factor needs coefficients")
        elif self.kind == "grid":
            if self.m is None or self.m < 1:
                raise DomainError("grid factor needs m >= 1")
            if self.samples is None or len(self.samples) != self.m + 1:
                raise DomainError("grid factor needs m+1 samples")
        else:
            raise DomainError(f"unknown factor kind {self.kind!r}")

    @property
    def is_smooth(self) -> bool:
        return self.kind != "grid"


def constant(c: float) -> FactorFn:
    return FactorFn("constant", coeffs=(float(c),))


def poly(coeffs) -> FactorFn:
    return FactorFn("poly", coeffs=tuple(float(c) for c in coeffs))


def grid(m: int, samples) -> FactorFn:
    return FactorFn("grid", m=int(m), samples=tuple(float(s) for s in samples))


def factor_values(f: FactorFn, t) -> np.ndarray:
    """Evaluate `f` at the points `t` (vectorized)."""
    t = np.asarray(t, dtype=float)
    if f.kind == "grid":
        nodes = np.linspace(0.0, 1.0, f.m + 1)
        return np.interp(t, nodes, np.asarray(f.samples))
    return npoly.polyval(t, np.asarray(f.coeffs))


def factor_product(f: FactorFn, g: FactorFn) -> FactorFn:
    """Pointwise product.  Exact for closed forms; grid forms are resampled
    at the finest resolution involved (the product of linear interpolants is
    only node-exact)."""
    if f.is_smooth and g.is_smooth:
        return poly(npoly.polymul(np.asarray(f.coeffs), np.asarray(g.coeffs)))
    m = max(h.m for h in (f, g) if h.kind == "grid")
    nodes = np.linspace(0.0, 1.0, m + 1)
    return grid(m, factor_values(f, nodes) * factor_values(g, nodes))


def factor_derivative(f: FactorFn) -> FactorFn:
    """d/dt of a closed-form factor.  Grid factors are rejected: no exact
    derivative exists and the callers that need one require smoothness."""
    if not f.is_smooth:
        raise DomainError("derivative of a grid-sampled factor is undefined")
    c = npoly.polyder(np.asarray(f.coeffs))
    if c.size == 0:
        return constant(0.0)
    return poly(c)


def _quad_resolution(f: FactorFn, g: FactorFn) -> int:
    return max(h.m for h in (f, g) if h.kind == "grid")


def factor_inner(f: FactorFn, g: FactorFn) -> float:
    """Inner product integral of f*g over [0,1].

    Exact for closed forms (polynomial antiderivative); composite trapezoid
    at the max grid resolution otherwise.
    """
    return factor_inner_upto(f, g, 1.0)


def factor_inner_upto(f: FactorFn, g: FactorFn, t: float) -> float:
    """Inner product integral of f*g over [0,t], 0 <= t <= 1."""
    if not 0.0 <= t <= 1.0:
        raise DomainError("inner-product upper limit must lie in [0,1]")
    if t == 0.0:
        return 0.0
    if f.is_smooth and g.is_smooth:
        prod = npoly.polymul(np.asarray(f.coeffs), np.asarray(g.coeffs))
        return float(npoly.polyval(t, npoly.polyint(prod)))
    m = _quad_resolution(f, g)
    xs = np.linspace(0.0, t, m + 1)
    return float(np.trapezoid(factor_values(f, xs) * factor_values(g, xs), xs))


def factor_to_json(f: FactorFn) -> dict:
    if f.kind == "constant":
        return {"kind": "constant", "c": f.coeffs[0]}
    if f.kind == "poly":
        return {"kind": "poly", "coeffs": list(f.coeffs)}
    return {"kind": "grid", "m": f.m, "samples": list(f.samples)}


def factor_from_json(obj: dict) -> FactorFn:
    kind = obj.get("kind")
    if kind == "constant":
        return constant(obj["c"])
    if kind == "poly":
        return poly(obj["coeffs"])
    if kind == "grid":
        return grid(obj["m"], obj["samples"])
    raise DomainError(f"unknown factor kind {kind!r}")


def require_same_grid(f: FactorFn, m: int) -> None:
    """Grid factors may only be paired with paths at their own resolution."""
    if f.kind == "grid" and f.m != m:
        raise ResolutionMismatch(
            f"grid factor at resolution {f.m} vs path at resolution {m}"
        )
