"""Closed linear SDE system for product-form chaos vectors.

A chaos path Y_t = sum_n C eps^{n/2} * (n-fold iterated integral) is the
first coordinate of a finite linear system.  The state carries two copies
of Y (as Z) plus, per product term of order n, one 2-vector chain X^{n,k,j}
for every 0 <= j < k < n:

    comp1 = eps^{(n-k)/2} * iterated integral of f^1..f^{n-k}
    comp2 = g_{n,k,j}(t) * comp1,   g_{n,k,j} = prod of the top factors
                                                 positions n-k .. n-j-1

Chains with k = n degenerate to the known boundary pair (1, g_{n,n,j}(t))
and enter the dynamics as time functions; k > n contributes nothing.  The
structure of the dynamics:

  * diffusion (per Stratonovich dw): each component is fed by the comp2 of
    the next chain (k+1), scaled by sqrt(eps);
  * a -1/2 * eps * dt correction fed by the comp2 of the chain after next
    (k+2) - the quadratic-variation correction, dropped for smooth drivers;
  * a transport drift g'_{n,k,j}(t) * comp1 on comp2 - the product rule in
    time, present for every driver.

Factors must be in closed form (constant/polynomial): the transport drift
needs exact derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .chaos import ChaosVector
from .errors import DomainError
from .factors import FactorFn, constant, factor_derivative, factor_product, factor_values
from .paths import CameronMartinPath, GridPath
from .simulate import BrownianPath


@dataclass
class SystemDynamics:
    """Sparse linear vector fields over the stacked state, ready to step."""

    eps: float
    nstates: int
    state_labels: list
    # diffusion links: state->state and boundary->state
    a_entries: tuple
    ab_entries: tuple
    # -1/2 eps dt correction links
    b_entries: tuple
    bb_entries: tuple
    # transport drift (row, col, derivative-function index)
    d_entries: tuple
    boundary_fns: list[FactorFn]
    deriv_fns: list[FactorFn]
    _tables: dict = field(default_factory=dict, repr=False)

    def tables(self, m: int):
        """Boundary/derivative values at left and midpoint times, cached."""
        if m not in self._tables:
            left = np.arange(m) / m
            mid = (np.arange(m) + 0.5) / m

            def table(fns, ts):
                if not fns:
                    return np.zeros((0, m))
                return np.ascontiguousarray(
                    np.vstack([factor_values(f, ts) for f in fns])
                )

            self._tables[m] = (
                table(self.boundary_fns, left),
                table(self.boundary_fns, mid),
                table(self.deriv_fns, left),
                table(self.deriv_fns, mid),
            )
        return self._tables[m]


def _entry_arrays(entries, value_dtype=np.float64):
    rows = np.array([e[0] for e in entries], dtype=np.int64)
    cols = np.array([e[1] for e in entries], dtype=np.int64)
    vals = np.array([e[2] for e in entries], dtype=value_dtype)
    return rows, cols, vals


def build_system(x: ChaosVector, eps: float) -> SystemDynamics:
    """Assemble the linear fields for the chaos vector at noise level eps."""
    if not 0.0 <= eps <= 1.0:
        raise DomainError("eps must lie in [0,1]")
    for k in x.kernels:
        for t in k.terms:
            if not all(f.is_smooth for f in t.factors):
                raise DomainError(
                    "the closed system needs closed-form factors "
                    "(exact time derivatives)"
                )

    labels = [("Z", 0), ("Z", 1)]
    offset: dict[tuple, int] = {}
    terms = []
    for k in x.kernels:
        for t in k.terms:
            terms.append(t)
    for ti, t in enumerate(terms):
        n = t.order
        for kk in range(1, n):
            for jj in range(kk):
                offset[(ti, kk, jj)] = len(labels)
                labels.append((ti, n, kk, jj, 1))
                labels.append((ti, n, kk, jj, 2))

    boundary_fns: list[FactorFn] = []
    boundary_idx: dict[tuple, int] = {}
    deriv_fns: list[FactorFn] = []

    def g_product(t, lo: int, hi: int) -> FactorFn:
        out = constant(1.0)
        for f in t.factors[lo:hi]:
            out = factor_product(out, f)
        return out

    def boundary(ti: int, jj: int) -> int:
        # comp2 of the degenerate chain (n, n, jj): the factor product
        # positions 0 .. n-jj-1
        key = (ti, jj)
        if key not in boundary_idx:
            t = terms[ti]
            boundary_idx[key] = len(boundary_fns)
            boundary_fns.append(g_product(t, 0, t.order - jj))
        return boundary_idx[key]

    a_entries, ab_entries = [], []
    b_entries, bb_entries = [], []
    d_entries = []

    def link(row: int, ti: int, kk: int, jj: int, val: float, correction: bool):
        """Feed `row` from comp2 of chain (kk, jj) of term ti (or its
        boundary/zero degeneration), into the diffusion or correction field."""
        n = terms[ti].order
        if kk > n:
            return
        if kk == n:
            dest = (bb_entries if correction else ab_entries)
            dest.append((row, boundary(ti, jj), val))
        else:
            dest = (b_entries if correction else a_entries)
            dest.append((row, offset[(ti, kk, jj)] + 1, val))

    for ti, t in enumerate(terms):
        n = t.order
        c = t.coeff
        for zrow in (0, 1):
            link(zrow, ti, 1, 0, c, correction=False)
            link(zrow, ti, 2, 0, -0.5 * c, correction=True)
        for kk in range(1, n):
            for jj in range(kk):
                s1 = offset[(ti, kk, jj)]
                s2 = s1 + 1
                link(s1, ti, kk + 1, kk, 1.0, correction=False)
                link(s1, ti, kk + 2, kk, -0.5, correction=True)
                link(s2, ti, kk + 1, jj, 1.0, correction=False)
                link(s2, ti, kk + 2, jj, -0.5, correction=True)
                g = g_product(t, n - kk, n - jj)
                dg = factor_derivative(g)
                d_entries.append((s2, s1, len(deriv_fns)))
                deriv_fns.append(dg)

    return SystemDynamics(
        eps=eps,
        nstates=len(labels),
        state_labels=labels,
        a_entries=_entry_arrays(a_entries),
        ab_entries=_entry_arrays(ab_entries),
        b_entries=_entry_arrays(b_entries),
        bb_entries=_entry_arrays(bb_entries),
        d_entries=_entry_arrays(d_entries, value_dtype=np.int64),
        boundary_fns=boundary_fns,
        deriv_fns=deriv_fns,
    )


def integrate_system_batch(
    dyn: SystemDynamics, dw: np.ndarray, smooth: bool = False
) -> np.ndarray:
    """Midpoint-Heun integration over a batch of increment rows (B, m);
    returns the first coordinate of Z on the grid, shape (B, m+1)."""
    dw = np.ascontiguousarray(dw, dtype=float)
    m = dw.shape[1]
    gb_l, gb_m, dv_l, dv_m = dyn.tables(m)
    return backend.heun_system(
        dw,
        1.0 / m,
        math.sqrt(dyn.eps),
        dyn.eps,
        1 if smooth else 0,
        *dyn.a_entries,
        *dyn.ab_entries,
        *dyn.b_entries,
        *dyn.bb_entries,
        *dyn.d_entries,
        gb_l,
        gb_m,
        dv_l,
        dv_m,
        dyn.nstates,
    )


def integrate_system(dyn: SystemDynamics, w: BrownianPath) -> GridPath:
    """First coordinate of the system driven by a Brownian path."""
    z = integrate_system_batch(dyn, w.increments[None, :], smooth=False)
    return GridPath(w.m, z[0])


def integrate_system_smooth(dyn: SystemDynamics, h: CameronMartinPath) -> GridPath:
    """First coordinate of the system driven by a finite-energy path
    (dw := hdot dt).  Correction fields are dropped: a smooth driver has no
    quadratic variation.  At eps=1 this reproduces the skeleton."""
    dw = (h.slopes / h.m)[None, :]
    z = integrate_system_batch(dyn, dw, smooth=True)
    return GridPath(h.m, z[0])
