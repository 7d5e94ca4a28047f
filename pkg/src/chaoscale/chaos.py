"""Product-form symmetric kernels and chaos vectors.

A chaos vector assigns to each order n a kernel on [0,1]^n stored as a sum
of coefficient-weighted tensor products of one-dimensional factors.  The
module provides the L2 bookkeeping (Gram-expansion cube norms, simplex
norms, symmetrization), the order-wise e^{-nt} semigroup scaling and its
sqrt(eps)-per-level specialization, truncation, and the truncation tail
bound used by the skeleton checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DomainError
from .factors import (
    FactorFn,
    factor_from_json,
    factor_inner_upto,
    factor_to_json,
    factor_values,
)

SYMMETRIZE_ORDER_CAP = 8


@dataclass(frozen=True)
class ProductTerm:
    """coeff * f^1(t_1) ... f^n(t_n)."""

    coeff: float
    factors: tuple[FactorFn, ...]

    def __post_init__(self):
        if len(self.factors) < 1:
            raise DomainError("a product term needs at least one factor")
        if not math.isfinite(self.coeff):
            raise DomainError("term coefficient must be finite")

    @property
    def order(self) -> int:
        return len(self.factors)


@dataclass(frozen=True)
class Kernel:
    """Sum of product terms, all of one order.  Empty = zero kernel."""

    order: int
    terms: tuple[ProductTerm, ...]

    def __post_init__(self):
        if self.order < 1:
            raise DomainError("kernel order must be >= 1")
        for t in self.terms:
            if t.order != self.order:
                raise DomainError("all terms of a kernel share its order")


@dataclass(frozen=True)
class ChaosVector:
    """Finite family of kernels indexed by chaos order."""

    kernels: tuple[Kernel, ...]

    def __post_init__(self):
        orders = [k.order for k in self.kernels]
        if sorted(orders) != orders or len(set(orders)) != len(orders):
            raise DomainError("kernels must be sorted by distinct order")

    @property
    def max_order(self) -> int:
        return self.kernels[-1].order if self.kernels else 0

    def kernel(self, n: int) -> Kernel:
        for k in self.kernels:
            if k.order == n:
                return k
        return Kernel(order=n, terms=())


def term(coeff: float, *factors: FactorFn) -> ProductTerm:
    return ProductTerm(float(coeff), tuple(factors))


def vector(*kernels: Kernel) -> ChaosVector:
    return ChaosVector(tuple(sorted(kernels, key=lambda k: k.order)))


def single_term_vector(coeff: float, *factors: FactorFn) -> ChaosVector:
    t = term(coeff, *factors)
    return vector(Kernel(order=t.order, terms=(t,)))


# ---------------------------------------------------------------------------
# symmetrization and norms


def symmetrize(k: Kernel) -> Kernel:
    """All n! factor permutations of each term, each at coeff/n!.

    Function-equal to the symmetrization of k; capped at order 8 because the
    term count grows like n!.
    """
    if k.order > SYMMETRIZE_ORDER_CAP:
        raise DomainError(
            f"symmetrization is capped at order {SYMMETRIZE_ORDER_CAP}"
        )
    fact = math.factorial(k.order)
    out = []
    for t in k.terms:
        for perm in itertools.permutations(t.factors):
            out.append(ProductTerm(t.coeff / fact, perm))
    return Kernel(order=k.order, terms=tuple(out))


def cube_norm_sq(k: Kernel, upper: float = 1.0) -> float:
    """Squared L2 norm over [0,upper]^n via the Gram expansion
    sum_{T,T'} c_T c_T' prod_i <f_T^i, f_T'^i>."""
    total = 0.0
    for ti in k.terms:
        for tj in k.terms:
            prod = ti.coeff * tj.coeff
            for fi, fj in zip(ti.factors, tj.factors):
                prod *= factor_inner_upto(fi, fj, upper)
            total += prod
    return total


def sym_cube_norm_sq(k: Kernel, upper: float = 1.0) -> float:
    """Squared cube norm of the symmetrization of k, without materializing
    the n! permuted terms.

    Uses <sym f, sym g> = (1/n!) sum_pi prod_i <f^i, g^{pi(i)}>, i.e. the
    permanent of the factor Gram matrix divided by n!.
    """
    n = k.order
    if n > SYMMETRIZE_ORDER_CAP:
        raise DomainError(
            f"symmetrized norms are capped at order {SYMMETRIZE_ORDER_CAP}"
        )
    fact = math.factorial(n)
    perms = list(itertools.permutations(range(n)))
    total = 0.0
    for ti in k.terms:
        for tj in k.terms:
            gram = np.array(
                [
                    [factor_inner_upto(fi, fj, upper) for fj in tj.factors]
                    for fi in ti.factors
                ]
            )
            perm_sum = 0.0
            for pi in perms:
                p = 1.0
                for i in range(n):
                    p *= gram[i, pi[i]]
                perm_sum += p
            total += ti.coeff * tj.coeff * perm_sum / fact
    return total


def chaos_norm_sq(x: ChaosVector) -> float:
    """Squared L2 norm of the chaos vector:
    sum_n (1/n!) ||sym(f_n)||^2_{L2[0,1]^n}."""
    return sum(
        sym_cube_norm_sq(k) / math.factorial(k.order) for k in x.kernels
    )


def simplex_norm_sq(k: Kernel, quad_m: int = 2048) -> float:
    """Squared L2 norm of k over the ordered simplex 0<t_1<...<t_n<1.

    Exact (nested polynomial antiderivatives) when every factor is in closed
    form; nested trapezoid at resolution quad_m otherwise.  Equals the second
    moment of the iterated stochastic integral of k.
    """
    total = 0.0
    for ti in k.terms:
        for tj in k.terms:
            smooth = all(f.is_smooth for f in ti.factors) and all(
                f.is_smooth for f in tj.factors
            )
            if smooth:
                v = np.array([1.0])
                for fi, fj in zip(ti.factors, tj.factors):
                    phi = npoly.polymul(np.asarray(fi.coeffs), np.asarray(fj.coeffs))
                    v = npoly.polyint(npoly.polymul(v, phi))
                val = float(npoly.polyval(1.0, v))
            else:
                xs = np.linspace(0.0, 1.0, quad_m + 1)
                v = np.ones_like(xs)
                for fi, fj in zip(ti.factors, tj.factors):
                    integrand = v * factor_values(fi, xs) * factor_values(fj, xs)
                    avg = 0.5 * (integrand[:-1] + integrand[1:]) / quad_m
                    v = np.concatenate(([0.0], np.cumsum(avg)))
                val = float(v[-1])
            total += ti.coeff * tj.coeff * val
    return total


# ---------------------------------------------------------------------------
# scalings, truncation, tail bookkeeping


def scale_coeffs(x: ChaosVector, factor_of_order) -> ChaosVector:
    kernels = []
    for k in x.kernels:
        c = factor_of_order(k.order)
        kernels.append(
            Kernel(
                order=k.order,
                terms=tuple(ProductTerm(c * t.coeff, t.factors) for t in k.terms),
            )
        )
    return ChaosVector(tuple(kernels))


def ou_scale(x: ChaosVector, t: float) -> ChaosVector:
    """Order-n coefficients multiplied by e^{-nt} (semigroup in t)."""
    if t < 0:
        raise DomainError("semigroup time must be nonnegative")
    return scale_coeffs(x, lambda n: math.exp(-n * t))


def gamma_scale(x: ChaosVector, eps: float) -> ChaosVector:
    """Small-noise scaling: order-n coefficients multiplied by eps^{n/2},
    i.e. the semigroup at time -log(sqrt(eps)).  eps=1 is the identity."""
    if not 0.0 < eps <= 1.0:
        raise DomainError("eps must lie in (0,1]")
    return ou_scale(x, -0.5 * math.log(eps))


def truncate(x: ChaosVector, N: int) -> ChaosVector:
    """Drop all kernels of order > N."""
    if N < 0:
        raise DomainError("truncation order must be >= 0")
    return ChaosVector(tuple(k for k in x.kernels if k.order <= N))


def tail_orders(x: ChaosVector, N: int) -> ChaosVector:
    """The complement of truncate: kernels of order > N only."""
    return ChaosVector(tuple(k for k in x.kernels if k.order > N))


def tail_norm_sq(x: ChaosVector, N: int) -> float:
    """Chaos norm of the tail beyond order N."""
    return chaos_norm_sq(tail_orders(x, N))


def approx_schedule(x: ChaosVector, n: int) -> tuple[int, float]:
    """Smallest truncation order N_n whose tail chaos norm squared falls
    below 1/(2 n^2); returns (N_n, achieved tail)."""
    if n < 1:
        raise DomainError("approximation index must be >= 1")
    tol = 1.0 / (2.0 * n * n)
    for N in range(0, x.max_order + 1):
        resid = tail_norm_sq(x, N)
        if resid < tol:
            return N, resid
    return x.max_order, 0.0


def truncation_tail_bound(x: ChaosVector, N: int, L: float) -> float:
    """Uniform bound on the level set {energy <= L} for the gap between the
    full skeleton and its order-N truncation:

        sqrt( sum_{n>N} (2L)^n / n! ) * sqrt( sum_{n>N} (1/n!) ||f_n||^2 ).
    """
    if L < 0:
        raise DomainError("level must be nonnegative")
    tail = tail_orders(x, N)
    if not tail.kernels:
        return 0.0
    energy_tail = sum(
        (2.0 * L) ** k.order / math.factorial(k.order) for k in tail.kernels
    )
    return math.sqrt(energy_tail) * math.sqrt(chaos_norm_sq(tail))


def kernel_sub(a: Kernel, b: Kernel) -> Kernel:
    """a - b as a kernel (terms of b negated and appended)."""
    if a.order != b.order:
        raise DomainError("kernel orders differ")
    neg = tuple(ProductTerm(-t.coeff, t.factors) for t in b.terms)
    return Kernel(order=a.order, terms=a.terms + neg)


# ---------------------------------------------------------------------------
# serialization


def chaos_to_json(x: ChaosVector) -> dict:
    return {
        "kernels": [
            {
                "order": k.order,
                "terms": [
                    {
                        "coeff": t.coeff,
                        "factors": [factor_to_json(f) for f in t.factors],
                    }
                    for t in k.terms
                ],
            }
            for k in x.kernels
        ]
    }


def chaos_from_json(obj: dict) -> ChaosVector:
    kernels = []
    for kobj in obj["kernels"]:
        order = int(kobj["order"])
        terms = tuple(
            ProductTerm(
                float(tobj["coeff"]),
                tuple(factor_from_json(f) for f in tobj["factors"]),
            )
            for tobj in kobj["terms"]
        )
        kernels.append(Kernel(order=order, terms=terms))
    return ChaosVector(tuple(sorted(kernels, key=lambda k: k.order)))
