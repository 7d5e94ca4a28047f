import numpy as np
import pytest

from chaoscale.chaos import Kernel, single_term_vector, symmetrize, term, vector
from chaoscale.errors import DomainError
from chaoscale.factors import constant, poly
from chaoscale.paths import (
    cm_from_function,
    cm_from_slopes,
    energy,
    sample_level_set,
    sup_norm,
)
from chaoscale.skeleton import (
    eval_skeleton,
    eval_skeleton_batch,
    eval_term,
    modulus_bound,
    uniform_gap,
)

ONE = constant(1.0)
T = poly([0.0, 1.0])


def test_eval_term_order1_identity():
    h = sample_level_set(1.0, 128, seed=3)
    out = eval_term(term(1.0, ONE), h)
    np.testing.assert_allclose(out.values, h.values, atol=1e-12)


def test_eval_term_order2_examples():
    h = cm_from_function(lambda t: t, 64)
    out = eval_term(term(1.0, ONE, ONE), h)
    np.testing.assert_allclose(out.values, 0.5 * h.values**2, atol=1e-12)
    h2 = cm_from_function(lambda t: 2 * t, 64)
    out2 = eval_term(term(1.0, ONE, ONE), h2)
    np.testing.assert_allclose(out2.values, 2.0 * h.values**2, atol=1e-12)


def test_eval_skeleton_square_identity_any_h():
    # order-2 constant kernel: F(h) = h^2/2 exactly, any piecewise-linear h
    h = sample_level_set(2.0, 97, seed=8)
    res = eval_skeleton(single_term_vector(1.0, ONE, ONE), h)
    np.testing.assert_allclose(res.path.values, 0.5 * h.values**2, atol=1e-12)


def test_per_order_sum_and_zero_path():
    x = vector(
        Kernel(1, (term(1.0, ONE),)),
        Kernel(2, (term(0.5, ONE, ONE),)),
    )
    h = sample_level_set(1.0, 64, seed=5)
    res = eval_skeleton(x, h)
    np.testing.assert_allclose(
        res.path.values,
        res.per_order[1].values + res.per_order[2].values,
        atol=1e-14,
    )
    zero = cm_from_slopes(np.zeros(64))
    assert sup_norm(eval_skeleton(x, zero).path) == 0.0


def test_order_homogeneity():
    t3 = term(0.7, ONE, T, poly([1.0, -0.5]))
    h = sample_level_set(1.0, 64, seed=2)
    hc = cm_from_slopes(1.7 * h.slopes)
    a = eval_term(t3, hc).values
    b = 1.7**3 * eval_term(t3, h).values
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-14)


def test_grid_convergence_rate():
    # polynomial factors and polynomial h: midpoint/trapezoid error O(m^-2)
    t2 = term(1.0, T, T)
    exact = 2.0 / 9.0  # iterated integral of s*u against (t^2)' twice at t=1
    errs = []
    for m in (8, 16, 32, 64, 128):
        h = cm_from_function(lambda t: t * t, m)
        errs.append(abs(eval_term(t2, h).values[-1] - exact))
    for a, b in zip(errs, errs[1:]):
        if a > 1e-10:
            assert b < a / 3.0


def test_symmetrized_kernel_evaluates_equally():
    # kernels that are symmetric as functions: symmetrization only regroups
    rng = np.random.default_rng(1)
    h = sample_level_set(1.0, 64, seed=7)
    for n in (2, 3, 4):
        f = poly(rng.normal(size=2))
        k = Kernel(n, (term(0.8, *[f] * n),))  # f x f x ... symmetric
        a = eval_skeleton(vector(k), h).path.values
        b = eval_skeleton(vector(symmetrize(k)), h).path.values
        assert np.max(np.abs(a - b)) <= 1e-8


def test_representation_invariance():
    # same symmetric function, two product representations
    onep = poly([1.0, 1.0])
    expanded = Kernel(
        2,
        (
            term(1.0, ONE, ONE),
            term(1.0, ONE, T),
            term(1.0, T, ONE),
            term(1.0, T, T),
        ),
    )
    h = sample_level_set(1.0, 128, seed=12)
    a = eval_skeleton(single_term_vector(1.0, onep, onep), h).path.values
    b = eval_skeleton(vector(expanded), h).path.values
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_weak_continuity_proxy():
    x = vector(
        Kernel(1, (term(1.0, ONE),)),
        Kernel(2, (term(1.0, ONE, ONE),)),
    )
    h = sample_level_set(0.4, 64, seed=3)
    g = sample_level_set(0.4, 64, seed=4)
    base = eval_skeleton(x, h).path.values
    gaps = []
    for k in (1, 2, 4, 8, 16):
        hk = cm_from_slopes(h.slopes + g.slopes / k)
        gaps.append(np.max(np.abs(eval_skeleton(x, hk).path.values - base)))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.05


def test_batch_matches_single():
    x = vector(
        Kernel(1, (term(1.0, T),)),
        Kernel(3, (term(0.3, ONE, T, ONE),)),
    )
    hs = [sample_level_set(1.0, 32, seed=1, index=i) for i in range(4)]
    batch = eval_skeleton_batch(x, np.vstack([h.slopes for h in hs]))
    for i, h in enumerate(hs):
        np.testing.assert_allclose(
            batch[i], eval_skeleton(x, h).path.values, atol=1e-14
        )


def test_uniform_gap():
    x = vector(
        Kernel(1, (term(1.0, ONE),)),
        Kernel(2, (term(1.0, ONE, ONE),)),
    )
    gap, bound = uniform_gap(x, 2, 0.5, 5, seed=1, m=64)
    assert gap == 0.0 and bound == 0.0
    gap, bound = uniform_gap(x, 1, 0.0, 3, seed=1, m=64)
    assert gap == 0.0
    m = 128
    gap, bound = uniform_gap(x, 1, 0.5, 100, seed=6, m=m)
    assert gap <= bound + 10.0 / m**2
    with pytest.raises(DomainError):
        uniform_gap(x, 1, 0.5, 0, seed=1)


def test_modulus_bound_examples():
    x1 = single_term_vector(1.0, ONE)
    assert modulus_bound(x1, 0.3, 0.3, 1.0) == 0.0
    assert modulus_bound(x1, 0.0, 1.0, 0.0) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(DomainError):
        modulus_bound(x1, 0.6, 0.5, 1.0)


def test_modulus_bound_dominates_increments():
    L = 0.5
    x = vector(
        Kernel(1, (term(1.0, T),)),
        Kernel(2, (term(0.7, ONE, ONE),)),
    )
    m = 64
    pairs = [(0.0, 0.25), (0.25, 0.75), (0.5, 1.0), (0.0, 1.0)]
    for i in range(25):
        h = sample_level_set(L, m, seed=20, index=i)
        vals = eval_skeleton(x, h).path.values
        for s, t in pairs:
            si, ti = int(s * m), int(t * m)
            inc = abs(vals[ti] - vals[si])
            assert inc <= modulus_bound(x, s, t, L) + 1e-9


def test_energy_of_minimal_grid():
    h = cm_from_slopes([2.0])  # m=1 degenerate grid is allowed
    assert energy(h) == 2.0
    out = eval_term(term(1.0, ONE), h)
    assert out.values[-1] == pytest.approx(2.0)
