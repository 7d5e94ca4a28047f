import math

import numpy as np
import pytest

from chaoscale.chaos import Kernel, gamma_scale, single_term_vector, term, vector
from chaoscale.errors import DomainError
from chaoscale.factors import constant, factor_values, grid, poly
from chaoscale.paths import cm_from_function, sample_level_set
from chaoscale.simulate import chaos_paths, sample_bm
from chaoscale.skeleton import eval_skeleton
from chaoscale.system import (
    build_system,
    integrate_system,
    integrate_system_batch,
    integrate_system_smooth,
)

ONE = constant(1.0)
T = poly([0.0, 1.0])


def reference_heun(dyn, dw, smooth=False):
    """Slow reference integrator returning the full state trajectory."""
    m = len(dw)
    dt = 1.0 / m
    sqrt_eps = math.sqrt(dyn.eps)
    left = np.arange(m) / m
    mid = (np.arange(m) + 0.5) / m
    gbl = np.array([factor_values(f, left) for f in dyn.boundary_fns]).reshape(
        len(dyn.boundary_fns), m
    )
    gbm = np.array([factor_values(f, mid) for f in dyn.boundary_fns]).reshape(
        len(dyn.boundary_fns), m
    )
    dvl = np.array([factor_values(f, left) for f in dyn.deriv_fns]).reshape(
        len(dyn.deriv_fns), m
    )
    dvm = np.array([factor_values(f, mid) for f in dyn.deriv_fns]).reshape(
        len(dyn.deriv_fns), m
    )

    def fields(state, gb, dv, i):
        diffu = np.zeros_like(state)
        for r, c, v in zip(*dyn.a_entries):
            diffu[r] += v * state[c]
        for r, q, v in zip(*dyn.ab_entries):
            diffu[r] += v * gb[q, i]
        diffu *= sqrt_eps
        drift = np.zeros_like(state)
        if not smooth:
            for r, c, v in zip(*dyn.b_entries):
                drift[r] += v * state[c]
            for r, q, v in zip(*dyn.bb_entries):
                drift[r] += v * gb[q, i]
            drift *= dyn.eps
        for r, c, j in zip(*dyn.d_entries):
            drift[r] += dv[j, i] * state[c]
        return drift, diffu

    x = np.zeros(dyn.nstates)
    traj = [x.copy()]
    for i in range(m):
        drift, diffu = fields(x, gbl, dvl, i)
        xbar = x + 0.5 * dt * drift + 0.5 * dw[i] * diffu
        drift, diffu = fields(xbar, gbm, dvm, i)
        x = x + dt * drift + dw[i] * diffu
        traj.append(x.copy())
    return np.array(traj)


def test_single_level_chain_is_scaled_bm():
    x = single_term_vector(1.0, ONE)
    dyn = build_system(x, eps=0.36)
    w = sample_bm(256, seed=1, index=0)
    out = integrate_system(dyn, w)
    np.testing.assert_allclose(out.values, 0.6 * w.values, atol=1e-10)


def test_eps_zero_freezes():
    x = vector(
        Kernel(1, (term(1.0, ONE),)),
        Kernel(2, (term(1.0, ONE, ONE),)),
    )
    dyn = build_system(x, eps=0.0)
    w = sample_bm(64, seed=2, index=0)
    assert np.all(integrate_system(dyn, w).values == 0.0)


def test_grid_factors_rejected():
    x = single_term_vector(1.0, grid(4, [0.0, 1.0, 0.0, 1.0, 0.0]))
    with pytest.raises(DomainError):
        build_system(x, eps=0.5)
    with pytest.raises(DomainError):
        build_system(single_term_vector(1.0, ONE), eps=1.5)


def test_z_copies_identical():
    x = vector(
        Kernel(1, (term(0.8, T),)),
        Kernel(3, (term(1.0, ONE, T, poly([1.0, 1.0])),)),
    )
    dyn = build_system(x, eps=0.7)
    w = sample_bm(128, seed=3, index=1)
    traj = reference_heun(dyn, np.diff(w.values))
    np.testing.assert_allclose(traj[:, 0], traj[:, 1], atol=1e-14)


def test_backend_matches_reference():
    x = vector(
        Kernel(2, (term(1.0, T, poly([1.0, -1.0])),)),
        Kernel(3, (term(0.5, ONE, T, ONE),)),
    )
    dyn = build_system(x, eps=0.5)
    w = sample_bm(64, seed=4, index=2)
    traj = reference_heun(dyn, np.diff(w.values))
    fast = integrate_system(dyn, w)
    np.testing.assert_allclose(fast.values, traj[:, 0], atol=1e-12)


def test_cross_oracle_direct_ito():
    # first coordinate approximates the scaled sum of discrete Ito integrals
    x = vector(
        Kernel(1, (term(math.sqrt(2.0 / 3.0), ONE),)),
        Kernel(2, (term(math.sqrt(2.0 / 3.0), ONE, ONE),)),
    )
    eps = 0.5
    dyn = build_system(x, eps)
    scaled = gamma_scale(x, eps)
    ok = 0
    for i in range(20):
        w = sample_bm(2048, seed=5, index=i)
        zsys = integrate_system(dyn, w).values
        zdir = chaos_paths(scaled, w.increments[None, :], "ito")[0]
        if np.max(np.abs(zsys - zdir)) <= 0.05:
            ok += 1
    assert ok >= 19


def test_time_dependent_factors_cross_oracle():
    x = single_term_vector(1.0, T, poly([1.0, 1.0]))
    eps = 0.8
    dyn = build_system(x, eps)
    scaled = gamma_scale(x, eps)
    gaps = []
    for i in range(10):
        w = sample_bm(4096, seed=6, index=i)
        zsys = integrate_system(dyn, w).values
        zdir = chaos_paths(scaled, w.increments[None, :], "ito")[0]
        gaps.append(np.max(np.abs(zsys - zdir)))
    assert np.median(gaps) < 0.03


def test_smooth_driver_reproduces_skeleton():
    x = vector(
        Kernel(1, (term(1.0, T),)),
        Kernel(2, (term(0.5, ONE, poly([1.0, 1.0])),)),
        Kernel(3, (term(0.25, ONE, ONE, ONE),)),
    )
    dyn = build_system(x, eps=1.0)
    for mk in (lambda t: math.sin(t), lambda t: t * t):
        h = cm_from_function(mk, 512)
        sys_path = integrate_system_smooth(dyn, h)
        skel = eval_skeleton(x, h).path
        assert np.max(np.abs(sys_path.values - skel.values)) <= 1.0 / 512


def test_smooth_driver_scaled():
    # at eps<1 the smooth-driven system produces the gamma-scaled skeleton
    x = single_term_vector(1.0, ONE, ONE)
    eps = 0.25
    dyn = build_system(x, eps)
    h = sample_level_set(0.5, 256, seed=7)
    sys_path = integrate_system_smooth(dyn, h)
    skel = eval_skeleton(gamma_scale(x, eps), h).path
    assert np.max(np.abs(sys_path.values - skel.values)) <= 1e-3


def test_multi_term_superposition():
    ta, tb = term(0.7, ONE, T), term(-0.4, T, ONE)
    x_both = vector(Kernel(2, (ta, tb)))
    eps = 0.6
    w = sample_bm(512, seed=8, index=0)
    both = integrate_system(dyn := build_system(x_both, eps), w).values
    sep = (
        integrate_system(build_system(vector(Kernel(2, (ta,))), eps), w).values
        + integrate_system(build_system(vector(Kernel(2, (tb,))), eps), w).values
    )
    np.testing.assert_allclose(both, sep, atol=1e-10)


def test_batch_matches_single():
    x = single_term_vector(1.0, ONE, ONE)
    dyn = build_system(x, eps=0.5)
    dws = np.vstack([np.diff(sample_bm(64, 9, i).values) for i in range(3)])
    batch = integrate_system_batch(dyn, dws)
    for i in range(3):
        w = sample_bm(64, 9, i)
        np.testing.assert_allclose(batch[i], integrate_system(dyn, w).values, atol=0)
