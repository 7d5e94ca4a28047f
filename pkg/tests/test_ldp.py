import math

import numpy as np
import pytest

from chaoscale.chaos import Kernel, single_term_vector, term, vector
from chaoscale.errors import DomainError, EstimationError
from chaoscale.factors import constant
from chaoscale.ldp import (
    RateOptions,
    SlopePoint,
    _fit_points,
    ball_complement,
    exp_equiv_gap,
    ldp_slope,
    rate_of_event,
    rate_of_point,
    sup_exceed,
    terminal_exceed,
)
from chaoscale.paths import CameronMartinPath, GridPath, energy, sample_level_set
from chaoscale.skeleton import eval_skeleton

ONE = constant(1.0)
X1 = single_term_vector(1.0, ONE)
X2 = single_term_vector(1.0, ONE, ONE)
FAST = RateOptions(starts=4, max_iter=100)


def two_order(c2):
    return vector(
        Kernel(1, (term(1.0, ONE),)),
        Kernel(2, (term(c2, ONE, ONE),)),
    )


def test_event_validation():
    with pytest.raises(DomainError):
        sup_exceed(0.0)
    with pytest.raises(DomainError):
        terminal_exceed(-1.0)
    with pytest.raises(DomainError):
        ball_complement(GridPath(1, [0.0, 1.0]), 0.0)


def test_event_indicator_and_shortfall():
    paths = np.array([[0.0, 0.4, 0.8], [0.0, -1.2, 0.1]])
    ev = sup_exceed(1.0)
    np.testing.assert_array_equal(ev.indicator(paths), [False, True])
    np.testing.assert_allclose(ev.shortfall(paths), [0.2, 0.0])
    evt = terminal_exceed(0.5)
    np.testing.assert_array_equal(evt.indicator(paths), [True, False])
    center = GridPath(2, [0.0, 0.4, 0.8])
    evb = ball_complement(center, 0.5)
    np.testing.assert_array_equal(evb.indicator(paths), [False, True])


def test_rate_of_point_identity():
    w = sample_level_set(0.8, 64, seed=9).base
    res = rate_of_point(X1, w)  # default options: full ladder + multistarts
    assert res.converged and res.residual <= 1e-4
    assert res.value == pytest.approx(energy(CameronMartinPath(w)), rel=0.02)


def test_rate_of_point_feasibility_upper_bound():
    h0 = sample_level_set(0.5, 64, seed=5)
    target = eval_skeleton(X2, h0).path
    res = rate_of_point(X2, target, FAST)
    assert res.converged
    assert res.value <= energy(h0) * 1.02


def test_rate_of_point_infeasible_negative_target():
    w = GridPath(64, -np.linspace(0.0, 1.0, 65))
    res = rate_of_point(X2, w, FAST)
    assert res.infeasible and math.isinf(res.value)
    assert res.residual > 1e-3


def test_rate_of_point_quadratic_scaling():
    w = sample_level_set(0.8, 64, seed=9).base
    base = rate_of_point(X1, w, FAST).value
    for c in (0.5, 2.0):
        scaled = rate_of_point(X1, GridPath(64, c * w.values), FAST).value
        assert scaled == pytest.approx(c * c * base, rel=0.03)


def test_rate_of_event_oracles():
    res1 = rate_of_event(X1, sup_exceed(1.0), FAST)
    assert res1.value == pytest.approx(0.5, rel=0.02)
    res2 = rate_of_event(X2, sup_exceed(0.7), FAST)
    assert res2.value == pytest.approx(0.7, rel=0.03)
    small = rate_of_event(X1, sup_exceed(1e-5), FAST)
    assert small.value <= 1e-8


def test_rate_of_event_monotone_in_delta():
    vals = [rate_of_event(X1, sup_exceed(d), FAST).value for d in (0.25, 0.5, 1.0, 2.0)]
    assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))


def test_feasible_certificate_replay():
    h0 = sample_level_set(0.5, 64, seed=5)
    target = eval_skeleton(X2, h0).path
    res = rate_of_point(X2, target, FAST)
    assert res.converged
    replay = eval_skeleton(X2, res.minimizer).path.values
    again = float(np.max(np.abs(replay - target.values)))
    assert again == pytest.approx(res.residual, abs=1e-10)


def test_fit_points_weighted():
    pts = [
        SlopePoint(0.1, 0.01, 1e-4, -0.4, 1e-3),
        SlopePoint(0.2, 0.05, 1e-4, -0.5, 1e-3),
        SlopePoint(0.3, 0.2, 1e-4, -0.6, 1e-3),
    ]
    intercept, slope = _fit_points(pts)
    assert intercept == pytest.approx(-0.3, abs=1e-9)
    assert slope == pytest.approx(-1.0, abs=1e-9)
    lone = [SlopePoint(0.2, 0.1, 1e-4, -0.5, 1e-3)]
    assert _fit_points(lone) == (-0.5, 0.0)
    with pytest.raises(EstimationError):
        _fit_points([SlopePoint(0.2, 0.0, 0.0, None, None)])


def test_ldp_slope_validation():
    with pytest.raises(DomainError):
        ldp_slope(X1, sup_exceed(1.0), [1.5], 2000, 64, 1, compute_rate=False)
    with pytest.raises(DomainError):
        ldp_slope(X1, sup_exceed(1.0), [], 2000, 64, 1, compute_rate=False)
    with pytest.raises(DomainError):
        ldp_slope(X1, sup_exceed(1.0), [0.2], 10, 64, 1, compute_rate=False)


def test_ldp_slope_all_zero_hits():
    with pytest.raises(EstimationError):
        ldp_slope(X1, sup_exceed(50.0), [0.01], 1000, 64, 1, compute_rate=False)


def test_ldp_slope_small_run():
    res = ldp_slope(
        X1, sup_exceed(1.0), [0.2, 0.3], 4000, 256, seed=3,
        opts=RateOptions(starts=2, max_iter=80), compute_rate=True,
    )
    assert res.rate_prediction == pytest.approx(0.5, rel=0.02)
    assert -1.0 < res.intercept < -0.3
    assert res.excluded == 0


def test_exp_equiv_gap_sentinel_and_trend():
    x = two_order(0.5)
    past = exp_equiv_gap(x, 50, 0.1, [0.1], 2000, 128, seed=4)
    assert past.points[0].value == -math.inf
    assert past.ceiling == -math.inf
    n1 = exp_equiv_gap(x, 1, 0.1, [0.1], 4000, 128, seed=4)
    assert n1.points[0].value is not None
    assert n1.points[0].value > -math.inf
    # larger approximation index never raises the estimate
    vals = []
    for n in (1, 3, 50):
        r = exp_equiv_gap(x, n, 0.1, [0.1], 4000, 128, seed=4)
        vals.append(r.points[0].value if r.points[0].value is not None else -math.inf)
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] == -math.inf


def test_exp_equiv_gap_respects_ceiling():
    x = two_order(0.5)
    res = exp_equiv_gap(x, 1, 0.1, [0.1, 0.2], 4000, 128, seed=4)
    for pt in res.points:
        if pt.value is not None:
            assert pt.value <= res.ceiling + 3 * pt.value_stderr + 1e-12


def test_exp_equiv_gap_validation():
    with pytest.raises(DomainError):
        exp_equiv_gap(two_order(0.5), 1, 0.0, [0.1], 2000, 64, 1)


def test_slope_sandwich_bounds_each_point():
    # finite-eps dominance: every ladder point's p_hat sits below the
    # explicit bounds applied to the scaled vector
    import chaoscale.chaos as chaos
    from chaoscale.simulate import doob_bound, hyper_tail_bound

    delta = 1.0
    res = ldp_slope(
        X1, sup_exceed(delta), [0.2, 0.3, 0.5], 4000, 256, seed=6,
        compute_rate=False,
    )
    for pt in res.points:
        norm = math.sqrt(chaos.chaos_norm_sq(X1))
        assert pt.p_hat <= doob_bound(norm, pt.eps, delta) + 3 * pt.stderr
        scaled_norm = math.sqrt(chaos.chaos_norm_sq(chaos.gamma_scale(X1, pt.eps)))
        assert pt.p_hat <= hyper_tail_bound(scaled_norm, 1, delta) + 3 * pt.stderr


def test_exp_equiv_gap_all_zero_hits_errors():
    # nonempty tail but an unreachable threshold: estimation failure
    with pytest.raises(EstimationError):
        exp_equiv_gap(two_order(0.5), 1, 60.0, [0.01], 1000, 64, seed=2)
