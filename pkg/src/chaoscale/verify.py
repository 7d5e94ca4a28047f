"""Deterministic verification suite with a bundled golden transcript.

Runs a fixed set of invariant checks (exact identities, bound dominance,
cross-oracle agreements) on the numpy backend with a fixed seed, serializes
the results canonically, and compares the bytes against the packaged golden
file.  Output is independent of thread count and of whether the compiled
extension is present.
"""

from __future__ import annotations

import importlib.resources
import json
import math

import numpy as np

from . import backend
from .chaos import (
    Kernel,
    chaos_norm_sq,
    cube_norm_sq,
    gamma_scale,
    ou_scale,
    single_term_vector,
    sym_cube_norm_sq,
    term,
    truncation_tail_bound,
    vector,
)
from .factors import constant, poly
from .ldp import RateOptions, exp_equiv_gap, ldp_slope, sup_exceed
from .paths import cm_from_function, energy, pairing, sup_norm
from .roughpath import (
    dilate,
    lift_piecewise_linear,
    p_var_dist,
    p_var_level,
    pair_value,
)
from .simulate import (
    doob_bound,
    hu_meyer_gap,
    hyper_tail_bound,
    ito_iterated,
    mc_sup_tail,
    sample_bm,
    strat_iterated,
    tail_constant,
)
from .skeleton import eval_skeleton, modulus_bound, uniform_gap
from .system import build_system, integrate_system
from .simulate import chaos_paths

DEFAULT_SEED = 20270811
GOLDEN_RESOURCE = "golden_verify.json"


def _py(obj):
    """Plain-python copy with native floats (canonical repr serialization)."""
    if isinstance(obj, dict):
        return {k: _py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_py(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        if math.isinf(val):
            return "inf" if val > 0 else "-inf"
        if math.isnan(val):
            return "nan"
        return val
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_py(v) for v in obj]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    raise TypeError(f"cannot serialize {type(obj)}")


def _two_order_vector(c2: float = 0.5):
    return vector(
        Kernel(1, (term(1.0, constant(1)),)),
        Kernel(2, (term(c2, constant(1), constant(1)),)),
    )


def _checks(seed: int) -> dict:
    checks: dict = {}

    # exact path identities
    h = cm_from_function(lambda t: t, 64)
    checks["paths"] = {
        "energy_line": energy(h),
        "sup_norm_line": sup_norm(h.base),
        "pairing_t_t": pairing(poly([0.0, 1.0]), h),
        "pass": energy(h) == 0.5 and sup_norm(h.base) == 1.0,
    }

    # Gram norms and scalings
    k1 = Kernel(1, (term(1.0, constant(1)), term(1.0, poly([0.0, 1.0]))))
    x12 = _two_order_vector(1.0)
    g_scaled = gamma_scale(x12, 0.25)
    checks["chaos"] = {
        "gram_1_plus_t": cube_norm_sq(k1),
        "norm_two_orders": chaos_norm_sq(x12),
        "sym_norm_1xg": sym_cube_norm_sq(
            Kernel(2, (term(1.0, constant(1), poly([0.0, 1.0])),))
        ),
        "gamma_quarter_order2_coeff": g_scaled.kernel(2).terms[0].coeff,
        "ou_semigroup_gap": abs(
            ou_scale(ou_scale(x12, 0.3), 0.4).kernel(2).terms[0].coeff
            - ou_scale(x12, 0.7).kernel(2).terms[0].coeff
        ),
        "tail_bound_half": truncation_tail_bound(_two_order_vector(1.0), 1, 0.5),
    }

    # skeleton values and the truncation gap contract
    x2 = single_term_vector(1.0, constant(1), constant(1))
    hh = cm_from_function(lambda t: t, 256)
    f_end = eval_skeleton(x2, hh).path.values[-1]
    m_gap = 128
    gap, bound = uniform_gap(_two_order_vector(0.5), 1, 0.5, 20, seed, m=m_gap)
    checks["skeleton"] = {
        "f2_line_terminal": f_end,
        "uniform_gap": gap,
        "uniform_gap_bound": bound,
        "modulus_unit": modulus_bound(single_term_vector(1.0, constant(1)), 0.0, 1.0, 0.0),
        "pass": gap <= bound + 10.0 / m_gap**2,
    }

    # rough paths: corner path areas, metric example, dilation
    corner = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    rp = lift_piecewise_linear(corner)
    _, area = pair_value(rp, 0, 2)
    line = lift_piecewise_linear(np.array([[0.0], [1.0]]))
    zero1 = lift_piecewise_linear(np.array([[0.0], [0.0]]))
    zig = lift_piecewise_linear(np.array([[0.0], [1.0], [0.0], [1.0]]))
    checks["roughpath"] = {
        "corner_area": [[area[0, 0], area[0, 1]], [area[1, 0], area[1, 1]]],
        "line_vs_zero_p25": p_var_dist(line, zero1, 2.5),
        "zigzag_pvar_sq": p_var_level(zig.level1, 2.0) ** 2,
        "dilated_line_vs_zero": p_var_dist(dilate(line, 0.25), zero1, 2.5),
        "pass": abs(p_var_dist(line, zero1, 2.5) - 1.5) < 1e-12,
    }

    # discrete stochastic integrals
    w = sample_bm(64, seed, index=0)
    t2 = term(1.0, constant(1), constant(1))
    ito2 = ito_iterated(t2, w).values[-1]
    strat2 = strat_iterated(t2, w).values[-1]
    dwv = np.diff(w.values)
    gaps = []
    for i in range(200):
        wg = sample_bm(512, seed, index=i)
        gaps.append(hu_meyer_gap(t2, wg).values[-1])
    checks["integrals"] = {
        "ito2": ito2,
        "strat2": strat2,
        "ito2_identity_err": abs(
            ito2 - (w.values[-1] ** 2 - float(np.sum(dwv * dwv))) / 2.0
        ),
        "strat2_identity_err": abs(strat2 - w.values[-1] ** 2 / 2.0),
        "hu_meyer_mean": float(np.mean(gaps)),
        "pass": abs(float(np.mean(gaps)) - 0.5) < 0.02,
    }

    # system vs direct sums
    x_sys = vector(
        Kernel(1, (term(math.sqrt(2.0 / 3.0), constant(1)),)),
        Kernel(2, (term(math.sqrt(2.0 / 3.0), constant(1), constant(1)),)),
    )
    dyn = build_system(x_sys, eps=0.5)
    scaled = gamma_scale(x_sys, 0.5)
    sys_gaps = []
    for i in range(5):
        wb = sample_bm(512, seed, index=100 + i)
        zsys = integrate_system(dyn, wb).values
        zdir = chaos_paths(scaled, wb.increments[None, :], "ito")[0]
        sys_gaps.append(float(np.max(np.abs(zsys - zdir))))
    checks["system"] = {"gaps": sys_gaps, "pass": max(sys_gaps) < 0.1}

    # explicit tail bounds and a small MC dominance check
    est = mc_sup_tail(_two_order_vector(0.5), 0.5, 1.0, 2000, 256, seed)
    norm = math.sqrt(chaos_norm_sq(_two_order_vector(0.5)))
    dbound = doob_bound(norm, 0.5, 1.0)
    checks["tails"] = {
        "c_alpha_01_1": tail_constant(0.1, 1),
        "doob_unit": doob_bound(1.0, 1.0, 2.0),
        "hyper_n2": hyper_tail_bound(1.0, 2, 2.0),
        "mc_estimate": est.mean,
        "mc_stderr": est.stderr,
        "doob_vs_mc": dbound,
        "pass": est.mean <= dbound + 3.0 * est.stderr,
    }

    # slope and exponential-equivalence diagnostics (small ladders)
    opts = RateOptions(m_opt=32, starts=2, max_iter=80, seed=seed)
    slope = ldp_slope(
        single_term_vector(1.0, constant(1)),
        sup_exceed(1.0),
        [0.2, 0.3],
        2000,
        128,
        seed,
        opts=opts,
    )
    xeq = vector(
        Kernel(1, (term(1.0, constant(1)),)),
        Kernel(2, (term(0.5, constant(1), constant(1)),)),
    )
    eq1 = exp_equiv_gap(xeq, 1, 0.1, [0.1], 2000, 128, seed)
    eq7 = exp_equiv_gap(xeq, 7, 0.1, [0.1], 2000, 128, seed)
    checks["ldp"] = {
        "slope_points": [[p.eps, p.p_hat] for p in slope.points],
        "slope_intercept": slope.intercept,
        "rate_prediction": slope.rate_prediction,
        "eq_n1_value": eq1.points[0].value,
        "eq_n1_ceiling": eq1.ceiling,
        "eq_n7_value": eq7.points[0].value,
        "pass": (
            abs(slope.rate_prediction - 0.5) < 0.02
            and eq7.points[0].value == -math.inf
        ),
    }

    return checks


def run(seed: int = DEFAULT_SEED) -> dict:
    """Execute the suite on the numpy backend; returns the report dict."""
    with backend.force("numpy"):
        checks = _checks(seed)
    report = {"seed": seed, "backend": "numpy", "checks": _py(checks)}
    return report


def canonical_bytes(report: dict) -> bytes:
    return (json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n").encode()


def golden_bytes() -> bytes | None:
    ref = importlib.resources.files("chaoscale").joinpath("data", GOLDEN_RESOURCE)
    try:
        return ref.read_bytes()
    except FileNotFoundError:
        return None


def verify(seed: int = DEFAULT_SEED):
    """Run the suite; compare against the golden transcript when running at
    the golden seed.  Returns (report, lines, ok)."""
    report = run(seed)
    lines = []
    ok = True
    for name, chk in report["checks"].items():
        if isinstance(chk, dict) and "pass" in chk:
            ok = ok and bool(chk["pass"])
            lines.append(f"{'PASS' if chk['pass'] else 'FAIL'} {name}")
        else:
            lines.append(f"INFO {name}")
    gold = golden_bytes()
    if seed != DEFAULT_SEED:
        lines.append("SKIP golden (non-default seed)")
    elif gold is None:
        lines.append("SKIP golden (no bundled transcript)")
    else:
        match = gold == canonical_bytes(report)
        ok = ok and match
        lines.append(f"{'PASS' if match else 'FAIL'} golden transcript byte match")
    return report, lines, ok
