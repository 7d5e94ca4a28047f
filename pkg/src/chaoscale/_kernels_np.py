"""Pure-numpy implementations of the hot kernels.

These mirror the compiled extension operation-for-operation (same
association and accumulation order), so the two backends agree to the last
few ulps.  Shapes: `dw` is (paths, steps); factor tables are (levels, steps).
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def chain_ito(dw: np.ndarray, fvals: np.ndarray) -> np.ndarray:
    """Left-point iterated-integral recursion.

    Z_0 = 1;  Z_k[i+1] = Z_k[i] + Z_{k-1}[i] * f_k(t_i) * dw_i.
    Returns the level-n path on the full grid, shape (paths, steps+1).
    """
    npaths, m = dw.shape
    z = np.ones((npaths, m + 1))
    for k in range(fvals.shape[0]):
        incr = (z[:, :m] * fvals[k]) * dw
        nxt = np.empty((npaths, m + 1))
        nxt[:, 0] = 0.0
        np.cumsum(incr, axis=1, out=nxt[:, 1:])
        z = nxt
    return z


def chain_strat(dw: np.ndarray, fmid: np.ndarray) -> np.ndarray:
    """Midpoint iterated-integral recursion (lower level already updated).

    Z_k[i+1] = Z_k[i] + 0.5*(Z_{k-1}[i] + Z_{k-1}[i+1]) * f_k(t_{i+1/2}) * dw_i.
    With dw_i = slope_i/m this is also the deterministic skeleton rule.
    """
    npaths, m = dw.shape
    z = np.ones((npaths, m + 1))
    for k in range(fmid.shape[0]):
        incr = ((0.5 * (z[:, :m] + z[:, 1:])) * fmid[k]) * dw
        nxt = np.empty((npaths, m + 1))
        nxt[:, 0] = 0.0
        np.cumsum(incr, axis=1, out=nxt[:, 1:])
        z = nxt
    return z


def heun_system(
    dw,
    dt,
    sqrt_eps,
    eps,
    smooth,
    a_rows,
    a_cols,
    a_vals,
    ab_rows,
    ab_q,
    ab_vals,
    b_rows,
    b_cols,
    b_vals,
    bb_rows,
    bb_q,
    bb_vals,
    d_rows,
    d_cols,
    d_idx,
    gb_l,
    gb_m,
    dv_l,
    dv_m,
    nstates,
):
    """Midpoint (Heun-predictor) integration of the linear chain system.

    Per step: Xbar = X + 0.5*(drift(t_i, X)*dt + diffusion(t_i, X)*dw_i),
    then X += drift(t_mid, Xbar)*dt + diffusion(t_mid, Xbar)*dw_i.
    The dt-correction links (b_*) are skipped when `smooth` is set: they are
    quadratic-variation corrections and vanish for smooth drivers.
    Returns the first state coordinate on the grid, shape (paths, steps+1).
    """
    npaths, m = dw.shape
    x = np.zeros((npaths, nstates))
    out = np.zeros((npaths, m + 1))

    def fields(state, gb, dv, i):
        diffu = np.zeros_like(state)
        for r, c, v in zip(a_rows, a_cols, a_vals):
            diffu[:, r] += v * state[:, c]
        for r, q, v in zip(ab_rows, ab_q, ab_vals):
            diffu[:, r] += v * gb[q, i]
        diffu *= sqrt_eps
        drift = np.zeros_like(state)
        if not smooth:
            for r, c, v in zip(b_rows, b_cols, b_vals):
                drift[:, r] += v * state[:, c]
            for r, q, v in zip(bb_rows, bb_q, bb_vals):
                drift[:, r] += v * gb[q, i]
            drift *= eps
        for r, c, j in zip(d_rows, d_cols, d_idx):
            drift[:, r] += dv[j, i] * state[:, c]
        return drift, diffu

    for i in range(m):
        dwi = dw[:, i : i + 1]
        drift, diffu = fields(x, gb_l, dv_l, i)
        xbar = x + (0.5 * dt) * drift + diffu * (0.5 * dwi)
        drift, diffu = fields(xbar, gb_m, dv_m, i)
        x = x + dt * drift + diffu * dwi
        out[:, i + 1] = x[:, 0]
    return out
