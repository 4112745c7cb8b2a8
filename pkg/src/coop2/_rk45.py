"""Dormand-Prince 5(4) core with PI step-size control, numba-compiled.

The right-hand side is an njit function rhs(x, params) so that one compiled
integrator is shared by all instances of a model family.  Accepted steps store
the state and its derivative for cubic Hermite dense output.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAXSTEPS = 2

# Dormand-Prince tableau
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


@njit(cache=True)
def _error_norm(err, y0, y1, rtol, atol):
    n = err.size
    acc = 0.0
    for i in range(n):
        sc = atol + rtol * max(abs(y0[i]), abs(y1[i]))
        acc += (err[i] / sc) ** 2
    return np.sqrt(acc / n)


@njit
def solve(rhs, params, y0, t_end, rtol, atol, max_steps):
    """Integrate dy/dt = rhs(y, params) over [0, t_end].

    Returns (t, y, f, nfev, naccept, nreject, status) with one row per
    accepted step (including t=0).
    """
    n = y0.size
    cap = 4096
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    fs = np.empty((cap, n))

    t = 0.0
    y = y0.copy()
    f = rhs(y, params)
    nfev = 1
    ts[0] = 0.0
    ys[0] = y
    fs[0] = f
    m = 1

    # initial step from the rhs scale
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f[i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6 * t_end
    else:
        h = 0.01 * d0 / d1
    h = min(h, t_end)

    err_prev = 1.0
    naccept = 0
    nreject = 0
    status = STATUS_OK
    hmin = 1e-14 * t_end

    while t < t_end:
        if h < hmin:
            status = STATUS_UNDERFLOW
            break
        if naccept + nreject > max_steps:
            status = STATUS_MAXSTEPS
            break
        if t + h > t_end:
            h = t_end - t

        k1 = f
        k2 = rhs(y + h * (_A21 * k1), params)
        k3 = rhs(y + h * (_A31 * k1 + _A32 * k2), params)
        k4 = rhs(y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3), params)
        k5 = rhs(y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4), params)
        k6 = rhs(y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
                 params)
        y1 = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = rhs(y1, params)
        nfev += 6
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        enorm = _error_norm(err, y, y1, rtol, atol)

        if enorm <= 1.0 or h <= hmin * 1.01:
            t = t + h
            y = y1
            f = k7  # FSAL
            if m == cap:
                cap *= 2
                ts2 = np.empty(cap)
                ys2 = np.empty((cap, n))
                fs2 = np.empty((cap, n))
                ts2[:m] = ts[:m]
                ys2[:m] = ys[:m]
                fs2[:m] = fs[:m]
                ts, ys, fs = ts2, ys2, fs2
            ts[m] = t
            ys[m] = y
            fs[m] = f
            m += 1
            naccept += 1
            # PI controller (accept branch)
            if enorm == 0.0:
                fac = 10.0
            else:
                fac = 0.9 * enorm ** -0.17 * err_prev ** 0.04
                fac = min(10.0, max(0.2, fac))
            err_prev = max(enorm, 1e-10)
            h = h * fac
        else:
            nreject += 1
            fac = max(0.2, 0.9 * enorm ** -0.2)
            h = h * fac

    return ts[:m], ys[:m], fs[:m], nfev, naccept, nreject, status


def hermite_eval(t, ts, ys, fs):
    """Cubic Hermite dense output over the accepted steps; vectorized in t."""
    t = np.asarray(t, dtype=float)
    idx = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, ts.size - 2)
    t0 = ts[idx]
    t1 = ts[idx + 1]
    dt = t1 - t0
    s = np.where(dt > 0, (t - t0) / np.where(dt > 0, dt, 1.0), 0.0)
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s ** 2 * (3 - 2 * s)
    h11 = s ** 2 * (s - 1)
    y0 = ys[idx]
    y1 = ys[idx + 1]
    f0 = fs[idx]
    f1 = fs[idx + 1]
    return (h00[:, None] * y0 + (h10 * dt)[:, None] * f0
            + h01[:, None] * y1 + (h11 * dt)[:, None] * f1)
