"""Adaptive trajectory integration with box monitoring and per-sample
sign-variation annotation relative to the equilibrium.

Backed by an embedded Runge-Kutta 5(4) pair with dense output; samples are the
accepted steps.  Box exits beyond a small atol-scaled slack raise LeftDomain;
tiny exits are clamped to the boundary and counted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit
from scipy.integrate import solve_ivp

from . import _rk45
from .models import Model
from .signvar import s_minus

__all__ = ["StepUnderflow", "LeftDomain", "Trajectory", "integrate",
           "monitor_difference", "write_trajectory_csv"]


class StepUnderflow(RuntimeError):
    """The step controller drove the step size below the floor (stiffness or
    blow-up)."""


class LeftDomain(RuntimeError):
    """A sample exited the box by more than the allowed slack."""


def _s_minus_traj(dx: np.ndarray) -> int:
    """Weak sign variation with the trajectory-monitoring zero threshold."""
    scale = np.max(np.abs(dx))
    return s_minus(dx, tau_zero=1e-10 * scale if scale > 0 else 0.0)


@njit(cache=True)
def _s_minus_rows(D: np.ndarray, rel_tau: float) -> np.ndarray:
    """Row-wise weak sign variation with a per-row relative zero threshold.

    Batch equivalent of _s_minus_traj for the accepted-step annotation; a pure
    Python loop over hundreds of thousands of samples dominates the runtime
    otherwise.
    """
    m, n = D.shape
    out = np.empty(m, dtype=np.int64)
    for r in range(m):
        scale = 0.0
        for j in range(n):
            a = abs(D[r, j])
            if a > scale:
                scale = a
        tau = rel_tau * scale
        prev = 0
        cnt = 0
        for j in range(n):
            v = D[r, j]
            s = 1 if v > tau else (-1 if v < -tau else 0)
            if s != 0:
                if prev != 0 and s != prev:
                    cnt += 1
                prev = s
        out[r] = cnt
    return out


@dataclass
class Trajectory:
    """Accepted-step samples of one integration."""

    times: np.ndarray
    states: np.ndarray  # len(times) x n
    s_minus_to_e: Optional[np.ndarray]  # None when no equilibrium was attached
    box_ok: np.ndarray
    stats: dict = field(default_factory=dict)
    _dense: object = None
    equilibrium: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def at(self, t):
        """Dense-output evaluation at time(s) t."""
        out = self._dense(np.atleast_1d(np.asarray(t, dtype=float)))
        return out[0] if np.isscalar(t) else out


def integrate(model: Model, a, t_end: float, rtol: float = 1e-9,
              atol: float = 1e-12, equilibrium=None,
              enforce_box: bool = True) -> Trajectory:
    """Integrate dx/dt = f(x) from a over [0, t_end]."""
    a = np.asarray(a, dtype=float)
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if rtol < 1e-12 or atol < 1e-14:
        raise ValueError("tolerances below supported floor (rtol 1e-12, atol 1e-14)")
    slack = 1e3 * atol
    if enforce_box and (np.any(a < model.box_lower - slack)
                        or np.any(a > model.box_upper + slack)):
        raise LeftDomain(f"initial state {a} outside the box")

    if model.rhs_compiled is not None:
        rhs, pvec = model.rhs_compiled
        times, states, derivs, nfev, naccept, nreject, status = _rk45.solve(
            rhs, pvec, a.astype(float), float(t_end), rtol, atol, 100_000_000)
        if status == _rk45.STATUS_UNDERFLOW:
            raise StepUnderflow("step size collapsed below the floor")
        if status == _rk45.STATUS_MAXSTEPS:
            raise StepUnderflow("step budget exhausted")
        dense = lambda t: _rk45.hermite_eval(t, times, states, derivs)
        rejected = nreject
    else:
        sol = solve_ivp(lambda t, x: model.field(x), (0.0, float(t_end)), a,
                        method="RK45", rtol=rtol, atol=atol, dense_output=True)
        if sol.status == -1 or not sol.success:
            raise StepUnderflow(sol.message)
        times = sol.t.copy()
        states = sol.y.T.copy()
        nfev = int(sol.nfev)
        dense = lambda t: sol.sol(t).T
        rejected = None
    clamped = 0
    box_ok = np.ones(states.shape[0], dtype=bool)
    if enforce_box:
        low = np.any(states < model.box_lower - slack, axis=1)
        high = np.any(states > model.box_upper + slack, axis=1)
        if np.any(low | high):
            i = int(np.argmax(low | high))
            raise LeftDomain(
                f"sample at t={times[i]:.6g} left the box by more than {slack:.3g}"
            )
        out = (np.any(states < model.box_lower, axis=1)
               | np.any(states > model.box_upper, axis=1))
        clamped = int(np.sum(out))
        box_ok = ~out
        np.clip(states, model.box_lower, model.box_upper, out=states)

    sv = None
    e = None
    if equilibrium is not None:
        e = np.asarray(getattr(equilibrium, "e", equilibrium), dtype=float)
        sv = _s_minus_rows(states - e, 1e-10)

    stats = {"accepted": int(times.size - 1), "rhs_evals": int(nfev),
             "rejected": rejected, "clamped_to_box": clamped}
    return Trajectory(times=times, states=states, s_minus_to_e=sv,
                      box_ok=box_ok, stats=stats, _dense=dense, equilibrium=e)


def monitor_difference(model: Model, a, b, t_grid, rtol: float = 1e-9,
                       atol: float = 1e-12) -> np.ndarray:
    """s^-(x(t,a) - x(t,b)) on a shared time grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    t_end = float(t_grid[-1])
    ta = integrate(model, a, t_end, rtol=rtol, atol=atol)
    tb = integrate(model, b, t_end, rtol=rtol, atol=atol)
    xa = ta.at(t_grid)
    xb = tb.at(t_grid)
    return np.array([_s_minus_traj(da - db) for da, db in zip(xa, xb)])


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV export: header t,x1,...,xn,s_minus; one row per accepted step."""
    n = traj.n
    sv = traj.s_minus_to_e
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"x{i + 1}" for i in range(n)] + ["s_minus"])
        for i, (t, x) in enumerate(zip(traj.times, traj.states)):
            row = [f"{t:.12e}"] + [f"{v:.12e}" for v in x]
            row.append(str(int(sv[i])) if sv is not None else "")
            w.writerow(row)
