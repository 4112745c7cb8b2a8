"""Classification of trajectory asymptotics: equilibrium, periodic orbit, or
undetermined.

Periodicity is detected on a Poincare section through the equilibrium
coordinate hyperplane {x_k = e_k, dx_k/dt > 0}: crossing times are refined by
bisection on the dense output, the period is a trimmed mean of the last
inter-crossing gaps, and the verdict requires the last return points to agree
to a relative tolerance while staying separated from the equilibrium.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import coop, spectral
from .models import Equilibrium, Model, NoConvergence, find_equilibrium, \
    goodwin_equilibrium
from .ode import Trajectory, integrate
from .signvar import s_minus

__all__ = ["OrbitSettings", "OrbitReport", "classify", "basin_filter",
           "theorem2_check"]


@dataclass(frozen=True)
class OrbitSettings:
    horizon: float = 400.0
    warmup_fraction: float = 0.5
    rtol: float = 1e-9
    atol: float = 1e-12
    section_coord: Optional[int] = None  # 0-based; default: last coordinate
    tau_eq_rel: float = 1e-6  # equilibrium ball, relative to box diameter
    tau_return_rel: float = 1e-4  # return-point agreement, relative
    mu_sep_rel: float = 1e-3  # separation margin, relative to box diameter
    period_gaps: int = 5
    min_crossings: int = 4


@dataclass
class OrbitReport:
    verdict: str  # Equilibrium | PeriodicOrbit | Undetermined
    period: Optional[float]
    amplitude: Optional[np.ndarray]  # per-coordinate peak-to-peak, final cycle
    min_dist_to_e: float
    crossings: list
    return_map_contraction: Optional[float]
    basin_tag: int
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "period": self.period,
            "amplitude": None if self.amplitude is None
            else [float(v) for v in self.amplitude],
            "min_dist_to_e": self.min_dist_to_e,
            "crossings": [float(t) for t in self.crossings],
            "return_map_contraction": self.return_map_contraction,
            "basin_tag": self.basin_tag,
            "reason": self.reason,
        }


def _section_crossings(traj: Trajectory, coord: int, level: float,
                       t_min: float, t_tol: float = 1e-10) -> np.ndarray:
    """Upward crossing times of x_coord through `level` after t_min, refined
    by bisection on the dense output."""
    t = traj.times
    g = traj.states[:, coord] - level
    times = []
    for i in range(len(t) - 1):
        if t[i + 1] < t_min:
            continue
        if g[i] < 0.0 <= g[i + 1]:
            lo, hi = t[i], t[i + 1]
            while hi - lo > t_tol:
                mid = 0.5 * (lo + hi)
                if traj.at(mid)[coord] - level < 0.0:
                    lo = mid
                else:
                    hi = mid
            times.append(0.5 * (lo + hi))
    return np.array(times)


def _trimmed_mean(gaps: np.ndarray) -> float:
    if gaps.size >= 3:
        gaps = np.sort(gaps)[1:-1]
    return float(np.mean(gaps))


def classify(model: Model, equilibrium: Equilibrium, a,
             settings: OrbitSettings = OrbitSettings()) -> OrbitReport:
    """Integrate from a and classify the tail of the trajectory."""
    a = np.asarray(a, dtype=float)
    e = equilibrium.e
    diam = model.box_diameter
    basin_tag = s_minus(a - e)

    traj = integrate(model, a, settings.horizon, rtol=settings.rtol,
                     atol=settings.atol, equilibrium=equilibrium)
    t_min = settings.warmup_fraction * settings.horizon
    tail = traj.times >= t_min
    tail_states = traj.states[tail]
    dists = np.max(np.abs(tail_states - e), axis=1)
    min_dist = float(np.min(dists)) if dists.size else float("inf")
    # separation and return-map tolerances scale with the size of the tail
    # excursion, not the box: the invariant box can be far larger than the
    # attractor (the derived RNA totals are)
    orbit_radius = float(np.max(dists)) if dists.size else diam

    tau_eq = settings.tau_eq_rel * diam
    final = traj.times >= 0.9 * settings.horizon
    if np.all(np.max(np.abs(traj.states[final] - e), axis=1) < tau_eq):
        return OrbitReport(verdict="Equilibrium", period=None, amplitude=None,
                           min_dist_to_e=min_dist, crossings=[],
                           return_map_contraction=None, basin_tag=basin_tag,
                           reason="terminal state stayed within tau_eq of e")

    coord = settings.section_coord if settings.section_coord is not None \
        else model.n - 1
    crossings = _section_crossings(traj, coord, e[coord], t_min)
    if crossings.size < settings.min_crossings:
        return OrbitReport(verdict="Undetermined", period=None, amplitude=None,
                           min_dist_to_e=min_dist, crossings=list(crossings),
                           return_map_contraction=None, basin_tag=basin_tag,
                           reason=f"only {crossings.size} section crossings")

    gaps = np.diff(crossings)[-settings.period_gaps:]
    period = _trimmed_mean(gaps)

    returns = traj.at(crossings[-3:])
    contraction = float(np.max(
        np.max(np.abs(np.diff(returns, axis=0)), axis=1) / orbit_radius
    ))
    mu_sep = settings.mu_sep_rel * orbit_radius
    if contraction < settings.tau_return_rel and min_dist > mu_sep:
        cycle = (traj.times >= crossings[-1] - period) & (traj.times <= crossings[-1])
        amp = (np.max(traj.states[cycle], axis=0)
               - np.min(traj.states[cycle], axis=0))
        return OrbitReport(verdict="PeriodicOrbit", period=period,
                           amplitude=amp, min_dist_to_e=min_dist,
                           crossings=list(crossings),
                           return_map_contraction=contraction,
                           basin_tag=basin_tag,
                           reason="return points converged off the equilibrium")
    return OrbitReport(verdict="Undetermined", period=period, amplitude=None,
                       min_dist_to_e=min_dist, crossings=list(crossings),
                       return_map_contraction=contraction, basin_tag=basin_tag,
                       reason="return map not settled or too close to e")


def basin_filter(model: Model, equilibrium: Equilibrium, candidates):
    """Partition initial states by s^-(a - e) <= 1 (certified oscillation
    basin) versus >= 2."""
    e = equilibrium.e
    low, high = [], []
    for a in candidates:
        a = np.asarray(a, dtype=float)
        (low if s_minus(a - e) <= 1 else high).append(a)
    return {"omega_le1": low, "omega_ge2": high}


def theorem2_check(model: Model, certify_samples: int = 4096, seed: int = 0,
                   uniqueness_starts: int = 32) -> dict:
    """Hypothesis-by-hypothesis check of the oscillation criterion:

    1. strongly 2-cooperative on the box (sampled certificate);
    2. a unique interior equilibrium (multi-start cluster probe);
    3. at least two unstable eigenvalues of the Jacobian at the equilibrium.

    On all-pass, the predicted conclusion is that every initial state in the
    basin {s^-(a - e) <= 1, a != e} converges to a periodic orbit.
    """
    cert = coop.certify(model, k=2, strong=True, n_samples=certify_samples,
                        seed=seed)

    if model.name == "goodwin":
        eq = goodwin_equilibrium(model)
    else:
        eq = find_equilibrium(model, seed=seed)

    # uniqueness probe: Newton from many starts must land in one cluster
    unique = True
    from .models import _newton
    from scipy.stats import qmc
    sob = qmc.Sobol(d=model.n, scramble=True, seed=seed + 1)
    pts = qmc.scale(sob.random(uniqueness_starts), model.box_lower, model.box_upper)
    for p in pts:
        x = _newton(model, p, tol=1e-10)
        if x is None:
            continue
        slack = 1e-6 * model.box_diameter
        inside = (np.all(x > model.box_lower - slack)
                  and np.all(x < model.box_upper + slack))
        if inside and np.max(np.abs(x - eq.e)) > 1e-6 * max(1.0, model.box_diameter):
            unique = False
            break

    hyp = {
        "strongly_2_cooperative": bool(cert.passed),
        "unique_equilibrium": bool(unique and eq.in_interior),
        "two_unstable_eigenvalues": bool(eq.unstable_count >= 2),
    }
    all_pass = all(hyp.values())
    return {
        "model": model.name,
        "hypotheses": hyp,
        "all_pass": all_pass,
        "equilibrium": eq.to_dict(),
        "certificate": cert.to_dict(),
        "prediction": (
            "every a with s_minus(a - e) <= 1, a != e, converges to a "
            "periodic orbit" if all_pass else None
        ),
    }
