"""Built-in Goodwin and RNA-oscillator models with closed-form Jacobians,
invariant boxes, and equilibrium solvers."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from numba import njit
from scipy.stats import qmc

from . import spectral

__all__ = [
    "BadParams",
    "NoConvergence",
    "NotInterior",
    "Model",
    "Equilibrium",
    "goodwin",
    "goodwin_equilibrium",
    "rna_oscillator",
    "RNA_EXAMPLE_PARAMS",
    "find_equilibrium",
]


class BadParams(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


class NotInterior(RuntimeError):
    pass


@dataclass(frozen=True)
class Model:
    """A vector field with Jacobian, state dimension, and an invariant box."""

    name: str
    n: int
    field: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    box_lower: np.ndarray
    box_upper: np.ndarray
    params: dict = dc_field(default_factory=dict)
    # optional (njit_rhs, params_vector) pair for the compiled integrator path
    rhs_compiled: Optional[tuple] = None

    def __post_init__(self):
        if not np.all(self.box_lower < self.box_upper):
            raise BadParams("box must satisfy lower < upper componentwise")

    @property
    def box_center(self) -> np.ndarray:
        return 0.5 * (self.box_lower + self.box_upper)

    @property
    def box_diameter(self) -> float:
        return float(np.max(self.box_upper - self.box_lower))


@dataclass
class Equilibrium:
    """An equilibrium with its residual and linearization summary."""

    e: np.ndarray
    residual: float
    in_interior: bool
    spectrum: spectral.OrderedSpectrum
    unstable_count: int

    def to_dict(self) -> dict:
        return {
            "e": [float(v) for v in self.e],
            "residual": self.residual,
            "in_interior": self.in_interior,
            "eigenvalues": [[float(l.real), float(l.imag)]
                            for l in self.spectrum.eigenvalues],
            "unstable_count": self.unstable_count,
        }


def _make_equilibrium(model: Model, e: np.ndarray) -> Equilibrium:
    res = float(np.max(np.abs(model.field(e))))
    interior = bool(np.all(e > model.box_lower) and np.all(e < model.box_upper))
    spec = spectral.eigenvalues(model.jacobian(e))
    return Equilibrium(e=e, residual=res, in_interior=interior, spectrum=spec,
                       unstable_count=spectral.unstable_count(spec))


# ---------------------------------------------------------------------------
# Goodwin


@njit(cache=True)
def _goodwin_rhs(x, p):
    m = p[0]
    alpha = p[1:]
    n = x.size
    dx = np.empty(n)
    dx[0] = -alpha[0] * x[0] + 1.0 / (1.0 + x[n - 1] ** m)
    for i in range(1, n):
        dx[i] = -alpha[i] * x[i] + x[i - 1]
    return dx


def goodwin(n: int, alpha, m: int) -> Model:
    """n-dimensional negative-feedback loop with a Hill repression term.

        dx1/dt = -alpha_1 x1 + 1/(1 + xn^m)
        dxi/dt = -alpha_i xi + x_{i-1}        (i = 2..n)

    Invariant box: x_i <= (alpha_1 ... alpha_i)^-1.
    """
    alpha = np.asarray(alpha, dtype=float)
    if n < 3:
        raise BadParams("goodwin requires n >= 3")
    if alpha.size != n or np.any(alpha <= 0):
        raise BadParams("alpha must be n positive reals")
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise BadParams("m must be a positive integer")

    upper = 1.0 / np.cumprod(alpha)
    lower = np.zeros(n)

    def field(x):
        x = np.asarray(x, dtype=float)
        dx = np.empty(n)
        dx[0] = -alpha[0] * x[0] + 1.0 / (1.0 + x[n - 1] ** m)
        dx[1:] = -alpha[1:] * x[1:] + x[:-1]
        return dx

    def jacobian(x):
        x = np.asarray(x, dtype=float)
        J = np.zeros((n, n))
        np.fill_diagonal(J, -alpha)
        for i in range(1, n):
            J[i, i - 1] = 1.0
        xn = x[n - 1]
        J[0, n - 1] = -m * xn ** (m - 1) / (1.0 + xn ** m) ** 2
        return J

    return Model(name="goodwin", n=n, field=field, jacobian=jacobian,
                 box_lower=lower, box_upper=upper,
                 params={"n": n, "alpha": alpha.tolist(), "m": int(m)},
                 rhs_compiled=(_goodwin_rhs,
                               np.concatenate([[float(m)], alpha])))


def goodwin_equilibrium(model: Model, tol: float = 1e-14) -> Equilibrium:
    """Closed-form-backed equilibrium: e_n is the unique positive root of
    Q(s) = alpha s^(m+1) + alpha s - 1 (bisection), the rest backfilled by the
    cascade relations."""
    if model.name != "goodwin":
        raise BadParams("goodwin_equilibrium expects a goodwin model")
    alpha_vec = np.asarray(model.params["alpha"], dtype=float)
    m = model.params["m"]
    n = model.n
    a = float(np.prod(alpha_vec))

    def Q(s):
        return a * s ** (m + 1) + a * s - 1.0

    lo, hi = 0.0, 1.0 / a + 1.0  # Q(0) = -1 < 0 and Q(1/a+1) > 0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if Q(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    en = 0.5 * (lo + hi)
    e = np.empty(n)
    e[n - 1] = en
    for j in range(n - 1):
        e[j] = np.prod(alpha_vec[j + 1:]) * en
    return _make_equilibrium(model, e)


# ---------------------------------------------------------------------------
# RNA-mediated oscillator


@njit(cache=True)
def _rna_rhs(x, p):
    k1, k2, b1, b2, d1, d2, g1, g2, x2tot, x4tot = (
        p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], p[9])
    dx = np.empty(4)
    dx[0] = k1 * x[1] - d1 * x[0] - g2 * x[3] * x[0]
    dx[1] = -b1 * x[1] + g1 * (x2tot - x[1]) * x[2]
    dx[2] = k2 * x[3] - d2 * x[2] - g1 * (x2tot - x[1]) * x[2]
    dx[3] = b2 * (x4tot - x[3]) - g2 * x[3] * x[0]
    return dx


RNA_EXAMPLE_PARAMS = {
    "beta1": 0.2, "beta2": 0.5, "kappa1": 15.0, "kappa2": 1.0,
    "delta1": 0.01, "delta2": 0.1, "gamma1": 0.1, "gamma2": 20.0,
    "x2tot": 15.0, "x4tot": 20.0,
}


def rna_oscillator(**params) -> Model:
    """4-dimensional oscillator with RNA-mediated sequestration.

        dx1/dt = kappa1 x2 - delta1 x1 - gamma2 x4 x1
        dx2/dt = -beta1 x2 + gamma1 (x2tot - x2) x3
        dx3/dt = kappa2 x4 - delta2 x3 - gamma1 (x2tot - x2) x3
        dx4/dt = beta2 (x4tot - x4) - gamma2 x4 x1

    Box: [0, x1tot] x [0, x2tot] x [0, x3tot] x [0, x4tot] with the derived
    totals x1tot = kappa1 x2tot / delta1 and x3tot = kappa2 x4tot / delta2
    (from dx1/dt <= kappa1 x2tot - delta1 x1 and its x3 analogue).
    """
    p = dict(RNA_EXAMPLE_PARAMS)
    unknown = set(params) - set(p)
    if unknown:
        raise BadParams(f"unknown parameters {sorted(unknown)}")
    p.update({k: float(v) for k, v in params.items()})
    if any(v <= 0 for v in p.values()):
        raise BadParams("all parameters must be positive")

    k1, k2 = p["kappa1"], p["kappa2"]
    b1, b2 = p["beta1"], p["beta2"]
    d1, d2 = p["delta1"], p["delta2"]
    g1, g2 = p["gamma1"], p["gamma2"]
    x2tot, x4tot = p["x2tot"], p["x4tot"]
    x1tot = k1 * x2tot / d1
    x3tot = k2 * x4tot / d2

    def field(x):
        x1, x2, x3, x4 = np.asarray(x, dtype=float)
        return np.array([
            k1 * x2 - d1 * x1 - g2 * x4 * x1,
            -b1 * x2 + g1 * (x2tot - x2) * x3,
            k2 * x4 - d2 * x3 - g1 * (x2tot - x2) * x3,
            b2 * (x4tot - x4) - g2 * x4 * x1,
        ])

    def jacobian(x):
        x1, x2, x3, x4 = np.asarray(x, dtype=float)
        return np.array([
            [-d1 - g2 * x4, k1, 0.0, -g2 * x1],
            [0.0, -b1 - g1 * x3, g1 * (x2tot - x2), 0.0],
            [0.0, g1 * x3, -d2 - g1 * (x2tot - x2), k2],
            [-g2 * x4, 0.0, 0.0, -b2 - g2 * x1],
        ])

    lower = np.zeros(4)
    upper = np.array([x1tot, x2tot, x3tot, x4tot])
    pvec = np.array([k1, k2, b1, b2, d1, d2, g1, g2, x2tot, x4tot])
    return Model(name="rna", n=4, field=field, jacobian=jacobian,
                 box_lower=lower, box_upper=upper, params=p,
                 rhs_compiled=(_rna_rhs, pvec))


# ---------------------------------------------------------------------------
# generic equilibrium solving


def _newton(model: Model, x0: np.ndarray, tol: float, max_iter: int = 100
            ) -> Optional[np.ndarray]:
    """Damped Newton with backtracking on the residual norm; None on failure."""
    x = np.asarray(x0, dtype=float).copy()
    for _ in range(max_iter):
        f = model.field(x)
        nf = np.max(np.abs(f))
        if nf <= tol:
            return x
        try:
            step = np.linalg.solve(model.jacobian(x), -f)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        for _ in range(40):
            xn = x + lam * step
            fn = model.field(xn)
            if np.all(np.isfinite(fn)) and np.max(np.abs(fn)) < nf:
                break
            lam *= 0.5
        else:
            return None
        x = xn
    return None


def find_equilibrium(model: Model, x0=None, tol: float = 1e-10,
                     n_starts: int = 32, seed: int = 0) -> Equilibrium:
    """Multi-start damped Newton inside the box; NotInterior if the converged
    point sits on the boundary."""
    starts = []
    if x0 is not None:
        starts.append(np.asarray(x0, dtype=float))
    starts.append(model.box_center)
    sob = qmc.Sobol(d=model.n, scramble=True, seed=seed)
    pts = qmc.scale(sob.random(n_starts), model.box_lower, model.box_upper)
    margin = 1e-3 * (model.box_upper - model.box_lower)
    for p in pts:
        starts.append(np.clip(p, model.box_lower + margin, model.box_upper - margin))
    for start in starts:
        x = _newton(model, start, tol)
        if x is None:
            continue
        slack = 1e-8 * model.box_diameter
        if np.any(x < model.box_lower - slack) or np.any(x > model.box_upper + slack):
            continue
        eq = _make_equilibrium(model, x)
        if not eq.in_interior:
            raise NotInterior(f"equilibrium {x} lies on the box boundary")
        return eq
    raise NoConvergence("damped Newton failed from all starts")
