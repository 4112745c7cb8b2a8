"""Sampled Lyapunov certificate for instability of the equilibrium on the
low-variation cone.

In scaled coordinates q = S_delta (x - e) the dominant plane is span{e1, e2}
and V(q) = (q1^2 + q2^2)/2.  The certificate bundles the conic-separation
constant eps_tilde (no low-variation direction gets too close to the
complementary subspace), the resulting coordinate weight theta_tilde, a
sampled quadratic bound M on the Taylor remainder, the coercivity constant
alpha of the scaled dominant block, and the level threshold eta0 below which
V must grow.  Everything here is sampled, not proved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import spectral
from .ode import _s_minus_rows

__all__ = [
    "ZeroVector",
    "SeparationFailure",
    "NotPositiveDefinite",
    "SamplingSettings",
    "LyapunovCertificate",
    "p_ratio",
    "build_certificate",
]


class ZeroVector(ValueError):
    pass


class SeparationFailure(RuntimeError):
    """No grid epsilon separates the sampled low-variation cone from the
    complementary subspace."""


class NotPositiveDefinite(RuntimeError):
    """The symmetrized scaled dominant block is not positive-definite."""


def p_ratio(xi) -> float:
    """Fraction of the norm of xi carried by coordinates 3..n.

    Homogeneous of degree zero; equals 1 exactly on the complementary
    subspace span{e3, ..., en} minus the origin.
    """
    xi = np.asarray(xi, dtype=float)
    nrm = np.linalg.norm(xi)
    if nrm == 0.0:
        raise ZeroVector("p_ratio is undefined at the origin")
    return float(np.linalg.norm(xi[2:]) / nrm)


@dataclass(frozen=True)
class SamplingSettings:
    seed: int = 0
    n_cone: int = 100_000  # samples for the eps_tilde grid search
    n_taylor: int = 100_000  # samples for the remainder bound M
    n_level: int = 10_000  # samples per tested level set
    batch: int = 65_536


@dataclass
class LyapunovCertificate:
    delta: float
    S_delta: np.ndarray
    eps_tilde: float
    theta_tilde: float
    M: float
    alpha: float
    eta0: float  # +inf when the remainder vanishes (linear field)
    verification: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "S_delta": [[float(v) for v in row] for row in self.S_delta],
            "eps_tilde": self.eps_tilde,
            "theta_tilde": self.theta_tilde,
            "M": self.M,
            "alpha": self.alpha,
            "eta0": None if np.isinf(self.eta0) else self.eta0,
            "eta0_unbounded": bool(np.isinf(self.eta0)),
            "verification": self.verification,
            "status": "sampled, not proved",
        }


def _sample_cone(rng, model, e, n_want, batch):
    """Uniform box samples x with s^-(x - e) <= 1, as rows of x - e."""
    lower, upper = model.box_lower, model.box_upper
    out = []
    got = 0
    # the cone covers a positive fraction of the box for the patterns in
    # scope, but guard against degenerate geometry with a draw budget
    for _ in range(200):
        x = rng.uniform(lower, upper, size=(batch, model.n))
        d = x - e
        keep = _s_minus_rows(d, 1e-12) <= 1
        keep &= np.max(np.abs(d), axis=1) > 0
        d = d[keep]
        out.append(d)
        got += d.shape[0]
        if got >= n_want:
            break
    if got < n_want:
        raise SeparationFailure(
            f"could not draw {n_want} low-variation samples ({got} found)")
    return np.vstack(out)[:n_want]


def _p_rows(xi: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(xi, axis=1)
    tail = np.linalg.norm(xi[:, 2:], axis=1)
    return tail / nrm


def build_certificate(model, equilibrium, split: spectral.SpectralSplit,
                      sampling: SamplingSettings = SamplingSettings()
                      ) -> LyapunovCertificate:
    """Assemble the sampled certificate from a spectral split at e.

    Steps: scaled transform S_delta; dyadic grid search for eps_tilde over
    low-variation samples; theta_tilde; sampled Taylor-remainder bound M;
    alpha from the symmetrized scaled block; eta0 = (alpha/(2^(3/2) M
    theta_tilde))^2; and a direct check that V' > 0 on two level sets.
    """
    if split.gap <= 0:
        raise ValueError("spectral split must have a positive gap")
    e = np.asarray(getattr(equilibrium, "e", equilibrium), dtype=float)
    rng = np.random.default_rng(sampling.seed)

    delta = split.delta
    S = split.transform()
    Dl = np.ones(model.n)
    Dl[1] = delta
    Sd = Dl[:, None] * S
    Sd_inv = np.linalg.inv(Sd)
    A_tilde = Sd @ model.jacobian(e) @ Sd_inv

    # conic separation: largest dyadic eps with p <= 1 - eps on every sample
    d = _sample_cone(rng, model, e, sampling.n_cone, sampling.batch)
    xi = d @ Sd.T
    p_max = float(np.max(_p_rows(xi)))
    eps_tilde = 0.0
    for j in range(1, 21):
        eps = 2.0 ** -j
        if p_max <= 1.0 - eps:
            eps_tilde = eps
            break
    if eps_tilde == 0.0:
        raise SeparationFailure(
            f"sampled max p = {p_max:.6f} exceeds 1 - 2^-20")
    theta_tilde = 1.0 / (1.0 - (1.0 - eps_tilde) ** 2)

    # quadratic remainder bound over the whole scaled box image; uniform box
    # samples cover directions unevenly when e sits near a corner, so add
    # rays cast uniformly on the direction sphere, each truncated at the box
    x_unif = rng.uniform(model.box_lower, model.box_upper,
                         size=(sampling.n_taylor, model.n))
    n_dir = sampling.n_taylor // 4
    u = rng.standard_normal((n_dir, model.n))
    u /= np.linalg.norm(u, axis=1)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_hi = np.where(u > 0, (model.box_upper - e) / u,
                        np.where(u < 0, (model.box_lower - e) / u, np.inf))
    t_max = np.min(t_hi, axis=1)
    rays = [e + (frac * t_max)[:, None] * u for frac in (0.01, 0.1, 0.5, 1.0)]
    x = np.vstack([x_unif] + rays)
    q = (x - e) @ Sd.T
    fx = np.array([model.field(row) for row in x])
    h = fx @ Sd.T - q @ A_tilde.T
    # rounding noise in g - A_tilde q scales like eps*|q|, so dividing by
    # |q|^2 would blow up near e for an exactly linear field; zero out
    # remainders below the arithmetic floor so those report M = 0
    floor = 1e-10 * max(np.max(np.abs(fx)), 1e-300)
    h[np.abs(h) < floor] = 0.0
    qsq = np.sum(q * q, axis=1)
    ok = qsq > 0
    M = float(np.max(np.max(np.abs(h[ok]), axis=1) / qsq[ok]))

    L_tilde = spectral.scaled_block(split)
    alpha = float(np.min(np.linalg.eigvalsh(0.5 * (L_tilde + L_tilde.T))))
    if alpha <= 0.0:
        raise NotPositiveDefinite(f"alpha = {alpha:.3e} <= 0")

    eta0 = float("inf") if M == 0.0 else (alpha / (2.0 ** 1.5 * M * theta_tilde)) ** 2

    # level-set verification: V' = q1 q1' + q2 q2' on {V = eta} inside the
    # low-variation image; scaling a cone sample stays in the cone, so only
    # box membership of the rescaled point needs a recheck
    if np.isfinite(eta0):
        levels = [eta0 / 2.0, eta0 / 4.0]
    else:
        v = np.sum(q[:, :2] ** 2, axis=1) / 2.0
        vm = float(np.median(v[v > 0]))
        levels = [vm / 2.0, vm / 4.0]
    verification = {"levels": [], "samples_per_level": sampling.n_level,
                    "all_positive": True}
    for eta in levels:
        tested = 0
        vdot_min = float("inf")
        for _ in range(200):
            d = _sample_cone(rng, model, e, sampling.batch, sampling.batch)
            qc = d @ Sd.T
            plane = np.sum(qc[:, :2] ** 2, axis=1)
            good = plane > 0
            qc = qc[good]
            scale = np.sqrt(2.0 * eta / plane[good])
            qs = qc * scale[:, None]
            xs = qs @ Sd_inv.T + e
            inside = (np.all(xs >= model.box_lower, axis=1)
                      & np.all(xs <= model.box_upper, axis=1))
            qs = qs[inside]
            xs = xs[inside]
            if qs.shape[0] == 0:
                continue
            take = min(qs.shape[0], sampling.n_level - tested)
            qs, xs = qs[:take], xs[:take]
            gd = np.array([model.field(row) for row in xs]) @ Sd.T
            vdot = qs[:, 0] * gd[:, 0] + qs[:, 1] * gd[:, 1]
            vdot_min = min(vdot_min, float(np.min(vdot)))
            tested += take
            if tested >= sampling.n_level:
                break
        entry = {"eta": eta, "tested": tested, "min_vdot": vdot_min}
        verification["levels"].append(entry)
        if not (tested > 0 and vdot_min > 0.0):
            verification["all_positive"] = False

    return LyapunovCertificate(
        delta=delta, S_delta=Sd, eps_tilde=eps_tilde,
        theta_tilde=theta_tilde, M=M, alpha=alpha, eta0=eta0,
        verification=verification,
    )
