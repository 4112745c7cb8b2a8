"""Sign-pattern classification of Jacobians and sampled cooperativity certification.

The two templates are the Metzler pattern (k=1) and the cyclic tridiagonal
pattern with negative corners (k=2).  ``certify`` samples the Jacobian over
the model's box and, for the strong variant, additionally requires strong
connectivity of the interaction graph at all interior samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.stats import qmc

__all__ = [
    "DimensionMismatch",
    "NEG",
    "ZERO",
    "POS",
    "ANY",
    "SignPattern",
    "a1_pattern",
    "a2_pattern",
    "matches_pattern",
    "is_irreducible",
    "variational_matrix",
    "CoopCertificate",
    "certify",
    "sample_box",
]

NEG, ZERO, POS, ANY = -1, 0, 1, 2


class DimensionMismatch(ValueError):
    pass


_CELL_NAMES = {NEG: "<=0", ZERO: "=0", POS: ">=0", ANY: "*"}


@dataclass(frozen=True)
class SignPattern:
    """n x n grid of cell constraints from {NEG, ZERO, POS, ANY}."""

    cells: np.ndarray

    @property
    def n(self) -> int:
        return self.cells.shape[0]

    def describe_cell(self, i: int, j: int) -> str:
        return _CELL_NAMES[int(self.cells[i, j])]


def a1_pattern(n: int) -> SignPattern:
    """Metzler template: every off-diagonal entry nonnegative."""
    cells = np.full((n, n), POS, dtype=np.int8)
    np.fill_diagonal(cells, ANY)
    return SignPattern(cells)


def a2_pattern(n: int) -> SignPattern:
    """Cyclic tridiagonal template: nonnegative sub/super-diagonals, negative
    corners (1,n) and (n,1), zeros elsewhere off the band."""
    cells = np.full((n, n), ZERO, dtype=np.int8)
    np.fill_diagonal(cells, ANY)
    for i in range(n - 1):
        cells[i, i + 1] = POS
        cells[i + 1, i] = POS
    cells[0, n - 1] = NEG
    cells[n - 1, 0] = NEG
    return SignPattern(cells)


def pattern_for_k(n: int, k: int) -> SignPattern:
    if k == 1:
        return a1_pattern(n)
    if k == 2:
        return a2_pattern(n)
    raise ValueError("sign-pattern templates exist only for k = 1, 2")


def matches_pattern(A, pattern: SignPattern, tau: float = 0.0):
    """Check every cell constraint with slack tau.

    Returns (ok, violation); violation is None or a dict with the first
    offending cell.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != pattern.cells.shape:
        raise DimensionMismatch(f"matrix {A.shape} vs pattern {pattern.cells.shape}")
    cells = pattern.cells
    bad_neg = (cells == NEG) & (A > tau)
    bad_zero = (cells == ZERO) & (np.abs(A) > tau)
    bad_pos = (cells == POS) & (A < -tau)
    bad = bad_neg | bad_zero | bad_pos
    if not bad.any():
        return True, None
    i, j = np.argwhere(bad)[0]
    return False, {
        "row": int(i),
        "col": int(j),
        "value": float(A[i, j]),
        "constraint": pattern.describe_cell(i, j),
    }


def is_irreducible(A, tau: Optional[float] = None) -> bool:
    """True iff the directed graph with edges |a_ij| > tau (i != j) is strongly
    connected.  Default tau is 1e-12 * max-norm of A."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 1:
        return True
    if tau is None:
        tau = 1e-12 * np.max(np.abs(A))
    mask = np.abs(A) > tau
    np.fill_diagonal(mask, False)
    ncomp, _ = connected_components(csr_matrix(mask), directed=True, connection="strong")
    return ncomp == 1


class OutOfDomain(RuntimeError):
    pass


def variational_matrix(model, a, b, t: float = 0.0, quadrature_points: int = 16,
                       rtol: float = 1e-9, atol: float = 1e-12) -> np.ndarray:
    """Averaged Jacobian along the segment between x(t,a) and x(t,b).

    Fixed-order Gauss-Legendre quadrature of J_f(r*x(t,a) + (1-r)*x(t,b))
    over r in [0,1]; by convexity of the box the segment stays in-domain.
    """
    from .ode import integrate  # local import to avoid a cycle

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if t > 0.0:
        xa = integrate(model, a, t, rtol=rtol, atol=atol).at(t)
        xb = integrate(model, b, t, rtol=rtol, atol=atol).at(t)
    else:
        xa, xb = a, b
    slack = 1e-9 * np.max(model.box_upper - model.box_lower)
    for x in (xa, xb):
        if np.any(x < model.box_lower - slack) or np.any(x > model.box_upper + slack):
            raise OutOfDomain("trajectory sample left the box")
    nodes, weights = np.polynomial.legendre.leggauss(quadrature_points)
    r = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    M = np.zeros((model.n, model.n))
    for ri, wi in zip(r, w):
        M += wi * model.jacobian(ri * xa + (1.0 - ri) * xb)
    return M


@dataclass
class CoopCertificate:
    """Outcome of sampled k-cooperativity certification over the model box."""

    model: str
    k: int
    strong: bool
    samples_checked: int
    domain_lower: np.ndarray
    domain_upper: np.ndarray
    violations: list = field(default_factory=list)
    irreducibility_fraction: float = 1.0
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "k": self.k,
            "strong": self.strong,
            "samples_checked": self.samples_checked,
            "domain": {
                "lower": [float(v) for v in self.domain_lower],
                "upper": [float(v) for v in self.domain_upper],
            },
            "violations": self.violations,
            "irreducibility_fraction": self.irreducibility_fraction,
            "passed": self.passed,
        }


def sample_box(lower, upper, n_samples: int = 4096, seed: int = 0,
               include_corners: bool = True) -> np.ndarray:
    """Low-discrepancy samples of a box, plus all corners and the center."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = lower.size
    sob = qmc.Sobol(d=n, scramble=True, seed=seed)
    pts = qmc.scale(sob.random(n_samples), lower, upper)
    extras = [0.5 * (lower + upper)]
    if include_corners and n <= 16:
        for mask in range(2 ** n):
            corner = np.where([(mask >> i) & 1 for i in range(n)], upper, lower)
            extras.append(corner)
    return np.vstack([pts] + [np.asarray(extras)])


def certify(model, k: int = 2, strong: bool = True, n_samples: int = 4096,
            seed: int = 0, tau: float = 0.0, irr_tau: float = 0.0,
            max_violations: int = 16) -> CoopCertificate:
    """Sampled certificate that the model Jacobian matches the k-pattern on its
    box; the strong variant also requires irreducibility at interior samples.

    irr_tau defaults to exact zero: the structural zero set of the built-in
    couplings is the box boundary, and a relative threshold would misread
    saturated (tiny but nonzero) Hill derivatives as missing edges.
    """
    pattern = pattern_for_k(model.n, k)
    pts = sample_box(model.box_lower, model.box_upper, n_samples=n_samples, seed=seed)
    interior = np.all(
        (pts > model.box_lower + 0.0) & (pts < model.box_upper - 0.0), axis=1
    )
    violations = []
    irreducible = 0
    n_interior = 0
    for x, inside in zip(pts, interior):
        J = model.jacobian(x)
        ok, viol = matches_pattern(J, pattern, tau=tau)
        if not ok and len(violations) < max_violations:
            viol = dict(viol)
            viol["sample"] = [float(v) for v in x]
            violations.append(viol)
        if inside:
            n_interior += 1
            if is_irreducible(J, tau=irr_tau):
                irreducible += 1
    frac = irreducible / n_interior if n_interior else 1.0
    passed = not violations and (not strong or frac == 1.0)
    return CoopCertificate(
        model=model.name, k=k, strong=strong, samples_checked=len(pts),
        domain_lower=model.box_lower, domain_upper=model.box_upper,
        violations=violations, irreducibility_fraction=frac, passed=passed,
    )
