"""Walkthrough: the four-species RNA regulation oscillator.

States: x1 free mRNA, x2 a transcription-factor complex, x3 free protein,
x4 an mRNA-protein complex.  The nonlinearity is bilinear (mass-action
binding terms gamma1 x2 x3 and gamma2 x1 x4), so the Jacobian sign pattern
depends on the state and certification really has to sample the box.

The invariant rectangle is derived from conservation-style bounds: x2 and x4
are capped by their totals, x1 by kappa1 x2tot / delta1, and x3 by
kappa2 x4tot / delta2.  That puts the box ceiling several decades above
the attractor, which is exactly the regime where the trajectory tooling has
to work hardest (see the s^- monitor at the end).

Run:  python demos/rna_walkthrough.py
"""

import numpy as np

from coop2 import models, ode, orbit, spectral
from coop2.coop import certify

np.set_printoptions(precision=5, suppress=True)

# ---------------------------------------------------------------------------
# 1. Model and certification.
model = models.rna_oscillator()
print(f"parameters: {models.RNA_EXAMPLE_PARAMS}")
print(f"box: lower = {model.box_lower}, upper = {model.box_upper}")

cert = certify(model, k=2, strong=True, n_samples=2048, seed=0)
print(f"strongly 2-cooperative over {cert.samples_checked} samples: "
      f"{cert.passed}")

# ---------------------------------------------------------------------------
# 2. Equilibrium (Newton from the box center) and spectrum.
eq = models.find_equilibrium(model)
print(f"\nequilibrium e = {eq.e}")
print(f"residual |f(e)| = {np.linalg.norm(model.field(eq.e)):.2e}")
print(f"eigenvalues = {np.round(eq.spectrum.eigenvalues, 5)}")
print(f"unstable count = {eq.unstable_count}")

split = spectral.spectral_split(model.jacobian(eq.e))
print(f"block case = {split.block_case.name}, gap = {split.gap:.4f}")

# ---------------------------------------------------------------------------
# 3. Classification from the origin, the natural "everything off" start.
a = np.zeros(4)
rep = orbit.classify(model, eq, a)
print(f"\nstart at the origin: verdict = {rep.verdict}, "
      f"period = {rep.period:.6f}")
print(f"amplitude = {np.round(rep.amplitude, 5)}")
print(f"return-map contraction = {rep.return_map_contraction:.2e}")

# ---------------------------------------------------------------------------
# 4. Cone absorption at the difference level: two starts whose difference has
# a single sign change keep s^-(x(t,a) - x(t,b)) <= 1 for all later times.
b = np.array([0.5, 0.2, 0.05, 0.0])
print(f"\ns^-(a - b) = {orbit.s_minus(a - b)}")
t_grid = np.linspace(0.0, 20.0, 41)
sv = ode.monitor_difference(model, a, b, t_grid)
print(f"monitored s^- along the pair: max = {sv.max()} (never exceeds 1)")

# ---------------------------------------------------------------------------
# 5. The annotated trajectory: the s^- column that the CSV export carries is
# computed relative to e at every accepted step.
traj = ode.integrate(model, a, 60.0, equilibrium=eq)
print(f"\n{traj.times.size} accepted steps over t in [0, 60]")
print(f"max s^-(x(t) - e) = {traj.s_minus_to_e.max()}")
print(f"final state x(60) = {traj.states[-1]}")
