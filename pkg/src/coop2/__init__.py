"""Certification of strong 2-cooperativity for nonlinear ODE systems, with
spectral splitting of the linearization, a sampled Lyapunov instability
certificate, and detection of convergence to periodic orbits."""

from . import coop, lyapunov, modeldsl, models, ode, orbit, signvar, spectral

__version__ = "0.1.0"

__all__ = ["coop", "lyapunov", "modeldsl", "models", "ode", "orbit",
           "signvar", "spectral", "__version__"]
