"""Sign-variation counts and the rank-k cones built from them.

The three counters live on real vectors:

* ``sigma``   -- adjacent sign changes, defined only when no entry is zero;
* ``s_minus`` -- sigma after deleting zero entries (weak count);
* ``s_plus``  -- max sigma over all +/-1 completions of the zeros (strong count).

``in_Pk_minus`` / ``in_Pk_plus`` test membership in the cones of vectors with
at most k-1 weak / strong sign variations.
"""

from __future__ import annotations

import itertools

import numpy as np

__all__ = [
    "ZeroEntry",
    "BadK",
    "SignVarResult",
    "sigma",
    "s_minus",
    "s_plus",
    "s_plus_enumerated",
    "sign_var",
    "in_Pk_minus",
    "in_Pk_plus",
]


class ZeroEntry(ValueError):
    """sigma() was called on a vector with a zero entry."""


class BadK(ValueError):
    """k outside the valid range [1, n]."""


def _signs(x, tau_zero: float) -> np.ndarray:
    """Return entrywise signs with entries of magnitude <= tau_zero mapped to 0."""
    x = np.asarray(x, dtype=float).ravel()
    s = np.sign(x)
    if tau_zero > 0.0:
        s[np.abs(x) <= tau_zero] = 0.0
    return s.astype(int)


def sigma(x, tau_zero: float = 0.0) -> int:
    """Number of sign variations of a vector with no zero entries.

    Raises ZeroEntry if any entry is (treated as) zero; use s_minus / s_plus
    for vectors that may contain zeros.
    """
    s = _signs(x, tau_zero)
    if s.size == 0:
        return 0
    if np.any(s == 0):
        raise ZeroEntry("sigma is undefined for vectors with zero entries")
    return int(np.sum(s[:-1] * s[1:] < 0))


def s_minus(x, tau_zero: float = 0.0) -> int:
    """Weak number of sign variations: sigma of the zero-deleted vector.

    The all-zero vector maps to 0 by convention.
    """
    s = _signs(x, tau_zero)
    s = s[s != 0]
    if s.size <= 1:
        return 0
    return int(np.sum(s[:-1] * s[1:] < 0))


def s_plus(x, tau_zero: float = 0.0) -> int:
    """Strong number of sign variations: max sigma over +/-1 completions of zeros.

    The all-zero vector of length n maps to n-1 by convention.  Computed in
    closed form run-by-run; each maximal run of L zeros strictly between
    entries of sign a and b contributes L variations plus one more when the
    alternating completion also flips against b.  Leading/trailing zero runs
    always alternate fully, contributing their length.
    """
    s = _signs(x, tau_zero)
    n = s.size
    if n == 0:
        return 0
    nz = np.flatnonzero(s)
    if nz.size == 0:
        return n - 1
    total = nz[0] + (n - 1 - nz[-1])  # leading + trailing runs
    for i, j in zip(nz[:-1], nz[1:]):
        run = j - i - 1
        a, b = s[i], s[j]
        # sign at the end of the alternating fill starting with -a
        end = a * (-1) ** run
        total += run + (1 if end != b else 0)
    return int(total)


def s_plus_enumerated(x, tau_zero: float = 0.0, max_zeros: int = 20) -> int:
    """Exhaustive-enumeration oracle for s_plus; exponential in the zero count."""
    s = _signs(x, tau_zero).astype(float)
    zeros = np.flatnonzero(s == 0)
    if zeros.size > max_zeros:
        raise ValueError(f"refusing to enumerate {zeros.size} > {max_zeros} zeros")
    if zeros.size == 0:
        return sigma(s)
    best = 0
    for fill in itertools.product((-1.0, 1.0), repeat=zeros.size):
        z = s.copy()
        z[zeros] = fill
        best = max(best, sigma(z))
    return best


class SignVarResult:
    """Pair of weak and strong counts for one vector; 0 <= weak <= strong <= n-1."""

    __slots__ = ("weak", "strong", "n")

    def __init__(self, weak: int, strong: int, n: int):
        if not 0 <= weak <= strong <= max(n - 1, 0):
            raise ValueError(f"invalid sign-variation pair ({weak}, {strong}) for n={n}")
        self.weak = weak
        self.strong = strong
        self.n = n

    def __repr__(self):
        return f"SignVarResult(weak={self.weak}, strong={self.strong}, n={self.n})"

    def __eq__(self, other):
        return (self.weak, self.strong, self.n) == (other.weak, other.strong, other.n)


def sign_var(x, tau_zero: float = 0.0) -> SignVarResult:
    """Compute both counters at once."""
    x = np.asarray(x, dtype=float).ravel()
    return SignVarResult(s_minus(x, tau_zero), s_plus(x, tau_zero), x.size)


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise BadK(f"k={k} outside [1, {n}]")


def in_Pk_minus(x, k: int, tau_zero: float = 0.0) -> bool:
    """Membership in the closed cone of vectors with at most k-1 weak variations."""
    x = np.asarray(x, dtype=float).ravel()
    _check_k(k, x.size)
    return s_minus(x, tau_zero) <= k - 1


def in_Pk_plus(x, k: int, tau_zero: float = 0.0) -> bool:
    """Membership in the open cone of vectors with at most k-1 strong variations."""
    x = np.asarray(x, dtype=float).ravel()
    _check_k(k, x.size)
    return s_plus(x, tau_zero) <= k - 1
