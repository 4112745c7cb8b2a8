"""Dense eigen-analysis for small matrices and the rank-2 invariant splitting.

Eigenvalues come from a Hessenberg reduction followed by Francis double-shift
QR iteration (dimension capped at 64).  ``spectral_split`` decomposes R^n into
the 2-dimensional dominant invariant subspace W1 and its (n-2)-dimensional
invariant complement W2, returns the real 2x2 dominant block in one of its
three canonical forms, and picks the diagonal scaling delta that makes the
symmetric part of the scaled block positive-definite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .signvar import s_minus, s_plus

__all__ = [
    "NoConvergence",
    "GapTooSmall",
    "NotUnstable",
    "OrderedSpectrum",
    "BlockCase",
    "SpectralSplit",
    "eigenvalues",
    "matrix_exp",
    "unstable_count",
    "real_axis_margin",
    "spectral_split",
    "delta_scaling",
]

MAX_DIM = 64


class NoConvergence(RuntimeError):
    """QR iteration did not deflate within the iteration budget."""


class GapTooSmall(RuntimeError):
    """Re(lambda_2) - Re(lambda_3) below tolerance; the splitting is meaningless."""


class NotUnstable(ValueError):
    """Dominant block has an eigenvalue with nonpositive real part."""


# ---------------------------------------------------------------------------
# eigenvalues


def _hessenberg(A: np.ndarray) -> np.ndarray:
    """Reduce A to upper Hessenberg form by Householder reflections."""
    H = A.astype(float).copy()
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        normx = np.linalg.norm(x)
        if normx == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(normx, x[0] if x[0] != 0 else 1.0)
        vn = np.linalg.norm(v)
        if vn == 0.0:
            continue
        v /= vn
        H[k + 1:, k:] -= 2.0 * np.outer(v, v @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v)
        H[k + 2:, k] = 0.0
    return H


def _eig2(a, b, c, d):
    """Eigenvalues of [[a, b], [c, d]]."""
    tr = a + d
    det = a * d - b * c
    disc = tr * tr / 4.0 - det
    if disc >= 0.0:
        r = math.sqrt(disc)
        return complex(tr / 2.0 + r), complex(tr / 2.0 - r)
    r = math.sqrt(-disc)
    return complex(tr / 2.0, r), complex(tr / 2.0, -r)


def _francis_eigvals(H: np.ndarray, max_sweeps_per_eig: int = 40) -> list[complex]:
    """Eigenvalues of an upper Hessenberg matrix via implicit double-shift QR."""
    H = H.copy()
    n = H.shape[0]
    eigs: list[complex] = []
    hi = n - 1
    budget = max_sweeps_per_eig * n
    sweeps = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(complex(H[0, 0]))
            hi = -1
            continue
        # deflate tiny subdiagonals in the active window
        lo = hi
        while lo > 0:
            if abs(H[lo, lo - 1]) <= np.finfo(float).eps * (
                abs(H[lo, lo]) + abs(H[lo - 1, lo - 1])
            ):
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs.append(complex(H[hi, hi]))
            hi -= 1
            continue
        if lo == hi - 1:
            l1, l2 = _eig2(H[lo, lo], H[lo, hi], H[hi, lo], H[hi, hi])
            eigs.extend([l1, l2])
            hi -= 2
            continue
        sweeps += 1
        if sweeps > budget:
            raise NoConvergence(f"QR iteration exceeded {budget} sweeps")
        # double shift from the trailing 2x2 block; Wilkinson-style exceptional
        # shift every 16 stalled sweeps
        if sweeps % 16 == 0:
            s = abs(H[hi, hi - 1]) + abs(H[hi - 1, hi - 2])
            trace, det = 2.0 * s, s * s
        else:
            trace = H[hi - 1, hi - 1] + H[hi, hi]
            det = H[hi - 1, hi - 1] * H[hi, hi] - H[hi - 1, hi] * H[hi, hi - 1]
        # first column of (H - l1 I)(H - l2 I)
        x = H[lo, lo] * H[lo, lo] + H[lo, lo + 1] * H[lo + 1, lo] - trace * H[lo, lo] + det
        y = H[lo + 1, lo] * (H[lo, lo] + H[lo + 1, lo + 1] - trace)
        z = H[lo + 2, lo + 1] * H[lo + 1, lo]
        for k in range(lo, hi - 1):
            v = np.array([x, y, z])
            nv = np.linalg.norm(v)
            if nv > 0.0:
                v = v.copy()
                v[0] += math.copysign(nv, x if x != 0 else 1.0)
                vn = np.linalg.norm(v)
                if vn > 0.0:
                    v /= vn
                    r0 = max(lo, k - 1)
                    H[k:k + 3, r0:] -= 2.0 * np.outer(v, v @ H[k:k + 3, r0:])
                    r1 = min(hi, k + 3) + 1
                    H[:r1, k:k + 3] -= 2.0 * np.outer(H[:r1, k:k + 3] @ v, v)
            x = H[k + 1, k]
            y = H[k + 2, k]
            z = H[k + 3, k] if k + 3 <= hi else 0.0
        # trailing 2x1 Givens
        g = math.hypot(x, y)
        if g > 0.0:
            cth, sth = x / g, y / g
            G = np.array([[cth, sth], [-sth, cth]])
            H[hi - 1:hi + 1, hi - 2:] = G @ H[hi - 1:hi + 1, hi - 2:]
            H[:hi + 1, hi - 1:hi + 1] = H[:hi + 1, hi - 1:hi + 1] @ G.T
    return eigs


def _order_eigs(vals: list[complex]) -> tuple[np.ndarray, np.ndarray]:
    """Order by descending real part with conjugate pairs adjacent (+imag first)."""
    vals = np.asarray(vals, dtype=complex)
    order = np.lexsort((-vals.imag, np.abs(vals.imag), -vals.real))
    return vals[order], order


@dataclass(frozen=True)
class OrderedSpectrum:
    """Full spectrum ordered by real part, conjugate pairs consecutive."""

    eigenvalues: np.ndarray  # complex, length n
    ordering: np.ndarray  # permutation applied to the raw eigenvalue list

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def real_parts(self) -> np.ndarray:
        return self.eigenvalues.real


def eigenvalues(A) -> OrderedSpectrum:
    """Full spectrum of a real square matrix, ordered for the splitting."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    n = A.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds cap {MAX_DIM}")
    if not np.all(np.isfinite(A)):
        raise ValueError("A has non-finite entries")
    if n == 1:
        raw = [complex(A[0, 0])]
    elif n == 2:
        raw = list(_eig2(A[0, 0], A[0, 1], A[1, 0], A[1, 1]))
    else:
        raw = _francis_eigvals(_hessenberg(A))
    # snap conjugate-pair real parts and clean roundoff asymmetry: pair each
    # complex value with its best conjugate match
    vals, order = _order_eigs(raw)
    vals = _symmetrize_pairs(vals, np.linalg.norm(A, 2))
    return OrderedSpectrum(eigenvalues=vals, ordering=order)


def _symmetrize_pairs(vals: np.ndarray, scale: float) -> np.ndarray:
    """Average adjacent conjugate pairs so they are exact conjugates."""
    vals = vals.copy()
    tol = 1e-8 * max(scale, 1.0)
    i = 0
    while i < vals.size - 1:
        a, b = vals[i], vals[i + 1]
        if abs(a - np.conj(b)) <= tol and abs(a.imag) > 0:
            re = 0.5 * (a.real + b.real)
            im = 0.5 * (abs(a.imag) + abs(b.imag))
            vals[i] = complex(re, im)
            vals[i + 1] = complex(re, -im)
            i += 2
        else:
            i += 1
    return vals


# ---------------------------------------------------------------------------
# matrix exponential


_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
    33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)


def matrix_exp(A, s: float = 1.0) -> np.ndarray:
    """exp(A*s) by scaling and squaring with a degree-13 Pade approximant."""
    A = np.asarray(A, dtype=float) * float(s)
    n = A.shape[0]
    nrm = np.linalg.norm(A, 1)
    squarings = max(0, int(math.ceil(math.log2(nrm / 5.371920351148152))) if nrm > 0 else 0)
    A = A / (2.0 ** squarings)
    b = _PADE13
    I = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (
        A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
        + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I
    )
    V = (
        A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
        + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I
    )
    E = np.linalg.solve(V - U, V + U)
    for _ in range(squarings):
        E = E @ E
    return E


# ---------------------------------------------------------------------------
# stability counting


def unstable_count(spec: OrderedSpectrum, tau_stab: float = 0.0) -> int:
    """Number of eigenvalues with real part above tau_stab."""
    return int(np.sum(spec.real_parts() > tau_stab))


def real_axis_margin(spec: OrderedSpectrum) -> float:
    """min |Re(lambda_i)|; small values flag a fragile stability verdict."""
    return float(np.min(np.abs(spec.real_parts())))


# ---------------------------------------------------------------------------
# splitting


class BlockCase(str, Enum):
    REAL_DIAGONAL = "RealDiagonal"
    COMPLEX_PAIR = "ComplexPair"
    JORDAN_BLOCK = "JordanBlock"


@dataclass
class SpectralSplit:
    """W1/W2 invariant decomposition with the scaled dominant block."""

    spectrum: OrderedSpectrum
    W1: np.ndarray  # n x 2, columns span the dominant invariant subspace
    W2: np.ndarray  # n x (n-2), columns span the invariant complement
    gap: float  # Re(lambda_2) - Re(lambda_3)
    dominant_block: np.ndarray  # 2x2 real Jordan form of A restricted to W1
    block_case: BlockCase
    delta: float
    Psi: np.ndarray  # (n-2) x (n-2) representation of A on W2
    diagnostics: dict = field(default_factory=dict)

    def transform(self) -> np.ndarray:
        """S with S A S^-1 = diag(dominant_block, Psi); rows are the q-coordinates."""
        return np.linalg.inv(np.hstack([self.W1, self.W2]))


def _null_vector(M: np.ndarray) -> np.ndarray:
    """Unit vector minimizing |M v| (smallest right singular vector)."""
    _, _, vh = np.linalg.svd(M)
    return vh[-1].conj()


def _eigvec(A: np.ndarray, lam: complex) -> np.ndarray:
    M = A.astype(complex) - lam * np.eye(A.shape[0])
    return _null_vector(M)


def delta_scaling(dominant_block, block_case: BlockCase) -> float:
    """Diagonal scale delta making sym(diag(1,delta) L diag(1,1/delta)) pos.-def.

    Cases (i) real diagonal and (ii) rotation-like return 1; the Jordan case
    walks powers of two starting at the first power >= 1/u and returns the
    first one whose scaled symmetric part passes the leading-minor test.
    """
    L = np.asarray(dominant_block, dtype=float)
    l1, l2 = _eig2(L[0, 0], L[0, 1], L[1, 0], L[1, 1])
    if l1.real <= 0.0 or l2.real <= 0.0:
        raise NotUnstable(f"dominant block eigenvalues {l1}, {l2} not both unstable")
    if block_case in (BlockCase.REAL_DIAGONAL, BlockCase.COMPLEX_PAIR):
        return 1.0
    u = L[0, 0]
    delta = 1.0
    while delta < 1.0 / u:
        delta *= 2.0
    for _ in range(200):
        sym = _scaled_sym(L, delta)
        if sym[0, 0] > 0.0 and np.linalg.det(sym) > 0.0:
            return delta
        delta *= 2.0
    raise NotUnstable("no power-of-two delta certifies positive-definiteness")


def _scaled_sym(L: np.ndarray, delta: float) -> np.ndarray:
    D = np.diag([1.0, delta])
    Dinv = np.diag([1.0, 1.0 / delta])
    Ld = D @ L @ Dinv
    return 0.5 * (Ld + Ld.T)


def scaled_block(split: "SpectralSplit") -> np.ndarray:
    """diag(1, delta) * dominant_block * diag(1, 1/delta)."""
    D = np.diag([1.0, split.delta])
    Dinv = np.diag([1.0, 1.0 / split.delta])
    return D @ split.dominant_block @ Dinv


def spectral_split(A, tau_gap: float = 1e-8, repeat_tol_scale: float = 1e-8,
                   cone_samples: int = 720) -> SpectralSplit:
    """Split R^n into the dominant 2-dim invariant subspace and its complement.

    Requires n >= 3 and Re(lambda_2) > Re(lambda_3) strictly (above tau_gap).
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n < 3:
        raise ValueError("spectral_split needs n >= 3")
    spec = eigenvalues(A)
    vals = spec.eigenvalues
    gap = float(vals[1].real - vals[2].real)
    if gap < tau_gap:
        raise GapTooSmall(f"Re(l2)-Re(l3) = {gap:.3e} < {tau_gap:.1e}")

    scale = np.linalg.norm(A, 2)
    rank_tol = repeat_tol_scale * max(scale, 1.0)
    l1, l2 = vals[0], vals[1]

    if abs(l1.imag) > rank_tol:
        # complex conjugate pair; basis (Im w, Re w) yields [[u, -v], [v, u]]
        lam = l1 if l1.imag > 0 else l2
        w = _eigvec(A, lam)
        B1 = np.column_stack([w.imag, w.real])
        block = np.array([[lam.real, -lam.imag], [lam.imag, lam.real]])
        case = BlockCase.COMPLEX_PAIR
    elif abs(l1.real - l2.real) > rank_tol:
        v1 = _eigvec(A, l1).real
        v2 = _eigvec(A, l2).real
        B1 = np.column_stack([v1, v2])
        block = np.diag([l1.real, l2.real])
        case = BlockCase.REAL_DIAGONAL
    else:
        # repeated real dominant eigenvalue: geometric multiplicity from the
        # singular values of A - u I
        u = 0.5 * (l1.real + l2.real)
        M = A - u * np.eye(n)
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-2] <= rank_tol:
            _, _, vh = np.linalg.svd(M)
            B1 = vh[-2:].T
            block = np.diag([u, u])
            case = BlockCase.REAL_DIAGONAL
        else:
            v = _null_vector(M).real
            w, *_ = np.linalg.lstsq(M, v, rcond=None)
            B1 = np.column_stack([v, w])
            block = np.array([[u, 1.0], [0.0, u]])
            case = BlockCase.JORDAN_BLOCK

    # W2 = kernel of the left dominant subspace: build the same 2-dim basis for
    # A^T, then take the orthogonal complement of its span
    AT = A.T
    if case is BlockCase.COMPLEX_PAIR:
        lam = l1 if l1.imag > 0 else l2
        wl = _eigvec(AT, lam)
        C1 = np.column_stack([wl.real, wl.imag])
    elif case is BlockCase.REAL_DIAGONAL and abs(l1.real - l2.real) > rank_tol:
        C1 = np.column_stack([_eigvec(AT, l1).real, _eigvec(AT, l2).real])
    else:
        u = l1.real
        M = AT - u * np.eye(n)
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-2] <= rank_tol:
            _, _, vh = np.linalg.svd(M)
            C1 = vh[-2:].T
        else:
            v = _null_vector(M).real
            w, *_ = np.linalg.lstsq(M, v, rcond=None)
            C1 = np.column_stack([v, w])
    # orthonormal basis of the orthogonal complement of span(C1)
    q, _ = np.linalg.qr(C1, mode="complete")
    B2 = q[:, 2:]

    Psi = np.linalg.lstsq(B2, A @ B2, rcond=None)[0]
    delta = delta_scaling(block, case)

    diagnostics = _cone_diagnostics(A, B1, B2, block, delta, cone_samples)
    return SpectralSplit(
        spectrum=spec, W1=B1, W2=B2, gap=gap, dominant_block=block,
        block_case=case, delta=delta, Psi=Psi, diagnostics=diagnostics,
    )


def _cone_diagnostics(A, B1, B2, block, delta, cone_samples) -> dict:
    """Sampled checks of the cone and invariance properties of the split."""
    scale = np.linalg.norm(A, 2)
    thetas = np.linspace(0.0, np.pi, cone_samples, endpoint=False)
    w1_ok = True
    for th in thetas:
        v = math.cos(th) * B1[:, 0] + math.sin(th) * B1[:, 1]
        if s_plus(v, tau_zero=1e-12 * max(np.max(np.abs(v)), 1e-300)) > 1:
            w1_ok = False
            break
    res1 = _invariance_residual(A, B1)
    res2 = _invariance_residual(A, B2)
    sym = _scaled_sym(block, delta)
    alpha = float(np.min(np.linalg.eigvalsh(sym)))
    stacked = np.hstack([B1, B2])
    return {
        "w1_in_P2_plus": w1_ok,
        "w1_samples": int(cone_samples),
        "invariance_residual_W1": res1 / max(scale, 1e-300),
        "invariance_residual_W2": res2 / max(scale, 1e-300),
        "basis_rank": int(np.linalg.matrix_rank(stacked)),
        "scaled_sym_min_eig": alpha,
    }


def _invariance_residual(A: np.ndarray, B: np.ndarray) -> float:
    """max over basis columns of |A w - proj_span(B)(A w)| / |w|."""
    q, _ = np.linalg.qr(B)
    worst = 0.0
    for j in range(B.shape[1]):
        w = B[:, j]
        Aw = A @ w
        r = Aw - q @ (q.T @ Aw)
        worst = max(worst, np.linalg.norm(r) / max(np.linalg.norm(w), 1e-300))
    return worst
