"""Battery states in the coherence basis, l1 coherence and energies."""

from __future__ import annotations

import logging

import numpy as np

from .numerics import as_square, eigendecompose, is_hermitian, is_unitary

log = logging.getLogger(__name__)

TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-8


def max_coherence(dim: int) -> float:
    """Largest l1 coherence of a dim-level state (the uniform pure state)."""
    return float(dim - 1)


def scaled_coherence(value: float, dim: int) -> float:
    return value / max_coherence(dim)


def check_coherence(value: float, dim: int, tol: float = 1e-12) -> float:
    """Validate that ``value`` lies in [0, dim - 1] and return it as a float."""
    value = float(value)
    if not np.isfinite(value) or value < -tol or value > max_coherence(dim) + tol:
        raise ValueError(f"coherence {value} outside admissible range [0, {dim - 1}]")
    return min(max(value, 0.0), max_coherence(dim))


def validate_density(rho, clamp: bool = True) -> np.ndarray:
    """Check trace, Hermiticity and positivity of ``rho``.

    Eigenvalues in [-1e-10, 0) are clamped to zero and the state renormalized;
    the clamp is logged. Anything more negative raises ValueError.
    """
    rho = as_square(rho)
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix trace {np.trace(rho).real} != 1")
    lam, v = eigendecompose(rho)
    if lam[0] < -PSD_TOL:
        raise ValueError(f"density matrix has eigenvalue {lam[0]:.3e} < 0")
    if clamp and lam[0] < 0:
        log.info("clamping eigenvalue %.3e of density matrix to zero", lam[0])
        lam = np.clip(lam, 0.0, None)
        lam /= lam.sum()
        rho = (v * lam) @ v.conj().T
    return rho


def l1_coherence(rho) -> float:
    """Sum of |rho_ij| over all i != j."""
    rho = np.asarray(rho)
    return float(np.abs(rho).sum() - np.abs(np.diagonal(rho)).sum())


def energy(rho, H) -> float:
    """Tr[rho H]."""
    rho = np.asarray(rho)
    H = np.asarray(H)
    if rho.shape != H.shape:
        raise ValueError(f"dimension mismatch: state {rho.shape}, Hamiltonian {H.shape}")
    e = np.einsum("ij,ji->", rho, H)
    if abs(e.imag) > 1e-10 * max(1.0, abs(e.real)):
        raise ValueError("Tr[rho H] has a non-negligible imaginary part")
    return float(e.real)


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.einsum("ij,ji->", rho, rho).real)


def pure_from_polar(moduli, phases) -> np.ndarray:
    """Amplitude vector x_k exp(i phase_k) with the first nonzero entry made real.

    ``phases`` may have length d (only differences to the gauge entry matter)
    or d - 1 (phases of the entries after the first).
    """
    x = np.asarray(moduli, dtype=float)
    ph = np.asarray(phases, dtype=float)
    if np.any(x < 0):
        raise ValueError("moduli must be nonnegative")
    if abs(np.sum(x * x) - 1.0) > NORM_TOL:
        raise ValueError(f"moduli have squared norm {np.sum(x * x)}, expected 1")
    if ph.size == x.size - 1:
        ph = np.concatenate([[0.0], ph])
    if ph.size != x.size:
        raise ValueError("phase vector length must be d or d - 1")
    nz = np.flatnonzero(x > 0)
    if nz.size:
        ph = ph - ph[nz[0]]
    return x * np.exp(1j * ph)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    return np.outer(psi, psi.conj())


def density_from_spectrum(weights, U) -> np.ndarray:
    """U diag(w / sum w) U^dagger."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not np.any(w > 0):
        raise ValueError("weights must be nonnegative with at least one positive entry")
    U = as_square(U)
    if U.shape[0] != w.size:
        raise ValueError("weights and unitary dimensions differ")
    if not is_unitary(U):
        raise ValueError("U is not unitary")
    w = w / w.sum()
    return (U * w) @ U.conj().T
