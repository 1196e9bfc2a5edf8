"""Ergotropy, permutation-phase unitaries and isocoherent passivity."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial

import numpy as np

from .hamiltonians import BatteryHamiltonian
from .numerics import as_square, eigendecompose

TIE_TOL = 1e-12
MAX_BRUTEFORCE_DIM = 6


def _op(H) -> np.ndarray:
    return H.operator if isinstance(H, BatteryHamiltonian) else as_square(H)


def ergotropy(rho, H) -> float:
    """Tr[rho H] minus the energy of the passive state with the same spectrum."""
    rho, h = as_square(rho), _op(H)
    if rho.shape != h.shape:
        raise ValueError(f"dimension mismatch: state {rho.shape}, Hamiltonian {h.shape}")
    s, _ = eigendecompose(rho)
    eps, _ = eigendecompose(h)
    passive = float(np.dot(s[::-1], eps))
    return max(0.0, float(np.einsum("ij,ji->", rho, h).real) - passive)


@dataclass(frozen=True)
class PermPhaseUnitary:
    """sum_i exp(i omega_i) |p(i)><i|."""

    permutation: tuple
    phases: tuple

    def __post_init__(self):
        perm = tuple(int(i) for i in self.permutation)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"{self.permutation} is not a permutation of 0..{len(perm) - 1}")
        if len(self.phases) != len(perm):
            raise ValueError("need one phase per basis state")
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "phases", tuple(float(w) for w in self.phases))

    @property
    def dim(self) -> int:
        return len(self.permutation)

    @property
    def matrix(self) -> np.ndarray:
        u = np.zeros((self.dim, self.dim), dtype=np.complex128)
        u[list(self.permutation), range(self.dim)] = np.exp(1j * np.asarray(self.phases))
        return u

    def apply(self, rho) -> np.ndarray:
        u = self.matrix
        return u @ np.asarray(rho) @ u.conj().T


def perm_phase_unitary(permutation, phases=None) -> PermPhaseUnitary:
    if phases is None:
        phases = np.zeros(len(permutation))
    return PermPhaseUnitary(tuple(permutation), tuple(phases))


def _diagonal_levels(H) -> np.ndarray:
    h = _op(H)
    if np.max(np.abs(h - np.diag(np.diag(h)))) > 1e-12:
        raise ValueError("isocoherent passivity needs a Hamiltonian diagonal in the coherence basis")
    return np.diag(h).real


def is_isocoherent_passive(rho, H) -> bool:
    """True when populations never increase with energy: eps_i < eps_j implies p_i >= p_j."""
    eps = _diagonal_levels(H)
    p = np.diag(as_square(rho)).real
    if p.size != eps.size:
        raise ValueError("state and Hamiltonian dimensions differ")
    lower = eps[:, None] < eps[None, :]
    return not bool(np.any(lower & (p[:, None] < p[None, :] - TIE_TOL)))


def passivity_bruteforce(rho, H) -> tuple[bool, float]:
    """Largest energy drop over all permutation-phase unitaries, by enumeration.

    For a diagonal Hamiltonian the phases drop out of the energy, so only the
    d! permutations are enumerated. Returns (gain <= 1e-12, gain).
    """
    eps = _diagonal_levels(H)
    rho = as_square(rho)
    d = eps.size
    if rho.shape[0] != d:
        raise ValueError("state and Hamiltonian dimensions differ")
    if d > MAX_BRUTEFORCE_DIM:
        raise ValueError(f"brute force limited to d <= {MAX_BRUTEFORCE_DIM} ({factorial(d)} permutations)")
    p = np.diag(rho).real
    e0 = float(np.dot(p, eps))
    best, best_perm = np.inf, None
    for perm in itertools.permutations(range(d)):
        # population p_i moves to level perm[i]
        e = float(np.dot(p, eps[list(perm)]))
        if e < best:
            best, best_perm = e, perm
    # phases of the unitary leave a diagonal Hamiltonian's energy untouched
    u = perm_phase_unitary(best_perm, 0.7 * np.arange(1, d + 1))
    e_phased = float(np.einsum("ij,ji->", u.apply(rho), np.diag(eps)).real)
    assert abs(e_phased - best) <= 1e-10 * max(1.0, abs(best)), "phase-dependent energy"
    gain = e0 - best
    return gain <= TIE_TOL, gain
