"""Small dense complex linear algebra: generator bases, eigendecomposition, unitaries.

Generator order used everywhere in the package (and therefore the meaning of
each entry of a parameter vector theta):

    T_0            identity
    T_1 ...        symmetric pairs   |i><j| + |j><i|      for i < j, lexicographic
    ...            antisymmetric     -i|i><j| + i|j><i|   for i < j, lexicographic
    ... T_{d^2-1}  diagonal ladder   sqrt(2/(k(k+1))) (sum_{i<k} |i><i| - k|k><k|), k = 1..d-1
"""

from __future__ import annotations

import numpy as np

from ._kernels import jacobi_eigh

MAX_DIM = 8
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


def as_square(matrix) -> np.ndarray:
    """Return ``matrix`` as a finite square complex array or raise ValueError."""
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def is_hermitian(matrix, tol: float = HERMITIAN_TOL) -> bool:
    a = as_square(matrix)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def is_unitary(matrix, tol: float = UNITARY_TOL) -> bool:
    a = as_square(matrix)
    return bool(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))) <= tol)


def gellmann_generators(dim: int) -> np.ndarray:
    """Identity followed by the dim^2 - 1 generalized Gell-Mann matrices.

    Returns an array of shape (dim^2, dim, dim) in the order given in the
    module docstring. For dim=2 this is (I, sigma_x, sigma_y, sigma_z).
    """
    if not isinstance(dim, (int, np.integer)) or not 2 <= dim <= MAX_DIM:
        raise ValueError(f"dimension must be an integer in [2, {MAX_DIM}], got {dim!r}")
    gens = [np.eye(dim, dtype=np.complex128)]
    pairs = [(i, j) for i in range(dim) for j in range(i + 1, dim)]
    for i, j in pairs:
        g = np.zeros((dim, dim), dtype=np.complex128)
        g[i, j] = g[j, i] = 1.0
        gens.append(g)
    for i, j in pairs:
        g = np.zeros((dim, dim), dtype=np.complex128)
        g[i, j] = -1j
        g[j, i] = 1j
        gens.append(g)
    for k in range(1, dim):
        g = np.zeros((dim, dim), dtype=np.complex128)
        g[range(k), range(k)] = 1.0
        g[k, k] = -k
        gens.append(np.sqrt(2.0 / (k * (k + 1))) * g)
    return np.array(gens)


def eigendecompose(op) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvector unitary of a Hermitian matrix.

    Uses a cyclic complex Jacobi sweep with a 1e-14 threshold on the
    off-diagonal norm.
    """
    a = as_square(op)
    if not is_hermitian(a):
        raise ValueError("eigendecompose requires a Hermitian matrix")
    return jacobi_eigh(0.5 * (a + a.conj().T))


def exp_i_hermitian(op, t: float = 1.0) -> np.ndarray:
    """exp(i t op) for Hermitian ``op`` via its eigendecomposition."""
    lam, v = eigendecompose(op)
    return (v * np.exp(1j * t * lam)) @ v.conj().T


def unitary_from_parameters(gens: np.ndarray, theta) -> np.ndarray:
    """exp(i sum_j theta_j T_j) for a generator stack from ``gellmann_generators``."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (gens.shape[0],):
        raise ValueError(f"expected {gens.shape[0]} parameters, got shape {theta.shape}")
    return exp_i_hermitian(np.tensordot(theta, gens, axes=1))
