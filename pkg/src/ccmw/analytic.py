"""Closed-form CCMW values and the pure-state constraint geometry behind them.

Pure states with nonnegative moduli x_0..x_{d-1} have l1 coherence
(sum x)^2 - 1, so a fixed coherence C confines the moduli to the intersection
of the unit sphere with the plane sum x = sqrt(1 + C). Eliminating x_0 leaves
an ellipse-like quadric in (x_1, ..., x_{d-1}).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .hamiltonians import BatteryHamiltonian
from .states import check_coherence, l1_coherence, pure_from_polar


class NoClosedForm(ValueError):
    """Raised when no analytic CCMW expression covers a (Hamiltonian, dimension) pair."""


def xi2(C: float, h1: float, h3: float, h2: float) -> float:
    """Qubit CCMW |h1 - h3| sqrt(1 - C^2) + 2 h2 C for C in [0, 1]."""
    C = check_coherence(C, 2)
    if h2 < 0:
        raise ValueError("h2 must be nonnegative")
    return abs(h1 - h3) * sqrt(max(0.0, 1.0 - C * C)) + 2.0 * h2 * C


@dataclass(frozen=True)
class QubitOptimalPair:
    initial: np.ndarray
    final: np.ndarray
    delta: int
    theta: float


def optimal_qubit_pair(C: float, H: BatteryHamiltonian) -> QubitOptimalPair:
    """Optimal pure initial and final qubit states at coherence C.

    The initial state has populations ((1 + delta s)/2, (1 - delta s)/2) with
    s = sqrt(1 - C^2) and delta = sign(h1 - h3) (+1 on ties); the final state
    has them swapped. The coherence rho_01 of the initial state is
    (C/2) e^{-i theta}, aligned with the Hamiltonian phase, and the final
    state carries the opposite sign so the off-diagonal energy drops by
    2 h2 C. For h2 = 0 the phase is inert and both states share it.
    """
    if H.structure != "qubit-general" and H.dim != 2:
        raise ValueError("optimal_qubit_pair needs a qubit Hamiltonian")
    C = check_coherence(C, 2)
    op = H.operator
    h1, h3 = op[0, 0].real, op[1, 1].real
    h2 = abs(op[1, 0])
    theta = float(np.angle(op[1, 0])) % (2 * np.pi) if h2 > 0 else 0.0
    delta = 1 if h1 >= h3 else -1
    s = sqrt(max(0.0, 1.0 - C * C))
    big, small = (1 + s) / 2, C * C / (2 * (1 + s))  # small = (1 - s)/2 without cancellation
    hi, lo = (big, small) if delta > 0 else (small, big)
    psi_i = pure_from_polar([sqrt(hi), sqrt(lo)], [0.0, theta])
    final_phase = theta + np.pi if h2 > 0 else theta
    psi_f = pure_from_polar([sqrt(lo), sqrt(hi)], [0.0, final_phase % (2 * np.pi)])
    return QubitOptimalPair(psi_i, psi_f, delta, theta)


def _f3(C: float) -> float:
    return sqrt(1.0 + C) * sqrt(max(0.0, 1.0 - C / 3.0))


def xi3_diagonal(C: float) -> float:
    """Qutrit CCMW for levels (-1, 0, 1): sqrt((1 + f + C/3)(1 + f - C))."""
    C = check_coherence(C, 3)
    f = _f3(C)
    return sqrt(max(0.0, (1.0 + f + C / 3.0) * (1.0 + f - C)))


@dataclass(frozen=True)
class TangencyPoints:
    y0: float
    x_plus: float
    x_minus: float


def qutrit_tangency(C: float) -> TangencyPoints:
    """Farthest and nearest points of the scaled qutrit ellipse from the origin.

    Coordinates are x = sqrt(2) x_2 and y = x_1 (moduli weighted by the square
    root of their level gap above the ground state), so squared distance is
    the energy above the ground level.
    """
    C = check_coherence(C, 3)
    a, b = sqrt(1.0 + C), sqrt(max(0.0, 1.0 - C / 3.0))
    y0 = (a - b) / 2.0
    r = sqrt(max(0.0, (1.0 - C + a * b) / 4.0))
    mid = (a + b) / (2.0 * sqrt(2.0))
    return TangencyPoints(y0, mid + r, mid - r)


def scaled_ellipse_residual(C: float, x: float, y: float) -> float:
    """Scaled qutrit ellipse: x^2/2 + y^2 + xy/sqrt2 - sqrt(1+C)(x/sqrt2 + y) + C/2."""
    s2 = sqrt(2.0)
    return x * x / 2 + y * y + x * y / s2 - sqrt(1.0 + C) * (x / s2 + y) + C / 2


def tangency_normal_residual(C: float, x: float, y: float) -> float:
    """Collinearity of the ellipse normal with the radius vector: y F_x - x F_y."""
    s2 = sqrt(2.0)
    fx = x + y / s2 - sqrt((1.0 + C) / 2.0)
    fy = 2 * y + x / s2 - sqrt(1.0 + C)
    return y * fx - x * fy


def isocoherent_ellipse_residual(dim: int, C: float, point) -> float:
    """sum x_i^2 + sum_{i>j} x_i x_j - sqrt(1+C) sum x_i + C/2 over x_1..x_{d-1}.

    Zero exactly when x_0 = sqrt(1+C) - sum x_i completes a unit vector.
    """
    x = np.asarray(point, dtype=float)
    if dim < 2 or x.shape != (dim - 1,):
        raise ValueError(f"point must have length dim - 1 = {dim - 1}")
    sx = x.sum()
    cross = (sx * sx - np.dot(x, x)) / 2.0
    return float(np.dot(x, x) + cross - sqrt(1.0 + C) * sx + C / 2.0)


def qutrit_ellipse(C: float, n: int = 512) -> np.ndarray:
    """``n`` points (x_1, x_2) on the qutrit isocoherent ellipse.

    In u = (x1 + x2)/sqrt2, v = (x1 - x2)/sqrt2 the curve reads
    (3/2)(u - u0)^2 + v^2/2 = (2 - C)/6 with u0 = sqrt(2(1+C))/3, which
    collapses to the single point (1/sqrt3, 1/sqrt3) at C = 2.
    """
    C = check_coherence(C, 3)
    R = max(0.0, (2.0 - C) / 6.0)
    u0 = sqrt(2.0 * (1.0 + C)) / 3.0
    phi = 2 * np.pi * np.arange(n) / n
    u = u0 + sqrt(2 * R / 3) * np.cos(phi)
    v = sqrt(2 * R) * np.sin(phi)
    return np.stack([(u + v) / sqrt(2.0), (u - v) / sqrt(2.0)], axis=1)


def xi3_offdiagonal(C: float, alpha: float) -> float:
    """Piecewise qutrit CCMW for alpha1 J_x + alpha2 J_y, alpha = |alpha1 + i alpha2|."""
    C = check_coherence(C, 3)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if C <= 1.0:
        return 2.0 * alpha * C
    if C <= 5.0 / 3.0:
        return alpha * (C + 1.0)
    f = 2.0 / 9.0 * (sqrt(1.0 + C) - sqrt(max(0.0, 1.0 - C / 2.0))) ** 2
    return 2.0 * alpha * (C - f)


def pq_min_q(C: float) -> float:
    """Minimum q on the parabola q = (p - sqrt(1+C)/2)^2 + (C-1)/4 with p^2 >= 4q, q >= 0.

    Here p = x_0 + x_2 and q = x_0 x_2 for the outer moduli of a qutrit pure
    state with middle modulus x_1 = sqrt(1+C) - p. The vertex is admissible
    for 1 <= C <= 5/3; below that q = 0 is reachable and above it the minimum
    sits where the parabola meets p^2 = 4q, at p = (2/3)(sqrt(1+C) -
    sqrt(1 - C/2)).
    """
    C = check_coherence(C, 3)
    if C <= 1.0:
        return 0.0
    if C <= 5.0 / 3.0:
        return (C - 1.0) / 4.0
    p = 2.0 / 3.0 * (sqrt(1.0 + C) - sqrt(max(0.0, 1.0 - C / 2.0)))
    return p * p / 4.0


def max_coherence_scaling(d: int, alpha: float) -> float:
    """Pure-state CCMW at maximal coherence for the off-diagonal family: 4 alpha (1 - 1/d)."""
    if d < 2 or alpha <= 0:
        raise ValueError("need d >= 2 and alpha > 0")
    return 4.0 * alpha * (1.0 - 1.0 / d)


def _is_jz3_multiple(H: BatteryHamiltonian) -> float | None:
    """Scale factor s when H = s jz(3) + c I with s > 0, else None."""
    if H.dim != 3 or H.structure not in ("diagonal", "custom-diagonal"):
        return None
    e = H.levels
    s = (e[2] - e[0]) / 2.0
    if s <= 0 or abs((e[1] - e[0]) - s) > 1e-12 * max(1.0, s):
        return None
    return s


def analytic_ccmw(H: BatteryHamiltonian, C: float) -> float:
    """Closed-form CCMW where one is available; raises NoClosedForm otherwise.

    Covered: any qubit Hamiltonian, qutrit diagonals with equal ascending
    gaps (a positive multiple of jz(3) plus a constant), and the qutrit
    off-diagonal family.
    """
    d = H.dim
    if d == 2:
        op = H.operator
        return xi2(C, op[0, 0].real, op[1, 1].real, abs(op[1, 0]))
    if d == 3:
        s = _is_jz3_multiple(H)
        if s is not None:
            return s * xi3_diagonal(C)
        if H.structure == "off-diagonal":
            return xi3_offdiagonal(C, H.params["alpha"])
    kind = {"diagonal": "diagonal", "custom-diagonal": "diagonal"}.get(H.structure, H.structure)
    raise NoClosedForm(f"no closed form for d={d} {kind}")


def pure_state_coherence(moduli) -> float:
    """(sum x)^2 - 1 for nonnegative unit-norm moduli; matches l1_coherence of the state."""
    x = np.asarray(moduli, dtype=float)
    return float(x.sum() ** 2 - 1.0)


def _check_pair(pair: QubitOptimalPair) -> float:
    # internal helper for sanity checks in tests
    return abs(l1_coherence(np.outer(pair.initial, pair.initial.conj()))
               - l1_coherence(np.outer(pair.final, pair.final.conj())))
