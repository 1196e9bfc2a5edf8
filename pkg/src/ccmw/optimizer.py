"""Numerical CCMW: maximize Tr[(rho_in - rho_f) H] over states of equal coherence.

Two formulations are provided.

Mixed (``ccmw_mixed``): both states share the spectrum w / sum(w) and are
rotated by U = exp(i sum_j theta_j T_j), with generator coefficients centred
on zero (theta_j - pi) so the box of angles covers a full ball around the
identity. Each decoded state is moved inside its unitary orbit onto the
level set of coherence C before evaluation; see ``_kernels.repair_state``.

Pure (``ccmw_pure``): amplitudes x_k exp(i phi_k) with phi_0 = 0. The moduli
are normalized and then slid along a straight line towards the uniform
vector (to raise coherence) or the largest basis vector (to lower it) until
(sum x)^2 - 1 = C holds exactly.

In both cases the coherence residuals are still reported to the optimizer
as equality constraints, so anything the repair cannot fix is ranked as
infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .analytic import analytic_ccmw
from .hamiltonians import BatteryHamiltonian
from .isres import OptimizationProblem, OptimizationResult, OptimizerConfig, isres_minimize
from .numerics import gellmann_generators
from .states import check_coherence, energy, l1_coherence, max_coherence, validate_density

DEFAULT_TOLERANCE = 1e-6


def default_config(d: int, seed: int = 0, **overrides) -> OptimizerConfig:
    """Population 20 n, 200k evaluations for d <= 4 and 500k above, 8 restarts."""
    cfg = OptimizerConfig(max_evaluations=200_000 if d <= 4 else 500_000, seed=seed, restarts=8)
    return replace(cfg, **overrides)


@dataclass
class CcmwEstimate:
    dimension: int
    coherence: float
    hamiltonian: BatteryHamiltonian
    value: float
    witness_initial: np.ndarray
    witness_final: np.ndarray
    mode: str
    result: OptimizationResult

    @property
    def constraint_violation(self) -> float:
        return max(abs(l1_coherence(self.witness_initial) - self.coherence),
                   abs(l1_coherence(self.witness_final) - self.coherence))

    @property
    def feasible(self) -> bool:
        return self.constraint_violation <= DEFAULT_TOLERANCE


def _operator(H) -> np.ndarray:
    return H.operator if isinstance(H, BatteryHamiltonian) else np.asarray(H, dtype=np.complex128)


def _setup(H, d: int, C: float):
    op = _operator(H)
    if op.shape != (d, d):
        raise ValueError(f"Hamiltonian has shape {op.shape}, expected ({d}, {d})")
    C = check_coherence(C, d)
    return op, C


# mixed states ---------------------------------------------------------------

def mixed_problem(H, d: int, C: float, tolerance: float = DEFAULT_TOLERANCE):
    """Build the mixed-state problem and a decoder from parameters to (rho_in, rho_f).

    Parameter layout: d eigen-weights in [0, 1], then d^2 generator angles in
    [0, 2 pi) for U_in and d^2 for U_f.
    """
    op, C = _setup(H, d, C)
    op = np.ascontiguousarray(op, dtype=np.complex128)
    gens = gellmann_generators(d)
    cmax = max_coherence(d)
    m = d * d

    def decode(X):
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
        rin = np.empty((X.shape[0], d, d), np.complex128)
        rf = np.empty_like(rin)
        _kernels.mixed_states(X, gens, C, cmax, rin, rf)
        return rin, rf

    def batch(X):
        f = np.empty(X.shape[0])
        h = np.empty((X.shape[0], 2))
        _kernels.mixed_objective(np.ascontiguousarray(X, dtype=float), gens, op, C, cmax, f, h)
        return f, h

    lower = np.zeros(d + 2 * m)
    upper = np.concatenate([np.ones(d), np.full(2 * m, 2 * np.pi)])
    return OptimizationProblem(lower, upper, constraint_tolerance=tolerance, batch=batch), decode


# pure states ----------------------------------------------------------------

def project_moduli(x: np.ndarray, C: float) -> np.ndarray:
    """Move unit-norm nonnegative rows of ``x`` onto (sum x)^2 - 1 = C.

    Each row travels along the segment towards the uniform vector when its
    coherence is too low and towards its largest basis vector when too high;
    the crossing point solves a quadratic in the segment parameter and is
    renormalized, which keeps sum x fixed relative to the norm.
    """
    P, d = x.shape
    low = x.sum(axis=1) ** 2 - 1.0 < C
    target = np.zeros_like(x)
    target[np.arange(P), x.argmax(axis=1)] = 1.0
    target[low] = 1.0 / np.sqrt(d)
    dv = target - x
    # (sum(x + t dv))^2 = (1 + C) |x + t dv|^2
    a0, a1 = x.sum(1), dv.sum(1)
    q0, q1, q2 = (x * x).sum(1), (x * dv).sum(1), (dv * dv).sum(1)
    k = 1.0 + C
    A = a1 * a1 - k * q2
    B = 2.0 * (a0 * a1 - k * q1)
    Cc = a0 * a0 - k * q0
    disc = np.sqrt(np.maximum(B * B - 4.0 * A * Cc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        qq = -0.5 * (B + np.copysign(disc, B))
        roots = np.stack([qq / A, Cc / qq], axis=1)
    ok = np.isfinite(roots) & (roots >= -1e-12) & (roots <= 1.0 + 1e-12)
    roots = np.where(ok, roots, np.inf)
    t = roots.min(axis=1)
    t = np.where(np.isfinite(t), np.clip(t, 0.0, 1.0), 0.0)
    y = x + t[:, None] * dv
    return y / np.linalg.norm(y, axis=1, keepdims=True)


def pure_problem(H, d: int, C: float, tolerance: float = DEFAULT_TOLERANCE):
    """Build the pure-state problem and a decoder from parameters to (psi_in, psi_f).

    Parameter layout per state: d moduli in [0, 1] then d - 1 phases in
    [0, 2 pi); the initial state's block comes first.
    """
    op, C = _setup(H, d, C)
    block = 2 * d - 1

    def amplitudes(X, s):
        mod = X[:, s * block: s * block + d]
        ph = X[:, s * block + d:(s + 1) * block]
        nrm = np.linalg.norm(mod, axis=1, keepdims=True)
        unit = np.where(nrm > 0, mod / np.where(nrm > 0, nrm, 1.0), np.eye(d)[0])
        x = project_moduli(unit, C)
        psi = x.astype(np.complex128)
        psi[:, 1:] *= np.exp(1j * ph)
        return x, psi

    def decode(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return amplitudes(X, 0), amplitudes(X, 1)

    def batch(X):
        (xi, pi), (xf, pf) = decode(X)
        ei = np.einsum("pi,ij,pj->p", pi.conj(), op, pi).real
        ef = np.einsum("pi,ij,pj->p", pf.conj(), op, pf).real
        h = np.stack([xi.sum(1) ** 2 - 1.0 - C, xf.sum(1) ** 2 - 1.0 - C], axis=1)
        return ef - ei, h

    lower = np.zeros(2 * block)
    upper = np.ones(2 * block)
    for s in range(2):
        upper[s * block + d:(s + 1) * block] = 2 * np.pi
    return OptimizationProblem(lower, upper, constraint_tolerance=tolerance, batch=batch), decode


# drivers --------------------------------------------------------------------

def _as_hamiltonian(H, d) -> BatteryHamiltonian:
    if isinstance(H, BatteryHamiltonian):
        return H
    from .hamiltonians import custom_diagonal
    op = np.asarray(H, dtype=np.complex128)
    if np.allclose(op, np.diag(np.diag(op)), atol=1e-12):
        return custom_diagonal(np.diag(op).real)
    return BatteryHamiltonian(op, "mixed" if d > 2 else "qubit-general", {}, name="matrix")


def ccmw_mixed(H, d: int, C: float, config: OptimizerConfig | None = None) -> CcmwEstimate:
    """CCMW over mixed states sharing a spectrum, maximized by ISRES with restarts."""
    Hb = _as_hamiltonian(H, d)
    config = config or default_config(d)
    problem, decode = mixed_problem(Hb, d, C)
    res = isres_minimize(problem, config)
    rin, rf = decode(res.best_params)
    rin, rf = validate_density(rin[0]), validate_density(rf[0])
    value = energy(rin, Hb.operator) - energy(rf, Hb.operator)
    return CcmwEstimate(d, float(C), Hb, value, rin, rf, "mixed", res)


def ccmw_pure(H, d: int, C: float, config: OptimizerConfig | None = None) -> CcmwEstimate:
    """CCMW over pure initial and final states, maximized by ISRES with restarts."""
    Hb = _as_hamiltonian(H, d)
    config = config or default_config(d)
    problem, decode = pure_problem(Hb, d, C)
    res = isres_minimize(problem, config)
    (_, psi_i), (_, psi_f) = decode(res.best_params)
    rin = np.outer(psi_i[0], psi_i[0].conj())
    rf = np.outer(psi_f[0], psi_f[0].conj())
    value = energy(rin, Hb.operator) - energy(rf, Hb.operator)
    return CcmwEstimate(d, float(C), Hb, value, rin, rf, "pure", res)


def verify_against_analytic(H: BatteryHamiltonian, d: int, coherence_grid,
                            config: OptimizerConfig | None = None, mode: str = "pure"):
    """Rows (C, analytic, numeric, numeric - analytic) over ``coherence_grid``.

    Raises ``NoClosedForm`` before any optimization if the pair is not covered.
    """
    grid = [float(c) for c in coherence_grid]
    if H.dim != d:
        raise ValueError("Hamiltonian dimension does not match d")
    analytic = [analytic_ccmw(H, c) for c in grid]
    solver = {"pure": ccmw_pure, "mixed": ccmw_mixed}[mode]
    rows = []
    for c, a in zip(grid, analytic):
        est = solver(H, d, c, config)
        rows.append((c, a, est.value, est.value - a))
    return rows
