import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccmw._kernels import repair_state
from ccmw.analytic import NoClosedForm, xi2, xi3_diagonal
from ccmw.hamiltonians import j_mixed, j_offdiagonal, jz, qubit_hamiltonian
from ccmw.isres import OptimizerConfig
from ccmw.numerics import gellmann_generators, unitary_from_parameters
from ccmw.optimizer import (ccmw_mixed, ccmw_pure, default_config, mixed_problem, project_moduli,
                            verify_against_analytic)
from ccmw.passivity import ergotropy
from ccmw.states import energy, l1_coherence, max_coherence

FAST = OptimizerConfig(population=100, max_evaluations=60000, restarts=1)
PURE = OptimizerConfig(population=60, max_evaluations=40000, restarts=2)


def spectrum(r):
    return np.linalg.eigvalsh(r)


def test_default_config_budgets():
    assert default_config(3).max_evaluations == 200_000
    assert default_config(5).max_evaluations == 500_000
    assert default_config(4, seed=7, restarts=2).seed == 7
    assert default_config(2).restarts == 8 and default_config(2).population is None


def test_mixed_qubit_sigma_z_zero_coherence():
    est = ccmw_mixed(qubit_hamiltonian(1, -1, 0, 0), 2, 0.0, FAST)
    assert abs(est.value - 2) < 1e-3
    assert est.feasible and est.mode == "mixed"


def test_mixed_witness_invariants():
    H = qubit_hamiltonian(0.3, -0.6, 0.8, 2.2)
    est = ccmw_mixed(H, 2, 0.55, FAST)
    assert abs(est.value - xi2(0.55, 0.3, -0.6, 0.8)) < 1e-3
    assert est.constraint_violation <= 1e-6
    assert np.max(np.abs(spectrum(est.witness_initial) - spectrum(est.witness_final))) < 1e-6
    assert est.value <= ergotropy(est.witness_initial, H) + 1e-9


@pytest.mark.parametrize("C,want,tol", [(1.0, xi3_diagonal(1.0), 2e-3), (2.0, 0.0, 1e-3)])
def test_mixed_qutrit_jz(C, want, tol):
    est = ccmw_mixed(jz(3), 3, C, OptimizerConfig(population=150, max_evaluations=60000, restarts=1))
    assert abs(est.value - want) < tol
    assert est.feasible


def test_pure_examples():
    assert abs(ccmw_pure(j_offdiagonal(3, 1, 0), 3, 1.0, PURE).value - 2) < 2e-3
    assert abs(ccmw_pure(jz(4), 4, 0.0, PURE).value - 2) < 1e-3
    est = ccmw_pure(j_mixed(4, 1, 0, 1), 4, 3.0, PURE)
    assert abs(est.value - 3) < 2e-3
    assert est.mode == "pure" and est.feasible
    assert abs(np.trace(est.witness_initial @ est.witness_initial).real - 1) < 1e-12


def test_pure_value_is_recomputed_from_witnesses():
    H = jz(3)
    est = ccmw_pure(H, 3, 0.7, PURE)
    assert est.value == energy(est.witness_initial, H.operator) - energy(est.witness_final, H.operator)
    assert abs(l1_coherence(est.witness_final) - 0.7) < 1e-9


def test_mixed_problem_layout():
    prob, decode = mixed_problem(jz(3), 3, 1.0)
    assert prob.num_params == 3 + 2 * 9
    assert np.all(prob.upper[3:] == 2 * np.pi) and np.all(prob.upper[:3] == 1)
    with pytest.raises(ValueError):
        mixed_problem(jz(3), 3, 2.5)
    with pytest.raises(ValueError):
        mixed_problem(jz(3), 4, 1.0)


def test_mixed_decode_at_max_and_zero_coherence():
    rng = np.random.default_rng(0)
    _, decode = mixed_problem(jz(3), 3, 2.0)
    rin, rf = decode(rng.uniform(0, 1, (5, 21)) * np.r_[np.ones(3), np.full(18, 2 * np.pi)])
    for r in np.concatenate([rin, rf]):
        assert abs(l1_coherence(r) - 2) < 1e-12 and abs(np.trace(r @ r).real - 1) < 1e-12
    _, decode = mixed_problem(jz(3), 3, 0.0)
    rin, _ = decode(rng.uniform(0, 1, (5, 21)))
    for r in rin:
        assert l1_coherence(r) < 1e-15


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_repair_keeps_spectrum_and_hits_level_set(d, seed, frac):
    rng = np.random.default_rng(seed)
    g = gellmann_generators(d)
    U = unitary_from_parameters(g, rng.uniform(-np.pi, np.pi, d * d))
    w = rng.dirichlet(np.ones(d))
    C = frac * max_coherence(d)
    out = np.empty((d, d), np.complex128)
    repair_state(U, w, C, max_coherence(d), out)
    c0 = l1_coherence((U * w) @ U.conj().T)
    if c0 >= C or frac == 1.0:
        assert abs(l1_coherence(out) - C) < 1e-10
        if frac < 1.0:
            assert np.allclose(np.sort(spectrum(out)), np.sort(w), atol=1e-10)
    else:
        assert abs(l1_coherence(out) - c0) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_project_moduli(d, seed, frac):
    rng = np.random.default_rng(seed)
    x = np.abs(rng.normal(size=(8, d)))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    C = frac * (d - 1)
    y = project_moduli(x, C)
    assert np.all(y >= -1e-15)
    assert np.allclose(np.linalg.norm(y, axis=1), 1, atol=1e-12)
    assert np.max(np.abs(y.sum(1) ** 2 - 1 - C)) < 1e-9


def test_estimator_determinism():
    a = ccmw_pure(jz(3), 3, 1.2, PURE)
    b = ccmw_pure(jz(3), 3, 1.2, PURE)
    assert a.value == b.value
    assert a.witness_initial.tobytes() == b.witness_initial.tobytes()


def test_verify_against_analytic_qubit():
    rows = verify_against_analytic(qubit_hamiltonian(1, -1, 0, 0), 2, np.linspace(0, 1, 5), PURE)
    assert len(rows) == 5
    assert max(abs(r[3]) for r in rows) < 1e-3


def test_verify_raises_before_optimizing():
    with pytest.raises(NoClosedForm, match="d=5 diagonal"):
        verify_against_analytic(jz(5), 5, [0.0, 1.0], OptimizerConfig(max_evaluations=1))
