from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccmw.analytic import (NoClosedForm, _check_pair, analytic_ccmw, isocoherent_ellipse_residual,
                           max_coherence_scaling, optimal_qubit_pair, pq_min_q, qutrit_ellipse,
                           qutrit_tangency, scaled_ellipse_residual, tangency_normal_residual, xi2,
                           xi3_diagonal, xi3_offdiagonal)
from ccmw.hamiltonians import custom_diagonal, j_offdiagonal, jx, jz, qubit_hamiltonian
from ccmw.states import energy, l1_coherence


# independent oracles ---------------------------------------------------------

def qubit_grid_oracle(C, H, n=721):
    """max - min energy over pure qubit states of coherence C, by a phase grid."""
    s = sqrt(max(0.0, 1 - C * C))
    phases = np.linspace(0, 2 * np.pi, n)
    energies = []
    for p0 in ((1 + s) / 2, (1 - s) / 2):
        psi = np.stack([np.full(n, sqrt(p0)), sqrt(1 - p0) * np.exp(1j * phases)], axis=1)
        energies.append(np.einsum("pi,ij,pj->p", psi.conj(), H, psi).real)
    e = np.concatenate(energies)
    return e.max() - e.min()


def qutrit_moduli(C, n=200001):
    """All nonnegative (x0, x1, x2) with unit norm and sum sqrt(1+C), parameterized by x1."""
    s = sqrt(1 + C)
    # include the x1 where x0 = x2, the edge of the feasible range (the whole set at C = 2)
    edge = (s + np.array([-1, 1]) * sqrt(max(0.0, 6 - 2 * s * s))) / 3
    x1 = np.concatenate([np.linspace(0, 1, n), edge[(edge >= 0) & (edge <= 1)]])
    p = s - x1
    r = 1 - x1 ** 2
    disc = 2 * r - p ** 2
    ok = (p >= 0) & (disc >= -1e-12)
    x1, p, disc = x1[ok], p[ok], np.sqrt(np.maximum(disc[ok], 0.0))
    a, b = (p + disc) / 2, (p - disc) / 2
    keep = b >= 0
    return x1[keep], a[keep], b[keep]


def xi3_diagonal_oracle(C):
    x1, a, b = qutrit_moduli(C)
    # energy -x0^2 + x2^2; both assignments of the roots to x0, x2
    e = np.concatenate([b ** 2 - a ** 2, a ** 2 - b ** 2])
    return e.max() - e.min()


def xi3_offdiagonal_oracle(C, alpha):
    # phases pick +/- x1 (x0 + x2) for alpha J_x, so the gap is 4 alpha max x1 (x0 + x2)
    x1, a, b = qutrit_moduli(C)
    return 4 * alpha * np.max(x1 * (a + b))


# qubit ---------------------------------------------------------------------

def test_xi2_examples():
    assert xi2(0, 1, -1, 0) == 2.0
    assert xi2(0.5, 0, 0, 1) == pytest.approx(1.0)
    assert xi2(0.6, 2, 0, 1) == pytest.approx(2.8)
    with pytest.raises(ValueError):
        xi2(1.1, 1, 0, 0)


def test_xi2_matches_phase_grid_oracle():
    H = qubit_hamiltonian(2, 0, 1, 0).operator
    assert qubit_grid_oracle(0.6, H) == pytest.approx(2.8, abs=1e-4)
    rng = np.random.default_rng(5)
    for _ in range(20):
        h1, h3 = rng.uniform(-1, 1, 2)
        h2, th, C = rng.uniform(0, 1), rng.uniform(0, 2 * np.pi), rng.uniform(0, 1)
        H = qubit_hamiltonian(h1, h3, h2, th).operator
        assert abs(xi2(C, h1, h3, h2) - qubit_grid_oracle(C, H, 4001)) < 1e-5


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 2), st.floats(0, 7))
def test_optimal_pair_reaches_xi2(C, h1, h3, h2, theta):
    H = qubit_hamiltonian(h1, h3, h2, theta)
    pair = optimal_qubit_pair(C, H)
    gap = energy(np.outer(pair.initial, pair.initial.conj()), H.operator) \
        - energy(np.outer(pair.final, pair.final.conj()), H.operator)
    assert abs(gap - xi2(C, h1, h3, h2)) < 1e-10
    assert _check_pair(pair) < 1e-10
    assert abs(l1_coherence(np.outer(pair.initial, pair.initial.conj())) - C) < 1e-10
    assert np.allclose(np.abs(pair.initial), np.abs(pair.final)[::-1])


def test_optimal_pair_examples():
    sz = qubit_hamiltonian(1, -1, 0, 0)
    p = optimal_qubit_pair(0, sz)
    assert np.allclose(p.initial, [1, 0]) and np.allclose(p.final, [0, 1]) and p.delta == 1
    p = optimal_qubit_pair(1, sz)
    assert np.allclose(p.initial, p.final)
    assert np.allclose(np.abs(p.initial), [1 / sqrt(2)] * 2)
    assert optimal_qubit_pair(0.3, qubit_hamiltonian(-1, 1, 0, 0)).delta == -1
    assert optimal_qubit_pair(0.3, qubit_hamiltonian(0.5, 0.5, 1, 0)).delta == 1


# qutrit diagonal ----------------------------------------------------------

def test_xi3_diagonal_examples():
    assert xi3_diagonal(0) == pytest.approx(2.0, abs=1e-15)
    assert xi3_diagonal(2) == pytest.approx(0.0, abs=1e-15)
    assert xi3_diagonal(1) == pytest.approx(1.69499, abs=1e-4)  # quoted to 5 digits
    assert xi3_diagonal(1) == pytest.approx(sqrt((1 + sqrt(4 / 3) + 1 / 3) * sqrt(4 / 3)), abs=1e-14)


@pytest.mark.parametrize("C", np.linspace(0, 2, 11))
def test_xi3_diagonal_matches_ellipse_grid(C):
    assert abs(xi3_diagonal(C) - xi3_diagonal_oracle(C)) < 1e-4


def test_xi3_diagonal_is_decreasing():
    v = [xi3_diagonal(c) for c in np.linspace(0, 2, 201)]
    assert np.all(np.diff(v) <= 1e-15)


def test_tangency_examples():
    t = qutrit_tangency(0)
    assert t.y0 == pytest.approx(0, abs=1e-15)
    assert t.x_plus == pytest.approx(sqrt(2)) and t.x_minus == pytest.approx(0, abs=1e-15)
    assert t.x_plus ** 2 - t.x_minus ** 2 == pytest.approx(2)
    t = qutrit_tangency(2)
    assert t.x_plus == pytest.approx(t.x_minus, abs=1e-7)
    assert qutrit_tangency(1).y0 == pytest.approx((sqrt(2) - sqrt(2 / 3)) / 2, abs=1e-14)
    assert qutrit_tangency(1).y0 == pytest.approx(0.29886, abs=1e-5)


@pytest.mark.parametrize("C", np.linspace(0, 2, 21))
def test_tangency_points_lie_on_ellipse_with_radial_normal(C):
    t = qutrit_tangency(C)
    for x in (t.x_plus, t.x_minus):
        assert abs(scaled_ellipse_residual(C, x, t.y0)) < 1e-9
        assert abs(tangency_normal_residual(C, x, t.y0)) < 1e-9
    assert abs((t.x_plus ** 2 - t.x_minus ** 2) - xi3_diagonal(C)) < 1e-10


# ellipse ------------------------------------------------------------------

def test_ellipse_residual_examples():
    assert isocoherent_ellipse_residual(3, 0, (0, 0)) == pytest.approx(0, abs=1e-15)
    assert isocoherent_ellipse_residual(3, 2, (1 / sqrt(3), 1 / sqrt(3))) == pytest.approx(0, abs=1e-14)
    assert abs(isocoherent_ellipse_residual(3, 1, (0.9, 0.9))) > 0.1
    with pytest.raises(ValueError):
        isocoherent_ellipse_residual(3, 1, (0.1,))


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8), st.lists(st.floats(0, 1), min_size=8, max_size=8))
def test_ellipse_residual_vanishes_on_pure_states(d, raw):
    x = np.array(raw[:d]) + 1e-3
    x /= np.linalg.norm(x)
    C = x.sum() ** 2 - 1
    assert abs(isocoherent_ellipse_residual(d, C, x[1:])) < 1e-12


@pytest.mark.parametrize("C", [0, 0.5, 1.0, 1.5, 1.9, 2.0])
def test_qutrit_ellipse_points(C):
    pts = qutrit_ellipse(C)
    assert pts.shape == (512, 2)
    assert max(abs(isocoherent_ellipse_residual(3, C, p)) for p in pts) < 1e-9


def test_qutrit_ellipse_shapes():
    assert np.min(np.linalg.norm(qutrit_ellipse(0), axis=1)) < 1e-12
    assert np.allclose(qutrit_ellipse(2), 1 / sqrt(3), atol=1e-12)

    def area(p):
        x, y = p[:, 0], p[:, 1]
        return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    areas = [area(qutrit_ellipse(c)) for c in (0.5, 1.0, 1.5)]
    assert areas[0] > areas[1] > areas[2] > 0


# qutrit off-diagonal ---------------------------------------------------------

def test_xi3_offdiagonal_examples():
    assert xi3_offdiagonal(1, 1) == pytest.approx(2)
    assert xi3_offdiagonal(5 / 3, 1) == pytest.approx(8 / 3, abs=1e-14)
    assert xi3_offdiagonal(2, 1) == pytest.approx(8 / 3, abs=1e-14)
    assert xi3_offdiagonal(0.5, 3) == pytest.approx(3.0)


def test_xi3_offdiagonal_branch_continuity():
    for c in (1.0, 5 / 3):
        lo, hi = xi3_offdiagonal(c - 1e-15, 1), xi3_offdiagonal(c + 1e-15, 1)
        assert abs(lo - hi) < 1e-12
    # evaluate neighbouring branch formulas exactly at the joints
    f = lambda c: 2 / 9 * (sqrt(1 + c) - sqrt(1 - c / 2)) ** 2
    assert abs(2 * 1.0 - (1.0 + 1)) < 1e-12
    assert abs((5 / 3 + 1) - 2 * (5 / 3 - f(5 / 3))) < 1e-12


@pytest.mark.parametrize("C", np.linspace(0, 2, 21))
def test_xi3_offdiagonal_matches_grid(C):
    assert abs(xi3_offdiagonal(C, 1.0) - xi3_offdiagonal_oracle(C, 1.0)) < 1e-4


def test_pq_min_q_examples():
    assert pq_min_q(0.5) == 0 and pq_min_q(1.0) == 0
    assert pq_min_q(1.2) == pytest.approx(0.05)
    assert pq_min_q(2) == pytest.approx(1 / 3)


def test_pq_route_agrees_with_piecewise_form():
    for C in np.linspace(0, 2, 201):
        assert abs(4 * (C / 2 - pq_min_q(C)) - xi3_offdiagonal(C, 1)) < 1e-12


def test_pq_min_q_against_brute_force():
    # minimize q = x0 x2 directly over the ellipse
    for C in np.linspace(0, 2, 9):
        _, a, b = qutrit_moduli(C)
        assert abs(pq_min_q(C) - np.min(a * b)) < 1e-4


def test_max_coherence_scaling():
    assert max_coherence_scaling(2, 1) == pytest.approx(2) == xi2(1, 0, 0, 1)
    assert max_coherence_scaling(3, 1) == pytest.approx(8 / 3) == pytest.approx(xi3_offdiagonal(2, 1))
    assert max_coherence_scaling(6, 1) == pytest.approx(10 / 3)


# dispatcher -----------------------------------------------------------------

def test_analytic_dispatch():
    assert analytic_ccmw(qubit_hamiltonian(1, -1, 0, 0), 0) == 2
    assert analytic_ccmw(jz(3), 1) == pytest.approx(xi3_diagonal(1))
    assert analytic_ccmw(custom_diagonal([1, 3, 5]), 1) == pytest.approx(2 * xi3_diagonal(1))
    assert analytic_ccmw(jx(3), 1.8) == pytest.approx(xi3_offdiagonal(1.8, 1))
    assert analytic_ccmw(j_offdiagonal(3, 3, 4), 0.5) == pytest.approx(5.0)
    with pytest.raises(NoClosedForm, match="no closed form for d=5 diagonal"):
        analytic_ccmw(jz(5), 1.0)
    with pytest.raises(NoClosedForm):
        analytic_ccmw(custom_diagonal([0, 1, 4]), 1.0)
