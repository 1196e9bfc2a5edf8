"""Compiled inner loops: Jacobi eigensolver, stochastic ranking, mixed-state repair."""

import numba as nb
import numpy as np


@nb.njit(cache=True)
def _jacobi(A, V, lam, tol, max_sweeps):
    # in place: A is destroyed, V and lam receive ascending eigenpairs
    d = A.shape[0]
    for a in range(d):
        for b in range(d):
            V[a, b] = 1.0 if a == b else 0.0
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(d):
            for q in range(p + 1, d):
                off += abs(A[p, q]) ** 2
        if np.sqrt(2.0 * off) < tol:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                r = abs(A[p, q])
                if r < 1e-300:
                    continue
                e = A[p, q] / r
                ec = np.conj(e)
                th = (A[q, q].real - A[p, p].real) / (2.0 * r)
                t = (1.0 if th >= 0 else -1.0) / (abs(th) + np.sqrt(th * th + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(d):
                    ap = A[k, p]
                    aq = A[k, q]
                    A[k, p] = c * ap - s * ec * aq
                    A[k, q] = s * ap + c * ec * aq
                    vp = V[k, p]
                    vq = V[k, q]
                    V[k, p] = c * vp - s * ec * vq
                    V[k, q] = s * vp + c * ec * vq
                for k in range(d):
                    ap = A[p, k]
                    aq = A[q, k]
                    A[p, k] = c * ap - s * e * aq
                    A[q, k] = s * ap + c * e * aq
                A[p, q] = 0.0
                A[q, p] = 0.0
    for k in range(d):
        lam[k] = A[k, k].real
    # stable insertion sort of the eigenpairs
    for i in range(1, d):
        j = i
        while j > 0 and lam[j - 1] > lam[j]:
            lam[j - 1], lam[j] = lam[j], lam[j - 1]
            for k in range(d):
                V[k, j - 1], V[k, j] = V[k, j], V[k, j - 1]
            j -= 1


@nb.njit(cache=True)
def jacobi_eigh(a, tol=1e-14, max_sweeps=60):
    """Cyclic complex Jacobi for a Hermitian matrix.

    Returns ascending eigenvalues and the unitary whose columns are the
    eigenvectors. Iterates until the Frobenius norm of the off-diagonal part
    drops below ``tol``.
    """
    d = a.shape[0]
    A = np.empty((d, d), np.complex128)
    for i in range(d):
        for j in range(d):
            A[i, j] = a[i, j]
    V = np.empty((d, d), np.complex128)
    lam = np.empty(d)
    _jacobi(A, V, lam, tol, max_sweeps)
    return lam, V


@nb.njit(cache=True)
def stochastic_rank(f, phi, pf, seed):
    """Bubble-sort stochastic ranking (Runarsson and Yao).

    Adjacent pairs are compared by objective when both share the same
    violation or with probability ``pf``, otherwise by violation. The coin
    flips come from an inline xorshift64 stream seeded by ``seed``.
    """
    n = f.shape[0]
    idx = np.arange(n)
    fs = f.copy()
    ps = phi.copy()
    s = np.uint64(seed) | np.uint64(1)
    thr = np.uint64(int(pf * 2.0 ** 53))
    for _ in range(n):
        swapped = False
        for j in range(n - 1):
            s ^= s << np.uint64(13)
            s ^= s >> np.uint64(7)
            s ^= s << np.uint64(17)
            if ps[j] == ps[j + 1] or (s >> np.uint64(11)) < thr:
                sw = fs[j] > fs[j + 1]
            else:
                sw = ps[j] > ps[j + 1]
            if sw:
                fs[j], fs[j + 1] = fs[j + 1], fs[j]
                ps[j], ps[j + 1] = ps[j + 1], ps[j]
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                swapped = True
        if not swapped:
            break
    return idx


@nb.njit(cache=True)
def _l1(r):
    d = r.shape[0]
    s = 0.0
    for i in range(d):
        for j in range(d):
            if i != j:
                s += abs(r[i, j])
    return s


@nb.njit(cache=True)
def _l1_rate(A, r):
    # d/dt of l1(r) when dr/dt = i [A, r]
    d = r.shape[0]
    s = 0.0
    for a in range(d):
        for b in range(d):
            if a != b:
                m = abs(r[a, b])
                if m > 1e-300:
                    acc = 0j
                    for k in range(d):
                        acc += A[a, k] * r[k, b] - r[a, k] * A[k, b]
                    s += (np.conj(r[a, b]) * 1j * acc).real / m
    return s


@nb.njit(cache=True)
def _conjugate_spectrum(U, w, out):
    # out = U diag(w) U^dagger
    d = U.shape[0]
    for a in range(d):
        for b in range(a, d):
            acc = 0j
            for k in range(d):
                if w[k] != 0.0:
                    acc += U[a, k] * w[k] * np.conj(U[b, k])
            out[a, b] = acc
            out[b, a] = np.conj(acc)


@nb.njit(cache=True)
def _exp_hermitian(V, lam, t, ph, U):
    # U = V diag(exp(i t lam)) V^dagger
    d = V.shape[0]
    for k in range(d):
        x = t * lam[k]
        ph[k] = complex(np.cos(x), np.sin(x))
    for a in range(d):
        for b in range(d):
            acc = 0j
            for k in range(d):
                acc += V[a, k] * ph[k] * np.conj(V[b, k])
            U[a, b] = acc


@nb.njit(cache=True)
def _inverse(A, B):
    # B = A^{-1} by Gauss-Jordan with partial pivoting; A is destroyed
    d = A.shape[0]
    for a in range(d):
        for b in range(d):
            B[a, b] = 1.0 if a == b else 0.0
    for col in range(d):
        piv = col
        for r in range(col + 1, d):
            if abs(A[r, col]) > abs(A[piv, col]):
                piv = r
        if piv != col:
            for k in range(d):
                A[col, k], A[piv, k] = A[piv, k], A[col, k]
                B[col, k], B[piv, k] = B[piv, k], B[col, k]
        p = A[col, col]
        if abs(p) < 1e-14:
            p = 1e-14
        for k in range(d):
            A[col, k] /= p
            B[col, k] /= p
        for r in range(d):
            if r != col:
                fac = A[r, col]
                if fac != 0:
                    for k in range(d):
                        A[r, k] -= fac * A[col, k]
                        B[r, k] -= fac * B[col, k]


@nb.njit(cache=True)
def _geodesic_state(UW, W, w, alpha, t, ph, Ut, out):
    # out = U_t diag(w) U_t^dagger with U_t = (U W) diag(exp(i t alpha)) W^dagger
    d = UW.shape[0]
    for k in range(d):
        x = t * alpha[k]
        ph[k] = complex(np.cos(x), np.sin(x))
    for a in range(d):
        for b in range(d):
            acc = 0j
            for k in range(d):
                acc += UW[a, k] * ph[k] * np.conj(W[b, k])
            Ut[a, b] = acc
    _conjugate_spectrum(Ut, w, out)


@nb.njit(cache=True)
def _rank_order(x, idx):
    # stable argsort by insertion, small arrays only
    d = x.shape[0]
    for i in range(d):
        idx[i] = i
    for i in range(1, d):
        j = i
        while j > 0 and x[idx[j - 1]] > x[idx[j]]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            j -= 1


ANGLE_SCALE = 0.5
REPAIR_TOL = 1e-12


@nb.njit(cache=True)
def _workspace(d):
    c = np.complex128
    return (np.empty((d, d), c), np.empty((d, d), c), np.empty((d, d), c), np.empty((d, d), c),
            np.empty((d, d), c), np.empty((d, d), c), np.empty((d, d), c), np.empty(d), np.empty(d),
            np.empty(d, c), np.empty(d), np.empty(d, np.int64), np.empty(d, np.int64),
            np.empty(d, np.int64))


@nb.njit(cache=True)
def _repair(U, w, C, cmax, out, ws):
    M, Mp, Mi, Kc, W, UW, Ut, kappa, alpha, ph, pop, ow, op, pi = ws
    d = U.shape[0]
    if C >= cmax:
        # only maximally coherent pure states remain
        j = 0
        for k in range(1, d):
            if w[k] > w[j]:
                j = k
        for a in range(d):
            for b in range(d):
                out[a, b] = np.exp(1j * (np.angle(U[a, j]) - np.angle(U[b, j]))) / d
        return
    _conjugate_spectrum(U, w, out)
    c0 = _l1(out)
    if c0 <= C:
        return
    # rank-match eigenvalues to basis populations
    for a in range(d):
        acc = 0.0
        for k in range(d):
            acc += (U[a, k].real ** 2 + U[a, k].imag ** 2) * w[k]
        pop[a] = acc
    _rank_order(w, ow)
    _rank_order(pop, op)
    for r in range(d):
        pi[ow[r]] = op[r]
    if C <= 0.0:
        for a in range(d):
            for b in range(d):
                out[a, b] = 0.0
        for k in range(d):
            out[pi[k], pi[k]] = w[k]
        return
    # M = U^dagger T with T[pi(k), k] = phase of U[pi(k), k]; Cayley generator of M
    for b in range(d):
        u = U[pi[b], b]
        g = u / abs(u) if abs(u) > 0 else 1.0 + 0j
        for a in range(d):
            m = np.conj(U[pi[b], a]) * g
            M[a, b] = m
            Mp[a, b] = m
    for a in range(d):
        M[a, a] -= 1.0
        Mp[a, a] += 1.0
    _inverse(Mp, Mi)
    for a in range(d):
        for b in range(d):
            acc = 0j
            for k in range(d):
                acc += M[a, k] * Mi[k, b]
            Kc[a, b] = 1j * acc
    for a in range(d):
        Kc[a, a] = Kc[a, a].real
        for b in range(a + 1, d):
            h = 0.5 * (Kc[a, b] + np.conj(Kc[b, a]))
            Kc[a, b] = h
            Kc[b, a] = np.conj(h)
    _jacobi(Kc, W, kappa, 1e-14, 60)
    for k in range(d):
        alpha[k] = -2.0 * np.arctan(kappa[k])
    for a in range(d):
        for b in range(d):
            acc = 0j
            for k in range(d):
                acc += U[a, k] * W[k, b]
            UW[a, b] = acc
    # the path obeys d rho / dt = i [A, rho] with A = (U W) diag(alpha) (U W)^dagger
    A = Mi
    for a in range(d):
        for b in range(d):
            acc = 0j
            for k in range(d):
                acc += UW[a, k] * alpha[k] * np.conj(UW[b, k])
            A[a, b] = acc
    # Newton on l1(rho(t)) - C, safeguarded by the bracket [0, 1]
    a0 = 0.0
    ga = c0 - C
    b0 = 1.0
    gb = -C
    # out still holds rho(0)
    dg = _l1_rate(A, out)
    t = -ga / dg if dg < 0.0 else -1.0
    if not (0.0 < t < 1.0):
        t = ga / (ga - gb)
    for _ in range(60):
        _geodesic_state(UW, W, w, alpha, t, ph, Ut, out)
        g = _l1(out) - C
        if abs(g) < REPAIR_TOL:
            return
        if g > 0.0:
            a0 = t
            ga = g
        else:
            b0 = t
            gb = g
        if b0 - a0 < 1e-16:
            return
        dg = _l1_rate(A, out)
        tn = t - g / dg if dg != 0.0 else -1.0
        if not (a0 < tn < b0):
            tn = a0 - ga * (b0 - a0) / (gb - ga)
        t = tn


@nb.njit(cache=True)
def repair_state(U, w, C, cmax, out):
    """Place ``U diag(w) U^dagger`` on the coherence level set ``C``.

    The state is moved inside its unitary orbit along the geodesic from ``U``
    to the nearest permutation-phase unitary, whose image of ``diag(w)`` is
    incoherent. A crossing of the level set along that path is located by
    Newton steps on the exact path derivative, kept inside a sign bracket. States that
    start below ``C`` are returned unchanged and left to the penalty.
    """
    _repair(U, w, C, cmax, out, _workspace(U.shape[0]))


@nb.njit(cache=True)
def _decode_row(x, G, C, cmax, side, w, K, V, U, lam, ph, ws, out):
    # one repaired state from a mixed-mode parameter vector; side 0 is rho_in
    m = G.shape[0]
    d = G.shape[1]
    s = 0.0
    for k in range(d):
        s += x[k]
    for k in range(d):
        w[k] = x[k] / s if s > 0 else 1.0 / d
    for a in range(d):
        for b in range(d):
            K[a, b] = 0.0
    for j in range(m):
        th = ANGLE_SCALE * (x[d + side * m + j] - np.pi)
        if th != 0.0:
            for a in range(d):
                for b in range(d):
                    K[a, b] += th * G[j, a, b]
    _jacobi(K, V, lam, 1e-14, 60)
    _exp_hermitian(V, lam, 1.0, ph, U)
    _repair(U, w, C, cmax, out, ws)


@nb.njit(cache=True)
def _row_scratch(d):
    c = np.complex128
    return (np.empty(d), np.empty((d, d), c), np.empty((d, d), c), np.empty((d, d), c),
            np.empty(d), np.empty(d, c))


@nb.njit(cache=True)
def mixed_states(X, G, C, cmax, rho_in, rho_f):
    """Decode a population of mixed-mode parameter vectors into repaired states.

    Generator coefficients are ANGLE_SCALE * (theta - pi).
    """
    d = G.shape[1]
    w, K, V, U, lam, ph = _row_scratch(d)
    ws = _workspace(d)
    for p in range(X.shape[0]):
        _decode_row(X[p], G, C, cmax, 0, w, K, V, U, lam, ph, ws, rho_in[p])
        _decode_row(X[p], G, C, cmax, 1, w, K, V, U, lam, ph, ws, rho_f[p])


@nb.njit(cache=True)
def mixed_objective(X, G, H, C, cmax, f, h):
    """Fill f with Tr[(rho_f - rho_in) H] and h with the two coherence residuals."""
    d = G.shape[1]
    w, K, V, U, lam, ph = _row_scratch(d)
    ws = _workspace(d)
    ri = np.empty((d, d), np.complex128)
    rf = np.empty((d, d), np.complex128)
    for p in range(X.shape[0]):
        _decode_row(X[p], G, C, cmax, 0, w, K, V, U, lam, ph, ws, ri)
        _decode_row(X[p], G, C, cmax, 1, w, K, V, U, lam, ph, ws, rf)
        e = 0.0
        for a in range(d):
            for b in range(d):
                e += ((rf[a, b] - ri[a, b]) * H[b, a]).real
        f[p] = e
        h[p, 0] = _l1(ri) - C
        h[p, 1] = _l1(rf) - C


@nb.njit(cache=True)
def es_offspring(P, PS, parent_of, Z, lb, ub, sigma_max, tau, tau_global, gamma, smoothing, X, S):
    """Write the next ISRES generation into X (positions) and S (step sizes).

    P, PS are the ranked parents and their step sizes. Z holds standard
    normals: columns [0, n) mutate the step sizes, [n, 2n) the positions and
    column 2n is the per-child global factor. Children i < mu - 1 take the
    differential step P[i] + gamma (P[0] - P[i+1]) when it lies in bounds.
    Positions leaving the box are reflected back.
    """
    lam, n = X.shape
    mu = P.shape[0]
    for i in range(lam):
        q = parent_of[i]
        dv = i < mu - 1
        if dv:
            for j in range(n):
                v = P[i, j] + gamma * (P[0, j] - P[i + 1, j])
                if v < lb[j] or v > ub[j]:
                    dv = False
                    break
        g = tau_global * Z[i, 2 * n]
        for j in range(n):
            if dv:
                ns = PS[i, j]
                x = P[i, j] + gamma * (P[0, j] - P[i + 1, j])
            else:
                ns = min(PS[q, j] * np.exp(g + tau * Z[i, j]), sigma_max[j])
                x = P[q, j] + ns * Z[i, n + j]
            w = ub[j] - lb[j]
            y = (x - lb[j]) % (2.0 * w)
            X[i, j] = lb[j] + (2.0 * w - y if y > w else y)
            S[i, j] = PS[q, j] + smoothing * (ns - PS[q, j])
