# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-node update loops for the trajectory runners.

Same arithmetic as the pure-NumPy fallback (filter classes and network
steps), written as flat C loops over the (instant, node) grid.  Each
incremental kernel returns the network estimate after every instant; each
diffusion kernel returns all per-node estimates after every instant.
"""

import numpy as np

from libc.math cimport sqrt

cdef double DEGENERATE = 1e-30


cdef inline void _stats_update(double complex[:, ::1] R, double complex[::1] b,
                               const double complex[::1] x, double complex d,
                               double lam, Py_ssize_t m) noexcept nogil:
    # R = lam*R + x x^H ; b = lam*b + conj(d)*x
    cdef Py_ssize_t i, j
    cdef double complex dc = d.conjugate()
    for i in range(m):
        for j in range(m):
            R[i, j] = lam * R[i, j] + x[i] * x[j].conjugate()
        b[i] = lam * b[i] + dc * x[i]


cdef inline void _matvec(const double complex[:, ::1] R, const double complex[::1] v,
                         double complex[::1] out, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double complex acc
    for i in range(m):
        acc = 0
        for j in range(m):
            acc = acc + R[i, j] * v[j]
        out[i] = acc


cdef inline double complex _vdot(const double complex[::1] a, const double complex[::1] b,
                                 Py_ssize_t m) noexcept nogil:
    # a^H b
    cdef Py_ssize_t i
    cdef double complex acc = 0
    for i in range(m):
        acc = acc + a[i].conjugate() * b[i]
    return acc


cdef inline double _sqnorm(const double complex[::1] a, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0
    for i in range(m):
        acc += a[i].real * a[i].real + a[i].imag * a[i].imag
    return acc


cdef inline void _seed_identity(double complex[:, ::1] R, double scale, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(m):
        for j in range(m):
            R[i, j] = 0
        R[i, i] = scale


# ---------------------------------------------------------------------------
# per-sample updates shared by the incremental and diffusion kernels
# ---------------------------------------------------------------------------

cdef inline void _lms_step(double complex[::1] w, const double complex[::1] x,
                           double complex d, double mu, Py_ssize_t m) noexcept nogil:
    cdef double complex err = d.conjugate() - _vdot(x, w, m)
    cdef double complex s = mu * err
    cdef Py_ssize_t i
    for i in range(m):
        w[i] = w[i] + s * x[i]


cdef inline void _rls_step(double complex[::1] w, double complex[:, ::1] P,
                           const double complex[::1] x, double complex d,
                           double lam, double delta, double complex[::1] pi,
                           Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double den
    cdef double complex err, gi
    _matvec(P, x, pi, m)
    den = lam + _vdot(x, pi, m).real
    if den <= 0.0:
        _seed_identity(P, 1.0 / delta, m)
        _matvec(P, x, pi, m)
        den = lam + _vdot(x, pi, m).real
    cdef double inv = 1.0 / den
    err = d.conjugate() - _vdot(x, w, m)
    cdef double inv_lam = 1.0 / lam
    cdef double complex gj, avg
    for i in range(m):
        gi = pi[i] * inv
        w[i] = w[i] + gi * err
        for j in range(m):
            P[i, j] = (P[i, j] - gi * pi[j].conjugate()) * inv_lam
    # re-symmetrize: the rank-1 inverse update drifts off Hermitian under
    # rounding, which is what eventually makes it indefinite
    for i in range(m):
        P[i, i] = 0.5 * (P[i, i] + P[i, i].conjugate())
        for j in range(i + 1, m):
            avg = 0.5 * (P[i, j] + P[j, i].conjugate())
            P[i, j] = avg
            P[j, i] = avg.conjugate()


cdef inline int _chol_solve(double complex* G, double complex* rhs,
                            double complex* sol, int k, int ld) noexcept nogil:
    # Hermitian positive-definite k x k solve via Cholesky; G (leading
    # dimension ld) is clobbered with the factor.
    cdef int i, j, l
    cdef double complex s
    cdef double diag
    for i in range(k):
        for j in range(i + 1):
            s = G[i * ld + j]
            for l in range(j):
                s = s - G[i * ld + l] * (G[j * ld + l]).conjugate()
            if i == j:
                diag = s.real
                if diag <= 0.0:
                    return -1
                G[i * ld + i] = sqrt(diag)
            else:
                G[i * ld + j] = s / G[j * ld + j].real
    # forward: L y = rhs
    for i in range(k):
        s = rhs[i]
        for l in range(i):
            s = s - G[i * ld + l] * sol[l]
        sol[i] = s / G[i * ld + i].real
    # backward: L^H sol = y
    for i in range(k - 1, -1, -1):
        s = sol[i]
        for l in range(i + 1, k):
            s = s - (G[l * ld + i]).conjugate() * sol[l]
        sol[i] = s / G[i * ld + i].real
    return 0


cdef inline int _ap_step(double complex[::1] w, const double complex[:, ::1] hx,
                         const double complex[::1] hd, int count, double mu,
                         double ridge, double complex[:, ::1] G,
                         double complex[::1] evec, double complex[::1] z,
                         Py_ssize_t m) noexcept nogil:
    # hx holds `count` regressors (rows), hd their desired samples.
    cdef int a, bcol
    cdef Py_ssize_t i
    cdef double complex s
    for a in range(count):
        evec[a] = hd[a].conjugate() - _vdot(hx[a], w, m)
        for bcol in range(count):
            G[a, bcol] = _vdot(hx[a], hx[bcol], m)
        G[a, a] = G[a, a] + ridge
    if _chol_solve(&G[0, 0], &evec[0], &z[0], count, <int>G.shape[1]) != 0:
        return 1
    for a in range(count):
        s = mu * z[a]
        for i in range(m):
            w[i] = w[i] + s * hx[a, i]
    return 0


cdef inline void _ccg_inner(double complex[:, ::1] R, double complex[::1] b,
                            double complex[::1] w, double complex[::1] g,
                            double complex[::1] p, double complex[::1] c,
                            double eta, int iterations, bint classic,
                            Py_ssize_t m, long* iter_counter) noexcept nogil:
    # fresh direction from w: g = b - R w, p = g; then conjugate steps
    cdef Py_ssize_t i
    cdef int j
    cdef double complex den, alpha
    cdef double rho, rho_new, beta
    _matvec(R, w, c, m)
    for i in range(m):
        g[i] = b[i] - c[i]
        p[i] = g[i]
    rho = _sqnorm(g, m)
    for j in range(iterations):
        _matvec(R, p, c, m)
        den = _vdot(p, c, m)
        if abs(den) < DEGENERATE or rho < DEGENERATE:
            break
        if classic:
            alpha = rho / den
        else:
            alpha = eta * _vdot(p, g, m) / den
        for i in range(m):
            w[i] = w[i] + alpha * p[i]
            g[i] = g[i] - alpha * c[i]
        rho_new = _sqnorm(g, m)
        beta = rho_new / rho
        for i in range(m):
            p[i] = g[i] + beta * p[i]
        rho = rho_new
        iter_counter[0] += 1


cdef inline void _mcg_step(double complex[:, ::1] R, double complex[::1] b,
                           double complex[::1] w, double complex[::1] g,
                           double complex[::1] p, double complex[::1] c,
                           double complex[::1] u, const double complex[::1] x,
                           double complex d, const double complex[::1] psi_ref,
                           double lam, double eta, bint data_reuse,
                           Py_ssize_t m) noexcept nogil:
    # One conjugate step from psi_ref; stats must already be updated.
    # w_out = psi_ref + alpha p ; g = lam g - alpha R p + x (conj(d) - x^H psi_ref)
    cdef Py_ssize_t i
    cdef double complex den, alpha, err, gn, beta
    cdef double complex num_beta
    cdef double rho_prev
    _matvec(R, p, c, m)
    den = _vdot(p, c, m)
    if abs(den) < DEGENERATE:
        alpha = 0
    else:
        alpha = eta * _vdot(p, g, m) / den
    err = d.conjugate() - _vdot(x, psi_ref, m)
    for i in range(m):
        u[i] = x[i] * err
    for i in range(m):
        w[i] = psi_ref[i] + alpha * p[i]
    rho_prev = _sqnorm(g, m)
    # g_new (stored via c as scratch? keep in place with two passes)
    num_beta = 0
    for i in range(m):
        gn = lam * g[i] - alpha * c[i] + u[i]
        num_beta = num_beta + (gn - g[i]).conjugate() * gn
        g[i] = gn
    if rho_prev < DEGENERATE:
        beta = 0
    else:
        beta = num_beta / rho_prev
    if data_reuse:
        for i in range(m):
            p[i] = g[i] + beta * p[i] + u[i]
    else:
        for i in range(m):
            p[i] = g[i] + beta * p[i]


# ---------------------------------------------------------------------------
# incremental (ring) kernels: chain state travels across nodes and instants
# ---------------------------------------------------------------------------

def incremental_lms(const double complex[:, :, ::1] x, const double complex[:, ::1] d, double mu):
    cdef Py_ssize_t T = x.shape[0], N = x.shape[1], M = x.shape[2]
    est_arr = np.empty((T, M), dtype=np.complex128)
    w_arr = np.zeros(M, dtype=np.complex128)
    cdef double complex[:, ::1] est = est_arr
    cdef double complex[::1] w = w_arr
    cdef Py_ssize_t t, k, i
    with nogil:
        for t in range(T):
            for k in range(N):
                _lms_step(w, x[t, k], d[t, k], mu, M)
            for i in range(M):
                est[t, i] = w[i]
    return est_arr


def incremental_rls(const double complex[:, :, ::1] x, const double complex[:, ::1] d,
                    double lam, double delta):
    cdef Py_ssize_t T = x.shape[0], N = x.shape[1], M = x.shape[2]
    est_arr = np.empty((T, M), dtype=np.complex128)
    w_arr = np.zeros(M, dtype=np.complex128)
    P_arr = np.eye(M, dtype=np.complex128) / delta
    pi_arr = np.empty(M, dtype=np.complex128)
    cdef double complex[:, ::1] est = est_arr, P = P_arr
    cdef double complex[::1] w = w_arr, pi = pi_arr
    cdef Py_ssize_t t, k, i
    with nogil:
        for t in range(T):
            for k in range(N):
                _rls_step(w, P, x[t, k], d[t, k], lam, delta, pi, M)
            for i in range(M):
                est[t, i] = w[i]
    return est_arr


def incremental_ap(const double complex[:, :, ::1] x, const double complex[:, ::1] d,
                   double mu, int order, double ridge):
    cdef Py_ssize_t T = x.shape[0], N = x.shape[1], M = x.shape[2]
    est_arr = np.empty((T, M), dtype=np.complex128)
    w_arr = np.zeros(M, dtype=np.complex128)
    # per-node regressor history, most recent first
    hx_arr = np.zeros((N, order, M), dtype=np.complex128)
    hd_arr = np.zeros((N, order), dtype=np.complex128)
    counts_arr = np.zeros(N, dtype=np.intp)
    G_arr = np.empty((order, order), dtype=np.complex128)
    e_arr = np.empty(order, dtype=np.complex128)
    z_arr = np.empty(order, dtype=np.complex128)
    cdef double complex[:, ::1] est = est_arr, hd2 = hd_arr, G = G_arr
    cdef double complex[:, :, ::1] hx = hx_arr
    cdef double complex[::1] w = w_arr, evec = e_arr, z = z_arr
    cdef Py_ssize_t[::1] counts = counts_arr
    cdef Py_ssize_t t, k, i, c
    cdef int q
    cdef long skips = 0
    with nogil:
        for t in range(T):
            for k in range(N):
                # shift history down, insert current sample at slot 0
                c = counts[k]
                if c < order:
                    counts[k] = c + 1
                for q in range(<int>min(c, order - 1), 0, -1):
                    for i in range(M):
                        hx[k, q, i] = hx[k, q - 1, i]
                    hd2[k, q] = hd2[k, q - 1]
                for i in range(M):
                    hx[k, 0, i] = x[t, k, i]
                hd2[k, 0] = d[t, k]
                if _ap_step(w, hx[k], hd2[k], <int>counts[k], mu, ridge, G, evec, z, M) != 0:
                    skips += 1
            for i in range(M):
                est[t, i] = w[i]
    return est_arr, skips


def incremental_ccg(const double complex[:, :, ::1] x, const double complex[:, ::1] d,
                    double lam, double eta, int iterations, double delta, bint classic):
    cdef Py_ssize_t T = x.shape[0], N = x.shape[1], M = x.shape[2]
    est_arr = np.empty((T, M), dtype=np.complex128)
    w_arr = np.zeros(M, dtype=np.complex128)
    R_arr = np.eye(M, dtype=np.complex128) * delta
    b_arr = np.zeros(M, dtype=np.complex128)
    g_arr = np.zeros(M, dtype=np.complex128)
    p_arr = np.zeros(M, dtype=np.complex128)
    c_arr = np.zeros(M, dtype=np.complex128)
    cdef double complex[:, ::1] est = est_arr, R = R_arr
    cdef double complex[::1] w = w_arr, b = b_arr, g = g_arr, p = p_arr, c = c_arr
    cdef Py_ssize_t t, k, i
    cdef long iters = 0
    with nogil:
        for t in range(T):
            for k in range(N):
                _stats_update(R, b, x[t, k], d[t, k], lam, M)
                _ccg_inner(R, b, w, g, p, c, eta, iterations, classic, M, &iters)
            for i in range(M):
                est[t, i] = w[i]
    return est_arr, iters


def incremental_mcg(const double complex[:, :, ::1] x, const double complex[:, ::1] d,
                    double lam, double eta, double delta):
    cdef Py_ssize_t T = x.shape[0], N = x.shape[1], M = x.shape[2]
    est_arr = np.empty((T, M), dtype=np.complex128)
    w_arr = np.zeros(M, dtype=np.complex128)
    ref_arr = np.zeros(M, dtype=np.complex128)
    R_arr = np.eye(M, dtype=np.complex128) * delta
    b_arr = np.zeros(M, dtype=np.complex128)
    g_arr = np.zeros(M, dtype=np.complex128)
    p_arr = np.zeros(M, dtype=np.complex128)
    c_arr = np.zeros(M, dtype=np.complex128)
    u_arr = np.zeros(M, dtype=np.complex128)
    cdef double complex[:, ::1] est = est_arr, R = R_arr
    cdef double complex[::1] w = w_arr, ref = ref_arr, b = b_arr
    cdef double complex[::1] g = g_arr, p = p_arr, c = c_arr, u = u_arr
    cdef Py_ssize_t t, k, i
    with nogil:
        for t in range(T):
            for k in range(N):
                _stats_update(R, b, x[t, k], d[t, k], lam, M)
                for i in range(M):
                    ref[i] = w[i]
                _mcg_step(R, b, w, g, p, c, u, x[t, k], d[t, k], ref, lam, eta, True, M)
            for i in range(M):
                est[t, i] = w[i]
    return est_arr


# ---------------------------------------------------------------------------
# diffusion kernels: per-node state, synchronous combine-then-adapt instants
# ---------------------------------------------------------------------------

cdef inline void _combine(const double complex[:, ::1] psi_prev,
                          const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
                          const double[::1] weights, double complex[:, ::1] phi,
                          Py_ssize_t N, Py_ssize_t M) noexcept nogil:
    cdef Py_ssize_t k, i, s
    for k in range(N):
        for i in range(M):
            phi[k, i] = 0
        for s in range(indptr[k], indptr[k + 1]):
            for i in range(M):
                phi[k, i] = phi[k, i] + weights[s] * psi_prev[indices[s], i]


def diffusion_lms(const double complex[:, :, ::1] x, const double complex[:, ::1] d,
                  const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
                  const double[::1] weights, double mu):
    cdef Py_ssize_t T = x.shape[0], N = x.shape[1], M = x.shape[2]
    out_arr = np.empty((T, N, M), dtype=np.complex128)
    psi_arr = np.zeros((N, M), dtype=np.complex128)
    phi_arr = np.zeros((N, M), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    cdef double complex[:, ::1] psi = psi_arr, phi = phi_arr
    cdef Py_ssize_t t, k, i
    with nogil:
        for t in range(T):
            _combine(psi, indptr, indices, weights, phi, N, M)
            for k in range(N):
                _lms_step(phi[k], x[t, k], d[t, k], mu, M)
                for i in range(M):
                    psi[k, i] = phi[k, i]
                    out[t, k, i] = phi[k, i]
    return out_arr


def diffusion_rls(const double complex[:, :, ::1] x, const double complex[:, ::1] d,
                  const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
                  const double[::1] weights, double lam, double delta):
    cdef Py_ssize_t T = x.shape[0], N = x.shape[1], M = x.shape[2]
    out_arr = np.empty((T, N, M), dtype=np.complex128)
    psi_arr = np.zeros((N, M), dtype=np.complex128)
    phi_arr = np.zeros((N, M), dtype=np.complex128)
    P_arr = np.empty((N, M, M), dtype=np.complex128)
    for k in range(N):
        P_arr[k] = np.eye(M, dtype=np.complex128) / delta
    pi_arr = np.empty(M, dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr, P = P_arr
    cdef double complex[:, ::1] psi = psi_arr, phi = phi_arr
    cdef double complex[::1] pi = pi_arr
    cdef Py_ssize_t t, kk, i
    with nogil:
        for t in range(T):
            _combine(psi, indptr, indices, weights, phi, N, M)
            for kk in range(N):
                _rls_step(phi[kk], P[kk], x[t, kk], d[t, kk], lam, delta, pi, M)
                for i in range(M):
                    psi[kk, i] = phi[kk, i]
                    out[t, kk, i] = phi[kk, i]
    return out_arr


def diffusion_ap(const double complex[:, :, ::1] x, const double complex[:, ::1] d,
                 const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
                 const double[::1] weights, double mu, int order, double ridge):
    cdef Py_ssize_t T = x.shape[0], N = x.shape[1], M = x.shape[2]
    out_arr = np.empty((T, N, M), dtype=np.complex128)
    psi_arr = np.zeros((N, M), dtype=np.complex128)
    phi_arr = np.zeros((N, M), dtype=np.complex128)
    hx_arr = np.zeros((N, order, M), dtype=np.complex128)
    hd_arr = np.zeros((N, order), dtype=np.complex128)
    counts_arr = np.zeros(N, dtype=np.intp)
    G_arr = np.empty((order, order), dtype=np.complex128)
    e_arr = np.empty(order, dtype=np.complex128)
    z_arr = np.empty(order, dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr, hx = hx_arr
    cdef double complex[:, ::1] psi = psi_arr, phi = phi_arr, hd2 = hd_arr, G = G_arr
    cdef double complex[::1] evec = e_arr, z = z_arr
    cdef Py_ssize_t[::1] counts = counts_arr
    cdef Py_ssize_t t, k, i, c
    cdef int q
    cdef long skips = 0
    with nogil:
        for t in range(T):
            _combine(psi, indptr, indices, weights, phi, N, M)
            for k in range(N):
                c = counts[k]
                if c < order:
                    counts[k] = c + 1
                for q in range(<int>min(c, order - 1), 0, -1):
                    for i in range(M):
                        hx[k, q, i] = hx[k, q - 1, i]
                    hd2[k, q] = hd2[k, q - 1]
                for i in range(M):
                    hx[k, 0, i] = x[t, k, i]
                hd2[k, 0] = d[t, k]
                if _ap_step(phi[k], hx[k], hd2[k], <int>counts[k], mu, ridge, G, evec, z, M) != 0:
                    skips += 1
                for i in range(M):
                    psi[k, i] = phi[k, i]
                    out[t, k, i] = phi[k, i]
    return out_arr, skips


def diffusion_ccg(const double complex[:, :, ::1] x, const double complex[:, ::1] d,
                  const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
                  const double[::1] weights, double lam, double eta, int iterations,
                  double delta, bint classic):
    cdef Py_ssize_t T = x.shape[0], N = x.shape[1], M = x.shape[2]
    out_arr = np.empty((T, N, M), dtype=np.complex128)
    psi_arr = np.zeros((N, M), dtype=np.complex128)
    phi_arr = np.zeros((N, M), dtype=np.complex128)
    R_arr = np.empty((N, M, M), dtype=np.complex128)
    for k in range(N):
        R_arr[k] = np.eye(M, dtype=np.complex128) * delta
    b_arr = np.zeros((N, M), dtype=np.complex128)
    g_arr = np.zeros(M, dtype=np.complex128)
    p_arr = np.zeros(M, dtype=np.complex128)
    c_arr = np.zeros(M, dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr, R = R_arr
    cdef double complex[:, ::1] psi = psi_arr, phi = phi_arr, b = b_arr
    cdef double complex[::1] g = g_arr, p = p_arr, c = c_arr
    cdef Py_ssize_t t, kk, i
    cdef long iters = 0
    with nogil:
        for t in range(T):
            _combine(psi, indptr, indices, weights, phi, N, M)
            for kk in range(N):
                _stats_update(R[kk], b[kk], x[t, kk], d[t, kk], lam, M)
                _ccg_inner(R[kk], b[kk], phi[kk], g, p, c, eta, iterations, classic, M, &iters)
                for i in range(M):
                    psi[kk, i] = phi[kk, i]
                    out[t, kk, i] = phi[kk, i]
    return out_arr, iters


def diffusion_mcg(const double complex[:, :, ::1] x, const double complex[:, ::1] d,
                  const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
                  const double[::1] weights, double lam, double eta, double delta):
    cdef Py_ssize_t T = x.shape[0], N = x.shape[1], M = x.shape[2]
    out_arr = np.empty((T, N, M), dtype=np.complex128)
    psi_arr = np.zeros((N, M), dtype=np.complex128)
    phi_arr = np.zeros((N, M), dtype=np.complex128)
    R_arr = np.empty((N, M, M), dtype=np.complex128)
    for k in range(N):
        R_arr[k] = np.eye(M, dtype=np.complex128) * delta
    b_arr = np.zeros((N, M), dtype=np.complex128)
    g_arr = np.zeros((N, M), dtype=np.complex128)
    p_arr = np.zeros((N, M), dtype=np.complex128)
    c_arr = np.zeros(M, dtype=np.complex128)
    u_arr = np.zeros(M, dtype=np.complex128)
    w_arr = np.zeros(M, dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr, R = R_arr
    cdef double complex[:, ::1] psi = psi_arr, phi = phi_arr, b = b_arr, g = g_arr, p = p_arr
    cdef double complex[::1] c = c_arr, u = u_arr, w = w_arr
    cdef Py_ssize_t t, kk, i
    with nogil:
        for t in range(T):
            _combine(psi, indptr, indices, weights, phi, N, M)
            for kk in range(N):
                _stats_update(R[kk], b[kk], x[t, kk], d[t, kk], lam, M)
                _mcg_step(R[kk], b[kk], w, g[kk], p[kk], c, u, x[t, kk], d[t, kk],
                          phi[kk], lam, eta, False, M)
                for i in range(M):
                    psi[kk, i] = w[i]
                    out[t, kk, i] = w[i]
    return out_arr
