# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: coupled density evolution and message passing decoders.

Every function here has a drop-in twin in ``_fallback.py``; ``kernels.py``
picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, exp, log, log1p, expm1, fabs

cnp.import_array()


cdef inline double _poly(double y, const long[::1] exps, const double[::1] wts) noexcept nogil:
    cdef Py_ssize_t k
    cdef double acc = 0.0
    for k in range(exps.shape[0]):
        if exps[k] == 0:
            acc += wts[k]
        else:
            acc += wts[k] * pow(y, <double>exps[k])
    return acc


cdef void _coupled_step(const double[::1] x, double[::1] out, int w, double eps,
                        const long[::1] lam_e, const double[::1] lam_w,
                        const long[::1] rho_e, const double[::1] rho_w,
                        double[::1] r, double[::1] v) noexcept nogil:
    # r[i] = rho(1 - x_z) for z = i - (w - 1) + 1, left pad zeros, right pad x_N'
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j, z
    cdef Py_ssize_t m = n + 2 * (w - 1)
    cdef double acc, xr = x[n - 1]
    cdef double r_right = _poly(1.0 - xr, rho_e, rho_w)
    cdef double r_left = _poly(1.0, rho_e, rho_w)
    for i in range(m):
        z = i - (w - 1)
        if z < 0:
            r[i] = r_left
        elif z < n:
            r[i] = _poly(1.0 - x[z], rho_e, rho_w)
        else:
            r[i] = r_right
    # v[i] for check-side index i <-> z = i - (w - 1) (0-based position), eps_z = 0 left of chain
    acc = 0.0
    for j in range(w):
        acc += r[j]
    for i in range(n + w - 1):
        z = i - (w - 1)
        if z < 0:
            v[i] = 0.0
        else:
            v[i] = eps * _poly(1.0 - acc / w, lam_e, lam_w)
        if i + w < m:
            acc += r[i + w] - r[i]
    acc = 0.0
    for j in range(w):
        acc += v[j]
    for z in range(n):
        out[z] = acc / w
        if z + w < n + w - 1:
            acc += v[z + w] - v[z]


def coupled_de_trajectory(const double[::1] x0, int w, double eps,
                          const long[::1] lam_e, const double[::1] lam_w,
                          const long[::1] rho_e, const double[::1] rho_w, int n_steps):
    """Run ``n_steps`` one-sided coupled DE steps; returns an (n_steps, N') array."""
    cdef Py_ssize_t n = x0.shape[0]
    traj = np.empty((n_steps, n), dtype=np.float64)
    cdef double[:, ::1] T = traj
    cdef double[::1] r = np.empty(n + 2 * (w - 1), dtype=np.float64)
    cdef double[::1] v = np.empty(n + w - 1, dtype=np.float64)
    cdef double[::1] cur = np.array(x0, dtype=np.float64)
    cdef int s
    with nogil:
        for s in range(n_steps):
            _coupled_step(cur, T[s], w, eps, lam_e, lam_w, rho_e, rho_w, r, v)
            cur = T[s]
    return traj


def coupled_de_advance(const double[::1] x0, int w, double eps,
                       const long[::1] lam_e, const double[::1] lam_w,
                       const long[::1] rho_e, const double[::1] rho_w, int n_steps):
    """Run ``n_steps`` steps keeping only the last profile."""
    cdef Py_ssize_t n = x0.shape[0]
    cdef double[::1] a = np.array(x0, dtype=np.float64)
    cdef double[::1] b = np.empty(n, dtype=np.float64)
    cdef double[::1] tmp
    cdef double[::1] r = np.empty(n + 2 * (w - 1), dtype=np.float64)
    cdef double[::1] v = np.empty(n + w - 1, dtype=np.float64)
    cdef int s
    with nogil:
        for s in range(n_steps):
            _coupled_step(a, b, w, eps, lam_e, lam_w, rho_e, rho_w, r, v)
            tmp = a
            a = b
            b = tmp
    return np.asarray(a)


def bec_peel(const long[::1] var_ptr, const long[::1] var_edges,
             const long[::1] chk_ptr, const long[::1] chk_edges,
             const long[::1] edge_var, const long[::1] edge_chk,
             const long[::1] edge_pos, const unsigned char[::1] chan_erased,
             const double[::1] sockets, int max_iters):
    """Flooding erasure decoding, event driven (messages only ever become known).

    Returns ``(trace, iterations, recovered)`` where ``trace[t, p]`` is the
    number of erased variable-to-check messages into check position ``p``
    after ``t`` iterations, divided by ``sockets[p]``.
    """
    cdef Py_ssize_t V = var_ptr.shape[0] - 1
    cdef Py_ssize_t C = chk_ptr.shape[0] - 1
    cdef Py_ssize_t E = edge_var.shape[0]
    cdef Py_ssize_t P = sockets.shape[0]
    cdef Py_ssize_t e, c, v, k, p, i, t
    cdef unsigned char[::1] vc_er = np.empty(E, dtype=np.uint8)
    cdef unsigned char[::1] cv_known = np.zeros(E, dtype=np.uint8)
    cdef long[::1] n_er = np.zeros(C, dtype=np.int64)
    cdef long[::1] n_known = np.zeros(V, dtype=np.int64)
    cdef long[::1] counts = np.zeros(P, dtype=np.int64)
    cdef long[::1] dirty_c = np.empty(C, dtype=np.int64)
    cdef unsigned char[::1] c_flag = np.zeros(C, dtype=np.uint8)
    cdef long[::1] dirty_v = np.empty(V, dtype=np.int64)
    cdef unsigned char[::1] v_flag = np.zeros(V, dtype=np.uint8)
    cdef Py_ssize_t n_dc = 0, n_dv, n_new
    cdef long total = 0

    for e in range(E):
        vc_er[e] = chan_erased[edge_var[e]]
        if vc_er[e]:
            n_er[edge_chk[e]] += 1
            counts[edge_pos[e]] += 1
            total += 1
    for c in range(C):
        if n_er[c] <= 1:
            dirty_c[n_dc] = c
            n_dc += 1
            c_flag[c] = 1

    rows = [np.asarray(counts, dtype=np.float64) / np.asarray(sockets)]
    t = 0
    while t < max_iters and total > 0:
        t += 1
        n_dv = 0
        # check update: newly known check-to-variable messages toward erased bits
        for i in range(n_dc):
            c = dirty_c[i]
            c_flag[c] = 0
            if n_er[c] > 1:
                continue
            for k in range(chk_ptr[c], chk_ptr[c + 1]):
                e = chk_edges[k]
                v = edge_var[e]
                if cv_known[e] or not chan_erased[v]:
                    continue
                if n_er[c] - vc_er[e] == 0:
                    cv_known[e] = 1
                    n_known[v] += 1
                    if not v_flag[v]:
                        v_flag[v] = 1
                        dirty_v[n_dv] = v
                        n_dv += 1
        # variable update
        n_dc = 0
        n_new = 0
        for i in range(n_dv):
            v = dirty_v[i]
            v_flag[v] = 0
            for k in range(var_ptr[v], var_ptr[v + 1]):
                e = var_edges[k]
                if not vc_er[e]:
                    continue
                if n_known[v] - cv_known[e] >= 1:
                    vc_er[e] = 0
                    c = edge_chk[e]
                    n_er[c] -= 1
                    counts[edge_pos[e]] -= 1
                    total -= 1
                    n_new += 1
                    if not c_flag[c]:
                        c_flag[c] = 1
                        dirty_c[n_dc] = c
                        n_dc += 1
        rows.append(np.asarray(counts, dtype=np.float64) / np.asarray(sockets))
        if n_new == 0:
            break
    return np.vstack(rows), t, total == 0


cdef inline double _phi(double x) noexcept nogil:
    # -log(tanh(x/2)), self-inverse on (0, inf)
    # exp/log are much cheaper than expm1/log1p in libm; 1 - e keeps ~14
    # digits once x >= 0.01
    cdef double e
    if x >= 0.01:
        e = exp(-x)
        return log((1.0 + e) / (1.0 - e))
    if x < 1e-12:
        x = 1e-12
    return log1p(2.0 / expm1(x))


def llr_flood(const long[::1] var_ptr, const long[::1] var_edges,
              const long[::1] chk_ptr, const long[::1] chk_edges,
              const long[::1] edge_var, const double[::1] chan_llr,
              const long[::1] var_pos, int n_pos, int max_iters, double clamp,
              int patience=0):
    """Sum-product flooding in the LLR domain for an all-zero codeword.

    Returns ``(trace, iterations, success)``; ``trace[t, p]`` is the fraction
    of bits at variable position ``p`` whose posterior LLR is not positive.
    With ``patience > 0``, stops once the error count has not reached a new
    minimum for that many iterations.
    """
    cdef Py_ssize_t V = var_ptr.shape[0] - 1
    cdef Py_ssize_t C = chk_ptr.shape[0] - 1
    cdef Py_ssize_t E = edge_var.shape[0]
    cdef Py_ssize_t e, c, v, k, t
    cdef double[::1] vc = np.empty(E, dtype=np.float64)
    cdef double[::1] cv = np.zeros(E, dtype=np.float64)
    cdef double[::1] ph = np.empty(E, dtype=np.float64)
    cdef double[::1] post = np.empty(V, dtype=np.float64)
    cdef double[::1] per_pos = np.zeros(n_pos, dtype=np.float64)
    cdef long[::1] errs = np.zeros(n_pos, dtype=np.int64)
    cdef double s, a, m, tot
    cdef int sign
    cdef long n_err = 0, best
    cdef int since = 0

    for v in range(V):
        per_pos[var_pos[v]] += 1.0
        post[v] = chan_llr[v]
        if post[v] <= 0.0:
            errs[var_pos[v]] += 1
            n_err += 1
    rows = [np.asarray(errs, dtype=np.float64) / np.asarray(per_pos)]
    best = n_err
    t = 0
    while t < max_iters and n_err > 0:
        t += 1
        with nogil:
            # variable to check
            for v in range(V):
                tot = post[v]
                for k in range(var_ptr[v], var_ptr[v + 1]):
                    e = var_edges[k]
                    m = tot - cv[e]
                    if m > clamp:
                        m = clamp
                    elif m < -clamp:
                        m = -clamp
                    vc[e] = m
            # check to variable
            for c in range(C):
                s = 0.0
                sign = 1
                for k in range(chk_ptr[c], chk_ptr[c + 1]):
                    e = chk_edges[k]
                    if vc[e] < 0.0:
                        sign = -sign
                    ph[e] = _phi(fabs(vc[e]))
                    s += ph[e]
                for k in range(chk_ptr[c], chk_ptr[c + 1]):
                    e = chk_edges[k]
                    a = s - ph[e]
                    if a < 1e-300:
                        m = clamp
                    else:
                        m = _phi(a)
                        if m > clamp:
                            m = clamp
                    if (vc[e] < 0.0) != (sign < 0):
                        m = -m
                    cv[e] = m
            # posterior and hard decisions
            n_err = 0
            for k in range(errs.shape[0]):
                errs[k] = 0
            for v in range(V):
                tot = chan_llr[v]
                for k in range(var_ptr[v], var_ptr[v + 1]):
                    tot += cv[var_edges[k]]
                post[v] = tot
                if tot <= 0.0:
                    errs[var_pos[v]] += 1
                    n_err += 1
        rows.append(np.asarray(errs, dtype=np.float64) / np.asarray(per_pos))
        if n_err < best:
            best = n_err
            since = 0
        else:
            since += 1
            if patience > 0 and since >= patience:
                break
    return np.vstack(rows), t, n_err == 0
