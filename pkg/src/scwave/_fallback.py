"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and return values; used when the extension is not built or
``SCWAVE_PURE_PYTHON=1`` is set.
"""

import numpy as np


def _poly(y, exps, wts):
    return np.power.outer(y, exps) @ wts


def _coupled_step(x, w, eps, lam_e, lam_w, rho_e, rho_w):
    n = x.size
    ext = np.concatenate([np.zeros(w - 1), x, np.full(w - 1, x[-1])])
    r = _poly(1.0 - ext, rho_e, rho_w)
    cs = np.concatenate([[0.0], np.cumsum(r)])
    m = n + w - 1
    c = 1.0 - (cs[w:w + m] - cs[:m]) / w
    v = eps * _poly(c, lam_e, lam_w)
    v[: w - 1] = 0.0
    vs = np.concatenate([[0.0], np.cumsum(v)])
    return (vs[w:w + n] - vs[:n]) / w


def coupled_de_trajectory(x0, w, eps, lam_e, lam_w, rho_e, rho_w, n_steps):
    x = np.array(x0, dtype=np.float64)
    out = np.empty((n_steps, x.size))
    for s in range(n_steps):
        x = _coupled_step(x, w, eps, lam_e, lam_w, rho_e, rho_w)
        out[s] = x
    return out


def coupled_de_advance(x0, w, eps, lam_e, lam_w, rho_e, rho_w, n_steps):
    x = np.array(x0, dtype=np.float64)
    for _ in range(n_steps):
        x = _coupled_step(x, w, eps, lam_e, lam_w, rho_e, rho_w)
    return x


def bec_peel(var_ptr, var_edges, chk_ptr, chk_edges, edge_var, edge_chk, edge_pos,
             chan_erased, sockets, max_iters):
    n_chk = chk_ptr.size - 1
    n_var = var_ptr.size - 1
    P = sockets.size
    erased_var = chan_erased.astype(bool)
    vc_er = erased_var[edge_var]
    rows = [np.bincount(edge_pos, weights=vc_er, minlength=P) / sockets]
    t = 0
    while t < max_iters and vc_er.any():
        t += 1
        n_er = np.bincount(edge_chk, weights=vc_er, minlength=n_chk)
        cv_known = (n_er[edge_chk] - vc_er) == 0
        n_known = np.bincount(edge_var, weights=cv_known, minlength=n_var)
        new_vc = erased_var[edge_var] & ((n_known[edge_var] - cv_known) < 1)
        changed = bool(np.any(new_vc != vc_er))
        vc_er = new_vc
        rows.append(np.bincount(edge_pos, weights=vc_er, minlength=P) / sockets)
        if not changed:
            break
    return np.vstack(rows), t, not vc_er.any()


def _phi(x):
    x = np.maximum(x, 1e-12)
    with np.errstate(over="ignore"):
        return np.log1p(2.0 / np.expm1(x))


def llr_flood(var_ptr, var_edges, chk_ptr, chk_edges, edge_var, chan_llr, var_pos,
              n_pos, max_iters, clamp, patience=0):
    n_var = var_ptr.size - 1
    # edges sorted by check give contiguous segments for reduceat
    order = chk_edges
    starts = chk_ptr[:-1]
    nonempty = np.diff(chk_ptr) > 0
    per_pos = np.bincount(var_pos, minlength=n_pos).astype(np.float64)
    post = chan_llr.astype(np.float64).copy()
    cv = np.zeros(edge_var.size)
    errs = post <= 0
    rows = [np.bincount(var_pos, weights=errs, minlength=n_pos) / per_pos]
    best, since = int(errs.sum()), 0
    t = 0
    while t < max_iters and errs.any():
        t += 1
        vc = np.clip(post[edge_var] - cv, -clamp, clamp)
        mag = _phi(np.abs(vc))[order]
        neg = (vc < 0)[order]
        s = np.zeros(starts.size)
        par = np.zeros(starts.size, dtype=np.int64)
        s[nonempty] = np.add.reduceat(mag, starts[nonempty])
        par[nonempty] = np.add.reduceat(neg.astype(np.int64), starts[nonempty]) % 2
        seg = np.repeat(np.arange(starts.size), np.diff(chk_ptr))
        a = s[seg] - mag
        out = np.where(a < 1e-300, clamp, np.minimum(_phi(np.maximum(a, 1e-300)), clamp))
        out = np.where((par[seg] == 1) != neg, -out, out)
        cv = np.empty_like(cv)
        cv[order] = out
        post = chan_llr + np.bincount(edge_var, weights=cv, minlength=n_var)
        errs = post <= 0
        rows.append(np.bincount(var_pos, weights=errs, minlength=n_pos) / per_pos)
        n_err = int(errs.sum())
        if n_err < best:
            best, since = n_err, 0
        else:
            since += 1
            if 0 < patience <= since:
                break
    return np.vstack(rows), t, not errs.any()
