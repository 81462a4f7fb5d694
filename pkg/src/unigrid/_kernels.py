"""Compiled inner loops for relaxation and unigrid sweeps.

Direction matrices (columns of the composite interpolants) and their images
under ``A`` are passed as CSC arrays.  Counters are accumulated in a small
int64 array indexed by the constants below.
"""

import numpy as np
from numba import njit

PLAIN, THRESHOLD, LININTERP, GS = 0, 1, 2, 3

RECOVERED, GS_UPDATES, VIOLATIONS, STEPS = 0, 1, 2, 3
N_COUNTERS = 4


@njit(cache=True)
def gauss_seidel(indptr, indices, data, u, b, sweeps):
    n = len(u)
    for _ in range(sweeps):
        for i in range(n):
            diag = 0.0
            s = b[i]
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    diag = data[p]
                else:
                    s -= data[p] * u[j]
            if diag == 0.0:
                raise ValueError("zero diagonal entry in Gauss-Seidel sweep")
            u[i] = s / diag


@njit(cache=True)
def _row_residual(row_ptr, row_idx, row_val, b, u, i):
    s = b[i]
    for p in range(row_ptr[i], row_ptr[i + 1]):
        s -= row_val[p] * u[row_idx[p]]
    return s


@njit(cache=True)
def _refresh(points, m, a_ptr, a_idx, row_ptr, row_idx, row_val, b, u, r):
    # recompute r exactly on every row touched by the listed points
    for q in range(m):
        i = points[q]
        for p in range(a_ptr[i], a_ptr[i + 1]):
            k = a_idx[p]
            r[k] = _row_residual(row_ptr, row_idx, row_val, b, u, k)


@njit(cache=True)
def _gs_correct(support, u, r, b, row_ptr, row_idx, row_val, a_ptr, a_idx, a_diag,
                counters, cap_factor):
    # point updates use the true row residual; the maintained r loses too much
    # accuracy under strongly varying coefficients
    m = 0
    bad = np.empty(len(support), dtype=np.int64)
    for i in support:
        if u[i] <= 0.0:
            bad[m] = i
            m += 1
    if m == 0:
        return
    touched = bad.copy()
    n_touched = m
    cap = cap_factor * m
    done = 0
    while m > 0:
        for q in range(m):
            i = bad[q]
            u[i] += _row_residual(row_ptr, row_idx, row_val, b, u, i) / a_diag[i]
            done += 1
        counters[GS_UPDATES] += m
        if done > cap:
            raise RuntimeError("Gauss-Seidel positivity correction exceeded its update cap")
        keep = 0
        for q in range(m):
            if u[bad[q]] <= 0.0:
                bad[keep] = bad[q]
                keep += 1
        m = keep
    _refresh(touched, n_touched, a_ptr, a_idx, row_ptr, row_idx, row_val, b, u, r)


@njit(cache=True)
def _lininterp_correct(support, u, r, b, x, bc_left, bc_right, x_left, x_right,
                       row_ptr, row_idx, row_val, a_ptr, a_idx, counters):
    n = len(u)
    changed = np.empty(n, dtype=np.int64)
    nc = 0
    q = 0
    ns = len(support)
    while q < ns:
        s = support[q]
        if u[s] > 0.0:
            q += 1
            continue
        e = s
        while e + 1 < n and u[e + 1] <= 0.0:
            e += 1
        while q < ns and support[q] <= e:
            q += 1
        if s == 0:
            ul, xl = bc_left, x_left
        else:
            ul, xl = u[s - 1], x[s - 1]
        if e == n - 1:
            ur, xr = bc_right, x_right
        else:
            ur, xr = u[e + 1], x[e + 1]
        if ul < 0.0 or ur < 0.0 or (ul <= 0.0 and ur <= 0.0):
            raise RuntimeError("no positive bracket for linear-interpolation correction")
        slope = (ur - ul) / (xr - xl)
        for m in range(s, e + 1):
            new = ul + slope * (x[m] - xl)
            if not new > 0.0:
                raise RuntimeError("linear-interpolation correction produced a non-positive value")
            u[m] = new
            changed[nc] = m
            nc += 1
        counters[RECOVERED] += e - s + 1
    _refresh(changed, nc, a_ptr, a_idx, row_ptr, row_idx, row_val, b, u, r)


@njit(cache=True)
def unigrid_level(d_ptr, d_idx, d_val, ad_ptr, ad_idx, ad_val, diag,
                  u, r, b, omega, nu, mode, eps,
                  row_ptr, row_idx, row_val, a_ptr, a_idx, a_diag,
                  x, bc_left, bc_right, x_left, x_right,
                  check_positive, cap_factor, counters):
    """``nu`` sweeps over all directions of one level, updating ``u`` and ``r``."""
    ncols = len(diag)
    for _ in range(nu):
        for j in range(ncols):
            start, stop = d_ptr[j], d_ptr[j + 1]
            if start == stop:
                continue
            s = 0.0
            for p in range(start, stop):
                s += r[d_idx[p]] * d_val[p]
            if not diag[j] > 0.0:
                raise ValueError("non-positive Galerkin diagonal in unigrid step")
            step = omega * s / diag[j]
            if mode == THRESHOLD:
                affected = 0
                ratio = np.inf
                for p in range(start, stop):
                    c = step * d_val[p]
                    um = u[d_idx[p]]
                    if um + c <= 0.0:
                        affected += 1
                    if c < 0.0:
                        t = -um / c
                        if t < ratio:
                            ratio = t
                if affected > 0:
                    step *= (1.0 - eps) * ratio
                    counters[RECOVERED] += affected
                    # near-underflow entries can still round to zero; drop the step
                    for p in range(start, stop):
                        if not u[d_idx[p]] + step * d_val[p] > 0.0:
                            step = 0.0
                            break
            for p in range(start, stop):
                u[d_idx[p]] += step * d_val[p]
            for p in range(ad_ptr[j], ad_ptr[j + 1]):
                r[ad_idx[p]] -= step * ad_val[p]
            if mode == LININTERP:
                _lininterp_correct(d_idx[start:stop], u, r, b, x, bc_left, bc_right,
                                   x_left, x_right, row_ptr, row_idx, row_val,
                                   a_ptr, a_idx, counters)
            elif mode == GS:
                _gs_correct(d_idx[start:stop], u, r, b, row_ptr, row_idx, row_val,
                            a_ptr, a_idx, a_diag, counters, cap_factor)
            counters[STEPS] += 1
            if check_positive:
                for p in range(start, stop):
                    if not u[d_idx[p]] > 0.0:
                        counters[VIOLATIONS] += 1
                        break
