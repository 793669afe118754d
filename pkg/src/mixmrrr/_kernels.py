"""Compiled qd-type recurrences.

Two families: ``p_*`` kernels run in a single IEEE format (binary32 or
binary64, chosen by the dtype of the arrays and scalars passed in; callers must
pass every scalar already cast to that dtype so numba does not promote), and
``w_*`` kernels run in double-double on ``(2, n)`` arrays.

Indices are 0-based inside kernels.
"""
import numpy as np
from numba import njit

from .precision import (
    dd_abs,
    dd_add,
    dd_div,
    dd_lt,
    dd_mul,
    dd_mul_d,
    dd_sqrt,
    dd_sub,
)


# ---------------------------------------------------------------------------
# single-format kernels
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def p_ldl(d, e, mu, pivmin):
    n = d.shape[0]
    piv = np.empty_like(d)
    mult = np.zeros(max(n - 1, 0), dtype=d.dtype)
    p = d[0] - mu
    for i in range(n - 1):
        if abs(p) < pivmin:
            p = -pivmin
        piv[i] = p
        li = e[i] / p
        mult[i] = li
        p = (d[i + 1] - mu) - li * e[i]
    if abs(p) < pivmin:
        p = -pivmin
    piv[n - 1] = p
    return piv, mult


@njit(cache=True, nogil=True)
def p_dstqds(d, l, tau, pivmin):
    n = d.shape[0]
    dp = np.empty_like(d)
    lp = np.zeros(max(n - 1, 0), dtype=d.dtype)
    s = -tau
    for i in range(n - 1):
        t = d[i] + s
        if abs(t) < pivmin:
            t = -pivmin
        dp[i] = t
        lp[i] = (d[i] * l[i]) / t
        s = lp[i] * l[i] * s - tau
    t = d[n - 1] + s
    if abs(t) < pivmin:
        t = -pivmin
    dp[n - 1] = t
    return dp, lp


@njit(cache=True, nogil=True)
def p_negcount(d, lld, x, pivmin, huge):
    n = d.shape[0]
    cnt = 0
    s = -x
    for i in range(n - 1):
        t = d[i] + s
        if not abs(t) >= pivmin:
            # zero, tiny or NaN pivot
            t = -pivmin
        if t < 0:
            cnt += 1
        s = (s / t) * lld[i] - x
        if not abs(s) <= huge:
            s = huge if s > 0 else -huge
    t = d[n - 1] + s
    if not abs(t) >= pivmin:
        t = -pivmin
    if t < 0:
        cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def p_bisect(d, lld, idx, lo, hi, rtol2, absfloor, pivmin, huge, half, maxit):
    """Bisect brackets ``lo[j] <= lambda_idx[j] <= hi[j]`` in place.

    ``idx`` holds sorted 1-based eigenvalue indices.  Every count also tightens
    the brackets of the indices still to be processed.
    """
    m = idx.shape[0]
    for j in range(m):
        target = idx[j]
        a = lo[j]
        b = hi[j]
        for _ in range(maxit):
            mx = max(abs(a), abs(b))
            w = b - a
            if w <= rtol2 * mx or w <= absfloor:
                break
            mid = a + (b - a) * half
            if mid <= a or mid >= b:
                break
            c = p_negcount(d, lld, mid, pivmin, huge)
            if c >= target:
                b = mid
            else:
                a = mid
            for q in range(j + 1, m):
                if idx[q] <= c:
                    if mid < hi[q]:
                        hi[q] = mid
                else:
                    if mid > lo[q]:
                        lo[q] = mid
        lo[j] = a
        hi[j] = b


@njit(cache=True, nogil=True)
def p_twisted(d, l, lam, pivmin):
    n = d.shape[0]
    dplus = np.empty_like(d)
    lplus = np.zeros(max(n - 1, 0), dtype=d.dtype)
    splus = np.empty_like(d)
    omega = np.empty_like(d)
    uplus = np.zeros(max(n - 1, 0), dtype=d.dtype)
    pminus = np.empty_like(d)
    gamma = np.empty_like(d)
    # stationary, top down
    s = -lam
    for i in range(n - 1):
        splus[i] = s
        t = d[i] + s
        if abs(t) < pivmin:
            t = -pivmin
        dplus[i] = t
        lplus[i] = (d[i] * l[i]) / t
        s = lplus[i] * l[i] * s - lam
    splus[n - 1] = s
    t = d[n - 1] + s
    if abs(t) < pivmin:
        t = -pivmin
    dplus[n - 1] = t
    # progressive, bottom up
    p = d[n - 1] - lam
    pminus[n - 1] = p
    omega[n - 1] = p
    for i in range(n - 2, -1, -1):
        t = d[i] * l[i] * l[i] + p
        if abs(t) < pivmin:
            t = -pivmin
        omega[i + 1] = t
        r = d[i] / t
        uplus[i] = l[i] * r
        p = p * r - lam
        pminus[i] = p
    omega[0] = pminus[0]
    twist = 0
    best = np.inf
    for k in range(n):
        g = splus[k] + pminus[k] + lam
        gamma[k] = g
        if abs(g) < best:
            best = abs(g)
            twist = k
    return dplus, lplus, omega, uplus, gamma, twist


@njit(cache=True, nogil=True)
def p_solve(lplus, uplus, twist, n):
    z = np.zeros(n)
    z[twist] = 1.0
    for i in range(twist - 1, -1, -1):
        z[i] = -lplus[i] * z[i + 1]
    for i in range(twist, n - 1):
        z[i + 1] = -uplus[i] * z[i]
    return z


# ---------------------------------------------------------------------------
# double-double kernels on (2, n) arrays
# ---------------------------------------------------------------------------


@njit(inline="always", cache=True)
def _repair(th, tl, pivmin):
    ah, al = dd_abs(th, tl)
    if not ah >= pivmin:
        return -pivmin, 0.0
    return th, tl


@njit(cache=True, nogil=True)
def w_ldl(D, E, muh, mul, pivmin):
    n = D.shape[1]
    piv = np.zeros((2, n))
    mult = np.zeros((2, max(n - 1, 0)))
    ph, pl = dd_sub(D[0, 0], D[1, 0], muh, mul)
    for i in range(n - 1):
        ph, pl = _repair(ph, pl, pivmin)
        piv[0, i] = ph
        piv[1, i] = pl
        lh, ll = dd_div(E[0, i], E[1, i], ph, pl)
        mult[0, i] = lh
        mult[1, i] = ll
        ah, al = dd_sub(D[0, i + 1], D[1, i + 1], muh, mul)
        bh, bl = dd_mul(lh, ll, E[0, i], E[1, i])
        ph, pl = dd_sub(ah, al, bh, bl)
    ph, pl = _repair(ph, pl, pivmin)
    piv[0, n - 1] = ph
    piv[1, n - 1] = pl
    return piv, mult


@njit(cache=True, nogil=True)
def w_dstqds(D, L, th, tl, pivmin):
    n = D.shape[1]
    dp = np.zeros((2, n))
    lp = np.zeros((2, max(n - 1, 0)))
    sh, sl = -th, -tl
    for i in range(n - 1):
        ah, al = dd_add(D[0, i], D[1, i], sh, sl)
        ah, al = _repair(ah, al, pivmin)
        dp[0, i] = ah
        dp[1, i] = al
        ldh, ldl = dd_mul(D[0, i], D[1, i], L[0, i], L[1, i])
        qh, ql = dd_div(ldh, ldl, ah, al)
        lp[0, i] = qh
        lp[1, i] = ql
        xh, xl = dd_mul(qh, ql, L[0, i], L[1, i])
        xh, xl = dd_mul(xh, xl, sh, sl)
        sh, sl = dd_sub(xh, xl, th, tl)
    ah, al = dd_add(D[0, n - 1], D[1, n - 1], sh, sl)
    ah, al = _repair(ah, al, pivmin)
    dp[0, n - 1] = ah
    dp[1, n - 1] = al
    return dp, lp


@njit(cache=True, nogil=True)
def w_lld(D, L):
    n = D.shape[1]
    out = np.zeros((2, max(n - 1, 0)))
    for i in range(n - 1):
        ah, al = dd_mul(D[0, i], D[1, i], L[0, i], L[1, i])
        ah, al = dd_mul(ah, al, L[0, i], L[1, i])
        out[0, i] = ah
        out[1, i] = al
    return out


@njit(cache=True, nogil=True)
def w_negcount(D, LLD, xh, xl, pivmin):
    n = D.shape[1]
    cnt = 0
    sh, sl = -xh, -xl
    huge = 1e250
    for i in range(n - 1):
        th, tl = dd_add(D[0, i], D[1, i], sh, sl)
        th, tl = _repair(th, tl, pivmin)
        if th < 0.0:
            cnt += 1
        qh, ql = dd_div(sh, sl, th, tl)
        qh, ql = dd_mul(qh, ql, LLD[0, i], LLD[1, i])
        sh, sl = dd_sub(qh, ql, xh, xl)
        if not abs(sh) <= huge:
            sh = huge if sh > 0 else -huge
            sl = 0.0
    th, tl = dd_add(D[0, n - 1], D[1, n - 1], sh, sl)
    th, tl = _repair(th, tl, pivmin)
    if th < 0.0:
        cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def w_bisect(D, LLD, idx, LO, HI, rtol2, absfloor, pivmin, maxit):
    """Double-double twin of :func:`p_bisect`; LO, HI are (2, m) arrays."""
    m = idx.shape[0]
    for j in range(m):
        target = idx[j]
        ah, al = LO[0, j], LO[1, j]
        bh, bl = HI[0, j], HI[1, j]
        for _ in range(maxit):
            wh, wl = dd_sub(bh, bl, ah, al)
            mx = max(abs(ah), abs(bh))
            if wh <= rtol2 * mx or wh <= absfloor:
                break
            mh, ml = dd_add(ah, al, bh, bl)
            mh *= 0.5
            ml *= 0.5
            if not (dd_lt(ah, al, mh, ml) and dd_lt(mh, ml, bh, bl)):
                break
            c = w_negcount(D, LLD, mh, ml, pivmin)
            if c >= target:
                bh, bl = mh, ml
            else:
                ah, al = mh, ml
            for q in range(j + 1, m):
                if idx[q] <= c:
                    if dd_lt(mh, ml, HI[0, q], HI[1, q]):
                        HI[0, q] = mh
                        HI[1, q] = ml
                else:
                    if dd_lt(LO[0, q], LO[1, q], mh, ml):
                        LO[0, q] = mh
                        LO[1, q] = ml
        LO[0, j] = ah
        LO[1, j] = al
        HI[0, j] = bh
        HI[1, j] = bl


@njit(cache=True, nogil=True)
def w_twisted(D, L, lamh, laml, pivmin):
    n = D.shape[1]
    dplus = np.zeros((2, n))
    lplus = np.zeros((2, max(n - 1, 0)))
    splus = np.zeros((2, n))
    omega = np.zeros((2, n))
    uplus = np.zeros((2, max(n - 1, 0)))
    pminus = np.zeros((2, n))
    gamma = np.zeros((2, n))
    sh, sl = -lamh, -laml
    for i in range(n - 1):
        splus[0, i] = sh
        splus[1, i] = sl
        th, tl = dd_add(D[0, i], D[1, i], sh, sl)
        th, tl = _repair(th, tl, pivmin)
        dplus[0, i] = th
        dplus[1, i] = tl
        ldh, ldl = dd_mul(D[0, i], D[1, i], L[0, i], L[1, i])
        qh, ql = dd_div(ldh, ldl, th, tl)
        lplus[0, i] = qh
        lplus[1, i] = ql
        xh, xl = dd_mul(qh, ql, L[0, i], L[1, i])
        xh, xl = dd_mul(xh, xl, sh, sl)
        sh, sl = dd_sub(xh, xl, lamh, laml)
    splus[0, n - 1] = sh
    splus[1, n - 1] = sl
    th, tl = dd_add(D[0, n - 1], D[1, n - 1], sh, sl)
    th, tl = _repair(th, tl, pivmin)
    dplus[0, n - 1] = th
    dplus[1, n - 1] = tl

    ph, pl = dd_sub(D[0, n - 1], D[1, n - 1], lamh, laml)
    pminus[0, n - 1] = ph
    pminus[1, n - 1] = pl
    omega[0, n - 1] = ph
    omega[1, n - 1] = pl
    for i in range(n - 2, -1, -1):
        ldh, ldl = dd_mul(D[0, i], D[1, i], L[0, i], L[1, i])
        llh, lll = dd_mul(ldh, ldl, L[0, i], L[1, i])
        th, tl = dd_add(llh, lll, ph, pl)
        th, tl = _repair(th, tl, pivmin)
        omega[0, i + 1] = th
        omega[1, i + 1] = tl
        rh, rl = dd_div(D[0, i], D[1, i], th, tl)
        uh, ul = dd_mul(L[0, i], L[1, i], rh, rl)
        uplus[0, i] = uh
        uplus[1, i] = ul
        xh, xl = dd_mul(ph, pl, rh, rl)
        ph, pl = dd_sub(xh, xl, lamh, laml)
        pminus[0, i] = ph
        pminus[1, i] = pl
    omega[0, 0] = pminus[0, 0]
    omega[1, 0] = pminus[1, 0]
    twist = 0
    bh, bl = np.inf, 0.0
    for k in range(n):
        gh, gl = dd_add(splus[0, k], splus[1, k], pminus[0, k], pminus[1, k])
        gh, gl = dd_add(gh, gl, lamh, laml)
        gamma[0, k] = gh
        gamma[1, k] = gl
        ah, al = dd_abs(gh, gl)
        if dd_lt(ah, al, bh, bl):
            bh, bl = ah, al
            twist = k
    return dplus, lplus, omega, uplus, gamma, twist


@njit(cache=True, nogil=True)
def w_solve(LP, UP, twist, n):
    z = np.zeros((2, n))
    z[0, twist] = 1.0
    for i in range(twist - 1, -1, -1):
        h, l = dd_mul(LP[0, i], LP[1, i], z[0, i + 1], z[1, i + 1])
        z[0, i] = -h
        z[1, i] = -l
    for i in range(twist, n - 1):
        h, l = dd_mul(UP[0, i], UP[1, i], z[0, i], z[1, i])
        z[0, i + 1] = -h
        z[1, i + 1] = -l
    return z


@njit(cache=True, nogil=True)
def w_norm2(Z):
    sh, sl = 0.0, 0.0
    for i in range(Z.shape[1]):
        ph, pl = dd_mul(Z[0, i], Z[1, i], Z[0, i], Z[1, i])
        sh, sl = dd_add(sh, sl, ph, pl)
    return sh, sl


@njit(cache=True, nogil=True)
def w_scale(Z, sh, sl):
    out = np.zeros_like(Z)
    for i in range(Z.shape[1]):
        h, l = dd_mul(Z[0, i], Z[1, i], sh, sl)
        out[0, i] = h
        out[1, i] = l
    return out


@njit(cache=True, nogil=True)
def w_normalize(Z):
    sh, sl = w_norm2(Z)
    nh, nl = dd_sqrt(sh, sl)
    ih, il = dd_div(1.0, 0.0, nh, nl)
    return w_scale(Z, ih, il), nh, nl


@njit(cache=True, nogil=True)
def w_tridiag_residual(d, e, lam_h, lam_l, Z):
    """1-norm of T z - lam z in double-double for binary64 T and z."""
    n = d.shape[0]
    acc_h, acc_l = 0.0, 0.0
    for i in range(n):
        rh, rl = dd_mul_d(lam_h, lam_l, Z[i])
        rh, rl = -rh, -rl
        ph, pl = dd_mul_d(d[i], 0.0, Z[i])
        rh, rl = dd_add(rh, rl, ph, pl)
        if i > 0:
            ph, pl = dd_mul_d(e[i - 1], 0.0, Z[i - 1])
            rh, rl = dd_add(rh, rl, ph, pl)
        if i < n - 1:
            ph, pl = dd_mul_d(e[i], 0.0, Z[i + 1])
            rh, rl = dd_add(rh, rl, ph, pl)
        ah, al = dd_abs(rh, rl)
        acc_h, acc_l = dd_add(acc_h, acc_l, ah, al)
    return acc_h + acc_l


@njit(cache=True, nogil=True)
def max_abs_gram_offdiag(Z):
    """max_{i != j} |z_i . z_j| for binary64 columns, dot products in double-double."""
    n, k = Z.shape
    ZT = np.ascontiguousarray(Z.T)
    best = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            sh, sl = 0.0, 0.0
            for r in range(n):
                ph, pl = dd_mul_d(ZT[i, r], 0.0, ZT[j, r])
                sh, sl = dd_add(sh, sl, ph, pl)
            v = abs(sh + sl)
            if v > best:
                best = v
    return best


@njit(cache=True, nogil=True)
def w_gershgorin(D, E):
    """Outward-rounded Gershgorin enclosure of a tridiagonal given as (2, n) arrays."""
    n = D.shape[1]
    gl = np.inf
    gu = -np.inf
    for i in range(n):
        rh, rl = 0.0, 0.0
        if i > 0:
            ah, al = dd_abs(E[0, i - 1], E[1, i - 1])
            rh, rl = dd_add(rh, rl, ah, al)
        if i < n - 1:
            ah, al = dd_abs(E[0, i], E[1, i])
            rh, rl = dd_add(rh, rl, ah, al)
        lh, ll = dd_sub(D[0, i], D[1, i], rh, rl)
        uh, ul = dd_add(D[0, i], D[1, i], rh, rl)
        lo = lh if ll >= 0.0 else np.nextafter(lh, -np.inf)
        hi = uh if ul <= 0.0 else np.nextafter(uh, np.inf)
        if lo < gl:
            gl = lo
        if hi > gu:
            gu = hi
    return gl, gu


@njit(cache=True, nogil=True)
def w_reconstruct(D, L):
    n = D.shape[1]
    diag = np.zeros((2, n))
    off = np.zeros((2, max(n - 1, 0)))
    diag[0, 0] = D[0, 0]
    diag[1, 0] = D[1, 0]
    for i in range(n - 1):
        eh, el = dd_mul(D[0, i], D[1, i], L[0, i], L[1, i])
        off[0, i] = eh
        off[1, i] = el
        xh, xl = dd_mul(eh, el, L[0, i], L[1, i])
        xh, xl = dd_add(D[0, i + 1], D[1, i + 1], xh, xl)
        diag[0, i + 1] = xh
        diag[1, i + 1] = xl
    return diag, off


@njit(cache=True, nogil=True)
def w_mul_elem(X, f):
    """Elementwise ``X[:, i] * f[i]`` for a wide array and binary64 factors."""
    out = np.zeros_like(X)
    for i in range(X.shape[1]):
        h, l = dd_mul_d(X[0, i], X[1, i], f[i])
        out[0, i] = h
        out[1, i] = l
    return out


@njit(cache=True, nogil=True)
def w_jacobi(A, tol2, max_sweeps):
    """Cyclic Jacobi on a dense symmetric double-double matrix ``A`` of shape (2, n, n).

    Works in place on ``A``; returns eigenvectors as (2, n, n) (columns) and
    the number of sweeps used.  Stops once the squared off-diagonal Frobenius
    norm falls to ``tol2``.
    """
    n = A.shape[1]
    V = np.zeros((2, n, n))
    for i in range(n):
        V[0, i, i] = 1.0
    sweeps = 0
    for sweep in range(max_sweeps):
        off_h, off_l = 0.0, 0.0
        for p in range(n):
            for q in range(p + 1, n):
                ph, pl = dd_mul(A[0, p, q], A[1, p, q], A[0, p, q], A[1, p, q])
                off_h, off_l = dd_add(off_h, off_l, ph, pl)
        if 2.0 * off_h <= tol2:
            break
        sweeps = sweep + 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                aph, apl = A[0, p, q], A[1, p, q]
                if aph == 0.0 and apl == 0.0:
                    continue
                # theta = (a_qq - a_pp) / (2 a_pq)
                nh, nl = dd_sub(A[0, q, q], A[1, q, q], A[0, p, p], A[1, p, p])
                th, tl = dd_div(nh, nl, 2.0 * aph, 2.0 * apl)
                if not np.isfinite(th):
                    t_h, t_l = 0.0, 0.0
                elif abs(th) > 1.152921504606847e18:
                    # t = 1/(2 theta) to relative 2^-120; avoids overflow in theta^2
                    t_h, t_l = dd_div(0.5, 0.0, th, tl)
                else:
                    ah, al = dd_abs(th, tl)
                    sh, sl = dd_mul(th, tl, th, tl)
                    sh, sl = dd_add(sh, sl, 1.0, 0.0)
                    sh, sl = dd_sqrt(sh, sl)
                    dh, dl = dd_add(ah, al, sh, sl)
                    t_h, t_l = dd_div(1.0, 0.0, dh, dl)
                    if th < 0.0:
                        t_h, t_l = -t_h, -t_l
                ch, cl = dd_mul(t_h, t_l, t_h, t_l)
                ch, cl = dd_add(ch, cl, 1.0, 0.0)
                ch, cl = dd_sqrt(ch, cl)
                ch, cl = dd_div(1.0, 0.0, ch, cl)
                s_h, s_l = dd_mul(t_h, t_l, ch, cl)
                xh, xl = dd_mul(t_h, t_l, aph, apl)
                A[0, p, p], A[1, p, p] = dd_sub(A[0, p, p], A[1, p, p], xh, xl)
                A[0, q, q], A[1, q, q] = dd_add(A[0, q, q], A[1, q, q], xh, xl)
                A[0, p, q], A[1, p, q] = 0.0, 0.0
                A[0, q, p], A[1, q, p] = 0.0, 0.0
                for r in range(n):
                    if r != p and r != q:
                        uh, ul = A[0, r, p], A[1, r, p]
                        wh, wl = A[0, r, q], A[1, r, q]
                        x1h, x1l = dd_mul(ch, cl, uh, ul)
                        x2h, x2l = dd_mul(s_h, s_l, wh, wl)
                        nph, npl = dd_sub(x1h, x1l, x2h, x2l)
                        x1h, x1l = dd_mul(s_h, s_l, uh, ul)
                        x2h, x2l = dd_mul(ch, cl, wh, wl)
                        nqh, nql = dd_add(x1h, x1l, x2h, x2l)
                        A[0, r, p], A[1, r, p] = nph, npl
                        A[0, p, r], A[1, p, r] = nph, npl
                        A[0, r, q], A[1, r, q] = nqh, nql
                        A[0, q, r], A[1, q, r] = nqh, nql
                    uh, ul = V[0, r, p], V[1, r, p]
                    wh, wl = V[0, r, q], V[1, r, q]
                    x1h, x1l = dd_mul(ch, cl, uh, ul)
                    x2h, x2l = dd_mul(s_h, s_l, wh, wl)
                    V[0, r, p], V[1, r, p] = dd_sub(x1h, x1l, x2h, x2l)
                    x1h, x1l = dd_mul(s_h, s_l, uh, ul)
                    x2h, x2l = dd_mul(ch, cl, wh, wl)
                    V[0, r, q], V[1, r, q] = dd_add(x1h, x1l, x2h, x2l)
    return V, sweeps


@njit(cache=True, nogil=True)
def w_arrowhead_tridiag(lam, q):
    """Jacobi matrix with eigenvalues ``lam`` and eigenvector leading entries ~ ``q``.

    Nodes are inserted one at a time next to a border row and the resulting
    bulge is chased off the end with Givens rotations, all in double-double.
    Returns the (2, n) diagonal and (2, n - 1) off-diagonal.
    """
    n = lam.shape[0]
    A = np.zeros((2, n + 1))  # A[:, 0] is the border
    B = np.zeros((2, n + 1))  # B[:, i] couples i and i + 1
    m = 0  # index of the last active node
    for k in range(n):
        # shift nodes 1..m up by one and insert the new node at position 1
        for i in range(m, 0, -1):
            A[0, i + 1] = A[0, i]
            A[1, i + 1] = A[1, i]
        for i in range(m - 1, 0, -1):
            B[0, i + 1] = B[0, i]
            B[1, i + 1] = B[1, i]
        gh, gl = B[0, 0], B[1, 0]  # old border coupling becomes the bulge at (0, 2)
        A[0, 1], A[1, 1] = lam[k], 0.0
        B[0, 0], B[1, 0] = q[k], 0.0
        B[0, 1], B[1, 1] = 0.0, 0.0
        m += 1
        p = 0
        while p + 2 <= m and (gh != 0.0 or gl != 0.0):
            bh, bl = B[0, p], B[1, p]
            rh, rl = dd_mul(bh, bl, bh, bl)
            th, tl = dd_mul(gh, gl, gh, gl)
            rh, rl = dd_add(rh, rl, th, tl)
            rh, rl = dd_sqrt(rh, rl)
            ch, cl = dd_div(bh, bl, rh, rl)
            sh, sl = dd_div(gh, gl, rh, rl)
            B[0, p], B[1, p] = rh, rl
            i = p + 1
            j = p + 2
            aih, ail = A[0, i], A[1, i]
            ajh, ajl = A[0, j], A[1, j]
            bih, bil = B[0, i], B[1, i]
            c2h, c2l = dd_mul(ch, cl, ch, cl)
            s2h, s2l = dd_mul(sh, sl, sh, sl)
            csh, csl = dd_mul(ch, cl, sh, sl)
            x1h, x1l = dd_mul(c2h, c2l, aih, ail)
            x2h, x2l = dd_mul(s2h, s2l, ajh, ajl)
            x3h, x3l = dd_mul(csh, csl, bih, bil)
            x3h, x3l = 2.0 * x3h, 2.0 * x3l
            nih, nil_ = dd_add(x1h, x1l, x2h, x2l)
            nih, nil_ = dd_add(nih, nil_, x3h, x3l)
            y1h, y1l = dd_mul(s2h, s2l, aih, ail)
            y2h, y2l = dd_mul(c2h, c2l, ajh, ajl)
            njh, njl = dd_add(y1h, y1l, y2h, y2l)
            njh, njl = dd_sub(njh, njl, x3h, x3l)
            dh, dl = dd_sub(ajh, ajl, aih, ail)
            z1h, z1l = dd_mul(csh, csl, dh, dl)
            d2h, d2l = dd_sub(c2h, c2l, s2h, s2l)
            z2h, z2l = dd_mul(d2h, d2l, bih, bil)
            nbh, nbl = dd_add(z1h, z1l, z2h, z2l)
            A[0, i], A[1, i] = nih, nil_
            A[0, j], A[1, j] = njh, njl
            B[0, i], B[1, i] = nbh, nbl
            if j + 1 <= m:
                bjh, bjl = B[0, j], B[1, j]
                gh, gl = dd_mul(sh, sl, bjh, bjl)
                B[0, j], B[1, j] = dd_mul(ch, cl, bjh, bjl)
            else:
                gh, gl = 0.0, 0.0
            p += 1
    D = np.zeros((2, n))
    E = np.zeros((2, max(n - 1, 0)))
    for i in range(n):
        D[0, i], D[1, i] = A[0, i + 1], A[1, i + 1]
    for i in range(n - 1):
        E[0, i], E[1, i] = B[0, i + 1], B[1, i + 1]
    return D, E
