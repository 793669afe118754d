"""qd-type transforms: shifting, twisted factorizations, Sturm counts, twisted solves."""
from __future__ import annotations

import numpy as np

from . import _kernels as K
from .precision import Wide, widen_array
from .tridiag import BidiagRep, TwistedRep

NARROW = "narrow"
WIDE = "wide"


def _as_wide(x, rep: BidiagRep) -> Wide:
    return x if isinstance(x, Wide) else Wide(float(x), 0.0, rep.mode)


def dstqds(rep: BidiagRep, tau) -> BidiagRep:
    """Factorization of ``L D L^T - tau I`` by the stationary qd transform."""
    tau = _as_wide(tau, rep)
    if rep.mode.is_pair:
        dp, lp = K.w_dstqds(rep.pivots, rep.mult, tau.hi, tau.lo, rep.pivmin)
    else:
        p, m = K.p_dstqds(rep.pivots[0], rep.mult[0], tau.hi, rep.pivmin)
        dp, lp = widen_array(p), widen_array(m)
    return BidiagRep(dp, lp, rep.sigma + tau, rep.depth + 1, rep.mode, rep.pivmin, rep.offset)


def twisted_factorize(rep: BidiagRep, lam) -> TwistedRep:
    """All twisted factorizations of ``rep - lam I``; keeps the one with smallest |gamma_k|."""
    lam = _as_wide(lam, rep)
    n = rep.n
    if rep.mode.is_pair:
        dplus, lplus, omega, uplus, gam, k = K.w_twisted(rep.pivots, rep.mult, lam.hi, lam.lo, rep.pivmin)
    else:
        out = K.p_twisted(rep.pivots[0], rep.mult[0], lam.hi, rep.pivmin)
        dplus, lplus, omega, uplus, gam = (widen_array(a) for a in out[:5])
        k = out[5]
    gamma = Wide(gam[0, k], gam[1, k], rep.mode)
    return TwistedRep(
        n=n,
        twist=int(k) + 1,
        dplus=dplus[:, :k],
        gamma=gamma,
        omega=omega[:, k + 1 :],
        lplus=lplus[:, :k],
        uplus=uplus[:, k:],
        gammas=gam,
        lam=lam,
        mode=rep.mode,
    )


def solve_twisted(tw: TwistedRep) -> np.ndarray:
    """Solve ``N_k^T z = e_k``; returns the unnormalized wide vector, z_k = 1."""
    k = tw.twist - 1
    n = tw.n
    # re-embed the stored slices into full-length multiplier arrays
    lp = np.zeros((2, max(n - 1, 0)))
    up = np.zeros((2, max(n - 1, 0)))
    lp[:, :k] = tw.lplus
    up[:, k:] = tw.uplus
    if tw.mode.is_pair:
        return K.w_solve(lp, up, k, n)
    return widen_array(K.p_solve(lp[0], up[0], k, n))


def sturm_count(rep: BidiagRep, x, arithmetic: str = WIDE) -> int:
    """Number of eigenvalues of the represented matrix below ``x``."""
    x = _as_wide(x, rep)
    if arithmetic == NARROW:
        d, _, lld = rep.narrow_copy
        dt = d.dtype.type
        huge = dt(np.finfo(d.dtype).max / 16)
        return int(K.p_negcount(d, lld, dt(x.hi + x.lo), dt(rep.pivmin), huge))
    if arithmetic != WIDE:
        raise ValueError(f"unknown arithmetic {arithmetic!r}")
    if rep.mode.is_pair:
        return int(K.w_negcount(rep.pivots, rep.lld, x.hi, x.lo, rep.pivmin))
    return int(K.p_negcount(rep.pivots[0], rep.lld[0], x.hi, rep.pivmin, 1e300))
