"""Bisection for eigenvalue enclosures, in narrow or wide counting arithmetic."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .precision import Wide
from .transforms import NARROW, WIDE, sturm_count
from .tridiag import BidiagRep, gershgorin_bounds, reconstruct_entries

MAXIT = 400


@dataclass(frozen=True)
class EigInterval:
    """Certified enclosure ``lo <= lambda_index <= hi`` (index is 1-based)."""

    index: int
    lo: Wide
    hi: Wide

    @property
    def mid(self) -> Wide:
        return (self.lo + self.hi) * 0.5

    @property
    def width(self) -> float:
        return float(self.hi - self.lo)

    def shifted(self, tau: Wide) -> "EigInterval":
        return EigInterval(self.index, self.lo - tau, self.hi - tau)


def choose_arithmetic(rtol: float, n: int, mode) -> str:
    """Narrow counting is accurate enough when rtol >= 40 n eps_narrow."""
    return NARROW if rtol >= 40.0 * n * mode.eps_narrow else WIDE


def rep_enclosure(rep: BidiagRep) -> tuple[float, float]:
    gl, gu = gershgorin_bounds(reconstruct_entries(rep))
    return gl, gu


def _certified_enclosure(rep: BidiagRep, arithmetic: str) -> tuple[float, float]:
    gl, gu = rep_enclosure(rep)
    pad = max(abs(gl), abs(gu), 1e-300) * 4 * rep.mode.eps_narrow
    lo, hi = gl - pad, gu + pad
    for _ in range(200):
        if sturm_count(rep, lo, arithmetic) == 0:
            break
        lo -= pad
        pad *= 2
    for _ in range(200):
        if sturm_count(rep, hi, arithmetic) == rep.n:
            break
        hi += pad
        pad *= 2
    return lo, hi


def _absfloor(rep: BidiagRep) -> float:
    # definite and relatively robust reps determine tiny eigenvalues to high
    # relative accuracy, so the absolute floor only guards exact zeros
    return 4.0 * rep.pivmin


def _run(rep: BidiagRep, idx: np.ndarray, lo_w: np.ndarray, hi_w: np.ndarray, rtol: float,
         arithmetic: str, absfloor: float) -> None:
    """Bisect in place on (2, m) endpoint arrays."""
    mode = rep.mode
    rtol2 = rtol  # kernels stop at width <= rtol2 * max|end|
    if arithmetic == NARROW:
        d, _, lld = rep.narrow_copy
        dt = d.dtype.type
        # round brackets outward into the narrow format
        lo = (lo_w[0] + lo_w[1]).astype(d.dtype)
        hi = (hi_w[0] + hi_w[1]).astype(d.dtype)
        lo = np.where(lo.astype(np.float64) > lo_w[0], np.nextafter(lo, dt(-np.inf)), lo)
        hi = np.where(hi.astype(np.float64) < hi_w[0], np.nextafter(hi, dt(np.inf)), hi)
        huge = dt(np.finfo(d.dtype).max / 16)
        K.p_bisect(d, lld, idx, lo, hi, dt(rtol2), dt(absfloor), dt(rep.pivmin), huge, dt(0.5), MAXIT)
        lo_w[0], lo_w[1] = lo.astype(np.float64), 0.0
        hi_w[0], hi_w[1] = hi.astype(np.float64), 0.0
    elif mode.is_pair:
        K.w_bisect(rep.pivots, rep.lld, idx, lo_w, hi_w, rtol2, absfloor, rep.pivmin, MAXIT)
    else:
        lo, hi = lo_w[0].copy(), hi_w[0].copy()
        K.p_bisect(rep.pivots[0], rep.lld[0], idx, lo, hi, rtol2, absfloor, rep.pivmin, 1e300, 0.5, MAXIT)
        lo_w[0], hi_w[0] = lo, hi


def _to_intervals(idx, lo_w, hi_w, mode) -> list[EigInterval]:
    return [
        EigInterval(int(i), Wide(lo_w[0, j], lo_w[1, j], mode), Wide(hi_w[0, j], hi_w[1, j], mode))
        for j, i in enumerate(idx)
    ]


def bisect_eigenvalues(rep: BidiagRep, indices, rtol: float, arithmetic: str = WIDE) -> list[EigInterval]:
    """Enclose the eigenvalues with the given 1-based indices to relative width ~rtol."""
    idx = np.array(sorted(set(int(i) for i in indices)), dtype=np.int64)
    if idx.size == 0:
        return []
    if idx[0] < 1 or idx[-1] > rep.n:
        raise ValueError("eigenvalue index out of range")
    eps = rep.mode.eps_narrow if arithmetic == NARROW else rep.mode.eps_wide
    rtol = max(rtol, 4 * eps)
    lo, hi = _certified_enclosure(rep, arithmetic)
    m = idx.size
    lo_w = np.zeros((2, m))
    hi_w = np.zeros((2, m))
    lo_w[0] = lo
    hi_w[0] = hi
    _run(rep, idx, lo_w, hi_w, rtol, arithmetic, _absfloor(rep))
    return _to_intervals(idx, lo_w, hi_w, rep.mode)


def certify(rep: BidiagRep, iv: EigInterval, arithmetic: str = WIDE) -> bool:
    return sturm_count(rep, iv.lo, arithmetic) < iv.index <= sturm_count(rep, iv.hi, arithmetic)


def refine_intervals(rep: BidiagRep, intervals, rtol: float, arithmetic: str = WIDE,
                     stats=None) -> list[EigInterval]:
    """Shrink given enclosures to relative width ~rtol, re-certifying them first.

    An enclosure that no longer brackets its eigenvalue (e.g. after a shift) is
    widened, and as a last resort replaced by the full spectrum enclosure; each
    such event is counted in ``stats.recertifications``.
    """
    intervals = sorted(intervals, key=lambda iv: iv.index)
    if not intervals:
        return []
    eps = rep.mode.eps_narrow if arithmetic == NARROW else rep.mode.eps_wide
    rtol = max(rtol, 4 * eps)
    fixed = []
    enclosure = None
    for iv in intervals:
        if certify(rep, iv, arithmetic):
            fixed.append(iv)
            continue
        if stats is not None:
            stats.recertifications += 1
        lo, hi = iv.lo, iv.hi
        pad = max(iv.width, float(abs(iv.mid)) * rep.mode.eps_narrow, 1e-300)
        ok = False
        for _ in range(8):
            lo, hi = lo - pad, hi + pad
            cand = EigInterval(iv.index, lo, hi)
            if certify(rep, cand, arithmetic):
                fixed.append(cand)
                ok = True
                break
            pad *= 4
        if not ok:
            if enclosure is None:
                enclosure = _certified_enclosure(rep, arithmetic)
            w = Wide(enclosure[0], 0.0, rep.mode), Wide(enclosure[1], 0.0, rep.mode)
            fixed.append(EigInterval(iv.index, w[0], w[1]))
    idx = np.array([iv.index for iv in fixed], dtype=np.int64)
    lo_w = np.array([[iv.lo.hi for iv in fixed], [iv.lo.lo for iv in fixed]])
    hi_w = np.array([[iv.hi.hi for iv in fixed], [iv.hi.lo for iv in fixed]])
    _run(rep, idx, lo_w, hi_w, rtol, arithmetic, _absfloor(rep))
    out = _to_intervals(idx, lo_w, hi_w, rep.mode)
    # output never wider than input
    return [new if new.width <= old.width else old for new, old in zip(out, fixed)]


def locate(rep: BidiagRep, indices, rtol: float, stats=None) -> list[EigInterval]:
    """Enclosures to relative width ``rtol``: narrow counting first, then wide refinement.

    Narrow counts are cheap but only accurate to about ``40 n eps_narrow``;
    when ``rtol`` is tighter the narrow result is re-certified and refined in
    wide arithmetic.
    """
    arithmetic = choose_arithmetic(rtol, rep.n, rep.mode)
    if arithmetic == NARROW:
        return bisect_eigenvalues(rep, indices, rtol, NARROW)
    coarse = bisect_eigenvalues(rep, indices, 40.0 * rep.n * rep.mode.eps_narrow, NARROW)
    return refine_intervals(rep, coarse, rtol, WIDE, stats)
