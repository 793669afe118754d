"""Matrix and representation types plus elementary structural operations."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels as K
from .precision import DOUBLE_QUAD, PrecisionMode, Wide, narrow_array, widen_array


@dataclass(frozen=True)
class SymTridiag:
    """Symmetric tridiagonal matrix.

    ``d`` and ``e`` are either 1-D narrow arrays or ``(2, n)`` wide arrays.
    """

    d: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d)
        e = np.asarray(self.e)
        if d.ndim == 1:
            if d.shape[0] < 1:
                raise ValueError("a tridiagonal needs n >= 1")
            if e.shape != (d.shape[0] - 1,):
                raise ValueError("off-diagonal must have n - 1 entries")
        elif d.ndim == 2:
            if e.shape != (2, d.shape[1] - 1):
                raise ValueError("off-diagonal must have n - 1 entries")
        else:
            raise ValueError("diagonal must be 1-D or (2, n)")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("tridiagonal entries must be finite")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "e", e)

    @property
    def n(self) -> int:
        return self.d.shape[-1]

    @property
    def is_wide(self) -> bool:
        return self.d.ndim == 2

    def wide_entries(self) -> tuple[np.ndarray, np.ndarray]:
        if self.is_wide:
            return self.d, self.e
        return widen_array(self.d), widen_array(self.e)

    def narrowed(self, mode: PrecisionMode) -> "SymTridiag":
        D, E = self.wide_entries()
        return SymTridiag(narrow_array(D, mode), narrow_array(E, mode))

    def as_float64(self) -> tuple[np.ndarray, np.ndarray]:
        D, E = self.wide_entries()
        return D[0] + D[1], E[0] + E[1]

    def norm1(self) -> float:
        d, e = self.as_float64()
        col = np.abs(d)
        if self.n > 1:
            col[:-1] += np.abs(e)
            col[1:] += np.abs(e)
        return float(col.max())

    def dense(self) -> np.ndarray:
        d, e = self.as_float64()
        return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)

    @classmethod
    def one_two_one(cls, n: int, dtype=np.float64) -> "SymTridiag":
        return cls(np.full(n, 2.0, dtype=dtype), np.full(n - 1, 1.0, dtype=dtype))

    @classmethod
    def kac(cls, n: int, dtype=np.float64) -> "SymTridiag":
        i = np.arange(1, n, dtype=np.float64)
        return cls(np.zeros(n, dtype=dtype), np.sqrt(i * (n - i)).astype(dtype))


def pivmin_for(norm: float, mode: PrecisionMode) -> float:
    # pivots below this are treated as exact zeros and repaired
    return mode.eps_wide**2 * max(norm, 1.0)


@dataclass(eq=False)
class BidiagRep:
    """N-representation of ``L D L^T = (root block) - sigma I``."""

    pivots: np.ndarray  # (2, n)
    mult: np.ndarray  # (2, n - 1)
    sigma: Wide
    depth: int
    mode: PrecisionMode
    pivmin: float
    offset: int = field(default=0)

    @property
    def n(self) -> int:
        return self.pivots.shape[1]

    @cached_property
    def lld(self) -> np.ndarray:
        if self.mode.is_pair:
            return K.w_lld(self.pivots, self.mult)
        d, l = self.pivots[0], self.mult[0]
        out = np.zeros((2, self.n - 1))
        out[0] = d[:-1] * l * l
        return out

    @cached_property
    def narrow_copy(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Narrow pivots, multipliers and d*l*l evaluated in narrow arithmetic."""
        dt = self.mode.narrow_dtype
        d = narrow_array(self.pivots, self.mode)
        l = narrow_array(self.mult, self.mode)
        lld = (d[:-1] * l * l).astype(dt)
        return d, l, lld

    def pivot(self, i: int) -> Wide:
        return Wide(self.pivots[0, i], self.pivots[1, i], self.mode)


@dataclass(frozen=True, eq=False)
class TwistedRep:
    """Twisted factorization ``N_k Delta_k N_k^T`` of ``rep - lam I``.

    ``twist`` is 1-based.  ``gammas`` keeps every candidate twist element.
    """

    n: int
    twist: int
    dplus: np.ndarray
    gamma: Wide
    omega: np.ndarray
    lplus: np.ndarray
    uplus: np.ndarray
    gammas: np.ndarray
    lam: Wide
    mode: PrecisionMode


@dataclass(frozen=True, eq=False)
class EigenPair:
    index: int
    lam: object
    z: np.ndarray


def gershgorin_bounds(T: SymTridiag) -> tuple[float, float]:
    """Outward-rounded enclosure ``[gl, gu]`` of the spectrum of T."""
    D, E = T.wide_entries()
    gl, gu = K.w_gershgorin(np.ascontiguousarray(D), np.ascontiguousarray(E))
    return float(gl), float(gu)


def ldl_factorize(T: SymTridiag, mu, mode: PrecisionMode = DOUBLE_QUAD, pivmin=None) -> BidiagRep:
    """Factor ``T - mu I = L D L^T`` in wide arithmetic."""
    D, E = T.wide_entries()
    mu = mu if isinstance(mu, Wide) else Wide(mu, 0.0, mode)
    if pivmin is None:
        pivmin = pivmin_for(T.norm1(), mode)
    if mode.is_pair:
        piv, mult = K.w_ldl(D, E, mu.hi, mu.lo, pivmin)
    else:
        p, m = K.p_ldl(D[0] + D[1], E[0] + E[1], mu.hi, pivmin)
        piv, mult = widen_array(p), widen_array(m)
    return BidiagRep(piv, mult, mu, 0, mode, pivmin)


def reconstruct_entries(rep: BidiagRep) -> SymTridiag:
    """Entries of ``L D L^T``: diagonal d_i + l_{i-1}^2 d_{i-1}, off-diagonal d_i l_i."""
    if rep.mode.is_pair:
        diag, off = K.w_reconstruct(rep.pivots, rep.mult)
        return SymTridiag(diag, off)
    d, l = rep.pivots[0], rep.mult[0]
    diag = d.copy()
    diag[1:] += l * l * d[:-1]
    return SymTridiag(widen_array(diag), widen_array(d[:-1] * l))


def element_growth(rep: BidiagRep, spdiam_root: float) -> float:
    """Largest magnitude among d_i, d_i l_i and d_i l_i^2 relative to spdiam_root."""
    if spdiam_root <= 0:
        raise ValueError("spdiam_root must be positive")
    d = np.abs(rep.pivots[0])
    l = np.abs(rep.mult[0])
    big = d.max(initial=0.0)
    if rep.n > 1:
        ld = d[:-1] * l
        big = max(big, ld.max(), (ld * l).max())
    if not np.isfinite(big):
        return np.inf
    return float(big / spdiam_root)
