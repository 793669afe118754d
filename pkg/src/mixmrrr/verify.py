"""Accuracy metrics, a-posteriori bounds, clustering statistics and oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .precision import DOUBLE_QUAD, PrecisionMode, Wide
from .tridiag import SymTridiag

JACOBI_MAX_N = 2000


@dataclass(frozen=True)
class AccuracyReport:
    R: float
    O: float
    n: int
    k: int
    worst_residual: int  # 1-based position in the pair list
    worst_pair: tuple[int, int] | None


def _pairs_arrays(pairs):
    lams = [p.lam for p in pairs]
    Z = np.column_stack([np.asarray(p.z, dtype=np.float64) for p in pairs])
    return lams, Z


def residual_and_orthogonality(T: SymTridiag, pairs, mode: PrecisionMode = DOUBLE_QUAD) -> AccuracyReport:
    """R = max ||T z - lam z||_1 / ||T||_1 and O = max_{i != j} |z_i . z_j|."""
    if not pairs:
        raise ValueError("need at least one pair")
    lams, Z = _pairs_arrays(pairs)
    d, e = T.as_float64()
    n, k = Z.shape
    norm = T.norm1()
    res = np.empty(k)
    for j, lam in enumerate(lams):
        if isinstance(lam, Wide):
            lh, ll = lam.hi, lam.lo
        else:
            lh, ll = float(lam), 0.0
        res[j] = K.w_tridiag_residual(d, e, lh, ll, np.ascontiguousarray(Z[:, j]))
    R = float(res.max() / norm) if norm > 0 else 0.0
    worst_pair = None
    O = 0.0
    if k > 1:
        if mode.is_pair:
            O = float(K.max_abs_gram_offdiag(Z))
        else:
            G = np.abs(Z.T @ Z)
            np.fill_diagonal(G, 0.0)
            O = float(G.max())
        if not mode.is_pair:
            i, j = np.unravel_index(int(np.argmax(G)), G.shape)
            worst_pair = (int(min(i, j)) + 1, int(max(i, j)) + 1)
    return AccuracyReport(R, min(O, 1.0), n, k, int(np.argmax(res)) + 1, worst_pair)


def gap_bound(r_norm: float, gap: float) -> float:
    """Gap Theorem bound on the sine of the eigenvector error angle."""
    if not gap > 0:
        raise ValueError("gap must be positive")
    return r_norm / gap


def sin_angle(z, w) -> float:
    """|sin| of the angle between two unit vectors."""
    z = np.asarray(z, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    c = float(np.dot(z, w))
    return float(np.linalg.norm(z - c * w))


@dataclass(frozen=True)
class OracleResult:
    eigenvalues: np.ndarray  # (2, n) wide, ascending
    vectors: np.ndarray  # (n, n) binary64 columns
    sweeps: int

    @property
    def values(self) -> np.ndarray:
        return self.eigenvalues[0] + self.eigenvalues[1]


def jacobi_oracle(T: SymTridiag) -> OracleResult:
    """Dense cyclic Jacobi in double-double on the symmetrized T."""
    n = T.n
    if n > JACOBI_MAX_N:
        raise ValueError(f"jacobi_oracle is limited to n <= {JACOBI_MAX_N}")
    D, E = T.wide_entries()
    A = np.zeros((2, n, n))
    for r in range(2):
        A[r] += np.diag(D[r])
        if n > 1:
            A[r] += np.diag(E[r], 1) + np.diag(E[r], -1)
    fro2 = float(np.sum((A[0] + A[1]) ** 2))
    tol2 = (n * DOUBLE_QUAD.eps_wide) ** 2 * fro2
    V, sweeps = K.w_jacobi(A, tol2, 60)
    diag = np.array([np.diag(A[0]), np.diag(A[1])])
    order = np.lexsort((diag[1], diag[0]))
    return OracleResult(diag[:, order], (V[0] + V[1])[:, order], int(sweeps))


def analytic_spectrum(family: str, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    if family in ("kac", "clement"):
        return np.array([-(n - 1) + 2.0 * k for k in range(n)])
    if family == "one_two_one":
        k = np.arange(1, n + 1)
        return np.sort(2.0 - 2.0 * np.cos(k * np.pi / (n + 1)))
    raise ValueError(f"no closed-form spectrum for {family!r}")


def clustering_stats(trace) -> tuple[float, int]:
    """(rho, d_max) from a solve's classification trace."""
    n = trace.n
    if n == 0:
        return 0.0, 0
    top = max((s for depth, s in trace.groups if depth == 0), default=1)
    # children of a depth-d node are classified at depth d + 1
    d_max = max((depth for depth, _ in trace.groups), default=0)
    return top / n, d_max


def sturm_count_exact(d, e, x) -> int:
    """Eigenvalues of the tridiagonal (d, e) below x, by exact rational LDL^T."""
    x = Fraction(x)
    count = 0
    piv = None
    for i, di in enumerate(d):
        di = Fraction(di)
        if i == 0:
            piv = di - x
        else:
            ei = Fraction(e[i - 1])
            if piv == 0:
                # an exact zero pivot: perturb x downward infinitesimally
                return sturm_count_exact(d, e, x - Fraction(1, 10**30) * (1 + abs(x)))
            piv = di - x - ei * ei / piv
        if piv < 0:
            count += 1
    if piv == 0:
        return sturm_count_exact(d, e, x - Fraction(1, 10**30) * (1 + abs(x)))
    return count


def spdiam(values) -> float:
    v = np.asarray(values, dtype=np.float64)
    return float(v.max() - v.min()) if v.size else 0.0


def relgaps(values) -> np.ndarray:
    """Relative gap of each sorted eigenvalue to its nearest neighbour."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    out = np.full(n, math.inf)
    for i in range(n):
        g = math.inf
        if i > 0:
            g = min(g, v[i] - v[i - 1])
        if i + 1 < n:
            g = min(g, v[i + 1] - v[i])
        out[i] = g / abs(v[i]) if v[i] != 0 else math.inf
    return out
