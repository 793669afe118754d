"""Test-matrix families, file formats and the benchmark runner."""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .mrrr import SolverConfig, solve
from .precision import DOUBLE_QUAD, SINGLE_DOUBLE, PrecisionMode, narrow_array
from .tridiag import EigenPair, SymTridiag
from .verify import residual_and_orthogonality

FAMILIES = ("uniform", "geometric", "one_two_one", "clement", "wilkinson", "hermite")
CSV_FIELDS = (
    "family", "n", "mode", "gaptol", "R", "O", "rho", "d_max",
    "robustness_failures", "rqi_fallbacks", "wall_ms",
)


class MatrixFormatError(OSError):
    """Unreadable or malformed matrix/pairs file."""


@dataclass(frozen=True)
class MatrixSpec:
    family: str
    n: int
    seed: int = 0
    path: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES + ("file",):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "file":
            if self.path is None:
                raise ValueError("file family needs a path")
        elif self.n < 1:
            raise ValueError("n must be positive")

    @property
    def size(self) -> int:
        """Intrinsic size; Wilkinson matrices are rounded up to odd order."""
        if self.family == "wilkinson" and self.n % 2 == 0:
            return self.n + 1
        return self.n


@dataclass(frozen=True)
class BenchRecord:
    family: str
    n: int
    mode: str
    gaptol: float
    R: float | None
    O: float | None
    rho: float | None
    d_max: int | None
    robustness_failures: int | None
    rqi_fallbacks: int | None
    wall_ms: float
    diagnostic: str = ""


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def prescribed_spectrum(lambdas, seed: int = 0) -> SymTridiag:
    """Wide tridiagonal orthogonally similar to diag(lambdas).

    The eigenvector leading components are a uniformly random unit vector, so
    the output has the distribution of a tridiagonalized random similarity
    of diag(lambdas).
    """
    lam = np.asarray(lambdas, dtype=np.float64)
    if lam.ndim != 1 or lam.size < 1 or not np.all(np.isfinite(lam)):
        raise ValueError("lambdas must be a nonempty finite sequence")
    q = np.random.default_rng(seed).standard_normal(lam.size)
    q[q == 0.0] = 1.0
    D, E = K.w_arrowhead_tridiag(lam, q)
    return SymTridiag(D, E)


def family_spectrum(family: str, n: int, mode: PrecisionMode) -> np.ndarray:
    eps = mode.eps_narrow
    if n == 1:
        return np.array([1.0])
    i = np.arange(1, n + 1, dtype=np.float64)
    if family == "uniform":
        return eps + (i - 1) * (1 - eps) / (n - 1)
    if family == "geometric":
        return eps ** ((n - i) / (n - 1))
    raise ValueError(f"{family!r} has no prescribed spectrum")


def generate_wide(spec: MatrixSpec, mode: PrecisionMode = DOUBLE_QUAD) -> SymTridiag:
    fam, n = spec.family, spec.size
    if fam in ("uniform", "geometric"):
        return prescribed_spectrum(family_spectrum(fam, n, mode), spec.seed)
    if fam == "one_two_one":
        return SymTridiag.one_two_one(n)
    if fam == "clement":
        i = np.arange(1, n, dtype=np.float64)
        return SymTridiag(np.zeros(n), np.sqrt(i * (n - i)))
    if fam == "wilkinson":
        m = n // 2
        return SymTridiag(np.abs(np.arange(n, dtype=np.float64) - m), np.ones(n - 1))
    if fam == "hermite":
        rng = np.random.default_rng(spec.seed)
        d = rng.normal(0.0, math.sqrt(2.0), size=n)
        e = np.sqrt(rng.chisquare(np.arange(n - 1, 0, -1, dtype=np.float64)))
        return SymTridiag(d, e)
    if fam == "file":
        return read_matrix(spec.path, mode)
    raise ValueError(f"unknown family {fam!r}")


def generate(spec: MatrixSpec, mode: PrecisionMode = DOUBLE_QUAD) -> SymTridiag:
    """The family matrix rounded to the narrow format of ``mode``."""
    return generate_wide(spec, mode).narrowed(mode)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def _parse_float(tok: str) -> float:
    t = tok.lower()
    if "x" in t:
        return float.fromhex(tok)
    return float(tok)


def _parse_line(line: str, count: int, what: str) -> np.ndarray:
    toks = line.split()
    if len(toks) != count:
        raise MatrixFormatError(f"expected {count} {what} entries, found {len(toks)}")
    try:
        return np.array([_parse_float(t) for t in toks], dtype=np.float64)
    except ValueError as exc:
        raise MatrixFormatError(f"bad number in {what}: {exc}") from None


def format_matrix(T: SymTridiag) -> str:
    d, e = T.as_float64()
    return "\n".join([str(T.n), " ".join(float(x).hex() for x in d), " ".join(float(x).hex() for x in e)]) + "\n"


def parse_matrix(text: str, mode: PrecisionMode = DOUBLE_QUAD) -> SymTridiag:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MatrixFormatError("empty matrix file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise MatrixFormatError("first line must be the dimension n") from None
    if n < 1:
        raise MatrixFormatError("n must be positive")
    body = lines[1:] + [""] * (3 - len(lines))
    d = _parse_line(body[0], n, "diagonal")
    e = _parse_line(body[1] if n > 1 else "", n - 1, "off-diagonal")
    dt = mode.narrow_dtype
    try:
        return SymTridiag(d.astype(dt), e.astype(dt))
    except ValueError as exc:
        raise MatrixFormatError(str(exc)) from None


def write_matrix(path: str, T: SymTridiag) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix(T))


def read_matrix(path: str, mode: PrecisionMode = DOUBLE_QUAD) -> SymTridiag:
    with open(path) as fh:
        return parse_matrix(fh.read(), mode)


def format_pairs(pairs, n: int) -> str:
    """Line 1 ``n k``; line 2 the k eigenvalues; then one line per eigenvector."""
    out = [f"{n} {len(pairs)}", " ".join(float(p.lam).hex() for p in pairs)]
    out += [" ".join(float(x).hex() for x in p.z) for p in pairs]
    return "\n".join(out) + "\n"


def parse_pairs(text: str, mode: PrecisionMode = DOUBLE_QUAD) -> list[EigenPair]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MatrixFormatError("empty pairs file")
    try:
        n, k = (int(t) for t in lines[0].split())
    except ValueError:
        raise MatrixFormatError("first line must be 'n k'") from None
    if len(lines) != k + 2:
        raise MatrixFormatError(f"expected {k + 2} lines, found {len(lines)}")
    lams = _parse_line(lines[1], k, "eigenvalue")
    dt = mode.narrow_dtype
    return [
        EigenPair(j + 1, dt(lams[j]), _parse_line(lines[j + 2], n, "eigenvector").astype(dt))
        for j in range(k)
    ]


def write_pairs(path: str, pairs, n: int) -> None:
    with open(path, "w") as fh:
        fh.write(format_pairs(pairs, n))


def read_pairs(path: str, mode: PrecisionMode = DOUBLE_QUAD) -> list[EigenPair]:
    with open(path) as fh:
        return parse_pairs(fh.read(), mode)


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

SUITE_SIZES = {"paper": (101, 251, 501, 1001), "quick": (24, 61)}


def suite(name: str, seed: int = 0) -> list[tuple[MatrixSpec, SolverConfig]]:
    if name not in SUITE_SIZES:
        raise ValueError(f"unknown suite {name!r}")
    cases = []
    for mode in (SINGLE_DOUBLE, DOUBLE_QUAD):
        for fam in FAMILIES:
            for n in SUITE_SIZES[name]:
                cases.append((MatrixSpec(fam, n, seed), SolverConfig(mode=mode, seed=seed)))
    return cases


def run_case(spec: MatrixSpec, config: SolverConfig) -> BenchRecord:
    t0 = time.perf_counter()
    mode = config.mode
    try:
        T = generate(spec, mode)
        res = solve(T, config)
        rep = residual_and_orthogonality(T, res.pairs, mode)
        ms = (time.perf_counter() - t0) * 1e3
        s = res.stats
        return BenchRecord(spec.family, T.n, mode.value, config.gaptol, rep.R, rep.O, s.rho, s.d_max,
                           s.robustness_failures, s.rqi_fallbacks, ms)
    except Exception as exc:  # a failed case must not abort the batch
        ms = (time.perf_counter() - t0) * 1e3
        return BenchRecord(spec.family, spec.size, mode.value, config.gaptol, None, None, None, None,
                           None, None, ms, f"{type(exc).__name__}: {exc}")


def run_bench(cases, threads: int = 1) -> list[BenchRecord]:
    """Run every (spec, config) case; records come back in input order."""
    cases = list(cases)
    if threads > 1 and len(cases) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda c: run_case(*c), cases))
    return [run_case(*c) for c in cases]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        row = [_cell(getattr(r, f)) for f in CSV_FIELDS]
        if r.diagnostic:
            row.append(r.diagnostic)
        w.writerow(row)
    return buf.getvalue()


def write_csv(path: str, records) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))
