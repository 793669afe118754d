"""The MRRR driver: representation tree, classification, RQI and output assembly."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .bisection import EigInterval, bisect_eigenvalues, locate, refine_intervals
from .precision import DOUBLE_QUAD, PrecisionMode, Wide, narrow, narrow_array
from .transforms import WIDE, dstqds, solve_twisted, sturm_count, twisted_factorize
from .tridiag import (
    BidiagRep,
    EigenPair,
    SymTridiag,
    element_growth,
    gershgorin_bounds,
    ldl_factorize,
    pivmin_for,
)


class ConfigError(ValueError):
    """Invalid solver configuration."""


DEFAULT_GAPTOL = {PrecisionMode.SINGLE_DOUBLE: 1e-5, PrecisionMode.DOUBLE_QUAD: 1e-10}
GAPTOL_MAX = 1e-3


def gaptol_floor(n: int, mode: PrecisionMode) -> float:
    return min(GAPTOL_MAX, mode.eps_wide * math.sqrt(n) / mode.eps_narrow)


def default_elg_max(n: int, mode: PrecisionMode) -> float:
    return max(10.0, mode.eps_narrow / (mode.eps_wide * math.sqrt(max(n, 1))))


@dataclass(frozen=True)
class SolverConfig:
    mode: PrecisionMode = DOUBLE_QUAD
    gaptol: float | None = None
    k_rs: float = 1.0
    xi: float | None = None
    max_rqi_iters: int = 10
    max_depth: int = 8
    robust_elg_max: float | None = None  # None: per-block default
    seed: int = 0
    subset: tuple[int, int] | None = None  # 1-based, inclusive
    threads: int = 1

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", PrecisionMode.parse(self.mode))
        if self.gaptol is None:
            object.__setattr__(self, "gaptol", DEFAULT_GAPTOL[self.mode])
        if self.xi is None:
            object.__setattr__(self, "xi", self.mode.eps_narrow)
        if not (0.0 < self.gaptol <= GAPTOL_MAX):
            raise ConfigError(f"gaptol must lie in (0, {GAPTOL_MAX}], got {self.gaptol}")
        if not self.xi >= self.mode.eps_narrow:
            raise ConfigError("xi must be at least the narrow unit roundoff")
        if not (0.0 < self.k_rs <= 10.0):
            raise ConfigError("k_rs must lie in (0, 10]")
        if self.max_depth < 2:
            raise ConfigError("max_depth must be at least 2")
        if self.max_rqi_iters < 1:
            raise ConfigError("max_rqi_iters must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.robust_elg_max is not None and not self.robust_elg_max > 0:
            raise ConfigError("robust_elg_max must be positive")
        if self.subset is not None:
            il, iu = self.subset
            if not (1 <= il <= iu):
                raise ConfigError(f"bad subset {self.subset}")

    def check_block(self, n: int) -> None:
        lo = gaptol_floor(n, self.mode)
        if self.gaptol < lo:
            raise ConfigError(f"gaptol {self.gaptol} below {lo:.3g} for a block of size {n}")

    def elg_max(self, n: int) -> float:
        return self.robust_elg_max if self.robust_elg_max is not None else default_elg_max(n, self.mode)


@dataclass
class Stats:
    d_max: int = 0
    rho: float = 0.0
    robustness_failures: int = 0
    rqi_fallbacks: int = 0
    blocks: int = 0
    depth_fallbacks: int = 0
    recertifications: int = 0

    def merge(self, other: "Stats") -> None:
        self.d_max = max(self.d_max, other.d_max)
        self.rho = max(self.rho, other.rho)
        self.robustness_failures += other.robustness_failures
        self.rqi_fallbacks += other.rqi_fallbacks
        self.blocks += other.blocks
        self.depth_fallbacks += other.depth_fallbacks
        self.recertifications += other.recertifications


@dataclass(frozen=True)
class ClusterTrace:
    """Group sizes produced by every classification, tagged with node depth."""

    n: int
    groups: tuple[tuple[int, int], ...]  # (depth, size)


@dataclass
class EigenResult:
    pairs: list[EigenPair]
    stats: Stats
    trace: ClusterTrace | None = None

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])

    @property
    def vectors(self) -> np.ndarray:
        if not self.pairs:
            return np.zeros((0, 0))
        return np.column_stack([p.z for p in self.pairs])


# ---------------------------------------------------------------------------
# preprocessing and the root
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    T: SymTridiag
    offset: int
    scale: float


def _pow2_scale(radius: float) -> float:
    if radius == 0.0 or 1.0 <= radius <= 2.0**20:
        return 1.0
    k = math.floor(math.log2(radius))
    if radius > 2.0**20:
        k -= 19
    return 2.0**k


def preprocess(T: SymTridiag, config: SolverConfig) -> list[Block]:
    """Split at relatively negligible off-diagonals and scale each block by a power of two."""
    dt = config.mode.narrow_dtype
    if T.is_wide:
        T = T.narrowed(config.mode)
    d = np.asarray(T.d, dtype=dt)
    e = np.asarray(T.e, dtype=dt)
    n = d.shape[0]
    if n == 0:
        return []
    # relative split: zeroing e_i perturbs each eigenvalue by a relative eps_x,
    # so tiny eigenvalues keep their relative gaps (an absolute eps_x*||T||
    # threshold would not)
    eps = config.mode.eps_narrow
    d64 = d.astype(np.float64)
    cuts = [0]
    for i in range(n - 1):
        if abs(float(e[i])) <= eps * math.sqrt(abs(d64[i] * d64[i + 1])):
            cuts.append(i + 1)
    cuts.append(n)
    blocks = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        bd, be = d[a:b], e[a : b - 1]
        radius = float(np.max(np.abs(bd.astype(np.float64))))
        if b - a > 1:
            col = np.abs(bd.astype(np.float64))
            col[:-1] += np.abs(be)
            col[1:] += np.abs(be)
            radius = float(col.max())
        s = _pow2_scale(radius)
        blocks.append(Block(SymTridiag((bd / dt(s)).astype(dt), (be / dt(s)).astype(dt)), a, s))
    return blocks


def _definite(rep: BidiagRep, sign: int) -> bool:
    p = rep.pivots[0]
    return bool(np.all(p > 0)) if sign > 0 else bool(np.all(p < 0))


def _root_at_end(T: SymTridiag, mode: PrecisionMode, pivmin: float, left: bool) -> BidiagRep:
    """Definite factorization shifted to just outside the extreme eigenvalue."""
    gl, gu = gershgorin_bounds(T)
    spdiam = max(gu - gl, abs(gl), abs(gu), 1e-300)
    pad = 4.0 * mode.eps_narrow * spdiam
    n = T.n
    if left:
        mu0 = Wide(gl - pad, 0.0, mode)
        sign, idx = 1, 1
    else:
        mu0 = Wide(gu + pad, 0.0, mode)
        sign, idx = -1, n
    base = ldl_factorize(T, mu0, mode, pivmin)
    if not _definite(base, sign):
        return base
    (iv,) = bisect_eigenvalues(base, [idx], 4.0 * n * mode.eps_wide, WIDE)
    delta = 4.0 * n * mode.eps_wide * spdiam
    for _ in range(64):
        mu = mu0 + iv.lo - delta if left else mu0 + iv.hi + delta
        rep = ldl_factorize(T, mu, mode, pivmin)
        if _definite(rep, sign):
            return rep
        delta *= 2.0
    return base


def choose_root(block: SymTridiag, config: SolverConfig, prefer: str | None = None) -> BidiagRep:
    """Root representation ``T - mu I``, definite, with mu just outside one spectrum end.

    ``prefer`` ("left"/"right") selects the end nearer a requested subset;
    otherwise the end with smaller element growth wins, ties going left.
    """
    mode = config.mode
    pivmin = pivmin_for(block.norm1(), mode)
    gl, gu = gershgorin_bounds(block)
    spdiam = max(gu - gl, 1e-300)
    if prefer == "left":
        return _root_at_end(block, mode, pivmin, True)
    if prefer == "right":
        return _root_at_end(block, mode, pivmin, False)
    left = _root_at_end(block, mode, pivmin, True)
    right = _root_at_end(block, mode, pivmin, False)
    if element_growth(right, spdiam) < element_growth(left, spdiam):
        return right
    return left


def perturb(rep: BidiagRep, seed: int, xi: float, key: int | None = None) -> BidiagRep:
    """Relative random perturbation ``x(1 + r)`` of every datum, |r| <= xi.

    The stream is a counter-based generator keyed by (seed, key) and consumed
    in datum order (pivots, then multipliers), so results are reproducible.
    """
    if xi == 0.0:
        return rep
    key = rep.offset if key is None else key
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & (2**64 - 1), key])))
    n = rep.n
    r = gen.uniform(-xi, xi, size=2 * n - 1)
    f = 1.0 + r
    if rep.mode.is_pair:
        piv = K.w_mul_elem(rep.pivots, f[:n])
        mult = K.w_mul_elem(rep.mult, f[n:])
    else:
        piv = rep.pivots * np.array([f[:n], np.zeros(n)])
        mult = rep.mult * np.array([f[n:], np.zeros(n - 1)])
    return BidiagRep(piv, mult, rep.sigma, rep.depth, rep.mode, rep.pivmin, rep.offset)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def reldist(a: EigInterval, b: EigInterval) -> float:
    den = max(abs(float(a.lo)), abs(float(a.hi)), abs(float(b.lo)), abs(float(b.hi)))
    if den == 0.0:
        return math.inf
    return float(b.lo - a.hi) / den


def classify(intervals, gaptol: float) -> list[list[EigInterval]]:
    """Partition consecutive intervals into groups; reldist >= gaptol separates."""
    ivs = sorted(intervals, key=lambda iv: iv.index)
    groups: list[list[EigInterval]] = []
    for iv in ivs:
        if groups and reldist(groups[-1][-1], iv) < gaptol:
            groups[-1].append(iv)
        else:
            groups.append([iv])
    return groups


# ---------------------------------------------------------------------------
# singletons
# ---------------------------------------------------------------------------


def _norm_of(z: np.ndarray, mode: PrecisionMode) -> Wide:
    if mode.is_pair:
        h, l = K.w_norm2(z)
        return Wide(h, l, mode)
    return Wide(float(np.dot(z[0], z[0])), 0.0, mode)


def _normalized(z: np.ndarray, mode: PrecisionMode) -> np.ndarray:
    if mode.is_pair:
        return K.w_normalize(z)[0]
    out = np.zeros_like(z)
    out[0] = z[0] / math.sqrt(float(np.dot(z[0], z[0])))
    return out


def _bisect_solve(rep: BidiagRep, interval: EigInterval, stats: Stats | None):
    """Full-precision eigenvalue then a single twisted solve."""
    (iv,) = refine_intervals(rep, [interval], 4.0 * rep.n * rep.mode.eps_wide, WIDE, stats)
    lam = iv.mid
    z = solve_twisted(twisted_factorize(rep, lam))
    return lam, _normalized(z, rep.mode)


def rqi_singleton(rep: BidiagRep, interval: EigInterval, gap, config: SolverConfig,
                  stats: Stats | None = None):
    """Rayleigh quotient iteration guarded by the certified interval.

    Returns ``(lam, z)`` in the coordinates of ``rep``; ``z`` is a normalized
    wide vector.
    """
    mode = rep.mode
    n = rep.n
    gap = float(gap)
    tol = config.k_rs * gap * mode.eps_narrow * math.sqrt(n)
    lo, hi = interval.lo, interval.hi
    lam = interval.mid
    for _ in range(config.max_rqi_iters):
        tw = twisted_factorize(rep, lam)
        z = solve_twisted(tw)
        nrm2 = _norm_of(z, mode)
        nrm = nrm2.sqrt()
        g = tw.gamma
        resid = abs(float(g)) / float(nrm)
        corr = g / nrm2
        new = lam + corr
        if resid <= tol or abs(float(corr)) <= 8.0 * mode.eps_wide * abs(float(lam)):
            if not (lo <= new <= hi):
                new = lam
            return new, _normalized(z, mode)
        # shrink the bracket with the count at the current iterate
        if sturm_count(rep, lam, WIDE) >= interval.index:
            hi = lam
        else:
            lo = lam
        if not (lo < new < hi):
            new = (lo + hi) * 0.5
        lam = new
    if stats is not None:
        stats.rqi_fallbacks += 1
    return _bisect_solve(rep, EigInterval(interval.index, lo, hi), stats)


# ---------------------------------------------------------------------------
# clusters
# ---------------------------------------------------------------------------


@dataclass
class Node:
    rep: BidiagRep
    intervals: list[EigInterval]  # the group being resolved, in rep coordinates
    left: Wide | None  # upper end of the nearest interval to the left, if any
    right: Wide | None  # lower end of the nearest interval to the right, if any


def _candidate_shifts(cluster: list[EigInterval]):
    first, last = cluster[0], cluster[-1]
    d_left = max(first.width, 4.0 * first.lo.mode.eps_wide * abs(float(first.lo)))
    d_right = max(last.width, 4.0 * last.hi.mode.eps_wide * abs(float(last.hi)))
    for k in range(8):
        yield first.lo - d_left * 2.0**k
        yield last.hi + d_right * 2.0**k


def process_cluster(rep: BidiagRep, cluster: list[EigInterval], config: SolverConfig,
                    spdiam_root: float, stats: Stats | None = None):
    """Shift to a cluster end; returns the child rep and the refined translated intervals."""
    elg_max = config.elg_max(rep.n)
    best = None
    for tau in _candidate_shifts(cluster):
        child = dstqds(rep, tau)
        elg = element_growth(child, spdiam_root)
        if elg <= elg_max:
            best = (elg, child, tau)
            break
        if best is None or elg < best[0]:
            best = (elg, child, tau)
    else:
        if stats is not None:
            stats.robustness_failures += 1
    _, child, tau = best
    moved = [iv.shifted(tau) for iv in cluster]
    refined = refine_intervals(child, moved, 1e-2 * config.gaptol, WIDE, stats)
    return child, refined, tau


def _gap(ivs: list[EigInterval], j: int, left, right, cap: float) -> float:
    g = cap
    lo_nb = ivs[j - 1].hi if j > 0 else left
    hi_nb = ivs[j + 1].lo if j + 1 < len(ivs) else right
    if lo_nb is not None:
        g = min(g, float(ivs[j].lo - lo_nb))
    if hi_nb is not None:
        g = min(g, float(hi_nb - ivs[j].hi))
    return max(g, 0.0)


def _resolve(node: Node, wanted, config: SolverConfig, spdiam: float, stats: Stats, trace: list,
             out: dict) -> None:
    """Depth-first descent below one group; fills ``out[local index] = (lam, z, rep)``."""
    stack = [node]
    while stack:
        nd = stack.pop()
        ivs = nd.intervals
        if len(ivs) == 1:
            iv = ivs[0]
            if iv.index in wanted:
                gap = _gap(ivs, 0, nd.left, nd.right, spdiam)
                lam, z = rqi_singleton(nd.rep, iv, gap, config, stats)
                out[iv.index] = (lam, z, nd.rep)
                stats.d_max = max(stats.d_max, nd.rep.depth)
            continue
        if nd.rep.depth >= config.max_depth:
            stats.depth_fallbacks += 1
            stats.d_max = max(stats.d_max, nd.rep.depth)
            for iv in ivs:
                if iv.index in wanted:
                    lam, z = _bisect_solve(nd.rep, iv, stats)
                    out[iv.index] = (lam, z, nd.rep)
            continue
        child, refined, tau = process_cluster(nd.rep, ivs, config, spdiam, stats)
        left = nd.left - tau if nd.left is not None else None
        right = nd.right - tau if nd.right is not None else None
        groups = classify(refined, config.gaptol)
        trace.extend((child.depth, len(g)) for g in groups)
        children = []
        for gi, g in enumerate(groups):
            if not any(iv.index in wanted for iv in g):
                continue
            lnb = groups[gi - 1][-1].hi if gi > 0 else left
            rnb = groups[gi + 1][0].lo if gi + 1 < len(groups) else right
            children.append(Node(child, g, lnb, rnb))
        # push in reverse so the leftmost group is processed first
        stack.extend(reversed(children))


def _singleton_node(group, groups, gi):
    lnb = groups[gi - 1][-1].hi if gi > 0 else None
    rnb = groups[gi + 1][0].lo if gi + 1 < len(groups) else None
    return lnb, rnb


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


@dataclass
class _BlockState:
    block: Block
    rep: BidiagRep | None
    intervals: list[EigInterval]
    groups: list[list[EigInterval]]
    spdiam: float
    approx: np.ndarray  # approximate eigenvalues in original scale, for global ordering


def _prepare(block: Block, config: SolverConfig, prefer: str | None, stats: Stats) -> _BlockState:
    T = block.T
    if T.n == 1:
        lam = float(T.d[0]) * block.scale
        return _BlockState(block, None, [], [], 0.0, np.array([lam]))
    gl, gu = gershgorin_bounds(T)
    spdiam = gu - gl
    root = choose_root(T, config, prefer)
    root = perturb(root, config.seed, config.xi, block.offset)
    root.offset = block.offset
    ivs = locate(root, range(1, T.n + 1), 1e-2 * config.gaptol, stats)
    groups = classify(ivs, config.gaptol)
    approx = np.array([(float(iv.mid) + float(root.sigma)) * block.scale for iv in ivs])
    return _BlockState(block, root, ivs, groups, spdiam, approx)


def _assemble(state: _BlockState, rep: BidiagRep, lam: Wide, z: np.ndarray, mode: PrecisionMode, n: int):
    lam_global = narrow((lam + rep.sigma) * state.block.scale, mode)
    vec = np.zeros(n, dtype=mode.narrow_dtype)
    off = state.block.offset
    vec[off : off + state.block.T.n] = narrow_array(z, mode)
    return lam_global, vec


def _run_group(state: _BlockState, gi: int, wanted: set, config: SolverConfig):
    stats = Stats()
    trace: list = []
    out: dict = {}
    g = state.groups[gi]
    lnb, rnb = _singleton_node(g, state.groups, gi)
    _resolve(Node(state.rep, g, lnb, rnb), wanted, config, state.spdiam, stats, trace, out)
    return stats, trace, out


def solve(T: SymTridiag, config: SolverConfig | None = None) -> EigenResult:
    """Eigenpairs of T (all, or ``config.subset``) as narrow values and vectors."""
    config = config or SolverConfig()
    mode = config.mode
    n = T.n
    stats = Stats()
    blocks = preprocess(T, config)
    stats.blocks = len(blocks)
    prefer = None
    if config.subset is not None:
        il, iu = config.subset
        if iu > n:
            raise ConfigError(f"subset {config.subset} exceeds n = {n}")
        prefer = "left" if (il + iu) <= n + 1 else "right"
    for b in blocks:
        if b.T.n > 1:
            config.check_block(b.T.n)
    states = [_prepare(b, config, prefer, stats) for b in blocks]

    # global order of all eigenvalues (ties broken by block order, then local index)
    keys = []
    for bi, st in enumerate(states):
        for li, v in enumerate(st.approx):
            keys.append((float(v), bi, li + 1))
    keys.sort()
    il, iu = config.subset if config.subset is not None else (1, n)
    global_of = {}
    wanted = [set() for _ in states]
    for gidx, (_, bi, li) in enumerate(keys, start=1):
        global_of[(bi, li)] = gidx
        if il <= gidx <= iu:
            wanted[bi].add(li)

    trace: list = []
    tasks = []
    for bi, st in enumerate(states):
        if st.rep is None:
            trace.append((0, 1))
            continue
        trace.extend((0, len(g)) for g in st.groups)
        # populate lazily computed data before any worker touches the rep
        st.rep.lld, st.rep.narrow_copy
        for gi, g in enumerate(st.groups):
            if any(iv.index in wanted[bi] for iv in g):
                tasks.append((bi, gi))

    def work(task):
        bi, gi = task
        return _run_group(states[bi], gi, wanted[bi], config)

    if config.threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    pairs: dict[int, EigenPair] = {}
    for (bi, _), (st_stats, st_trace, out) in zip(tasks, results):
        stats.merge(st_stats)
        trace.extend(st_trace)
        st = states[bi]
        for li, (lam, z, rep) in out.items():
            lam_g, vec = _assemble(st, rep, lam, z, mode, n)
            gidx = global_of[(bi, li)]
            pairs[gidx] = EigenPair(gidx, lam_g, vec)
    for bi, st in enumerate(states):
        if st.rep is None and 1 in wanted[bi]:
            gidx = global_of[(bi, 1)]
            vec = np.zeros(n, dtype=mode.narrow_dtype)
            vec[st.block.offset] = 1
            lam = mode.narrow_dtype(st.block.T.d[0]) * mode.narrow_dtype(st.block.scale)
            pairs[gidx] = EigenPair(gidx, lam, vec)

    largest0 = max((s for dpt, s in trace if dpt == 0), default=1)
    stats.rho = largest0 / n if n else 0.0
    result_trace = ClusterTrace(n, tuple(trace))
    return EigenResult([pairs[k] for k in sorted(pairs)], stats, result_trace)
