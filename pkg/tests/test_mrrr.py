import math
from fractions import Fraction

import numpy as np
import pytest

from mixmrrr.bisection import EigInterval, bisect_eigenvalues
from mixmrrr.mrrr import (
    ConfigError,
    SolverConfig,
    Stats,
    choose_root,
    classify,
    perturb,
    preprocess,
    process_cluster,
    rqi_singleton,
    solve,
)
from mixmrrr.precision import DOUBLE_QUAD, SINGLE_DOUBLE, Wide
from mixmrrr.transforms import sturm_count
from mixmrrr.tridiag import SymTridiag, gershgorin_bounds, ldl_factorize
from mixmrrr.verify import analytic_spectrum, residual_and_orthogonality


def iv(i, lo, hi):
    return EigInterval(i, Wide(lo), Wide(hi))


# configuration


def test_config_defaults():
    sd = SolverConfig(mode=SINGLE_DOUBLE)
    assert sd.gaptol == 1e-5 and sd.xi == 2.0**-24 and sd.k_rs == 1.0
    dq = SolverConfig()
    assert dq.gaptol == 1e-10 and dq.xi == 2.0**-53 and dq.max_depth == 8


@pytest.mark.parametrize(
    "kwargs",
    [dict(gaptol=1e-2), dict(gaptol=0.0), dict(k_rs=0.0), dict(k_rs=11.0), dict(max_depth=1),
     dict(xi=1e-20), dict(subset=(3, 2))],
)
def test_config_rejects(kwargs):
    with pytest.raises(ConfigError):
        SolverConfig(**kwargs)


def test_gaptol_floor_checked_per_block():
    # eps_y sqrt(n) / eps_x for single/double at n = 10^4 is about 1.9e-7
    cfg = SolverConfig(mode=SINGLE_DOUBLE, gaptol=1e-8)
    with pytest.raises(ConfigError):
        solve(SymTridiag.one_two_one(10000, np.float32), cfg)


# preprocessing


def test_preprocess_structural_split():
    T = SymTridiag(np.ones(4), np.array([1.0, 0.0, 1.0]))
    blocks = preprocess(T, SolverConfig())
    assert [b.T.n for b in blocks] == [2, 2]
    assert [b.offset for b in blocks] == [0, 2]


def test_preprocess_threshold_split():
    # just under eps_x * sqrt(|d_2 d_3|) with unit diagonal
    tiny = 0.5 * DOUBLE_QUAD.eps_narrow
    blocks = preprocess(SymTridiag(np.ones(4), np.array([1.0, tiny, 1.0])), SolverConfig())
    assert len(blocks) == 2
    blocks = preprocess(SymTridiag(np.ones(4), np.array([1.0, 4 * tiny, 1.0])), SolverConfig())
    assert len(blocks) == 1


def test_preprocess_keeps_small_scale_coupling():
    # off-diagonal far below eps_x * ||T|| but large next to its neighbours
    d = np.array([1.0, 1e-20, 1e-20])
    e = np.array([1e-18, 1e-20])
    assert len(preprocess(SymTridiag(d, e), SolverConfig())) == 1


def test_preprocess_scaling():
    (b,) = preprocess(SymTridiag.one_two_one(5), SolverConfig())
    assert b.scale == 1.0
    (b,) = preprocess(SymTridiag(np.full(3, 2.0**30), np.full(2, 2.0**28)), SolverConfig())
    r = float(np.max(np.abs(b.T.d)) + 2 * np.max(np.abs(b.T.e)))
    assert 1.0 <= r <= 2.0**20 and math.log2(b.scale).is_integer()
    (b,) = preprocess(SymTridiag(np.full(3, 1e-9), np.full(2, 1e-9)), SolverConfig())
    assert b.scale < 1.0
    assert preprocess(SymTridiag(np.array([5.0]), np.zeros(0)), SolverConfig())[0].T.n == 1


# root and perturbation


def test_choose_root_two_by_two(mode):
    T = SymTridiag.one_two_one(2, mode.narrow_dtype)
    rep = choose_root(T, SolverConfig(mode=mode))
    assert np.all(rep.pivots[0] > 0) or np.all(rep.pivots[0] < 0)
    assert rep.depth == 0


def test_choose_root_kac_translated_origin():
    T = SymTridiag.kac(5)
    rep = choose_root(T, SolverConfig())
    p = rep.pivots[0]
    assert np.all(p > 0) or np.all(p < 0)
    # 0 is an eigenvalue; probe just below it
    assert sturm_count(rep, Wide(-1e-9) - rep.sigma) == 2


def test_choose_root_prefers_requested_end():
    T = SymTridiag.one_two_one(10)
    assert float(choose_root(T, SolverConfig(), "right").sigma) > 3.9
    assert float(choose_root(T, SolverConfig(), "left").sigma) < 0.1


def test_choose_root_diagonal():
    T = SymTridiag(np.array([3.0, 1.0, 2.0]), np.array([1e-3, 1e-3]))
    rep = choose_root(T, SolverConfig())
    assert np.all(rep.pivots[0] > 0) or np.all(rep.pivots[0] < 0)


def test_perturb_bounds_and_determinism():
    rep = ldl_factorize(SymTridiag.one_two_one(50), -0.1)
    xi = DOUBLE_QUAD.eps_narrow
    a = perturb(rep, 7, xi)
    b = perturb(rep, 7, xi)
    assert np.array_equal(a.pivots, b.pivots) and np.array_equal(a.mult, b.mult)
    def data(r):
        arrs = (r.pivots, r.mult)
        return [Fraction(a[0, i]) + Fraction(a[1, i]) for a in arrs for i in range(a.shape[1])]

    x, y = data(rep), data(a)
    assert all(abs(v - u) <= Fraction(xi) * abs(u) * (1 + Fraction(1, 10**6)) for u, v in zip(x, y))
    assert any(u != v for u, v in zip(x, y))
    assert perturb(rep, 7, 0.0) is rep
    c = perturb(rep, 8, xi)
    assert not np.array_equal(a.pivots, c.pivots)


# classification


def test_classify_example():
    ivs = [iv(1, 1.0 - 5e-9, 1.0 + 5e-9), iv(2, 1.0001 - 5e-9, 1.0001 + 5e-9), iv(3, 2.0 - 5e-9, 2.0 + 5e-9)]
    groups = classify(ivs, 1e-3)
    assert [[x.index for x in g] for g in groups] == [[1, 2], [3]]


def test_classify_all_singletons():
    ivs = [iv(k, k - 1e-6, k + 1e-6) for k in range(1, 6)]
    assert all(len(g) == 1 for g in classify(ivs, 1e-3))


def test_classify_zero_denominator_separates():
    assert len(classify([iv(1, 0.0, 0.0), iv(2, 0.0, 0.0)], 1e-3)) == 2


# RQI


def test_rqi_two_by_two():
    rep = ldl_factorize(SymTridiag.one_two_one(2), 0.0)
    (interval,) = bisect_eigenvalues(rep, [1], 1e-3)
    lam, z = rqi_singleton(rep, interval, 2.0, SolverConfig())
    assert abs(float(lam) - 1.0) <= 4 * DOUBLE_QUAD.eps_wide * 3
    zz = z[0] + z[1]
    assert np.allclose(np.abs(zz), [2**-0.5, 2**-0.5], atol=1e-10)
    assert zz[0] * zz[1] < 0


def test_rqi_kac_residuals(mode):
    T = SymTridiag.kac(5, mode.narrow_dtype)
    cfg = SolverConfig(mode=mode)
    rep = choose_root(T, cfg)
    ivs = bisect_eigenvalues(rep, range(1, 6), 1e-3)
    d, e = T.as_float64()
    for interval in ivs:
        lam, z = rqi_singleton(rep, interval, 2.0, cfg)
        zz = z[0] + z[1]
        mu = float(lam + rep.sigma)
        r = T.dense() @ zz - mu * zz
        assert np.linalg.norm(r) <= cfg.k_rs * 2.0 * mode.eps_narrow * math.sqrt(5) * 1.01


def test_rqi_fallback_counts():
    rep = ldl_factorize(SymTridiag.one_two_one(20), -0.01)
    (interval,) = bisect_eigenvalues(rep, [7], 1e-2)
    stats = Stats()
    cfg = SolverConfig(max_rqi_iters=1, k_rs=1e-9)
    lam, z = rqi_singleton(rep, interval, 1e-30, cfg, stats)
    exact = analytic_spectrum("one_two_one", 20)[6] + 0.01
    assert abs(float(lam) - exact) <= 1e-13
    assert stats.rqi_fallbacks == 1


# clusters


def test_process_cluster_splits_close_pair():
    # eigenvalues {1, 1 + 1e-4, 3}; at gaptol 1e-3 the first two form a cluster
    T = SymTridiag(np.array([1.0, 1.0001, 3.0]), np.array([1e-12, 1e-12]))
    cfg = SolverConfig(gaptol=1e-3)
    rep = ldl_factorize(T, 0.5)
    ivs = bisect_eigenvalues(rep, [1, 2, 3], 1e-7)
    groups = classify(ivs, 1e-3)
    assert len(groups[0]) == 2
    stats = Stats()
    child, refined, tau = process_cluster(rep, groups[0], cfg, 2.0, stats)
    assert child.depth == 1
    assert all(len(g) == 1 for g in classify(refined, 1e-3))
    assert stats.robustness_failures == 0


# full solve


def test_solve_diagonal_exact(mode):
    T = SymTridiag(np.array([3.0, 1.0, 2.0], mode.narrow_dtype), np.zeros(2, mode.narrow_dtype))
    res = solve(T, SolverConfig(mode=mode))
    assert [float(p.lam) for p in res.pairs] == [1.0, 2.0, 3.0]
    assert np.array_equal(res.vectors, np.eye(3)[:, [1, 2, 0]])


def test_solve_kac(mode):
    n = 5
    T = SymTridiag.kac(n, mode.narrow_dtype)
    res = solve(T, SolverConfig(mode=mode))
    ev = res.eigenvalues.astype(np.float64)
    eps = mode.eps_narrow
    assert np.all(np.abs(ev - analytic_spectrum("kac", n)) <= 10 * math.sqrt(n) * eps * 8)
    rep = residual_and_orthogonality(T, res.pairs, mode)
    assert rep.O <= 20 * math.sqrt(n) * eps and rep.R <= 20 * math.sqrt(n) * eps
    assert res.stats.d_max == 0 and res.stats.rho == 1 / n


def test_solve_output_types(mode):
    res = solve(SymTridiag.one_two_one(7, mode.narrow_dtype), SolverConfig(mode=mode))
    assert res.vectors.dtype == mode.narrow_dtype
    assert [p.index for p in res.pairs] == list(range(1, 8))
    norms = np.linalg.norm(res.vectors.astype(np.float64), axis=0)
    assert np.all(np.abs(norms - 1) <= 4 * 7 * mode.eps_narrow)


def test_solve_subset_matches_full():
    T = SymTridiag.one_two_one(40)
    full = solve(T, SolverConfig())
    part = solve(T, SolverConfig(subset=(5, 9)))
    assert [p.index for p in part.pairs] == [5, 6, 7, 8, 9]
    for p in part.pairs:
        q = full.pairs[p.index - 1]
        assert abs(p.lam - q.lam) <= 20 * math.sqrt(40) * DOUBLE_QUAD.eps_narrow * 4
    with pytest.raises(ConfigError):
        solve(T, SolverConfig(subset=(1, 41)))


def test_solve_blocks_and_global_order():
    d = np.array([5.0, 5.0, -1.0, -1.0])
    e = np.array([1.0, 0.0, 1.0])
    res = solve(SymTridiag(d, e), SolverConfig())
    assert res.stats.blocks == 2
    assert np.allclose(res.eigenvalues, [-2.0, 0.0, 4.0, 6.0])
    assert np.all(res.vectors[2:, 2:] == 0)


def test_solve_threads_bitwise_identical():
    rng = np.random.default_rng(2)
    T = SymTridiag(rng.standard_normal(120), rng.standard_normal(119))
    a = solve(T, SolverConfig(threads=1))
    b = solve(T, SolverConfig(threads=4))
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.vectors, b.vectors)


def test_wilkinson_pairs_resolved_at_depth_one():
    m = 10
    d = np.abs(np.arange(2 * m + 1) - m).astype(float)
    T = SymTridiag(d, np.ones(2 * m))
    res = solve(T, SolverConfig())
    assert res.stats.d_max <= 1 and res.stats.rho <= 2 / (2 * m + 1)
    rep = residual_and_orthogonality(T, res.pairs)
    assert rep.O <= 20 * math.sqrt(21) * DOUBLE_QUAD.eps_narrow


def test_depth_fallback():
    m = 10
    d = np.abs(np.arange(2 * m + 1) - m).astype(float)
    T = SymTridiag(d, np.ones(2 * m))
    # huge gaptol keeps every child a cluster, forcing the depth limit
    cfg = SolverConfig(gaptol=1e-3, max_depth=2)
    res = solve(T, cfg)
    rep = residual_and_orthogonality(T, res.pairs)
    assert rep.R <= 20 * math.sqrt(21) * DOUBLE_QUAD.eps_narrow
    assert res.stats.d_max <= 2


def test_gershgorin_enclosure_of_root():
    T = SymTridiag.one_two_one(6)
    gl, gu = gershgorin_bounds(T)
    rep = choose_root(T, SolverConfig())
    assert gl - 1e-12 <= float(rep.sigma) <= gu + 1e-12
