import math
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest

from mixmrrr.mrrr import SolverConfig, solve
from mixmrrr.precision import DOUBLE_QUAD, SINGLE_DOUBLE
from mixmrrr.tridiag import EigenPair, SymTridiag
from mixmrrr.verify import (
    analytic_spectrum,
    clustering_stats,
    gap_bound,
    jacobi_oracle,
    relgaps,
    residual_and_orthogonality,
    sin_angle,
    sturm_count_exact,
)
from mixmrrr.mrrr import ClusterTrace


def _dec_cos(x: Decimal) -> Decimal:
    getcontext().prec = 50
    term, total, k = Decimal(1), Decimal(1), 0
    while True:
        k += 2
        term = -term * x * x / (k * (k - 1))
        if abs(term) < Decimal(10) ** -45:
            return total + term
        total += term


def _dec_pi() -> Decimal:
    getcontext().prec = 50
    return Decimal("3.14159265358979323846264338327950288419716939937510")


def test_residual_orthogonality_exact_basis():
    T = SymTridiag(np.array([3.0, 1.0]), np.zeros(1))
    pairs = [EigenPair(1, 1.0, np.array([0.0, 1.0])), EigenPair(2, 3.0, np.array([1.0, 0.0]))]
    rep = residual_and_orthogonality(T, pairs)
    assert rep.R == 0.0 and rep.O == 0.0 and rep.k == 2


def test_identity_any_orthonormal_pair():
    T = SymTridiag(np.ones(2), np.zeros(1))
    c = 2**-0.5
    pairs = [EigenPair(1, 1.0, np.array([c, c])), EigenPair(2, 1.0, np.array([c, -c]))]
    assert residual_and_orthogonality(T, pairs).R == 0.0


def two_by_two_example():
    T = SymTridiag(np.array([2.0, 2.0]), np.array([1.0]))
    z1 = np.array([1.0, -1.0]) / math.sqrt(2) + np.array([1e-8, 0.0])
    z1 /= np.linalg.norm(z1)
    z2 = np.array([1.0, 1.0]) / math.sqrt(2)
    return T, [EigenPair(1, 1.0, z1), EigenPair(2, 3.0, z2)]


def exact_metrics(T, pairs):
    d, e = T.as_float64()
    A = [[Fraction(d[0]), Fraction(e[0])], [Fraction(e[0]), Fraction(d[1])]]
    res = []
    for p in pairs:
        z = [Fraction(float(v)) for v in p.z]
        lam = Fraction(float(p.lam))
        r = [sum(A[i][j] * z[j] for j in range(2)) - lam * z[i] for i in range(2)]
        res.append(sum(abs(v) for v in r))
    R = max(res) / 3
    z1 = [Fraction(float(v)) for v in pairs[0].z]
    z2 = [Fraction(float(v)) for v in pairs[1].z]
    O = abs(z1[0] * z2[0] + z1[1] * z2[1])
    return float(R), float(O)


@pytest.mark.parametrize("mode", [SINGLE_DOUBLE, DOUBLE_QUAD], ids=lambda m: m.value)
def test_two_by_two_perturbation_example(mode):
    T, pairs = two_by_two_example()
    rep = residual_and_orthogonality(T, pairs, mode)
    R, O = exact_metrics(T, pairs)
    assert abs(rep.R - R) <= 1e-2 * R and abs(rep.O - O) <= 1e-2 * O
    assert 1e-9 < rep.R < 1e-8 and 1e-9 < rep.O < 1e-8


def test_requires_pairs():
    with pytest.raises(ValueError):
        residual_and_orthogonality(SymTridiag.one_two_one(2), [])


def test_gap_bound():
    assert gap_bound(0.0, 1.0) == 0.0
    assert gap_bound(1e-12, 2.0) == 5e-13
    with pytest.raises(ValueError):
        gap_bound(1.0, 0.0)
    with pytest.raises(ValueError):
        gap_bound(1.0, -1.0)


def test_gap_bound_dominates_two_by_two():
    T, pairs = two_by_two_example()
    o = jacobi_oracle(T)
    z = pairs[0].z
    r = T.dense() @ z - z * float(z @ T.dense() @ z)
    assert sin_angle(z, o.vectors[:, 0]) <= gap_bound(np.linalg.norm(r), 2.0) * 1.0001


def test_jacobi_two_by_two():
    o = jacobi_oracle(SymTridiag(np.array([2.0, 2.0]), np.array([1.0])))
    assert o.values.tolist() == [1.0, 3.0]
    v = o.vectors
    assert np.allclose(np.abs(v), 2**-0.5, atol=1e-15)
    assert v[0, 0] * v[1, 0] < 0 and v[0, 1] * v[1, 1] > 0


def test_jacobi_diagonal():
    o = jacobi_oracle(SymTridiag(np.array([3.0, -1.0, 2.0]), np.zeros(2)))
    assert o.values.tolist() == [-1.0, 2.0, 3.0] and o.sweeps == 0


def test_jacobi_one_two_one_to_pair_precision():
    n = 6
    o = jacobi_oracle(SymTridiag.one_two_one(n))
    pi = _dec_pi()
    for k in range(1, n + 1):
        exact = 2 - 2 * _dec_cos(k * pi / (n + 1))
        got = Decimal(o.eigenvalues[0, k - 1]) + Decimal(o.eigenvalues[1, k - 1])
        assert abs(got - exact) / exact <= Decimal("1e-25")


def test_jacobi_oracle_quality():
    rng = np.random.default_rng(4)
    n = 40
    T = SymTridiag(rng.standard_normal(n), rng.standard_normal(n - 1))
    o = jacobi_oracle(T)
    V = o.vectors
    eps = DOUBLE_QUAD.eps_wide
    # binary64 output of double-double vectors: orthogonal to binary64 roundoff
    assert np.abs(V.T @ V - np.eye(n)).max() <= 10 * n * 2.0**-53
    assert np.all(np.diff(o.values) >= 0)
    A = T.dense()
    assert np.abs(A @ V - V * o.values).max() <= 10 * n * 2.0**-53 * T.norm1()
    assert o.sweeps < 20 and eps > 0


def test_jacobi_guard():
    with pytest.raises(ValueError):
        jacobi_oracle(SymTridiag.one_two_one(2001))


def test_analytic_examples():
    assert analytic_spectrum("kac", 5).tolist() == [-4, -2, 0, 2, 4]
    s = analytic_spectrum("one_two_one", 3)
    assert np.allclose(s, [2 - math.sqrt(2), 2, 2 + math.sqrt(2)], rtol=1e-15)
    assert analytic_spectrum("one_two_one", 1)[0] == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(ValueError):
        analytic_spectrum("wilkinson", 5)


@pytest.mark.parametrize("n", [1, 2, 7, 30])
def test_analytic_matches_oracle(n):
    # the stored symmetrized entries are rounded to binary64, so agreement
    # is at the binary64 level even though the oracle carries pairs
    eps_y = 2.0**-53
    o = jacobi_oracle(SymTridiag.kac(n))
    assert np.all(np.abs(o.values - analytic_spectrum("kac", n)) <= 100 * n * eps_y)
    o = jacobi_oracle(SymTridiag.one_two_one(n))
    assert np.all(np.abs(o.values - analytic_spectrum("one_two_one", n)) <= 100 * n * eps_y)


def test_clustering_stats():
    assert clustering_stats(ClusterTrace(4, ((0, 1),) * 4)) == (0.25, 0)
    rho, d = clustering_stats(ClusterTrace(4, ((0, 2), (0, 1), (0, 1), (1, 1), (1, 1))))
    assert rho == 0.5 and d == 1


def test_sturm_exact_small():
    # [[2,1],[1,2]] has eigenvalues 1 and 3
    assert [sturm_count_exact([2, 2], [1], x) for x in (0, 1, 2, 3, 4)] == [0, 0, 1, 1, 2]


def test_relgaps_and_sin_angle():
    g = relgaps([1.0, 2.0, 4.0])
    assert g.tolist() == [1.0, 0.5, 0.5]
    assert sin_angle([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert sin_angle([1.0, 0.0], [-1.0, 0.0]) == 0.0


def test_gap_bound_dominates_rqi_angles():
    n = 50
    T = SymTridiag.one_two_one(n)
    res = solve(T, SolverConfig())
    o = jacobi_oracle(T)
    lam = o.values
    A = T.dense()
    for j, p in enumerate(res.pairs):
        z = p.z
        r = np.linalg.norm(A @ z - float(p.lam) * z)
        gap = min(abs(lam[j] - lam[k]) for k in range(n) if k != j)
        # the oracle itself is accurate to about n eps_wide
        assert sin_angle(z, o.vectors[:, j]) <= gap_bound(r, gap) + 1e-14
