import numpy as np
import pytest
from numpy.testing import assert_allclose

from scholtes_ccop.activesets import ActivePattern
from scholtes_ccop.model import PointXY, ProblemCCOP, RegularizationParams, build_reform, build_scholtes
from scholtes_ccop.nlpsolver import (
    CONVERGED,
    DIVERGED,
    SolverConfig,
    kkt_residual,
    newton_polish,
    solve_local,
    solve_many,
    solve_x_restricted,
)
from scholtes_ccop.stationarity import verify_KKT

fs = frozenset


def test_ndt2_converges_to_known_point(ndt2):
    S = build_scholtes(ndt2, 0.05)
    out = solve_local(S, PointXY([0.04, 1.01], [0.99, 0.01]))
    assert out.converged and out.kkt_residual <= 1e-10
    assert_allclose(out.point.vector(), [0.05, 1, 1, 0], atol=1e-8)
    assert verify_KKT(out.multipliers).ok


def test_convex_instance_from_many_starts():
    reform = build_reform(ProblemCCOP.from_strings(2, 1, "x1^2+x2^2"), RegularizationParams([1, 2], 0.5))
    S = build_scholtes(reform, 0.01)
    rng = np.random.default_rng(11)
    for _ in range(10):
        out = solve_local(S, PointXY(rng.uniform(-2, 2, 2), rng.uniform(0, 1.5, 2)))
        assert out.converged and out.iterations <= 50
        assert_allclose(out.point.x, 0, atol=1e-8)


def test_start_at_kkt_point(ndt2):
    S = build_scholtes(ndt2, 0.05)
    out = solve_local(S, PointXY([0.05, 1], [1, 0]))
    assert out.converged and out.iterations <= 2
    assert_allclose(out.point.vector(), [0.05, 1, 1, 0], atol=1e-12)


def test_kkt_residual(ndt2):
    S = build_scholtes(ndt2, 0.05)
    res, mults, pat = kkt_residual(S, PointXY([0.05, 1], [1, 0]))
    assert res <= 1e-12 and pat.Hle == fs({0})
    res, mults, pat = kkt_residual(S, PointXY([0.5, 1], [1, 0]))  # outside the band
    assert res > 0.1 and mults is None


def test_newton_polish(ndt2):
    S = build_scholtes(ndt2, 0.05)
    _, _, pat = kkt_residual(S, PointXY([0.05, 1], [1, 0]))
    out = newton_polish(S, PointXY([0.05 + 1e-7, 1 - 1e-7], [1 - 1e-7, 0]), pat)
    assert out.converged and out.kkt_residual <= 1e-12 and out.iterations <= 3
    exact = newton_polish(S, PointXY([0.05, 1], [1, 0]))
    assert exact.converged
    assert_allclose(exact.point.vector(), [0.05, 1, 1, 0], atol=1e-15)


def test_newton_polish_wrong_pattern(ndt2):
    S = build_scholtes(ndt2, 0.05)
    wrong = ActivePattern("S", 2, Hge=fs({0}), N=fs({1}), sum_active=True)
    out = newton_polish(S, PointXY([0.05, 1], [1, 0]), wrong)
    assert not out.converged
    assert out.status == DIVERGED or out.kkt_residual > 1e-10


def test_deterministic(persistence):
    S = build_scholtes(persistence, 0.01)
    start = PointXY([1.7, -0.3], [0.2, 1.4])
    a, b = solve_local(S, start), solve_local(S, start)
    assert a.iterations == b.iterations and np.array_equal(a.point.vector(), b.point.vector())


def test_solve_many_preserves_order(persistence):
    S = build_scholtes(persistence, 0.01)
    starts = [PointXY([1, 0], [1, 0]), PointXY([0, 1], [0, 1])]
    outs = solve_many(S, starts, workers=2)
    seq = [solve_local(S, s) for s in starts]
    for o, q in zip(outs, seq):
        assert np.array_equal(o.point.vector(), q.point.vector())


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(backtrack=1.5)
    with pytest.raises(ValueError):
        SolverConfig(max_iter=0)


def test_solve_x_restricted_separable(separable4):
    xs = solve_x_restricted(separable4.problem, fs({0, 1}), fs(), np.zeros(4))
    assert xs.status == CONVERGED
    assert_allclose(xs.x, [0, 0, 3, 4], atol=1e-10)
    assert_allclose([xs.sigma[0], xs.sigma[1]], [-2, -4], atol=1e-10)
