import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from scholtes_ccop.activesets import ActivePattern, detect_R, detect_S
from scholtes_ccop.model import PointXY, ProblemCCOP, RegularizationParams, build_reform, build_scholtes
from scholtes_ccop.stationarity import (
    LICQError,
    MultiplierSetR,
    MultiplierSetS,
    active_gradients_R,
    active_gradients_S,
    check_licq,
    classify,
    classify_R,
    classify_S,
    estimate_multipliers_R,
    estimate_multipliers_S,
    index_bound_check,
    lagrangian_hessian_R,
    lagrangian_hessian_S,
    lagrangian_hessian_S_direct,
    restricted_inertia,
    tangent_basis,
    verify_KKT,
    verify_T_stationary,
)

fs = frozenset
BAR = PointXY([0, 1], [1, 0])


def test_active_gradients_R_ndt6(ndt6):
    g = active_gradients_R(ndt6, BAR, detect_R(ndt6, BAR))
    cols = {tuple(col) for col in g.matrix.T}
    assert cols == {(1, 1, 0, 0), (0, 0, 1, 1), (1, 0, 0, 0), (0, 0, 0, 1)}
    assert g.alpha == 4
    assert np.linalg.det(g.matrix) != 0.0  # oracle for independence
    assert check_licq(g.matrix).ok


def test_active_gradients_S_ndt2(ndt2):
    t = 0.05
    S = build_scholtes(ndt2, t)
    pt = PointXY([t, 1], [1, 0])
    g = active_gradients_S(S, pt, detect_S(S, pt))
    cols = {tuple(col) for col in g.matrix.T}
    assert cols == {(0, 0, 1, 1), (1, 0, t, 0), (0, 0, 0, 1)}
    assert g.alpha == 3


def test_active_gradients_edge_cases(ndt2):
    reform = build_reform(ProblemCCOP.from_strings(2, 1, "x1^2+x2^2"), RegularizationParams([1, 2], 0.5))
    empty = ActivePattern("R", 2)
    assert active_gradients_R(reform, PointXY([1, 1], [0.5, 0.7]), empty).matrix.shape == (4, 0)
    two = ActivePattern("R", 2, a00=fs({1}))
    g = active_gradients_R(reform, PointXY([1, 0], [1, 0]), two)
    assert g.labels == [("x", 1), ("y", 1)]
    S = build_scholtes(ndt2, 0.1)
    with pytest.raises(AssertionError):
        active_gradients_S(S, BAR, ActivePattern("S", 2, N=fs({0}), Hge=fs({0})))


def test_check_licq():
    assert not check_licq(np.array([[1.0, 1.0], [0.0, 0.0], [2.0, 2.0]])).ok
    assert check_licq(np.zeros((4, 0))).ok
    assert not check_licq(np.ones((2, 3))).ok
    with pytest.raises(ValueError):
        check_licq(np.eye(2), rank_tol=0)


def test_multipliers_R_ndt6(ndt6):
    m, res = estimate_multipliers_R(ndt6, BAR, detect_R(ndt6, BAR))
    assert res <= 1e-14
    assert_allclose([m.mu1[0], m.mu3, m.sigma1[0], m.sigma2[1]], [2, 1, 0, 1], atol=1e-12)
    assert m.lam.size == 0


def test_multipliers_R_ndt2(ndt2):
    m, res = estimate_multipliers_R(ndt2, BAR, detect_R(ndt2, BAR))
    assert res <= 1e-14
    assert_allclose([m.mu1[0], m.mu3, m.sigma1[0], m.sigma2[1]], [0, 1, -2, 5 / 36], atol=1e-12)


def test_nonstationary_point_has_residual(ndt2):
    pt = PointXY([0, 0.5], [1, 0])
    m, res = estimate_multipliers_R(ndt2, pt, detect_R(ndt2, pt))
    assert res > 1e-3
    assert not verify_T_stationary(m, detect_R(ndt2, pt)).ok


def test_verify_T_stationary_signs():
    pat = ActivePattern("R", 2, a01=fs({0}), a00=fs({1}), Q0=fs({0}), sum_active=True)
    base = dict(lam=np.zeros(0), mu2={}, mu3=1.0, sigma1={0: 1.0}, sigma2={})
    m = MultiplierSetR(mu1={0: -0.1}, rho1={1: 0.0}, rho2={1: 0.0}, **base)
    v = verify_T_stationary(m, pat)
    assert not v.ok and "mu1[1]" in v.failures[0]
    m = MultiplierSetR(mu1={0: 0.0}, rho1={1: 1.0}, rho2={1: 1.0}, **base)
    v = verify_T_stationary(m, pat)
    assert not v.ok and "tstat-3" in v.failures[0]
    m = MultiplierSetR(mu1={0: 0.0}, rho1={1: 0.0}, rho2={1: 5.0}, **base)
    assert verify_T_stationary(m, pat).ok


@pytest.mark.parametrize("t", [0.05, 0.01, 0.001])
def test_multipliers_S_ndt2(ndt2, t):
    S = build_scholtes(ndt2, t)
    pt = PointXY([t, 1], [1, 0])
    m, res = estimate_multipliers_S(S, pt, detect_S(S, pt))
    assert res <= 1e-12
    assert_allclose(m.mu3, 1 + 2 * t - 2 * t * t, atol=1e-12)
    assert_allclose(m.eta_le[0], 2 - 2 * t, atol=1e-12)
    assert_allclose(m.nu[1], 5 / 36 - 2 * t + 2 * t * t, atol=1e-12)
    assert verify_KKT(m).ok


def test_multipliers_S_ndt6(ndt6):
    S = build_scholtes(ndt6, 0.1)
    m, _ = estimate_multipliers_S(S, BAR, detect_S(S, BAR))
    assert_allclose([m.mu1[0], m.mu3, m.nu[1]], [2, 1, 1], atol=1e-12)


def test_verify_KKT_negative_eta():
    m = MultiplierSetS(np.zeros(0), {}, {}, 1.0, {0: -0.5}, {}, {})
    assert not verify_KKT(m).ok


def test_tangent_basis_examples(ndt6):
    gR = active_gradients_R(ndt6, BAR, detect_R(ndt6, BAR))
    assert tangent_basis(gR.matrix).dim == 0
    S = build_scholtes(ndt6, 0.1)
    gS = active_gradients_S(S, BAR, detect_S(S, BAR))
    Z = tangent_basis(gS.matrix).Z
    assert Z.shape == (4, 1)
    xi = Z[:, 0]
    assert abs(xi[0] + xi[1]) <= 1e-12 and abs(xi[2]) <= 1e-12 and abs(xi[3]) <= 1e-12
    assert_allclose(tangent_basis(np.zeros((4, 0))).Z, np.eye(4))
    with pytest.raises(LICQError):
        tangent_basis(np.array([[1.0, 1.0], [0.0, 0.0]]))


def test_tangent_basis_invariants():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 3))
    for method in ("qr", "svd"):
        Z = tangent_basis(A, method).Z
        assert_allclose(Z.T @ Z, np.eye(3), atol=1e-12)
        assert np.max(np.abs(A.T @ Z)) <= 1e-10


def test_inertia_independent_of_decomposition():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((6, 2))
    M = rng.standard_normal((6, 6))
    H = M + M.T
    a = restricted_inertia(H, tangent_basis(A, "qr"))
    b = restricted_inertia(H, tangent_basis(A, "svd"))
    assert a[1] == b[1]
    assert_allclose(a[0], b[0], atol=1e-8)


def test_hessians_examples(ndt2, ndt6):
    t = 0.05
    S = build_scholtes(ndt2, t)
    pt = PointXY([t, 1], [1, 0])
    m, _ = estimate_multipliers_S(S, pt, detect_S(S, pt))
    expected = [[2, 0, 2 - 2 * t, 0], [0, 2, 0, 0], [2 - 2 * t, 0, 0, 0], [0, 0, 0, 0]]
    assert_allclose(lagrangian_hessian_S(S, pt, m), expected, atol=1e-12)
    S6 = build_scholtes(ndt6, 0.1)
    m6, _ = estimate_multipliers_S(S6, BAR, detect_S(S6, BAR))
    assert_allclose(lagrangian_hessian_S(S6, BAR, m6), np.diag([2, -4, 0, 0]), atol=1e-12)
    zero = MultiplierSetR(np.zeros(0), {}, {}, 0.0, {}, {}, {}, {})
    assert_array_equal(lagrangian_hessian_R(ndt2, BAR, zero), np.diag([2.0, 2.0, 0.0, 0.0]))


def test_hessian_identity_with_curved_constraints():
    prob = ProblemCCOP.from_strings(3, 1, "exp(x1)*x2+x3^4", ["x1^2+x2-1"], ["sin(x2)+x3^2", "1-x1*x3"])
    S = build_scholtes(build_reform(prob), 0.01)
    rng = np.random.default_rng(7)
    for _ in range(20):
        pt = PointXY(rng.uniform(-1, 1, 3), rng.uniform(0, 1, 3))
        m = MultiplierSetS(rng.standard_normal(1), {0: rng.random(), 1: rng.random()}, {},
                           rng.random(), {0: rng.random()}, {2: rng.random()}, {1: rng.random()})
        assert_array_equal(lagrangian_hessian_S(S, pt, m), lagrangian_hessian_S_direct(S, pt, m))


def test_classify_ndt6(ndt6):
    for t in (0.1, 0.01):
        rep = classify_S(build_scholtes(ndt6, t), BAR)
        assert rep.nondegenerate and rep.QI == 1
        assert sum(rep.inertia) == rep.tangent_dim
    rep = classify(ndt6, BAR)
    assert rep.kind == "T-stationary-R"
    assert rep.nondegenerate and (rep.QI, rep.BI, rep.TI) == (0, 0, 0)
    assert not rep.conditions["NDT6"].ok
    assert "sigma1[1] = 0" in rep.conditions["NDT6"].witness


def test_classify_ndt2_limit(ndt2):
    rep = classify_R(ndt2, BAR)
    assert rep.stationary.ok
    assert not rep.conditions["NDT2"].ok
    assert rep.failed_conditions() == ["NDT2"]
    assert "mu1[1]" in rep.conditions["NDT2"].witness


def test_borderline_multiplier_flagged():
    # mu3 = c1 = 5e-9 sits between the noise floor and the strictness threshold
    reform = build_reform(ProblemCCOP.from_strings(2, 1, "(x1-1)^2+(x2-1)^2"),
                          RegularizationParams([5e-9, 1.0], 0.5))
    rep = classify_R(reform, BAR)
    assert rep.conditions["NDT2"].borderline and not rep.conditions["NDT2"].ok


def test_licq_failure_leaves_indices_undefined():
    # two active inequalities with parallel gradients
    prob = ProblemCCOP.from_strings(2, 1, "x1^2+(x2-1)^2", inequalities=["x2-1", "2*x2-2"])
    reform = build_reform(prob, RegularizationParams([1, 2], 0.5))
    rep = classify_R(reform, BAR)
    assert not rep.licq_ok and not rep.conditions["NDT1"].ok
    assert rep.QI is None and rep.TI is None
    assert rep.multipliers.rank_deficient
    assert rep.to_dict()["TI"] is None


def test_multiplier_uniqueness_across_factorizations(ndt2):
    pat = detect_R(ndt2, BAR)
    a, _ = estimate_multipliers_R(ndt2, BAR, pat, method="svd")
    b, _ = estimate_multipliers_R(ndt2, BAR, pat, method="qr")
    for fam in ("mu1", "sigma1", "sigma2"):
        for k in getattr(a, fam):
            assert abs(getattr(a, fam)[k] - getattr(b, fam)[k]) < 1e-10
    assert abs(a.mu3 - b.mu3) < 1e-10


def test_index_bound_check(ndt6, persistence):
    rep = classify_R(ndt6, BAR)
    v = index_bound_check(1, rep)
    assert v.ok and v.details["lower_attained"] and not v.details["equality"]
    rep3 = classify_R(persistence, BAR)
    v = index_bound_check(0, rep3)
    assert v.ok and v.details["equality"] and v.details["ndt6"]
    assert not index_bound_check(1, rep3).ok  # NDT6 holds so TI must equal m
    rep3.TI = 2
    assert not index_bound_check(1, rep3).ok


def test_report_json_round_trip(ndt6):
    import json

    d = json.loads(json.dumps(classify_R(ndt6, BAR).to_dict()))
    assert d["TI"] == 0 and d["conditions"]["NDT6"]["ok"] is False
    assert d["pattern"]["a01"] == [1]
