"""The eight acceptance criteria, one test each.  Each test records a one-line verdict."""

import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from oracles import brute_force_tstationary_separable, ndt2_path_multipliers
from scholtes_ccop.activesets import check_EandH, check_y_structure_R
from scholtes_ccop.atlas import atlas
from scholtes_ccop.exprdsl import check_derivatives
from scholtes_ccop.homotopy import (
    PreconditionError,
    Schedule,
    corrector_path,
    index_persistence_audit,
    multiplier_limits,
    predictor_corrector_F,
    scholtes_path,
)
from scholtes_ccop.model import PointXY, build_scholtes, load_builtin
from scholtes_ccop.nlpsolver import solve_local
from scholtes_ccop.stationarity import (
    MultiplierSetS,
    active_gradients_R,
    classify_R,
    classify_S,
    index_bound_check,
    lagrangian_hessian_R,
    lagrangian_hessian_S,
    lagrangian_hessian_S_direct,
    tangent_basis,
)

BAR = PointXY([0, 1], [1, 0])
PATH_SCHEDULE = Schedule(1e-2, 0.1, 1e-8)


def record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    ACCEPTANCE_LINES[k] = line
    print(line)
    return ok


def close(a, b, tol):
    return bool(np.all(np.abs(np.asarray(a, float) - np.asarray(b, float)) <= tol))


# ---------------------------------------------------------------- shared runs


def _criterion3_trace():
    reform = load_builtin("persistence").reform()
    seed = classify_R(reform, BAR)
    return reform, seed, corrector_path(reform, seed, PATH_SCHEDULE)


def _criterion1_points():
    reform = load_builtin("ndt2").reform()
    return reform, [(build_scholtes(reform, t), PointXY([t, 1], [1, 0])) for t in (0.05, 0.01, 0.001)]


# ---------------------------------------------------------------- criteria


def test_criterion_1_ndt2_example():
    start = time.perf_counter()
    reform, pts = _criterion1_points()
    c1 = float(reform.c[0])
    problems = []
    for S, pt in pts:
        rep = classify_S(S, pt)
        m = rep.multipliers
        ref = ndt2_path_multipliers(S.t, c1)
        if not rep.nondegenerate:
            problems.append(f"t={S.t:g} degenerate")
        if not close([m.mu3, m.eta_le.get(0, np.nan), m.nu.get(1, np.nan)],
                     [ref["mu3"], ref["eta_le"], ref["nu"]], 1e-8):
            problems.append(f"t={S.t:g} multipliers")
    rep = classify_R(reform, BAR)
    m = rep.multipliers
    if not rep.stationary.ok:
        problems.append("limit not T-stationary")
    if not close([m.mu1.get(0, np.nan), m.mu3, m.sigma1.get(0, np.nan), m.sigma2.get(1, np.nan)],
                 [0, 1, -2, 5 / 36], 1e-8):
        problems.append("limit multipliers")
    if rep.conditions["NDT2"].ok:
        problems.append("NDT2 not flagged")
    elapsed = time.perf_counter() - start
    if elapsed >= 1.0:
        problems.append(f"runtime {elapsed:.2f}s")
    assert record(1, not problems, f"NDT2 example, {elapsed:.3f}s " + "; ".join(problems)), problems


def test_criterion_2_ndt6_example():
    start = time.perf_counter()
    reform = load_builtin("ndt6").reform()
    problems = []
    for t in (0.1, 0.01):
        rep = classify_S(build_scholtes(reform, t), BAR)
        if not (rep.nondegenerate and rep.QI == 1):
            problems.append(f"t={t:g} QI={rep.QI}")
    rep = classify_R(reform, BAR)
    if not (rep.nondegenerate and rep.TI == 0):
        problems.append(f"R side TI={rep.TI}")
    if rep.conditions["NDT6"].ok or abs(rep.multipliers.sigma1[0]) > 1e-10:
        problems.append("NDT6 not failing")
    bound = index_bound_check(1, rep)
    if not (bound.ok and bound.details["lower_attained"] and bound.details["lower"] == 0):
        problems.append("index bound")
    elapsed = time.perf_counter() - start
    if elapsed >= 1.0:
        problems.append(f"runtime {elapsed:.2f}s")
    assert record(2, not problems, f"NDT6 example, {elapsed:.3f}s " + "; ".join(problems)), problems


def test_criterion_3_index_persistence():
    start = time.perf_counter()
    reform, seed, trace = _criterion3_trace()
    problems = []
    if abs(seed.multipliers.sigma1[0] + 2) > 1e-10:
        problems.append("seed sigma1")
    if not trace.complete or len(trace.records) != 7:
        problems.append(f"path incomplete: {trace.message}")
    for r in trace.records:
        if r.report is None or not r.report.nondegenerate or r.report.QI != 0 or seed.TI != 0:
            problems.append(f"t={r.t:g} not a nondegenerate KKT point with QI = TI = 0")
    limits = multiplier_limits(trace)
    if not limits.verdict.ok:
        problems.extend(limits.verdict.failures)
    elapsed = time.perf_counter() - start
    if elapsed >= 5.0:
        problems.append(f"runtime {elapsed:.2f}s")
    assert record(3, not problems, f"corrector path t=1e-2..1e-8, {elapsed:.3f}s "
                  + "; ".join(problems)), problems


def test_criterion_4_atlas_oracle():
    start = time.perf_counter()
    reform = load_builtin("separable4").reform()
    res = atlas(reform)
    elapsed = time.perf_counter() - start
    oracle = brute_force_tstationary_separable([1, 2, 3, 4], reform.c, reform.epsilon, reform.s)
    pts = [p.vector() for p in res.points]
    problems = []
    same = len(pts) == len(oracle) and all(any(np.max(np.abs(a - b)) < 1e-6 for b in oracle) for a in pts)
    if not same:
        problems.append(f"atlas {len(pts)} points vs oracle {len(oracle)}")
    for p, rep in res.entries:
        if not check_y_structure_R(rep.pattern, p.y, reform.params, reform.s).ok:
            problems.append(f"y structure at {p.vector().tolist()}")
        frac = [i for i in rep.pattern.a01 if p.y[i] != reform.y_upper]
        if len(frac) > 1 or (frac and reform.c[frac[0]] != max(reform.c[i] for i in rep.pattern.a01)):
            problems.append(f"fractional index at {p.vector().tolist()}")
    if elapsed >= 10.0:
        problems.append(f"runtime {elapsed:.2f}s")
    assert record(4, not problems, f"{len(pts)} points = oracle {len(oracle)}, {elapsed:.3f}s "
                  + "; ".join(problems)), problems


def test_criterion_5_lemma_suites():
    problems = []
    kkt = []  # (scholtes, point) pairs from criteria 1-3
    _, pts = _criterion1_points()
    kkt.extend(pts)
    ndt6 = load_builtin("ndt6").reform()
    kkt.extend((build_scholtes(ndt6, t), BAR) for t in (0.1, 0.01))
    reform, _, trace3 = _criterion3_trace()
    kkt.extend((build_scholtes(reform, r.t), r.point) for r in trace3.records)
    for S, pt in kkt:
        rep = classify_S(S, pt)
        v = check_EandH(rep.pattern, S.n, S.s)
        if not v.ok:
            problems.append(f"E/H counts at t={S.t:g}: {v.failures}")
    # criterion 4 produces points of R; their S-neighbours along t are not part of the atlas
    traces = [trace3, scholtes_path(reform, PointXY([0.1, 1], [1, 0]), PATH_SCHEDULE)]
    checked = 0
    for tr in traces:
        if tr.limit is None or tr.limit.report is None or not tr.limit.report.nondegenerate:
            continue
        audit = index_persistence_audit(tr)
        checked += 1
        if not audit.relations_hold(3):
            problems.append(f"active-set relations: {audit.reason}")
    if checked != len(traces):
        problems.append("expected nondegenerate limits on both traces")
    assert record(5, not problems, f"{len(kkt)} KKT points, {checked} traces "
                  + "; ".join(problems)), problems


def test_criterion_6_hessian_identity():
    reform, seed, trace = _criterion3_trace()
    rng = np.random.default_rng(2024)
    n = reform.n
    bitwise = 0
    for k in range(100):
        S = build_scholtes(reform, 10.0 ** rng.uniform(-8, -1))
        pt = PointXY(rng.uniform(-2, 2, n), rng.uniform(0, 1.5, n))
        sub = lambda: sorted(rng.choice(n, rng.integers(0, n + 1), replace=False).tolist())
        ge = sub()
        le = [i for i in sub() if i not in ge]
        m = MultiplierSetS(np.zeros(0), {}, {i: rng.standard_normal() for i in sub()}, rng.random(),
                           {i: rng.standard_normal() for i in ge}, {i: rng.standard_normal() for i in le},
                           {i: rng.standard_normal() for i in sub()})
        A = lagrangian_hessian_S(S, pt, m)
        B = lagrangian_hessian_S_direct(S, pt, m)
        bitwise += np.array_equal((A + A.T) / 2, (B + B.T) / 2)
    Z = tangent_basis(active_gradients_R(reform, BAR, seed.pattern).matrix).Z
    worst = 0.0
    for r in trace.records:
        S = build_scholtes(reform, r.t)
        HS = lagrangian_hessian_S(S, r.point, r.multipliers)
        HR = lagrangian_hessian_R(reform, r.point, r.multipliers)
        for _ in range(100 // len(trace.records) + 1):
            xi = Z @ rng.standard_normal(Z.shape[1])
            worst = max(worst, abs(xi @ HS @ xi - xi @ HR @ xi))
    ok = bitwise == 100 and worst <= 1e-12
    assert record(6, ok, f"bitwise agreement {bitwise}/100, restricted identity error {worst:.1e}")


def test_criterion_7_derivative_checks():
    rng = np.random.default_rng(7)
    worst, count, domain = 0.0, 0, 0
    for name in ("ndt2", "ndt6", "persistence", "separable4"):
        prob = load_builtin(name).problem
        for e in prob.expressions():
            for _ in range(50):
                rep = check_derivatives(e, rng.uniform(-2, 2, prob.n))
                if rep.ok:
                    worst = max(worst, rep.max_rel_error)
                else:
                    domain += 1
                count += 1
    ok = worst <= 1e-6 and domain == 0
    assert record(7, ok, f"{count} checks, max relative error {worst:.1e}, domain errors {domain}")


def test_criterion_8_solver_robustness():
    reform = load_builtin("persistence").reform()
    S = build_scholtes(reform, 0.01)
    rng = np.random.default_rng(8)
    good, worst_iter = 0, 0
    start = time.perf_counter()
    for _ in range(100):
        out = solve_local(S, PointXY(rng.uniform(-2, 2, 2), rng.uniform(0, 1.5, 2)))
        if out.converged and out.kkt_residual <= 1e-10 and out.iterations <= 100:
            good += 1
            worst_iter = max(worst_iter, out.iterations)
    elapsed = time.perf_counter() - start
    assert record(8, good >= 90, f"{good}/100 starts converged, max {worst_iter} iterations, {elapsed:.2f}s")


def test_ndt6_seed_refused_by_corrector():
    # companion to criterion 2: the corrector system is not posed without NDT6
    reform = load_builtin("ndt6").reform()
    try:
        predictor_corrector_F(reform, classify_R(reform, BAR), 0.01)
    except PreconditionError as exc:
        assert "NDT6" in str(exc)
    else:
        raise AssertionError("corrector accepted a seed violating NDT6")
