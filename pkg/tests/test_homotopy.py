import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from scholtes_ccop.homotopy import (
    CorrectorSystem,
    PreconditionError,
    Schedule,
    corrector_path,
    index_persistence_audit,
    multiplier_limits,
    predictor_corrector_F,
    scholtes_path,
    snap_point,
    snap_radius,
)
from scholtes_ccop.model import PointXY, build_scholtes
from scholtes_ccop.nlpsolver import solve_local
from scholtes_ccop.stationarity import classify_R, classify_S

from oracles import ndt2_path_multipliers

BAR = PointXY([0, 1], [1, 0])
SCHED = Schedule(1e-2, 0.1, 1e-8)


def test_schedule():
    assert_allclose(SCHED.values(), [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8], rtol=1e-12)
    for bad in [(1e-8, 0.1, 1e-2), (1e-1, 1.0, 1e-8), (1e-1, 0.1, 0.0)]:
        with pytest.raises(ValueError):
            Schedule(*bad)


def test_snap():
    assert snap_radius(1e-8) == pytest.approx(1e-3)
    assert snap_radius(1e-20) == 1e-8


def test_snap_point(ndt2):
    p = snap_point(ndt2, PointXY([1e-5, 1 + 1e-9], [1 - 1e-5, 1e-5]), 1e-4)
    assert p.x[0] == 0.0 and p.y[1] == 0.0


def test_ndt2_path(ndt2):
    trace = scholtes_path(ndt2, PointXY([0.1, 1], [1, 0]), Schedule(1e-1, 0.1, 1e-6))
    assert trace.complete
    for r in trace.records[1:]:
        assert_allclose(r.point.vector(), [r.t, 1, 1, 0], atol=1e-8)
        ref = ndt2_path_multipliers(r.t, 1.0)
        m = r.multipliers
        assert_allclose([m.mu3, m.eta_le[0], m.nu[1]], [ref["mu3"], ref["eta_le"], ref["nu"]], atol=1e-8)
    assert_allclose(trace.limit.point.vector(), [0, 1, 1, 0], atol=1e-12)
    assert "NDT2 violated" in trace.limit.message
    audit = index_persistence_audit(trace)
    assert audit.status == "skipped" and "NDT2" in audit.reason


def test_trace_jsonl(ndt2):
    trace = scholtes_path(ndt2, PointXY([0.1, 1], [1, 0]), Schedule(1e-1, 0.1, 1e-3))
    lines = trace.to_jsonl().splitlines()
    assert len(lines) == len(trace.records) + 1
    recs = [json.loads(s) for s in lines]
    assert recs[0]["t"] == pytest.approx(0.1)
    assert recs[-1]["complete"] is True and recs[-1]["limit"] is not None


def test_corrector_rejects_bad_input(ndt2, ndt6, persistence):
    with pytest.raises(ValueError):
        predictor_corrector_F(persistence, classify_R(persistence, BAR), 0.0)
    with pytest.raises(PreconditionError, match="NDT6 fail, sigma1\\[1\\] = 0"):
        predictor_corrector_F(ndt6, classify_R(ndt6, BAR), 1e-2)
    with pytest.raises(PreconditionError, match="NDT2"):
        predictor_corrector_F(ndt2, classify_R(ndt2, BAR), 1e-2)
    with pytest.raises(PreconditionError):
        predictor_corrector_F(persistence, classify_S(build_scholtes(persistence, 0.1), BAR), 1e-2)


def _fd_check(reform, seed, t):
    sysF = CorrectorSystem(reform, seed)
    rng = np.random.default_rng(5)
    u = sysF.seed_vector(t) + 1e-3 * rng.standard_normal(sysF.seed_vector(t).size)
    _, J = sysF.residual_and_jacobian(u, t)
    h = 1e-6
    Jfd = np.empty_like(J)
    for k in range(u.size):
        e = np.zeros_like(u)
        e[k] = h
        Jfd[:, k] = (sysF.residual_and_jacobian(u + e, t)[0] - sysF.residual_and_jacobian(u - e, t)[0]) / (2 * h)
    return np.max(np.abs(J - Jfd))


def test_corrector_jacobian(persistence):
    assert _fd_check(persistence, classify_R(persistence, BAR), 1e-2) <= 1e-7
    seed00 = classify_R(persistence, PointXY([0, 0], [0, 1]))
    assert seed00.pattern.a00
    assert _fd_check(persistence, seed00, 1e-2) <= 1e-7


def test_corrector_path_persistence(persistence):
    seed = classify_R(persistence, BAR)
    assert seed.nondegenerate and seed.conditions["NDT6"].ok
    trace = corrector_path(persistence, seed, SCHED)
    assert trace.complete
    for r in trace.records:
        assert r.report.nondegenerate and r.report.QI == 0 == seed.TI
        assert r.kkt_residual <= 1e-10
    assert multiplier_limits(trace).verdict.ok
    audit = index_persistence_audit(trace)
    assert audit.ok and audit.reason == "TI = m = 0 (NDT6 holds)"
    assert audit.relations_hold()


def test_corrector_path_biactive_seed(persistence):
    seed = classify_R(persistence, PointXY([0, 0], [0, 1]))
    assert seed.nondegenerate and seed.TI == 1
    trace = corrector_path(persistence, seed, Schedule(1e-2, 0.1, 1e-6))
    assert trace.complete
    assert all(r.report.QI == 1 for r in trace.records)
    assert index_persistence_audit(trace).ok


def test_corrector_agrees_with_solver(persistence):
    t = 1e-4
    seed = classify_R(persistence, BAR)
    pc = predictor_corrector_F(persistence, seed, t)
    S = build_scholtes(persistence, t)
    sl = solve_local(S, BAR)
    assert pc.converged and sl.converged
    assert_allclose(pc.point.vector(), sl.point.vector(), atol=1e-8)
    assert classify_S(S, pc.point).QI == seed.TI


def test_multiplier_limits_requires_records(persistence):
    trace = corrector_path(persistence, classify_R(persistence, BAR), Schedule(1e-2, 0.1, 1e-3))
    with pytest.raises(ValueError):
        multiplier_limits(trace)
