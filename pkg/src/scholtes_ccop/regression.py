"""End-to-end reproduction of the two built-in worked examples against stored values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .homotopy import PreconditionError, Schedule, predictor_corrector_F, scholtes_path
from .model import PointXY, build_scholtes, load_builtin
from .stationarity import (
    active_gradients_R,
    active_gradients_S,
    classify_R,
    classify_S,
    index_bound_check,
    lagrangian_hessian_S,
)

VALUE_TOL = 1e-8


@dataclass
class Check:
    name: str
    expected: object
    actual: object
    ok: bool

    def line(self) -> str:
        flag = "ok  " if self.ok else "FAIL"
        return f"{flag} {self.name}: expected {self.expected}, got {self.actual}"


class _Collector:
    def __init__(self):
        self.checks: list[Check] = []

    def close(self, name, expected, actual, tol=VALUE_TOL):
        exp = np.asarray(expected, dtype=float)
        act = np.asarray(actual, dtype=float)
        ok = exp.shape == act.shape and bool(np.all(np.abs(exp - act) <= tol))
        self.checks.append(Check(name, _fmt(expected), _fmt(actual), ok))

    def equal(self, name, expected, actual):
        self.checks.append(Check(name, expected, actual, expected == actual))


def _fmt(v):
    a = np.asarray(v, dtype=float)
    return float(a) if a.ndim == 0 else a.round(12).tolist()


def ndt2_example(col: _Collector) -> None:
    reform = load_builtin("ndt2").reform()
    c1 = float(reform.c[0])
    col.close("ndt2/c", [1.0, 1 + 5 / 36], reform.c)
    point = PointXY([0.0, 1.0], [1.0, 0.0])
    for t in (0.05, 0.01, 0.001):
        S = build_scholtes(reform, t)
        pt = PointXY([t, 1.0], [1.0, 0.0])
        rep = classify_S(S, pt)
        m = rep.multipliers
        tag = f"ndt2/S(t={t:g})"
        col.equal(f"{tag} nondegenerate KKT", True, rep.nondegenerate)
        col.close(f"{tag} mu3", c1 + 2 * t - 2 * t * t, m.mu3)
        col.close(f"{tag} eta_le[1]", 2 - 2 * t, m.eta_le.get(0, np.nan))
        col.close(f"{tag} nu[2]", 5 / 36 - 2 * t + 2 * t * t, m.nu.get(1, np.nan))
        col.equal(f"{tag} alpha", 3, active_gradients_S(S, pt, rep.pattern).alpha)
        H = [[2, 0, 2 - 2 * t, 0], [0, 2, 0, 0], [2 - 2 * t, 0, 0, 0], [0, 0, 0, 0]]
        col.close(f"{tag} Hessian", H, lagrangian_hessian_S(S, pt, m))
        col.equal(f"{tag} QI", 0, rep.QI)
    rep = classify_R(reform, point)
    m = rep.multipliers
    col.equal("ndt2/R T-stationary", True, rep.stationary.ok)
    col.close("ndt2/R mu1[1]", 0.0, m.mu1.get(0, np.nan))
    col.close("ndt2/R mu3", c1, m.mu3)
    col.close("ndt2/R sigma1[1]", -2.0, m.sigma1.get(0, np.nan))
    col.close("ndt2/R sigma2[2]", 5 / 36, m.sigma2.get(1, np.nan))
    col.equal("ndt2/R NDT2 violated", False, rep.conditions["NDT2"].ok)
    trace = scholtes_path(reform, PointXY([0.1, 1.0], [1.0, 0.0]), Schedule(1e-1, 0.1, 1e-6))
    lim = trace.limit.point if trace.limit is not None else PointXY([np.nan] * 2, [np.nan] * 2)
    col.close("ndt2/path limit", point.vector(), lim.vector())


def ndt6_example(col: _Collector) -> None:
    reform = load_builtin("ndt6").reform()
    point = PointXY([0.0, 1.0], [1.0, 0.0])
    for t in (0.1, 0.01):
        S = build_scholtes(reform, t)
        rep = classify_S(S, point)
        m = rep.multipliers
        tag = f"ndt6/S(t={t:g})"
        col.equal(f"{tag} nondegenerate KKT", True, rep.nondegenerate)
        col.equal(f"{tag} QI", 1, rep.QI)
        col.close(f"{tag} mu1[1]", 2.0, m.mu1.get(0, np.nan))
        col.close(f"{tag} mu3", 1.0, m.mu3)
        col.close(f"{tag} nu[2]", 1.0, m.nu.get(1, np.nan))
        col.close(f"{tag} Hessian", np.diag([2.0, -4.0, 0.0, 0.0]), lagrangian_hessian_S(S, point, m))
        col.equal(f"{tag} tangent dimension", 1, rep.tangent_dim)
    rep = classify_R(reform, point)
    m = rep.multipliers
    col.equal("ndt6/R alpha", 4, active_gradients_R(reform, point, rep.pattern).alpha)
    col.equal("ndt6/R nondegenerate T-stationary", True, rep.nondegenerate)
    col.close("ndt6/R mu1[1]", 2.0, m.mu1.get(0, np.nan))
    col.close("ndt6/R mu3", 1.0, m.mu3)
    col.close("ndt6/R sigma1[1]", 0.0, m.sigma1.get(0, np.nan), tol=1e-10)
    col.close("ndt6/R sigma2[2]", 1.0, m.sigma2.get(1, np.nan))
    col.equal("ndt6/R TI", 0, rep.TI)
    col.equal("ndt6/R NDT6 fails", False, rep.conditions["NDT6"].ok)
    bound = index_bound_check(1, rep)
    col.equal("ndt6/index bound holds", True, bound.ok)
    col.equal("ndt6/lower bound attained", True, bound.details.get("lower_attained"))
    try:
        predictor_corrector_F(reform, rep, 0.01)
        refused = False
    except PreconditionError:
        refused = True
    col.equal("ndt6/corrector refused", True, refused)


def run_examples() -> list[Check]:
    col = _Collector()
    ndt2_example(col)
    ndt6_example(col)
    return col.checks
