"""Path tracking of KKT points of S(t) as t decreases, and what happens in the limit."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .activesets import InfeasiblePointError, Verdict, _jsonable, compare_patterns, sign_split
from .exprdsl import eval2
from .model import DEFAULT_ZERO_TOL, PointXY, ReformR, build_scholtes
from .nlpsolver import (
    CONVERGED,
    DIVERGED,
    MAX_ITER,
    SolveOutcome,
    SolverConfig,
    kkt_residual,
    solve_local,
    solve_x_restricted,
)
from .stationarity import (
    STRICT_TOL,
    MultiplierSetS,
    StationarityReport,
    classify_R,
    classify_S,
    index_bound_check,
)

MULTIPLIER_LIMIT_TOL = 1e-4


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    t0: float = 1e-1
    theta: float = 0.1
    t_min: float = 1e-8

    def __post_init__(self):
        if not (self.t0 > self.t_min > 0):
            raise ValueError(f"schedule needs t0 > t_min > 0, got t0={self.t0}, t_min={self.t_min}")
        if not (0 < self.theta < 1):
            raise ValueError(f"schedule needs 0 < theta < 1, got {self.theta}")

    def values(self) -> list[float]:
        out, k = [], 0
        while True:
            t = self.t0 * self.theta**k
            if t < self.t_min * (1 - 1e-9):
                return out
            out.append(t)
            k += 1


@dataclass
class HomotopyRecord:
    t: float
    point: PointXY
    multipliers: MultiplierSetS | None
    report: StationarityReport | None
    status: str
    kkt_residual: float
    iterations: int

    @property
    def pattern(self):
        return None if self.report is None else self.report.pattern

    def to_dict(self) -> dict:
        d = {"t": self.t, "x": self.point.x.tolist(), "y": self.point.y.tolist(),
             "status": self.status, "kkt_residual": self.kkt_residual, "iterations": self.iterations}
        if self.report is not None:
            d.update(QI=self.report.QI, nondegenerate=self.report.nondegenerate,
                     pattern=self.report.pattern.to_dict(),
                     multipliers=self.report.multipliers.to_dict())
        return _jsonable(d)


@dataclass
class LimitRecord:
    raw_point: PointXY
    point: PointXY
    snap_radius: float
    report: StationarityReport | None
    message: str = ""

    def to_dict(self) -> dict:
        d = {"raw": {"x": self.raw_point.x.tolist(), "y": self.raw_point.y.tolist()},
             "snap_radius": self.snap_radius, "message": self.message}
        if self.report is not None:
            d["report"] = self.report.to_dict()
        return _jsonable(d)


@dataclass
class HomotopyTrace:
    records: list = field(default_factory=list)
    limit: LimitRecord | None = None
    complete: bool = True
    message: str = ""

    def to_jsonl(self) -> str:
        lines = [json.dumps(r.to_dict()) for r in self.records]
        tail = {"complete": self.complete, "message": self.message,
                "limit": None if self.limit is None else self.limit.to_dict()}
        lines.append(json.dumps(_jsonable(tail)))
        return "\n".join(lines) + "\n"


# -------------------------------------------------------------------- the path


def scholtes_path(reform: ReformR, start: PointXY, schedule: Schedule = Schedule(),
                  config: SolverConfig = SolverConfig(), tol: float = DEFAULT_ZERO_TOL) -> HomotopyTrace:
    """Warm-started local solves of S(t_k), t_k = t0 theta^k, then the limit on R."""
    trace = HomotopyTrace()
    current = start
    for t in schedule.values():
        S = build_scholtes(reform, t)
        out = solve_local(S, current, config)
        report = classify_S(S, out.point, tol) if out.converged else None
        trace.records.append(HomotopyRecord(t, out.point, out.multipliers, report, out.status,
                                            out.kkt_residual, out.iterations))
        if not out.converged:
            trace.complete = False
            trace.message = f"solver {out.status} at t = {t:g} (residual {out.kkt_residual:.3e})"
            return trace
        current = out.point
    if trace.records:
        trace.limit = extract_limit(reform, trace.records[-1].point, trace.records[-1].t, tol, config)
    return trace


def snap_radius(t_last: float, tol: float = DEFAULT_ZERO_TOL) -> float:
    # biactive coordinates decay like sqrt(t)
    return max(tol, 10.0 * math.sqrt(t_last))


def snap_point(reform: ReformR, point: PointXY, radius: float) -> PointXY:
    """Round x_i, y_i to 0 and y_i to 1+eps within ``radius``; fix the fractional y so sum(y) = n-s."""
    x = point.x.copy()
    y = point.y.copy()
    x[np.abs(x) <= radius] = 0.0
    y[np.abs(y) <= radius] = 0.0
    up = reform.y_upper
    y[np.abs(y - up) <= radius] = up
    k = reform.n - reform.s
    loose = [i for i in range(reform.n) if y[i] != 0.0 and y[i] != up]
    if len(loose) == 1 and abs(np.sum(y) - k) <= radius * reform.n:
        i = loose[0]
        y[i] = 0.0
        y[i] = k - np.sum(y)
    return PointXY(x, y)


def extract_limit(reform: ReformR, point: PointXY, t_last: float, tol: float = DEFAULT_ZERO_TOL,
                  config: SolverConfig = SolverConfig()) -> LimitRecord:
    """Snap the last path point to an exact pattern, polish the free x on R, classify."""
    r = snap_radius(t_last, tol)
    snapped = snap_point(reform, point, r)
    prob = reform.problem
    zero = [i for i in range(reform.n) if snapped.x[i] == 0.0]
    active_g = [q for q in range(prob.Q) if abs(eval2(prob.g[q], snapped.x).value) <= r]
    xs = solve_x_restricted(prob, zero, active_g, snapped.x, config)
    if xs.converged and np.max(np.abs(xs.x - snapped.x), initial=0.0) <= r:
        snapped = PointXY(xs.x, snapped.y)
    try:
        report = classify_R(reform, snapped, tol)
    except InfeasiblePointError as exc:
        return LimitRecord(point, snapped, r, None, f"snapped limit infeasible for R: {exc}")
    msg = "T-stationary" if report.stationary.ok else "limit is not T-stationary"
    if report.stationary.ok and not report.nondegenerate:
        msg += "; degenerate: " + ", ".join(f"{k} violated" for k in report.failed_conditions())
    return LimitRecord(point, snapped, r, report, msg)


# ------------------------------------------------------------ multiplier limits


def _extrapolate(ts, vs) -> float:
    """Value at t = 0 of the quadratic in sqrt(t) through the given samples."""
    s = np.sqrt(np.asarray(ts, dtype=float))
    v = np.asarray(vs, dtype=float)
    total = 0.0
    for j in range(len(s)):
        w = 1.0
        for k in range(len(s)):
            if k != j:
                w *= (0.0 - s[k]) / (s[j] - s[k])
        total += w * v[j]
    return float(total)


def _combos(rec: HomotopyRecord, patR) -> dict:
    m = rec.report.multipliers
    x, y = rec.point.x, rec.point.y

    def eta(i):
        return m.eta_ge.get(i, 0.0) - m.eta_le.get(i, 0.0)

    out = {}
    for p, v in enumerate(m.lam):
        out[("lambda", p)] = v
    for q in patR.Q0:
        out[("mu1", q)] = m.mu1.get(q, 0.0)
    for i in patR.E:
        out[("mu2", i)] = m.mu2.get(i, 0.0)
    out[("mu3", -1)] = m.mu3
    for i in patR.a01:
        out[("sigma1", i)] = eta(i) * y[i]
    for i in patR.a10:
        out[("sigma2", i)] = m.nu.get(i, 0.0) + eta(i) * x[i]
    for i in patR.a00:
        out[("rho1", i)] = eta(i) * y[i]
        out[("rho2", i)] = m.nu.get(i, 0.0) + eta(i) * x[i]
    return out


def _direct(mR, key):
    name, i = key
    if name == "lambda":
        return mR.lam[i]
    if name == "mu3":
        return mR.mu3
    return getattr(mR, name)[i]


@dataclass
class MultiplierLimitReport:
    entries: dict  # (family, index) -> dict(extrapolated, direct, last, ok)
    verdict: Verdict

    def to_dict(self) -> dict:
        ent = {f"{k[0]}[{k[1] + 1}]" if k[1] >= 0 else k[0]: v for k, v in sorted(self.entries.items())}
        return _jsonable({"entries": ent, "verdict": self.verdict.to_dict()})


def multiplier_limits(trace: HomotopyTrace, tol: float = MULTIPLIER_LIMIT_TOL) -> MultiplierLimitReport:
    """Limits of the S-multiplier combinations that converge to the R-multipliers."""
    recs = [r for r in trace.records if r.report is not None]
    if len(recs) < 3:
        raise ValueError("multiplier_limits needs at least three classified records")
    if trace.limit is None or trace.limit.report is None:
        raise ValueError("trace has no classified limit")
    repR = trace.limit.report
    last3 = recs[-3:]
    combos = [_combos(r, repR.pattern) for r in last3]
    ts = [r.t for r in last3]
    entries, failures = {}, []
    for key in combos[-1]:
        vals = [c[key] for c in combos]
        ext = _extrapolate(ts, vals)
        direct = float(_direct(repR.multipliers, key))
        ok = abs(ext - direct) <= tol
        entries[key] = {"extrapolated": ext, "direct": direct, "last": float(vals[-1]), "ok": ok}
        if not ok:
            label = key[0] if key[1] < 0 else f"{key[0]}[{key[1] + 1}]"
            failures.append(f"{label}: extrapolated {ext:.8g} vs direct {direct:.8g}")
    return MultiplierLimitReport(entries, Verdict(not failures, failures, {"t": ts}))


# -------------------------------------------------------- predictor-corrector


@dataclass(frozen=True)
class _Layout:
    n: int
    P: int
    Q0: tuple
    E: tuple
    a01: tuple
    a10: tuple
    a00: tuple

    def slices(self):
        sizes = [("x", self.n), ("y", self.n), ("lam", self.P), ("mu1", len(self.Q0)),
                 ("mu2", len(self.E)), ("mu3", 1), ("sigma1", len(self.a01)),
                 ("sigma2", len(self.a10)), ("rho1", len(self.a00)), ("rho2", len(self.a00))]
        out, k = {}, 0
        for name, m in sizes:
            out[name] = slice(k, k + m)
            k += m
        return out, k


class CorrectorSystem:
    """The square system F(t, x, y, lambda, mu, sigma, rho) = 0 around a T-stationary seed.

    Unknowns are stacked as x, y, lambda, mu1 (Q0), mu2 (E), mu3, sigma1 (a01),
    sigma2 (a10), rho1 (a00), rho2 (a00).  Sign splits and the reference values
    x̄, ȳ are frozen from the seed.
    """

    def __init__(self, reform: ReformR, seed: StationarityReport):
        pat = seed.pattern
        m = seed.multipliers
        self.reform = reform
        self.seed = seed
        self.L = _Layout(reform.n, reform.problem.P, tuple(sorted(pat.Q0)), tuple(sorted(pat.E)),
                         tuple(sorted(pat.a01)), tuple(sorted(pat.a10)), tuple(sorted(pat.a00)))
        self.sl, self.size = self.L.slices()
        self.xbar = seed.point.x.copy()
        self.ybar = seed.point.y.copy()
        split = sign_split(pat, m.sigma1, m.sigma2, m.rho1)
        self.a01_neg, self.a10_neg, self.a00_neg = split.a01_neg, split.a10_neg, split.a00_neg
        self.a01_pos, self.a10_pos, self.a00_pos = split.a01_pos, split.a10_pos, split.a00_pos

    def seed_vector(self, t: float) -> np.ndarray:
        """Predictor: the seed with biactive coordinates at their sqrt(t) closed forms."""
        m = self.seed.multipliers
        u = np.zeros(self.size)
        u[self.sl["x"]] = self.xbar
        u[self.sl["y"]] = self.ybar
        u[self.sl["lam"]] = m.lam
        u[self.sl["mu1"]] = [m.mu1[q] for q in self.L.Q0]
        u[self.sl["mu2"]] = [m.mu2[i] for i in self.L.E]
        u[self.sl["mu3"]] = m.mu3
        u[self.sl["sigma1"]] = [m.sigma1[i] for i in self.L.a01]
        u[self.sl["sigma2"]] = [m.sigma2[i] for i in self.L.a10]
        r1 = np.array([m.rho1[i] for i in self.L.a00])
        r2 = np.array([m.rho2[i] for i in self.L.a00])
        u[self.sl["rho1"]] = r1
        u[self.sl["rho2"]] = r2
        n = self.L.n
        for k, i in enumerate(self.L.a00):
            xi, yi = self._biactive(r1[k], r2[k], t, i in self.a00_neg)[:2]
            u[i], u[n + i] = xi, yi
        return u

    @staticmethod
    def _biactive(r1, r2, t, neg):
        """Closed forms for (x_i, y_i) and their partial derivatives in (rho1, rho2)."""
        st = math.sqrt(t)
        if neg:  # rho1 < 0: x = -rho2 sqrt(t)/sqrt(rho1 rho2), y = -rho1 sqrt(t)/sqrt(rho1 rho2)
            p = r1 * r2
            sign = -1.0
        else:  # rho1 > 0: x = rho2 sqrt(t)/sqrt(-rho1 rho2), y = rho1 sqrt(t)/sqrt(-rho1 rho2)
            p = -r1 * r2
            sign = 1.0
        if not p > 0:
            raise FloatingPointError("biactive closed form undefined")
        q = math.sqrt(p)
        x = sign * r2 * st / q
        y = sign * r1 * st / q
        # d(b/sqrt(p))/da with p = +-ab: -b * dp/da / (2 p^1.5); dp/da = +-b
        s = 1.0 if neg else -1.0
        dx_dr1 = sign * st * (-r2 * s * r2 / (2 * p**1.5))
        dx_dr2 = sign * st * (1 / q - r2 * s * r1 / (2 * p**1.5))
        dy_dr1 = sign * st * (1 / q - r1 * s * r2 / (2 * p**1.5))
        dy_dr2 = sign * st * (-r1 * s * r1 / (2 * p**1.5))
        return x, y, dx_dr1, dx_dr2, dy_dr1, dy_dr2

    def residual_and_jacobian(self, u: np.ndarray, t: float):
        L, sl = self.L, self.sl
        n = L.n
        prob = self.reform.problem
        x, y = u[sl["x"]], u[sl["y"]]
        lam, mu1, mu2 = u[sl["lam"]], u[sl["mu1"]], u[sl["mu2"]]
        mu3 = u[sl["mu3"]][0]
        s1, s2 = u[sl["sigma1"]], u[sl["sigma2"]]
        r1, r2 = u[sl["rho1"]], u[sl["rho2"]]
        F = np.zeros(self.size)
        J = np.zeros((self.size, self.size))
        row = 0
        # stationarity block
        fe = eval2(prob.f, x)
        Lv = np.concatenate([fe.gradient, self.reform.c])
        Hxx = fe.hessian.copy()
        cons = [(prob.h[p], lam[p], sl["lam"].start + p) for p in range(L.P)]
        cons += [(prob.g[q], mu1[k], sl["mu1"].start + k) for k, q in enumerate(L.Q0)]
        grads = []
        for ex, mult, col in cons:
            e = eval2(ex, x)
            Lv[:n] -= mult * e.gradient
            Hxx -= mult * e.hessian
            J[:n, col] = -e.gradient
            grads.append(e)
        for k, i in enumerate(L.E):
            Lv[n + i] += mu2[k]
            J[n + i, sl["mu2"].start + k] = 1.0
        Lv[n:] -= mu3
        J[n:2 * n, sl["mu3"].start] = -1.0
        for k, i in enumerate(L.a01):
            w = s1[k] / self.ybar[i]
            Lv[i] -= w * y[i]
            Lv[n + i] -= w * x[i]
            J[i, n + i] -= w
            J[n + i, i] -= w
            col = sl["sigma1"].start + k
            J[i, col] = -y[i] / self.ybar[i]
            J[n + i, col] = -x[i] / self.ybar[i]
        for k, i in enumerate(L.a10):
            col = sl["sigma2"].start + k
            if i in self.a10_neg:
                w = s2[k] / self.xbar[i]
                Lv[i] -= w * y[i]
                Lv[n + i] -= w * x[i]
                J[i, n + i] -= w
                J[n + i, i] -= w
                J[i, col] = -y[i] / self.xbar[i]
                J[n + i, col] = -x[i] / self.xbar[i]
            else:
                Lv[n + i] -= s2[k]
                J[n + i, col] = -1.0
        for k, i in enumerate(L.a00):
            Lv[i] -= r1[k]
            Lv[n + i] -= r2[k]
            J[i, sl["rho1"].start + k] = -1.0
            J[n + i, sl["rho2"].start + k] = -1.0
        F[:2 * n] = Lv
        J[:n, :n] += Hxx
        row = 2 * n
        # feasibility blocks
        for e in grads:
            F[row] = e.value
            J[row, :n] = e.gradient
            row += 1
        for i in L.E:
            F[row] = self.reform.y_upper - y[i]
            J[row, n + i] = -1.0
            row += 1
        F[row] = np.sum(y) - (n - self.reform.s)
        J[row, n:2 * n] = 1.0
        row += 1
        for i in L.a01:
            shift = -t if i in self.a01_neg else t
            F[row] = (x[i] * y[i] + shift) / self.ybar[i]
            J[row, i] = y[i] / self.ybar[i]
            J[row, n + i] = x[i] / self.ybar[i]
            row += 1
        for i in L.a10:
            if i in self.a10_neg:
                F[row] = (np.sign(self.xbar[i]) * x[i] * y[i] - t) / abs(self.xbar[i])
                J[row, i] = y[i] / self.xbar[i]
                J[row, n + i] = x[i] / self.xbar[i]
            else:
                F[row] = y[i]
                J[row, n + i] = 1.0
            row += 1
        for k, i in enumerate(L.a00):
            bx, by, dx1, dx2, dy1, dy2 = self._biactive(r1[k], r2[k], t, i in self.a00_neg)
            c1, c2 = sl["rho1"].start + k, sl["rho2"].start + k
            F[row] = x[i] - bx
            J[row, i] = 1.0
            J[row, c1] = -dx1
            J[row, c2] = -dx2
            F[row + 1] = y[i] - by
            J[row + 1, n + i] = 1.0
            J[row + 1, c1] = -dy1
            J[row + 1, c2] = -dy2
            row += 2
        assert row == self.size
        return F, J

    def s_multipliers(self, u: np.ndarray, t: float) -> MultiplierSetS:
        """Rename the unknowns to multipliers of S(t)."""
        L, sl = self.L, self.sl
        m = MultiplierSetS(u[sl["lam"]].copy(), {q: float(v) for q, v in zip(L.Q0, u[sl["mu1"]])},
                           {i: float(v) for i, v in zip(L.E, u[sl["mu2"]])}, float(u[sl["mu3"]][0]),
                           {}, {}, {})
        for i, v in zip(L.a01, u[sl["sigma1"]]):
            w = float(v / self.ybar[i])
            if i in self.a01_pos:
                m.eta_ge[i] = w
            else:
                m.eta_le[i] = -w
        for i, v in zip(L.a10, u[sl["sigma2"]]):
            if i in self.a10_neg:
                w = float(v / self.xbar[i])
                if w > 0:
                    m.eta_ge[i] = w
                else:
                    m.eta_le[i] = -w
            else:
                m.nu[i] = float(v)
        st = math.sqrt(t)
        for i, a, b in zip(L.a00, u[sl["rho1"]], u[sl["rho2"]]):
            if i in self.a00_neg:
                m.eta_le[i] = math.sqrt(a * b) / st
            else:
                m.eta_ge[i] = math.sqrt(-a * b) / st
        return m


def predictor_corrector_F(reform: ReformR, seed: StationarityReport, t: float,
                          tol: float = 1e-12, max_iter: int = 50,
                          start: np.ndarray | None = None) -> SolveOutcome:
    """Newton's method on F(t, .) = 0 from the predictor; the output is a KKT point of S(t).

    ``multipliers`` on the outcome are the renamed unknowns; ``history`` holds the
    residual norms.  Raises :class:`PreconditionError` unless the seed is a
    nondegenerate T-stationary point satisfying NDT6.
    """
    if not t > 0:
        raise ValueError(f"the corrector system needs t > 0, got {t}")
    if seed.kind != "T-stationary-R":
        raise PreconditionError("seed must be an R-side report")
    if not seed.stationary.ok:
        raise PreconditionError("seed is not T-stationary")
    if not seed.nondegenerate:
        raise PreconditionError("seed degenerate: " + ", ".join(f"{k} fail" for k in seed.failed_conditions()))
    if not seed.conditions["NDT6"].ok:
        raise PreconditionError(f"NDT6 fail, {seed.conditions['NDT6'].witness}")
    m = seed.multipliers
    zero2 = [i for i in seed.pattern.a10 if abs(m.sigma2[i]) <= STRICT_TOL]
    if zero2:
        raise PreconditionError(f"sigma2 vanishes on a10 at {[i + 1 for i in zero2]}")
    sysF = CorrectorSystem(reform, seed)
    u = sysF.seed_vector(t) if start is None else np.array(start, dtype=float)
    history = []
    status = MAX_ITER
    it = 0
    for it in range(max_iter + 1):
        try:
            F, J = sysF.residual_and_jacobian(u, t)
        except FloatingPointError:
            status = DIVERGED
            break
        r = float(np.max(np.abs(F)))
        history.append(r)
        if not math.isfinite(r):
            status = DIVERGED
            break
        if r <= tol:
            status = CONVERGED
            break
        if it == max_iter:
            break
        if len(history) >= 4 and r > history[0] * 1e3:
            status = DIVERGED
            break
        try:
            u = u - np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            status = "singular"
            break
    n = reform.n
    pt = PointXY(u[:n], u[n:2 * n])
    S = build_scholtes(reform, t)
    res, _, pat = kkt_residual(S, pt)
    mults = sysF.s_multipliers(u, t) if status == CONVERGED else None
    return SolveOutcome(pt, status, res, it, mults, pat, history)


def corrector_path(reform: ReformR, seed: StationarityReport, schedule: Schedule,
                   tol: float = DEFAULT_ZERO_TOL) -> HomotopyTrace:
    """The branch of KKT points of S(t) through the seed, one corrector solve per t."""
    trace = HomotopyTrace()
    for t in schedule.values():
        out = predictor_corrector_F(reform, seed, t)
        report = classify_S(build_scholtes(reform, t), out.point, tol) if out.converged else None
        trace.records.append(HomotopyRecord(t, out.point, out.multipliers, report, out.status,
                                            out.kkt_residual, out.iterations))
        if not out.converged:
            trace.complete = False
            trace.message = f"corrector {out.status} at t = {t:g}"
            break
    trace.limit = LimitRecord(seed.point, seed.point, 0.0, seed, "seed")
    return trace


# ---------------------------------------------------------------- index audit


@dataclass
class PersistenceAudit:
    status: str  # "pass", "fail" or "skipped"
    reason: str
    bound: Verdict | None = None
    relations: list = field(default_factory=list)  # (t, Verdict) per record

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    def relations_hold(self, last: int = 3) -> bool:
        return all(v.ok for _, v in self.relations[-last:])

    def to_dict(self) -> dict:
        return _jsonable({
            "status": self.status, "reason": self.reason,
            "bound": None if self.bound is None else self.bound.to_dict(),
            "relations": [{"t": t, **v.to_dict()} for t, v in self.relations],
        })


def index_persistence_audit(trace: HomotopyTrace, last: int = 3) -> PersistenceAudit:
    """Index bounds between the smallest-t record and the limit, plus pattern relations."""
    lim = trace.limit
    if lim is None or lim.report is None:
        return PersistenceAudit("skipped", "no classified limit")
    rep = lim.report
    if not rep.stationary.ok:
        return PersistenceAudit("skipped", "limit is not T-stationary")
    if not rep.nondegenerate:
        failed = ", ".join(f"{k} violated" for k in rep.failed_conditions())
        return PersistenceAudit("skipped", f"limit degenerate: {failed}")
    recs = [r for r in trace.records if r.report is not None]
    if not recs:
        return PersistenceAudit("skipped", "no classified records")
    m = recs[-1].report.QI
    bound = index_bound_check(m, rep)
    relations = [(r.t, compare_patterns(rep.pattern, r.report.pattern)) for r in recs]
    rel_ok = all(v.ok for _, v in relations[-last:])
    if bound.details.get("ndt6"):
        reason = f"TI = m = {m} (NDT6 holds)" if bound.ok else "; ".join(bound.failures)
    else:
        witness = rep.conditions["NDT6"].witness
        lower = bound.details.get("lower")
        reason = (f"{lower} <= TI = {rep.TI} <= m = {m}; equality "
                  f"{'holds' if rep.TI == m else 'fails'} (NDT6 fail: {witness})")
    if not rel_ok:
        reason += "; active-set relations violated"
    return PersistenceAudit("pass" if bound.ok and rel_ok else "fail", reason, bound, relations)
