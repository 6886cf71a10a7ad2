"""All T-stationary points of small instances of R, by enumeration of active patterns."""

from __future__ import annotations

import itertools
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .activesets import InfeasiblePointError, _jsonable
from .exprdsl import ExprDomainError, eval2
from .model import DEFAULT_ZERO_TOL, PointXY, ReformR
from .nlpsolver import SolverConfig, solve_x_restricted
from .stationarity import StationarityReport, classify_R

MAX_N = 16
MAX_Q = 8
DEDUP_RADIUS = 1e-6


class AtlasSizeError(ValueError):
    pass


@dataclass(frozen=True)
class PatternCandidate:
    a01: frozenset
    a10: frozenset  # the support of x
    a00: frozenset
    i_star: int  # carries y = 1 - (n-s-1) eps
    Q0: frozenset = frozenset()

    def key(self) -> tuple:
        return (sorted(self.a01), sorted(self.a10), sorted(self.a00), sorted(self.Q0))


def enumerate_patterns(reform: ReformR) -> list[PatternCandidate]:
    n, s = reform.n, reform.s
    Q = reform.problem.Q
    if n > MAX_N:
        raise AtlasSizeError(f"n = {n} exceeds the enumeration guard {MAX_N}")
    if Q > MAX_Q:
        raise AtlasSizeError(f"{Q} inequalities exceed the enumeration guard {MAX_Q}")
    c = reform.c
    q_subsets = [frozenset(sub) for k in range(Q + 1) for sub in itertools.combinations(range(Q), k)]
    out = []
    for a01 in itertools.combinations(range(n), n - s):
        rest = [i for i in range(n) if i not in a01]
        i_star = max(a01, key=lambda i: c[i])
        for mask in itertools.product((False, True), repeat=len(rest)):
            a10 = frozenset(i for i, m in zip(rest, mask) if m)
            a00 = frozenset(i for i, m in zip(rest, mask) if not m)
            for q0 in q_subsets:
                out.append(PatternCandidate(frozenset(a01), a10, a00, i_star, q0))
    return out


def structured_y(reform: ReformR, cand: PatternCandidate) -> np.ndarray:
    """y = 1+eps on a01 minus i*, 1-(n-s-1) eps at i*, 0 elsewhere."""
    y = np.zeros(reform.n)
    for i in cand.a01:
        y[i] = reform.y_upper
    y[cand.i_star] = (reform.n - reform.s) - reform.y_upper * (len(cand.a01) - 1)
    return y


def assembled_multipliers(reform: ReformR, cand: PatternCandidate) -> dict:
    """The y-side multipliers forced by the structure: mu3 = c_i*, mu2 = c_i* - c_i, and
    sigma2 / rho2 = c_i - c_i*."""
    c = reform.c
    cs = float(c[cand.i_star])
    return {"mu3": cs,
            "mu2": {i: cs - float(c[i]) for i in cand.a01 if i != cand.i_star},
            "sigma2": {i: float(c[i]) - cs for i in cand.a10},
            "rho2": {i: float(c[i]) - cs for i in cand.a00}}


def _x_starts(reform, cand):
    n = reform.n
    starts = [np.zeros(n), np.ones(n), -np.ones(n)]
    for x0 in starts:
        x0[list(cand.a01 | cand.a00)] = 0.0
    return starts


def solve_pattern(reform: ReformR, cand: PatternCandidate, config: SolverConfig = SolverConfig(),
                  tol: float = DEFAULT_ZERO_TOL):
    """The T-stationary point realizing ``cand``, or None."""
    prob = reform.problem
    zero = cand.a01 | cand.a00
    y = structured_y(reform, cand)
    for x0 in _x_starts(reform, cand):
        xs = solve_x_restricted(prob, zero, cand.Q0, x0, config)
        if not xs.converged:
            continue
        x = xs.x
        if any(abs(x[i]) <= tol for i in cand.a10):
            continue  # belongs to a smaller support
        try:
            gv = [eval2(g, x).value for g in prob.g]
        except ExprDomainError:
            continue
        if any(v <= tol for q, v in enumerate(gv) if q not in cand.Q0):
            continue  # inactive constraints must be strictly inactive
        point = PointXY(x, y)
        try:
            report = classify_R(reform, point, tol)
        except InfeasiblePointError:
            continue
        if report.pattern.Q0 != cand.Q0 or not report.stationary.ok:
            continue
        return point, report
    return None


@dataclass
class AtlasResult:
    entries: list  # (PointXY, StationarityReport), sorted by pattern key
    candidates: int

    @property
    def points(self) -> list[PointXY]:
        return [p for p, _ in self.entries]

    def ti_histogram(self) -> dict:
        return dict(sorted(Counter(r.TI for _, r in self.entries).items(), key=lambda kv: (kv[0] is None, kv[0] or 0)))

    def x_projection_counts(self) -> list[tuple]:
        groups: list[list] = []
        for p, _ in self.entries:
            for g in groups:
                if np.max(np.abs(g[0] - p.x)) < DEDUP_RADIUS:
                    g[1] += 1
                    break
            else:
                groups.append([p.x, 1])
        return [(tuple(float(v) for v in x), k) for x, k in groups]

    def to_dict(self) -> dict:
        return _jsonable({
            "count": len(self.entries),
            "candidates": self.candidates,
            "ti_histogram": {str(k): v for k, v in self.ti_histogram().items()},
            "x_projections": [{"x": list(x), "count": k} for x, k in self.x_projection_counts()],
            "points": [{"x": p.x.tolist(), "y": p.y.tolist(), "pattern": r.pattern.to_dict(),
                        "QI": r.QI, "BI": r.BI, "TI": r.TI, "nondegenerate": r.nondegenerate,
                        "multipliers": r.multipliers.to_dict()} for p, r in self.entries],
        })


def atlas(reform: ReformR, config: SolverConfig = SolverConfig(), workers: int | None = 1) -> AtlasResult:
    """Deduplicated T-stationary points of R over all enumerated patterns."""
    cands = sorted(enumerate_patterns(reform), key=PatternCandidate.key)
    if workers == 1:
        results = [solve_pattern(reform, c, config) for c in cands]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: solve_pattern(reform, c, config), cands))
    entries: list[tuple[PointXY, StationarityReport]] = []
    for res in results:
        if res is None:
            continue
        p, r = res
        z = p.vector()
        if any(np.max(np.abs(z - q.vector())) < DEDUP_RADIUS for q, _ in entries):
            continue
        entries.append((p, r))
    return AtlasResult(entries, len(cands))
