"""Active index sets at points of R and S(t), and the structural lemmas about them."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .exprdsl import evaluate
from .model import (
    DEFAULT_ZERO_TOL,
    PointXY,
    ReformR,
    RegularizationParams,
    ScholtesS,
    feasibility_R,
    feasibility_S,
)

log = logging.getLogger(__name__)

R_SIDE = "R"
S_SIDE = "S"


class InfeasiblePointError(ValueError):
    pass


@dataclass(frozen=True)
class ActivePattern:
    """All index sets at a point; which fields are meaningful depends on ``side``.

    Sets hold 0-based indices.  ``sum_slack`` is ``sum(y) - (n - s)``.
    """

    side: str
    n: int
    a01: frozenset = frozenset()
    a10: frozenset = frozenset()
    a00: frozenset = frozenset()
    Q0: frozenset = frozenset()
    E: frozenset = frozenset()
    N: frozenset = frozenset()
    Hge: frozenset = frozenset()
    Hle: frozenset = frozenset()
    O: frozenset = frozenset()
    sum_active: bool = False
    sum_slack: float = 0.0
    near_threshold: tuple = field(default=(), compare=False)

    @property
    def H(self) -> frozenset:
        return self.Hge | self.Hle

    def to_dict(self) -> dict:
        def one_based(s):
            return sorted(i + 1 for i in s)

        d = {"side": self.side, "Q0": one_based(self.Q0), "E": one_based(self.E),
             "sum_active": self.sum_active}
        if self.side == R_SIDE:
            d.update(a01=one_based(self.a01), a10=one_based(self.a10), a00=one_based(self.a00))
        else:
            d.update(N=one_based(self.N), Hge=one_based(self.Hge), Hle=one_based(self.Hle),
                     O=one_based(self.O))
        return d


@dataclass(frozen=True)
class SignSplit:
    a01_neg: frozenset
    a01_pos: frozenset
    a10_neg: frozenset
    a10_pos: frozenset
    a00_neg: frozenset
    a00_pos: frozenset


@dataclass
class Verdict:
    ok: bool
    failures: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"ok": self.ok, "failures": list(self.failures), "details": _jsonable(self.details)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _near(values: np.ndarray, tol: float, label: str) -> list[str]:
    a = np.abs(values)
    return [f"{label}[{i + 1}]" for i in np.flatnonzero((a > tol) & (a <= 10 * tol))]


def _common_sets(reform: ReformR, point: PointXY, tol: float):
    x, y = point.x, point.y
    gvals = np.array([evaluate(e, x) for e in reform.problem.g])
    Q0 = frozenset(int(q) for q in np.flatnonzero(np.abs(gvals) <= tol)) if gvals.size else frozenset()
    up = y - reform.y_upper
    E = frozenset(int(i) for i in np.flatnonzero(np.abs(up) <= tol))
    slack = float(np.sum(y) - (reform.n - reform.s))
    near = _near(gvals, tol, "g") + _near(up, tol, "y_upper")
    if tol < abs(slack) <= 10 * tol:
        near.append("sum")
    return Q0, E, slack, abs(slack) <= tol, near


def detect_R(reform: ReformR, point: PointXY, tol: float = DEFAULT_ZERO_TOL,
             warn: bool = True) -> ActivePattern:
    rep = feasibility_R(reform, point, tol)
    if not rep.feasible:
        name, val = rep.worst()
        raise InfeasiblePointError(f"point infeasible for R: {name} violated by {val:.3e}")
    x, y = point.x, point.y
    xz = np.abs(x) <= tol
    yz = np.abs(y) <= tol
    Q0, E, slack, sum_active, near = _common_sets(reform, point, tol)
    near += _near(x, tol, "x") + _near(y, tol, "y")
    if near and warn:
        log.warning("activity decisions within 10x of tol=%g: %s", tol, ", ".join(near))
    return ActivePattern(
        side=R_SIDE,
        n=reform.n,
        a01=frozenset(int(i) for i in np.flatnonzero(xz & ~yz)),
        a10=frozenset(int(i) for i in np.flatnonzero(~xz & yz)),
        a00=frozenset(int(i) for i in np.flatnonzero(xz & yz)),
        Q0=Q0,
        E=E,
        sum_active=sum_active,
        sum_slack=slack,
        near_threshold=tuple(near),
    )


def band_tolerance(t: float, tol: float) -> float:
    """Activity tolerance for the band constraints ``x_i y_i = +-t``.

    Capped at ``t/2`` so that ``x_i y_i = 0`` is never mistaken for ``x_i y_i = t``
    when ``t`` is of the order of ``tol``.
    """
    return min(tol, 0.5 * t)


def detect_S(scholtes: ScholtesS, point: PointXY, tol: float = DEFAULT_ZERO_TOL,
             warn: bool = True) -> ActivePattern:
    rep = feasibility_S(scholtes, point, tol)
    if not rep.feasible:
        name, val = rep.worst()
        raise InfeasiblePointError(f"point infeasible for S(t): {name} violated by {val:.3e}")
    x, y = point.x, point.y
    t = scholtes.t
    btol = band_tolerance(t, tol)
    prod = x * y
    N = np.abs(y) <= tol
    Hge = (np.abs(prod + t) <= btol) & ~N
    Hle = (np.abs(prod - t) <= btol) & ~N
    Q0, E, slack, sum_active, near = _common_sets(scholtes.reform, point, tol)
    near += _near(y, tol, "y") + _near(prod + t, btol, "band_lo") + _near(prod - t, btol, "band_hi")
    if near and warn:
        log.warning("activity decisions within 10x of tol=%g: %s", tol, ", ".join(near))
    E_mask = np.zeros(scholtes.n, bool)
    E_mask[list(E)] = True
    O = ~(E_mask | N | Hge | Hle)
    return ActivePattern(
        side=S_SIDE,
        n=scholtes.n,
        Q0=Q0,
        E=E,
        N=frozenset(int(i) for i in np.flatnonzero(N)),
        Hge=frozenset(int(i) for i in np.flatnonzero(Hge)),
        Hle=frozenset(int(i) for i in np.flatnonzero(Hle)),
        O=frozenset(int(i) for i in np.flatnonzero(O)),
        sum_active=sum_active,
        sum_slack=slack,
        near_threshold=tuple(near),
    )


def check_y_structure_R(pattern: ActivePattern, y, params: RegularizationParams, s: int,
                        tol: float = DEFAULT_ZERO_TOL) -> Verdict:
    """Shape of y at a T-stationary point of R.

    (a) the sum constraint is active, (b) ``|a01| = n - s``, (c) ``n-s-1`` entries
    equal ``1+eps``, one equals ``1-(n-s-1) eps`` and ``s`` vanish.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    eps = params.epsilon
    k = n - s
    failures = []
    total = float(np.sum(y))
    if abs(total - k) > tol:
        failures.append(f"(a) sum(y) = {total:.12g} != n-s = {k}")
    if len(pattern.a01) != k:
        failures.append(f"(b) |a01| = {len(pattern.a01)} != n-s = {k}")
    at_upper = int(np.sum(np.abs(y - (1 + eps)) <= tol))
    frac_val = 1 - (k - 1) * eps
    zeros = int(np.sum(np.abs(y) <= tol))
    # for 0 < eps <= 1/(n-s) the fractional value differs from both 0 and 1+eps
    frac = int(np.sum(np.abs(y - frac_val) <= tol))
    if not (at_upper == k - 1 and frac == 1 and zeros == s):
        failures.append(
            f"(c) counts at 1+eps/{frac_val:.6g}/0 are {at_upper}/{frac}/{zeros}, expected {k - 1}/1/{s}"
        )
    return Verdict(not failures, failures,
                   {"sum": total, "at_upper": at_upper, "fractional": frac, "zeros": zeros})


def check_EandH(pattern: ActivePattern, n: int, s: int) -> Verdict:
    """Index-set counts at a KKT point of S(t)."""
    failures = []
    eh = len(pattern.E | pattern.H)
    if not pattern.sum_active:
        failures.append("(a) sum constraint inactive")
    if eh < n - s - 1:
        failures.append(f"(b) |E u H| = {eh} < n-s-1 = {n - s - 1}")
    if len(pattern.N) > s:
        failures.append(f"(b) |N| = {len(pattern.N)} > s = {s}")
    if len(pattern.O) > 1:
        failures.append(f"(b) |O| = {len(pattern.O)} > 1")
    return Verdict(not failures, failures,
                   {"|E u H|": eh, "|N|": len(pattern.N), "|O|": len(pattern.O)})


def compare_patterns(pattern_R: ActivePattern, pattern_S: ActivePattern) -> Verdict:
    """Relations between the limit pattern on R and a path pattern on S(t).

    (a) Q0 equal, (b) E equal, (c) a00 inside H, (d) N inside a10 inside N u H.
    """
    rel = {
        "a": pattern_R.Q0 == pattern_S.Q0,
        "b": pattern_R.E == pattern_S.E,
        "c": pattern_R.a00 <= pattern_S.H,
        "d": pattern_S.N <= pattern_R.a10 <= (pattern_S.N | pattern_S.H),
    }
    names = {"a": "Q0 equality", "b": "E equality", "c": "a00 in H", "d": "N in a10 in N u H"}
    failures = [f"({k}) {names[k]}" for k, v in rel.items() if not v]
    return Verdict(not failures, failures, rel)


def sign_split(pattern: ActivePattern, sigma1: dict, sigma2: dict, rho1: dict) -> SignSplit:
    """Split a01, a10, a00 by the signs of sigma1, sigma2, rho1 (zeros go nowhere)."""

    def split(idx, vals):
        neg = frozenset(i for i in idx if vals[i] < 0)
        pos = frozenset(i for i in idx if vals[i] > 0)
        return neg, pos

    a01n, a01p = split(pattern.a01, sigma1)
    a10n, a10p = split(pattern.a10, sigma2)
    a00n, a00p = split(pattern.a00, rho1)
    return SignSplit(a01n, a01p, a10n, a10p, a00n, a00p)
