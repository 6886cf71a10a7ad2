"""Multipliers, nondegeneracy and indices of stationary points of R and S(t).

Sign conventions follow the stationarity equations literally:

* R:  (grad f, c) = sum lam dh + sum mu1 dg - sum mu2 (0,e_i) + mu3 (0,e)
  + sum sigma1 (e_i,0) + sum sigma2 (0,e_i) + sum (rho1 (e_i,0) + rho2 (0,e_i))
* S:  (grad f, c) = sum lam dh + sum mu1 dg - sum mu2 (0,e_i) + mu3 (0,e)
  + sum_{H>=} eta_ge (y_i e_i, x_i e_i) - sum_{H<=} eta_le (y_i e_i, x_i e_i) + sum_N nu (0,e_i)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .activesets import (
    R_SIDE,
    S_SIDE,
    ActivePattern,
    Verdict,
    _jsonable,
    detect_R,
    detect_S,
)
from .exprdsl import BinOp, Num, Var, eval2
from .model import DEFAULT_ZERO_TOL, PointXY, ReformR, ScholtesS, eval_constraints

STATIONARITY_TOL = 1e-8
RANK_TOL = 1e-10
STRICT_TOL = 1e-8
EIG_TOL = 1e-8
NOISE_FLOOR = 1e-12  # below this a multiplier counts as zero, not borderline


class LICQError(np.linalg.LinAlgError):
    pass


# ------------------------------------------------------------ active gradients


class ActiveGradients(NamedTuple):
    matrix: np.ndarray  # shape (2n, alpha), one gradient per column
    labels: list  # ("h", p) ("g", q) ("E", i) ("sum", -1) ("x", i) ("y", i) ("H", i) ("N", i)

    @property
    def alpha(self) -> int:
        return self.matrix.shape[1]


def _unit(k: int, dim: int) -> np.ndarray:
    v = np.zeros(dim)
    v[k] = 1.0
    return v


def _constraint_columns(problem, x, n, pattern):
    cols, labels = [], []
    if problem.h:
        _, jh, _ = eval_constraints(problem.h, x)
        for p in range(problem.P):
            cols.append(np.concatenate([jh[p], np.zeros(n)]))
            labels.append(("h", p))
    q0 = sorted(pattern.Q0)
    if q0:
        _, jg, _ = eval_constraints([problem.g[q] for q in q0], x)
        for row, q in zip(jg, q0):
            cols.append(np.concatenate([row, np.zeros(n)]))
            labels.append(("g", q))
    for i in sorted(pattern.E):
        cols.append(_unit(n + i, 2 * n))
        labels.append(("E", i))
    if pattern.sum_active:
        cols.append(np.concatenate([np.zeros(n), np.ones(n)]))
        labels.append(("sum", -1))
    return cols, labels


def _stack(cols, n) -> np.ndarray:
    if not cols:
        return np.zeros((2 * n, 0))
    return np.column_stack(cols)


def active_gradients_R(reform: ReformR, point: PointXY, pattern: ActivePattern) -> ActiveGradients:
    n = reform.n
    cols, labels = _constraint_columns(reform.problem, point.x, n, pattern)
    for i in sorted(pattern.a01 | pattern.a00):
        cols.append(_unit(i, 2 * n))
        labels.append(("x", i))
    for i in sorted(pattern.a10 | pattern.a00):
        cols.append(_unit(n + i, 2 * n))
        labels.append(("y", i))
    return ActiveGradients(_stack(cols, n), labels)


def active_gradients_S(scholtes: ScholtesS, point: PointXY, pattern: ActivePattern) -> ActiveGradients:
    n = scholtes.n
    if pattern.N & pattern.H:
        raise AssertionError(f"indices {sorted(pattern.N & pattern.H)} in both N and H (impossible for t > 0)")
    cols, labels = _constraint_columns(scholtes.problem, point.x, n, pattern)
    x, y = point.x, point.y
    for i in sorted(pattern.H):
        v = np.zeros(2 * n)
        v[i] = y[i]
        v[n + i] = x[i]
        cols.append(v)
        labels.append(("H", i))
    for i in sorted(pattern.N):
        cols.append(_unit(n + i, 2 * n))
        labels.append(("N", i))
    return ActiveGradients(_stack(cols, n), labels)


@dataclass(frozen=True)
class LICQResult:
    ok: bool
    min_singular_value: float
    max_singular_value: float

    def __bool__(self):
        return self.ok


def check_licq(matrix, rank_tol: float = RANK_TOL) -> LICQResult:
    """Columns are independent iff the smallest singular value exceeds
    ``rank_tol * max(1, largest singular value)``."""
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[1] == 0:
        return LICQResult(True, math.inf, 0.0)
    if A.shape[1] > A.shape[0]:
        sv = np.linalg.svd(A, compute_uv=False)
        return LICQResult(False, 0.0, float(sv[0]))
    sv = np.linalg.svd(A, compute_uv=False)
    smin, smax = float(sv[-1]), float(sv[0])
    return LICQResult(smin > rank_tol * max(1.0, smax), smin, smax)


# ----------------------------------------------------------------- multipliers


def _solve_lsq(A: np.ndarray, b: np.ndarray, method: str):
    if A.shape[1] == 0:
        return np.zeros(0), False
    if method == "svd":
        coef, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
        deficient = rank < A.shape[1]
    elif method == "qr":
        Q, R = np.linalg.qr(A)
        d = np.abs(np.diag(R))
        deficient = A.shape[1] > A.shape[0] or d.min() <= RANK_TOL * max(1.0, d.max())
        if deficient:
            coef = np.linalg.lstsq(A, b, rcond=None)[0]
        else:
            coef = np.linalg.solve(R, Q.T @ b)
    else:
        raise ValueError(f"unknown method {method!r}")
    return coef, bool(deficient)


def _rhs(problem, point: PointXY, c) -> np.ndarray:
    return np.concatenate([eval2(problem.f, point.x).gradient, c])


@dataclass
class MultiplierSetR:
    lam: np.ndarray
    mu1: dict
    mu2: dict
    mu3: float
    sigma1: dict
    sigma2: dict
    rho1: dict
    rho2: dict
    residual: float = 0.0
    rank_deficient: bool = False

    def to_dict(self) -> dict:
        ob = lambda d: {str(k + 1): float(v) for k, v in sorted(d.items())}  # noqa: E731
        return {"lambda": [float(v) for v in self.lam], "mu1": ob(self.mu1), "mu2": ob(self.mu2),
                "mu3": float(self.mu3), "sigma1": ob(self.sigma1), "sigma2": ob(self.sigma2),
                "rho1": ob(self.rho1), "rho2": ob(self.rho2), "residual": float(self.residual),
                "rank_deficient": self.rank_deficient}


@dataclass
class MultiplierSetS:
    lam: np.ndarray
    mu1: dict
    mu2: dict
    mu3: float
    eta_ge: dict
    eta_le: dict
    nu: dict
    residual: float = 0.0
    rank_deficient: bool = False

    def to_dict(self) -> dict:
        ob = lambda d: {str(k + 1): float(v) for k, v in sorted(d.items())}  # noqa: E731
        return {"lambda": [float(v) for v in self.lam], "mu1": ob(self.mu1), "mu2": ob(self.mu2),
                "mu3": float(self.mu3), "eta_ge": ob(self.eta_ge), "eta_le": ob(self.eta_le),
                "nu": ob(self.nu), "residual": float(self.residual),
                "rank_deficient": self.rank_deficient}


def estimate_multipliers_R(reform: ReformR, point: PointXY, pattern: ActivePattern,
                           method: str = "svd") -> tuple[MultiplierSetR, float]:
    """Least-squares multipliers of the T-stationarity equation and its residual (inf-norm)."""
    grads = active_gradients_R(reform, point, pattern)
    b = _rhs(reform.problem, point, reform.c)
    coef, deficient = _solve_lsq(grads.matrix, b, method)
    residual = float(np.max(np.abs(b - grads.matrix @ coef), initial=0.0))
    m = MultiplierSetR(np.zeros(reform.problem.P), {}, {}, 0.0, {}, {}, {}, {}, residual, deficient)
    for (kind, i), v in zip(grads.labels, coef):
        v = float(v)
        if kind == "h":
            m.lam[i] = v
        elif kind == "g":
            m.mu1[i] = v
        elif kind == "E":
            m.mu2[i] = -v
        elif kind == "sum":
            m.mu3 = v
        elif kind == "x":
            (m.sigma1 if i in pattern.a01 else m.rho1)[i] = v
        elif kind == "y":
            (m.sigma2 if i in pattern.a10 else m.rho2)[i] = v
    return m, residual


def estimate_multipliers_S(scholtes: ScholtesS, point: PointXY, pattern: ActivePattern,
                           method: str = "svd") -> tuple[MultiplierSetS, float]:
    grads = active_gradients_S(scholtes, point, pattern)
    b = _rhs(scholtes.problem, point, scholtes.c)
    coef, deficient = _solve_lsq(grads.matrix, b, method)
    residual = float(np.max(np.abs(b - grads.matrix @ coef), initial=0.0))
    m = MultiplierSetS(np.zeros(scholtes.problem.P), {}, {}, 0.0, {}, {}, {}, residual, deficient)
    for (kind, i), v in zip(grads.labels, coef):
        v = float(v)
        if kind == "h":
            m.lam[i] = v
        elif kind == "g":
            m.mu1[i] = v
        elif kind == "E":
            m.mu2[i] = -v
        elif kind == "sum":
            m.mu3 = v
        elif kind == "H":
            if i in pattern.Hge:
                m.eta_ge[i] = v
            else:
                m.eta_le[i] = -v
        elif kind == "N":
            m.nu[i] = v
    return m, residual


def verify_T_stationary(mults: MultiplierSetR, pattern: ActivePattern,
                        tol: float = STATIONARITY_TOL) -> Verdict:
    failures = []
    if mults.residual > tol:
        failures.append(f"tstat-1 residual {mults.residual:.3e} > {tol:g}")
    for q, v in sorted(mults.mu1.items()):
        if v < -tol:
            failures.append(f"tstat-2 mu1[{q + 1}] = {v:.6g} < 0")
    for i, v in sorted(mults.mu2.items()):
        if v < -tol:
            failures.append(f"tstat-2 mu2[{i + 1}] = {v:.6g} < 0")
    if mults.mu3 < -tol:
        failures.append(f"tstat-2 mu3 = {mults.mu3:.6g} < 0")
    if abs(mults.mu3 * pattern.sum_slack) > tol:
        failures.append("tstat-2 mu3 complementarity violated")
    for i in sorted(pattern.a00):
        r1, r2 = mults.rho1.get(i, 0.0), mults.rho2.get(i, 0.0)
        if not (abs(r1) <= tol or r2 <= tol):
            failures.append(f"tstat-3 at {i + 1}: rho1 = {r1:.6g}, rho2 = {r2:.6g}")
    return Verdict(not failures, failures, {"residual": mults.residual})


def verify_KKT(mults: MultiplierSetS, tol: float = STATIONARITY_TOL,
               pattern: ActivePattern | None = None) -> Verdict:
    failures = []
    if mults.residual > tol:
        failures.append(f"kkt-1 residual {mults.residual:.3e} > {tol:g}")
    for name in ("mu1", "mu2", "eta_ge", "eta_le", "nu"):
        for i, v in sorted(getattr(mults, name).items()):
            if v < -tol:
                failures.append(f"{name}[{i + 1}] = {v:.6g} < 0")
    if mults.mu3 < -tol:
        failures.append(f"mu3 = {mults.mu3:.6g} < 0")
    if pattern is not None and abs(mults.mu3 * pattern.sum_slack) > tol:
        failures.append("mu3 complementarity violated")
    return Verdict(not failures, failures, {"residual": mults.residual})


# --------------------------------------------------------------- tangent space


@dataclass(frozen=True)
class TangentBasis:
    Z: np.ndarray  # (2n, dim), orthonormal columns

    @property
    def dim(self) -> int:
        return self.Z.shape[1]


def tangent_basis(matrix, method: str = "qr", rank_tol: float = RANK_TOL) -> TangentBasis:
    """Orthonormal basis of the vectors orthogonal to every active gradient column."""
    A = np.asarray(matrix, dtype=float)
    dim = A.shape[0]
    alpha = A.shape[1]
    lic = check_licq(A, rank_tol)
    if not lic.ok:
        raise LICQError(f"active gradients are dependent (min singular value {lic.min_singular_value:.3e})")
    if alpha == 0:
        return TangentBasis(np.eye(dim))
    if method == "qr":
        Q, _ = np.linalg.qr(A, mode="complete")
        Z = Q[:, alpha:]
    elif method == "svd":
        U, _, _ = np.linalg.svd(A, full_matrices=True)
        Z = U[:, alpha:]
    else:
        raise ValueError(f"unknown method {method!r}")
    return TangentBasis(np.ascontiguousarray(Z))


# -------------------------------------------------------------------- Hessians


def _x_block(problem, x, lam, mu1: dict) -> np.ndarray:
    H = eval2(problem.f, x).hessian
    for p, e in enumerate(problem.h):
        H = H - lam[p] * eval2(e, x).hessian
    for q in sorted(mu1):
        H = H - mu1[q] * eval2(problem.g[q], x).hessian
    return H


def lagrangian_hessian_R(reform: ReformR, point: PointXY, mults) -> np.ndarray:
    """Hessian of the R-Lagrangian; every y-dependent term is linear, so only the x-block is nonzero.

    Accepts either multiplier set (only ``lam`` and ``mu1`` enter).
    """
    n = reform.n
    H = np.zeros((2 * n, 2 * n))
    H[:n, :n] = _x_block(reform.problem, point.x, mults.lam, mults.mu1)
    return H


def cross_term(n: int, i: int) -> np.ndarray:
    """E(i) = e_i e_{n+i}^T + e_{n+i} e_i^T."""
    E = np.zeros((2 * n, 2 * n))
    E[i, n + i] = E[n + i, i] = 1.0
    return E


def lagrangian_hessian_S(scholtes: ScholtesS, point: PointXY, mults: MultiplierSetS) -> np.ndarray:
    """R-Lagrangian Hessian plus the band terms  - sum eta_ge E(i) + sum eta_le E(i)."""
    n = scholtes.n
    H = lagrangian_hessian_R(scholtes.reform, point, mults)
    for i in sorted(mults.eta_ge):
        H = H - mults.eta_ge[i] * cross_term(n, i)
    for i in sorted(mults.eta_le):
        H = H + mults.eta_le[i] * cross_term(n, i)
    return H


def _lifted_band(n: int, i: int, shift: float):
    return BinOp("+", BinOp("*", Var(i + 1), Var(n + i + 1)), Num(shift))


def lagrangian_hessian_S_direct(scholtes: ScholtesS, point: PointXY, mults: MultiplierSetS) -> np.ndarray:
    """Same Hessian, assembled by differentiating every S-constraint over all 2n variables."""
    n = scholtes.n
    z = point.vector()
    prob = scholtes.problem
    H = eval2(prob.f, z).hessian
    for p, e in enumerate(prob.h):
        H = H - mults.lam[p] * eval2(e, z).hessian
    for q in sorted(mults.mu1):
        H = H - mults.mu1[q] * eval2(prob.g[q], z).hessian
    t = scholtes.t
    for i in sorted(mults.eta_ge):
        H = H - mults.eta_ge[i] * eval2(_lifted_band(n, i, t), z).hessian
    for i in sorted(mults.eta_le):
        H = H + mults.eta_le[i] * eval2(_lifted_band(n, i, -t), z).hessian
    return H


def restricted_inertia(H: np.ndarray, basis: TangentBasis, eig_tol: float = EIG_TOL):
    """Eigenvalues of Z^T H Z and their (negative, zero, positive) counts."""
    Z = basis.Z
    if basis.dim == 0:
        return np.zeros(0), (0, 0, 0), 0.0
    Hr = Z.T @ H @ Z
    Hr = 0.5 * (Hr + Hr.T)
    ev = np.linalg.eigvalsh(Hr)
    thr = eig_tol * max(1.0, float(np.max(np.abs(ev))))
    neg = int(np.sum(ev < -thr))
    pos = int(np.sum(ev > thr))
    return ev, (neg, basis.dim - neg - pos, pos), thr


# -------------------------------------------------------------- classification


@dataclass(frozen=True)
class ConditionResult:
    ok: bool
    witness: str = ""
    borderline: bool = False

    def to_dict(self):
        return {"ok": self.ok, "witness": self.witness, "borderline": self.borderline}


@dataclass
class StationarityReport:
    kind: str  # "T-stationary-R" or "KKT-S"
    point: PointXY
    t: float | None
    pattern: ActivePattern
    multipliers: MultiplierSetR | MultiplierSetS
    stationarity_residual: float
    stationary: Verdict
    licq_ok: bool
    licq_min_singular_value: float
    conditions: dict = field(default_factory=dict)
    eigenvalues: np.ndarray | None = None
    inertia: tuple | None = None
    QI: int | None = None
    BI: int | None = None
    TI: int | None = None
    num_active_gradients: int = 0
    tangent_dim: int | None = None

    @property
    def core_conditions(self) -> tuple:
        return ("NDT1", "NDT2", "NDT3", "NDT4") if self.kind == "T-stationary-R" else ("ND1", "ND2", "ND3")

    @property
    def nondegenerate(self) -> bool:
        return self.stationary.ok and all(self.conditions[k].ok for k in self.core_conditions)

    def failed_conditions(self) -> list[str]:
        return [k for k in self.core_conditions if not self.conditions[k].ok]

    def index(self) -> int | None:
        return self.TI if self.kind == "T-stationary-R" else self.QI

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "point": {"x": self.point.x.tolist(), "y": self.point.y.tolist()},
            "t": self.t,
            "pattern": self.pattern.to_dict(),
            "multipliers": self.multipliers.to_dict(),
            "stationarity_residual": self.stationarity_residual,
            "stationary": self.stationary.to_dict(),
            "licq": {"ok": self.licq_ok,
                     "min_singular_value": None if math.isinf(self.licq_min_singular_value)
                     else self.licq_min_singular_value},
            "conditions": {k: v.to_dict() for k, v in self.conditions.items()},
            "nondegenerate": self.nondegenerate,
            "eigenvalues": None if self.eigenvalues is None else self.eigenvalues.tolist(),
            "inertia": None if self.inertia is None else list(self.inertia),
            "QI": self.QI,
            "num_active_gradients": self.num_active_gradients,
            "tangent_dim": self.tangent_dim,
        }
        if self.kind == "T-stationary-R":
            d["BI"] = self.BI
            d["TI"] = self.TI
        return _jsonable(d)

    def to_text(self) -> str:
        lines = [f"{self.kind} report" + (f" (t = {self.t:g})" if self.t is not None else "")]
        lines.append(f"  point x = {np.array2string(self.point.x, precision=10)}, "
                     f"y = {np.array2string(self.point.y, precision=10)}")
        lines.append(f"  pattern {self.pattern.to_dict()}")
        lines.append(f"  stationary: {'yes' if self.stationary.ok else 'NO'} "
                     f"(residual {self.stationarity_residual:.3e})")
        for f in self.stationary.failures:
            lines.append(f"    - {f}")
        lines.append(f"  multipliers {self.multipliers.to_dict()}")
        for k, v in self.conditions.items():
            flag = "pass" if v.ok else "FAIL"
            extra = f" [{v.witness}]" if v.witness else ""
            lines.append(f"  {k}: {flag}{extra}")
        if self.inertia is not None:
            lines.append(f"  restricted Hessian eigenvalues {np.array2string(self.eigenvalues, precision=8)}"
                         f", inertia (neg, zero, pos) = {self.inertia}")
        idx = f"  QI = {self.QI}"
        if self.kind == "T-stationary-R":
            idx += f", BI = {self.BI}, TI = {self.TI}"
        lines.append(idx)
        lines.append(f"  nondegenerate: {self.nondegenerate}")
        return "\n".join(lines)


def _positivity(values: dict, label: str, thr: float):
    bad, border = [], []
    for i, v in sorted(values.items()):
        if v <= thr:
            (border if v > NOISE_FLOOR else bad).append(f"{label}[{i + 1}] = {v:.6g}")
    return bad, border


def _strict_complementarity(groups, thr: float) -> ConditionResult:
    bad, border = [], []
    for values, label in groups:
        b, bo = _positivity(values, label, thr)
        bad += b
        border += bo
    witness = "; ".join(bad + [f"{w} (borderline)" for w in border])
    return ConditionResult(not (bad or border), witness, bool(border))


def _second_order(report_kind, H, grads, eig_tol):
    try:
        basis = tangent_basis(grads.matrix)
    except LICQError:
        return None
    ev, inertia, thr = restricted_inertia(H, basis, eig_tol)
    return basis, ev, inertia, thr


def classify_R(reform: ReformR, point: PointXY, tol: float = DEFAULT_ZERO_TOL,
               stat_tol: float = STATIONARITY_TOL, strict_tol: float = STRICT_TOL,
               eig_tol: float = EIG_TOL, pattern: ActivePattern | None = None) -> StationarityReport:
    """Stationarity verdict, NDT1-NDT4 and NDT6, restricted-Hessian inertia, QI/BI/TI."""
    if pattern is None:
        pattern = detect_R(reform, point, tol)
    grads = active_gradients_R(reform, point, pattern)
    lic = check_licq(grads.matrix)
    mults, residual = estimate_multipliers_R(reform, point, pattern)
    stat = verify_T_stationary(mults, pattern, stat_tol)
    conds = {"NDT1": ConditionResult(lic.ok, "" if lic.ok else
                                     f"min singular value {lic.min_singular_value:.3e}")}
    groups = [(mults.mu1, "mu1"), (mults.mu2, "mu2")]
    if pattern.sum_active:
        groups.append(({0: mults.mu3}, "mu3"))
    conds["NDT2"] = _strict_complementarity(groups, strict_tol)
    bad = []
    for i in sorted(pattern.a00):
        r1, r2 = mults.rho1[i], mults.rho2[i]
        if not (abs(r1) > strict_tol and r2 < -strict_tol):
            bad.append(f"rho1[{i + 1}] = {r1:.6g}, rho2[{i + 1}] = {r2:.6g}")
    conds["NDT3"] = ConditionResult(not bad, "; ".join(bad))
    report = StationarityReport("T-stationary-R", point, None, pattern, mults, residual, stat,
                                lic.ok, lic.min_singular_value, conds,
                                num_active_gradients=grads.alpha)
    so = _second_order("R", lagrangian_hessian_R(reform, point, mults), grads, eig_tol) if lic.ok else None
    if so is None:
        conds["NDT4"] = ConditionResult(False, "undefined: LICQ fails")
    else:
        basis, ev, inertia, thr = so
        report.eigenvalues, report.inertia, report.tangent_dim = ev, inertia, basis.dim
        near = [f"{v:.3e}" for v in ev if abs(v) <= thr]
        conds["NDT4"] = ConditionResult(inertia[1] == 0, ", ".join(f"eigenvalue {w}" for w in near))
        report.QI = inertia[0]
        report.BI = len(pattern.a00)
        report.TI = report.QI + report.BI
    zero_sigma = [f"sigma1[{i + 1}] = 0 (computed {mults.sigma1[i]:.1e})" for i in sorted(pattern.a01)
                  if abs(mults.sigma1[i]) <= strict_tol]
    conds["NDT6"] = ConditionResult(not zero_sigma, "; ".join(zero_sigma))
    return report


def classify_S(scholtes: ScholtesS, point: PointXY, tol: float = DEFAULT_ZERO_TOL,
               stat_tol: float = STATIONARITY_TOL, strict_tol: float = STRICT_TOL,
               eig_tol: float = EIG_TOL, pattern: ActivePattern | None = None) -> StationarityReport:
    """KKT verdict, ND1-ND3, restricted-Hessian inertia and quadratic index."""
    if pattern is None:
        pattern = detect_S(scholtes, point, tol)
    grads = active_gradients_S(scholtes, point, pattern)
    lic = check_licq(grads.matrix)
    mults, residual = estimate_multipliers_S(scholtes, point, pattern)
    stat = verify_KKT(mults, stat_tol, pattern)
    conds = {"ND1": ConditionResult(lic.ok, "" if lic.ok else
                                    f"min singular value {lic.min_singular_value:.3e}")}
    groups = [(mults.mu1, "mu1"), (mults.mu2, "mu2"), (mults.eta_ge, "eta_ge"),
              (mults.eta_le, "eta_le"), (mults.nu, "nu")]
    if pattern.sum_active:
        groups.append(({0: mults.mu3}, "mu3"))
    conds["ND2"] = _strict_complementarity(groups, strict_tol)
    report = StationarityReport("KKT-S", point, scholtes.t, pattern, mults, residual, stat,
                                lic.ok, lic.min_singular_value, conds,
                                num_active_gradients=grads.alpha)
    so = _second_order("S", lagrangian_hessian_S(scholtes, point, mults), grads, eig_tol) if lic.ok else None
    if so is None:
        conds["ND3"] = ConditionResult(False, "undefined: LICQ fails")
    else:
        basis, ev, inertia, thr = so
        report.eigenvalues, report.inertia, report.tangent_dim = ev, inertia, basis.dim
        near = [f"{v:.3e}" for v in ev if abs(v) <= thr]
        conds["ND3"] = ConditionResult(inertia[1] == 0, ", ".join(f"eigenvalue {w}" for w in near))
        report.QI = inertia[0]
    return report


def classify(problem, point: PointXY, **kwargs) -> StationarityReport:
    """Dispatch on the problem type: :class:`ReformR` or :class:`ScholtesS`."""
    if isinstance(problem, ScholtesS):
        return classify_S(problem, point, **kwargs)
    if isinstance(problem, ReformR):
        return classify_R(problem, point, **kwargs)
    raise TypeError(f"cannot classify points of {type(problem).__name__}")


def index_bound_check(m: int, report_R: StationarityReport, pattern: ActivePattern | None = None,
                      strict_tol: float = STRICT_TOL) -> Verdict:
    """Index bounds for a limit of KKT points with quadratic index ``m``.

    ``max(m - #{i in a01 : sigma1_i = 0}, 0) <= TI <= m``, and ``TI = m`` when NDT6 holds.
    """
    pattern = pattern or report_R.pattern
    TI = report_R.TI
    if TI is None:
        return Verdict(False, ["TI undefined (LICQ fails)"], {"m": m})
    zero = sorted(i for i in pattern.a01 if abs(report_R.multipliers.sigma1[i]) <= strict_tol)
    lower = max(m - len(zero), 0)
    ndt6 = not zero
    failures = []
    if TI < lower:
        failures.append(f"TI = {TI} below lower bound {lower}")
    if TI > m:
        failures.append(f"TI = {TI} above upper bound m = {m}")
    if ndt6 and TI != m:
        failures.append(f"NDT6 holds but TI = {TI} != m = {m}")
    details = {"m": m, "TI": TI, "lower": lower, "upper": m,
               "zero_sigma1": [i + 1 for i in zero], "ndt6": ndt6,
               "lower_attained": TI == lower, "equality": TI == m}
    return Verdict(not failures, failures, details)
