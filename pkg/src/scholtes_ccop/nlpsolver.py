"""Local KKT points of S(t) by an active-set SQP method.

The QP subproblems are solved by a primal active-set method with the
null-space approach; the Hessian is shifted by ``tau * I`` until it is
positive definite on the null space of the working set.  Globalization
uses the l1 exact penalty with Armijo backtracking and a second-order
correction.  Near a solution a Newton polish on the frozen active set
drives the KKT residual to round-off.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .activesets import ActivePattern, InfeasiblePointError, detect_S
from .exprdsl import ExprDomainError, eval2
from .model import PointXY, ScholtesS, feasibility_S
from .stationarity import MultiplierSetS, estimate_multipliers_S

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITER = "max_iter"
LINE_SEARCH_FAILURE = "line_search_failure"
SINGULAR = "singular"
DIVERGED = "diverged"

TAU_SEQUENCE = (0.0,) + tuple(10.0**k for k in range(-4, 7))  # 0, 1e-4, ..., 1e6


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 200
    kkt_tol: float = 1e-10
    armijo: float = 1e-4
    backtrack: float = 0.5
    penalty_factor: float = 10.0
    step_floor: float = 1e-14
    polish_trigger: float = 1e-6
    polish_tol: float = 1e-12
    polish_max_iter: int = 20

    def __post_init__(self):
        for name in ("max_iter", "kkt_tol", "armijo", "backtrack", "penalty_factor",
                     "step_floor", "polish_trigger", "polish_tol", "polish_max_iter"):
            if not getattr(self, name) > 0:
                raise ValueError(f"SolverConfig.{name} must be positive")
        if not self.backtrack < 1:
            raise ValueError("SolverConfig.backtrack must lie in (0, 1)")


@dataclass
class SolveOutcome:
    point: PointXY
    status: str
    kkt_residual: float
    iterations: int
    multipliers: MultiplierSetS | None = None
    pattern: ActivePattern | None = None
    history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


# ------------------------------------------------------------ problem in z-space


class _SProblem:
    """S(t) over z = (x, y) with equalities e(z) = 0 and inequalities c(z) >= 0.

    Inequality order: g_q, y_i >= 0, y_i <= 1+eps, sum y >= n-s, x_i y_i >= -t, x_i y_i <= t.
    """

    def __init__(self, scholtes: ScholtesS):
        self.S = scholtes
        self.n = n = scholtes.n
        self.dim = 2 * n
        prob = scholtes.problem
        self.P, self.Q = prob.P, prob.Q
        self.labels = ([("g", q) for q in range(self.Q)] + [("ylo", i) for i in range(n)]
                       + [("yup", i) for i in range(n)] + [("sum", -1)]
                       + [("bge", i) for i in range(n)] + [("ble", i) for i in range(n)])
        self.m_in = len(self.labels)
        # linear part of the y-constraints
        J = np.zeros((2 * n + 1, 2 * n))
        J[:n, n:] = np.eye(n)
        J[n:2 * n, n:] = -np.eye(n)
        J[2 * n, n:] = 1.0
        self._J_lin = J

    def objective(self, z):
        n = self.n
        e = eval2(self.S.problem.f, z[:n])
        grad = np.concatenate([e.gradient, self.S.c])
        H = np.zeros((2 * n, 2 * n))
        H[:n, :n] = e.hessian
        return e.value + float(self.S.c @ z[n:]), grad, H

    def objective_value(self, z):
        return self.objective(z)[0]

    def _lift(self, exprs, x):
        n = self.n
        vals, J, Hs = [], [], []
        for ex in exprs:
            e = eval2(ex, x)
            vals.append(e.value)
            J.append(np.concatenate([e.gradient, np.zeros(n)]))
            H = np.zeros((2 * n, 2 * n))
            H[:n, :n] = e.hessian
            Hs.append(H)
        return np.array(vals), np.array(J).reshape(len(exprs), 2 * n), Hs

    def equalities(self, z):
        return self._lift(self.S.problem.h, z[:self.n])

    def inequalities(self, z, need_hess=True):
        n, t = self.n, self.S.t
        x, y = z[:n], z[n:]
        gv, gJ, gH = self._lift(self.S.problem.g, x)
        lin_vals = np.concatenate([y, self.S.y_upper - y, [np.sum(y) - (n - self.S.s)]])
        prod = x * y
        band_J = np.zeros((n, 2 * n))
        band_J[np.arange(n), np.arange(n)] = y
        band_J[np.arange(n), n + np.arange(n)] = x
        vals = np.concatenate([gv, lin_vals, prod + t, t - prod])
        J = np.vstack([gJ, self._J_lin, band_J, -band_J])
        if not need_hess:
            return vals, J, None
        Hs = list(gH) + [None] * (2 * n + 1)
        for sign in (1.0, -1.0):
            for i in range(n):
                H = np.zeros((2 * n, 2 * n))
                H[i, n + i] = H[n + i, i] = sign
                Hs.append(H)
        return vals, J, Hs

    def violation(self, z) -> float:
        ev = self.equalities(z)[0]
        cv = self.inequalities(z, need_hess=False)[0]
        return float(np.sum(np.abs(ev)) + np.sum(np.maximum(0.0, -cv)))

    def lagrangian_hessian(self, z, lam, mu):
        H = self.objective(z)[2]
        _, _, eH = self.equalities(z)
        _, _, cH = self.inequalities(z)
        for lv, Hp in zip(lam, eH):
            H = H - lv * Hp
        for mv, Hq in zip(mu, cH):
            if Hq is not None and mv != 0.0:
                H = H - mv * Hq
        return H


# ------------------------------------------------------------------ QP solver


class _InertiaError(Exception):
    pass


class _QPFailure(Exception):
    pass


@dataclass
class _QPResult:
    d: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    working: list


def _independent_rows(A: np.ndarray, candidates, base=()):
    """Greedy selection of candidate rows keeping ``base`` rows plus chosen ones independent."""
    chosen = list(base)
    rank = np.linalg.matrix_rank(A[chosen]) if chosen else 0
    picked = []
    for j in candidates:
        trial = chosen + [j]
        r = np.linalg.matrix_rank(A[trial], tol=1e-10)
        if r > rank:
            chosen, rank = trial, r
            picked.append(j)
    return picked


def _phase1(Aeq, beq, Ain, bin_, fix, box):
    """Minimum l1-norm d with Aeq d = beq, Ain d >= bin and Ain[fix] d = bin[fix]."""
    m = Aeq.shape[1] if Aeq.size else Ain.shape[1]
    # variables (d, s) with |d| <= s, objective sum(s)
    c = np.concatenate([np.zeros(m), np.ones(m)])
    I = np.eye(m)
    A_ub = [np.hstack([I, -I]), np.hstack([-I, -I])]
    b_ub = [np.zeros(m), np.zeros(m)]
    free = [j for j in range(Ain.shape[0]) if j not in fix]
    if free:
        A_ub.append(np.hstack([-Ain[free], np.zeros((len(free), m))]))
        b_ub.append(-bin_[free])
    A_eq = [np.hstack([Aeq, np.zeros((Aeq.shape[0], m))])] if Aeq.shape[0] else []
    b_eq = [beq] if Aeq.shape[0] else []
    if fix:
        A_eq.append(np.hstack([Ain[fix], np.zeros((len(fix), m))]))
        b_eq.append(bin_[fix])
    bounds = [(-box, box)] * m + [(0, None)] * m
    res = linprog(c, A_ub=np.vstack(A_ub), b_ub=np.concatenate(b_ub),
                  A_eq=np.vstack(A_eq) if A_eq else None,
                  b_eq=np.concatenate(b_eq) if b_eq else None,
                  bounds=bounds, method="highs")
    return res.x[:m] if res.status == 0 else None


def _solve_qp(G, g, Aeq, beq, Ain, bin_, warm=(), box=1e3, max_iter=500) -> _QPResult:
    """min 1/2 d'Gd + g'd  s.t.  Aeq d = beq, Ain d >= bin  (primal active set, null-space EQPs)."""
    m = G.shape[0]
    me = Aeq.shape[0]
    A = np.vstack([Aeq, Ain]) if me else Ain
    warm = [j for j in warm if j < Ain.shape[0]]
    d = _phase1(Aeq, beq, Ain, bin_, warm, box) if warm else None
    if d is None:
        d = _phase1(Aeq, beq, Ain, bin_, [], box)
        warm = []
    if d is None:
        raise _QPFailure("linearized constraints infeasible")
    slack = Ain @ d - bin_
    act = [j for j in range(Ain.shape[0]) if abs(slack[j]) <= 1e-9]
    act = sorted(set(warm) | set(act), key=lambda j: (j not in warm, j))
    eq_rows = list(range(me))
    W = _independent_rows(A, [me + j for j in act], eq_rows)
    W = [w - me for w in W]
    for _ in range(max_iter):
        rows = eq_rows + [me + j for j in W]
        AW = A[rows] if rows else np.zeros((0, m))
        Z = null_space(AW) if AW.shape[0] else np.eye(m)
        grad = G @ d + g
        if Z.shape[1]:
            Hr = Z.T @ G @ Z
            Hr = 0.5 * (Hr + Hr.T)
            try:
                L = np.linalg.cholesky(Hr)
            except np.linalg.LinAlgError:
                raise _InertiaError from None
            if np.min(np.diag(L)) ** 2 <= 1e-12 * max(1.0, np.max(np.abs(Hr))):
                raise _InertiaError
            u = -np.linalg.solve(Hr, Z.T @ grad)
            p = Z @ u
        else:
            p = np.zeros(m)
        if np.linalg.norm(p, np.inf) <= 1e-13 * max(1.0, np.linalg.norm(d, np.inf)):
            mult = np.linalg.lstsq(AW.T, grad, rcond=None)[0] if rows else np.zeros(0)
            ineq_mult = mult[me:]
            if not W or np.min(ineq_mult) >= -1e-12:
                lam = mult[:me]
                mu = np.zeros(Ain.shape[0])
                mu[W] = ineq_mult
                return _QPResult(d, lam, np.maximum(mu, 0.0), list(W))
            W.pop(int(np.argmin(ineq_mult)))  # most negative multiplier leaves
            continue
        Ap = Ain @ p
        alpha, block = 1.0, None
        for j in range(Ain.shape[0]):
            if j in W or Ap[j] >= -1e-14:
                continue
            step = (bin_[j] - Ain[j] @ d) / Ap[j]
            if step < alpha:
                alpha, block = max(step, 0.0), j
        d = d + alpha * p
        if block is not None:
            W.append(block)
    raise _QPFailure("QP active-set iteration limit")


# -------------------------------------------------------------- KKT residual


def kkt_residual(scholtes: ScholtesS, point: PointXY, tol: float = 1e-8):
    """Max of feasibility violation, stationarity defect, multiplier sign defect and
    complementarity products over the constraints treated as active.  Returns (residual, multipliers, pattern)."""
    try:
        rep = feasibility_S(scholtes, point, tol)
        if not rep.feasible:
            return rep.max_violation, None, None
        pattern = detect_S(scholtes, point, tol, warn=False)
        mults, res = estimate_multipliers_S(scholtes, point, pattern)
    except (InfeasiblePointError, ExprDomainError):
        return np.inf, None, None
    signs = [-v for fam in (mults.mu1, mults.mu2, mults.eta_ge, mults.eta_le, mults.nu)
             for v in fam.values()]
    if pattern.sum_active:
        signs.append(-mults.mu3)
    act = [abs(v * w) for v, w in _active_values(scholtes, point, pattern, mults)]
    r = max([rep.max_violation, res] + signs + act + [0.0])
    return float(r), mults, pattern


def _active_values(scholtes, point, pattern, mults):
    """(constraint value, multiplier) for every constraint treated as active."""
    x, y = point.x, point.y
    t = scholtes.t
    prob = scholtes.problem
    out = [(eval2(prob.g[q], x).value, mults.mu1[q]) for q in pattern.Q0]
    out += [(y[i] - scholtes.y_upper, mults.mu2[i]) for i in pattern.E]
    out += [(y[i], mults.nu[i]) for i in pattern.N]
    out += [(x[i] * y[i] + t, mults.eta_ge[i]) for i in pattern.Hge]
    out += [(x[i] * y[i] - t, mults.eta_le[i]) for i in pattern.Hle]
    if pattern.sum_active:
        out.append((pattern.sum_slack, mults.mu3))
    return out


# ---------------------------------------------------------------- Newton polish


def _frozen_system(sp: _SProblem, pattern: ActivePattern):
    """Indices (equalities all, plus inequality rows) frozen as active by ``pattern``."""
    n = sp.n
    Q = sp.Q
    rows = [q for q in sorted(pattern.Q0)]
    rows += [Q + i for i in sorted(pattern.N)]
    rows += [Q + n + i for i in sorted(pattern.E)]
    if pattern.sum_active:
        rows.append(Q + 2 * n)
    rows += [Q + 2 * n + 1 + i for i in sorted(pattern.Hge)]
    rows += [Q + 3 * n + 1 + i for i in sorted(pattern.Hle)]
    return rows


def _polish_residual(sp, z, kappa, rows):
    _, gF, _ = sp.objective(z)
    ev, eJ, _ = sp.equalities(z)
    cv, cJ, _ = sp.inequalities(z, need_hess=False)
    J = np.vstack([eJ, cJ[rows]])
    a = np.concatenate([ev, cv[rows]])
    r = np.concatenate([gF - J.T @ kappa, a])
    return r, J


def newton_polish(scholtes: ScholtesS, point: PointXY, pattern: ActivePattern | None = None,
                  config: SolverConfig = SolverConfig()) -> SolveOutcome:
    """Newton's method on the square KKT system of a frozen active set."""
    sp = _SProblem(scholtes)
    if pattern is None:
        pattern = detect_S(scholtes, point)
    rows = _frozen_system(sp, pattern)
    z = point.vector().copy()
    n_eq = sp.P
    _, J0 = _polish_residual(sp, z, np.zeros(n_eq + len(rows)), rows)
    gF = sp.objective(z)[1]
    kappa = np.linalg.lstsq(J0.T, gF, rcond=None)[0] if J0.shape[0] else np.zeros(0)
    history = []
    status = MAX_ITER
    it = 0
    for it in range(config.polish_max_iter + 1):
        r, J = _polish_residual(sp, z, kappa, rows)
        rn = float(np.max(np.abs(r), initial=0.0))
        history.append(rn)
        if rn <= config.polish_tol:
            status = CONVERGED
            break
        if it == config.polish_max_iter:
            break
        if len(history) >= 3 and history[-1] > history[-2] > history[-3]:
            status = DIVERGED
            break
        lam = kappa[:n_eq]
        mu = np.zeros(sp.m_in)
        mu[rows] = kappa[n_eq:]
        W = sp.lagrangian_hessian(z, lam, mu)
        k = J.shape[0]
        K = np.block([[W, -J.T], [J, np.zeros((k, k))]])
        try:
            step = np.linalg.solve(K, -r)
        except np.linalg.LinAlgError:
            status = SINGULAR
            break
        if not np.all(np.isfinite(step)) or np.linalg.cond(K) > 1e14:
            status = SINGULAR
            break
        z = z + step[:2 * sp.n]
        kappa = kappa + step[2 * sp.n:]
    pt = PointXY.from_vector(z)
    res, mults, pat = kkt_residual(scholtes, pt)
    if status == CONVERGED and res > config.kkt_tol:
        status = DIVERGED  # KKT of the frozen system but not of S(t): wrong pattern
    return SolveOutcome(pt, status, res, it, mults, pat, history)


# ------------------------------------------------------------------------ SQP


def _project_start(scholtes: ScholtesS, start: PointXY) -> np.ndarray:
    z = start.vector().copy()
    n = scholtes.n
    z[n:] = np.clip(z[n:], 0.0, scholtes.y_upper)
    return z


def solve_local(scholtes: ScholtesS, start: PointXY, config: SolverConfig = SolverConfig()) -> SolveOutcome:
    """Local KKT point of S(t) from ``start``.  Never raises on nonconvergence."""
    sp = _SProblem(scholtes)
    z = _project_start(scholtes, start)
    lam = np.zeros(sp.P)
    mu = np.zeros(sp.m_in)
    rho = 1.0
    working: list = []
    history = []
    last = None

    def merit(zz, rho_):
        try:
            return sp.objective_value(zz) + rho_ * sp.violation(zz)
        except ExprDomainError:
            return np.inf

    for it in range(config.max_iter + 1):
        pt = PointXY.from_vector(z)
        res, mults, pat = kkt_residual(scholtes, pt)
        history.append(res)
        if res <= config.kkt_tol:
            return SolveOutcome(pt, CONVERGED, res, it, mults, pat, history)
        if res <= config.polish_trigger and pat is not None:
            pol = newton_polish(scholtes, pt, pat, config)
            if pol.converged:
                pol.iterations = it
                pol.history = history + pol.history
                return pol
        if it == config.max_iter:
            break
        f0, gF, _ = sp.objective(z)
        ev, eJ, _ = sp.equalities(z)
        cv, cJ, _ = sp.inequalities(z, need_hess=False)
        W = sp.lagrangian_hessian(z, lam, mu)
        qp = None
        for tau in TAU_SEQUENCE:
            G = W + tau * np.eye(sp.dim)
            try:
                qp = _solve_qp(G, gF, eJ, -ev, cJ, -cv, warm=working)
                break
            except _InertiaError:
                continue
            except _QPFailure:
                qp = None
                break
        if qp is None:
            d = _restoration_step(sp, z, eJ, ev, cJ, cv)
            if d is None:
                last = LINE_SEARCH_FAILURE
                break
            new_lam, new_mu, new_working = lam, mu, working
        else:
            d, new_lam, new_mu, new_working = qp.d, qp.lam, qp.mu, qp.working
            bound = float(np.max(np.abs(np.concatenate([new_lam, new_mu])), initial=0.0))
            if rho < 1.1 * bound:
                rho = max(config.penalty_factor * rho, 1.1 * bound)
        if np.linalg.norm(d, np.inf) <= config.step_floor:
            lam, mu, working = new_lam, new_mu, new_working
            continue
        phi0 = merit(z, rho)
        viol0 = sp.violation(z)
        D = float(gF @ d) - rho * viol0
        if qp is None:
            D = -viol0
        alpha = 1.0
        accepted = False
        while alpha * np.linalg.norm(d, np.inf) > config.step_floor:
            trial = z + alpha * d
            if merit(trial, rho) <= phi0 + config.armijo * alpha * min(D, 0.0):
                z = trial
                accepted = True
                break
            if alpha == 1.0 and qp is not None:
                soc = _second_order_correction(sp, trial, new_working)
                if soc is not None and merit(soc, rho) <= phi0 + config.armijo * min(D, 0.0):
                    z = soc
                    accepted = True
                    break
            alpha *= config.backtrack
        if not accepted:
            last = LINE_SEARCH_FAILURE
            break
        lam, mu, working = new_lam, new_mu, new_working
    pt = PointXY.from_vector(z)
    res, mults, pat = kkt_residual(scholtes, pt)
    return SolveOutcome(pt, last or MAX_ITER, res, len(history) - 1, mults, pat, history)


def _second_order_correction(sp: _SProblem, trial: np.ndarray, working: list):
    """Least-norm step restoring the working-set constraints at ``trial``."""
    try:
        ev, eJ, _ = sp.equalities(trial)
        cv, cJ, _ = sp.inequalities(trial, need_hess=False)
    except ExprDomainError:
        return None
    A = np.vstack([eJ, cJ[working]]) if working else eJ
    b = np.concatenate([ev, cv[working]]) if working else ev
    if A.shape[0] == 0:
        return None
    corr = np.linalg.lstsq(A, -b, rcond=None)[0]
    return trial + corr


def _restoration_step(sp: _SProblem, z, eJ, ev, cJ, cv):
    """LP step minimizing the l1 violation of the linearized constraints in an inf-norm box."""
    m = sp.dim
    me, mi = eJ.shape[0], cJ.shape[0]
    box = max(1.0, float(np.linalg.norm(z, np.inf)))
    # variables: d (m), p, q >= 0 for equalities, r >= 0 for inequalities
    nv = m + 2 * me + mi
    c = np.concatenate([np.zeros(m), np.ones(2 * me + mi)])
    A_eq = np.hstack([eJ, -np.eye(me), np.eye(me), np.zeros((me, mi))]) if me else None
    b_eq = -ev if me else None
    A_ub = np.hstack([-cJ, np.zeros((mi, 2 * me)), -np.eye(mi)])
    b_ub = cv
    bounds = [(-box, box)] * m + [(0, None)] * (nv - m)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        return None
    return res.x[:m]


def solve_many(scholtes: ScholtesS, starts, config: SolverConfig = SolverConfig(),
               workers: int | None = None) -> list[SolveOutcome]:
    """Independent local solves, one per start, in input order."""
    starts = list(starts)
    if workers == 1 or len(starts) <= 1:
        return [solve_local(scholtes, s, config) for s in starts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: solve_local(scholtes, s, config), starts))


# ------------------------------------------------------- restricted x-space solve


@dataclass
class XSolve:
    x: np.ndarray
    lam: np.ndarray  # over P
    mu: dict  # over the active inequalities, keyed by q
    sigma: dict  # gradient defect on the fixed-zero coordinates
    status: str
    residual: float
    iterations: int

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def solve_x_restricted(problem, zero, active_g, x0, config: SolverConfig = SolverConfig()) -> XSolve:
    """Stationary point of  min f(x)  s.t.  h(x) = 0, g_q(x) = 0 (q in active_g), x_i = 0 (i in zero).

    Same SQP machinery as :func:`solve_local` on the free coordinates.  ``sigma``
    holds the multipliers of the fixed zeros, i.e. the remaining gradient entries.
    """
    n = problem.n
    zero = sorted(zero)
    active_g = sorted(active_g)
    free = [i for i in range(n) if i not in set(zero)]
    exprs = list(problem.h) + [problem.g[q] for q in active_g]
    x = np.array(x0, dtype=float).copy()
    x[zero] = 0.0
    rho = 1.0
    kappa = np.zeros(len(exprs))
    history = []

    def parts(xx):
        fe = eval2(problem.f, xx)
        ce = [eval2(e, xx) for e in exprs]
        cv = np.array([e.value for e in ce])
        cJ = np.array([e.gradient for e in ce]).reshape(len(ce), n)
        return fe, ce, cv, cJ

    def merit(xx):
        try:
            fe, _, cv, _ = parts(xx)
        except ExprDomainError:
            return np.inf
        return fe.value + rho * float(np.sum(np.abs(cv)))

    status = MAX_ITER
    it = 0
    for it in range(config.max_iter + 1):
        try:
            fe, ce, cv, cJ = parts(x)
        except ExprDomainError:
            status = LINE_SEARCH_FAILURE
            break
        Jf = cJ[:, free]
        gf = fe.gradient[free]
        kappa = np.linalg.lstsq(Jf.T, gf, rcond=None)[0] if len(exprs) else np.zeros(0)
        res = float(max(np.max(np.abs(gf - Jf.T @ kappa), initial=0.0), np.max(np.abs(cv), initial=0.0)))
        history.append(res)
        if res <= config.kkt_tol:
            status = CONVERGED
            break
        if it == config.max_iter or not free:
            break
        H = fe.hessian
        for k, e in enumerate(ce):
            H = H - kappa[k] * e.hessian
        G0 = H[np.ix_(free, free)]
        qp = None
        for tau in TAU_SEQUENCE:
            try:
                qp = _solve_qp(G0 + tau * np.eye(len(free)), gf, Jf, -cv, np.zeros((0, len(free))), np.zeros(0))
                break
            except _InertiaError:
                continue
            except _QPFailure:
                break
        if qp is None:
            status = LINE_SEARCH_FAILURE
            break
        bound = float(np.max(np.abs(qp.lam), initial=0.0))
        if rho < 1.1 * bound:
            rho = max(config.penalty_factor * rho, 1.1 * bound)
        d = np.zeros(n)
        d[free] = qp.d
        phi0 = merit(x)
        D = float(fe.gradient @ d) - rho * float(np.sum(np.abs(cv)))
        alpha = 1.0
        while alpha * np.linalg.norm(d, np.inf) > config.step_floor:
            if merit(x + alpha * d) <= phi0 + config.armijo * alpha * min(D, 0.0):
                break
            alpha *= config.backtrack
        else:
            status = LINE_SEARCH_FAILURE
            break
        x = x + alpha * d
    fe = eval2(problem.f, x)
    grad = fe.gradient.copy()
    if exprs:
        cJ = np.array([eval2(e, x).gradient for e in exprs]).reshape(len(exprs), n)
        grad = grad - cJ.T @ kappa
    lam = kappa[:problem.P]
    mu = {q: float(v) for q, v in zip(active_g, kappa[problem.P:])}
    sigma = {i: float(grad[i]) for i in zero}
    return XSolve(x, lam, mu, sigma, status, history[-1] if history else np.inf, it)
