"""Cardinality-constrained problems and their two smooth relatives.

A :class:`ProblemCCOP` is ``min f(x) s.t. h(x)=0, g(x)>=0, ||x||_0 <= s``.
:class:`ReformR` lifts it with auxiliary ``y`` (orthogonality ``x_i y_i = 0``,
``0 <= y_i <= 1+eps``, ``sum(y) >= n-s``, objective ``f(x) + c^T y``), and
:class:`ScholtesS` relaxes orthogonality to the band ``-t <= x_i y_i <= t``.

Index conventions: all index sets and arrays are 0-based internally; the
problem-file format and JSON reports use 1-based indices as written in
expressions (``x1 .. xn``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .exprdsl import Expr, ExprDomainError, ExprSyntaxError, eval2, evaluate, max_var_index, parse_expression

DEFAULT_ZERO_TOL = 1e-8


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemCCOP:
    n: int
    s: int
    f: Expr
    h: tuple[Expr, ...] = ()
    g: tuple[Expr, ...] = ()
    # source text, kept for reports and re-serialization
    texts: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("n must be a positive integer")
        if not 0 <= self.s <= self.n - 1:
            raise ModelError(f"s must lie in 0..n-1, got s={self.s}, n={self.n}")
        for e in (self.f, *self.h, *self.g):
            if max_var_index(e) > self.n:
                raise ModelError("expression references a variable beyond x_n")
        object.__setattr__(self, "h", tuple(self.h))
        object.__setattr__(self, "g", tuple(self.g))

    @classmethod
    def from_strings(cls, n: int, s: int, objective: str,
                     equalities: Sequence[str] = (), inequalities: Sequence[str] = ()):
        return cls(
            n,
            s,
            parse_expression(objective, n),
            tuple(parse_expression(t, n) for t in equalities),
            tuple(parse_expression(t, n) for t in inequalities),
            texts={"objective": objective, "equalities": list(equalities),
                   "inequalities": list(inequalities)},
        )

    @property
    def P(self) -> int:
        return len(self.h)

    @property
    def Q(self) -> int:
        return len(self.g)

    def expressions(self) -> list[Expr]:
        return [self.f, *self.h, *self.g]


@dataclass(frozen=True)
class RegularizationParams:
    c: np.ndarray
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).copy())
        self.c.setflags(write=False)


@dataclass(frozen=True)
class ReformR:
    problem: ProblemCCOP
    params: RegularizationParams

    @property
    def n(self) -> int:
        return self.problem.n

    @property
    def s(self) -> int:
        return self.problem.s

    @property
    def c(self) -> np.ndarray:
        return self.params.c

    @property
    def epsilon(self) -> float:
        return self.params.epsilon

    @property
    def y_upper(self) -> float:
        return 1.0 + self.params.epsilon


@dataclass(frozen=True)
class ScholtesS:
    reform: ReformR
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ModelError(f"t must be positive, got {self.t}")

    # convenience pass-throughs
    @property
    def problem(self) -> ProblemCCOP:
        return self.reform.problem

    @property
    def n(self) -> int:
        return self.reform.n

    @property
    def s(self) -> int:
        return self.reform.s

    @property
    def c(self) -> np.ndarray:
        return self.reform.c

    @property
    def epsilon(self) -> float:
        return self.reform.epsilon

    @property
    def y_upper(self) -> float:
        return self.reform.y_upper


@dataclass(frozen=True)
class PointXY:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).copy()
        y = np.asarray(self.y, dtype=float).copy()
        if x.shape != y.shape or x.ndim != 1:
            raise ModelError("x and y must be vectors of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ModelError("point has non-finite entries")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_vector(cls, z: Sequence[float]) -> "PointXY":
        z = np.asarray(z, dtype=float)
        if z.ndim != 1 or z.size % 2:
            raise ModelError("stacked point must have even length 2n")
        n = z.size // 2
        return cls(z[:n], z[n:])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @property
    def n(self) -> int:
        return self.x.size


# ------------------------------------------------------------------ parameters


def default_params(problem: ProblemCCOP) -> RegularizationParams:
    """c_i = 1 + i/(2n) (1-based i) and eps = 1/(2(n-s))."""
    n = problem.n
    c = 1.0 + np.arange(1, n + 1) / (2.0 * n)
    return RegularizationParams(c, 1.0 / (2.0 * (n - problem.s)))


def build_reform(problem: ProblemCCOP, params: RegularizationParams | None = None) -> ReformR:
    if params is None:
        params = default_params(problem)
    c = params.c
    n, s = problem.n, problem.s
    if c.shape != (n,):
        raise ModelError(f"c must have length {n}")
    if np.any(c <= 0):
        raise ModelError("c entries must be positive")
    if np.unique(c).size != n:
        raise ModelError("c entries must be pairwise different")
    eps = params.epsilon
    if not (0.0 < eps <= 1.0 / (n - s)):
        raise ModelError(f"epsilon must lie in (0, 1/(n-s)] = (0, {1.0 / (n - s)}], got {eps}")
    return ReformR(problem, params)


def build_scholtes(reform: ReformR, t: float) -> ScholtesS:
    return ScholtesS(reform, float(t))


# ----------------------------------------------------------------- feasibility


@dataclass(frozen=True)
class FeasibilityReport:
    violations: dict[str, float]
    tol: float

    @property
    def max_violation(self) -> float:
        return max(self.violations.values(), default=0.0)

    @property
    def feasible(self) -> bool:
        return self.max_violation <= self.tol

    def worst(self) -> tuple[str, float] | None:
        if not self.violations:
            return None
        k = max(self.violations, key=self.violations.get)
        return k, self.violations[k]


def _common_violations(problem: ProblemCCOP, x: np.ndarray) -> dict[str, float]:
    v = {}
    for p, e in enumerate(problem.h):
        v[f"h[{p + 1}]"] = abs(evaluate(e, x))
    for q, e in enumerate(problem.g):
        v[f"g[{q + 1}]"] = max(0.0, -evaluate(e, x))
    return v


def _y_violations(n: int, s: int, y: np.ndarray, upper: float) -> dict[str, float]:
    v = {"sum": max(0.0, (n - s) - float(np.sum(y)))}
    for i in range(n):
        v[f"y_lower[{i + 1}]"] = max(0.0, -y[i])
        v[f"y_upper[{i + 1}]"] = max(0.0, y[i] - upper)
    return v


def feasibility_R(reform: ReformR, point: PointXY, tol: float = DEFAULT_ZERO_TOL) -> FeasibilityReport:
    if tol <= 0:
        raise ValueError("tol must be positive")
    x, y = point.x, point.y
    v = _common_violations(reform.problem, x)
    v.update(_y_violations(reform.n, reform.s, y, reform.y_upper))
    for i in range(reform.n):
        v[f"orth[{i + 1}]"] = abs(x[i] * y[i])
    return FeasibilityReport(v, tol)


def feasibility_S(scholtes: ScholtesS, point: PointXY, tol: float = DEFAULT_ZERO_TOL) -> FeasibilityReport:
    if tol <= 0:
        raise ValueError("tol must be positive")
    x, y = point.x, point.y
    v = _common_violations(scholtes.problem, x)
    v.update(_y_violations(scholtes.n, scholtes.s, y, scholtes.y_upper))
    for i in range(scholtes.n):
        v[f"band[{i + 1}]"] = max(0.0, abs(x[i] * y[i]) - scholtes.t)
    return FeasibilityReport(v, tol)


def feasibility_ccop(problem: ProblemCCOP, x: Sequence[float], tol: float = DEFAULT_ZERO_TOL) -> FeasibilityReport:
    """Entries with ``|x_i| > tol`` count as nonzero for the cardinality bound."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.asarray(x, dtype=float)
    v = _common_violations(problem, x)
    nnz = int(np.sum(np.abs(x) > tol))
    v["cardinality"] = float(max(0, nnz - problem.s))
    return FeasibilityReport(v, tol)


# ------------------------------------------------------------ derivative access


def eval_objective(problem: ProblemCCOP, x: np.ndarray):
    return eval2(problem.f, x)


def eval_constraints(exprs: Sequence[Expr], x: np.ndarray):
    """Values, gradients (rows) and Hessians of a list of expressions."""
    res = [eval2(e, x) for e in exprs]
    n = len(x)
    vals = np.array([r.value for r in res], dtype=float)
    jac = np.array([r.gradient for r in res], dtype=float).reshape(len(res), n)
    hess = [r.hessian for r in res]
    return vals, jac, hess


# ----------------------------------------------------------------- file format


def _as_real(value, name: str) -> float:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        # constant expressions such as "1+5/36" are allowed
        try:
            return float(evaluate(parse_expression(value, 0), []))
        except (ExprSyntaxError, ExprDomainError) as exc:
            raise ModelError(f"{name}: {exc}") from None
    raise ModelError(f"{name}: expected a number or constant expression, got {value!r}")


@dataclass(frozen=True)
class ProblemFile:
    problem: ProblemCCOP
    params: RegularizationParams
    path: Path | None = None

    def reform(self) -> ReformR:
        return build_reform(self.problem, self.params)


def parse_problem(data: dict, path: Path | None = None) -> ProblemFile:
    """Build problem and regularization parameters from the key-value mapping.

    Required keys: ``n``, ``s``, ``objective``.  Optional: ``equalities``,
    ``inequalities`` (lists of expression strings; inequalities read ``g >= 0``),
    ``c`` (list of numbers or constant expressions), ``epsilon``.
    Missing ``c``/``epsilon`` fall back to :func:`default_params`.
    """
    if not isinstance(data, dict):
        raise ModelError("problem file must contain a key-value mapping")
    unknown = set(data) - {"n", "s", "objective", "equalities", "inequalities", "c", "epsilon",
                           "name", "description"}
    if unknown:
        raise ModelError(f"unknown keys in problem file: {sorted(unknown)}")
    for key in ("n", "s", "objective"):
        if key not in data:
            raise ModelError(f"problem file lacks required key {key!r}")
    n, s = int(data["n"]), int(data["s"])
    problem = ProblemCCOP.from_strings(
        n, s, str(data["objective"]),
        [str(t) for t in data.get("equalities") or []],
        [str(t) for t in data.get("inequalities") or []],
    )
    defaults = default_params(problem)
    c = defaults.c
    if data.get("c") is not None:
        c = np.array([_as_real(v, "c") for v in data["c"]])
    eps = defaults.epsilon
    if data.get("epsilon") is not None:
        eps = _as_real(data["epsilon"], "epsilon")
    params = RegularizationParams(c, eps)
    build_reform(problem, params)  # validate early
    return ProblemFile(problem, params, path)


def load_problem(path: str | Path) -> ProblemFile:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    return parse_problem(data, path)


def dump_problem(problem: ProblemCCOP, params: RegularizationParams | None = None) -> str:
    texts = problem.texts
    if not texts:
        raise ModelError("problem was not built from text; cannot serialize")
    data = {"n": problem.n, "s": problem.s, "objective": texts["objective"],
            "equalities": texts["equalities"], "inequalities": texts["inequalities"]}
    if params is not None:
        data["c"] = [float(v) for v in params.c]
        data["epsilon"] = float(params.epsilon)
    return yaml.safe_dump(data, sort_keys=False)


_DATA_DIR = Path(__file__).parent / "data"


def builtin_problem_path(name: str) -> Path:
    """Path of a shipped problem file (``ndt2``, ``ndt6``, ``persistence``, ``separable4``)."""
    p = _DATA_DIR / f"{name}.yaml"
    if not p.exists():
        raise FileNotFoundError(f"no built-in problem named {name!r}")
    return p


def load_builtin(name: str) -> ProblemFile:
    return load_problem(builtin_problem_path(name))
