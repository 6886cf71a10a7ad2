"""Saddle points of S(t) converging to a minimizer of R.

At (0, 1, 1, 0) every S(t) has a KKT point with quadratic index one, while the
limit has T-index zero.  The drop is allowed because sigma1[1] vanishes there,
which also keeps the corrector system from being set up.
"""

from scholtes_ccop import PointXY, build_scholtes, classify_R, classify_S, index_bound_check, load_builtin
from scholtes_ccop.homotopy import PreconditionError, predictor_corrector_F

reform = load_builtin("ndt6").reform()
point = PointXY([0.0, 1.0], [1.0, 0.0])

for t in (0.1, 0.01, 0.001):
    rep = classify_S(build_scholtes(reform, t), point)
    print(f"S(t={t:g}): QI = {rep.QI}, restricted eigenvalues {rep.eigenvalues}")

limit = classify_R(reform, point)
print()
print(limit.to_text())

bound = index_bound_check(1, limit)
print(f"\n{bound.details['lower']} <= TI = {limit.TI} <= m = 1, lower bound attained: {bound.details['lower_attained']}")

try:
    predictor_corrector_F(reform, limit, 0.01)
except PreconditionError as exc:
    print("corrector refused:", exc)
