"""Every T-stationary point of a four-variable problem with at most two nonzeros.

The objective pulls x toward (1, 2, 3, 4).  Points differ in support and in
how the auxiliary variables y are arranged, so several points of R share the
same x.
"""

from scholtes_ccop import atlas, load_builtin
from scholtes_ccop.exprdsl import evaluate

reform = load_builtin("separable4").reform()
res = atlas(reform)
print(f"{len(res.entries)} T-stationary points from {res.candidates} candidate patterns")
print("T-index histogram:", res.ti_histogram())

best = min(res.entries, key=lambda e: evaluate(reform.problem.f, e[0].x))
print("lowest objective at x =", best[0].x, "with TI =", best[1].TI)

print("\nx-projections:")
for x, k in res.x_projection_counts():
    print(f"  {x}: {k} point(s)")
