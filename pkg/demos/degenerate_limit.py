"""Follow KKT points of S(t) down to t = 1e-6 and inspect the limit on R.

The inequality 1 + x1 - x2 >= 0 stays active along the path but its multiplier
tends to zero, so the limit point is T-stationary without being nondegenerate.
"""

import numpy as np

from scholtes_ccop import PointXY, Schedule, index_persistence_audit, load_builtin, scholtes_path

reform = load_builtin("ndt2").reform()
trace = scholtes_path(reform, PointXY([0.1, 1.0], [1.0, 0.0]), Schedule(1e-1, 0.1, 1e-6))

print(f"{'t':>8}  {'x1':>10}  {'mu3':>10}  {'eta_le[1]':>10}  QI")
for r in trace.records:
    m = r.multipliers
    print(f"{r.t:8.0e}  {r.point.x[0]:10.3e}  {m.mu3:10.6f}  {m.eta_le.get(0, np.nan):10.6f}  {r.report.QI}")

lim = trace.limit
print("\nlimit x, y:", lim.point.x, lim.point.y)
print("verdict:", lim.message)
print("mu1[1] at the limit:", lim.report.multipliers.mu1[0])
print("index audit:", index_persistence_audit(trace).reason)
