"""A nondegenerate T-stationary point with sigma1 != 0 seeds a unique branch of
KKT points of S(t), and the index is preserved along it."""

import logging

from scholtes_ccop import PointXY, Schedule, classify_R, corrector_path, index_persistence_audit, load_builtin
from scholtes_ccop import multiplier_limits

# at t = 1e-8 some band constraints sit within a few tolerances of activity; that is expected here
logging.getLogger("scholtes_ccop.activesets").setLevel(logging.ERROR)

reform = load_builtin("persistence").reform()
for x, y in [([0, 1], [1, 0]), ([0, 0], [0, 1])]:
    seed = classify_R(reform, PointXY(x, y))
    trace = corrector_path(reform, seed, Schedule(1e-2, 0.1, 1e-8))
    print(f"seed x={x} y={y}: TI = {seed.TI}, NDT6 holds = {seed.conditions['NDT6'].ok}")
    for r in trace.records:
        print(f"  t={r.t:6.0e}  x={r.point.x}  y={r.point.y}  QI={r.report.QI}  newton steps={r.iterations}")
    lim = multiplier_limits(trace)
    print("  multiplier limits:", "match" if lim.verdict.ok else lim.verdict.failures)
    print("  audit:", index_persistence_audit(trace).reason)
