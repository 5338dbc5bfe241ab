"""Critical points of the reduced functional on a flat half-space.

K has two Gaussian bumps on the boundary and decreases into the interior,
so the boundary maxima and the saddle between them are critical points at
infinity with negative sign.
"""

import numpy as np

from qtopo.certifier import certify
from qtopo.functional import FlatSlabModel, SearchConfig, find_critical_points, to_summary

K = (
    "(1 - 0.5*x4)*(exp(-8*((x1 - 0.3)**2 + x2**2 + x3**2))"
    " + exp(-8*((x1 + 0.3)**2 + x2**2 + x3**2)))"
)
model = FlatSlabModel(K=K)
points = find_critical_points(model, p=0, q=1, cfg=SearchConfig(seed=1, n_starts=24))

for c in points:
    a = np.round(c.config.boundary[0], 6)
    print(
        f"a = {a}  F = {c.f_value:+.5f}  morse {c.morse_index}  i_inf {c.i_inf}"
        f"  lk {c.lk_value:+.4f}  energy {c.energy:.4f}"
    )

summary = to_summary(points, k=1)
report = certify(summary)
# two maxima and one saddle: Hopf sum 1 - 1 + 1 = 1, same as the target
print("Hopf sum", report.hopf.value, "target", report.hopf.target, "->", report.verdict)
