"""
Tool deflection under a milling load
====================================

A groove cut along y loads the tool tip with (215, -10, -25) N, 100 mm
below the platform point.  The deflection at the platform comes from the
compliance matrix, and the tool tip picks up an extra lever-arm term.
"""

import numpy as np

np.set_printoptions(precision=5, suppress=True)

from orthoglide.stiffness import build_milling_wrench, deflection_under_wrench, milling_case_study, tcp_adjustment
from orthoglide.synthesis import SynthesisSpec, synthesize

report, params = synthesize(SynthesisSpec(200.0))

wrench = build_milling_wrench(215.0, -10.0, -25.0, 100.0)
print("wrench at the platform:", wrench.as_vector())

# %%
# With a purely block-diagonal stiffness the answer is a one-liner.
K_simple = np.diag([2.71e3] * 3 + [8.37e6] * 3)
dt = deflection_under_wrench(K_simple, wrench)
print("block-diagonal K   P:", dt.as_vector())
print("                 TCP:", tcp_adjustment(dt, (0, 0, 100)).as_vector())

# %%
# The full model at three postures.
header = "".join(f"{c:>12s}" for c in ("dp_x", "dp_y", "dp_z", "dphi_x", "dphi_y", "dphi_z"))
print(f"\n{'':18s}{header}")
for name, p in (("isotropic", np.zeros(3)), ("Q1", report.q1), ("Q2", report.q2)):
    rep = milling_case_study(params, p=p)
    for row, values in rep.rows().items():
        print(f"{name + ' ' + row:18s}" + "".join(f"{v:12.5f}" for v in values.values()))
