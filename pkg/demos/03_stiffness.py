"""
Stiffness of the three-leg structure
====================================

Each leg is modelled as a rigid chain with seven virtual springs and
three ideal passive joints.  The leg stiffness keeps only the wrench
directions the passive joints cannot absorb, and the legs add up.
"""

import numpy as np

from orthoglide.stiffness import (
    DEFAULT_STIFFNESS,
    LEGS,
    leg_cartesian_stiffness,
    leg_configuration,
    leg_jacobians,
    spring_constants,
    stiffness_field,
    total_stiffness,
)
from orthoglide.synthesis import SynthesisSpec, synthesize

np.set_printoptions(precision=4, suppress=True, linewidth=110)
report, params = synthesize(SynthesisSpec(200.0))

# %%
# The default leg data are estimates, calibrated so that the isotropic
# posture gives 2.71e3 N/mm and 8.37e6 N mm/rad.
print("springs k0..k6:", spring_constants(DEFAULT_STIFFNESS))

# %%
# One leg on its own has rank 3: it resists three wrench directions.
cfg = leg_configuration(report.q2, params, "X")
K_x = leg_cartesian_stiffness(leg_jacobians(cfg, params, DEFAULT_STIFFNESS), spring_constants(DEFAULT_STIFFNESS, cfg.q2))
print("rank of the X leg at Q2:", K_x.rank())

# %%
# Three legs together are full rank.  At the isotropic point each block is
# a multiple of the identity; on the diagonal each block has one diagonal
# and one off-diagonal value.
for name, p in (("isotropic", np.zeros(3)), ("Q1", report.q1), ("Q2", report.q2)):
    K = total_stiffness(p, params).K
    print(f"\n{name}: translational [N/mm]\n{K.translational}\nrotational [N mm/rad]\n{K.rotational}")

# %%
# How much the translational stiffness varies over the cube.
diag = stiffness_field(params.cube.grid(7), params)
kt = diag[:, :3]
print(f"\ntranslational diagonal over the cube: {kt.min():.1f} .. {kt.max():.1f} N/mm "
      f"({100 * (kt.max() - kt.min()) / kt.max():.0f}% variation)")
print("per-leg parts are available for diagnostics:", ", ".join(LEGS))
