"""
Sizing a machine for a prescribed cube
======================================

Start from the workspace you want (a 200 mm cube) and the range of
velocity transmission factors you can live with, and get back the leg
length, the cube placement and the actuator stroke.
"""

import numpy as np

from orthoglide.kinematics import diagonal_spectrum, transmission_factors
from orthoglide.synthesis import SynthesisSpec, locate_critical_points, synthesize

# %%
# Along the main diagonal the two distinct transmission factors have a
# closed form, so the extreme admissible points are found by bisection in
# units of the leg length.
u1, u2 = locate_critical_points((0.5, 2.0))
print(f"normalised critical points: u1 = {u1:.6f} (-1/sqrt(18) = {-1 / np.sqrt(18):.6f}), "
      f"u2 = {u2:.6f} (1/sqrt(6) = {1 / np.sqrt(6):.6f})")

# %%
# Scaling those points so they become opposite corners of the cube fixes
# the leg length.
report, params = synthesize(SynthesisSpec(cube_side=200.0, psi_bounds=(0.5, 2.0)))
print(f"leg length       {report.leg_length:8.3f} mm")
print(f"Q1 / Q2          {report.u_q1:8.3f} / {report.u_q2:.3f} mm per axis")
print(f"actuator stroke  {report.stroke:8.3f} mm  [{report.rho_min:.3f}, {report.rho_max:.3f}]")

# %%
# Both bounds are active at Q2, only the upper one at Q1.
for name, q in (("Q1", report.q1), ("Q2", report.q2)):
    tf = transmission_factors(q, params)
    print(f"{name}: psi_min = {tf.psi_min:.6f}, psi_max = {tf.psi_max:.6f}")

# %%
# The spectrum along the diagonal, from Q1 to just short of the singular
# point at L/sqrt(3).
L = report.leg_length
for u in np.linspace(report.u_q1, 0.99 * L / np.sqrt(3), 8):
    lo, hi = diagonal_spectrum(u, L)
    print(f"u = {u:8.2f} mm   psi = ({lo:.3f}, {hi:.3f})")
