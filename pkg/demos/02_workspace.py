"""
Checking that the cube really fits
==================================

The synthesis only looks at the cube diagonal.  Here the whole cube is
checked twice: on a regular grid, and with interval arithmetic, which
gives a guarantee for every point and not just the sampled ones.
"""

import numpy as np

from orthoglide.synthesis import SynthesisSpec, synthesize
from orthoglide.workspace import BOUNDARY, INSIDE, OUTSIDE, cube_inclusion_check, grid_map, interval_certify

report, params = synthesize(SynthesisSpec(200.0))

# %%
# A 17 x 17 x 17 grid, corners included.
wm = grid_map(params, params.cube, 17)
print(f"{len(wm)} nodes, {100 * wm.fraction_feasible:.1f}% feasible, "
      f"psi in [{np.nanmin(wm.psi_min):.6f}, {np.nanmax(wm.psi_max):.6f}]")

# %%
# Branch and prune: boxes are split until each is proven Inside or
# Outside, or becomes too small to split.
verdicts = interval_certify(params, params.cube, max_depth=8)
for label in (INSIDE, OUTSIDE, BOUNDARY):
    boxes = [v for v in verdicts if v.verdict == label]
    vol = sum(v.volume for v in boxes) / params.cube.volume
    print(f"{label:8s} {len(boxes):5d} boxes, {100 * vol:7.3f}% of the cube")

# %%
# The inclusion check also reports how far each face could move outward
# before certification fails.  The margin is small because Q2 already
# sits on both factor bounds.
res = cube_inclusion_check(params)
print(f"included: {res.included}, margin {res.margin:.3f} mm")
print(f"cube enlarged by 50%: included = {cube_inclusion_check(params, params.cube.scaled(1.5)).included}")
