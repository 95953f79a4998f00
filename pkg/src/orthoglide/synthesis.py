"""Dimensional synthesis from a prescribed cube and transmission-factor bounds.

Three steps: find the diagonal points Q1/Q2 where the factor bounds
become active, size the leg length so that the cube spans Q1..Q2, and
compute the actuator stroke needed to cover the cube.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import bisect

from .core import Cube, MachineParams, OrthoglideError, Unreachable
from .kinematics import diagonal_spectrum

__all__ = [
    "Degenerate",
    "SynthesisSpec",
    "SynthesisReport",
    "locate_critical_points",
    "size_leg_length",
    "actuator_range",
    "synthesize",
]

_XTOL = 1e-10


class Degenerate(OrthoglideError, ValueError):
    """Factor bounds that admit only the isotropic point (or nothing)."""


@dataclass(frozen=True)
class SynthesisSpec:
    cube_side: float
    psi_bounds: tuple = (0.5, 2.0)

    def __post_init__(self):
        if not self.cube_side > 0:
            raise ValueError("cube side must be positive")


@dataclass(frozen=True)
class SynthesisReport:
    """Result of :func:`synthesize`; all lengths in mm."""

    cube_side: float
    psi_bounds: tuple
    leg_length: float
    u_q1: float
    u_q2: float
    rho_min: float
    rho_max: float
    stroke: float
    psi_q1: tuple
    psi_q2: tuple

    @property
    def cube(self) -> Cube:
        c = 0.5 * (self.u_q1 + self.u_q2)
        return Cube((c, c, c), self.u_q2 - self.u_q1)

    @property
    def q1(self) -> np.ndarray:
        return np.full(3, self.u_q1)

    @property
    def q2(self) -> np.ndarray:
        return np.full(3, self.u_q2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["psi_bounds"] = list(self.psi_bounds)
        d["psi_q1"] = list(self.psi_q1)
        d["psi_q2"] = list(self.psi_q2)
        return d

    @classmethod
    def from_dict(cls, d) -> "SynthesisReport":
        d = dict(d)
        for key in ("psi_bounds", "psi_q1", "psi_q2"):
            d[key] = tuple(d[key])
        return cls(**d)


def _margin(u, lo, hi):
    # positive while both diagonal singular values stay inside [lo, hi]
    a, b = diagonal_spectrum(u, 1.0)
    return min(a - lo, hi - b)


def locate_critical_points(psi_bounds) -> tuple[float, float]:
    """Normalized diagonal coordinates ``(u1, u2)`` of Q1 and Q2 (units of L).

    ``u1 < 0 < u2`` are the extreme points of the main diagonal where the
    closed-form spectrum still satisfies the bounds, located by bisection
    to 1e-10.  Assumes branch -1 (Q2 at positive coordinates).
    """
    lo, hi = (float(v) for v in psi_bounds)
    if not (0.0 < lo < 1.0 < hi):
        raise Degenerate(f"degenerate bounds [{lo}, {hi}]: need 0 < psi_lo < 1 < psi_hi")
    # the diagonal becomes singular at u = 1/sqrt(3) (u > 0) and
    # u = -1/sqrt(6) (u < 0); the margin is -inf-like just before those
    eps = 1e-12
    u2 = bisect(_margin, 0.0, 1.0 / np.sqrt(3.0) - eps, args=(lo, hi), xtol=_XTOL)
    u1 = bisect(_margin, -1.0 / np.sqrt(6.0) + eps, 0.0, args=(lo, hi), xtol=_XTOL)
    # keep the returned points on the feasible side of the bracket
    while _margin(u2, lo, hi) < 0:
        u2 -= _XTOL
    while _margin(u1, lo, hi) < 0:
        u1 += _XTOL
    return float(u1), float(u2)


def size_leg_length(spec: SynthesisSpec) -> float:
    """Leg length that makes the cube span exactly Q1..Q2 on each axis."""
    u1, u2 = locate_critical_points(spec.psi_bounds)
    return spec.cube_side / (u2 - u1)


def actuator_range(leg_length, cube: Cube, branch: int = -1, axes=None):
    """Exact extrema of ``rho_i`` over the cube, as ``(rho_min, rho_max, range)``.

    ``rho_i = p_i + branch*sqrt(L^2 - p_j^2 - p_k^2)`` is monotone in
    ``p_i`` and in ``p_j^2 + p_k^2``, so the extrema sit at the ends of
    the ``p_i`` interval combined with the smallest / largest off-axis
    squared distance.  Joint limits are shared by the legs, so the
    extrema are taken over all three.
    """
    L = float(leg_length)
    lo, hi = cube.lo, cube.hi
    if axes is not None and not np.allclose(np.abs(np.asarray(axes)), np.eye(3)):
        raise ValueError("actuator_range supports coordinate-aligned axes only")
    if axes is not None:
        # axis permutations / sign flips: re-express the cube per leg axis
        A = np.asarray(axes, dtype=float)
        corners = np.array([lo, hi])
        proj = corners @ A.T
        lo, hi = proj.min(axis=0), proj.max(axis=0)
    sq_min = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(lo**2, hi**2))
    sq_max = np.maximum(lo**2, hi**2)
    rmin, rmax = [], []
    for i in range(3):
        j, k = [m for m in range(3) if m != i]
        r_far = L * L - sq_max[j] - sq_max[k]
        if r_far < 0:
            raise Unreachable(f"cube corner out of reach for leg {'xyz'[i]}", ["xyz"[i]])
        s_small = np.sqrt(r_far)
        s_big = np.sqrt(L * L - sq_min[j] - sq_min[k])
        if branch < 0:
            rmin.append(lo[i] - s_big)
            rmax.append(hi[i] - s_small)
        else:
            rmin.append(lo[i] + s_small)
            rmax.append(hi[i] + s_big)
    rho_min, rho_max = float(min(rmin)), float(max(rmax))
    return rho_min, rho_max, rho_max - rho_min


def synthesize(spec: SynthesisSpec) -> tuple[SynthesisReport, MachineParams]:
    """Size an Orthoglide-type machine for ``spec``.

    Returns the report and a ready-to-use :class:`MachineParams` whose
    cube is the prescribed one, placed with Q1/Q2 on its diagonal corners
    and whose joint limits are the exact stroke.
    """
    u1, u2 = locate_critical_points(spec.psi_bounds)
    L = spec.cube_side / (u2 - u1)
    q1, q2 = L * u1, L * u2
    c = 0.5 * (q1 + q2)
    cube = Cube((c, c, c), spec.cube_side)
    rho_min, rho_max, stroke = actuator_range(L, cube)
    report = SynthesisReport(
        cube_side=float(spec.cube_side),
        psi_bounds=tuple(float(v) for v in spec.psi_bounds),
        leg_length=float(L),
        u_q1=float(q1),
        u_q2=float(q2),
        rho_min=rho_min,
        rho_max=rho_max,
        stroke=stroke,
        psi_q1=tuple(float(v) for v in diagonal_spectrum(q1, L)),
        psi_q2=tuple(float(v) for v in diagonal_spectrum(q2, L)),
    )
    params = MachineParams(
        leg_length=float(L),
        cube=cube,
        joint_limits=((rho_min, rho_max),) * 3,
        ik_branch=-1,
    )
    return report, params
