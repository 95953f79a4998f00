"""Inverse/forward kinematics, Jacobian and velocity transmission factors.

Each leg i constrains the platform point ``p`` to lie at distance ``L``
from the foot tip ``rho_i * a_i`` on the actuator axis ``a_i``:

    || p - rho_i a_i || = L

so ``rho_i = p.a_i + branch * sqrt(L**2 - |p|**2 + (p.a_i)**2)``.  Base
offsets are absorbed in the origin of ``rho``.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np

from .core import JointLimitWarning, MachineParams, OrthoglideError, Singular, Unreachable

__all__ = [
    "NoConvergence",
    "SingularJacobian",
    "TransmissionFactors",
    "inverse_kinematics",
    "forward_kinematics",
    "inverse_jacobian",
    "jacobian",
    "transmission_factors",
    "diagonal_spectrum",
    "within_joint_limits",
    "radicands",
]

_DET_TOL = 1e-12
_FK_MAX_ITER = 50
_FK_TOL = 1e-11


class NoConvergence(OrthoglideError):
    """Forward kinematics did not converge in the allowed iterations."""


class SingularJacobian(Singular):
    """The Newton system of the forward kinematics is rank-deficient."""


class TransmissionFactors(NamedTuple):
    psi_min: float
    psi_max: float
    singular_values: np.ndarray
    """All three singular values of J, ascending."""

    @property
    def jjt_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of J J^T (the squared factors)."""
        return self.singular_values**2


def radicands(points, leg_length, axes=None) -> np.ndarray:
    """``L**2 - (off-axis squared distance)`` per leg, shape ``(..., 3)``."""
    pts = np.asarray(points, dtype=float)
    q = pts if axes is None else pts @ np.asarray(axes, dtype=float).T
    r2 = np.sum(q * q, axis=-1, keepdims=True)
    return leg_length**2 - (r2 - q * q)


def _rho(points, leg_length, branch, axes):
    pts = np.asarray(points, dtype=float)
    q = pts @ np.asarray(axes, dtype=float).T
    rad = radicands(q, leg_length)
    with np.errstate(invalid="ignore"):
        rho = q + branch * np.sqrt(rad)
    return rho, rad


def within_joint_limits(rho, params: MachineParams, tol: float = 1e-9) -> np.ndarray:
    """Per-leg flags telling whether ``rho`` lies inside the joint limits."""
    rho = np.asarray(rho, dtype=float)
    return (rho >= params.rho_min - tol) & (rho <= params.rho_max + tol)


def inverse_kinematics(p, params: MachineParams, check_limits: bool = True) -> np.ndarray:
    """Actuated joint coordinates for platform position ``p`` (mm).

    Raises :class:`Unreachable` naming the legs whose radicand is
    negative.  A :class:`JointLimitWarning` is issued when the result
    leaves the joint limits and ``check_limits`` is true.
    """
    rho, rad = _rho(p, params.leg_length, params.ik_branch, params.axes)
    bad = np.flatnonzero(rad < 0)
    if bad.size:
        legs = ["xyz"[i] for i in bad]
        raise Unreachable(f"position {np.asarray(p)} unreachable by leg(s) {', '.join(legs)}", legs)
    if check_limits:
        ok = within_joint_limits(rho, params)
        if not np.all(ok):
            warnings.warn(
                f"joint limits exceeded on leg(s) {[ 'xyz'[i] for i in np.flatnonzero(~ok)]}",
                JointLimitWarning,
                stacklevel=2,
            )
    return rho


def forward_kinematics(rho, params: MachineParams, seed=None) -> np.ndarray:
    """Platform position for joint coordinates ``rho``.

    Damped Newton iteration on the residuals ``||p - rho_i a_i|| - L``,
    at most 50 iterations with steps clamped to ``L/2``.  The root found
    depends on ``seed`` (default: cube center); seeds in the other
    assembly mode converge to the mirrored solution.
    """
    rho = np.asarray(rho, dtype=float).reshape(3)
    if not np.all(np.isfinite(rho)):
        raise ValueError("joint coordinates must be finite")
    L = params.leg_length
    axes = params.axes
    p = np.array(params.cube.center if seed is None else seed, dtype=float)
    tips = rho[:, None] * axes

    def residual(x):
        return np.linalg.norm(x - tips, axis=1) - L

    f = residual(p)
    for _ in range(_FK_MAX_ITER):
        if np.max(np.abs(f)) < _FK_TOL * max(L, 1.0):
            return p
        d = p - tips
        G = d / np.linalg.norm(d, axis=1, keepdims=True)
        if abs(np.linalg.det(G)) < _DET_TOL:
            raise SingularJacobian(f"forward kinematics singular near {p}")
        step = np.linalg.solve(G, -f)
        n = np.linalg.norm(step)
        if n > 0.5 * L:
            step *= 0.5 * L / n
        # backtracking on the residual norm
        fn0 = np.linalg.norm(f)
        lam = 1.0
        for _ in range(20):
            trial = p + lam * step
            ft = residual(trial)
            if np.linalg.norm(ft) < fn0 or lam < 1e-4:
                break
            lam *= 0.5
        p, f = trial, ft
    if np.max(np.abs(f)) < _FK_TOL * max(L, 1.0):
        return p
    raise NoConvergence(f"no convergence after {_FK_MAX_ITER} iterations (residual {np.max(np.abs(f)):.3g})")


def inverse_jacobian(p, params: MachineParams) -> np.ndarray:
    """Analytic ``d rho / d p`` (3x3).

    Row i is ``a_i - (branch/s_i) * (p - (p.a_i) a_i)`` with ``s_i`` the
    square root of the leg radicand.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    axes = params.axes
    rad = radicands(p, params.leg_length, axes)
    if np.any(rad <= 0):
        raise Unreachable(f"position {p} is on or beyond the reach boundary")
    s = np.sqrt(rad)
    q = axes @ p
    off = p[None, :] - q[:, None] * axes
    return axes - params.ik_branch * off / s[:, None]


def jacobian(p, params: MachineParams) -> np.ndarray:
    """``J = d p / d rho``; raises :class:`Singular` when ``|det J^-1| < 1e-12``."""
    Jinv = inverse_jacobian(p, params)
    if abs(np.linalg.det(Jinv)) < _DET_TOL:
        raise Singular(f"kinematic Jacobian singular at {np.asarray(p)}")
    return np.linalg.inv(Jinv)


def transmission_factors(p, params: MachineParams) -> TransmissionFactors:
    """Extreme singular values of J at ``p``.

    The eigenvalues of ``J J^T`` are available as ``jjt_eigenvalues``.
    """
    Jinv = inverse_jacobian(p, params)
    if abs(np.linalg.det(Jinv)) < _DET_TOL:
        raise Singular(f"kinematic Jacobian singular at {np.asarray(p)}")
    # singular values of J are reciprocals of those of J^-1
    sv = np.sort(1.0 / np.linalg.svd(Jinv, compute_uv=False))
    return TransmissionFactors(float(sv[0]), float(sv[-1]), sv)


def diagonal_spectrum(u, leg_length):
    """The two distinct singular values of J at ``p = (u, u, u)``, ascending.

    On the diagonal ``J^-1 = I + (u/s)(E - I)`` with ``s = sqrt(L^2 - 2u^2)``,
    whose eigenvalues are ``1 + 2u/s`` (along (1,1,1)) and ``1 - u/s``
    (twice).  Assumes standard axes and branch -1.
    """
    u = float(u)
    if not abs(u) < leg_length / np.sqrt(2.0):
        raise ValueError(f"|u| = {abs(u)} outside reach (L/sqrt(2) = {leg_length / np.sqrt(2.0):.6g})")
    r = u / np.sqrt(leg_length**2 - 2.0 * u * u)
    with np.errstate(divide="ignore"):
        a = 1.0 / abs(1.0 + 2.0 * r)
        b = 1.0 / abs(1.0 - r)
    return (a, b) if a <= b else (b, a)
