"""Shared vocabulary: machine parameters, small-displacement 6-vectors and
symmetric 6x6 matrices.

Units are fixed throughout the package: lengths in mm, forces in N,
angles in rad, torques in N*mm.  Stiffness matrices therefore carry
N/mm in the translational block and N*mm/rad in the rotational block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

__all__ = [
    "OrthoglideError",
    "ParameterError",
    "Unreachable",
    "Singular",
    "JointLimitWarning",
    "Cube",
    "MachineParams",
    "PoseDeviation",
    "Wrench",
    "SymMat6",
    "validate_params",
    "leg_frames",
    "AXIS_NAMES",
    "DEFAULT_PSI_BOUNDS",
]

AXIS_NAMES = {
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
    "-x": (-1.0, 0.0, 0.0),
    "-y": (0.0, -1.0, 0.0),
    "-z": (0.0, 0.0, -1.0),
}

DEFAULT_PSI_BOUNDS = (0.5, 2.0)

_ORTHO_TOL = 1e-9
_SYM_TOL = 1e-9


class OrthoglideError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(OrthoglideError, ValueError):
    """Invalid machine or stiffness parameters.

    ``violations`` lists every problem found, not just the first one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class Unreachable(OrthoglideError):
    """A position lies outside the reach of at least one leg."""

    def __init__(self, message, legs=()):
        self.legs = tuple(legs)
        super().__init__(message)


class Singular(OrthoglideError):
    """A Jacobian or stiffness matrix is singular at the requested posture."""


class JointLimitWarning(UserWarning):
    """Joint coordinates left their [rho_min, rho_max] range (non-fatal)."""


@dataclass(frozen=True)
class Cube:
    """Axis-aligned cube given by its center and side length (mm)."""

    center: tuple = (0.0, 0.0, 0.0)
    side: float = 0.0

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float) - 0.5 * self.side

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float) + 0.5 * self.side

    @property
    def volume(self) -> float:
        return float(self.side) ** 3

    def inflate(self, delta: float) -> "Cube":
        """Grow each face outward by ``delta`` mm, keeping the center."""
        return Cube(self.center, self.side + 2.0 * delta)

    def scaled(self, factor: float) -> "Cube":
        return Cube(self.center, self.side * factor)

    def grid(self, resolution: int) -> np.ndarray:
        """Grid nodes (corners included), shape ``(resolution**3, 3)``."""
        axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, 3)


def leg_frames(axes) -> np.ndarray:
    """Right-handed per-leg frames ``(a, t, o)``.

    ``a`` is the actuator axis, ``t`` the in-plane transverse axis and
    ``o = a x t`` the out-of-plane axis.  For the standard axes this gives
    the cyclic frames (x, y, z), (y, z, x), (z, x, y).
    """
    axes = np.asarray(axes, dtype=float)
    frames = np.empty((3, 3, 3))
    for i in range(3):
        a = axes[i]
        t = axes[(i + 1) % 3]
        frames[i] = (a, t, np.cross(a, t))
    return frames


def _as_triplet(value, name, violations):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.repeat(arr, 3)
    if arr.shape != (3,):
        violations.append(f"{name} must be a scalar or 3 values")
        return None
    return arr


def _parse_axes(value, violations):
    if value is None:
        return np.eye(3)
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",")]
    vals = list(value)
    if all(isinstance(v, str) for v in vals):
        try:
            arr = np.array([AXIS_NAMES[v.lower()] for v in vals])
        except KeyError as exc:
            violations.append(f"unknown axis name {exc.args[0]!r}")
            return None
    else:
        arr = np.asarray(vals, dtype=float).reshape(-1)
        if arr.size != 9:
            violations.append("actuator_axes needs three 3-vectors")
            return None
        arr = arr.reshape(3, 3)
    if arr.shape != (3, 3):
        violations.append("actuator_axes needs three 3-vectors")
        return None
    norms = np.linalg.norm(arr, axis=1)
    if np.any(np.abs(norms - 1.0) > _ORTHO_TOL):
        violations.append("axes must be unit vectors")
        return None
    if np.max(np.abs(arr @ arr.T - np.eye(3))) > _ORTHO_TOL:
        violations.append("axes not orthogonal")
        return None
    return arr


def _default_cube_center(side, psi_bounds=DEFAULT_PSI_BOUNDS):
    # Offset that puts Q1 and Q2 on the cube's diagonal corners; depends
    # only on the side length because the synthesis is scale-equivariant.
    from .synthesis import locate_critical_points

    u1, u2 = locate_critical_points(psi_bounds)
    return side * 0.5 * (u1 + u2) / (u2 - u1)


@dataclass(frozen=True)
class MachineParams:
    """Nominal geometry of an Orthoglide-type machine.

    Attributes
    ----------
    leg_length : float
        Parallelogram length L (mm), shared by the three legs.
    cube : Cube
        Prescribed Cartesian workspace.
    joint_limits : tuple
        ``((rho_min, rho_max),) * 3`` in mm.
    ik_branch : int
        Sign selecting the inverse kinematics root, shared by all legs.
    actuator_axes : tuple
        Three orthonormal actuator directions (rows).
    """

    leg_length: float
    cube: Cube
    joint_limits: tuple
    ik_branch: int = -1
    actuator_axes: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    @property
    def axes(self) -> np.ndarray:
        return np.array(self.actuator_axes, dtype=float)

    @property
    def rho_min(self) -> np.ndarray:
        return np.array([lim[0] for lim in self.joint_limits])

    @property
    def rho_max(self) -> np.ndarray:
        return np.array([lim[1] for lim in self.joint_limits])

    @property
    def frames(self) -> np.ndarray:
        return leg_frames(self.axes)

    def to_raw(self) -> dict:
        """Canonical flat key-value form (inverse of :func:`validate_params`)."""
        names = {v: k for k, v in AXIS_NAMES.items()}
        axes = [names.get(tuple(float(c) for c in ax)) for ax in self.actuator_axes]
        if any(a is None for a in axes):
            axes_out = [float(c) for ax in self.actuator_axes for c in ax]
        else:
            axes_out = axes
        return {
            "leg_length_mm": float(self.leg_length),
            "cube_side_mm": float(self.cube.side),
            "cube_offset_mm": [float(c) for c in self.cube.center],
            "rho_min_mm": [float(v) for v in self.rho_min],
            "rho_max_mm": [float(v) for v in self.rho_max],
            "ik_branch": int(self.ik_branch),
            "actuator_axes": axes_out,
        }

    def with_joint_limits(self, rho_min, rho_max) -> "MachineParams":
        lo = np.broadcast_to(np.asarray(rho_min, float), (3,))
        hi = np.broadcast_to(np.asarray(rho_max, float), (3,))
        return MachineParams(
            self.leg_length,
            self.cube,
            tuple((float(a), float(b)) for a, b in zip(lo, hi)),
            self.ik_branch,
            self.actuator_axes,
        )

    def with_cube(self, cube: Cube) -> "MachineParams":
        return MachineParams(
            self.leg_length, cube, self.joint_limits, self.ik_branch, self.actuator_axes
        )


def validate_params(raw: Mapping[str, Any]) -> MachineParams:
    """Build a :class:`MachineParams` from a flat key-value record.

    Recognised keys are ``leg_length_mm``, ``cube_side_mm``,
    ``cube_offset_mm`` (scalar or 3 values, the cube center),
    ``rho_min_mm``/``rho_max_mm`` (scalar or 3 values), ``ik_branch`` and
    ``actuator_axes`` (names such as ``"x, y, z"`` or nine numbers).

    Missing optional values get defaults: branch -1, standard axes, the
    cube centered so that its diagonal corners are the critical points of
    the default [1/2, 2] factor bounds, and joint limits equal to the
    exact actuator range needed to cover the cube.

    Raises
    ------
    ParameterError
        With every violation found.
    """
    violations: list[str] = []
    if "leg_length_mm" not in raw:
        violations.append("leg_length_mm is required")
    if "cube_side_mm" not in raw:
        violations.append("cube_side_mm is required")
    if violations:
        raise ParameterError(violations)

    L = float(raw["leg_length_mm"])
    side = float(raw["cube_side_mm"])
    if not L > 0:
        violations.append("leg length must be positive")
    if not side > 0:
        violations.append("cube side must be positive")

    branch = int(raw.get("ik_branch", -1))
    if branch not in (-1, 1):
        violations.append("ik_branch must be +1 or -1")

    axes = _parse_axes(raw.get("actuator_axes"), violations)

    if "cube_offset_mm" in raw:
        center = _as_triplet(raw["cube_offset_mm"], "cube_offset_mm", violations)
    elif side > 0:
        center = np.full(3, _default_cube_center(side))
    else:
        center = np.zeros(3)

    have_lo, have_hi = "rho_min_mm" in raw, "rho_max_mm" in raw
    if have_lo != have_hi:
        violations.append("rho_min_mm and rho_max_mm must be given together")
    lo = hi = None
    if have_lo and have_hi:
        lo = _as_triplet(raw["rho_min_mm"], "rho_min_mm", violations)
        hi = _as_triplet(raw["rho_max_mm"], "rho_max_mm", violations)
        if lo is not None and hi is not None and np.any(lo >= hi):
            violations.append("joint limits inverted (rho_min >= rho_max)")

    if violations:
        raise ParameterError(violations)

    cube = Cube(tuple(float(c) for c in center), side)
    if lo is None:
        from .synthesis import actuator_range

        lo_s, hi_s, _ = actuator_range(L, cube, branch=branch, axes=axes)
        lo, hi = np.full(3, lo_s), np.full(3, hi_s)
    return MachineParams(
        leg_length=L,
        cube=cube,
        joint_limits=tuple((float(a), float(b)) for a, b in zip(lo, hi)),
        ik_branch=branch,
        actuator_axes=tuple(tuple(float(c) for c in ax) for ax in axes),
    )


@dataclass(frozen=True)
class PoseDeviation:
    """Small platform displacement: ``dp`` in mm, ``dphi`` in rad."""

    dp: np.ndarray = field(default_factory=lambda: np.zeros(3))
    dphi: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "dp", np.asarray(self.dp, dtype=float).reshape(3))
        object.__setattr__(self, "dphi", np.asarray(self.dphi, dtype=float).reshape(3))

    @classmethod
    def from_vector(cls, v) -> "PoseDeviation":
        v = np.asarray(v, dtype=float).reshape(6)
        return cls(v[:3], v[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.dp, self.dphi])


@dataclass(frozen=True)
class Wrench:
    """Applied load: ``force`` in N, ``torque`` in N*mm."""

    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        f = np.asarray(self.force, dtype=float).reshape(3)
        m = np.asarray(self.torque, dtype=float).reshape(3)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(m))):
            raise ValueError("wrench components must be finite")
        object.__setattr__(self, "force", f)
        object.__setattr__(self, "torque", m)

    @classmethod
    def from_vector(cls, v) -> "Wrench":
        v = np.asarray(v, dtype=float).reshape(6)
        return cls(v[:3], v[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])


class SymMat6:
    """Symmetric positive semi-definite 6x6 matrix with mixed units.

    Asymmetry beyond 1e-9 (relative to the largest entry) and eigenvalues
    below ``-1e-9 * ||K||`` are rejected.  The stored matrix is the
    exactly symmetric part of the input.
    """

    __slots__ = ("_m",)

    def __init__(self, matrix, check_psd: bool = True):
        m = np.array(matrix, dtype=float)
        if m.shape != (6, 6):
            raise ValueError(f"expected a 6x6 matrix, got shape {m.shape}")
        scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
        if np.max(np.abs(m - m.T)) > _SYM_TOL * scale:
            raise ValueError("matrix is not symmetric")
        m = 0.5 * (m + m.T)
        if check_psd:
            w = np.linalg.eigvalsh(m)
            if w[0] < -_SYM_TOL * np.linalg.norm(m, 2):
                raise ValueError("matrix is not positive semi-definite")
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __add__(self, other):
        return SymMat6(self._m + np.asarray(other))

    __radd__ = __add__

    def __repr__(self):
        return f"SymMat6({np.array2string(self._m, precision=4)})"

    @property
    def translational(self) -> np.ndarray:
        return self._m[:3, :3]

    @property
    def rotational(self) -> np.ndarray:
        return self._m[3:, 3:]

    @property
    def coupling(self) -> np.ndarray:
        return self._m[:3, 3:]

    def rank(self, rtol: float = 1e-9) -> int:
        w = np.linalg.eigvalsh(self._m)
        return int(np.sum(w > rtol * max(w[-1], 0.0)))
