"""Virtual-joint stiffness model of the overconstrained three-leg structure.

Each leg is a rigid chain extended with seven virtual springs
``theta0..theta6`` and three ideal passive joints ``q1..q3``.  In the leg
frame ``(a, t, o)`` (actuator axis, in-plane transverse axis, out-of-plane
axis) the chain is:

* actuated prismatic joint along ``a`` with the servo spring ``theta0``;
* a rigid foot of length ``L_f`` along ``a``, ending at the point
  ``rho * a`` used by the kinematic model; rotational springs at the foot
  base about ``t`` (``theta1``), ``o`` (``theta2``) and ``a``
  (``theta3``, torsion), plus ``theta4`` about ``o`` at the foot tip;
* passive revolute ``q1`` about ``o`` at the foot tip;
* the parallelogram of length ``L``: passive ``q2`` tilts the bar
  direction ``n`` out of the ``(a, t)`` plane without rotating the
  downstream body (circular translation), with the tension spring
  ``theta5`` along ``n`` and the torsion spring ``theta6`` about ``n``;
* passive revolute ``q3 = -q1`` about ``o`` at the platform.

Linearising gives ``dt = J_theta dtheta + J_q dq``; with
``S = J_theta K_theta^-1 J_theta^T`` and ``U_d`` spanning the left null
space of ``J_q``, the leg stiffness is ``U_d (U_d^T S U_d)^-1 U_d^T``
and the machine stiffness is the sum over the three legs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.transform import Rotation

from .core import (
    MachineParams,
    OrthoglideError,
    ParameterError,
    PoseDeviation,
    SymMat6,
    Wrench,
)
from .kinematics import inverse_kinematics

__all__ = [
    "LegStiffnessParams",
    "LegConfiguration",
    "LegJacobians",
    "StiffnessResult",
    "MillingReport",
    "ReactiveSubspaceSingular",
    "SingularStructure",
    "LEGS",
    "DEFAULT_STIFFNESS",
    "spring_constants",
    "leg_configuration",
    "leg_jacobians",
    "chain_pose",
    "leg_cartesian_stiffness",
    "leg_stiffness_block_inverse",
    "total_stiffness",
    "build_milling_wrench",
    "deflection_under_wrench",
    "tcp_adjustment",
    "milling_case_study",
    "stiffness_field",
    "calibrate_isotropic",
]

LEGS = ("X", "Y", "Z")

_RANK_RTOL = 1e-10
_COND_MAX = 1e12
_STRUCT_RTOL = 1e-9


class ReactiveSubspaceSingular(OrthoglideError):
    """``U_d^T S U_d`` is too ill-conditioned to invert."""


class SingularStructure(OrthoglideError):
    """The assembled stiffness matrix is (numerically) singular."""


@dataclass(frozen=True)
class LegStiffnessParams:
    """Material and section data of one leg.

    Attributes
    ----------
    k_act : float
        Actuator (servo + transmission) stiffness, N/mm.
    E, G : float
        Young's and shear modulus, N/mm^2.
    L_f, b_f, h_f : float
        Foot length and rectangular cross-section, mm.
    L_B : float
        Parallelogram bar length, mm.
    S_B : float
        Bar cross-section area, mm^2.
    d : float
        Distance between the two parallelogram bars, mm.
    overrides : tuple
        ``(index, value)`` pairs replacing computed spring constants.
    """

    k_act: float
    E: float
    G: float
    L_f: float
    b_f: float
    h_f: float
    L_B: float
    S_B: float
    d: float
    overrides: tuple = ()

    def __post_init__(self):
        bad = [
            name
            for name in ("k_act", "E", "G", "L_f", "b_f", "h_f", "L_B", "S_B", "d")
            if not getattr(self, name) > 0
        ]
        if bad:
            raise ParameterError([f"{name} must be positive" for name in bad])
        for idx, val in self.overrides:
            if not (0 <= int(idx) <= 6) or not float(val) > 0:
                raise ParameterError([f"invalid spring override k{idx}={val}"])

    @property
    def I_f1(self) -> float:
        return self.b_f * self.h_f**3 / 12.0

    @property
    def I_f2(self) -> float:
        return self.h_f * self.b_f**3 / 12.0

    @property
    def I_f0(self) -> float:
        return self.I_f1 + self.I_f2

    _KEYS = {
        "k_act": "k_act_N_per_mm",
        "E": "E_N_per_mm2",
        "G": "G_N_per_mm2",
        "L_f": "foot_length_mm",
        "b_f": "foot_width_mm",
        "h_f": "foot_height_mm",
        "L_B": "bar_length_mm",
        "S_B": "bar_area_mm2",
        "d": "bar_spacing_mm",
    }

    def to_raw(self) -> dict:
        raw = {key: float(getattr(self, attr)) for attr, key in self._KEYS.items()}
        for idx, val in self.overrides:
            raw[f"k{int(idx)}_override"] = float(val)
        return raw

    @classmethod
    def from_raw(cls, raw: Mapping) -> "LegStiffnessParams":
        missing = [key for key in cls._KEYS.values() if key not in raw]
        if missing:
            raise ParameterError([f"{key} is required" for key in missing])
        kwargs = {attr: float(raw[key]) for attr, key in cls._KEYS.items()}
        overrides = tuple(
            sorted((i, float(raw[f"k{i}_override"])) for i in range(7) if f"k{i}_override" in raw)
        )
        return cls(**kwargs, overrides=overrides)


# Aluminium links with sections chosen so that the isotropic stiffness
# matches 2.71e3 N/mm and 8.37e6 N*mm/rad (see calibrate_isotropic).
# ESTIMATED values: the prototype's material and section data are not public.
DEFAULT_STIFFNESS = LegStiffnessParams(
    k_act=2883.0006307038807,
    E=7.0e4,
    G=2.7e4,
    L_f=132.4316182265236,
    b_f=15.0,
    h_f=15.0,
    L_B=310.0,
    S_B=100.0,
    d=80.0,
)


def spring_constants(p: LegStiffnessParams, q2: float = 0.0) -> np.ndarray:
    """Virtual spring constants ``[k0, ..., k6]``.

    Translational springs (``k0``, ``k5``) in N/mm, rotational ones in
    N*mm/rad.  ``k6 = E S_B d^2 cos^2(q2) / (2 L_B)`` depends on the
    parallelogram posture.
    """
    k = np.array(
        [
            p.k_act,
            3.0 * p.E * p.I_f1 / p.L_f,
            2.0 * p.E * p.I_f2 / p.L_f,
            p.G * p.I_f0 / p.L_f,
            p.E * p.I_f2 / p.L_f,
            2.0 * p.E * p.S_B / p.L_B,
            p.E * p.S_B * p.d**2 * np.cos(q2) ** 2 / (2.0 * p.L_B),
        ]
    )
    for idx, val in p.overrides:
        k[int(idx)] = val
    return k


@dataclass(frozen=True)
class LegConfiguration:
    leg: str
    rho: float
    q1: float
    q2: float
    q3: float
    frame: np.ndarray
    """Rows ``a, t, o`` of the leg frame."""
    position: np.ndarray

    @property
    def n(self) -> np.ndarray:
        """Parallelogram bar direction (unit)."""
        a, t, o = self.frame
        return np.cos(self.q2) * (np.cos(self.q1) * a + np.sin(self.q1) * t) - np.sin(self.q2) * o

    @property
    def foot_tip(self) -> np.ndarray:
        return self.rho * self.frame[0]


def leg_configuration(p, params: MachineParams, leg: str) -> LegConfiguration:
    """Passive joint values of ``leg`` when the platform point is at ``p``."""
    i = LEGS.index(leg)
    p = np.asarray(p, dtype=float).reshape(3)
    rho = inverse_kinematics(p, params, check_limits=False)[i]
    frame = params.frames[i]
    a, t, o = frame
    n = (p - rho * a) / params.leg_length
    q1 = float(np.arctan2(n @ t, n @ a))
    q2 = float(-np.arcsin(np.clip(n @ o, -1.0, 1.0)))
    return LegConfiguration(leg, float(rho), q1, q2, -q1, frame, p)


@dataclass(frozen=True)
class LegJacobians:
    J_theta: np.ndarray
    """6x7, columns for theta0..theta6."""
    J_q: np.ndarray
    """6x3, columns for q1..q3."""


def _revolute(axis, point, p):
    return np.concatenate([np.cross(axis, p - point), axis])


def _prismatic(axis):
    return np.concatenate([axis, np.zeros(3)])


def leg_jacobians(cfg: LegConfiguration, params: MachineParams, stiff: LegStiffnessParams) -> LegJacobians:
    """Screw columns of the virtual and passive joints at the nominal posture."""
    a, t, o = cfg.frame
    p = cfg.position
    tip = cfg.foot_tip
    base = tip - stiff.L_f * a
    n = cfg.n
    dn_dq2 = -np.sin(cfg.q2) * (np.cos(cfg.q1) * a + np.sin(cfg.q1) * t) - np.cos(cfg.q2) * o
    J_theta = np.column_stack(
        [
            _prismatic(a),
            _revolute(t, base, p),
            _revolute(o, base, p),
            _revolute(a, base, p),
            _revolute(o, tip, p),
            _prismatic(n),
            _revolute(n, p, p),
        ]
    )
    J_q = np.column_stack(
        [
            _revolute(o, tip, p),
            _prismatic(params.leg_length * dn_dq2),
            _revolute(o, p, p),
        ]
    )
    return LegJacobians(J_theta, J_q)


def _rot(axis, angle):
    T = np.eye(4)
    T[:3, :3] = Rotation.from_rotvec(angle * np.asarray(axis)).as_matrix()
    return T


def _trans(v):
    T = np.eye(4)
    T[:3, 3] = v
    return T


def chain_pose(cfg: LegConfiguration, params: MachineParams, stiff: LegStiffnessParams, theta=None, dq=None):
    """Platform pose ``(position, rotation matrix)`` of the full leg chain.

    ``theta`` (7) and ``dq`` (3) are offsets from the nominal configuration.
    Used to validate :func:`leg_jacobians` by finite differences.
    """
    th = np.zeros(7) if theta is None else np.asarray(theta, dtype=float)
    dq = np.zeros(3) if dq is None else np.asarray(dq, dtype=float)
    a, t, o = cfg.frame
    q1, q2, q3 = cfg.q1 + dq[0], cfg.q2 + dq[1], cfg.q3 + dq[2]
    L = params.leg_length
    n_local = np.cos(q2) * a - np.sin(q2) * o
    T = (
        _trans((cfg.rho + th[0] - stiff.L_f) * a)
        @ _rot(t, th[1])
        @ _rot(o, th[2])
        @ _rot(a, th[3])
        @ _trans(stiff.L_f * a)
        @ _rot(o, th[4])
        @ _rot(o, q1)
        @ _trans((L + th[5]) * n_local)
        @ _rot(n_local, th[6])
        @ _rot(o, q3)
    )
    return T[:3, 3].copy(), T[:3, :3].copy()


def _null_basis(J_q):
    if J_q.shape[1] == 0:
        return np.eye(J_q.shape[0])
    U, s, _ = np.linalg.svd(J_q)
    r = int(np.sum(s > _RANK_RTOL * s[0])) if s.size else 0
    return U[:, r:]


def leg_cartesian_stiffness(J: LegJacobians, k) -> SymMat6:
    """Cartesian stiffness of one leg from the SVD partition of ``J_q``.

    ``U_d`` collects the left singular vectors of ``J_q`` with zero
    singular value, i.e. the wrench directions the passive joints cannot
    absorb.  A ``J_q`` with no columns gives ``(J_theta K^-1 J_theta^T)^-1``.
    """
    k = np.asarray(k, dtype=float)
    S = (J.J_theta / k) @ J.J_theta.T
    Ud = _null_basis(J.J_q)
    inner = Ud.T @ S @ Ud
    if np.linalg.cond(inner) > _COND_MAX:
        raise ReactiveSubspaceSingular("reactive-subspace compliance is ill-conditioned")
    K = Ud @ np.linalg.solve(inner, Ud.T)
    return SymMat6(0.5 * (K + K.T))


def leg_stiffness_block_inverse(J: LegJacobians, k) -> np.ndarray:
    """Leg stiffness as the upper-left 6x6 block of the inverse of
    ``[[S, J_q], [J_q^T, 0]]`` (cross-check for the SVD route)."""
    k = np.asarray(k, dtype=float)
    S = (J.J_theta / k) @ J.J_theta.T
    m = J.J_q.shape[1]
    A = np.zeros((6 + m, 6 + m))
    A[:6, :6] = S
    A[:6, 6:] = J.J_q
    A[6:, :6] = J.J_q.T
    return np.linalg.inv(A)[:6, :6]


@dataclass(frozen=True)
class StiffnessResult:
    position: np.ndarray
    K: SymMat6
    parts: dict = field(default_factory=dict)
    """Per-leg stiffness matrices keyed by leg name."""

    @property
    def compliance(self) -> np.ndarray:
        return np.linalg.inv(self.K.matrix)

    def to_dict(self) -> dict:
        return {
            "position_mm": [float(v) for v in self.position],
            "units": {"translational": "N/mm", "rotational": "N*mm/rad", "coupling": "N/rad"},
            "K": self.K.matrix.tolist(),
            "compliance": self.compliance.tolist(),
            "legs": {name: part.matrix.tolist() for name, part in self.parts.items()},
        }


def total_stiffness(p, params: MachineParams, stiff: LegStiffnessParams = DEFAULT_STIFFNESS) -> StiffnessResult:
    """Superpose the three leg stiffness matrices at platform position ``p``.

    Raises :class:`SingularStructure` when ``lambda_min(K) < 1e-9 lambda_max(K)``.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    parts = {}
    for leg in LEGS:
        cfg = leg_configuration(p, params, leg)
        J = leg_jacobians(cfg, params, stiff)
        parts[leg] = leg_cartesian_stiffness(J, spring_constants(stiff, cfg.q2))
    K = sum(part.matrix for part in parts.values())
    w = np.linalg.eigvalsh(K)
    if w[0] < _STRUCT_RTOL * w[-1]:
        raise SingularStructure(f"stiffness matrix singular at {p}")
    return StiffnessResult(p, SymMat6(K), parts)


def build_milling_wrench(F_x: float, F_y: float, F_z: float, h_z: float) -> Wrench:
    """Cutting force at the tool tip, carried to the platform point.

    A force applied ``h_z`` below the tool holder along z produces the
    moment ``(-F_y h_z, F_x h_z, 0)``.
    """
    return Wrench((F_x, F_y, F_z), (-F_y * h_z, F_x * h_z, 0.0))


def deflection_under_wrench(K, F: Wrench) -> PoseDeviation:
    """Small platform displacement ``K^-1 F`` under the wrench ``F``."""
    K = np.asarray(K, dtype=float)
    w = np.linalg.eigvalsh(0.5 * (K + K.T))
    if w[0] <= _STRUCT_RTOL * w[-1]:
        raise SingularStructure("stiffness matrix is not positive definite")
    return PoseDeviation.from_vector(np.linalg.solve(K, F.as_vector()))


def tcp_adjustment(dt: PoseDeviation, h) -> PoseDeviation:
    """Carry a platform deviation to the tool tip at offset ``h`` (mm)."""
    h = np.asarray(h, dtype=float).reshape(3)
    return PoseDeviation(dt.dp + np.cross(dt.dphi, h), dt.dphi)


@dataclass(frozen=True)
class MillingReport:
    position: np.ndarray
    wrench: Wrench
    tool_offset: np.ndarray
    p_point: PoseDeviation
    tcp: PoseDeviation

    COLUMNS = ("dp_x_mm", "dp_y_mm", "dp_z_mm", "dphi_x_rad", "dphi_y_rad", "dphi_z_rad")

    def rows(self) -> dict:
        return {
            "P-point": dict(zip(self.COLUMNS, map(float, self.p_point.as_vector()))),
            "TCP": dict(zip(self.COLUMNS, map(float, self.tcp.as_vector()))),
        }

    def to_dict(self) -> dict:
        return {
            "position_mm": [float(v) for v in self.position],
            "wrench": {
                "force_N": [float(v) for v in self.wrench.force],
                "torque_Nmm": [float(v) for v in self.wrench.torque],
            },
            "tool_offset_mm": [float(v) for v in self.tool_offset],
            "rows": self.rows(),
        }


def milling_case_study(
    params: MachineParams,
    stiff: LegStiffnessParams = DEFAULT_STIFFNESS,
    p=(0.0, 0.0, 0.0),
    cutting=(215.0, -10.0, -25.0, 100.0),
) -> MillingReport:
    """Platform and tool-tip deviations for a groove-milling load.

    ``cutting`` is ``(F_x, F_y, F_z, h_z)`` in N and mm.
    """
    F_x, F_y, F_z, h_z = cutting
    res = total_stiffness(p, params, stiff)
    F = build_milling_wrench(F_x, F_y, F_z, h_z)
    dt = deflection_under_wrench(res.K.matrix, F)
    h = np.array([0.0, 0.0, h_z])
    return MillingReport(res.position, F, h, dt, tcp_adjustment(dt, h))


def stiffness_field(points, params: MachineParams, stiff: LegStiffnessParams = DEFAULT_STIFFNESS) -> np.ndarray:
    """Diagonal of K at each point, shape ``(n, 6)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.array([np.diag(total_stiffness(p, params, stiff).K.matrix) for p in pts])


def _isotropic_values(params, stiff):
    K = total_stiffness(np.zeros(3), params, stiff).K.matrix
    return K[0, 0], K[3, 3]


def calibrate_isotropic(
    params: MachineParams,
    stiff: LegStiffnessParams,
    k_trans: float,
    k_rot: float,
) -> LegStiffnessParams:
    """Adjust ``k_act`` and the foot length so that K at the origin equals
    ``diag(k_trans I, k_rot I)``.

    At the isotropic posture the translational stiffness depends only on
    the springs along the leg (``k0`` and ``k5`` in series) and the
    rotational one decreases monotonically with the foot length, so each
    target is met by a one-dimensional root search.
    """
    if params.ik_branch != -1:
        raise ValueError("calibration assumes the default IK branch")
    k5 = spring_constants(stiff)[5]
    if not k_trans < k5:
        raise ValueError(f"translational target {k_trans} not below the bar stiffness {k5:.6g}")
    k_act = float(1.0 / (1.0 / k_trans - 1.0 / k5))
    stiff = replace(stiff, k_act=k_act)

    def err(log_lf):
        return _isotropic_values(params, replace(stiff, L_f=float(np.exp(log_lf))))[1] - k_rot

    lf = brentq(err, np.log(1e-3), np.log(1e5), xtol=1e-14)
    return replace(stiff, L_f=float(np.exp(lf)))
