"""Sensitivity of the platform position to geometric errors.

The perturbed model changes, per leg i,

* the parallelogram length, ``L -> L + dL_i``;
* the zero of the actuator coordinate, ``rho_i -> rho_i + de_i``;
* the direction of the prismatic joint, rotated by two small angles
  about the leg's transverse axes ``t_i`` and ``o_i``.  The rail pivots
  about a fixed point on its axis (by default the ``rho_min`` end, where
  the guide is mounted).

With the actuators held at their nominal coordinates, the platform
position is recomputed from the three perturbed leg constraints
``||p - c_i|| = L + dL_i``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .core import MachineParams, Singular
from .kinematics import NoConvergence, inverse_kinematics

__all__ = [
    "PARAM_NAMES",
    "ParamPerturbation",
    "ToleranceSpec",
    "MonteCarloResult",
    "perturbed_position",
    "position_sensitivity",
    "monte_carlo_accuracy",
    "sensitivity_field",
    "DISTRIBUTIONS",
]

PARAM_NAMES = (
    ["L_x", "L_y", "L_z"]
    + ["e_x", "e_y", "e_z"]
    + [f"tilt_{ax}_{leg}" for leg in "xyz" for ax in "to"]
)
_GROUPS = {
    "L": slice(0, 3),
    "e": slice(3, 6),
    "tilt": slice(6, 12),
}

DISTRIBUTIONS = ("gaussian", "uniform", "gaussian-3sigma")


@dataclass(frozen=True)
class ParamPerturbation:
    """Geometric errors: ``dL`` and ``de`` (3, mm), ``tilt`` (3x2, rad)."""

    dL: np.ndarray = field(default_factory=lambda: np.zeros(3))
    de: np.ndarray = field(default_factory=lambda: np.zeros(3))
    tilt: np.ndarray = field(default_factory=lambda: np.zeros((3, 2)))

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            [np.ravel(self.dL), np.ravel(self.de), np.ravel(np.asarray(self.tilt).reshape(3, 2))]
        ).astype(float)

    @classmethod
    def from_vector(cls, v) -> "ParamPerturbation":
        v = np.asarray(v, dtype=float).reshape(12)
        return cls(v[0:3], v[3:6], v[6:12].reshape(3, 2))


@dataclass(frozen=True)
class ToleranceSpec:
    """Tolerance band of the Monte Carlo study.

    ``length_tol`` (mm) applies to ``dL`` and ``de``, ``angle_tol`` (rad)
    to each tilt angle; ``position_threshold`` (mm) is the accepted
    position error.
    """

    length_tol: float = 0.05
    angle_tol: float = float(np.radians(0.03))
    position_threshold: float = 0.3
    samples: int = 100_000

    def __post_init__(self):
        if self.length_tol < 0 or self.angle_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if not self.position_threshold > 0:
            raise ValueError("position threshold must be positive")
        if int(self.samples) < 1:
            raise ValueError("samples must be a positive integer")


def _select(which):
    if which is None:
        return np.arange(12)
    if isinstance(which, str):
        which = [which]
    idx = []
    for w in which:
        if w in _GROUPS:
            idx.extend(range(12)[_GROUPS[w]])
        elif w in PARAM_NAMES:
            idx.append(PARAM_NAMES.index(w))
        else:
            raise ValueError(f"unknown parameter selector {w!r}")
    return np.asarray(idx, dtype=int)


def _pivots(params, pivot):
    if pivot is None:
        return params.rho_min
    return np.broadcast_to(np.asarray(pivot, dtype=float), (3,))


def _tilted_axes(frames, tilt):
    """Rodrigues rotation of each leg axis; ``tilt`` has shape (N, 3, 2)."""
    a = frames[:, 0]
    w = tilt[..., 0:1] * frames[None, :, 1] + tilt[..., 1:2] * frames[None, :, 2]
    theta = np.linalg.norm(w, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(theta > 0, w / theta, 0.0)
    c, s = np.cos(theta), np.sin(theta)
    a = np.broadcast_to(a, w.shape)
    kxa = np.cross(k, a)
    kda = np.sum(k * a, axis=-1, keepdims=True)
    return a * c + kxa * s + k * kda * (1 - c)


def _solve_batch(p0, rho, params, X, pivots, tol, max_iter=50):
    """Perturbed platform positions for the rows of ``X`` (N x 12)."""
    n = X.shape[0]
    frames = params.frames
    axes_t = _tilted_axes(frames, X[:, 6:12].reshape(n, 3, 2))
    c = pivots[None, :, None] * frames[None, :, 0] + (rho + X[:, 3:6] - pivots)[:, :, None] * axes_t
    target = params.leg_length + X[:, 0:3]
    p = np.broadcast_to(np.asarray(p0, float), (n, 3)).copy()
    for _ in range(max_iter):
        d = p[:, None, :] - c
        nrm = np.linalg.norm(d, axis=-1)
        f = nrm - target
        G = d / nrm[..., None]
        det = np.linalg.det(G)
        if np.any(np.abs(det) < 1e-12):
            raise Singular("perturbed kinematics singular")
        step = np.linalg.solve(G, -f[..., None])[..., 0]
        p += step
        if np.max(np.abs(step)) < tol:
            return p
    raise NoConvergence("perturbed forward kinematics did not converge")


def perturbed_position(p, params: MachineParams, perturbation, pivot=None) -> np.ndarray:
    """Platform position after applying ``perturbation`` with the actuators
    held at the nominal joint coordinates of ``p``."""
    p = np.asarray(p, dtype=float).reshape(3)
    rho = inverse_kinematics(p, params, check_limits=False)
    if isinstance(perturbation, ParamPerturbation):
        perturbation = perturbation.as_vector()
    X = np.asarray(perturbation, dtype=float).reshape(1, 12)
    return _solve_batch(p, rho, params, X, _pivots(params, pivot), 1e-13 * params.leg_length)[0]


def position_sensitivity(p, params: MachineParams, which=None, step: float = 1e-4, pivot=None) -> np.ndarray:
    """Jacobian of the platform position w.r.t. the selected parameters.

    Central differences of the perturbed model with step ``step`` (mm or
    rad) and ``step/2`` are combined by Richardson extrapolation; a
    :class:`RuntimeWarning` is issued if the two estimates differ by more
    than 1e-6 relative.

    ``which`` selects columns: ``None`` for all twelve, a group name
    (``"L"``, ``"e"``, ``"tilt"``) or names from :data:`PARAM_NAMES`.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    idx = _select(which)
    rho = inverse_kinematics(p, params, check_limits=False)
    piv = _pivots(params, pivot)
    tol = 1e-13 * params.leg_length

    def central(h):
        E = np.zeros((2 * idx.size, 12))
        for col, k in enumerate(idx):
            E[2 * col, k] = h
            E[2 * col + 1, k] = -h
        P = _solve_batch(p, rho, params, E, piv, tol)
        return ((P[0::2] - P[1::2]) / (2 * h)).T

    d1 = central(step)
    d2 = central(step / 2)
    scale = max(np.linalg.norm(d2), 1.0)
    if np.linalg.norm(d1 - d2) > 1e-6 * scale:
        warnings.warn("finite-difference sensitivities did not converge", RuntimeWarning, stacklevel=2)
    return (4.0 * d2 - d1) / 3.0


@dataclass(frozen=True)
class MonteCarloResult:
    probability: float
    ci_low: float
    ci_high: float
    samples: int
    seed: int
    distribution: str
    position: np.ndarray
    threshold: float
    error_mean: float
    error_max: float

    def to_dict(self) -> dict:
        return {
            "position_mm": [float(v) for v in self.position],
            "probability": self.probability,
            "ci95": [self.ci_low, self.ci_high],
            "samples": self.samples,
            "seed": self.seed,
            "distribution": self.distribution,
            "threshold_mm": self.threshold,
            "error_mean_mm": self.error_mean,
            "error_max_mm": self.error_max,
        }


def _draw(rng, n, tol: ToleranceSpec, distribution):
    scale = np.r_[np.full(6, tol.length_tol), np.full(6, tol.angle_tol)]
    if distribution == "uniform":
        return rng.uniform(-1.0, 1.0, (n, 12)) * scale
    if distribution == "gaussian":
        return rng.standard_normal((n, 12)) * scale
    if distribution == "gaussian-3sigma":
        return rng.standard_normal((n, 12)) * (scale / 3.0)
    raise ValueError(f"unknown distribution {distribution!r}; expected one of {DISTRIBUTIONS}")


def monte_carlo_accuracy(
    p,
    params: MachineParams,
    tol: ToleranceSpec = ToleranceSpec(),
    seed: int = 0,
    distribution: str = "gaussian",
    pivot=None,
    chunk: int = 50_000,
) -> MonteCarloResult:
    """Estimate ``P(||dp|| <= threshold)`` at position ``p``.

    Each sample draws all twelve parameters independently and solves the
    perturbed kinematics exactly.  ``distribution`` is ``"gaussian"``
    (tolerance = one standard deviation), ``"uniform"`` (within
    +/-tolerance) or ``"gaussian-3sigma"`` (tolerance = three standard
    deviations).  The interval is the 95% Wilson score interval.  Results
    are deterministic for a given seed.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    n = int(tol.samples)
    rho = inverse_kinematics(p, params, check_limits=False)
    piv = _pivots(params, pivot)
    rng = np.random.default_rng(seed)
    errs = []
    done = 0
    while done < n:
        m = min(chunk, n - done)
        X = _draw(rng, m, tol, distribution)
        P = _solve_batch(p, rho, params, X, piv, 1e-9)
        errs.append(np.linalg.norm(P - p, axis=1))
        done += m
    err = np.concatenate(errs)
    k = int(np.sum(err <= tol.position_threshold))
    ci = binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    return MonteCarloResult(
        probability=k / n,
        ci_low=float(ci.low),
        ci_high=float(ci.high),
        samples=n,
        seed=int(seed),
        distribution=distribution,
        position=p,
        threshold=float(tol.position_threshold),
        error_mean=float(err.mean()),
        error_max=float(err.max()),
    )


def sensitivity_field(params: MachineParams, points, which=None, pivot=None) -> np.ndarray:
    """Frobenius norm of :func:`position_sensitivity` at each point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.array([np.linalg.norm(position_sensitivity(q, params, which, pivot=pivot)) for q in pts])
