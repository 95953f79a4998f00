"""Workspace mapping and certification.

Two complementary tools:

* :func:`grid_map` evaluates reach, joint limits and transmission factors
  at the nodes of a regular grid (fast, but only a sample);
* :func:`interval_certify` runs a branch-and-prune over boxes using
  interval enclosures of the same closed-form expressions, so an
  ``Inside`` verdict holds for every point of the box.

Transmission-factor enclosures use Weyl's inequality: for any matrix
within elementwise radius ``R`` of the box-center matrix ``Mc``,
``|sigma_k(M) - sigma_k(Mc)| <= ||R||_2 <= min(||R||_F, sqrt(||R||_1 ||R||_inf))``.
The SVD of ``Mc`` is computed in floating point, so its singular values
are inflated by ``1e-12`` relative before use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import interval as iv
from .core import DEFAULT_PSI_BOUNDS, Cube, MachineParams
from .kinematics import _rho

__all__ = [
    "WorkspaceMap",
    "BoxVerdict",
    "InclusionResult",
    "INSIDE",
    "OUTSIDE",
    "BOUNDARY",
    "grid_map",
    "interval_certify",
    "boundary_volume",
    "cube_inclusion_check",
]

INSIDE = "Inside"
OUTSIDE = "Outside"
BOUNDARY = "Boundary"

_TOL = 1e-9
_SVD_INFLATE = 1e-12
_DET_TOL = 1e-12


def _as_box(bounds):
    if isinstance(bounds, Cube):
        return bounds.lo, bounds.hi
    lo, hi = bounds
    lo = np.asarray(lo, dtype=float).reshape(3)
    hi = np.asarray(hi, dtype=float).reshape(3)
    if np.any(lo > hi):
        raise ValueError("box lower corner exceeds upper corner")
    return lo, hi


@dataclass(frozen=True)
class WorkspaceMap:
    """Per-node evaluation of a regular grid.

    ``psi_min``/``psi_max`` are NaN at unreachable nodes and ``inf`` (for
    ``psi_max``) at singular ones.
    """

    lo: np.ndarray
    hi: np.ndarray
    resolution: int
    points: np.ndarray
    reachable: np.ndarray
    psi_min: np.ndarray
    psi_max: np.ndarray
    within_limits: np.ndarray
    psi_ok: np.ndarray

    @property
    def feasible(self) -> np.ndarray:
        return self.reachable & self.within_limits & self.psi_ok

    def __len__(self):
        return len(self.points)

    @property
    def fraction_feasible(self) -> float:
        return float(np.mean(self.feasible))


def evaluate_points(points, params: MachineParams, psi_bounds=DEFAULT_PSI_BOUNDS, tol=_TOL):
    """Vectorised point test: returns ``(reachable, psi_min, psi_max, within_limits, psi_ok)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    axes = params.axes
    rho, rad = _rho(pts, params.leg_length, params.ik_branch, axes)
    reachable = np.all(rad > 0, axis=1)
    within = np.all(
        (rho >= params.rho_min - tol) & (rho <= params.rho_max + tol), axis=1
    ) & reachable

    psi_min = np.full(len(pts), np.nan)
    psi_max = np.full(len(pts), np.nan)
    idx = np.flatnonzero(reachable)
    if idx.size:
        q = pts[idx] @ axes.T
        s = np.sqrt(rad[idx])
        # J^-1 in leg coordinates: unit diagonal, -branch*q_j/s_i off it
        M = -params.ik_branch * q[:, None, :] / s[:, :, None]
        M[:, [0, 1, 2], [0, 1, 2]] = 1.0
        sv = np.linalg.svd(M, compute_uv=False)
        with np.errstate(divide="ignore"):
            psi_min[idx] = 1.0 / sv[:, 0]
            psi_max[idx] = np.where(sv[:, -1] > _DET_TOL, 1.0 / sv[:, -1], np.inf)
    lo_b, hi_b = psi_bounds
    with np.errstate(invalid="ignore"):
        psi_ok = reachable & (psi_min >= lo_b - tol) & (psi_max <= hi_b + tol)
    return reachable, psi_min, psi_max, within, psi_ok


def grid_map(params: MachineParams, bounds, resolution: int, psi_bounds=DEFAULT_PSI_BOUNDS) -> WorkspaceMap:
    """Evaluate the constraints at the ``resolution**3`` nodes of ``bounds``.

    Nodes include the box corners, so ``resolution=2`` evaluates exactly
    the eight corners.  Infeasible nodes are flagged, never raised.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    lo, hi = _as_box(bounds)
    axes = [np.linspace(a, b, resolution) for a, b in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    reachable, pmin, pmax, within, psi_ok = evaluate_points(pts, params, psi_bounds)
    return WorkspaceMap(lo, hi, resolution, pts, reachable, pmin, pmax, within, psi_ok)


@dataclass(frozen=True)
class BoxVerdict:
    lo: np.ndarray
    hi: np.ndarray
    verdict: str
    depth: int
    """Number of bisections that produced this box."""

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def to_dict(self) -> dict:
        return {
            "lo": [float(v) for v in self.lo],
            "hi": [float(v) for v in self.hi],
            "verdict": self.verdict,
            "depth": int(self.depth),
        }

    @classmethod
    def from_dict(cls, d) -> "BoxVerdict":
        return cls(np.asarray(d["lo"], float), np.asarray(d["hi"], float), d["verdict"], int(d["depth"]))


def _spectral_bound(R):
    fro = np.sqrt(np.sum(R * R, axis=(-2, -1)))
    one = np.max(np.sum(R, axis=-2), axis=-1)
    inf = np.max(np.sum(R, axis=-1), axis=-1)
    return np.minimum(fro, np.sqrt(one * inf))


def classify_boxes(lo, hi, params: MachineParams, psi_bounds=DEFAULT_PSI_BOUNDS, tol=_TOL):
    """Verdict codes for a batch of boxes: 0 Inside, 1 Outside, 2 Boundary.

    Constraints are tested in first-fail order: reach, joint limits,
    transmission factors.
    """
    lo = np.atleast_2d(lo)
    hi = np.atleast_2d(hi)
    n = lo.shape[0]
    A = params.axes
    L = params.leg_length
    b = params.ik_branch
    P = iv.Interval(lo, hi)

    # leg coordinates q_i = a_i . p
    if np.allclose(A, np.eye(3)):
        Q = P
    else:
        cols = []
        for i in range(3):
            acc = iv.Interval(np.zeros(n))
            for j in range(3):
                acc = acc + P[:, j] * A[i, j]
            cols.append(acc)
        Q = iv.Interval(np.stack([c.lo for c in cols], 1), np.stack([c.hi for c in cols], 1))

    Q2 = iv.sqr(Q)
    outside = np.zeros(n, dtype=bool)
    inside = np.ones(n, dtype=bool)

    rad_lo = np.empty((n, 3))
    rad_hi = np.empty((n, 3))
    for i in range(3):
        j, k = [m for m in range(3) if m != i]
        r = (L * L) - (Q2[:, j] + Q2[:, k])
        rad_lo[:, i], rad_hi[:, i] = r.lo, r.hi
    outside |= np.any(rad_hi <= 0, axis=1)
    reach_ok = np.all(rad_lo > 0, axis=1)
    inside &= reach_ok

    S = iv.sqrt(iv.Interval(rad_lo, rad_hi))
    rho = Q + S * float(b)
    rmin = params.rho_min - tol
    rmax = params.rho_max + tol
    outside |= np.any((rho.hi < rmin) | (rho.lo > rmax), axis=1) & reach_ok
    inside &= np.all((rho.lo >= rmin) & (rho.hi <= rmax), axis=1)

    # transmission factors: only meaningful where reach holds on the whole box
    idx = np.flatnonzero(reach_ok & ~outside)
    if idx.size:
        Qs = Q[idx]
        Ss = S[idx]
        Mlo = np.ones((idx.size, 3, 3))
        Mhi = np.ones((idx.size, 3, 3))
        inv_s = Ss.reciprocal()
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                e = Qs[:, j] * inv_s[:, i] * float(-b)
                Mlo[:, i, j], Mhi[:, i, j] = e.lo, e.hi
        Mc = 0.5 * (Mlo + Mhi)
        R = np.nextafter(0.5 * (Mhi - Mlo), np.inf)
        eta = _spectral_bound(R)
        sv = np.linalg.svd(Mc, compute_uv=False)
        fp = _SVD_INFLATE * sv[:, 0]
        smax_hi = sv[:, 0] + eta + fp
        smax_lo = sv[:, 0] - eta - fp
        smin_hi = sv[:, -1] + eta + fp
        smin_lo = sv[:, -1] - eta - fp
        psi_lo, psi_hi = psi_bounds
        thr_min = 1.0 / (psi_hi + tol)  # sigma_min(J^-1) must stay above
        thr_max = 1.0 / (psi_lo - tol)  # sigma_max(J^-1) must stay below
        psi_in = (smin_lo >= thr_min) & (smax_hi <= thr_max)
        psi_out = (smin_hi < thr_min) | (smax_lo > thr_max)
        inside_psi = np.zeros(n, dtype=bool)
        inside_psi[idx] = psi_in
        outside[idx] |= psi_out
        inside &= inside_psi
    else:
        inside[:] = False

    codes = np.full(n, 2, dtype=int)
    codes[inside & ~outside] = 0
    codes[outside] = 1
    return codes


def interval_certify(
    params: MachineParams,
    box,
    psi_bounds=DEFAULT_PSI_BOUNDS,
    max_depth: int = 8,
    stop_on_outside: bool = False,
) -> list[BoxVerdict]:
    """Branch-and-prune partition of ``box`` into Inside/Outside/Boundary.

    Boxes that are neither certified Inside nor Outside are bisected along
    their widest edge.  ``max_depth`` limits refinement: a box is no
    longer split once its widest edge is at most ``2**-max_depth`` times
    the initial widest edge (three bisections per level for a cube).
    Boxes still undecided at that size are returned as Boundary.

    With ``stop_on_outside`` the search returns as soon as an Outside box
    is found; pending boxes are then reported as Boundary.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    lo0, hi0 = _as_box(box)
    min_width = float(np.max(hi0 - lo0)) * 2.0 ** (-max_depth)

    out: list[BoxVerdict] = []
    lo = lo0[None, :].copy()
    hi = hi0[None, :].copy()
    depth = np.zeros(1, dtype=int)
    while len(lo):
        codes = classify_boxes(lo, hi, params, psi_bounds)
        for code, name in ((0, INSIDE), (1, OUTSIDE)):
            for k in np.flatnonzero(codes == code):
                out.append(BoxVerdict(lo[k], hi[k], name, int(depth[k])))
        bnd = np.flatnonzero(codes == 2)
        if stop_on_outside and np.any(codes == 1):
            out.extend(BoxVerdict(lo[k], hi[k], BOUNDARY, int(depth[k])) for k in bnd)
            break
        widths = hi[bnd] - lo[bnd]
        widest = widths.max(axis=1) if bnd.size else np.empty(0)
        final = (widest <= min_width) | (widest == 0)
        for k in bnd[final]:
            out.append(BoxVerdict(lo[k], hi[k], BOUNDARY, int(depth[k])))
        split = bnd[~final]
        if not split.size:
            break
        dim = np.argmax(hi[split] - lo[split], axis=1)
        rows = np.arange(split.size)
        mid = 0.5 * (lo[split, dim] + hi[split, dim])
        lo_a, hi_a = lo[split].copy(), hi[split].copy()
        lo_b, hi_b = lo[split].copy(), hi[split].copy()
        hi_a[rows, dim] = mid
        lo_b[rows, dim] = mid
        lo = np.concatenate([lo_a, lo_b])
        hi = np.concatenate([hi_a, hi_b])
        depth = np.concatenate([depth[split] + 1, depth[split] + 1])
    return out


def boundary_volume(verdicts) -> float:
    return float(sum(v.volume for v in verdicts if v.verdict == BOUNDARY))


class InclusionResult(NamedTuple):
    included: bool
    margin: float
    """Largest uniform outward growth of each face (mm) still certified."""


def _certified(params, cube, psi_bounds, max_depth):
    verdicts = interval_certify(params, cube, psi_bounds, max_depth, stop_on_outside=True)
    if any(v.verdict == OUTSIDE for v in verdicts):
        return False
    return boundary_volume(verdicts) <= cube.volume * 2.0 ** (-max_depth)


def cube_inclusion_check(
    params: MachineParams,
    cube: Cube | None = None,
    psi_bounds=DEFAULT_PSI_BOUNDS,
    max_depth: int = 8,
    margin_tol: float = 1e-2,
) -> InclusionResult:
    """Certify that ``cube`` lies inside the dextrous workspace.

    The cube is included when certification finds no Outside box and the
    leftover Boundary volume is at most ``2**-max_depth`` of the cube's.
    The margin is found by bisection on a uniform inflation of the cube;
    it is limited by the certification resolution.  A cube of zero side
    is included trivially.
    """
    cube = params.cube if cube is None else cube
    if cube.side <= 0:
        included = True
    else:
        included = _certified(params, cube, psi_bounds, max_depth)
    if not included:
        return InclusionResult(False, 0.0)

    lo, hi = 0.0, max(cube.side, 1.0)
    while _certified(params, cube.inflate(hi), psi_bounds, max_depth):
        lo, hi = hi, 2.0 * hi
        if hi > 10.0 * params.leg_length:
            return InclusionResult(True, lo)
    while hi - lo > margin_tol:
        mid = 0.5 * (lo + hi)
        if _certified(params, cube.inflate(mid), psi_bounds, max_depth):
            lo = mid
        else:
            hi = mid
    return InclusionResult(True, lo)
