"""Exit criteria, one check per criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -s`` (or execute this file) to
see one PASS/FAIL line per criterion.
"""

import time

import numpy as np
import pytest

from orthoglide.kinematics import inverse_jacobian, inverse_kinematics, jacobian, transmission_factors
from orthoglide.sensitivity import ToleranceSpec, monte_carlo_accuracy
from orthoglide.stiffness import (
    DEFAULT_STIFFNESS,
    LEGS,
    build_milling_wrench,
    deflection_under_wrench,
    leg_cartesian_stiffness,
    leg_configuration,
    leg_jacobians,
    leg_stiffness_block_inverse,
    spring_constants,
    tcp_adjustment,
    total_stiffness,
)
from orthoglide.core import PoseDeviation
from orthoglide.synthesis import SynthesisSpec, synthesize
from orthoglide.workspace import OUTSIDE, grid_map, interval_certify

from test_stiffness import fd_leg_jacobians, leg_energy_qp

SEED = 20240607


def _machine():
    return synthesize(SynthesisSpec(200.0, (0.5, 2.0)))


def _postures(params, n, seed=SEED):
    return np.random.default_rng(seed).uniform(params.cube.lo, params.cube.hi, (n, 3))


def c01_synthesis():
    t = time.perf_counter()
    rep, _ = _machine()
    dt = time.perf_counter() - t
    ok = abs(rep.leg_length / 310 - 1) <= 0.015 and abs(rep.stroke / 257 - 1) <= 0.015 and dt < 1
    return ok, f"L={rep.leg_length:.3f} mm, stroke={rep.stroke:.3f} mm, {dt:.3f} s"


def c02_critical_points():
    t = time.perf_counter()
    rep, _ = _machine()
    dt = time.perf_counter() - t
    ok = abs(rep.u_q1 / -73.65 - 1) <= 0.015 and abs(rep.u_q2 / 126.35 - 1) <= 0.015 and dt < 1
    return ok, f"Q1={rep.u_q1:.3f} mm, Q2={rep.u_q2:.3f} mm, {dt:.3f} s"


def c03_isotropy():
    _, params = _machine()
    J = jacobian(np.zeros(3), params)
    tf = transmission_factors(np.zeros(3), params)
    err = max(np.abs(J - np.eye(3)).max(), abs(tf.psi_min - 1), abs(tf.psi_max - 1))
    return err <= 1e-9, f"max deviation {err:.2e}"


def c04_factor_bounds():
    _, params = _machine()
    t = time.perf_counter()
    wm = grid_map(params, params.cube, 17)
    verdicts = interval_certify(params, params.cube, max_depth=8)
    dt = time.perf_counter() - t
    lo, hi = np.nanmin(wm.psi_min), np.nanmax(wm.psi_max)
    n_out = sum(v.verdict == OUTSIDE for v in verdicts)
    ok = wm.reachable.all() and lo >= 0.5 - 1e-9 and hi <= 2 + 1e-9 and n_out == 0 and dt < 30
    return ok, f"psi in [{lo:.12f}, {hi:.12f}], {len(verdicts)} boxes, {n_out} Outside, {dt:.2f} s"


def c05_stiffness_self_consistency():
    _, params = _machine()
    t = time.perf_counter()
    worst_rel = worst_null = 0.0
    ranks = set()
    for p in _postures(params, 100):
        for leg in LEGS:
            cfg = leg_configuration(p, params, leg)
            J = leg_jacobians(cfg, params, DEFAULT_STIFFNESS)
            k = spring_constants(DEFAULT_STIFFNESS, cfg.q2)
            K = leg_cartesian_stiffness(J, k)
            B = leg_stiffness_block_inverse(J, k)
            worst_rel = max(worst_rel, np.linalg.norm(K.matrix - B) / np.linalg.norm(B))
            worst_null = max(worst_null, np.abs(K.matrix @ J.J_q).max() / np.linalg.norm(K.matrix))
            ranks.add(K.rank())
    dt = time.perf_counter() - t
    ok = worst_rel <= 1e-8 and ranks == {3} and worst_null <= 1e-9 and dt < 10
    return ok, f"SVD vs 9x9 {worst_rel:.2e}, ranks {sorted(ranks)}, |K Jq| {worst_null:.2e}, {dt:.2f} s"


def c06_energy_oracle():
    _, params = _machine()
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for p in _postures(params, 20):
        K = total_stiffness(p, params).K.matrix
        dt = rng.standard_normal(6) * np.r_[np.full(3, 1e-3), np.full(3, 1e-5)]
        qp = 0.0
        for leg in LEGS:
            cfg = leg_configuration(p, params, leg)
            J = leg_jacobians(cfg, params, DEFAULT_STIFFNESS)
            qp += leg_energy_qp(J, spring_constants(DEFAULT_STIFFNESS, cfg.q2), dt)
        worst = max(worst, abs(0.5 * dt @ K @ dt - qp) / qp)
    return worst <= 1e-6, f"max relative energy mismatch {worst:.2e}"


def _pattern_error(block):
    a, b = block[0, 0], block[0, 1]
    E = np.ones((3, 3))
    return np.abs(block - (a * np.eye(3) + b * (E - np.eye(3)))).max() / abs(a)


def c07_stiffness_structure():
    rep, params = _machine()
    K0 = total_stiffness(np.zeros(3), params).K
    d = np.diag(K0.matrix)
    iso_err = max(
        np.abs(K0.coupling).max() / d[:3].min(),
        np.abs(K0.translational - np.diag(d[:3])).max() / d[:3].min(),
        np.abs(K0.rotational - np.diag(d[3:])).max() / d[3:].min(),
        np.ptp(d[:3]) / d[0],
        np.ptp(d[3:]) / d[3],
    )
    diag_err = 0.0
    for q in (rep.q1, rep.q2):
        K = total_stiffness(q, params).K
        diag_err = max(diag_err, _pattern_error(K.translational), _pattern_error(K.rotational))
    ok = iso_err < 1e-6 and diag_err < 1e-6
    return ok, f"isotropic pattern {iso_err:.2e}, Q1/Q2 aI+b(E-I) pattern {diag_err:.2e}"


def c08_deflection():
    K = np.diag([2.71e3] * 3 + [8.37e6] * 3)
    dt = deflection_under_wrench(K, build_milling_wrench(215, -10, -25, 100))
    dp_err = np.abs(dt.dp - [0.0792, -0.0037, -0.0092]).max()
    phi_err = abs(dt.dphi[1] - 0.0027)
    ok = dp_err <= 2e-4 and phi_err <= 2e-4
    return ok, f"dp={np.round(dt.dp, 5).tolist()} (err {dp_err:.1e}), dphi_y={dt.dphi[1]:.5f} (err {phi_err:.1e})"


def c09_tcp():
    p_row = PoseDeviation((0.0792, -0.0037, -0.0092), (-0.0003, 0.0027, -0.0004))
    tcp = tcp_adjustment(p_row, (0.0, 0.0, 100.0))
    err = np.abs(tcp.dp - [0.3482, 0.0239, -0.0092]).max()
    ok = err <= 5e-3 and tcp.dp[2] == p_row.dp[2]
    return ok, f"TCP dp={np.round(tcp.dp, 4).tolist()}, max err {err:.1e}, dp_z unchanged={tcp.dp[2] == p_row.dp[2]}"


def c10_sensitivity_ordering():
    rep, params = _machine()
    tol = ToleranceSpec(length_tol=0.05, angle_tol=np.radians(0.03), position_threshold=0.3, samples=100_000)
    t = time.perf_counter()
    res = [monte_carlo_accuracy(p, params, tol, seed=0) for p in (np.zeros(3), rep.q1, rep.q2)]
    dt = time.perf_counter() - t
    iso, q1, q2 = res
    ok = iso.ci_low > q1.ci_high and q1.ci_low > q2.ci_high and dt < 60
    soft = [abs(r.probability - ref) <= 0.08 for r, ref in zip(res, (0.9683, 0.8468, 0.7276))]
    detail = ", ".join(
        f"{name} {r.probability:.4f} [{r.ci_low:.4f}, {r.ci_high:.4f}]" for name, r in zip(("iso", "Q1", "Q2"), res)
    )
    return ok, f"{detail}; soft +/-0.08 targets met: {soft}; {dt:.1f} s"


def c11_numerical_hygiene():
    _, params = _machine()
    worst_kin = worst_leg = 0.0
    h = 1e-4
    for p in _postures(params, 50):
        A = inverse_jacobian(p, params)
        cols = []
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            cols.append((inverse_kinematics(p + e, params, False) - inverse_kinematics(p - e, params, False)) / (2 * h))
        worst_kin = max(worst_kin, np.linalg.norm(A - np.column_stack(cols)) / np.linalg.norm(A))
        for leg in LEGS:
            cfg = leg_configuration(p, params, leg)
            J = leg_jacobians(cfg, params, DEFAULT_STIFFNESS)
            Jt, Jq = fd_leg_jacobians(cfg, params, DEFAULT_STIFFNESS)
            worst_leg = max(
                worst_leg,
                np.linalg.norm(J.J_theta - Jt) / np.linalg.norm(J.J_theta),
                np.linalg.norm(J.J_q - Jq) / np.linalg.norm(J.J_q),
            )
    ok = worst_kin <= 1e-6 and worst_leg <= 1e-6
    return ok, f"kinematic J^-1 {worst_kin:.2e}, leg chain {worst_leg:.2e}"


CRITERIA = [
    (1, "synthesis reproduction", c01_synthesis),
    (2, "critical points", c02_critical_points),
    (3, "isotropy", c03_isotropy),
    (4, "factor bounds", c04_factor_bounds),
    (5, "stiffness self-consistency", c05_stiffness_self_consistency),
    (6, "energy oracle", c06_energy_oracle),
    (7, "stiffness structure", c07_stiffness_structure),
    (8, "deflection cross-check", c08_deflection),
    (9, "TCP formula", c09_tcp),
    (10, "sensitivity ordering", c10_sensitivity_ordering),
    (11, "numerical hygiene", c11_numerical_hygiene),
]


def _line(num, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {name}: {detail}"


@pytest.mark.acceptance
@pytest.mark.parametrize("num, name, check", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(num, name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(num, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    import sys

    results = []
    for num, name, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(_line(num, name, ok, detail), flush=True)
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
