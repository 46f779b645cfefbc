from math import cos, pi, radians, sin, sqrt

import numpy as np
import pytest

from contactstab import (
    BodyState,
    ContactConfig,
    GeometryError,
    canonical_frame,
    chart_from_local,
    chart_to_local,
    contact_kinematics,
    metrics,
)
from contactstab.model import chart_matrix


def test_canonical_frame_example3(example3):
    frame = canonical_frame(example3)
    # contacts separated along the contact line, l2 = -0.1 slightly left of com
    assert frame.p1[0] == pytest.approx(1.5)
    assert frame.p2[0] == pytest.approx(-0.1)
    assert frame.p1[1] == frame.p2[1] == pytest.approx(-0.6)
    for v in (frame.t1, frame.t2, frame.n1, frame.n2):
        assert np.linalg.norm(v) == pytest.approx(1.0)
    # normals are +90 degree rotations of the tangents
    assert frame.n1 @ frame.t1 == pytest.approx(0.0, abs=1e-15)
    assert frame.n2 @ frame.t2 == pytest.approx(0.0, abs=1e-15)


def test_axis_aligned_supports():
    cfg = ContactConfig(l1=-1, l2=1, h=0.5, phi1=0, phi2=0, mu1=0.3, mu2=0.3)
    frame = canonical_frame(cfg)
    assert frame.t1 == pytest.approx([1, 0])
    assert frame.n1 == pytest.approx([0, 1])


def test_pure_gravity_force():
    cfg = ContactConfig(l1=-1, l2=1, h=0.5, phi1=0, phi2=0, mu1=0.3, mu2=0.3,
                        alpha=0.0, f_mag=2.5)
    frame = canonical_frame(cfg)
    assert frame.f_ex == pytest.approx([0.0, -2.5])


def test_degenerate_geometry_rejected():
    with pytest.raises(GeometryError):
        ContactConfig(l1=1.0, l2=1.0, h=0.5, phi1=0, phi2=0, mu1=0.3, mu2=0.3)


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        ContactConfig(l1=-1, l2=1, h=0.5, phi1=0, phi2=0, mu1=-0.1, mu2=0.3)
    with pytest.raises(ValueError):
        ContactConfig(l1=-1, l2=1, h=0.5, phi1=0, phi2=0, mu1=0.1, mu2=0.3, m=0)


def test_kinematics_reference_configuration(example3):
    c1, c2 = contact_kinematics(example3, (0, 0, 0), (0, 0, 0))
    assert c1 == pytest.approx((0, 0, 0, 0), abs=1e-15)
    assert c2 == pytest.approx((0, 0, 0, 0), abs=1e-15)


def test_kinematics_vertical_translation():
    cfg = ContactConfig(l1=-1, l2=1, h=0.5, phi1=0, phi2=0, mu1=0.3, mu2=0.3)
    c1, c2 = contact_kinematics(cfg, (0, 0.7, 0), (0, 0, 0))
    assert c1[1] == pytest.approx(0.7)
    assert c2[1] == pytest.approx(0.7)
    assert c1[0] == pytest.approx(0.0, abs=1e-15)


def test_kinematics_small_rotation_against_direct_evaluation(example3):
    # oracle: direct evaluation of r_i = r_c + R(theta) p_i
    theta = 1e-3
    frame = canonical_frame(example3)
    R = np.array([[cos(theta), -sin(theta)], [sin(theta), cos(theta)]])
    for i, p in enumerate((frame.p1, frame.p2)):
        r = R @ p
        x_exp = float((r - p) @ frame.t(i))
        z_exp = float((r - p) @ frame.n(i))
        got = contact_kinematics(example3, (0, 0, theta), (0, 0, 0))[i]
        assert got[0] == pytest.approx(x_exp, abs=1e-15)
        assert got[1] == pytest.approx(z_exp, abs=1e-15)
        # first order in theta: displacement ~ theta * (J p . t/n)
        jp = np.array([-p[1], p[0]])
        assert got[0] == pytest.approx(theta * float(jp @ frame.t(i)), abs=2 * theta ** 2)
        assert got[1] == pytest.approx(theta * float(jp @ frame.n(i)), abs=2 * theta ** 2)


def test_chart_round_trip_origin(example3):
    state = chart_to_local(example3, (0, 0, 0), (0, 0, 0))
    assert state.q == pytest.approx((0, 0, 0), abs=1e-15)
    q, dq = chart_from_local(example3, BodyState(0, 0, 0, 0, 0, 0))
    assert q == pytest.approx((0, 0, 0), abs=1e-12)
    assert dq == pytest.approx((0, 0, 0), abs=1e-12)


def test_chart_round_trip_paper_initial_condition(example2):
    # Local state used by the worked trajectory of the steep-contact example.
    # It has no exact-kinematics world preimage (the exact chart folds well
    # inside |q'| ~ 1 for this geometry); the zero-order chart, under which
    # the trajectory is actually simulated, recovers it exactly.
    state = BodyState(1.0, 1.0, 0.0, 0.0, 0.0, 2.0)
    q, dq = chart_from_local(example2, state, linear=True)
    M = chart_matrix(example2)
    back = M @ np.array(q)
    assert tuple(back) == pytest.approx(state.q, abs=1e-12)
    assert tuple(M @ np.array(dq)) == pytest.approx(state.dq, abs=1e-12)
    with pytest.raises(GeometryError):
        chart_from_local(example2, state)


def test_chart_round_trip_random_states(example3):
    rng = np.random.default_rng(42)
    for _ in range(200):
        q = tuple(rng.uniform(-1e-2, 1e-2, 3))
        dq = tuple(rng.uniform(-1e-2, 1e-2, 3))
        state = chart_to_local(example3, q, dq)
        q2, dq2 = chart_from_local(example3, state)
        assert q2 == pytest.approx(q, abs=1e-10)
        assert dq2 == pytest.approx(dq, abs=1e-10)


def test_chart_jacobian_invertible(example2, example3, example4):
    for cfg in (example2, example3, example4):
        M = chart_matrix(cfg)
        assert abs(np.linalg.det(M)) > 1e-6


def test_chart_singularity_reported():
    cfg = ContactConfig(l1=-1, l2=1, h=0.5, phi1=pi / 2, phi2=0, mu1=0.3, mu2=0.3)
    with pytest.raises(GeometryError):
        chart_to_local(cfg, (0, 0, 0), (0, 0, 0))


def test_chart_velocity_matches_finite_difference(example3):
    # d/dt of the chart positions must equal the reported velocities
    rng = np.random.default_rng(3)
    for _ in range(20):
        q = rng.uniform(-1e-2, 1e-2, 3)
        dq = rng.uniform(-1e-2, 1e-2, 3)
        eps = 1e-6
        plus = chart_to_local(example3, tuple(q + eps * dq), tuple(dq))
        minus = chart_to_local(example3, tuple(q - eps * dq), tuple(dq))
        mid = chart_to_local(example3, tuple(q), tuple(dq))
        for got, a, b in ((mid.dz1, plus.z1, minus.z1),
                          (mid.dz2, plus.z2, minus.z2),
                          (mid.dx2, plus.x2, minus.x2)):
            assert got == pytest.approx((a - b) / (2 * eps), abs=1e-6)


def test_metrics_zero_state():
    m = metrics(BodyState(0, 0, 0, 0, 0, 0))
    assert (m.delta, m.d, m.D) == (0, 0, 0)


def test_metrics_single_gap():
    m = metrics(BodyState(0.04, 0, 0, 0, 0, 0))
    assert m.d == m.D == m.delta == pytest.approx(0.2)


def test_metrics_tangential_offset():
    m = metrics(BodyState(0, 0, 1.0, 0, 0, 0.5))
    assert m.d == 0
    assert m.D == pytest.approx(0.5)
    assert m.delta == pytest.approx(1.0)


def test_metrics_negative_gap_rejected():
    with pytest.raises(ValueError):
        metrics(BodyState(-0.1, 0, 0, 0, 0, 0))


def test_metric_ordering_random_states():
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        state = BodyState(
            z1=rng.uniform(0, 2), z2=rng.uniform(0, 2),
            x2=rng.uniform(-2, 2), dz1=rng.uniform(-2, 2),
            dz2=rng.uniform(-2, 2), dx2=rng.uniform(-2, 2),
        )
        m = metrics(state)
        assert m.d <= m.D <= m.delta
    # all three vanish exactly at a two-contact rest state with x2 = 0
    assert metrics(BodyState(0, 0, 0, 0, 0, 0)).delta == 0
