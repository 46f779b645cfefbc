"""Problem definition, coordinate charts and distance metrics.

The body is a planar rigid body of mass ``m`` and radius of gyration ``rho``
resting on two frictional point contacts.  The world frame is chosen with the
x axis along the contact line and the center of mass at the origin in the
reference configuration, so contact i sits at ``p_i = (l_i, -h)``.  The
support tangent ``t_i`` makes angle ``phi_i`` with the x axis and the normal
``n_i`` is ``t_i`` rotated by +90 degrees.  The external load is a force of
magnitude ``f_mag`` tilted by ``alpha`` from the downward vertical plus a
torque ``tau_ex`` about the center of mass.

Local coordinates are ``q' = (z1, z2, x2)``: the two normal gaps and the
tangential displacement of contact 2.  The chart q -> q' is valid whenever
``cos(phi1) != 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import atan, cos, sin, sqrt

import numpy as np

# tolerances used across the package (nondimensional units)
EPS_GAP = 1e-9     # |z_i| below this counts as touching
EPS_VEL = 1e-9     # velocity magnitudes below this count as zero
EPS_FORCE = 1e-8   # strictness band for mode consistency inequalities
EPS_TIME = 1e-12   # event-time coincidence window


class GeometryError(ValueError):
    """Degenerate contact geometry (coincident contacts, singular chart)."""


@dataclass(frozen=True)
class ContactConfig:
    """Full problem instance.  All angles in radians, everything else
    nondimensional (scale by m = rho = |f_ex| = 1 to match usual practice)."""

    l1: float
    l2: float
    h: float
    phi1: float
    phi2: float
    mu1: float
    mu2: float
    alpha: float = 0.0
    f_mag: float = 1.0
    tau_ex: float = 0.0
    m: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        if self.m <= 0 or self.rho <= 0:
            raise ValueError("mass and radius of gyration must be positive")
        if self.mu1 < 0 or self.mu2 < 0:
            raise ValueError("friction coefficients must be nonnegative")
        if self.f_mag < 0:
            raise ValueError("force magnitude must be nonnegative")
        if abs(self.l1 - self.l2) <= EPS_GAP:
            raise GeometryError("contact points coincide (l1 == l2)")

    def mu(self, i: int) -> float:
        return self.mu1 if i == 0 else self.mu2

    def swapped(self) -> "ContactConfig":
        """Config with the contact labels 1 and 2 exchanged."""
        return ContactConfig(
            l1=self.l2, l2=self.l1, h=self.h,
            phi1=self.phi2, phi2=self.phi1,
            mu1=self.mu2, mu2=self.mu1,
            alpha=self.alpha, f_mag=self.f_mag, tau_ex=self.tau_ex,
            m=self.m, rho=self.rho,
        )


@dataclass(frozen=True)
class BodyState:
    """Local state: gaps z1, z2, tangential offset x2 and their rates."""

    z1: float
    z2: float
    x2: float
    dz1: float
    dz2: float
    dx2: float

    @property
    def q(self) -> tuple[float, float, float]:
        return (self.z1, self.z2, self.x2)

    @property
    def dq(self) -> tuple[float, float, float]:
        return (self.dz1, self.dz2, self.dx2)


@dataclass(frozen=True)
class Metrics:
    delta: float
    d: float
    D: float


@dataclass(frozen=True)
class Frame:
    """World-frame geometry data evaluated at the reference configuration."""

    p1: np.ndarray
    p2: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    f_ex: np.ndarray

    def p(self, i: int) -> np.ndarray:
        return self.p1 if i == 0 else self.p2

    def t(self, i: int) -> np.ndarray:
        return self.t1 if i == 0 else self.t2

    def n(self, i: int) -> np.ndarray:
        return self.n1 if i == 0 else self.n2


def rot90(v) -> np.ndarray:
    """+90 degree rotation J v = (-vy, vx)."""
    return np.array([-v[1], v[0]])


def canonical_frame(config: ContactConfig) -> Frame:
    """Contact points, support directions and external force in the world
    frame.  Contact i is at (l_i, -h); the sign of l_i is read directly off
    the configuration (positive l places the contact at positive x)."""
    p1 = np.array([config.l1, -config.h])
    p2 = np.array([config.l2, -config.h])
    t1 = np.array([cos(config.phi1), sin(config.phi1)])
    t2 = np.array([cos(config.phi2), sin(config.phi2)])
    f_ex = config.f_mag * np.array([sin(config.alpha), -cos(config.alpha)])
    return Frame(p1=p1, p2=p2, t1=t1, t2=t2, n1=rot90(t1), n2=rot90(t2), f_ex=f_ex)


def _rotation(theta: float) -> np.ndarray:
    c, s = cos(theta), sin(theta)
    return np.array([[c, -s], [s, c]])


def contact_kinematics(config: ContactConfig, q, dq):
    """Tangential/normal displacement and velocity of both contact points for
    a world state q = (x, z, theta).  Exact (no small-angle approximation)."""
    frame = canonical_frame(config)
    x, z, theta = q
    dx, dz, dtheta = dq
    rc = np.array([x, z])
    drc = np.array([dx, dz])
    R = _rotation(theta)
    out = []
    for i in range(2):
        p = frame.p(i)
        r = rc + R @ p
        dr = drc + dtheta * rot90(R @ p)
        out.append((
            float((r - p) @ frame.t(i)),
            float((r - p) @ frame.n(i)),
            float(dr @ frame.t(i)),
            float(dr @ frame.n(i)),
        ))
    return out[0], out[1]


def chart_matrix(config: ContactConfig) -> np.ndarray:
    """Jacobian of (z1, z2, x2) with respect to (x, z, theta) at q = 0."""
    frame = canonical_frame(config)
    M = np.array([
        [frame.n1[0], frame.n1[1], float(rot90(frame.p1) @ frame.n1)],
        [frame.n2[0], frame.n2[1], float(rot90(frame.p2) @ frame.n2)],
        [frame.t2[0], frame.t2[1], float(rot90(frame.p2) @ frame.t2)],
    ])
    return M


def _check_chart(config: ContactConfig) -> np.ndarray:
    if abs(cos(config.phi1)) < 1e-12:
        raise GeometryError("chart singular: cos(phi1) = 0")
    M = chart_matrix(config)
    if abs(np.linalg.det(M)) < 1e-12:
        raise GeometryError("chart singular: local coordinate Jacobian not invertible")
    return M


def chart_to_local(config: ContactConfig, q, dq) -> BodyState:
    """Map a world state (q, qdot) to local coordinates.  Positions use the
    exact nonlinear kinematics, velocities the exact Jacobian at q."""
    _check_chart(config)
    (x1, z1, dx1t, dz1), (x2, z2, dx2, dz2) = contact_kinematics(config, q, dq)
    return BodyState(z1=z1, z2=z2, x2=x2, dz1=dz1, dz2=dz2, dx2=dx2)


def _chart_jacobian_at(config: ContactConfig, theta: float) -> np.ndarray:
    frame = canonical_frame(config)
    R = _rotation(theta)
    return np.array([
        [frame.n1[0], frame.n1[1], float(rot90(R @ frame.p1) @ frame.n1)],
        [frame.n2[0], frame.n2[1], float(rot90(R @ frame.p2) @ frame.n2)],
        [frame.t2[0], frame.t2[1], float(rot90(R @ frame.p2) @ frame.t2)],
    ])


def chart_from_local(config: ContactConfig, state: BodyState, linear: bool = False):
    """Invert the chart: recover the world state (q, qdot) from local
    coordinates.

    The default inverts the exact kinematics by damped Newton iteration and
    raises GeometryError for targets outside the chart's range (the exact
    chart is only a local diffeomorphism).  ``linear=True`` inverts the
    constant chart matrix instead, matching the zero-order dynamics in which
    the local coordinates are the state itself; it is defined everywhere.
    """
    M0 = _check_chart(config)
    target = np.array(state.q)
    if linear:
        q = np.linalg.solve(M0, target)
        dq = np.linalg.solve(M0, np.array(state.dq))
        return tuple(float(v) for v in q), tuple(float(v) for v in dq)

    def residual(qv):
        (x1, z1, _, _), (x2, z2, _, _) = contact_kinematics(config, qv, (0, 0, 0))
        return np.array([z1, z2, x2]) - target

    q = np.linalg.solve(M0, target)
    res = residual(q)
    for _ in range(80):
        if np.max(np.abs(res)) < 1e-13:
            break
        try:
            step = np.linalg.solve(_chart_jacobian_at(config, q[2]), res)
        except np.linalg.LinAlgError:
            raise GeometryError("chart inversion hit a fold (state outside chart radius)")
        alpha = 1.0
        for _ in range(30):
            q_new = q - alpha * step
            res_new = residual(q_new)
            if np.max(np.abs(res_new)) < np.max(np.abs(res)):
                q, res = q_new, res_new
                break
            alpha *= 0.5
        else:
            raise GeometryError("state outside chart radius; no exact world preimage")
    else:
        raise GeometryError("state outside chart radius; no exact world preimage")
    dq = np.linalg.solve(_chart_jacobian_at(config, q[2]), np.array(state.dq))
    return tuple(float(v) for v in q), tuple(float(v) for v in dq)


def metrics(state: BodyState) -> Metrics:
    """Distance metric and the two pseudometrics of a local state.

    delta mixes sqrt of positions with velocity magnitudes; d ignores the
    tangential coordinate entirely and D adds back |dx2|.  The ordering
    d <= D <= delta always holds.
    """
    if state.z1 < -EPS_GAP or state.z2 < -EPS_GAP:
        raise ValueError("negative contact gap")
    z1 = max(state.z1, 0.0)
    z2 = max(state.z2, 0.0)
    d = max(sqrt(z1), sqrt(z2), abs(state.dz1), abs(state.dz2))
    D = max(d, abs(state.dx2))
    delta = max(D, sqrt(abs(state.x2)))
    return Metrics(delta=delta, d=d, D=D)


def section_angle(dz2: float, dx2: float) -> float:
    """Angle of the pre-collision velocity of contact 2 against its normal."""
    return atan(dx2 / abs(dz2))
