"""Precomputed zero-order dynamics data for one configuration.

Under the zero-order approximation every contact mode has state-independent
accelerations and forces, and every impact hypothesis is a fixed linear map
on velocities.  Solving those small linear systems once per configuration
makes trajectory and map evaluation cheap: the event-driven simulator then
runs on plain floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import cos

import numpy as np

from .model import ContactConfig, canonical_frame, chart_matrix, rot90, GeometryError

MODE_LETTERS = "FSPN"

# impact regimes per active contact
STICK = "STICK"
SLIP_POS = "SLIP_POS"
SLIP_NEG = "SLIP_NEG"
REGIMES = (STICK, SLIP_POS, SLIP_NEG)

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ModeData:
    """ZOD solution of one contact mode: world accelerations, contact forces
    and the derived per-contact acceleration/force components."""

    mode: str
    singular: bool
    acc_world: tuple        # (ax, az, atheta)
    acc_local: tuple        # (z1dd, z2dd, x2dd)
    f1: tuple
    f2: tuple
    zdd: tuple              # normal accelerations of both contacts
    xdd: tuple              # tangential accelerations of both contacts
    fn: tuple               # f_i . n_i
    ft: tuple               # f_i . t_i
    x1dd: float             # tangential acceleration of contact 1


@dataclass(frozen=True)
class ImpactData:
    """One impact hypothesis: which contacts receive impulse and in which
    regime, the post-velocity map and impulse extraction in local coordinates."""

    contacts: tuple          # active contact indices, e.g. (1,) or (0, 1)
    regimes: tuple           # regime per active contact
    singular: bool
    B: tuple                 # 3x3 rows: v_local_plus = B @ v_local_minus
    impulse_rows: dict       # contact index -> 2x3 rows giving world impulse


class ZodTables:
    """All per-configuration constants used by the simulator."""

    def __init__(self, config: ContactConfig):
        self.config = config
        frame = canonical_frame(config)
        self.frame = frame
        self.p = (frame.p1, frame.p2)
        self.t = (frame.t1, frame.t2)
        self.n = (frame.n1, frame.n2)
        self.mu = (config.mu1, config.mu2)
        M = chart_matrix(config)
        if abs(cos(config.phi1)) < 1e-12 or abs(np.linalg.det(M)) < 1e-12:
            raise GeometryError("chart singular for this geometry")
        self.M = M
        self.Minv = np.linalg.inv(M)
        # row extracting x1 / dx1 from local coordinates (ZOD-linear chart)
        x1_row = np.array([frame.t1[0], frame.t1[1], float(rot90(frame.p1) @ frame.t1)])
        self.w1 = tuple(float(v) for v in (x1_row @ self.Minv))
        # kinetic energy quadratic form in local velocity coordinates
        mass = np.diag([config.m, config.m, config.m * config.rho ** 2])
        self.energy_form = self.Minv.T @ mass @ self.Minv
        self.modes = {m: self._solve_mode(m) for m in self.feasible_modes()}
        self.arrest = self._arrest_family()
        self.impacts = self._build_impacts()

    # -- mode enumeration ------------------------------------------------

    def two_slip_pair(self) -> tuple:
        c = cos(self.config.phi1) * cos(self.config.phi2)
        if abs(c) < 1e-12:
            raise GeometryError("cos(phi1)*cos(phi2) = 0: two-slip mode pair undefined")
        return ("PP", "NN") if c > 0 else ("PN", "NP")

    def feasible_modes(self) -> list:
        """Kinematically feasible modes, static first, fewest free contacts
        first, stick before slip within a group."""
        pp, nn = self.two_slip_pair()
        return ["SS", pp, nn, "SF", "FS", "PF", "NF", "FP", "FN", "FF"]

    # -- mode dynamics ---------------------------------------------------

    def _mode_rows(self, A, b, i, letter, fcol):
        """Append the two equality constraints contributed by contact i."""
        rows = []
        p, t, n = self.p[i], self.t[i], self.n[i]
        jp = rot90(p)
        if letter == "F":
            r = np.zeros(7); r[fcol] = 1.0
            rows.append((r, 0.0))
            r = np.zeros(7); r[fcol + 1] = 1.0
            rows.append((r, 0.0))
        else:
            r = np.zeros(7)
            r[0], r[1], r[2] = n[0], n[1], float(jp @ n)
            rows.append((r, 0.0))             # normal acceleration zero
            if letter == "S":
                r = np.zeros(7)
                r[0], r[1], r[2] = t[0], t[1], float(jp @ t)
                rows.append((r, 0.0))         # tangential acceleration zero
            else:
                sgn = 1.0 if letter == "P" else -1.0
                r = np.zeros(7)
                r[fcol] = t[0] + sgn * self.mu[i] * n[0]
                r[fcol + 1] = t[1] + sgn * self.mu[i] * n[1]
                rows.append((r, 0.0))         # force on the friction cone edge
        for r, rhs in rows:
            A.append(r); b.append(rhs)

    def _solve_mode(self, mode: str) -> ModeData:
        cfg = self.config
        fex = self.frame.f_ex
        A, b = [], []
        r = np.zeros(7); r[0] = cfg.m; r[3] = -1.0; r[5] = -1.0
        A.append(r); b.append(fex[0])
        r = np.zeros(7); r[1] = cfg.m; r[4] = -1.0; r[6] = -1.0
        A.append(r); b.append(fex[1])
        r = np.zeros(7)
        r[2] = cfg.m * cfg.rho ** 2
        r[3], r[4] = self.p[0][1], -self.p[0][0]
        r[5], r[6] = self.p[1][1], -self.p[1][0]
        A.append(r); b.append(cfg.tau_ex)
        for i, letter in enumerate(mode):
            self._mode_rows(A, b, i, letter, 3 + 2 * i)
        A = np.array(A); b = np.array(b)
        singular = False
        try:
            if np.linalg.cond(A) > _COND_LIMIT:
                singular = True
                u = np.full(7, np.nan)
            else:
                u = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            singular = True
            u = np.full(7, np.nan)
        acc = u[:3]
        f = (u[3:5], u[5:7])
        zdd, xdd, fn, ft = [], [], [], []
        for i in range(2):
            ri = acc[:2] + acc[2] * rot90(self.p[i])
            zdd.append(float(ri @ self.n[i]))
            xdd.append(float(ri @ self.t[i]))
            fn.append(float(f[i] @ self.n[i]))
            ft.append(float(f[i] @ self.t[i]))
        acc_local = self.M @ acc
        return ModeData(
            mode=mode, singular=singular,
            acc_world=tuple(float(v) for v in acc),
            acc_local=tuple(float(v) for v in acc_local),
            f1=tuple(float(v) for v in f[0]), f2=tuple(float(v) for v in f[1]),
            zdd=tuple(zdd), xdd=tuple(xdd), fn=tuple(fn), ft=tuple(ft),
            x1dd=xdd[0],
        )

    # -- impact hypotheses -----------------------------------------------

    def _impact_system(self, hyp):
        """Rows of the impulse-momentum system for a fixed regime hypothesis.
        Unknowns: post world velocity (3) then one impulse per active contact."""
        cfg = self.config
        nimp = len(hyp)
        N = 3 + 2 * nimp
        A = np.zeros((N, N))
        A[0, 0] = cfg.m
        A[1, 1] = cfg.m
        A[2, 2] = cfg.m * cfg.rho ** 2
        for k, (i, _) in enumerate(hyp):
            c = 3 + 2 * k
            A[0, c] = -1.0
            A[1, c + 1] = -1.0
            A[2, c] = self.p[i][1]
            A[2, c + 1] = -self.p[i][0]
        row = 3
        for k, (i, regime) in enumerate(hyp):
            c = 3 + 2 * k
            p, t, n = self.p[i], self.t[i], self.n[i]
            jp = rot90(p)
            A[row, 0], A[row, 1], A[row, 2] = n[0], n[1], float(jp @ n)
            row += 1
            if regime == STICK:
                A[row, 0], A[row, 1], A[row, 2] = t[0], t[1], float(jp @ t)
            else:
                sgn = 1.0 if regime == SLIP_POS else -1.0
                A[row, c] = t[0] + sgn * self.mu[i] * n[0]
                A[row, c + 1] = t[1] + sgn * self.mu[i] * n[1]
            row += 1
        return A

    def _arrest_family(self):
        """Impulse pairs producing full arrest: particular solution (linear in
        the local pre-velocity) plus the 1-D null direction of the momentum
        system.  The double-stick impact is statically indeterminate, so its
        acceptance is a cone-feasibility question over this family."""
        cfg = self.config
        A = np.array([
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
            [self.p[0][1], -self.p[0][0], self.p[1][1], -self.p[1][0]],
        ])
        S = np.diag([-cfg.m, -cfg.m, cfg.m * cfg.rho ** 2])
        # momentum: f1 + f2 = -m * v_minus ; p1^T J f1 + p2^T J f2 = m rho^2 w_minus
        P = np.linalg.pinv(A) @ S @ self.Minv
        null = np.linalg.svd(A)[2][-1]
        return (tuple(tuple(float(v) for v in row) for row in P),
                tuple(float(v) for v in null))

    def _impact_data(self, hyp) -> ImpactData:
        nimp = len(hyp)
        if len(hyp) == 2 and all(r == STICK for _, r in hyp):
            zero = ((0.0, 0.0, 0.0),) * 3
            return ImpactData(contacts=(0, 1), regimes=(STICK, STICK),
                              singular=False, B=zero, impulse_rows={})
        A = self._impact_system(hyp)
        singular = False
        try:
            if np.linalg.cond(A) > _COND_LIMIT:
                singular = True
        except np.linalg.LinAlgError:
            singular = True
        if singular:
            nan3 = ((np.nan,) * 3,) * 3
            return ImpactData(
                contacts=tuple(i for i, _ in hyp),
                regimes=tuple(r for _, r in hyp),
                singular=True, B=nan3, impulse_rows={},
            )
        cfg = self.config
        mass = np.array([cfg.m, cfg.m, cfg.m * cfg.rho ** 2])
        # momentum rows have rhs mass * v_world_minus; solve per basis vector
        Bw = np.zeros((3, 3))
        imp = {i: np.zeros((2, 3)) for i, _ in hyp}
        lu = np.linalg.inv(A)
        for k in range(3):
            b = np.zeros(A.shape[0])
            b[k] = mass[k]
            u = lu @ b
            Bw[:, k] = u[:3]
            for kk, (i, _) in enumerate(hyp):
                imp[i][:, k] = u[3 + 2 * kk:5 + 2 * kk]
        # convert to local velocity coordinates
        B = self.M @ Bw @ self.Minv
        impulse_rows = {i: tuple(tuple(float(v) for v in row) for row in (imp[i] @ self.Minv))
                        for i, _ in hyp}
        return ImpactData(
            contacts=tuple(i for i, _ in hyp),
            regimes=tuple(r for _, r in hyp),
            singular=False,
            B=tuple(tuple(float(v) for v in row) for row in B),
            impulse_rows=impulse_rows,
        )

    def _build_impacts(self) -> dict:
        out = {}
        for i in range(2):
            for regime in REGIMES:
                hyp = ((i, regime),)
                out[hyp] = self._impact_data(hyp)
        for r1 in REGIMES:
            for r2 in REGIMES:
                hyp = ((0, r1), (1, r2))
                out[hyp] = self._impact_data(hyp)
        return out

    # -- per-state helpers (hot path, plain floats) ------------------------

    def x1_of(self, q) -> float:
        w = self.w1
        return w[0] * q[0] + w[1] * q[1] + w[2] * q[2]

    def dx1_of(self, dq) -> float:
        w = self.w1
        return w[0] * dq[0] + w[1] * dq[1] + w[2] * dq[2]

    def kinetic_energy(self, dq) -> float:
        v = np.array(dq)
        return 0.5 * float(v @ self.energy_form @ v)


@lru_cache(maxsize=2048)
def tables_for(config: ContactConfig) -> ZodTables:
    return ZodTables(config)
