"""Event-driven simulation of the zero-order hybrid dynamics.

Each contact mode is a constant-acceleration regime, so within a mode every
coordinate is an exact quadratic in time and event times (collisions, slip
stops) are closed-form roots.  Impacts hand the velocity to the impact law,
positions are continuous throughout.  The simulator also recognizes geometric
impact accumulations (converging Zeno sequences) and fast-forwards them
analytically to their double-contact limit state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import atan, inf, sqrt

from .impact import ImpactOutcome, InconsistentImpactError, resolve_impact
from .model import (
    EPS_FORCE,
    EPS_GAP,
    EPS_TIME,
    EPS_VEL,
    BodyState,
    ContactConfig,
    metrics,
)
from .modes import classify_equilibrium, consistent_modes, solve_mode, AMBIGUOUS, INFEASIBLE
from .tables import tables_for

# terminal outcomes
SS_REST = "SS_REST"
ZENO_TO_DC = "ZENO_TO_DC"
PAINLEVE_EVENT = "PAINLEVE_EVENT"
CYCLE_BUDGET_EXCEEDED = "CYCLE_BUDGET_EXCEEDED"
DIVERGED = "DIVERGED"
SECTION_REACHED = "SECTION_REACHED"  # only when a crossing budget is given

# episode end events
COLLISION_1 = "COLLISION_1"
COLLISION_2 = "COLLISION_2"
SLIP_STOP_1 = "SLIP_STOP_1"
SLIP_STOP_2 = "SLIP_STOP_2"
SLIP_REVERSAL = "SLIP_REVERSAL"
STATIC_REACHED = "STATIC_REACHED"
HORIZON = "HORIZON"
ZENO_ACCUMULATION = "ZENO_ACCUMULATION"

# Zeno detection thresholds
ZENO_WINDOW = 8
ZENO_EPS_RATIO = 1e-3
ZENO_EPS_PHI = 1e-6

_REGIME_LETTER = {"STICK": "S", "SLIP_POS": "P", "SLIP_NEG": "N"}


@dataclass(frozen=True)
class Budget:
    max_transitions: int = 10_000
    max_time: float = 1e6
    metric_bound: float | None = None  # default: 1e3 * delta(initial)


@dataclass(frozen=True)
class Episode:
    mode: str
    t_start: float
    t_end: float
    state_start: BodyState
    accel: tuple
    end_event: str


@dataclass(frozen=True)
class Crossing:
    t: float
    x2: float
    dz2: float
    dx2: float

    @property
    def phi(self) -> float:
        return atan(self.dx2 / abs(self.dz2))


@dataclass
class HybridTrajectory:
    episodes: list = field(default_factory=list)
    impacts: list = field(default_factory=list)          # (t, ImpactOutcome)
    poincare_crossings: list = field(default_factory=list)
    signature: list = field(default_factory=list)
    terminal: str = ""
    terminal_state: BodyState | None = None
    terminal_time: float = 0.0
    dashed_edges: list = field(default_factory=list)     # times of 7->5/6 moves
    zeno: bool = False
    detail: str = ""

    def signature_plain(self) -> list:
        """Signature with impact regime annotations stripped."""
        return [s.split(":")[0] for s in self.signature]


def _impact_label(outcome: ImpactOutcome) -> str:
    regs = "".join(_REGIME_LETTER[outcome.regimes[i]] for i in sorted(outcome.regimes))
    return f"{outcome.kind}:{regs}"


def _positive_roots(half_acc: float, vel: float, pos: float):
    """Real positive roots of pos + vel*t + half_acc*t^2 = 0, ascending,
    computed with a cancellation-safe quadratic formula."""
    a, b, c = half_acc, vel, pos
    if abs(a) < 1e-300:
        if abs(b) < 1e-300:
            return []
        r = -c / b
        return [r] if r > EPS_TIME else []
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sq = sqrt(disc)
    q = -0.5 * (b + sq) if b >= 0.0 else -0.5 * (b - sq)
    roots = []
    if abs(a) > 0.0:
        roots.append(q / a)
    if abs(q) > 0.0:
        roots.append(c / q)
    else:
        roots.append(0.0)
    return sorted(r for r in roots if r > EPS_TIME)


def _select_mode(config: ContactConfig, state: BodyState, allow_pseudo: bool):
    """Unique consistent mode at the state, plus an optional zero-duration
    sticking pseudo-mode when an impact landed exactly on a stick state whose
    sustained-stick mode is inconsistent (immediate transition to slippage)."""
    cons = consistent_modes(config, state)
    if not cons:
        return None, None, []
    if len(cons) > 1:
        return None, None, [m for m, _ in cons]
    mode, sol = cons[0]
    pseudo = None
    if allow_pseudo:
        tab = tables_for(config)
        slips = {0: tab.dx1_of(state.dq), 1: state.dx2}
        for i, letter in enumerate(mode):
            if letter in "PN" and abs(slips[i]) <= EPS_VEL:
                stick_mode = ("S" + mode[1]) if i == 0 else (mode[0] + "S")
                if stick_mode in tab.modes:
                    stick_sol = solve_mode(config, state, stick_mode)
                    if stick_sol.admissible and not stick_sol.consistent:
                        pseudo = stick_mode
    return (mode, sol), pseudo, []


def _zeno_ready(crossings):
    if len(crossings) < ZENO_WINDOW:
        return None
    win = crossings[-ZENO_WINDOW:]
    phis = [c.phi for c in win]
    if max(phis) - min(phis) > ZENO_EPS_PHI:
        return None
    ratios = [abs(win[k + 1].dz2) / abs(win[k].dz2) for k in range(len(win) - 1)]
    g = sum(ratios) / len(ratios)
    if g >= 1.0 - ZENO_EPS_RATIO:
        return None
    if max(abs(r - g) for r in ratios) > ZENO_EPS_RATIO * max(g, 1e-30):
        return None
    return g


def _geometric_limit(values):
    """Limit of a sequence whose increments decay geometrically; None when
    the measured increment ratio is not a contraction."""
    d1 = values[-1] - values[-2]
    d0 = values[-2] - values[-3]
    if abs(d1) < 1e-300:
        return values[-1], 0.0
    if abs(d0) < 1e-300:
        return None
    r = d1 / d0
    if not (-1.0 < r < 1.0):
        return None
    return values[-1] + d1 * r / (1.0 - r), r


def simulate(config: ContactConfig, initial: BodyState, budget: Budget = Budget(),
             _stop_at_crossing: int | None = None,
             _skip_entry_checks: bool = False) -> HybridTrajectory:
    """Run the hybrid dynamics from a contact-feasible initial state until
    rest, budget exhaustion, divergence or an inconsistency event.

    The configuration must be a feasible, non-ambiguous equilibrium with the
    contact indices normalized (contact 1 falls under free flight).
    """
    tab = tables_for(config)
    traj = HybridTrajectory()
    if not _skip_entry_checks:
        eq = classify_equilibrium(config)
        if eq.kind in (INFEASIBLE, AMBIGUOUS):
            raise ValueError(f"simulate requires a non-ambiguous equilibrium, got {eq.kind}")
        if eq.contact_swap:
            raise ValueError("contact indices not normalized; use config.swapped()")
    if initial.z1 < -EPS_GAP or initial.z2 < -EPS_GAP:
        raise ValueError("initial state penetrates a support")

    q = [max(initial.z1, 0.0), max(initial.z2, 0.0), initial.x2]
    v = [initial.dz1, initial.dz2, initial.dx2]
    t = 0.0
    m0 = metrics(initial)
    metric_bound = budget.metric_bound
    if metric_bound is None:
        metric_bound = 1e3 * m0.delta if m0.delta > 0 else inf

    def state() -> BodyState:
        return BodyState(q[0], q[1], q[2], v[0], v[1], v[2])

    def finish(terminal, detail=""):
        traj.terminal = terminal
        traj.terminal_state = state()
        traj.terminal_time = t
        traj.detail = detail
        return traj

    after_dc = False       # just left a double-contact (post-II or Zeno limit) state
    just_impacted = False  # previous step was an impact resolution
    transitions = 0
    while True:
        transitions += 1
        if transitions > budget.max_transitions:
            return finish(CYCLE_BUDGET_EXCEEDED, "transition budget exhausted")
        if metrics(state()).delta > metric_bound:
            return finish(DIVERGED, "metric bound exceeded")

        # pending collision at the current state?
        touching = (q[0] <= EPS_GAP, q[1] <= EPS_GAP)
        if (touching[0] and v[0] < -EPS_VEL) or (touching[1] and v[1] < -EPS_VEL):
            pre = state()
            if touching[0] and touching[1] and abs(v[0]) <= EPS_VEL and v[1] < -EPS_VEL:
                traj.poincare_crossings.append(Crossing(t, q[2], v[1], v[2]))
                if _stop_at_crossing is not None and \
                        len(traj.poincare_crossings) >= _stop_at_crossing:
                    return finish(SECTION_REACHED)
                g = _zeno_ready(traj.poincare_crossings)
                if g is not None:
                    ok = _fast_forward(traj, q, v, t)
                    if ok is not None:
                        t = ok
                        after_dc = True
                        continue
            try:
                outcome = resolve_impact(config, pre)
            except InconsistentImpactError:
                return finish(PAINLEVE_EVENT, "no admissible impact hypothesis")
            traj.impacts.append((t, outcome))
            traj.signature.append(_impact_label(outcome))
            v[0], v[1], v[2] = outcome.post_velocity
            after_dc = outcome.kind == "II"
            just_impacted = True
            continue

        # full rest on both contacts = static equilibrium (feasibility is an
        # entry precondition, so SS is consistent here)
        at_rest = (abs(v[0]) <= EPS_VEL and abs(v[1]) <= EPS_VEL
                   and abs(v[2]) <= EPS_VEL and abs(tab.dx1_of(v)) <= EPS_VEL)
        if at_rest and touching[0] and touching[1]:
            traj.signature.append("SS")
            if traj.episodes and traj.episodes[-1].end_event.startswith("SLIP_STOP"):
                last = traj.episodes[-1]
                traj.episodes[-1] = Episode(last.mode, last.t_start, last.t_end,
                                            last.state_start, last.accel, STATIC_REACHED)
            return finish(SS_REST)

        selected, pseudo, clash = _select_mode(config, state(), just_impacted)
        just_impacted = False
        if clash:
            return finish(PAINLEVE_EVENT, f"dynamical indeterminacy: {clash}")
        if selected is None:
            return finish(PAINLEVE_EVENT, "no consistent contact mode")
        mode, sol = selected
        if after_dc and "F" in mode:
            traj.dashed_edges.append(t)
        after_dc = False
        if traj.episodes:
            last = traj.episodes[-1]
            if last.end_event in (SLIP_STOP_1, SLIP_STOP_2):
                i = 0 if last.end_event == SLIP_STOP_1 else 1
                if mode[i] in "PN" and last.mode[i] in "PN" and mode[i] != last.mode[i]:
                    traj.episodes[-1] = Episode(last.mode, last.t_start, last.t_end,
                                                last.state_start, last.accel, SLIP_REVERSAL)
        if pseudo is not None:
            traj.signature.append(pseudo)
            traj.episodes.append(Episode(pseudo, t, t, state(), (0.0, 0.0, 0.0), SLIP_REVERSAL))
        traj.signature.append(mode)
        acc = sol.acc_local

        # project coordinates of constrained contacts to the contact surface
        for i, letter in enumerate(mode):
            if letter != "F":
                q[i] = 0.0
                v[i] = 0.0

        # event search: collisions of free contacts, slip stops of slipping ones
        events = []
        for i, letter in enumerate(mode):
            if letter == "F":
                for r in _positive_roots(0.5 * acc[i], v[i], q[i]):
                    if v[i] + acc[i] * r < 0.0:
                        events.append((r, 0, i))
                        break
            elif letter in "PN":
                dx = tab.dx1_of(v) if i == 0 else v[2]
                xdd = sol.xdd[i]
                if abs(xdd) > 1e-300:
                    ts = -dx / xdd
                    if ts > EPS_TIME:
                        events.append((ts, 1, i))
        start = state()
        if not events:
            # constant-velocity or receding motion: run to the horizon
            te = budget.max_time - t
            _advance(q, v, acc, te, mode)
            traj.episodes.append(Episode(mode, t, budget.max_time, start, acc, HORIZON))
            t = budget.max_time
            return finish(CYCLE_BUDGET_EXCEEDED, "time horizon reached without events")
        events.sort(key=lambda e: (e[0], e[1], e[2]))
        te, etype, ei = events[0]
        if t + te > budget.max_time:
            te = budget.max_time - t
            _advance(q, v, acc, te, mode)
            traj.episodes.append(Episode(mode, t, budget.max_time, start, acc, HORIZON))
            t = budget.max_time
            return finish(CYCLE_BUDGET_EXCEEDED, "time horizon reached")
        _advance(q, v, acc, te, mode)
        t += te
        if etype == 0:
            q[ei] = 0.0
            # coincident collision of the other free contact
            for j in range(2):
                if j != ei and mode[j] == "F" and abs(q[j]) <= EPS_TIME:
                    q[j] = 0.0
            end = COLLISION_1 if ei == 0 else COLLISION_2
        else:
            if ei == 1:
                v[2] = 0.0
            end = SLIP_STOP_1 if ei == 0 else SLIP_STOP_2
        traj.episodes.append(Episode(mode, t - te, t, start, acc, end))


def _advance(q, v, acc, te, mode):
    for i in range(3):
        q[i] += v[i] * te + 0.5 * acc[i] * te * te
        v[i] += acc[i] * te
    for i in range(2):
        if mode[i] != "F":
            q[i] = 0.0
            v[i] = 0.0
        elif -1e-12 < q[i] < 0.0:
            q[i] = 0.0


def _fast_forward(traj: HybridTrajectory, q, v, t):
    """Analytic fast-forward of a converging impact accumulation.

    The last crossings decay geometrically, so the remaining time, tangential
    drift and slip velocity are geometric sums with empirically measured
    ratios.  Jumps the state to the double-contact limit and returns the
    accumulation time, or None when any measured ratio fails to contract.
    """
    win = traj.poincare_crossings[-ZENO_WINDOW:]
    times = [c.t for c in win]
    gaps = [times[k + 1] - times[k] for k in range(len(times) - 1)]
    if gaps[-2] <= 0:
        return None
    gt = gaps[-1] / gaps[-2]
    if not (0.0 <= gt < 1.0):
        return None
    t_limit = times[-1] + gaps[-1] * gt / (1.0 - gt)
    x2_lim = _geometric_limit([c.x2 for c in win])
    dx2_lim = _geometric_limit([c.dx2 for c in win])
    if x2_lim is None or dx2_lim is None:
        return None
    state_before = BodyState(q[0], q[1], q[2], v[0], v[1], v[2])
    q[0] = q[1] = 0.0
    q[2] = x2_lim[0]
    v[0] = v[1] = 0.0
    v[2] = dx2_lim[0]
    traj.zeno = True
    traj.episodes.append(Episode("ZENO", t, t_limit, state_before, (0.0, 0.0, 0.0),
                                 ZENO_ACCUMULATION))
    traj.signature.append("ZENO")
    return t_limit


def trajectory_rows(traj: HybridTrajectory):
    """CSV rows (t, z1, z2, x2, dz1, dz2, dx2, mode, event): one per episode
    endpoint and one per impact."""
    rows = []
    for ep in traj.episodes:
        s = ep.state_start
        rows.append((ep.t_start, s.z1, s.z2, s.x2, s.dz1, s.dz2, s.dx2, ep.mode, "start"))
        te = ep.t_end - ep.t_start
        q = [s.z1 + s.dz1 * te + 0.5 * ep.accel[0] * te * te,
             s.z2 + s.dz2 * te + 0.5 * ep.accel[1] * te * te,
             s.x2 + s.dx2 * te + 0.5 * ep.accel[2] * te * te]
        dv = [s.dz1 + ep.accel[0] * te, s.dz2 + ep.accel[1] * te, s.dx2 + ep.accel[2] * te]
        rows.append((ep.t_end, q[0], q[1], q[2], dv[0], dv[1], dv[2], ep.mode, ep.end_event))
    for t, outcome in traj.impacts:
        dz1, dz2, dx2 = outcome.post_velocity
        rows.append((t, None, None, None, dz1, dz2, dx2, outcome.kind or "NONE", "impact"))
    rows.sort(key=lambda r: r[0])
    if traj.terminal_state is not None:
        s = traj.terminal_state
        rows.append((traj.terminal_time, s.z1, s.z2, s.x2, s.dz1, s.dz2, s.dx2,
                     traj.terminal, "terminal"))
    return rows
