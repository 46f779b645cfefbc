"""Reduced return map R and growth map G on the two-contact impact section.

The section collects pre-impact states where contact 1 is sustained and
contact 2 collides.  Scaling and tangential-offset invariance reduce the
section to the single angle phi of the incoming contact-2 velocity, so one
cycle of the hybrid flow from a normalized section state yields the angle
return R(phi) and the normal-velocity growth ratio G(phi).  Both maps may be
undefined where the flow reaches static rest without re-crossing the section.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from math import cos, pi, sin

from .hybrid import (
    Budget,
    CYCLE_BUDGET_EXCEEDED,
    PAINLEVE_EVENT,
    SECTION_REACHED,
    SS_REST,
    ZENO_TO_DC,
    simulate,
)
from .model import BodyState, ContactConfig
from .svgplot import SvgCanvas

OK = "OK"
UNDEFINED = "UNDEFINED"        # finite path to rest, no re-crossing
ERROR = "ERROR"                # paradox or budget inside the cycle
DASHED_EDGE = "DASHED_EDGE"    # budget ran out on a separation-after-DC path

_CYCLE_BUDGET = Budget(max_transitions=400, max_time=1e9, metric_bound=float("inf"))

# shrinking offsets used to probe the endpoint limits of G
_ENDPOINT_OFFSETS = (1e-3, 1e-4, 1e-5, 1e-6)
_ENDPOINT_RTOL = 1e-6


@dataclass(frozen=True)
class CycleOutcome:
    status: str
    R: float | None = None
    G: float | None = None
    signature: tuple = ()
    dashed: bool = False
    reason: str = ""

    @property
    def defined(self) -> bool:
        return self.status == OK


@dataclass(frozen=True)
class MapSample:
    phi: float
    outcome: CycleOutcome


@dataclass
class ReducedMaps:
    config: ContactConfig
    samples: list
    breakpoints: list            # refined phi values where the cycle class changes
    g_plus: float | None
    g_minus: float | None
    plateau_minus: float | None  # inner end of the measured constant-G run at -pi/2
    plateau_plus: float | None   # inner end of the measured constant-G run at +pi/2
    evaluator: object = None     # phi -> CycleOutcome, for refinement passes

    def defined_samples(self):
        return [s for s in self.samples if s.outcome.defined]


def cycle(config: ContactConfig, phi: float, x2: float = 0.0, beta: float = 1.0) -> CycleOutcome:
    """One return-map cycle from the normalized section state at angle phi.

    The section state is x2 offset, unit-speed incoming velocity
    (dz2 = -beta cos phi, dx2 = beta sin phi) with contact 1 resting.
    """
    if not -pi / 2 < phi < pi / 2:
        raise ValueError("phi must lie in (-pi/2, pi/2)")
    start = BodyState(0.0, 0.0, x2, 0.0, -beta * cos(phi), beta * sin(phi))
    traj = simulate(config, start, _CYCLE_BUDGET,
                    _stop_at_crossing=2, _skip_entry_checks=True)
    signature = tuple(traj.signature)
    dashed = bool(traj.dashed_edges)
    if traj.terminal == SECTION_REACHED and len(traj.poincare_crossings) >= 2:
        c0, c1 = traj.poincare_crossings[0], traj.poincare_crossings[1]
        return CycleOutcome(status=OK, R=c1.phi, G=abs(c1.dz2) / abs(c0.dz2),
                            signature=signature, dashed=dashed)
    if traj.terminal in (SS_REST, ZENO_TO_DC):
        return CycleOutcome(status=UNDEFINED, signature=signature, dashed=dashed)
    if traj.terminal == CYCLE_BUDGET_EXCEEDED and dashed:
        return CycleOutcome(status=DASHED_EDGE, signature=signature, dashed=True,
                            reason=traj.detail)
    if traj.terminal == PAINLEVE_EVENT:
        return CycleOutcome(status=ERROR, signature=signature, dashed=dashed,
                            reason=f"paradox: {traj.detail}")
    return CycleOutcome(status=ERROR, signature=signature, dashed=dashed,
                        reason=f"{traj.terminal}: {traj.detail}")


def _class_key(outcome: CycleOutcome):
    """Samples with the same key belong to one smooth piece of the maps."""
    return (outcome.status, outcome.signature)


def _estimate_endpoint(eval_fn, sign: int):
    """Limit of G at an endpoint, probed at shrinking offsets; None unless
    all probes are defined and agree to the relative tolerance."""
    values = []
    for off in _ENDPOINT_OFFSETS:
        out = eval_fn(sign * (pi / 2 - off))
        if not out.defined:
            return None
        values.append(out.G)
    ref = values[-1]
    if ref <= 0:
        return None
    if max(abs(v - ref) for v in values) > _ENDPOINT_RTOL * abs(ref):
        return None
    return ref


def _measure_plateau(samples, g_limit, side: str):
    """Innermost phi of the contiguous sampled run adjacent to an endpoint on
    which G stays at its endpoint value (relative tolerance)."""
    if g_limit is None:
        return None
    ordered = samples if side == "plus" else list(reversed(samples))
    edge = None
    for s in reversed(ordered):  # from the endpoint inward
        if not s.outcome.defined:
            break
        if abs(s.outcome.G - g_limit) > 1e-6 * abs(g_limit):
            break
        edge = s.phi
    return edge


def sample_maps(config: ContactConfig, n_uniform: int = 2001,
                refine_depth: int = 40) -> ReducedMaps:
    """Sample R and G on a uniform interior grid, refine every breakpoint by
    bisection, and probe the endpoint limits of G."""
    if n_uniform < 2:
        raise ValueError("need at least two grid points")
    step = pi / (n_uniform + 1)
    phis = [-pi / 2 + step * (k + 1) for k in range(n_uniform)]
    eval_fn = lambda p: cycle(config, p)
    samples = [MapSample(p, eval_fn(p)) for p in phis]

    breakpoints = []
    for k in range(len(samples) - 1):
        left, right = samples[k], samples[k + 1]
        if _class_key(left.outcome) == _class_key(right.outcome):
            continue
        lo, hi = left.phi, right.phi
        lo_key = _class_key(left.outcome)
        for _ in range(refine_depth):
            mid = 0.5 * (lo + hi)
            if _class_key(eval_fn(mid)) == lo_key:
                lo = mid
            else:
                hi = mid
        breakpoints.append(0.5 * (lo + hi))

    g_plus = _estimate_endpoint(eval_fn, +1)
    g_minus = _estimate_endpoint(eval_fn, -1)
    return ReducedMaps(
        config=config, samples=samples, breakpoints=breakpoints,
        g_plus=g_plus, g_minus=g_minus,
        plateau_minus=_measure_plateau(samples, g_minus, "minus"),
        plateau_plus=_measure_plateau(samples, g_plus, "plus"),
        evaluator=eval_fn,
    )


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def maps_csv(maps: ReducedMaps) -> str:
    out = io.StringIO()
    out.write("phi,R,G,defined,signature\n")
    for s in maps.samples:
        o = s.outcome
        defined = 1 if o.defined else 0
        sig = "->".join(o.signature) if o.signature else o.status
        out.write(f"{_fmt(s.phi)},{_fmt(o.R)},{_fmt(o.G)},{defined},{sig}\n")
    return out.getvalue()


def maps_svg(maps: ReducedMaps, width: int = 900, height: int = 640) -> str:
    """Two stacked panels: R over phi (with the identity diagonal) and G over
    phi (with the unit level), undefined stretches left blank and breakpoints
    marked with vertical ticks."""
    cv = SvgCanvas(width, height)
    half = height // 2
    lim = pi / 2
    defined = maps.defined_samples()
    g_max = max([s.outcome.G for s in defined], default=1.0)
    panels = [
        ("R(phi)", lambda o: o.R, (-lim, lim), 0),
        ("G(phi)", lambda o: o.G, (0.0, max(1.2, 1.1 * g_max)), half),
    ]
    for label, get, (y0, y1), top in panels:
        ax = cv.axes(40, top + 20, width - 60, half - 50, (-lim, lim), (y0, y1))
        ax.frame(label)
        if label.startswith("R"):
            ax.line(-lim, -lim, lim, lim, stroke="#bbbbbb", dash="4,3")
        else:
            ax.line(-lim, 1.0, lim, 1.0, stroke="#bbbbbb", dash="4,3")
        run = []
        for s in maps.samples:
            if s.outcome.defined:
                run.append((s.phi, get(s.outcome)))
            elif run:
                ax.polyline(run, stroke="#1f5fbf")
                run = []
        if run:
            ax.polyline(run, stroke="#1f5fbf")
        for b in maps.breakpoints:
            ax.vtick(b, stroke="#cc4444")
    return cv.render()
