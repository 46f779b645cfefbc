"""Inelastic frictional impact resolution.

A collision at a contact (gap zero, approaching) produces impulsive contact
forces that jump the velocities while positions stay put.  The law is fully
inelastic (post-impact normal velocity zero at impulsed contacts) with
Coulomb-bounded tangential impulse.  Candidate solutions are enumerated over
a fixed hypothesis list -- single-contact impact before two-contact impact,
sticking before slipping -- and the first hypothesis whose solved impulses
and post-velocities satisfy all inequality conditions wins.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import EPS_FORCE, EPS_GAP, EPS_VEL, BodyState, ContactConfig
from .tables import REGIMES, SLIP_NEG, SLIP_POS, STICK, ZodTables, tables_for


class InconsistentImpactError(RuntimeError):
    """No impact hypothesis satisfies the impulse and velocity conditions."""


@dataclass(frozen=True)
class ImpactOutcome:
    post_velocity: tuple       # (dz1, dz2, dx2) after the impact
    kind: str | None           # "IF", "FI", "II" or None for a no-op
    regimes: dict              # contact index -> regime for impulsed contacts
    impulses: tuple            # world impulse vectors (f1hat, f2hat)
    marginal: bool = False

    def apply(self, state: BodyState) -> BodyState:
        dz1, dz2, dx2 = self.post_velocity
        return BodyState(state.z1, state.z2, state.x2, dz1, dz2, dx2)


# two-contact regime hypotheses: sticking combinations first
_II_ORDER = [
    (STICK, STICK),
    (STICK, SLIP_POS), (STICK, SLIP_NEG),
    (SLIP_POS, STICK), (SLIP_NEG, STICK),
    (SLIP_POS, SLIP_POS), (SLIP_POS, SLIP_NEG),
    (SLIP_NEG, SLIP_POS), (SLIP_NEG, SLIP_NEG),
]


def _apply_map(B, v):
    return (
        B[0][0] * v[0] + B[0][1] * v[1] + B[0][2] * v[2],
        B[1][0] * v[0] + B[1][1] * v[1] + B[1][2] * v[2],
        B[2][0] * v[0] + B[2][1] * v[1] + B[2][2] * v[2],
    )


def _arrest_feasible(tab: ZodTables, v_minus):
    """Double-stick impact: impulses are statically indeterminate, so accept
    when some impulse pair along the arrest family lies in both friction
    cones.  Returns the mid-segment witness impulses or None."""
    P, null = tab.arrest
    part = [sum(P[r][c] * v_minus[c] for c in range(3)) for r in range(4)]
    lo, hi = -float("inf"), float("inf")
    for i in range(2):
        n, t, mu = tab.n[i], tab.t[i], tab.mu[i]
        fp = (part[2 * i], part[2 * i + 1])
        fnv = (null[2 * i], null[2 * i + 1])
        for vec in ((mu * n[0] - t[0], mu * n[1] - t[1]),
                    (mu * n[0] + t[0], mu * n[1] + t[1]),
                    (n[0], n[1])):
            c = vec[0] * fp[0] + vec[1] * fp[1]
            a = vec[0] * fnv[0] + vec[1] * fnv[1]
            if abs(a) < 1e-15:
                if c < -EPS_FORCE:
                    return None
            elif a > 0:
                lo = max(lo, -c / a)
            else:
                hi = min(hi, -c / a)
    if lo > hi + EPS_FORCE:
        return None
    if lo == -float("inf") and hi == float("inf"):
        s = 0.0
    elif lo == -float("inf"):
        s = hi - 1.0
    elif hi == float("inf"):
        s = lo + 1.0
    else:
        s = 0.5 * (lo + hi)
    f = [part[r] + s * null[r] for r in range(4)]
    return ((f[0], f[1]), (f[2], f[3]))


def _check_hypothesis(tab: ZodTables, hyp, v_minus, touching):
    """Solve one hypothesis and test its inequalities.

    Returns (post_velocity_local, impulses_world, marginal) or None if the
    hypothesis is rejected.
    """
    if len(hyp) == 2 and hyp[0][1] == STICK and hyp[1][1] == STICK:
        impulses = _arrest_feasible(tab, v_minus)
        if impulses is None:
            return None
        return (0.0, 0.0, 0.0), impulses, False
    data = tab.impacts[hyp]
    if data.singular:
        return None
    v_plus = _apply_map(data.B, v_minus)
    impulses = [(0.0, 0.0), (0.0, 0.0)]
    marginal = False
    double = len(hyp) == 2
    for i, regime in hyp:
        rows = data.impulse_rows[i]
        f = (
            rows[0][0] * v_minus[0] + rows[0][1] * v_minus[1] + rows[0][2] * v_minus[2],
            rows[1][0] * v_minus[0] + rows[1][1] * v_minus[1] + rows[1][2] * v_minus[2],
        )
        impulses[i] = f
        n, t, mu = tab.n[i], tab.t[i], tab.mu[i]
        fn = f[0] * n[0] + f[1] * n[1]
        ft = f[0] * t[0] + f[1] * t[1]
        if fn < -EPS_FORCE:
            return None
        dx_plus = tab.dx1_of(v_plus) if i == 0 else v_plus[2]
        if regime == STICK:
            cone = mu * fn - abs(ft)
            if cone < -EPS_FORCE:
                return None
            marginal = marginal or abs(cone) <= EPS_FORCE
        else:
            # Single impacts defer an exactly-zero post-slip velocity to the
            # stick hypothesis.  Double impacts accept it: the impulse pair is
            # statically indeterminate, so arrest may only be reachable with a
            # cone-edge impulse even when the pure stick impulse is rejected.
            sign = 1.0 if regime == SLIP_POS else -1.0
            if double:
                if sign * dx_plus < -EPS_VEL:
                    return None
            else:
                if sign * dx_plus <= EPS_VEL:
                    return None
    # passive touching contact must not be driven into its support
    for j in range(2):
        if touching[j] and j not in dict(hyp):
            dz_plus = v_plus[j]
            if dz_plus < -EPS_VEL:
                return None
    return v_plus, tuple(impulses), marginal


def resolve_impact(config: ContactConfig, pre_state: BodyState) -> ImpactOutcome:
    """Resolve the impact at the given pre-impact state.

    At least one contact should be touching and approaching; a state with no
    approaching contact returns a zero-impulse no-op.  Raises
    InconsistentImpactError when no hypothesis is admissible, which callers
    must surface as an inconsistency (paradox) event.
    """
    tab = tables_for(config)
    v_minus = (pre_state.dz1, pre_state.dz2, pre_state.dx2)
    touching = (pre_state.z1 <= EPS_GAP, pre_state.z2 <= EPS_GAP)
    colliding = (
        touching[0] and v_minus[0] < -EPS_VEL,
        touching[1] and v_minus[1] < -EPS_VEL,
    )
    hypotheses = []
    if colliding[0] and colliding[1]:
        # simultaneous two-contact collision: nongeneric, handled as II
        hypotheses = [((0, r1), (1, r2)) for r1, r2 in _II_ORDER]
    elif colliding[0] or colliding[1]:
        i = 0 if colliding[0] else 1
        hypotheses = [((i, regime),) for regime in REGIMES]
        if touching[1 - i]:
            hypotheses += [((0, r1), (1, r2)) for r1, r2 in _II_ORDER]
    else:
        return ImpactOutcome(
            post_velocity=v_minus, kind=None, regimes={}, impulses=((0.0, 0.0), (0.0, 0.0)),
        )
    for hyp in hypotheses:
        result = _check_hypothesis(tab, hyp, v_minus, touching)
        if result is None:
            continue
        v_plus, impulses, marginal = result
        # snap the normal velocities of impulsed contacts to exactly zero
        v_plus = list(v_plus)
        regimes = dict(hyp)
        for i in regimes:
            v_plus[i] = 0.0
            if regimes[i] == STICK and i == 1:
                v_plus[2] = 0.0
        if len(regimes) == 2:
            kind = "II"
        else:
            kind = "IF" if 0 in regimes else "FI"
        return ImpactOutcome(
            post_velocity=tuple(v_plus), kind=kind, regimes=regimes,
            impulses=impulses, marginal=marginal,
        )
    raise InconsistentImpactError("no admissible impact hypothesis")


def impact_matrix(config: ContactConfig, hypothesis) -> tuple:
    """Linear map on local velocities for a fixed regime hypothesis.

    ``hypothesis`` is a tuple of (contact_index, regime) pairs; the empty
    tuple is the no-impulse identity.  Whenever resolve_impact selects this
    hypothesis, its post velocity equals this matrix applied to the
    pre-impact velocity.
    """
    if not hypothesis:
        return ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    tab = tables_for(config)
    key = tuple(hypothesis)
    if key not in tab.impacts:
        raise ValueError(f"unknown impact hypothesis {hypothesis!r}")
    return tab.impacts[key].B
