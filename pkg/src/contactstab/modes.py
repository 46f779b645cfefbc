"""Contact-mode dynamics, consistency tests and equilibrium classification.

A contact mode is a two-letter word over {F, S, P, N} (free, stick, positive
slip, negative slip), one letter per contact.  For every non-static mode the
zero-order dynamics is a 7x7 linear system in the body accelerations and the
two contact forces; the solution is admissible/consistent according to the
per-letter inequality tests.  The static mode SS is statically indeterminate
and handled as a force-feasibility problem instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, hypot, inf, sin

import numpy as np

from .model import (
    EPS_FORCE,
    EPS_GAP,
    EPS_VEL,
    BodyState,
    ContactConfig,
    canonical_frame,
    rot90,
)
from .tables import ModeData, ZodTables, tables_for

INFEASIBLE = "INFEASIBLE"
PAINLEVE_RISK = "PAINLEVE_RISK"
AMBIGUOUS = "AMBIGUOUS"
NONPERSISTENT = "NONPERSISTENT"
PERSISTENT = "PERSISTENT"


@dataclass(frozen=True)
class ModeSolution:
    """Accelerations and contact forces of one contact mode at one state."""

    mode: str
    ddr_c: tuple
    ddtheta: float
    f1: tuple
    f2: tuple
    admissible: bool
    consistent: bool
    marginal: bool
    margin: float
    singular: bool
    acc_local: tuple
    zdd: tuple
    xdd: tuple
    fn: tuple
    ft: tuple


@dataclass(frozen=True)
class EquilibriumClass:
    kind: str
    witnesses: tuple = ()
    contact_swap: bool = False
    marginal: bool = False
    painleve_bounds: tuple = (inf, inf)
    detail: str = ""


def kinematically_feasible_modes(config: ContactConfig) -> list:
    """All feasible two-letter modes for this geometry, SS included."""
    return tables_for(config).feasible_modes()


def _contact_coords(tab: ZodTables, state: BodyState):
    """Per-contact (x, z, dx, dz) from the local state (ZOD-linear chart)."""
    c1 = (tab.x1_of(state.q), state.z1, tab.dx1_of(state.dq), state.dz1)
    c2 = (state.x2, state.z2, state.dx2, state.dz2)
    return c1, c2


def _admissible(letter: str, coords) -> bool:
    x, z, dx, dz = coords
    if letter == "F":
        return z >= -EPS_GAP and (z > EPS_GAP or dz >= -EPS_VEL)
    if abs(z) > EPS_GAP or abs(dz) > EPS_VEL:
        return False
    if letter == "S":
        return abs(dx) <= EPS_VEL
    if letter == "P":
        return dx >= -EPS_VEL
    return dx <= EPS_VEL  # N


def _margin(tab: ZodTables, data: ModeData, i: int, letter: str, coords) -> float:
    """Smallest slack of the consistency inequalities for contact i.

    Positive means strictly satisfied.  Constraints conditioned on a zero
    velocity only bind when that velocity is zero at the given state.
    """
    x, z, dx, dz = coords
    if letter == "F":
        if abs(z) <= EPS_GAP and abs(dz) <= EPS_VEL:
            return data.zdd[i]
        return inf
    if letter == "S":
        return tab.mu[i] * data.fn[i] - abs(data.ft[i])
    m = data.fn[i]
    if abs(dx) <= EPS_VEL:
        m = min(m, data.xdd[i] if letter == "P" else -data.xdd[i])
    return m


def solve_mode(config: ContactConfig, state: BodyState, mode: str) -> ModeSolution:
    """ZOD solution of one non-static mode, with admissibility and
    consistency evaluated at the given state."""
    tab = tables_for(config)
    if mode not in tab.modes:
        raise ValueError(f"mode {mode!r} is not kinematically feasible here")
    if mode == "SS":
        raise ValueError("SS is statically indeterminate; use equilibrium_feasible")
    data = tab.modes[mode]
    coords = _contact_coords(tab, state)
    admissible = all(_admissible(letter, coords[i]) for i, letter in enumerate(mode))
    if data.singular:
        return ModeSolution(
            mode=mode, ddr_c=(np.nan, np.nan), ddtheta=np.nan,
            f1=data.f1, f2=data.f2, admissible=admissible,
            consistent=False, marginal=False, margin=-inf, singular=True,
            acc_local=data.acc_local, zdd=data.zdd, xdd=data.xdd,
            fn=data.fn, ft=data.ft,
        )
    margin = min(_margin(tab, data, i, letter, coords[i]) for i, letter in enumerate(mode))
    return ModeSolution(
        mode=mode,
        ddr_c=data.acc_world[:2], ddtheta=data.acc_world[2],
        f1=data.f1, f2=data.f2,
        admissible=admissible,
        consistent=admissible and margin > EPS_FORCE,
        marginal=admissible and abs(margin) <= EPS_FORCE,
        margin=margin,
        singular=False,
        acc_local=data.acc_local, zdd=data.zdd, xdd=data.xdd,
        fn=data.fn, ft=data.ft,
    )


def consistent_modes(config: ContactConfig, state: BodyState) -> list:
    """Every consistent non-static mode at the state, in the deterministic
    order: fewest free contacts first, stick before slip."""
    tab = tables_for(config)
    out = []
    for mode in tab.feasible_modes():
        if mode == "SS":
            continue
        sol = solve_mode(config, state, mode)
        if sol.consistent:
            out.append((mode, sol))
    return out


def equilibrium_feasible(config: ContactConfig):
    """Whether static contact forces balancing the external load exist inside
    both friction cones.  The static balance is 3 equations in 4 force
    components, so the candidate set is a line; the friction cones cut a
    (possibly empty) segment out of it.

    Returns (feasible, f1, f2, margin): the witness forces (midpoint of the
    feasible segment) and the segment half-length as a degeneracy margin.
    """
    frame = canonical_frame(config)
    A = np.array([
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [frame.p1[1], -frame.p1[0], frame.p2[1], -frame.p2[0]],
    ])
    b = np.array([-frame.f_ex[0], -frame.f_ex[1], config.tau_ex])
    f_part, *_ = np.linalg.lstsq(A, b, rcond=None)
    _, sv, vt = np.linalg.svd(A)
    null = vt[-1]
    if sv[-1] < 1e-12:
        # degenerate static system; fall back to reporting infeasible geometry
        return False, None, None, -inf
    # constraints g(s) = c + a*s >= 0 along f = f_part + s*null
    lo, hi = -inf, inf
    for i in range(2):
        t, n, mu = frame.t(i), frame.n(i), config.mu(i)
        fi_p = f_part[2 * i: 2 * i + 2]
        fi_n = null[2 * i: 2 * i + 2]
        for vec in (mu * n - t, mu * n + t, n):
            c = float(vec @ fi_p)
            a = float(vec @ fi_n)
            if abs(a) < 1e-15:
                if c < 0:
                    return False, None, None, -inf
            elif a > 0:
                lo = max(lo, -c / a)
            else:
                hi = min(hi, -c / a)
    if lo > hi:
        return False, None, None, float(hi - lo) / 2
    if lo == -inf and hi == inf:
        s = 0.0
        margin = inf
    elif lo == -inf:
        s = hi - 1.0
        margin = inf
    elif hi == inf:
        s = lo + 1.0
        margin = inf
    else:
        s = (lo + hi) / 2
        margin = (hi - lo) / 2
    f = f_part + s * null
    return True, tuple(f[:2]), tuple(f[2:]), margin


def painleve_bound(config: ContactConfig, i: int) -> float:
    """Upper friction bound below which single-contact slip dynamics at
    contact i stays free of inconsistency/indeterminacy.  The bound depends
    on the gyration ratio and the angle between the contact normal and the
    lever arm to the center of mass."""
    frame = canonical_frame(config)
    r = -frame.p(i)  # center of mass minus contact point
    dist = hypot(r[0], r[1])
    if dist < EPS_GAP:
        raise ValueError("contact coincides with the center of mass")
    kappa = config.rho / dist
    c = float(frame.n(i) @ r) / dist
    s2 = max(0.0, 1.0 - c * c)
    s = s2 ** 0.5
    denom = abs(s * c)
    if denom < 1e-15:
        return inf
    return (kappa * kappa + s2) / denom


_ORIGIN = BodyState(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def _ambiguity_witnesses(config: ContactConfig):
    """Non-static modes consistent at the rest state, plus a marginal flag."""
    witnesses = []
    marginal = False
    for mode in kinematically_feasible_modes(config):
        if mode == "SS":
            continue
        sol = solve_mode(config, _ORIGIN, mode)
        if sol.consistent:
            witnesses.append((mode, sol))
        elif sol.marginal:
            marginal = True
    return witnesses, marginal


def _persistence_violated(config: ContactConfig):
    """Check the two persistence requirements on slipping-mode solutions.

    Single-slip modes must either push the slipping contact off the cone
    (negative normal force, making the mode inconsistent) or accelerate the
    free contact back toward its support.  Two-slip modes must carry positive
    normal force at both contacts.
    """
    tab = tables_for(config)
    marginal = False
    for mode in ("PF", "NF", "FP", "FN"):
        data = tab.modes[mode]
        if data.singular:
            return True, marginal, f"singular mode {mode}"
        i = 0 if mode[0] in "PN" else 1   # slipping contact
        j = 1 - i                          # free contact
        fn = data.fn[i]
        zddj = data.zdd[j]
        if fn < -EPS_FORCE or zddj < -EPS_FORCE:
            continue
        if abs(fn) <= EPS_FORCE or abs(zddj) <= EPS_FORCE:
            marginal = True
            continue
        return True, marginal, f"mode {mode}: fn={fn:.3e}, free-contact zdd={zddj:.3e}"
    for mode in tab.two_slip_pair():
        data = tab.modes[mode]
        if data.singular:
            return True, marginal, f"singular mode {mode}"
        if min(data.fn) < -EPS_FORCE:
            return True, marginal, f"mode {mode}: fn={min(data.fn):.3e}"
        if min(data.fn) <= EPS_FORCE:
            marginal = True
    return False, marginal, ""


def normalize_contact_order(config: ContactConfig):
    """Swap contact labels if needed so that the free-fall solution
    accelerates contact 1 toward its support (the convention every later
    stage relies on).  Returns (config, swapped)."""
    tab = tables_for(config)
    zdd = tab.modes["FF"].zdd
    if zdd[0] < -EPS_FORCE:
        return config, False
    if zdd[1] < -EPS_FORCE:
        return config.swapped(), True
    return config, False


def classify_equilibrium(config: ContactConfig) -> EquilibriumClass:
    """Full static classification of the configuration.

    Pipeline: static feasibility, friction bounds against the slip
    inconsistency paradox, ambiguity of rest (which already implies
    instability), then the persistence requirements.  Contact labels are
    normalized before the mode checks.
    """
    feasible, f1, f2, feas_margin = equilibrium_feasible(config)
    bounds = (painleve_bound(config, 0), painleve_bound(config, 1))
    if not feasible:
        return EquilibriumClass(kind=INFEASIBLE, painleve_bounds=bounds)
    if config.mu1 >= bounds[0] or config.mu2 >= bounds[1]:
        return EquilibriumClass(kind=PAINLEVE_RISK, painleve_bounds=bounds)

    config, swapped = normalize_contact_order(config)
    if swapped:
        bounds = (bounds[1], bounds[0])
    marginal = feas_margin <= EPS_FORCE

    witnesses, amb_marginal = _ambiguity_witnesses(config)
    marginal = marginal or amb_marginal
    if witnesses:
        return EquilibriumClass(
            kind=AMBIGUOUS, witnesses=tuple(witnesses), contact_swap=swapped,
            marginal=marginal, painleve_bounds=bounds,
            detail="consistent at rest: " + ",".join(m for m, _ in witnesses),
        )

    # rest must not be ambiguous with free fall either: contact 1 falls
    tab = tables_for(config)
    zdd_ff = tab.modes["FF"].zdd
    if zdd_ff[0] > -EPS_FORCE:
        # neither contact accelerates downward in free flight: boundary case
        return EquilibriumClass(
            kind=AMBIGUOUS, witnesses=(("FF", None),), contact_swap=swapped,
            marginal=True, painleve_bounds=bounds,
            detail="free-fall normal accelerations nonnegative",
        )

    violated, pers_marginal, detail = _persistence_violated(config)
    marginal = marginal or pers_marginal
    if violated:
        return EquilibriumClass(
            kind=NONPERSISTENT, contact_swap=swapped, marginal=marginal,
            painleve_bounds=bounds, detail=detail,
        )
    return EquilibriumClass(
        kind=PERSISTENT, contact_swap=swapped, marginal=marginal,
        painleve_bounds=bounds,
    )
