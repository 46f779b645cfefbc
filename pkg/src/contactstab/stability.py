"""Stability classification from the reduced maps.

Three tests, applied in order of strength: an attractive angle with growth
ratio above one proves instability (diverging impact sequences exist
arbitrarily close to rest); growth below one everywhere proves finite-time
stability outright; otherwise a stable partition of the angle interval --
no directed cycle of the induced interval graph through an interval where
growth can reach one -- still certifies stability.  Configurations are
binned into the region classes 0-7 used by the parameter sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

from .modes import (
    AMBIGUOUS,
    INFEASIBLE,
    NONPERSISTENT,
    PAINLEVE_RISK,
    PERSISTENT,
    classify_equilibrium,
)
from .model import ContactConfig
from .poincare import ERROR, DASHED_EDGE, ReducedMaps, sample_maps

# fixed point kinds
CROSSING = "CROSSING"
PLATEAU = "PLATEAU"
ENDPOINT_POS = "ENDPOINT_POS"
ENDPOINT_NEG = "ENDPOINT_NEG"

EPS_FP = 1e-9        # fixed-point residual |R(phi) - phi|
EPS_GROWTH = 1e-6    # strictness band around G = 1
_PLATEAU_SLOPE = 1e-3

REGION_INFEASIBLE = 0
REGION_PAINLEVE = 1
REGION_STABLE_CONTRACTION = 2
REGION_STABLE_PARTITION = 3
REGION_UNSTABLE_CHATTER = 4
REGION_UNSTABLE_CHATTER_NONPERSISTENT = 5
REGION_UNSTABLE_AMBIGUOUS = 6
REGION_UNDECIDED = 7

REGION_LEGEND = {
    0: "infeasible",
    1: "painleve",
    2: "stable-contraction",
    3: "stable-partition",
    4: "unstable-chatter",
    5: "unstable-chatter-nonpersistent",
    6: "unstable-ambiguous",
    7: "undecided",
}


@dataclass(frozen=True)
class FixedPoint:
    phi_star: float
    kind: str
    R_slope: float
    G_at: float


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    safe: bool
    extremal: str = ""   # "minus", "plus" or ""


@dataclass(frozen=True)
class Partition:
    cut_points: tuple
    intervals: tuple
    edges: frozenset     # (from_index, to_index), self-edges excluded

    def unsafe_indices(self):
        return [k for k, iv in enumerate(self.intervals) if not iv.safe]


@dataclass(frozen=True)
class StabilityVerdict:
    region_class: int
    marginal: bool
    evidence: dict = field(default_factory=dict)

    @property
    def region_name(self) -> str:
        return REGION_LEGEND[self.region_class]


# -- fixed points ----------------------------------------------------------


def _defined_runs(maps: ReducedMaps):
    runs, run = [], []
    for s in maps.samples:
        if s.outcome.defined:
            run.append(s)
        elif run:
            runs.append(run)
            run = []
    if run:
        runs.append(run)
    return runs


def _grid_step(maps: ReducedMaps) -> float:
    return pi / (len(maps.samples) + 1)


def _bisect_fixed_point(maps, lo, hi, f_lo):
    ev = maps.evaluator
    if ev is None:
        return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        out = ev(mid)
        if not out.defined:
            return None
        f_mid = out.R - mid
        if abs(f_mid) < EPS_FP:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


def _local_slope_and_G(maps, phi, fallback_slope, fallback_G):
    ev = maps.evaluator
    if ev is None:
        return fallback_slope, fallback_G
    h = max(1e-7, _grid_step(maps) / 64)
    a, b = ev(phi - h), ev(phi + h)
    at = ev(phi)
    G = at.G if at.defined else fallback_G
    if a.defined and b.defined:
        return (b.R - a.R) / (2 * h), G
    return fallback_slope, G


def find_fixed_points(maps: ReducedMaps) -> list:
    """Fixed points of the return map: sign changes of R - phi on each
    defined run (bisection-refined), identity plateaus collapsed into single
    representatives, plus the endpoint limits where the maps extend there."""
    out = []
    step = _grid_step(maps)
    for run in _defined_runs(maps):
        res = [s.outcome.R - s.phi for s in run]
        k = 0
        while k < len(run):
            if abs(res[k]) <= EPS_FP:
                j = k
                while j + 1 < len(run) and abs(res[j + 1]) <= EPS_FP:
                    j += 1
                phi_star = 0.5 * (run[k].phi + run[j].phi)
                slope, G = _local_slope_and_G(maps, phi_star, 1.0, run[k].outcome.G)
                kind = PLATEAU if j > k or abs(slope) < _PLATEAU_SLOPE else CROSSING
                out.append(FixedPoint(phi_star, kind, slope, G))
                k = j + 1
                continue
            if k + 1 < len(run) and abs(res[k + 1]) > EPS_FP and (res[k] > 0) != (res[k + 1] > 0):
                phi_star = _bisect_fixed_point(maps, run[k].phi, run[k + 1].phi, res[k])
                if phi_star is None:  # secant fallback on the grid samples
                    t = res[k] / (res[k] - res[k + 1])
                    phi_star = run[k].phi + t * (run[k + 1].phi - run[k].phi)
                secant = ((run[k + 1].outcome.R - run[k].outcome.R)
                          / (run[k + 1].phi - run[k].phi))
                g_near = run[k].outcome.G
                slope, G = _local_slope_and_G(maps, phi_star, secant, g_near)
                kind = PLATEAU if abs(slope) < _PLATEAU_SLOPE else CROSSING
                out.append(FixedPoint(phi_star, kind, slope, G))
            k += 1
    if maps.g_minus is not None:
        out.append(FixedPoint(-pi / 2, ENDPOINT_NEG, maps.g_minus, maps.g_minus))
    if maps.g_plus is not None:
        out.append(FixedPoint(pi / 2, ENDPOINT_POS, maps.g_plus, maps.g_plus))
    # collapse duplicates closer than one grid step
    dedup = []
    for fp in sorted(out, key=lambda f: f.phi_star):
        if dedup and abs(fp.phi_star - dedup[-1].phi_star) < step and fp.kind == dedup[-1].kind:
            continue
        dedup.append(fp)
    return dedup


def unstable_fixed_point(maps: ReducedMaps, fixed_points=None):
    """First interior fixed point whose growth value exceeds one: a
    certificate of instability (valid for persistent and non-persistent
    configurations alike).  Returns (fixed_point_or_None, marginal)."""
    if fixed_points is None:
        fixed_points = find_fixed_points(maps)
    marginal = False
    for fp in fixed_points:
        if fp.kind in (ENDPOINT_POS, ENDPOINT_NEG):
            continue
        if fp.G_at is None:
            continue
        if fp.G_at > 1.0 + EPS_GROWTH:
            return fp, marginal
        if abs(fp.G_at - 1.0) <= EPS_GROWTH:
            marginal = True
    return None, marginal


def globally_contracting(maps: ReducedMaps):
    """Whether every defined sample has growth strictly below one.  Samples
    that errored out count against certification.  Returns (flag, marginal)."""
    marginal = False
    for s in maps.samples:
        o = s.outcome
        if o.status in (ERROR, DASHED_EDGE):
            return False, True
        if not o.defined:
            continue
        if o.G >= 1.0 - EPS_GROWTH:
            if o.G <= 1.0 + EPS_GROWTH:
                marginal = True
            return False, marginal
    for g in (maps.g_minus, maps.g_plus):
        if g is not None and abs(g - 1.0) <= EPS_GROWTH:
            marginal = True
    return True, marginal


# -- stable partition search ------------------------------------------------


def _is_unsafe_sample(s) -> bool:
    return s.outcome.defined and s.outcome.G >= 1.0 - EPS_GROWTH


def _unsafe_cores(maps: ReducedMaps):
    """Maximal index ranges of unsafe samples; nearby same-sign cores merged."""
    samples = maps.samples
    cores = []
    k = 0
    while k < len(samples):
        if _is_unsafe_sample(samples[k]):
            j = k
            while j + 1 < len(samples) and _is_unsafe_sample(samples[j + 1]):
                j += 1
            cores.append([k, j])
            k = j + 1
        else:
            k += 1
    def core_sign(c):
        vals = [samples[i].outcome.R - samples[i].phi for i in range(c[0], c[1] + 1)]
        if any(abs(v) <= EPS_FP for v in vals):
            return 0
        pos = all(v > 0 for v in vals)
        neg = all(v < 0 for v in vals)
        return 1 if pos else (-1 if neg else 0)
    merged = []
    for c in cores:
        if merged and c[0] - merged[-1][1] <= 5 and core_sign(merged[-1]) == core_sign(c) != 0:
            merged[-1][1] = c[1]
        else:
            merged.append(c)
    return merged, core_sign


def _refine_unsafe_edge(maps, inside_phi, outside_phi):
    """Bisect the boundary of the unsafe region between two grid points."""
    ev = maps.evaluator
    if ev is None:
        return inside_phi
    lo, hi = inside_phi, outside_phi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        out = ev(mid)
        if out.defined and out.G >= 1.0 - EPS_GROWTH:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _place_cut(maps, core_lo_phi, core_hi_phi, sign, side, floor, ceil,
               plateau_bound):
    """Place one cut adjacent to an unsafe core.

    The cut slides outward from the core edge up to the nearest obstruction:
    a defined sample breaking the core's R - phi sign (a fixed point lives
    between), the domain end, a neighboring core, or the required constant-G
    extremal plateau.  Image points of the core that fall just outside get a
    small guard clearance so they land strictly inside the neighbor.
    """
    samples = maps.samples
    step = _grid_step(maps)
    edge = core_lo_phi if side == "left" else core_hi_phi
    lo, hi = (floor, edge) if side == "left" else (edge, ceil)
    # sign obstruction: nearest defined sample outward with incompatible sign
    if side == "left":
        for s in reversed([s for s in samples if s.phi < edge]):
            if not s.outcome.defined:
                continue
            r = s.outcome.R - s.phi
            if abs(r) <= EPS_FP or (r > 0) != (sign > 0):
                lo = max(lo, s.phi)
                break
    else:
        for s in [s for s in samples if s.phi > edge]:
            if not s.outcome.defined:
                continue
            r = s.outcome.R - s.phi
            if abs(r) <= EPS_FP or (r > 0) != (sign > 0):
                hi = min(hi, s.phi)
                break
    if plateau_bound is not None:
        if side == "left":
            hi = min(hi, plateau_bound)
        else:
            lo = max(lo, plateau_bound)
    if not lo < hi:
        return None
    # image obstruction: core images falling into the slide range
    images = [s.outcome.R for s in samples
              if s.outcome.defined and core_lo_phi <= s.phi <= core_hi_phi]
    guard = 5 * step
    if side == "left":
        blockers = [y for y in images if lo < y < hi]
        if blockers:
            cut = max(blockers) + min(guard, 0.1 * (hi - max(blockers)))
        else:
            cut = 0.5 * (lo + hi)
    else:
        blockers = [y for y in images if lo < y < hi]
        if blockers:
            cut = min(blockers) - min(guard, 0.1 * (min(blockers) - lo))
        else:
            cut = 0.5 * (lo + hi)
    return cut


def _interval_index(cuts, phi):
    k = 0
    while k < len(cuts) and phi > cuts[k]:
        k += 1
    return k


def _build_partition(maps: ReducedMaps, cuts):
    cuts = sorted(cuts)
    n = len(cuts) + 1
    bounds = [-pi / 2] + cuts + [pi / 2]
    unsafe_flags = [False] * n
    for s in maps.samples:
        if _is_unsafe_sample(s):
            unsafe_flags[_interval_index(cuts, s.phi)] = True
    intervals = []
    for k in range(n):
        extremal = "minus" if k == 0 else ("plus" if k == n - 1 else "")
        intervals.append(Interval(bounds[k], bounds[k + 1], not unsafe_flags[k], extremal))
    step = _grid_step(maps)
    edges = set()
    for s in maps.samples:
        if not s.outcome.defined:
            continue
        j = _interval_index(cuts, s.phi)
        y = s.outcome.R
        k = _interval_index(cuts, y)
        if k != j:
            edges.add((j, k))
        # conservative: an image within one grid step of a boundary also
        # counts for the interval on the other side
        for c_idx, c in enumerate(cuts):
            if abs(y - c) <= step:
                for k2 in (c_idx, c_idx + 1):
                    if k2 != j:
                        edges.add((j, k2))
    return Partition(tuple(cuts), tuple(intervals), frozenset(edges))


def _cycle_through_unsafe(part: Partition) -> bool:
    adj = {}
    for a, b in part.edges:
        adj.setdefault(a, set()).add(b)
    for u in part.unsafe_indices():
        # u lies on a directed cycle iff u is reachable from u (no self-edges)
        stack = list(adj.get(u, ()))
        seen = set()
        while stack:
            v = stack.pop()
            if v == u:
                return True
            if v in seen:
                continue
            seen.add(v)
            stack.extend(adj.get(v, ()))
    return False


def _verify_partition(maps: ReducedMaps, part: Partition) -> bool:
    """Check the four stable-partition conditions verbatim on the samples."""
    for g, side in ((maps.g_minus, "minus"), (maps.g_plus, "plus")):
        if g is None:
            continue
        if abs(g - 1.0) <= EPS_GROWTH:
            return False
        extremal = part.intervals[0] if side == "minus" else part.intervals[-1]
        for s in maps.samples:
            if extremal.lo <= s.phi <= extremal.hi and s.outcome.defined:
                if abs(s.outcome.G - g) > 1e-6 * abs(g):
                    return False
    for k, iv in enumerate(part.intervals):
        if iv.safe:
            continue
        signs = set()
        for s in maps.samples:
            if iv.lo <= s.phi <= iv.hi and s.outcome.defined:
                r = s.outcome.R - s.phi
                if abs(r) <= EPS_FP:
                    return False
                signs.add(r > 0)
        if len(signs) > 1:
            return False
    return not _cycle_through_unsafe(part)


def search_stable_partition(maps: ReducedMaps, max_intervals: int = 512):
    """Construct and verify a stable partition.  Returns (partition_or_None,
    marginal): None with marginal=True means the data was too close to a
    boundary to decide at this resolution."""
    for g in (maps.g_minus, maps.g_plus):
        if g is not None and abs(g - 1.0) <= EPS_GROWTH:
            return None, True
    if any(s.outcome.status in (ERROR, DASHED_EDGE) for s in maps.samples):
        return None, True
    samples = maps.samples
    if (maps.g_minus is not None and maps.plateau_minus is None) or \
            (maps.g_plus is not None and maps.plateau_plus is None):
        return None, True  # constant-G endpoint run below grid resolution
    cores, core_sign = _unsafe_cores(maps)
    if not cores:
        cuts = []
        if maps.g_minus is not None:
            cuts.append(maps.plateau_minus)
        if maps.g_plus is not None:
            if not cuts or maps.plateau_plus > cuts[-1]:
                cuts.append(maps.plateau_plus)
        part = _build_partition(maps, cuts)
        if len(part.intervals) > max_intervals or not _verify_partition(maps, part):
            return None, False
        return part, False

    cuts = []
    prev_hi_phi = None
    for idx, core in enumerate(cores):
        sign = core_sign(core)
        if sign == 0:
            return None, False  # fixed point inside an unsafe stretch
        lo_phi = samples[core[0]].phi
        hi_phi = samples[core[1]].phi
        if core[0] > 0:
            lo_phi = _refine_unsafe_edge(maps, lo_phi, samples[core[0] - 1].phi)
        if core[1] + 1 < len(samples):
            hi_phi = _refine_unsafe_edge(maps, hi_phi, samples[core[1] + 1].phi)
        floor = -pi / 2
        if prev_hi_phi is not None:
            floor = 0.5 * (prev_hi_phi + lo_phi)
        ceil = pi / 2
        if idx + 1 < len(cores):
            ceil = 0.5 * (hi_phi + samples[cores[idx + 1][0]].phi)
        plateau_left = maps.plateau_minus if (idx == 0 and maps.g_minus is not None) else None
        plateau_right = maps.plateau_plus if (idx == len(cores) - 1 and maps.g_plus is not None) else None
        left_touches_end = core[0] == 0
        right_touches_end = core[1] == len(samples) - 1
        if not left_touches_end:
            cut = _place_cut(maps, lo_phi, hi_phi, sign, "left", floor, hi_phi,
                             plateau_left)
            if cut is None:
                return None, True
            cuts.append(cut)
        if not right_touches_end:
            cut = _place_cut(maps, lo_phi, hi_phi, sign, "right", lo_phi, ceil,
                             plateau_right)
            if cut is None:
                return None, True
            cuts.append(cut)
        prev_hi_phi = hi_phi
    if len(set(cuts)) != len(cuts) or sorted(cuts) != cuts:
        cuts = sorted(set(cuts))
    part = _build_partition(maps, cuts)
    if len(part.intervals) > max_intervals:
        return None, False
    if not _verify_partition(maps, part):
        return None, False
    return part, False


# -- full classification ----------------------------------------------------


def classify(config: ContactConfig, map_points: int = 2001,
             refine_depth: int = 40) -> StabilityVerdict:
    """Complete pipeline: static classification, reduced maps, theorems."""
    eq = classify_equilibrium(config)
    evidence = {
        "equilibrium": eq.kind,
        "painleve_bounds": eq.painleve_bounds,
        "contact_swap": eq.contact_swap,
    }
    if eq.kind == INFEASIBLE:
        return StabilityVerdict(REGION_INFEASIBLE, eq.marginal, evidence)
    if eq.kind == PAINLEVE_RISK:
        return StabilityVerdict(REGION_PAINLEVE, eq.marginal, evidence)
    if eq.kind == AMBIGUOUS:
        evidence["ambiguous_modes"] = [m for m, _ in eq.witnesses]
        return StabilityVerdict(REGION_UNSTABLE_AMBIGUOUS, eq.marginal, evidence)

    work = config.swapped() if eq.contact_swap else config
    maps = sample_maps(work, n_uniform=map_points, refine_depth=refine_depth)
    defined = maps.defined_samples()
    evidence["defined_fraction"] = len(defined) / len(maps.samples)
    evidence["max_G"] = max((s.outcome.G for s in defined), default=None)
    evidence["G_plus"] = maps.g_plus
    evidence["G_minus"] = maps.g_minus
    marginal = eq.marginal

    fps = find_fixed_points(maps)
    evidence["fixed_points"] = fps
    bad_fp, fp_marginal = unstable_fixed_point(maps, fps)
    marginal = marginal or fp_marginal
    if bad_fp is not None:
        evidence["unstable_fixed_point"] = bad_fp
        region = (REGION_UNSTABLE_CHATTER if eq.kind == PERSISTENT
                  else REGION_UNSTABLE_CHATTER_NONPERSISTENT)
        return StabilityVerdict(region, marginal, evidence)

    if eq.kind == PERSISTENT:
        contracting, c_marginal = globally_contracting(maps)
        marginal = marginal or c_marginal
        if contracting:
            return StabilityVerdict(REGION_STABLE_CONTRACTION, marginal, evidence)
        part, p_marginal = search_stable_partition(maps)
        marginal = marginal or p_marginal
        if part is not None:
            evidence["partition"] = part
            return StabilityVerdict(REGION_STABLE_PARTITION, marginal, evidence)
        # persistent but no theorem fired: report undecided, flagged
        return StabilityVerdict(REGION_UNDECIDED, True, evidence)
    return StabilityVerdict(REGION_UNDECIDED, marginal, evidence)
