"""Finite-time stability analysis of a planar rigid body on two frictional
unilateral contacts: zero-order hybrid dynamics, impact-section return maps,
and stability/instability certificates."""

from .model import (
    BodyState,
    ContactConfig,
    Frame,
    GeometryError,
    Metrics,
    canonical_frame,
    chart_from_local,
    chart_to_local,
    contact_kinematics,
    metrics,
)
from .modes import (
    AMBIGUOUS,
    EquilibriumClass,
    INFEASIBLE,
    ModeSolution,
    NONPERSISTENT,
    PAINLEVE_RISK,
    PERSISTENT,
    classify_equilibrium,
    consistent_modes,
    equilibrium_feasible,
    kinematically_feasible_modes,
    normalize_contact_order,
    painleve_bound,
    solve_mode,
)
from .impact import ImpactOutcome, InconsistentImpactError, impact_matrix, resolve_impact
from .hybrid import Budget, Episode, HybridTrajectory, simulate, trajectory_rows
from .poincare import CycleOutcome, ReducedMaps, cycle, maps_csv, maps_svg, sample_maps
from .stability import (
    FixedPoint,
    Partition,
    REGION_LEGEND,
    StabilityVerdict,
    classify,
    find_fixed_points,
    globally_contracting,
    search_stable_partition,
    unstable_fixed_point,
)
from .configio import (
    ConfigError,
    SweepAxis,
    SweepSpec,
    apply_parameter,
    fixture_config,
    format_config,
    load_fixture,
    parse_config,
    parse_sweep,
)
from .sweep import RegionMap, region_csv, region_svg, run_sweep

__version__ = "0.1.0"
