"""Axis-aligned random tessellations: exact growth engine and experiments.

Axis-aligned rays grow from marked Poisson seeds at unit speed until an
orthogonal segment blocks them. The package contains the exact
event-driven engine, a time-stepping oracle for cross-validation, the
planar-graph extraction with its count identities, Monte Carlo
estimators for the tail/scaling/covariance laws, the companion lattice
models, and a CLI that runs each experiment reproducibly.
"""

__version__ = "0.1.0"

from .engine import (
    BlockedBy,
    DegenerateEvent,
    HalfRay,
    Tessellation,
    escaping_rays,
    oracle_simulate,
    ray_length_total,
    simulate,
    simulate_arrays,
    write_tessellation_csv,
)
from .geometry import (
    BoxDomain,
    DependenceRegion,
    Direction,
    Point2,
    independence_horizon,
    l1_distance,
    regions_intersect,
)
from .lattice import (
    CaTrajectory,
    LatticeRayConfig,
    LatticeSeed,
    LatticeState,
    StopCause,
    ca_run,
    ca_step,
    compare_ca_to_rays,
    covered_lattice_points,
    format_grid,
    lattice_ray_simulate,
    parse_grid,
)
from .planar import EulerReport, PlanarGraph, euler_check, extract_graph, graph_to_json
from .sampling import (
    DegenerateInputError,
    MarkDistribution,
    SeedPoint,
    SeedSet,
    insert_palm,
    jitter_points,
    read_seeds_csv,
    sample_poisson,
    stream_seed,
    write_seeds_csv,
)
from .stats import (
    CovarianceEstimate,
    DirectionConfig,
    PARALLEL_CONFIG,
    PRESET_CONFIGS,
    SurvivalCurve,
    TailFit,
    TRAP_CONFIG,
    covariance_decay_sweep,
    escaping_expectation,
    estimate_covariance,
    estimate_event_probability,
    estimate_side_covariance,
    estimate_survival,
    fit_exponential_tail,
    sample_ray_lengths,
    two_sample_ks,
)

__all__ = [name for name in dir() if not name.startswith("_")]
