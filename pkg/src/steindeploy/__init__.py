"""Distribution-matching multisensor deployment toolkit.

Selects representative deployment points from a known event density with
a spread-regulated kernelized particle transport, assigns heterogeneous
sensors to those points by orientation-optimized footprint KL costs, and
ships grid Lloyd (Voronoi / power diagram) baselines plus shared metrics
for comparing the resulting deployments.
"""

from .assignment import (
    InfeasibleMatchingError,
    Matching,
    brute_force_assignment,
    finalize_deployment,
    hungarian_solve,
)
from .baselines import LloydResult, Partition, lloyd_run, locational_cost, partition_grid, weighted_centroid
from .coverage import (
    OrientationGrid,
    Pose,
    SensorModel,
    best_orientation,
    build_cost_matrix,
    footprint_contains,
    footprint_points,
    kl_footprint_cost,
    sensor_density,
)
from .density import (
    DensityGrid,
    GaussianComponent,
    GaussianMixture,
    Workspace,
    grid_evaluate,
    log_density,
    sample,
    score,
)
from .kernels import (
    KernelSpec,
    VarianceState,
    empirical_variance,
    kernel_eval,
    kernel_grad_x,
    median_heuristic,
    update_weight_matrix,
)
from .metrics import (
    Deployment,
    collective_kl,
    covered_mass,
    ksd_diagnostic,
    min_pairwise_distance,
    overlap_fraction,
)
from .scenario import Scenario, ScenarioError, parse_scenario, shipped_scenario_path
from .pipeline import RunReport, emit_report, run_pipeline
from .svgd import (
    ParticleSet,
    SvgdConfig,
    Trace,
    designate_map_particles,
    run,
    spread_deficit,
    svgd_direction,
    svgd_directions,
    svgd_step,
    uniform_particles,
)

__version__ = "0.1.0"
