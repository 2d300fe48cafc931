"""Data-dependent partition estimation of phi-divergences."""
from .bounds import (
    PlannerReport,
    RegularityParams,
    chernoff_tail,
    check_power_law,
    gamma_bounds,
    integral_edge_bound,
    log_growth_bound,
    n_for_gamma2,
    n_star,
    plan,
    required_m,
    tail_radius,
)
from .estimator import EstimateResult, estimate_divergence, estimate_with_partition
from .geometry import HyperRectangle, Interval, Partition, locate, max_edge_length, volume
from .partitioner import build_partition, cell_counts, classify_cells, partition_l1_error
from .phi import CHI_SQUARED, HELLINGER, KL, TOTAL_VARIATION, PhiFamily, get_family, inverse_k2, k_triple, phi_eval
from .synthdata import (
    DistributionSpec,
    cell_mass,
    cell_masses,
    closed_form_divergence,
    discretized_divergence,
    draw,
    quadrature_divergence,
)

__version__ = "0.1.0"
