"""nestlab: a numerical laboratory for real one-dimensional dynamics."""

from .config import DEFAULT_CONFIG, RunConfig
from .intervals import RealInterval, scale
from .maps import (
    CriticalPoint,
    MapSpec,
    critical_points,
    evaluate,
    derivative,
    inverse_branch_complex,
    inverse_branch_real,
    load_map_file,
    local_involution,
    make_map,
    quadratic,
)
from .chains import Chain, NiceResult, build_chain, is_nice, nice_pair, preimage_component
from .disks import (DiskComparison, LowerPullback, OffBranch, PoincareDisk,
                    PowerPullback, SampledDomain, SchwarzFit, disk_angle_of,
                    disk_comparisons, enclosing_angle, off_branch_check,
                    power_pullback_check, power_pullback_lower,
                    power_pullback_witnesses, pullback_domain, sample_disk,
                    schwarz_inclusion_estimate)
from .depth import (DepthReport, crit_of_branch, crit_of_chain, depth_between,
                    depth_of_chain, first_noncentral, hat_depth_between)
from .nest import (CascadeDetection, NestLevel, classify_level,
                   detect_central_and_terminating, enhanced_nest,
                   enhanced_step, principal_nest, renormalization_interval,
                   seed_interval)
from .returns import (OmegaSample, ReturnBranch, first_entry_domain,
                      omega_sample, return_partition)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONFIG",
    "RunConfig",
    "RealInterval",
    "scale",
    "CriticalPoint",
    "MapSpec",
    "critical_points",
    "evaluate",
    "derivative",
    "inverse_branch_real",
    "inverse_branch_complex",
    "local_involution",
    "load_map_file",
    "make_map",
    "quadratic",
    "Chain",
    "NiceResult",
    "build_chain",
    "is_nice",
    "nice_pair",
    "preimage_component",
    "OmegaSample",
    "ReturnBranch",
    "omega_sample",
    "return_partition",
    "first_entry_domain",
    "CascadeDetection",
    "NestLevel",
    "seed_interval",
    "principal_nest",
    "detect_central_and_terminating",
    "renormalization_interval",
    "classify_level",
    "enhanced_step",
    "enhanced_nest",
    "DepthReport",
    "first_noncentral",
    "crit_of_branch",
    "crit_of_chain",
    "depth_of_chain",
    "depth_between",
    "hat_depth_between",
    "DiskComparison",
    "LowerPullback",
    "OffBranch",
    "PoincareDisk",
    "PowerPullback",
    "SampledDomain",
    "SchwarzFit",
    "disk_angle_of",
    "disk_comparisons",
    "enclosing_angle",
    "off_branch_check",
    "power_pullback_check",
    "power_pullback_lower",
    "power_pullback_witnesses",
    "pullback_domain",
    "sample_disk",
    "schwarz_inclusion_estimate",
]
