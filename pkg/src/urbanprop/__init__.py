"""urbanprop: outdoor UMi/UMa channel-modeling toolkit for 0.5-100 GHz.

Path-loss models (CI/CIF/ABG), LOS-probability models, building
penetration, map-based LOS geometry, parameter fitting, multipath
clustering, channel statistics, and a deterministic Monte-Carlo drop
engine.
"""

from .chanstats import (
    SpreadReport,
    per_cluster_reports,
    rms_angle_spread,
    rms_delay_spread,
    spread_report,
    xpr_stats,
)
from .clustering import (
    ClusteringConfig,
    ClusterSet,
    MultirestartResult,
    RayRecord,
    cluster_multirestart,
    kpower_means,
    load_rays,
    mcd_distance,
    ray_embedding,
    shape_prune,
)
from .core import (
    BAND_MAX_GHZ,
    BAND_MIN_GHZ,
    SPEED_OF_LIGHT,
    AbgParams,
    D1D2Params,
    FrequencyRangeWarning,
    ScenarioId,
    ScenarioParams,
    SingularFitError,
    ValidationError,
    catalog_as_dict,
    catalog_lookup,
    catalog_scenarios,
)
from .dropsim import DropConfig, DropResult, coupling_loss_cdf, run_drop
from .fitting import (
    FitReport,
    LosFitReport,
    LosSample,
    PathLossSample,
    SingleFrequencyWarning,
    compare_los_models,
    fit_abg,
    fit_ci,
    fit_cif,
    fit_los_probability,
    load_los_samples,
    load_pathloss_samples,
)
from .geometry import (
    Blockage,
    BuildingMap,
    WallDistance,
    classify_blockage,
    indoor_polygon_index,
    is_indoor,
    is_los,
    load_building_map,
    outer_wall_distance,
)
from .los import (
    indoor_effective_distance,
    p_los_3gpp_uma,
    p_los_d1d2,
    p_los_nyu_squared,
)
from .pathloss import (
    AbgModel,
    CifModel,
    CiModel,
    abg_pl,
    centroid_frequency,
    ci_pl,
    cif_pl,
    fspl_1m,
)
from .penetration import BplClass, O2iConfig, bpl, o2i_loss

__version__ = "0.1.0"

__all__ = [
    "AbgModel",
    "AbgParams",
    "BAND_MAX_GHZ",
    "BAND_MIN_GHZ",
    "Blockage",
    "BplClass",
    "BuildingMap",
    "CiModel",
    "CifModel",
    "ClusterSet",
    "ClusteringConfig",
    "D1D2Params",
    "DropConfig",
    "DropResult",
    "FitReport",
    "FrequencyRangeWarning",
    "LosFitReport",
    "LosSample",
    "MultirestartResult",
    "O2iConfig",
    "PathLossSample",
    "RayRecord",
    "SPEED_OF_LIGHT",
    "ScenarioId",
    "ScenarioParams",
    "SingleFrequencyWarning",
    "SingularFitError",
    "SpreadReport",
    "ValidationError",
    "WallDistance",
    "abg_pl",
    "bpl",
    "catalog_as_dict",
    "catalog_lookup",
    "catalog_scenarios",
    "centroid_frequency",
    "ci_pl",
    "cif_pl",
    "classify_blockage",
    "cluster_multirestart",
    "compare_los_models",
    "coupling_loss_cdf",
    "fit_abg",
    "fit_ci",
    "fit_cif",
    "fit_los_probability",
    "fspl_1m",
    "indoor_effective_distance",
    "indoor_polygon_index",
    "is_indoor",
    "is_los",
    "kpower_means",
    "load_building_map",
    "load_los_samples",
    "load_pathloss_samples",
    "load_rays",
    "mcd_distance",
    "o2i_loss",
    "outer_wall_distance",
    "p_los_3gpp_uma",
    "p_los_d1d2",
    "p_los_nyu_squared",
    "per_cluster_reports",
    "ray_embedding",
    "rms_angle_spread",
    "rms_delay_spread",
    "run_drop",
    "shape_prune",
    "spread_report",
    "xpr_stats",
]
