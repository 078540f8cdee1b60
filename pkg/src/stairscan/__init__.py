"""Mirror-scanned FMCW radar stair detection: simulator, detector, dimensioning."""

from .config import (ClusteringConfig, ConfigError, ExportFlags, PipelineConfig,
                     config_from_dict, load_config, validate_config)
from .detector import (Cluster, EmptyMapError, FilterConfig, FilterResult,
                       ParticleSet, cluster_particles, dedupe, init_gmm,
                       init_uniform, normalize_weights,
                       reject_redundant_clusters, reject_small_clusters,
                       remove_in_cluster_outliers, resample, run_filter)
from .dimensioning import (ErrorReport, StairEstimate, StepEstimate,
                           compare_to_ground_truth, estimate_depth,
                           estimate_height, reconstruct_staircase, true_steps)
from .pipeline import PipelineOutput, run_pipeline, simulate_profiles
from .radar_math import (RadarParams, ScannerGeometry, beam_to_world,
                         height_resolution, max_range, range_resolution)
from .range_processing import (CfarParams, IntensityMap, RangeProfile,
                               apply_cfar_floor, assemble_intensity_map,
                               ca_cfar, compute_range_profile)
from .scene_sim import (BeatSignal, Reflectivity, Scatterer, StairScene,
                        build_scatterers, synthesize_beat)

__version__ = "0.1.0"
