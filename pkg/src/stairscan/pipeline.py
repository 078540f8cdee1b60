"""End-to-end orchestration: scene -> profiles -> map -> clusters -> report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig, validate_config
from .config import ConfigError
from .detector import (Cluster, EmptyMapError, FilterResult, cluster_particles,
                       reject_redundant_clusters, reject_small_clusters,
                       remove_in_cluster_outliers, run_filter)
from .dimensioning import (ErrorReport, StairEstimate, compare_to_ground_truth,
                           reconstruct_staircase)
from .radar_math import RadarParams, ScannerGeometry
from .range_processing import (IntensityMap, RangeProfile, apply_cfar_floor,
                               assemble_intensity_map, ca_cfar,
                               compute_range_profile)
from .scene_sim import StairScene, build_scatterers, synthesize_beat
from .seeding import STAGE_BEAM, STAGE_FILTER, substream


@dataclass
class PipelineOutput:
    estimate: StairEstimate
    report: ErrorReport
    clusters: list[Cluster]
    filter_result: FilterResult | None
    map_raw: IntensityMap
    map_used: IntensityMap
    profiles: list[RangeProfile]       # as consumed by map_used
    raw_profiles: list[RangeProfile]
    elapsed: float = 0.0
    cluster_counts: list[int] = field(default_factory=list)  # after each stage


def simulate_profiles(scene: StairScene, radar: RadarParams,
                      scanner: ScannerGeometry, seed: int) -> list[RangeProfile]:
    """Synthesize one beat signal per mirror position and FFT each.

    Every beam draws from its own (seed, beam index) stream, so serial
    and parallel sweeps produce identical output.
    """
    scatterers = build_scatterers(scene, scanner)
    profiles = []
    for i, angle in enumerate(scanner.beam_angles()):
        rng = substream(seed, STAGE_BEAM, i)
        beat = synthesize_beat(scatterers, float(angle), radar, scanner, rng,
                               noise_floor=scene.noise_floor)
        profiles.append(compute_range_profile(beat, radar))
    return profiles


def cfar_filter_profiles(profiles: list[RangeProfile],
                         cfar_params) -> list[RangeProfile]:
    """CFAR every profile, flooring rejects at the scan-minimum power."""
    scan_floor = min(float(np.min(p.powers)) for p in profiles)
    out = []
    for profile in profiles:
        _, mask = ca_cfar(profile, cfar_params)
        out.append(apply_cfar_floor(profile, mask, scan_floor))
    return out


def detect_clusters(imap: IntensityMap, config: PipelineConfig,
                    record_trajectory: bool = False
                    ) -> tuple[FilterResult | None, list[Cluster], list[int]]:
    """Particle filter plus the clustering/rejection cascade.

    Returns (filter result, final clusters, cluster counts after each
    stage). A map with nothing above the floor yields no clusters.
    """
    rng = substream(config.seed, STAGE_FILTER)
    try:
        result = run_filter(imap, config.filter, rng,
                            record_trajectory=record_trajectory)
    except EmptyMapError:
        return None, [], []
    clustering = config.clustering
    clusters = cluster_particles(result.particles, clustering.rho, clustering.tau_max)
    counts = [len(clusters)]
    clusters = reject_small_clusters(clusters)
    counts.append(len(clusters))
    clusters = [remove_in_cluster_outliers(c) for c in clusters]
    clusters = reject_redundant_clusters(clusters, clustering.redundancy_threshold,
                                         clustering.redundancy)
    counts.append(len(clusters))
    return result, clusters, counts


def run_pipeline(config: PipelineConfig,
                 record_trajectory: bool = False) -> PipelineOutput:
    """Execute simulate -> range-process -> (CFAR) -> detect -> dimension.

    Raises ConfigError when the configuration is invalid; an empty
    detection is an outcome (estimate with zero steps), not an error.
    """
    violations = validate_config(config)
    if violations:
        raise ConfigError(violations)
    t0 = time.perf_counter()
    raw_profiles = simulate_profiles(config.scene, config.radar, config.scanner,
                                     config.seed)
    map_raw = assemble_intensity_map(raw_profiles, config.scanner)
    if config.cfar_enabled:
        profiles = cfar_filter_profiles(raw_profiles, config.cfar)
        map_used = assemble_intensity_map(profiles, config.scanner, cfar_applied=True)
    else:
        profiles = raw_profiles
        map_used = map_raw

    record = record_trajectory or config.export.particles
    filter_result, clusters, counts = detect_clusters(map_used, config, record)
    estimate = reconstruct_staircase(clusters, config.scanner)
    report = compare_to_ground_truth(estimate, config.scene)
    elapsed = time.perf_counter() - t0
    return PipelineOutput(estimate=estimate, report=report, clusters=clusters,
                          filter_result=filter_result, map_raw=map_raw,
                          map_used=map_used, profiles=profiles,
                          raw_profiles=raw_profiles, elapsed=elapsed,
                          cluster_counts=counts)
