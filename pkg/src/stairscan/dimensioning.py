"""Turn final clusters into per-step dimensions and error reports.

Step depth is the weight-averaged particle depth of its cluster. Step
height starts from the topmost particle and removes the beam-aperture
smear: a target is painted into beams up to half the mirror aperture
above its true elevation, so the top of a cluster overshoots by
depth * tan(half aperture). Riser heights follow from successive
top-height differences with the ground as baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .detector import Cluster
from .radar_math import ScannerGeometry
from .scene_sim import StairScene


@dataclass(frozen=True)
class StepEstimate:
    depth: float         # m from the radar zero position to the riser face
    top_height: float    # m above ground
    riser_height: float  # m, this step's rise


@dataclass
class StairEstimate:
    steps: list[StepEstimate] = field(default_factory=list)

    @property
    def num_steps(self) -> int:
        return len(self.steps)


@dataclass
class ErrorReport:
    matched: bool                 # detected step count equals ground truth
    num_detected: int
    num_true: int
    depth_errors: list[float] = field(default_factory=list)
    height_errors: list[float] = field(default_factory=list)  # on top heights

    @property
    def max_depth_error(self) -> float:
        return max(self.depth_errors, default=0.0)

    @property
    def mean_depth_error(self) -> float:
        return sum(self.depth_errors) / len(self.depth_errors) if self.depth_errors else 0.0

    @property
    def max_height_error(self) -> float:
        return max(self.height_errors, default=0.0)

    @property
    def mean_height_error(self) -> float:
        return sum(self.height_errors) / len(self.height_errors) if self.height_errors else 0.0


def estimate_depth(cluster: Cluster) -> float:
    """Weighted mean particle depth, weights renormalized within the cluster."""
    ps = cluster.particles
    total = ps.w.sum()
    if not total > 0:
        raise ValueError("cluster weights are all zero; run the filter first")
    return float((ps.w * ps.x).sum() / total)


def estimate_height(cluster: Cluster, geometry: ScannerGeometry) -> float:
    """Step-top height: topmost particle minus the half-aperture smear.

    The correction is depth * tan(mirror_aperture / 2), clamped so the
    estimate never goes below ground.
    """
    y_top = float(cluster.particles.y.max())
    depth = estimate_depth(cluster)
    correction = depth * math.tan(math.radians(geometry.mirror_aperture / 2.0))
    return max(y_top - correction, 0.0)


def reconstruct_staircase(clusters: list[Cluster],
                          geometry: ScannerGeometry) -> StairEstimate:
    """Order clusters by depth and difference their tops into riser heights.

    An empty cluster list yields an empty estimate (the "no stairs
    detected" outcome), not an error.
    """
    dims = sorted((estimate_depth(c), estimate_height(c, geometry)) for c in clusters)
    steps = []
    prev_top = 0.0
    for depth, top in dims:
        steps.append(StepEstimate(depth=depth, top_height=top,
                                  riser_height=top - prev_top))
        prev_top = top
    return StairEstimate(steps=steps)


def true_steps(scene: StairScene) -> list[tuple[float, float]]:
    """Ground-truth (riser-face depth, top height) per step, depth ascending."""
    return [(x, top) for x, _, top in scene.step_table()]


def compare_to_ground_truth(estimate: StairEstimate, scene: StairScene) -> ErrorReport:
    """Absolute per-step depth/top-height errors, paired in depth order.

    A step-count mismatch is reported via the `matched` flag with empty
    error lists rather than raised.
    """
    truth = true_steps(scene)
    report = ErrorReport(matched=estimate.num_steps == len(truth),
                         num_detected=estimate.num_steps, num_true=len(truth))
    if report.matched:
        for est, (true_depth, true_top) in zip(estimate.steps, truth):
            report.depth_errors.append(abs(est.depth - true_depth))
            report.height_errors.append(abs(est.top_height - true_top))
    return report
