"""Particle-filter plane detection over an intensity map.

Particles (x, y, power, weight) are seeded either uniformly over the
map's above-floor cells or as a Gaussian multi-modal population around
sampled high-intensity cells, then repeatedly weight-normalized and
multinomially resampled until they sit on the high-power structures.
Survivors are grouped by single-linkage clustering and cleaned up by
size, in-cluster outlier, and redundancy rejection; each remaining
cluster is one detected step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.ndimage import distance_transform_edt, maximum_filter
from scipy.spatial.distance import pdist

from .range_processing import IntensityMap

# Convergence bookkeeping: a particle counts as converged when it sits on
# an above-floor cell within CONV_RADIUS of a prominent local maximum of
# the map (local max over a PEAK_WINDOW^2 cell neighborhood, at least
# PEAK_PROMINENCE of the global maximum).
PEAK_WINDOW = 5
PEAK_PROMINENCE = 0.02
CONV_RADIUS = 0.05  # m

GMM_CANDIDATE_QUANTILE = 0.05  # raw maps: mode centers come from the top 5% cells


class EmptyMapError(ValueError):
    """The intensity map offers no above-floor cells to initialize from."""


@dataclass(frozen=True)
class FilterConfig:
    num_particles: int = 1000
    num_modes: int = 10
    mode_sigma: float = 0.05        # m, spread of one initial mode
    iterations: int | None = None   # None: 2 on CFAR-floored maps, else 5
    init_kind: str = "gmm"
    min_mode_separation: float = 0.10  # m, spacing enforced between mode centers

    def validate(self) -> list[str]:
        bad = []
        if not (self.num_particles >= self.num_modes >= 1):
            bad.append(
                f"filter requires num_particles >= num_modes >= 1 "
                f"(got N={self.num_particles}, M={self.num_modes})"
            )
        if not self.mode_sigma > 0:
            bad.append(f"filter.mode_sigma must be > 0 (got {self.mode_sigma})")
        if self.iterations is not None and self.iterations < 1:
            bad.append(f"filter.iterations must be >= 1 (got {self.iterations})")
        if self.init_kind not in ("uniform", "gmm"):
            bad.append(f"filter.init_kind must be 'uniform' or 'gmm' (got {self.init_kind!r})")
        if self.min_mode_separation < 0:
            bad.append(
                f"filter.min_mode_separation must be >= 0 (got {self.min_mode_separation})"
            )
        return bad


@dataclass(frozen=True)
class ParticleSet:
    """A particle population as parallel arrays (value-like, never mutated)."""

    x: np.ndarray
    y: np.ndarray
    p: np.ndarray     # map power at the particle position
    w: np.ndarray     # normalized weight, zeros until normalize_weights
    mode: np.ndarray  # initialization mode tag; zeros for uniform init

    def __len__(self) -> int:
        return len(self.x)

    def take(self, idx) -> "ParticleSet":
        return ParticleSet(self.x[idx], self.y[idx], self.p[idx],
                           self.w[idx], self.mode[idx])

    @classmethod
    def build(cls, x, y, p, mode=None) -> "ParticleSet":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        p = np.asarray(p, dtype=float)
        mode = np.zeros(len(x), dtype=int) if mode is None else np.asarray(mode, dtype=int)
        return cls(x, y, p, np.zeros(len(x)), mode)


@dataclass
class Cluster:
    particles: ParticleSet

    @property
    def size(self) -> int:
        return len(self.particles)

    @property
    def centroid(self) -> tuple[float, float]:
        """Power-weighted mean position (plain mean if all powers are zero)."""
        ps = self.particles
        total = ps.p.sum()
        if total > 0:
            return float((ps.p * ps.x).sum() / total), float((ps.p * ps.y).sum() / total)
        return float(ps.x.mean()), float(ps.y.mean())


@dataclass
class FilterResult:
    particles: ParticleSet
    convergence: float               # final convergence metric
    history: list[float]             # metric after each resampling round
    iterations: int
    trajectory: list[ParticleSet] = field(default_factory=list)

    @property
    def converged_at(self) -> int | None:
        """1-based first iteration with metric >= 0.9, None if never."""
        for i, m in enumerate(self.history):
            if m >= 0.9:
                return i + 1
        return None


def init_uniform(imap: IntensityMap, n: int, rng: np.random.Generator) -> ParticleSet:
    """n particles uniform over the cells carrying more than floor power."""
    iy, ix = imap.above_floor()
    if len(iy) == 0:
        raise EmptyMapError("intensity map is entirely at the floor value")
    if n == 0:
        return ParticleSet.build([], [], [])
    pick = rng.integers(0, len(iy), size=n)
    cx, cy = imap.cell_centers(iy[pick], ix[pick])
    return ParticleSet.build(cx, cy, imap.power[iy[pick], ix[pick]])


def _mode_centers(imap: IntensityMap, cfg: FilterConfig,
                  rng: np.random.Generator) -> np.ndarray:
    """Sample mode centers power-proportionally without replacement.

    On CFAR-floored maps every above-floor cell is already a detection,
    so all of them are candidates; on raw maps only the top
    GMM_CANDIDATE_QUANTILE power cells are. A freshly drawn center blocks
    its min_mode_separation neighborhood so the modes spread over all
    high-intensity structures; blocked cells are re-admitted if the pool
    runs dry.
    """
    iy, ix = imap.above_floor()
    if len(iy) < cfg.num_modes:
        raise EmptyMapError(
            f"only {len(iy)} candidate cells above floor, need {cfg.num_modes} modes"
        )
    powers = imap.power[iy, ix]
    if not imap.cfar_applied:
        k = max(int(math.ceil(GMM_CANDIDATE_QUANTILE * len(powers))), cfg.num_modes)
        order = np.argsort(powers)[::-1][:k]
        iy, ix, powers = iy[order], ix[order], powers[order]
    cx, cy = imap.cell_centers(iy, ix)

    chosen = np.zeros(len(powers), dtype=bool)
    blocked = np.zeros(len(powers), dtype=bool)
    centers = np.empty((cfg.num_modes, 2))
    for m in range(cfg.num_modes):
        pool = ~chosen & ~blocked
        if not pool.any():
            pool = ~chosen
        idx = np.nonzero(pool)[0]
        j = int(rng.choice(idx, p=powers[idx] / powers[idx].sum()))
        centers[m] = (cx[j], cy[j])
        chosen[j] = True
        blocked |= np.hypot(cx - cx[j], cy - cy[j]) < cfg.min_mode_separation
    return centers


def init_gmm(imap: IntensityMap, cfg: FilterConfig,
             rng: np.random.Generator) -> ParticleSet:
    """Gaussian multi-modal initialization around sampled high-power cells.

    Each mode gets an equal share of the particles (remainder padding the
    last mode), spread isotropically with sigma = mode_sigma and clamped
    to the map extent; powers are read at the landed positions and the
    mode tag drives per-mode normalization/resampling later.
    """
    centers = _mode_centers(imap, cfg, rng)
    x_lo, x_hi, y_lo, y_hi = imap.extent
    sizes = [cfg.num_particles // cfg.num_modes] * cfg.num_modes
    sizes[-1] += cfg.num_particles % cfg.num_modes
    xs, ys, tags = [], [], []
    for m, ((cx, cy), size) in enumerate(zip(centers, sizes)):
        offsets = rng.normal(0.0, cfg.mode_sigma, size=(size, 2))
        xs.append(np.clip(cx + offsets[:, 0], x_lo, x_hi))
        ys.append(np.clip(cy + offsets[:, 1], y_lo, y_hi))
        tags.append(np.full(size, m))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    return ParticleSet.build(x, y, imap.power_at(x, y), np.concatenate(tags))


def _scope_groups(ps: ParticleSet, scope: str) -> list[np.ndarray]:
    if scope == "global":
        return [np.arange(len(ps))]
    if scope == "per_mode":
        return [np.nonzero(ps.mode == m)[0] for m in np.unique(ps.mode)]
    raise ValueError(f"scope must be 'global' or 'per_mode' (got {scope!r})")


def normalize_weights(ps: ParticleSet, scope: str = "global") -> ParticleSet:
    """w_i = p_i / sum(p) within each scope group; sums to 1 per group."""
    w = np.zeros(len(ps))
    for idx in _scope_groups(ps, scope):
        total = ps.p[idx].sum()
        if not total > 0:
            raise ValueError(f"all-zero powers in scope group (scope={scope})")
        w[idx] = ps.p[idx] / total
    return replace(ps, w=w)


def resample(ps: ParticleSet, rng: np.random.Generator,
             scope: str = "global") -> ParticleSet:
    """Multinomial resampling by replacement, count-preserving per group."""
    out = []
    for idx in _scope_groups(ps, scope):
        total = ps.w[idx].sum()
        if abs(total - 1.0) > 1e-6:
            raise ValueError(
                f"weights not normalized in scope group (sum={total!r}); "
                "call normalize_weights first"
            )
        out.append(rng.choice(idx, size=len(idx), replace=True, p=ps.w[idx] / total))
    return ps.take(np.concatenate(out) if out else np.array([], dtype=int))


def dedupe(ps: ParticleSet) -> ParticleSet:
    """Collapse exact (x, y, p) duplicates, keeping first occurrences in order."""
    if len(ps) == 0:
        return ps
    key = np.column_stack([ps.x, ps.y, ps.p])
    _, first = np.unique(key, axis=0, return_index=True)
    return ps.take(np.sort(first))


def converged_cells(imap: IntensityMap) -> np.ndarray:
    """Boolean grid marking cells that count as converged-on.

    Prominent peaks are local maxima over a PEAK_WINDOW-cell square that
    are above floor and reach PEAK_PROMINENCE of the global maximum; a
    cell qualifies when it is above floor and within CONV_RADIUS of one.
    """
    p = imap.power
    peaks = ((p == maximum_filter(p, size=PEAK_WINDOW))
             & (p > imap.floor)
             & (p >= PEAK_PROMINENCE * p.max()))
    if not peaks.any():
        return np.zeros_like(peaks)
    dist = distance_transform_edt(~peaks, sampling=imap.cell_size)
    return (dist <= CONV_RADIUS) & (p > imap.floor)


def _drop_dead_groups(ps: ParticleSet, scope: str) -> ParticleSet:
    """Drop scope groups whose powers are all zero (mode landed on the floor)."""
    alive = [idx for idx in _scope_groups(ps, scope) if ps.p[idx].sum() > 0]
    if not alive:
        raise EmptyMapError("no particles landed on above-floor cells")
    if sum(len(idx) for idx in alive) == len(ps):
        return ps
    return ps.take(np.concatenate(alive))


def run_filter(imap: IntensityMap, cfg: FilterConfig, rng: np.random.Generator,
               record_trajectory: bool = False) -> FilterResult:
    """Initialize, then iterate (refresh powers, normalize, resample).

    GMM initialization normalizes and resamples per mode, uniform
    initialization globally. Exact duplicates are collapsed once at the
    end. The per-iteration convergence metric is the fraction of
    particles on converged_cells of the map.
    """
    iterations = cfg.iterations
    if iterations is None:
        iterations = 2 if imap.cfar_applied else 5
    if cfg.init_kind == "gmm":
        ps = init_gmm(imap, cfg, rng)
        scope = "per_mode"
    else:
        ps = init_uniform(imap, cfg.num_particles, rng)
        scope = "global"

    conv = converged_cells(imap)
    history: list[float] = []
    trajectory: list[ParticleSet] = []
    for _ in range(iterations):
        ps = replace(ps, p=imap.power_at(ps.x, ps.y))
        ps = _drop_dead_groups(ps, scope)
        ps = normalize_weights(ps, scope)
        ps = resample(ps, rng, scope)
        iy, ix = imap.cell_index(ps.x, ps.y)
        history.append(float(conv[iy, ix].mean()))
        if record_trajectory:
            trajectory.append(ps)
    ps = dedupe(ps)
    return FilterResult(particles=ps, convergence=history[-1], history=history,
                        iterations=iterations, trajectory=trajectory)


def cluster_particles(ps: ParticleSet, rho: float,
                      tau_max: float = 0.20) -> list[Cluster]:
    """Single-linkage clustering with link distance tau = tau_max * (1 - rho).

    Higher sensitivity rho shrinks the link distance, producing more and
    tighter clusters. Clusters come back ordered by centroid.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0, 1] (got {rho})")
    if len(ps) == 0:
        raise ValueError("cannot cluster an empty particle set")
    tau = tau_max * (1.0 - rho)
    if len(ps) == 1:
        labels = np.array([1])
    else:
        links = linkage(pdist(np.column_stack([ps.x, ps.y])), method="single")
        labels = fcluster(links, t=tau, criterion="distance")
    clusters = [Cluster(ps.take(np.nonzero(labels == lbl)[0]))
                for lbl in np.unique(labels)]
    clusters.sort(key=lambda c: c.centroid)
    return clusters


def reject_small_clusters(clusters: list[Cluster],
                          min_fraction: float = 0.10) -> list[Cluster]:
    """Drop clusters smaller than min_fraction of the mean cluster size."""
    if not clusters:
        return []
    cutoff = min_fraction * float(np.mean([c.size for c in clusters]))
    return [c for c in clusters if not c.size < cutoff]


def remove_in_cluster_outliers(cluster: Cluster, n_mads: float = 3.0) -> Cluster:
    """Drop particles further than n_mads scaled MADs from the median in x or y.

    Never empties the cluster: if everything would be dropped, the
    particle closest to the median survives.
    """
    ps = cluster.particles
    keep = np.ones(len(ps), dtype=bool)
    for v in (ps.x, ps.y):
        med = np.median(v)
        mad = 1.4826 * np.median(np.abs(v - med))
        keep &= np.abs(v - med) <= n_mads * mad
    if not keep.any():
        dev = np.abs(ps.x - np.median(ps.x)) + np.abs(ps.y - np.median(ps.y))
        keep[int(np.argmin(dev))] = True
    return Cluster(ps.take(keep))


def _redundant(a: Cluster, b: Cluster, threshold: float, predicate: str) -> bool:
    dx = abs(a.centroid[0] - b.centroid[0])
    dy = abs(a.centroid[1] - b.centroid[1])
    if predicate == "and":
        return dx < threshold and dy < threshold
    if predicate == "or":
        return dx < threshold or dy < threshold
    raise ValueError(f"redundancy predicate must be 'and' or 'or' (got {predicate!r})")


def reject_redundant_clusters(clusters: list[Cluster], threshold: float = 0.10,
                              predicate: str = "and") -> list[Cluster]:
    """Keep one cluster per redundancy group, preferring the higher one.

    Redundancy groups are connected components of the pairwise predicate
    (both centroid axes closer than the threshold for 'and', either axis
    for 'or'). Ties on height go to the larger, then the nearer cluster.
    Survivors come back sorted by centroid depth.
    """
    n = len(clusters)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if _redundant(clusters[i], clusters[j], threshold, predicate):
                parent[find(i)] = find(j)

    groups: dict[int, list[Cluster]] = {}
    for i, c in enumerate(clusters):
        groups.setdefault(find(i), []).append(c)
    survivors = [max(members, key=lambda c: (c.centroid[1], c.size, -c.centroid[0]))
                 for members in groups.values()]
    survivors.sort(key=lambda c: c.centroid[0])
    return survivors
