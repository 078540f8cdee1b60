"""Beat signals to range profiles to a world-mapped 2D intensity map.

The range profile is the magnitude-squared FFT of the mean-subtracted
beat signal (mean subtraction plays the role of the DC high-pass; the
lowest three bins are additionally blanked against near-field leakage).
CA-CFAR thresholds each profile adaptively, and the surviving profiles
are painted into a rasterized sagittal-plane power grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radar_math import RadarParams, ScannerGeometry, beam_to_world, range_resolution
from .scene_sim import BeatSignal

BLANKED_LOW_BINS = 3  # minimum-range blanking: bins 0..2 forced to zero


@dataclass
class RangeProfile:
    """Linear power per range bin for one beam; bin k sits at k * bin_width."""

    powers: np.ndarray
    bin_width: float    # m, equals the radar range resolution
    beam_angle: float   # deg


@dataclass(frozen=True)
class CfarParams:
    training_cells: int = 16      # per side
    guard_cells: int = 2          # per side
    false_alarm_rate: float = 1e-3

    def validate(self) -> list[str]:
        bad = []
        if self.training_cells < 1:
            bad.append(f"cfar.training_cells must be >= 1 (got {self.training_cells})")
        if self.guard_cells < 0:
            bad.append(f"cfar.guard_cells must be >= 0 (got {self.guard_cells})")
        if not 0.0 < self.false_alarm_rate < 1.0:
            bad.append(
                f"cfar.false_alarm_rate must be in (0, 1) (got {self.false_alarm_rate})"
            )
        return bad


@dataclass
class IntensityMap:
    """Rasterized sagittal-plane power field.

    power[iy, ix] is the maximum profile power observed in the 1 cm (by
    default) world cell whose lower-left corner is at
    (x_min + ix * cell_size, y_min + iy * cell_size). Cells never hit by
    a (beam, bin) sample carry the scan-minimum power `floor`.
    """

    power: np.ndarray
    x_min: float
    y_min: float
    cell_size: float
    floor: float
    cfar_applied: bool = False

    @property
    def extent(self) -> tuple[float, float, float, float]:
        ny, nx = self.power.shape
        return (self.x_min, self.x_min + nx * self.cell_size,
                self.y_min, self.y_min + ny * self.cell_size)

    def cell_index(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """Grid indices of world points, clipped to the grid."""
        ny, nx = self.power.shape
        ix = np.clip(((np.asarray(x) - self.x_min) / self.cell_size).astype(int), 0, nx - 1)
        iy = np.clip(((np.asarray(y) - self.y_min) / self.cell_size).astype(int), 0, ny - 1)
        return iy, ix

    def power_at(self, x, y) -> np.ndarray:
        iy, ix = self.cell_index(x, y)
        return self.power[iy, ix]

    def cell_centers(self, iy: np.ndarray, ix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return (self.x_min + (np.asarray(ix) + 0.5) * self.cell_size,
                self.y_min + (np.asarray(iy) + 0.5) * self.cell_size)

    def above_floor(self) -> tuple[np.ndarray, np.ndarray]:
        """Indices (iy, ix) of cells carrying more than the floor power."""
        return np.nonzero(self.power > self.floor)


def compute_range_profile(signal: BeatSignal, params: RadarParams) -> RangeProfile:
    """FFT one beat signal into a linear-power range profile.

    The sample mean is removed first (DC suppression), then an
    N_s-point FFT; bin k corresponds to range k * r_res from the radar.
    The lowest BLANKED_LOW_BINS bins are zeroed.
    """
    samples = np.asarray(signal.samples)
    if samples.shape != (params.samples_per_chirp,):
        raise ValueError(
            f"beat signal length {samples.shape} does not match "
            f"samples_per_chirp {params.samples_per_chirp}"
        )
    spectrum = np.fft.fft(samples - samples.mean())
    powers = np.abs(spectrum) ** 2
    powers[:BLANKED_LOW_BINS] = 0.0
    return RangeProfile(powers=powers, bin_width=range_resolution(params),
                        beam_angle=signal.beam_angle)


def ca_cfar(profile: RangeProfile, cfar: CfarParams) -> tuple[np.ndarray, np.ndarray]:
    """Cell-averaging CFAR threshold and detection mask for one profile.

    For each cell under test the noise level is the mean of the training
    cells on both sides, skipping the guard cells and the cell itself;
    the threshold is alpha * mean with alpha = N (Pfa^(-1/N) - 1) for N
    actually-available training cells, which keeps the false-alarm rate
    exact for exponential noise. Edge cells fall back to the one-sided
    window that exists.
    """
    p = np.asarray(profile.powers, dtype=float)
    n = len(p)
    reach = cfar.training_cells + cfar.guard_cells
    if n <= 2 * reach + 1:
        raise ValueError(
            f"profile of {n} cells too short for CFAR window "
            f"(needs > {2 * reach + 1})"
        )
    # the blanked low bins carry no noise estimate; keep them out of the
    # training windows (their zeros would drag thresholds down) and out
    # of the detections
    skip = min(BLANKED_LOW_BINS, n)
    counted = np.arange(n) >= skip
    cs = np.concatenate(([0.0], np.cumsum(np.where(counted, p, 0.0))))
    valid = np.concatenate(([0], np.cumsum(counted)))
    i = np.arange(n)
    # training cells: [i-reach, i-guard-1] and [i+guard+1, i+reach], clipped
    l_lo = np.clip(i - reach, 0, n)
    l_hi = np.clip(i - cfar.guard_cells, 0, n)
    r_lo = np.clip(i + cfar.guard_cells + 1, 0, n)
    r_hi = np.clip(i + reach + 1, 0, n)
    train_sum = (cs[l_hi] - cs[l_lo]) + (cs[r_hi] - cs[r_lo])
    train_cnt = (valid[l_hi] - valid[l_lo]) + (valid[r_hi] - valid[r_lo])
    pfa = cfar.false_alarm_rate
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = train_cnt * (pfa ** (-1.0 / np.maximum(train_cnt, 1)) - 1.0)
        threshold = np.where(train_cnt > 0, alpha * train_sum / np.maximum(train_cnt, 1),
                             np.inf)
    mask = (p > threshold) & (i >= skip)
    return threshold, mask


def apply_cfar_floor(profile: RangeProfile, mask: np.ndarray,
                     floor_value: float | None = None) -> RangeProfile:
    """Replace sub-threshold cells by the scan-minimum power.

    floor_value is the minimum received power over the whole scan; when
    omitted, the profile's own minimum is used.
    """
    p = np.asarray(profile.powers)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != p.shape:
        raise ValueError(f"mask length {mask.shape} != profile length {p.shape}")
    if floor_value is None:
        floor_value = float(p.min())
    return RangeProfile(powers=np.where(mask, p, floor_value),
                        bin_width=profile.bin_width, beam_angle=profile.beam_angle)


def profile_world_samples(profile: RangeProfile, geometry: ScannerGeometry):
    """World-mapped (x, y, power) samples of one profile's usable bins.

    Bins whose range falls short of the mirror offset have no physical
    location and are dropped.
    """
    ranges = np.arange(len(profile.powers)) * profile.bin_width
    usable = ranges >= geometry.mirror_offset
    x, y = beam_to_world(ranges[usable], profile.beam_angle, geometry)
    return x, y, np.asarray(profile.powers)[usable]


def assemble_intensity_map(profiles: list[RangeProfile], geometry: ScannerGeometry,
                           cell_size: float = 0.01,
                           cfar_applied: bool = False) -> IntensityMap:
    """Paint all profiles into one rasterized sagittal-plane power grid.

    Each grid cell takes the maximum power among the samples that fall in
    it; untouched cells carry the scan-minimum power.
    """
    if not profiles:
        raise ValueError("cannot assemble an intensity map from zero profiles")
    floor = min(float(np.min(p.powers)) for p in profiles)
    xs, ys, ps = [], [], []
    for profile in profiles:
        x, y, p = profile_world_samples(profile, geometry)
        xs.append(x)
        ys.append(y)
        ps.append(p)
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    p = np.concatenate(ps)

    x_min, y_min = float(x.min()), float(y.min())
    nx = int(math.floor((float(x.max()) - x_min) / cell_size)) + 1
    ny = int(math.floor((float(y.max()) - y_min) / cell_size)) + 1
    grid = np.full((ny, nx), floor)
    ix = np.minimum(((x - x_min) / cell_size).astype(int), nx - 1)
    iy = np.minimum(((y - y_min) / cell_size).astype(int), ny - 1)
    np.maximum.at(grid, (iy, ix), p)
    return IntensityMap(power=grid, x_min=x_min, y_min=y_min, cell_size=cell_size,
                        floor=floor, cfar_applied=cfar_applied)
