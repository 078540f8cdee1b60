"""Closed-form FMCW relations and the mirror-scanner beam geometry.

Range resolution and maximum range follow the usual chirp relations

    r_res = c / (2 B)
    r_max = N_s * r_res

and the scanner converts (range along beam, mirror angle) into a world
frame with the origin on the ground directly under the mirror center,
x pointing forward (depth) and y up (height). Mirror angles are degrees,
positive below the horizontal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Radar-engineering convention; keeps r_res = 1.5 cm exact at B = 10 GHz.
SPEED_OF_LIGHT = 3.0e8  # m/s


@dataclass(frozen=True)
class RadarParams:
    """Chirp/waveform constants of the FMCW front end."""

    carrier_freq: float = 94.0e9     # Hz
    bandwidth: float = 10.0e9        # Hz
    samples_per_chirp: int = 200
    chirp_duration: float = 1.0e-3   # s
    speed_of_light: float = SPEED_OF_LIGHT

    def validate(self) -> list[str]:
        """Return human-readable invariant violations (empty when valid)."""
        bad = []
        if not self.carrier_freq > 0:
            bad.append(f"radar.carrier_freq must be > 0 (got {self.carrier_freq})")
        if not self.bandwidth > 0:
            bad.append(f"radar.bandwidth must be > 0 (got {self.bandwidth})")
        if self.samples_per_chirp < 2:
            bad.append(f"radar.samples_per_chirp must be >= 2 (got {self.samples_per_chirp})")
        if not self.chirp_duration > 0:
            bad.append(f"radar.chirp_duration must be > 0 (got {self.chirp_duration})")
        return bad


@dataclass(frozen=True)
class ScannerGeometry:
    """Rotating-mirror scanner layout; defines the world frame."""

    mirror_offset: float = 0.22    # m, radar lens to mirror center
    mount_height: float = 0.40     # m, mirror center above ground
    mirror_aperture: float = 5.0   # deg, full 3 dB beam width after mirror
    angular_step: float = 0.25     # deg per mirror position
    angle_min: float = -20.0       # deg, above horizontal
    angle_max: float = 50.0        # deg, below horizontal

    def validate(self) -> list[str]:
        bad = []
        if not self.angle_min < self.angle_max:
            bad.append(
                f"scanner.angle_min must be < angle_max (got {self.angle_min}, {self.angle_max})"
            )
        if not self.angular_step > 0:
            bad.append(f"scanner.angular_step must be > 0 (got {self.angular_step})")
        if not self.mirror_aperture > 0:
            bad.append(f"scanner.mirror_aperture must be > 0 (got {self.mirror_aperture})")
        if self.mirror_offset < 0:
            bad.append(f"scanner.mirror_offset must be >= 0 (got {self.mirror_offset})")
        return bad

    @property
    def num_beams(self) -> int:
        return int(math.floor((self.angle_max - self.angle_min) / self.angular_step)) + 1

    def beam_angles(self) -> np.ndarray:
        """Mirror positions in degrees, angle_min upward-first to angle_max."""
        return self.angle_min + self.angular_step * np.arange(self.num_beams)


def range_resolution(params: RadarParams) -> float:
    """r_res = c / (2 B), the range spanned by one FFT bin [m]."""
    if not params.bandwidth > 0:
        raise ValueError(f"bandwidth must be > 0 (got {params.bandwidth})")
    return params.speed_of_light / (2.0 * params.bandwidth)


def max_range(params: RadarParams) -> float:
    """r_max = N_s * r_res, the largest detectable range [m]."""
    if params.samples_per_chirp < 1:
        raise ValueError(f"samples_per_chirp must be >= 1 (got {params.samples_per_chirp})")
    return params.samples_per_chirp * range_resolution(params)


def height_resolution(distance: float, angle_deg: float) -> float:
    """h_res = d * tan(theta): vertical travel of the beam footprint at d [m]."""
    if distance < 0:
        raise ValueError(f"distance must be >= 0 (got {distance})")
    if abs(angle_deg) >= 90.0:
        raise ValueError(f"angle must satisfy |theta| < 90 deg (got {angle_deg})")
    return distance * math.tan(math.radians(angle_deg))


def beam_to_world(range_from_radar, beam_angle_deg, geometry: ScannerGeometry):
    """Map a range measurement on a beam into world (x depth, y height) [m].

    The radar-to-mirror path is removed here, once, so every downstream
    consumer sees mirror-corrected coordinates. Accepts scalars or arrays.
    """
    r = np.asarray(range_from_radar, dtype=float) - geometry.mirror_offset
    if np.any(r < 0):
        raise ValueError(
            f"range_from_radar must be >= mirror_offset ({geometry.mirror_offset} m)"
        )
    theta = np.deg2rad(np.asarray(beam_angle_deg, dtype=float))
    x = r * np.cos(theta)
    y = geometry.mount_height - r * np.sin(theta)
    if np.ndim(range_from_radar) == 0 and np.ndim(beam_angle_deg) == 0:
        return float(x), float(y)
    return x, y
