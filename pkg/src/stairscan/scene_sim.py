"""Parametric staircase scenes and FMCW beat-signal synthesis.

A scene is turned into point scatterers (dense samples on riser faces,
one strong scatterer per step edge, weak samples on treads, plus any
configured clutter). For each mirror position the scatterers inside the
beam produce one complex baseband beat signal: each contributes a tone
whose frequency encodes its round-trip range, with amplitude falling as
1/r^2 and a fresh uniform phase per beam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .radar_math import RadarParams, ScannerGeometry, max_range

RISER_SAMPLE_SPACING = 0.005  # m between scatterers along a surface


@dataclass(frozen=True)
class Scatterer:
    x: float          # depth, m
    y: float          # height above ground, m
    amplitude: float  # unitless linear amplitude, >= 0


@dataclass(frozen=True)
class Reflectivity:
    """Amplitude scale per surface class (edge defaults 3x riser, tread 0.2x)."""

    riser: float = 1.0
    edge: float = 3.0
    tread: float = 0.2


@dataclass
class StairScene:
    """Ground-truth staircase plus the noise/clutter model.

    steps is an ordered list of (tread_depth, riser_height) pairs, the
    first riser standing `standoff` meters in front of the radar zero
    position. A floating staircase has no riser faces (open risers).
    """

    standoff: float
    steps: list[tuple[float, float]]
    floating: bool = False
    reflectivity: Reflectivity = field(default_factory=Reflectivity)
    noise_floor: float = 0.0          # linear power per sample component
    clutter: list[Scatterer] = field(default_factory=list)
    rng_seed: int = 0

    def validate(self, geometry: ScannerGeometry | None = None,
                 radar: RadarParams | None = None) -> list[str]:
        bad = []
        if not self.steps:
            bad.append("scene.steps must be non-empty")
        for i, (tread, riser) in enumerate(self.steps):
            if not tread > 0:
                bad.append(f"scene.steps[{i}] tread_depth must be > 0 (got {tread})")
            if not riser > 0:
                bad.append(f"scene.steps[{i}] riser_height must be > 0 (got {riser})")
        if geometry is not None and not self.standoff > geometry.mirror_offset:
            bad.append(
                f"scene.standoff must be > scanner.mirror_offset "
                f"({geometry.mirror_offset} m, got {self.standoff})"
            )
        if radar is not None and not radar.validate() and self.steps:
            extent = self.standoff + sum(t for t, _ in self.steps if t > 0)
            if extent > max_range(radar):
                bad.append(
                    f"scene extent {extent:.3f} m exceeds radar max range "
                    f"{max_range(radar):.3f} m"
                )
        if self.noise_floor < 0:
            bad.append(f"scene.noise_floor must be >= 0 (got {self.noise_floor})")
        for name in ("riser", "edge", "tread"):
            if getattr(self.reflectivity, name) < 0:
                bad.append(f"scene.reflectivity.{name} must be >= 0")
        for i, c in enumerate(self.clutter):
            if c.amplitude < 0:
                bad.append(f"scene.clutter[{i}] amplitude must be >= 0")
        return bad

    def step_table(self) -> list[tuple[float, float, float]]:
        """Per step: (riser face x, base height, top height)."""
        out = []
        x = self.standoff
        base = 0.0
        for tread, riser in self.steps:
            out.append((x, base, base + riser))
            x += tread
            base += riser
        return out


@dataclass(frozen=True)
class BeatSignal:
    """One down-converted chirp: complex baseband samples for one beam."""

    samples: np.ndarray   # complex, length N_s
    beam_angle: float     # deg


def build_scatterers(scene: StairScene, geometry: ScannerGeometry,
                     spacing: float = RISER_SAMPLE_SPACING) -> list[Scatterer]:
    """Point-scatterer realization of a staircase scene.

    Riser faces are sampled every `spacing` meters (endpoints included)
    with amplitude reduced by |cos| of the sight-line angle from the
    mirror center, edges get one strong scatterer each, treads a weak
    constant-amplitude sampling. Floating scenes drop the riser faces.
    Clutter points are passed through verbatim.
    """
    refl = scene.reflectivity
    my = geometry.mount_height
    out: list[Scatterer] = []
    for (riser_x, base_y, top_y), (tread, _) in zip(scene.step_table(), scene.steps):
        if not scene.floating:
            n = int(math.ceil((top_y - base_y) / spacing)) + 1
            for y in np.linspace(base_y, top_y, n):
                incidence = math.atan2(my - y, riser_x)
                out.append(Scatterer(riser_x, float(y), refl.riser * abs(math.cos(incidence))))
        out.append(Scatterer(riser_x, top_y, refl.edge))
        n = int(math.ceil(tread / spacing)) + 1
        for x in np.linspace(riser_x, riser_x + tread, n):
            out.append(Scatterer(float(x), top_y, refl.tread))
    out.extend(scene.clutter)
    return out


def synthesize_beat(scatterers: list[Scatterer], beam_angle: float,
                    params: RadarParams, geometry: ScannerGeometry,
                    rng: np.random.Generator, noise_floor: float = 0.0,
                    dc_scale: float = 10.0) -> BeatSignal:
    """Complex beat signal of one static beam over the given scatterers.

    A scatterer contributes iff its sight line from the mirror center is
    within half the mirror aperture of the beam center and its round-trip
    range (mirror offset + geometric distance) is within max range. Tone
    frequency f_k = 2 r_k B / (c T) puts a scatterer at range r in FFT
    bin r / r_res. Amplitudes decay as 1/r_k^2; each in-beam scatterer
    draws a fresh uniform phase, then complex white noise with per-
    component sigma = sqrt(noise_floor) is added, plus a real DC offset
    of dc_scale times the strongest in-beam amplitude.
    """
    n = params.samples_per_chirp
    t = np.arange(n) * (params.chirp_duration / n)
    samples = np.zeros(n, dtype=complex)
    r_max = max_range(params)
    half_ap = geometry.mirror_aperture / 2.0

    in_beam = []
    for s in scatterers:
        dist = math.hypot(s.x, geometry.mount_height - s.y)
        angle = math.degrees(math.atan2(geometry.mount_height - s.y, s.x))
        r_k = geometry.mirror_offset + dist
        if abs(angle - beam_angle) <= half_ap and r_k <= r_max:
            in_beam.append((r_k, s.amplitude))

    if in_beam:
        r = np.array([rk for rk, _ in in_beam])
        amp = np.array([a for _, a in in_beam]) / r**2
        freq = 2.0 * r * params.bandwidth / (params.speed_of_light * params.chirp_duration)
        phase = rng.uniform(0.0, 2.0 * np.pi, size=len(in_beam))
        samples = (amp[:, None] * np.exp(1j * (2.0 * np.pi * freq[:, None] * t[None, :]
                                               + phase[:, None]))).sum(axis=0)
        samples = samples + dc_scale * amp.max()

    if noise_floor > 0:
        sigma = math.sqrt(noise_floor)
        samples = samples + rng.normal(0.0, sigma, n) + 1j * rng.normal(0.0, sigma, n)

    return BeatSignal(samples=samples, beam_angle=float(beam_angle))
