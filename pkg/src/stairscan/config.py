"""Pipeline configuration: dataclasses, YAML loading, validation.

The config file is a YAML document with sections scene / radar /
scanner / cfar / filter / clustering plus top-level seed, output_dir
and export flags; every section is optional and falls back to the
defaults below (which reproduce the reference setup: 94 GHz carrier,
10 GHz bandwidth, 200 samples, 0.22 m mirror offset, 0.40 m mount
height, 5 deg aperture, 0.25 deg steps over -20..50 deg, 1000
particles in 10 modes, rho = 0.5, 10 cm redundancy threshold).
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from .detector import FilterConfig
from .radar_math import RadarParams, ScannerGeometry
from .range_processing import CfarParams
from .scene_sim import Reflectivity, Scatterer, StairScene


class ConfigError(Exception):
    """Invalid or unreadable configuration; carries all violations found."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class ClusteringConfig:
    rho: float = 0.5
    tau_max: float = 0.20              # m, link distance at rho = 0
    redundancy: str = "and"            # 'and' (default) or 'or' axis predicate
    redundancy_threshold: float = 0.10  # m

    def validate(self) -> list[str]:
        bad = []
        if not 0.0 <= self.rho <= 1.0:
            bad.append(f"clustering.rho must be in [0, 1] (got {self.rho})")
        if not self.tau_max > 0:
            bad.append(f"clustering.tau_max must be > 0 (got {self.tau_max})")
        if self.redundancy not in ("and", "or"):
            bad.append(f"clustering.redundancy must be 'and' or 'or' (got {self.redundancy!r})")
        if not self.redundancy_threshold > 0:
            bad.append(
                f"clustering.redundancy_threshold must be > 0 "
                f"(got {self.redundancy_threshold})"
            )
        return bad


@dataclass(frozen=True)
class ExportFlags:
    profiles: bool = False
    map: bool = False
    particles: bool = False
    overlay: bool = False


def default_scene() -> StairScene:
    """Three 28 cm x 17 cm steps, 0.5 m in front of the radar."""
    return StairScene(standoff=0.5, steps=[(0.28, 0.17)] * 3, noise_floor=1e-4)


@dataclass
class PipelineConfig:
    scene: StairScene = field(default_factory=default_scene)
    radar: RadarParams = field(default_factory=RadarParams)
    scanner: ScannerGeometry = field(default_factory=ScannerGeometry)
    cfar: CfarParams = field(default_factory=CfarParams)
    cfar_enabled: bool = True
    filter: FilterConfig = field(default_factory=FilterConfig)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    seed: int = 0
    output_dir: str = "out"
    export: ExportFlags = field(default_factory=ExportFlags)


def validate_config(config: PipelineConfig) -> list[str]:
    """Every invariant violation across all sub-configs, not just the first.

    Cross-component checks (scene vs scanner/radar) only run when the
    components they depend on are themselves valid, so one bad field
    yields exactly one violation.
    """
    bad = []
    radar_bad = config.radar.validate()
    scanner_bad = config.scanner.validate()
    bad += radar_bad
    bad += scanner_bad
    bad += config.scene.validate(
        geometry=None if scanner_bad else config.scanner,
        radar=None if radar_bad else config.radar,
    )
    bad += config.cfar.validate()
    bad += config.filter.validate()
    bad += config.clustering.validate()
    if not isinstance(config.seed, int):
        bad.append(f"seed must be an integer (got {config.seed!r})")
    return bad


def _build(cls, data: dict, section: str):
    if not isinstance(data, dict):
        raise ConfigError([f"section '{section}' must be a mapping (got {type(data).__name__})"])
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError([f"unknown key(s) in '{section}': {', '.join(sorted(unknown))}"])
    return cls(**data)


def _build_scene(data: dict) -> StairScene:
    data = dict(data)
    if "steps" in data:
        try:
            data["steps"] = [(float(t), float(r)) for t, r in data["steps"]]
        except (TypeError, ValueError):
            raise ConfigError(["scene.steps must be a list of [tread, riser] pairs"])
    if "reflectivity" in data:
        data["reflectivity"] = _build(Reflectivity, data["reflectivity"], "scene.reflectivity")
    if "clutter" in data:
        try:
            data["clutter"] = [Scatterer(float(x), float(y), float(a))
                               for x, y, a in data["clutter"]]
        except (TypeError, ValueError):
            raise ConfigError(["scene.clutter must be a list of [x, y, amplitude] triples"])
    return _build(StairScene, data, "scene")


def config_from_dict(raw: dict) -> PipelineConfig:
    if not isinstance(raw, dict):
        raise ConfigError(["config document must be a mapping"])
    known = {"scene", "radar", "scanner", "cfar", "filter", "clustering",
             "seed", "output_dir", "export"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError([f"unknown top-level key(s): {', '.join(sorted(unknown))}"])
    cfg = PipelineConfig()
    if "scene" in raw:
        cfg.scene = _build_scene(raw["scene"])
    if "radar" in raw:
        cfg.radar = _build(RadarParams, raw["radar"], "radar")
    if "scanner" in raw:
        cfg.scanner = _build(ScannerGeometry, raw["scanner"], "scanner")
    if "cfar" in raw:
        cfar = dict(raw["cfar"])
        cfg.cfar_enabled = bool(cfar.pop("enabled", True))
        cfg.cfar = _build(CfarParams, cfar, "cfar")
    if "filter" in raw:
        cfg.filter = _build(FilterConfig, raw["filter"], "filter")
    if "clustering" in raw:
        cfg.clustering = _build(ClusteringConfig, raw["clustering"], "clustering")
    if "seed" in raw:
        cfg.seed = raw["seed"]
    if "output_dir" in raw:
        cfg.output_dir = str(raw["output_dir"])
    if "export" in raw:
        cfg.export = _build(ExportFlags, raw["export"], "export")
    return cfg


def load_config(path: str | Path) -> PipelineConfig:
    """Parse a YAML config file; raises ConfigError on unreadable input."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError([f"cannot read config file {path}: {e}"])
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError([f"config file {path} is not valid YAML: {e}"])
    try:
        return config_from_dict(raw if raw is not None else {})
    except TypeError as e:
        raise ConfigError([f"config file {path}: {e}"])


def with_overrides(config: PipelineConfig, seed: int | None = None,
                   no_cfar: bool = False, init_kind: str | None = None,
                   iterations: int | None = None,
                   output_dir: str | None = None,
                   dump: list[str] | None = None) -> PipelineConfig:
    """Apply CLI flag overrides on top of a loaded config."""
    if seed is not None:
        config.seed = seed
    if no_cfar:
        config.cfar_enabled = False
    if init_kind is not None:
        config.filter = replace(config.filter, init_kind=init_kind)
    if iterations is not None:
        config.filter = replace(config.filter, iterations=iterations)
    if output_dir is not None:
        config.output_dir = output_dir
    if dump:
        config.export = ExportFlags(**{name: True for name in dump})
    return config
