"""File outputs: PGM/PPM images, CSV dumps, JSON results and sidecars.

Images use the binary portable-anymap formats so no imaging library is
needed: intensity maps become 16-bit graymaps (power log-scaled over a
60 dB window) with a JSON metadata sidecar, the reconstruction overlay
a 8-bit pixmap with the true staircase in green and the estimate in red.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .dimensioning import StairEstimate, true_steps
from .pipeline import PipelineOutput
from .range_processing import IntensityMap, RangeProfile
from .scene_sim import StairScene

DB_WINDOW = 60.0  # dynamic range of the exported graymap


def write_pgm16(path: Path, imap: IntensityMap) -> None:
    """16-bit binary PGM of the map, log-scaled, plus a .json sidecar."""
    p = imap.power
    peak = float(p.max())
    if peak > 0:
        with np.errstate(divide="ignore"):
            db = 10.0 * np.log10(np.where(p > 0, p / peak, np.nan))
        db = np.where(np.isnan(db), -DB_WINDOW, np.clip(db, -DB_WINDOW, 0.0))
        scaled = ((db + DB_WINDOW) / DB_WINDOW * 65535.0).astype(">u2")
    else:
        scaled = np.zeros_like(p, dtype=">u2")
    # image rows run top-down; the grid's y runs bottom-up
    scaled = scaled[::-1]
    ny, nx = scaled.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{nx} {ny}\n65535\n".encode())
        f.write(scaled.tobytes())
    meta = {
        "extent_m": list(imap.extent),
        "cell_size_m": imap.cell_size,
        "cfar_applied": imap.cfar_applied,
        "floor_power": imap.floor,
        "peak_power": peak,
        "db_window": DB_WINDOW,
    }
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def write_profiles_csv(path: Path, profiles: list[RangeProfile]) -> None:
    with open(path, "w") as f:
        f.write("beam_angle_deg,bin,range_m,power\n")
        for profile in profiles:
            for k, power in enumerate(profile.powers):
                f.write(f"{profile.beam_angle:.4f},{k},{k * profile.bin_width:.6f},"
                        f"{power!r}\n")


def write_particles_csv(path: Path, trajectory) -> None:
    with open(path, "w") as f:
        f.write("iter,x,y,p,w,mode\n")
        for it, ps in enumerate(trajectory, start=1):
            for x, y, p, w, mode in zip(ps.x, ps.y, ps.p, ps.w, ps.mode):
                f.write(f"{it},{x!r},{y!r},{p!r},{w!r},{mode}\n")


def _draw_line(img: np.ndarray, p0, p1, color, scale: float, origin) -> None:
    (x0, y0), (x1, y1) = p0, p1
    n = max(int(np.hypot(x1 - x0, y1 - y0) * scale * 2), 2)
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    h = img.shape[0]
    px = ((xs - origin[0]) * scale).astype(int)
    py = h - 1 - ((ys - origin[1]) * scale).astype(int)
    ok = (px >= 0) & (px < img.shape[1]) & (py >= 0) & (py < h)
    img[py[ok], px[ok]] = color


def write_overlay_ppm(path: Path, estimate: StairEstimate, scene: StairScene) -> None:
    """True staircase outline (green) against the estimated one (red)."""
    truth = true_steps(scene)
    xs = [x for x, _ in truth] + [s.depth for s in estimate.steps] + [0.0]
    tops = [t for _, t in truth] + [s.top_height for s in estimate.steps] + [0.5]
    x_max = max(xs) + 0.4
    y_max = max(tops) + 0.15
    scale = 300.0  # px per meter
    img = np.full((int(y_max * scale) + 1, int(x_max * scale) + 1, 3), 255, dtype=np.uint8)
    origin = (0.0, 0.0)

    green, red = (0, 160, 0), (220, 0, 0)
    prev = (0.0, 0.0)
    for i, ((x, top), (tread, _)) in enumerate(zip(truth, scene.steps)):
        base = prev[1]
        _draw_line(img, (x, base), (x, top), green, scale, origin)
        _draw_line(img, (x, top), (x + tread, top), green, scale, origin)
        prev = (x + tread, top)
    prev_top = 0.0
    for i, step in enumerate(estimate.steps):
        nxt = (estimate.steps[i + 1].depth if i + 1 < len(estimate.steps)
               else step.depth + 0.28)
        _draw_line(img, (step.depth, prev_top), (step.depth, step.top_height),
                   red, scale, origin)
        _draw_line(img, (step.depth, step.top_height), (nxt, step.top_height),
                   red, scale, origin)
        prev_top = step.top_height

    ny, nx = img.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{nx} {ny}\n255\n".encode())
        f.write(img.tobytes())


def results_document(output: PipelineOutput, config: PipelineConfig) -> str:
    """Deterministic JSON results document (no timing or volatile fields)."""
    doc = {
        "seed": config.seed,
        "cfar_enabled": config.cfar_enabled,
        "init_kind": config.filter.init_kind,
        "num_steps": output.estimate.num_steps,
        "steps": [
            {"depth_m": s.depth, "top_height_m": s.top_height,
             "riser_height_m": s.riser_height}
            for s in output.estimate.steps
        ],
        "ground_truth": {
            "matched": output.report.matched,
            "num_true_steps": output.report.num_true,
            "depth_errors_m": output.report.depth_errors,
            "height_errors_m": output.report.height_errors,
            "max_depth_error_m": output.report.max_depth_error,
            "max_height_error_m": output.report.max_height_error,
        },
        "filter": {
            "convergence": (output.filter_result.convergence
                            if output.filter_result else None),
            "convergence_history": (output.filter_result.history
                                    if output.filter_result else []),
            "iterations": (output.filter_result.iterations
                           if output.filter_result else 0),
        },
        "cluster_counts": output.cluster_counts,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_outputs(output: PipelineOutput, config: PipelineConfig) -> Path:
    """Write the results document and any requested dumps; returns the dir."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "results.json").write_text(results_document(output, config))
    if config.export.map:
        write_pgm16(out_dir / "map_raw.pgm", output.map_raw)
        if output.map_used is not output.map_raw:
            write_pgm16(out_dir / "map_cfar.pgm", output.map_used)
    if config.export.profiles:
        write_profiles_csv(out_dir / "profiles.csv", output.profiles)
    if config.export.particles and output.filter_result is not None:
        write_particles_csv(out_dir / "particles.csv", output.filter_result.trajectory)
    if config.export.overlay:
        write_overlay_ppm(out_dir / "overlay.ppm", output.estimate, config.scene)
    return out_dir
