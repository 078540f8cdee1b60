"""Command-line entry point: one reproducible pipeline run per invocation.

Exit codes: 0 success, 2 configuration error, 3 no stairs detected,
4 internal failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config, with_overrides
from .exports import write_outputs
from .pipeline import PipelineOutput, run_pipeline

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NO_STAIRS = 3
EXIT_INTERNAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stairscan",
        description="Simulate a mirror-scanned FMCW radar over a staircase "
                    "scene, detect the steps and estimate their dimensions.",
    )
    parser.add_argument("--config", required=True, help="YAML scene/pipeline config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--no-cfar", action="store_true",
                        help="skip CFAR thresholding (raw intensity map)")
    parser.add_argument("--init", choices=["uniform", "gmm"], default=None,
                        help="particle initialization scheme")
    parser.add_argument("--iterations", type=int, default=None,
                        help="resampling iterations (default: 2 with CFAR, 5 without)")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--dump", action="append", default=[],
                        choices=["profiles", "map", "particles", "overlay"],
                        help="extra artifacts to write (repeatable)")
    return parser


def print_summary(output: PipelineOutput) -> None:
    est, rep = output.estimate, output.report
    print(f"detected steps : {est.num_steps} (ground truth {rep.num_true})")
    for i, step in enumerate(est.steps, start=1):
        line = (f"  step {i}: depth {step.depth:7.4f} m   "
                f"top {step.top_height:7.4f} m   riser {step.riser_height:7.4f} m")
        if rep.matched:
            line += (f"   |err| depth {rep.depth_errors[i - 1] * 100:5.2f} cm"
                     f" height {rep.height_errors[i - 1] * 100:5.2f} cm")
        print(line)
    if output.filter_result is not None:
        fr = output.filter_result
        print(f"convergence    : {fr.convergence:.3f} after {fr.iterations} iterations "
              f"(history {', '.join(f'{m:.3f}' for m in fr.history)})")
    print(f"cluster counts : {output.cluster_counts} (clustered / size-filtered / final)")
    print(f"wall time      : {output.elapsed:.2f} s")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        config = with_overrides(config, seed=args.seed, no_cfar=args.no_cfar,
                                init_kind=args.init, iterations=args.iterations,
                                output_dir=args.out, dump=args.dump)
        output = run_pipeline(config)
    except ConfigError as e:
        print("configuration error:", file=sys.stderr)
        for v in e.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except Exception as e:  # noqa: BLE001 - report and exit nonzero
        print(f"internal failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL

    out_dir = write_outputs(output, config)
    print_summary(output)
    print(f"results        : {out_dir / 'results.json'}")
    if output.estimate.num_steps == 0:
        print("no stairs detected")
        return EXIT_NO_STAIRS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
