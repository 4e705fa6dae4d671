"""Command-line entry point: ``fungisynth {generate,verify,selftest}``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from .config import ConfigError, SimulationConfig, load_config
from .dataset import MANIFEST_NAME, generate_dataset, verify_dataset
from .goodness import DEFAULT_SAMPLES, run_selftest

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

log = logging.getLogger("fungisynth")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fungisynth", description="Synthetic time-aligned fungal growth image generator.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="increase verbosity (-v prints the resolved config, -vv per-frame logs)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{generate,verify,selftest}")

    gen = sub.add_parser("generate", help="run the simulation and write frames + manifest.json")
    gen.add_argument("--config", help="JSON config file; omitted keys take defaults")
    gen.add_argument("--seed", type=int, help="master seed (overrides config.seed)")
    gen.add_argument("--frames", type=int, help="total number of frames N (>= 2)")
    gen.add_argument("--spores", type=int, help="initial spore count S0")
    gen.add_argument("--out", help="output directory")
    gen.add_argument("--width", type=int, help="image width in pixels")
    gen.add_argument("--height", type=int, help="image height in pixels")
    gen.add_argument("--workers", type=int, default=1,
                     help="frame-rendering processes; output is identical for any value (default 1)")

    ver = sub.add_parser("verify", help="re-check hashes and population invariants of a dataset")
    ver.add_argument("--manifest", required=True, help=f"path to {MANIFEST_NAME}")

    st = sub.add_parser("selftest", help="goodness-of-fit tests for every sampling law")
    st.add_argument("--seed", type=int, default=2024, help="seed for the test streams (default 2024)")
    st.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                    help=f"samples per law (default {DEFAULT_SAMPLES})")
    return parser


def resolve_config(args: argparse.Namespace) -> SimulationConfig:
    config = load_config(args.config) if args.config else SimulationConfig()
    overrides = {
        "seed": args.seed,
        "total_frames": args.frames,
        "lifecycle.initial_spores": args.spores,
        "output_dir": args.out,
        "render.width": args.width,
        "render.height": args.height,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return config.with_overrides(**overrides) if overrides else config


def _generate(args) -> int:
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"fungisynth: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.workers < 1:
        print("fungisynth: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.verbose >= 1:
        print(json.dumps(config.to_dict(), indent=2), file=sys.stderr)
    try:
        manifest = generate_dataset(config, workers=args.workers)
    except Exception as exc:  # noqa: BLE001 - any failure here is a runtime error
        print(f"fungisynth: generation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(manifest.frames)} frames to {config.output_dir}")
    return EXIT_OK


def _verify(args) -> int:
    report = verify_dataset(args.manifest)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_RUNTIME


def _selftest(args) -> int:
    if args.samples < 1:
        print("fungisynth: --samples must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    results = run_selftest(seed=args.seed, n=args.samples)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    logging.basicConfig(
        level=logging.DEBUG if args.verbose >= 2 else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler = {"generate": _generate, "verify": _verify, "selftest": _selftest}[args.command]
    return handler(args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
