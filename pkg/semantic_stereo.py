"""
Semantic Stereo - Main Entry Point
==================================
Joint disparity estimation and semantic segmentation for epipolar satellite image pairs.

Usage:
    python semantic_stereo.py train --config config.yaml [--seed 3]
    python semantic_stereo.py eval --checkpoint ./output/checkpoints/final.pt --data ./synth --report report.txt
    python semantic_stereo.py predict --checkpoint final.pt --left L.tif --right R.tif --out ./pred
    python semantic_stereo.py synth --out ./synth --count 8 --seed 0
    python semantic_stereo.py ablate --config config.yaml --out ./output/ablation

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

import argparse
import logging
import sys
from pathlib import Path

from config import LoggingConfig, RunConfig, load_config
from data.synthetic import synth_dataset
from data.us3d import Us3dFolder, write_manifest, write_us3d_sample
from exporter.excel_writer import ExcelWriter
from exporter.report_writer import write_report
from models import ConfigError, SemanticStereoError
from training.ablation import run_ablation
from training.checkpoint import load_checkpoint
from training.evaluator import evaluate, predict
from training.trainer import train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s | %(message)s"
LOG_DATEFMT = "%H:%M:%S"
QUIET_LOGGERS = ("PIL", "matplotlib")

logger = logging.getLogger("semantic_stereo")


def setup_logging(settings: LoggingConfig | None = None):
    """
    Route every module logger through one console handler and an optional run log.

    The console shows settings.level and above; the run log keeps DEBUG records.
    Python warnings (e.g. from deterministic torch kernels) are captured into the log.
    """
    settings = settings or LoggingConfig(log_file="")
    level = getattr(logging, settings.level.upper(), logging.INFO)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT)

    console = logging.StreamHandler(sys.stdout)
    console.setLevel(level)
    console.setFormatter(formatter)
    handlers = [console]
    if settings.log_file:
        Path(settings.log_file).parent.mkdir(parents=True, exist_ok=True)
        run_log = logging.FileHandler(settings.log_file, encoding="utf-8")
        run_log.setLevel(logging.DEBUG)
        run_log.setFormatter(logging.Formatter(LOG_FORMAT))
        handlers.append(run_log)

    root_level = logging.DEBUG if settings.log_file else level
    logging.basicConfig(level=root_level, handlers=handlers, force=True)
    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
    logging.captureWarnings(True)


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with EXIT_USAGE instead of argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_args(argv=None):
    """Parse command line arguments."""
    parser = _ArgumentParser(
        description="Semantic Stereo - joint disparity and semantic segmentation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def with_config(sub):
        sub.add_argument(
            "--config", "-c",
            default="config.yaml",
            help="Path to configuration file (default: config.yaml)",
        )
        return sub

    p = with_config(subparsers.add_parser("train", help="Train a model"))
    p.add_argument("--seed", type=int, default=None, help="Overrides optimizer.seed")

    p = with_config(subparsers.add_parser("eval", help="Evaluate a checkpoint on a US3D-format folder"))
    p.add_argument("--checkpoint", required=True, help="Checkpoint file")
    p.add_argument("--data", required=True, help="Folder of <id>_LEFT_RGB.tif ... rasters")
    p.add_argument("--manifest", default=None, help="Optional split manifest of sample ids")
    p.add_argument(
        "--report",
        default=None,
        help="Text report path, an .xlsx is written next to it (default: output.report_path)",
    )

    p = with_config(subparsers.add_parser("predict", help="Predict one image pair"))
    p.add_argument("--checkpoint", required=True, help="Checkpoint file")
    p.add_argument("--left", required=True, help="Left RGB raster")
    p.add_argument("--right", required=True, help="Right RGB raster")
    p.add_argument("--out", required=True, help="Output folder")

    p = with_config(subparsers.add_parser("synth", help="Write synthetic samples in US3D naming"))
    p.add_argument("--out", required=True, help="Output folder")
    p.add_argument("--count", type=int, default=None, help="Number of samples (default: data.synth_count)")
    p.add_argument("--seed", type=int, default=None, help="First seed (default: data.synth_seed)")

    p = with_config(subparsers.add_parser("ablate", help="Run the module ablation study"))
    p.add_argument("--out", required=True, help="Output folder")
    p.add_argument("--seeds", type=int, nargs="+", default=[0], help="Optimizer seeds (default: 0)")

    return parser.parse_args(argv)


def banner(title: str):
    logger.info("")
    logger.info("=" * 60)
    logger.info(f"  {title}")
    logger.info("=" * 60)


def cmd_train(args, cfg: RunConfig) -> int:
    if args.seed is not None:
        cfg.optimizer.seed = args.seed
    banner(f"TRAINING ({cfg.optimizer.steps} steps, seed {cfg.optimizer.seed})")
    result = train(cfg)

    banner("TRAINING COMPLETE")
    logger.info(f"  Config hash:   {cfg.config_hash()[:12]}")
    logger.info(f"  Checkpoint:    {result.checkpoint_path}")
    logger.info(f"  Loss curve:    {result.loss_curve_path}")
    if result.records:
        logger.info(f"  Final loss:    {result.records[-1]['total']:.5f}")
    return EXIT_OK


def cmd_eval(args, cfg: RunConfig) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    model_cfg = checkpoint.config.model
    samples = Us3dFolder(
        args.data,
        manifest=args.manifest,
        remap=checkpoint.config.data.class_remap,
        d_range=(model_cfg.d_min, model_cfg.d_max),
    )
    if len(samples) == 0:
        logger.warning(f"No samples found in {args.data}. Exiting.")
        return EXIT_OK

    banner(f"EVALUATION ({len(samples)} samples)")
    report = evaluate(checkpoint, samples)
    report_file = Path(args.report or cfg.output.report_path)
    report_path = write_report(report, report_file)
    ExcelWriter(report_file.parent).write_report(report, report_file.with_suffix(".xlsx").name)

    banner("EVALUATION COMPLETE")
    logger.info(f"  Report:        {report_path}")
    return EXIT_OK


def cmd_predict(args, cfg: RunConfig) -> int:
    banner("PREDICTION")
    paths = predict(args.checkpoint, args.left, args.right, args.out)
    for role, path in paths.items():
        logger.info(f"  {role:<16} {path}")
    return EXIT_OK


def cmd_synth(args, cfg: RunConfig) -> int:
    data = cfg.data
    count = data.synth_count if args.count is None else args.count
    seed = data.synth_seed if args.seed is None else args.seed
    if count < 1:
        raise ConfigError(f"--count must be >= 1, got {count}")

    banner(f"SYNTHETIC DATA ({count} samples from seed {seed})")
    samples = synth_dataset(
        count,
        seed=seed,
        size=tuple(data.synth_size),
        num_objects=data.synth_objects,
        disp_range=(data.synth_d_min, data.synth_d_max),
        num_classes=cfg.model.num_classes,
    )
    for sample in samples:
        write_us3d_sample(sample, args.out, data.class_remap)
    manifest = Path(args.out) / "manifest.txt"
    write_manifest([s.id for s in samples], manifest)
    logger.info(f"  Wrote {len(samples)} samples and {manifest}")
    return EXIT_OK


def cmd_ablate(args, cfg: RunConfig) -> int:
    banner(f"ABLATION ({len(args.seeds)} seed(s))")
    result = run_ablation(cfg, args.out, seeds=args.seeds)

    banner("ABLATION COMPLETE")
    for line in result.table.to_string(index=False).splitlines():
        logger.info(f"  {line}")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "synth": cmd_synth,
    "ablate": cmd_ablate,
}


def main(argv=None) -> int:
    """Main execution flow."""
    args = parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        setup_logging()
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE

    setup_logging(cfg.logging)
    logger.info("=" * 60)
    logger.info("  Semantic Stereo")
    logger.info("  Joint Disparity and Semantic Segmentation")
    logger.info("=" * 60)

    try:
        return COMMANDS[args.command](args, cfg)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE
    except SemanticStereoError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILURE
    except Exception:
        logger.exception("Unexpected failure")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
