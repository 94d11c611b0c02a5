"""Command-line front end: ``qcrtomo {points,region,tomography,validate}``.

Exit codes: 0 success, 1 validation or inference failure, 2 configuration or
I/O error. CSV goes to ``<out>/<scenario>_<command>.csv`` when an output
directory is configured, otherwise to stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import tomography
from ._kernels import BACKENDS
from .config import ConfigError, ScenarioConfig, load_config, parse_pair
from .network import ConfigurationError, SlotOutcome, SlotRequest, sweep_mixed
from .plot import region_svg
from .qcr import estimate_reference_points, region_polyline

log = logging.getLogger("qcrtomo")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
Z_LIMIT = 4.0
EXACT_TOL = 1e-12

POINTS_HEADER = ["scenario_id", "root", "pair", "point", "x", "y", "se_x", "se_y", "trials", "seed"]
REGION_HEADER = ["scenario_id", "fraction", "x", "y", "se_x", "se_y"]
TOMOGRAPHY_HEADER = ["scenario_id", "channel", "loss_estimate", "se", "source_root", "combined", "status"]
VALIDATE_HEADER = ["scenario_id", "coordinate", "mc", "se", "closed_form", "enumeration", "z", "status"]


class OutputError(Exception):
    pass


def fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.12g}"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(cfg: ScenarioConfig, name: str, text: str, stdout) -> Optional[Path]:
    if cfg.out_dir is None:
        stdout.write(text)
        return None
    return _write(Path(cfg.out_dir) / f"{cfg.scenario_id}_{name}", text)


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    log.info("wrote %s", path)
    return path


def _pair_label(pair: tuple[int, int]) -> str:
    return f"{pair[0]}-{pair[1]}"


def cmd_points(cfg: ScenarioConfig, stdout=sys.stdout, backend: Optional[str] = None) -> int:
    pair = cfg.leaf_pair()
    region = estimate_reference_points(
        cfg.network(), cfg.root, pair, cfg.trials, cfg.seed, workers=cfg.workers, backend=backend
    )
    rows = [
        [cfg.scenario_id, cfg.root, _pair_label(pair), name, fmt(p.x), fmt(p.y), fmt(p.se_x), fmt(p.se_y), cfg.trials, cfg.seed]
        for name, p in region.points().items()
    ]
    _emit(cfg, "points.csv", _csv_text(POINTS_HEADER, rows), stdout)
    return EXIT_OK


def cmd_region(cfg: ScenarioConfig, stdout=sys.stdout, backend: Optional[str] = None) -> int:
    network = cfg.network()
    j, k = cfg.leaf_pair()
    region = estimate_reference_points(network, cfg.root, (j, k), cfg.trials, cfg.seed, cfg.workers, backend)
    samples = sweep_mixed(network, (j, k), cfg.sweep_fractions(), cfg.trials, cfg.seed, cfg.workers, backend)
    region = region.with_boundary(samples)
    rows = [[cfg.scenario_id, fmt(s.fraction), fmt(s.x), fmt(s.y), fmt(s.se_x), fmt(s.se_y)] for s in samples]
    _emit(cfg, "region.csv", _csv_text(REGION_HEADER, rows), stdout)
    if cfg.out_dir is not None:
        svg = region_svg(
            [(cfg.scenario_id, region_polyline(region))],
            x_label=f"request rate N{cfg.root}-N{k}",
            y_label=f"request rate N{cfg.root}-N{j}",
            title=f"{cfg.scenario_id}: root N{cfg.root}, {cfg.trials} trials",
        )
        _write(Path(cfg.out_dir) / f"{cfg.scenario_id}_region.svg", svg)
    return EXIT_OK


def cmd_tomography(cfg: ScenarioConfig, stdout=sys.stdout, backend: Optional[str] = None) -> int:
    report = tomography.full_tomography(
        cfg.network(), cfg.trials, cfg.seed, all_roots=cfg.all_roots, workers=cfg.workers, backend=backend
    )
    rows = []
    for channel, entry in sorted(report.channels.items()):
        for est in entry.estimates:
            rows.append([cfg.scenario_id, channel, fmt(est.loss), fmt(est.se), est.source_root, 0, "ok"])
        for failure in entry.failures:
            rows.append([cfg.scenario_id, channel, "", "", "", 0, f"undefined:{failure.point}"])
        if entry.combined is not None:
            c = entry.combined
            rows.append([cfg.scenario_id, channel, fmt(c.loss), fmt(c.se), "", 1, "ok"])
        else:
            rows.append([cfg.scenario_id, channel, "", "", "", 1, "undefined"])
            log.warning("QC%d: loss not identifiable (%s)", channel, "; ".join(map(str, entry.failures)))
    _emit(cfg, "tomography.csv", _csv_text(TOMOGRAPHY_HEADER, rows), stdout)
    return EXIT_OK if any(e.ok for e in report.channels.values()) else EXIT_FAILED


def _z(mc: float, se: float, expected: float) -> float:
    if se > 0.0:
        return (mc - expected) / se
    return 0.0 if abs(mc - expected) <= EXACT_TOL else math.inf


def cmd_validate(cfg: ScenarioConfig, stdout=sys.stdout, backend: Optional[str] = None) -> int:
    network = cfg.network()
    j, k = cfg.leaf_pair()
    region = estimate_reference_points(network, cfg.root, (j, k), cfg.trials, cfg.seed, cfg.workers, backend)
    analytic = tomography.closed_form_for(network, (j, k), cfg.root)
    forward = tomography.enumerate_exact(network.rerooted(cfg.root), SlotRequest(j, k))
    reverse = tomography.enumerate_exact(network.rerooted(cfg.root), SlotRequest(k, j))
    checks = [
        ("A.y", region.A.y, region.A.se_y, analytic.A[1], forward[SlotOutcome.FULFILLED_PRIMARY]),
        ("B.x", region.B.x, region.B.se_x, analytic.B[0], forward[SlotOutcome.FULFILLED_BACKUP]),
        ("C.y", region.C.y, region.C.se_y, analytic.C[1], reverse[SlotOutcome.FULFILLED_BACKUP]),
        ("D.x", region.D.x, region.D.se_x, analytic.D[0], reverse[SlotOutcome.FULFILLED_PRIMARY]),
    ]
    rows = []
    failed = False
    for name, mc, se, closed, exact in checks:
        z = _z(mc, se, closed)
        problems = []
        if abs(z) > Z_LIMIT:
            problems.append("mc-deviation")
        if abs(closed - exact) > EXACT_TOL:
            problems.append("closed-form-mismatch")
        failed = failed or bool(problems)
        rows.append([cfg.scenario_id, name, fmt(mc), fmt(se), fmt(closed), fmt(exact), fmt(z), "+".join(problems) or "ok"])
    _emit(cfg, "validate.csv", _csv_text(VALIDATE_HEADER, rows), stdout)
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS = {
    "points": (cmd_points, "estimate the reference points A-D"),
    "region": (cmd_region, "sweep the frontier between the corners and draw it as SVG"),
    "tomography": (cmd_tomography, "infer every channel's loss via re-rooted extractions"),
    "validate": (cmd_validate, "compare Monte Carlo, closed form and exact enumeration"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcrtomo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario file (dotted key = value)")
        p.add_argument("--trials", type=int, help="trials per run (default from config, else 10000)")
        p.add_argument("--seed", type=int, help="master seed, unsigned 64-bit")
        p.add_argument("--root", type=int, help="root node id")
        p.add_argument("--pair", help="leaf pair j,k (j on the y axis)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int, help="parallel trial workers")
        p.add_argument("--backend", choices=BACKENDS, help="trial kernel backend")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    handler, _ = COMMANDS[args.command]
    try:
        cfg = load_config(args.config)
        pair = parse_pair(args.pair, "--pair") if args.pair else None
        cfg = cfg.override(
            trials=args.trials, seed=args.seed, root=args.root, pair=pair, out_dir=args.out, workers=args.workers
        )
        return handler(cfg, stdout=stdout, backend=args.backend)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, OutputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
