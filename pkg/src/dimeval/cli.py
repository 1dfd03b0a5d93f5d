"""Command-line entry point.

One subcommand per workflow: distort, energy, map, correlate, calibrate,
predict, elo, simdet, serve, plus sweep for the temperature ablation.
Exit codes: 0 success, 1 validation or usage problem, 2 I/O or file-format
problem.  ``--json`` switches stdout to a stable machine-readable schema.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import detection, distort, elo, energy, heatmaps, simdet, stats
from .errors import FormatError, UndefinedCorrelationError, UsageError, ValidationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2

SWEEP_TEMPERATURES = (0.1, 0.01, 0.001, 0.0001)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for I/O here.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(args: argparse.Namespace, payload: dict, lines: list[str]) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_distort(args: argparse.Namespace) -> None:
    if args.full_grid:
        specs = distort.full_grid(seed=args.seed)
    else:
        specs = [distort.DistortionSpec.parse(key, seed=args.seed) for key in args.spec]
    manifest = distort.synthesize_dataset(args.input_dir, args.output_dir, specs)
    payload = {
        "input_images": len(manifest["input_images"]),
        "specs": sorted(manifest["entries"]),
        "variants": sum(len(e["files"]) for e in manifest["entries"].values()),
        "output_dir": str(args.output_dir),
    }
    _emit(
        args,
        payload,
        [
            f"rendered {payload['variants']} variants "
            f"({payload['input_images']} images x {len(specs)} specs) into {args.output_dir}"
        ],
    )


def _cmd_energy(args: argparse.Namespace) -> None:
    config = energy.EnergyConfig(temperature=args.temperature)
    report = energy.score_directory(args.heatmaps, config=config, n_threads=args.threads)
    if args.out:
        energy.save_report(report, args.out)
    lines = [f"{image_id} {report.per_image[image_id]:.9g}" for image_id in sorted(report.per_image)]
    lines.append(f"dataset_energy {report.dataset_energy:.9g}")
    _emit(args, json.loads(report.to_json()), lines)


def _cmd_map(args: argparse.Namespace) -> None:
    gt = detection.load_ground_truth(args.gt)
    det = detection.load_detections(args.det)
    result = detection.evaluate_map(gt, det)
    if args.out:
        Path(args.out).write_text(result.to_json() + "\n")
    lines = [f"category {cat} AP {ap:.6f}" for cat, ap in sorted(result.per_category.items(), key=lambda kv: str(kv[0]))]
    lines += [f"AP50 {result.ap50:.6f}", f"mAP {result.mAP:.6f}"]
    _emit(args, json.loads(result.to_json()), lines)


def _cmd_correlate(args: argparse.Namespace) -> None:
    series = stats.load_pairs(args.pairs)
    r = stats.pearson(series)
    rho, p = stats.spearman(series)
    if args.exact:
        p = stats.spearman_exact_pvalue(series)
    payload = {"n": len(series), "pearson": r, "spearman": rho, "spearman_p": p}
    _emit(
        args,
        payload,
        [f"n={len(series)}", f"pearson r={r:.6f}", f"spearman rho={rho:.6f} p={p:.6g}"],
    )


def _cmd_calibrate(args: argparse.Namespace) -> None:
    series = stats.load_pairs(args.pairs)
    model = stats.fit_calibration(series)
    Path(args.out).write_text(model.to_json() + "\n")
    payload = json.loads(model.to_json())
    _emit(
        args,
        payload,
        [
            f"slope {model.slope:.9g}",
            f"intercept {model.intercept:.9g}",
            f"r_squared {model.r_squared:.6f}",
            f"model written to {args.out}",
        ],
    )


def _cmd_predict(args: argparse.Namespace) -> None:
    model = stats.CalibrationModel.from_json(Path(args.model).read_text())
    value = stats.predict_map(model, args.energy)
    _emit(args, {"energy": args.energy, "predicted_map": value}, [f"predicted_map {value:.6f}"])


def _cmd_elo(args: argparse.Namespace) -> None:
    votes = elo.load_votes(args.votes)
    table = elo.replay(
        votes,
        baseline_method=args.baseline,
        initial_rating=args.init,
        k_decisive=args.k,
        k_both=args.k_both,
    )
    attributes = [args.attribute] if args.attribute else list(elo.ATTRIBUTES)
    boards = {}
    lines = [f"votes {len(votes)}"]
    for attribute in attributes:
        rows = elo.leaderboard(table, attribute)
        boards[attribute] = [
            {"method": method, "rating": rating, "votes": count} for method, rating, count in rows
        ]
        lines.append(f"[{attribute}]")
        for method, rating, count in rows:
            lines.append(f"  {method} {rating:.2f} ({count} votes)")
    _emit(args, {"votes": len(votes), "baseline": args.baseline, "leaderboards": boards}, lines)


def _cmd_simdet(args: argparse.Namespace) -> None:
    gt = detection.load_ground_truth(args.gt)
    spec = simdet.SimSpec(severity=args.severity, seed=args.seed)
    out_dir = Path(args.out_heatmaps)
    out_dir.mkdir(parents=True, exist_ok=True)
    rendered = simdet.render_heatmaps(gt, spec)
    for maps in rendered:
        heatmaps.write_heatmaps(maps, out_dir / f"{maps.image_id}.lmeh")
    dets = simdet.render_detections(gt, spec)
    detection.save_detections(dets, args.out_dets)
    payload = {
        "severity": args.severity,
        "seed": args.seed,
        "images": len(rendered),
        "detections": len(dets.detections),
        "out_heatmaps": str(out_dir),
        "out_dets": str(args.out_dets),
    }
    _emit(
        args,
        payload,
        [
            f"severity {args.severity}: wrote {len(rendered)} heatmap files to {out_dir}, "
            f"{len(dets.detections)} detections to {args.out_dets}"
        ],
    )


def _load_map_values(path: str | Path) -> dict[str, float]:
    values: dict[str, float] = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        label, _, raw = line.rpartition(",")
        try:
            value = float(raw)
        except ValueError:
            if not values and line_no == 1:  # header row
                continue
            raise ValidationError(f"{path}:{line_no}: expected label,value") from None
        if not label:
            raise ValidationError(f"{path}:{line_no}: expected label,value")
        values[label.strip()] = value
    return values


def _cmd_sweep(args: argparse.Namespace) -> None:
    if len(args.heatmaps) < 2:
        raise UndefinedCorrelationError("correlation is undefined for a single dataset point")
    map_values = _load_map_values(args.map_values)
    labels = [Path(d).name for d in args.heatmaps]
    missing = [label for label in labels if label not in map_values]
    if missing:
        raise ValidationError(f"no map value for heatmap dirs: {missing}")
    y = [map_values[label] for label in labels]

    rows = []
    lines = []
    for temperature in args.temperatures:
        config = energy.EnergyConfig(temperature=temperature)
        x = [
            energy.score_directory(d, config=config, n_threads=args.threads).dataset_energy
            for d in args.heatmaps
        ]
        series = stats.PairedSeries(tuple(zip(labels, x, y)))
        r = stats.pearson(series)
        rho, p = stats.spearman(series)
        rows.append({"temperature": temperature, "pearson": r, "spearman": rho, "spearman_p": p})
        lines.append(f"T={temperature:g} pearson={r:.6f} spearman={rho:.6f} p={p:.6g}")
    if args.out:
        csv_lines = ["temperature,pearson,spearman,spearman_p"]
        csv_lines += [
            f"{row['temperature']:g},{row['pearson']:.9g},{row['spearman']:.9g},{row['spearman_p']:.9g}"
            for row in rows
        ]
        Path(args.out).write_text("\n".join(csv_lines) + "\n")
    _emit(args, {"rows": rows}, lines)


def _cmd_serve(args: argparse.Namespace) -> None:
    import uvicorn

    from . import service

    manifest = service.load_manifest(args.manifest)
    app = service.create_app(
        manifest,
        args.votes_log,
        seed=args.seed,
        rate_limit_per_minute=args.rate_limit,
        static_dir=args.static_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dimeval", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("distort", help="render the degradation x exposure grid")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--spec", action="append", metavar="DEG:LEVEL:EXPOSURE")
    group.add_argument("--full-grid", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_distort)

    p = sub.add_parser("energy", help="score a directory of heatmap files")
    p.add_argument("--heatmaps", required=True)
    p.add_argument("--temperature", type=float, default=energy.DEFAULT_TEMPERATURE)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="write the report as JSON")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_energy)

    p = sub.add_parser("map", help="COCO-protocol mean average precision")
    p.add_argument("--gt", required=True)
    p.add_argument("--det", required=True)
    p.add_argument("--out", default=None, help="write the report as JSON")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_map)

    p = sub.add_parser("correlate", help="Pearson and Spearman over label,x,y rows")
    p.add_argument("--pairs", required=True)
    p.add_argument("--exact", action="store_true", help="exact permutation p-value (n <= 10)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("calibrate", help="fit the energy-to-mAP line")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("predict", help="predict mAP from energy with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("elo", help="replay a vote log into leaderboards")
    p.add_argument("--votes", required=True)
    p.add_argument("--attribute", choices=elo.ATTRIBUTES, default=None)
    p.add_argument("--baseline", default="input")
    p.add_argument("--k", type=float, default=elo.K_DECISIVE)
    p.add_argument("--k-both", type=float, default=elo.K_BOTH)
    p.add_argument("--init", type=float, default=elo.INITIAL_RATING)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_elo)

    p = sub.add_parser("simdet", help="synthesize detector outputs from ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--severity", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-heatmaps", required=True)
    p.add_argument("--out-dets", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_simdet)

    p = sub.add_parser(
        "sweep", aliases=["sweep-temperature"], help="energy-vs-mAP correlation per temperature"
    )
    p.add_argument("--heatmaps", nargs="+", required=True, metavar="DIR")
    p.add_argument("--map-values", required=True, help="label,value rows; labels are dir names")
    p.add_argument("--temperatures", nargs="+", type=float, default=list(SWEEP_TEMPERATURES))
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="write a CSV of per-temperature rows")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("serve", help="run the pairwise voting service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--votes-log", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rate-limit", type=int, default=None, help="max votes per client per minute")
    p.add_argument("--static-dir", default=None, help="serve a frontend from this directory")
    p.set_defaults(func=_cmd_serve)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (ValidationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())
