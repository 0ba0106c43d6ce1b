"""Command-line pipeline orchestration.

Stages communicate through files under the configured output directory,
so each subcommand can be re-run independently; identical inputs always
rewrite byte-identical artifacts.

Exit codes: 0 success, 2 validation/input error, 1 unexpected runtime
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import signal
import sys
from dataclasses import replace
from pathlib import Path

from .. import cohort, environment, forest, heatmap, sensing
from ..errors import GeoBehaveError
from ..geocode import CellBounds
from .config import DEFAULT_PORT, PipelineConfig, load_config, write_config


def _read(path: Path) -> bytes:
    return Path(path).read_bytes()


def _write_json(path: Path, obj) -> None:
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def _load_inputs(cfg: PipelineConfig):
    accel = sensing.parse_streams(_read(cfg.accel_csv), "accel")
    gps = sensing.parse_streams(_read(cfg.gps_csv), "gps")
    taxonomy = environment.load_taxonomy(_read(cfg.taxonomy))
    pois = environment.ingest_pois(_read(cfg.poi_csv), taxonomy)
    return accel, gps, taxonomy, pois


def cmd_ingest(cfg: PipelineConfig) -> int:
    accel, gps, taxonomy, pois = _load_inputs(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(
        cfg.ingest_report,
        {
            "individuals_accel": len(accel),
            "individuals_gps": len(gps),
            "accel_samples": sum(len(v) for v in accel.values()),
            "gps_fixes": sum(len(v) for v in gps.values()),
            "pois": len(pois),
            "taxonomy_tags": len(taxonomy),
        },
    )
    print(f"wrote {cfg.ingest_report}")
    return 0


def cmd_extract(cfg: PipelineConfig) -> int:
    accel, gps, _, _ = _load_inputs(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["individual_id", "indicator", "active_hours", "active_days", "residence", "eligible"]
    )
    n_eligible = 0
    for ident in sorted(set(accel) | set(gps)):
        rec = sensing.build_individual_record(
            ident,
            accel.get(ident, []),
            gps.get(ident, []),
            cfg.activity,
            cfg.geohash_length,
        )
        ok = sensing.eligible(rec, cfg.activity)
        n_eligible += ok
        writer.writerow(
            [
                ident,
                "" if rec.indicator is None else repr(rec.indicator),
                repr(rec.active_hours),
                rec.active_days,
                rec.residence or "",
                int(ok),
            ]
        )
    cfg.individuals_csv.write_text(buf.getvalue(), encoding="utf-8")
    print(f"wrote {cfg.individuals_csv} ({n_eligible} eligible)")
    return 0


def cmd_dataset(cfg: PipelineConfig) -> int:
    taxonomy = environment.load_taxonomy(_read(cfg.taxonomy))
    pois = environment.ingest_pois(_read(cfg.poi_csv), taxonomy)
    if not cfg.individuals_csv.exists():
        raise GeoBehaveError(
            f"{cfg.individuals_csv} not found; run the extract stage first"
        )

    by_cell: dict[str, list[float]] = {}
    with open(cfg.individuals_csv, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            if row["eligible"] != "1" or not row["indicator"]:
                continue
            by_cell.setdefault(row["residence"], []).append(float(row["indicator"]))

    env_by_cell = environment.env_attributes_by_cell(pois, cfg.geohash_length)
    profiles = [
        cohort.GeohashProfile(
            geohash=code,
            env=env_by_cell.get(code, environment.EnvAttributes.zero()),
            residents=len(indicators),
            behavioral_attribute=cohort.behavioral_attribute(indicators),
        )
        for code, indicators in sorted(by_cell.items())
    ]
    ds = cohort.build_dataset(profiles)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    cohort.save_dataset(ds, cfg.dataset_csv, cfg.dataset_meta)
    print(f"wrote {cfg.dataset_csv} ({len(ds)} cells, threshold {ds.threshold:.1f})")
    return 0


def cmd_train(cfg: PipelineConfig) -> int:
    ds = cohort.load_dataset(cfg.dataset_csv, cfg.dataset_meta)
    grid = cfg.grid or forest.default_grid(cfg.seed)
    best_hp, report = forest.cross_validate(ds, grid, k_folds=10, seed=cfg.seed)
    model = forest.fit_forest(ds, best_hp)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    forest.save_model(model, cfg.model_json)
    _write_json(
        cfg.cv_report,
        {
            "selected": _hp_dict(best_hp),
            "configs": [
                {"hyperparams": _hp_dict(hp), "mean_accuracy": acc}
                for hp, acc in report
            ],
            "k_folds": 10,
            "seed": cfg.seed,
        },
    )
    print(
        f"wrote {cfg.model_json} "
        f"(n_trees={best_hp.n_trees}, max_depth={best_hp.max_depth}, "
        f"criterion={best_hp.criterion}, fingerprint={model.fingerprint[:12]})"
    )
    return 0


def _hp_dict(hp: forest.ForestHyperparams) -> dict:
    return {
        "n_trees": hp.n_trees,
        "max_depth": hp.max_depth,
        "criterion": hp.criterion,
        "bootstrap": hp.bootstrap,
        "features_per_split": hp.features_per_split,
        "seed": hp.seed,
    }


def cmd_evaluate(cfg: PipelineConfig) -> int:
    ds = cohort.load_dataset(cfg.dataset_csv, cfg.dataset_meta)
    model = forest.load_model(cfg.model_json)
    cm = forest.loo_evaluate(ds, model.hyperparams)
    report = forest.metrics(cm)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(
        cfg.evaluation_json,
        {
            "n": cm.total(),
            "confusion": {"tll": cm.tll, "tlh": cm.tlh, "thl": cm.thl, "thh": cm.thh},
            "metrics": {
                "accuracy": report.accuracy,
                "low": {
                    "precision": report.low.precision,
                    "recall": report.low.recall,
                    "f1": report.low.f1,
                },
                "high": {
                    "precision": report.high.precision,
                    "recall": report.high.recall,
                    "f1": report.high.f1,
                },
                "degenerate": report.degenerate,
            },
            "hyperparams": _hp_dict(model.hyperparams),
            "model_fingerprint": model.fingerprint,
        },
    )
    print(
        f"wrote {cfg.evaluation_json} "
        f"(loo accuracy {report.accuracy:.4f} on {cm.total()} cells)"
    )
    return 0


def cmd_heatmap(cfg: PipelineConfig, args) -> int:
    model = forest.load_model(cfg.model_json)
    taxonomy = environment.load_taxonomy(_read(cfg.taxonomy))
    pois = environment.ingest_pois(_read(cfg.poi_csv), taxonomy)
    observed = []
    if cfg.dataset_csv.exists() and cfg.dataset_meta.exists():
        ds = cohort.load_dataset(cfg.dataset_csv, cfg.dataset_meta)
        observed = [
            cohort.GeohashProfile(
                geohash=ds.geohashes[i],
                env=environment.EnvAttributes(*(int(v) for v in ds.env[i])),
                residents=1,
                behavioral_attribute=float(ds.attrs[i]),
                label=cohort.INT_TO_LABEL[int(ds.y[i])],
            )
            for i in range(len(ds))
        ]
    bbox = CellBounds(
        lat_min=args.min_lat,
        lat_max=args.max_lat,
        lon_min=args.min_lon,
        lon_max=args.max_lon,
    )
    length = args.length or cfg.geohash_length
    h = heatmap.generate(bbox, length, model, pois, observed)
    if args.stdout == "geojson":
        sys.stdout.buffer.write(heatmap.export_geojson(h))
        return 0
    if args.stdout == "svg":
        sys.stdout.buffer.write(heatmap.render_svg(h, args.svg_width))
        return 0
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    cfg.heatmap_geojson.write_bytes(heatmap.export_geojson(h))
    cfg.heatmap_svg.write_bytes(heatmap.render_svg(h, args.svg_width))
    print(f"wrote {cfg.heatmap_geojson} and {cfg.heatmap_svg} ({len(h.cells)} cells)")
    return 0


def cmd_synth(args) -> int:
    out_dir = Path(args.out)
    spec = cohort.SynthSpec(
        seed=args.seed,
        n_geohashes=args.cells,
        residents_per_cell=args.residents,
        noise_sd=args.noise_sd,
        base_rate=args.base_rate,
    )
    if args.noise_frac is not None:
        clean = cohort.generate_synthetic(
            cohort.SynthSpec(
                seed=args.seed,
                n_geohashes=args.cells,
                residents_per_cell=args.residents,
                noise_sd=0.0,
                base_rate=args.base_rate,
            )
        )
        spec = cohort.SynthSpec(
            seed=args.seed,
            n_geohashes=args.cells,
            residents_per_cell=args.residents,
            noise_sd=args.noise_frac * clean.effect_range,
            base_rate=args.base_rate,
        )
    synth = cohort.generate_synthetic(spec)
    paths = synth.write(out_dir)
    write_config(
        out_dir / "config.json",
        {
            "accel_csv": "accel.csv",
            "gps_csv": "gps.csv",
            "poi_csv": "pois.csv",
            "taxonomy": "taxonomy.txt",
            "out_dir": ".",
            "geohash_length": cohort.SYNTH_GEOHASH_LENGTH,
            "seed": args.seed,
        },
    )
    print(
        f"wrote synthetic cohort to {out_dir} "
        f"({spec.n_geohashes} cells, noise_sd={spec.noise_sd:.2f}, "
        f"truth at {paths['truth'].name})"
    )
    return 0


def cmd_serve(cfg: PipelineConfig, args) -> int:
    import uvicorn

    from .service import ServicePaths, create_app

    app = create_app(
        ServicePaths(
            model_json=cfg.model_json,
            poi_csv=cfg.poi_csv,
            taxonomy=cfg.taxonomy,
            dataset_csv=cfg.dataset_csv,
            dataset_meta=cfg.dataset_meta,
        ),
        default_length=cfg.geohash_length,
    )

    def handle_sighup(signum, frame):
        app.state.reload()

    try:
        signal.signal(signal.SIGHUP, handle_sighup)
    except (ValueError, AttributeError):
        pass  # non-main thread or platform without SIGHUP

    port = int(os.environ.get("GEOBEHAVE_PORT", args.port or DEFAULT_PORT))
    uvicorn.run(app, host=args.host, port=port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geobehave",
        description="Population activity level prediction from POI counts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--out", help="override the configured output directory")
        p.add_argument("--seed", type=int, help="override the configured seed")

    for name, doc in [
        ("ingest", "parse and validate the raw inputs"),
        ("extract", "compute indicators, residences and eligibility"),
        ("dataset", "aggregate eligible individuals into the cell dataset"),
        ("train", "cross-validated hyperparameter search and final fit"),
        ("evaluate", "leave-one-out confusion matrix and metrics"),
    ]:
        add_config(sub.add_parser(name, help=doc))

    p = sub.add_parser("heatmap", help="export GeoJSON/SVG predictions for a bbox")
    add_config(p)
    p.add_argument("--min-lat", type=float, required=True)
    p.add_argument("--min-lon", type=float, required=True)
    p.add_argument("--max-lat", type=float, required=True)
    p.add_argument("--max-lon", type=float, required=True)
    p.add_argument("--length", type=int, help="cell precision (default: config)")
    p.add_argument("--svg-width", type=int, default=800)
    p.add_argument(
        "--stdout",
        choices=("geojson", "svg"),
        help="emit one format to standard output instead of writing files",
    )

    p = sub.add_parser("synth", help="generate a seeded synthetic cohort")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="synth_out")
    p.add_argument("--cells", type=int, default=42)
    p.add_argument("--residents", type=int, default=3)
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument(
        "--noise-frac",
        type=float,
        help="noise_sd as a fraction of the planted effect range",
    )
    p.add_argument("--base-rate", type=float, default=343.9)

    p = sub.add_parser("serve", help="start the HTTP service")
    add_config(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args)
        cfg = load_config(Path(args.config))
        if args.out:
            cfg.out_dir = Path(args.out).resolve()
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.grid = [replace(hp, seed=args.seed) for hp in cfg.grid]
        if args.command == "ingest":
            return cmd_ingest(cfg)
        if args.command == "extract":
            return cmd_extract(cfg)
        if args.command == "dataset":
            return cmd_dataset(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        if args.command == "heatmap":
            return cmd_heatmap(cfg, args)
        if args.command == "serve":
            return cmd_serve(cfg, args)
        raise AssertionError(f"unhandled command {args.command}")
    except (GeoBehaveError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
