"""Command-line pipeline driver.

Subcommands: vp (estimate or echo a vanishing point), project (detections to
token streams and GeoJSON), analyze (violations, occupancy, city aggregation),
synth (emit a synthetic oracle scene), serve (calibration service).

Exit codes: 0 success, 2 estimation failure, 3 input schema error,
4 reference error. Diagnostics go to stderr; data goes to stdout or the
requested output files.

A config file (flat ``key = value`` lines, same names as the long flags with
underscores) supplies defaults; explicit flags override it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analytics, synth
from .bev import CalibrationParams, export_geojson, export_tokens, load_calibration, load_tokens
from .errors import (
    EmptyInput,
    InsufficientSegments,
    MissingFile,
    MissingGeoAnchor,
    NoConsensus,
    ParseError,
    SchemaError,
    TopviewError,
    UnknownCamera,
)
from .geometry import GridParams
from .ingest import RepairConfig, StationaryConfig, TrackerConfig, load_detections
from .pipeline import PipelineConfig, run_pipeline
from .vp import RansacConfig, estimate_vp_ransac, load_segments, load_vp_sidecar

EXIT_OK = 0
EXIT_ESTIMATION = 2
EXIT_SCHEMA = 3
EXIT_REFERENCE = 4


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _parse_image_size(text: str) -> tuple[float, float]:
    try:
        w, h = text.lower().split("x")
        return float(w), float(h)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from exc


def load_config_file(path: str | Path) -> dict[str, str]:
    """Flat key = value lines; '#' starts a comment; quotes optional."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"config line is not key = value: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value.strip("\"'")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topview",
        description="Vectorised bird's-eye-view scenes from street-camera detections",
    )
    parser.add_argument("--config", help="key = value config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p_vp = sub.add_parser("vp", help="estimate a vanishing point or echo a sidecar")
    src = p_vp.add_mutually_exclusive_group(required=True)
    src.add_argument("--segments", help="JSON line-segment file to estimate from")
    src.add_argument("--sidecar", help="vanishing point sidecar file to echo")
    p_vp.add_argument("--image-size", type=_parse_image_size, help="WxH, adds normalized output")
    p_vp.add_argument("--seed", type=int, default=0)
    p_vp.add_argument("--iterations", type=int, default=500)
    p_vp.add_argument("--threshold", type=float, default=2.0)
    p_vp.add_argument("--min-inlier-ratio", type=float, default=0.3)

    p_proj = sub.add_parser("project", help="project detections into BEV token streams")
    p_proj.add_argument("--detections", required=True)
    p_proj.add_argument("--vp", required=True, help="vanishing point sidecar file")
    p_proj.add_argument("--image-size", type=_parse_image_size, required=True)
    p_proj.add_argument("--calib", help="calibration JSON file")
    p_proj.add_argument("--fps", type=float, help="timebase when records carry no t")
    p_proj.add_argument("--out-tokens", required=True)
    p_proj.add_argument("--out-geojson")
    p_proj.add_argument("--geojson-mode", choices=("points", "linestrings"), default="points")
    p_proj.add_argument("--alpha", type=float, default=0.25, help="upper grid line placement")
    p_proj.add_argument("--subdivisions", type=int, default=8)
    p_proj.add_argument("--bev-width", type=float, default=20.0)
    p_proj.add_argument("--bev-depth", type=float, default=40.0)
    p_proj.add_argument("--iou-min", type=float, default=0.3)
    p_proj.add_argument("--max-age", type=int, default=10)
    p_proj.add_argument("--smoothing-window", type=int, default=5)
    p_proj.add_argument("--threshold", type=float, default=2.0, help="violation metres for the summary")

    p_an = sub.add_parser("analyze", help="distance analytics over token files")
    p_an.add_argument("--tokens", nargs="+", required=True)
    p_an.add_argument("--threshold", type=float, default=2.0)
    p_an.add_argument("--min-duration", type=int, default=1)
    p_an.add_argument("--grid", type=float, help="occupancy cell size in metres")
    p_an.add_argument("--sample-fps", type=float, help="downsample streams before analytics")
    p_an.add_argument("--registry", help="camera registry CSV for city aggregation")
    p_an.add_argument("--calib", help="calibration JSON (for metre scaling)")
    p_an.add_argument("--out", required=True)

    p_syn = sub.add_parser("synth", help="emit a synthetic oracle scene")
    p_syn.add_argument("--scenario", required=True)
    p_syn.add_argument("--out-dir", required=True)
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--noise-sigma", type=float, default=0.0)
    p_syn.add_argument("--dropout", type=float, default=0.0)
    p_syn.add_argument("--drop-ids", action="store_true")

    p_srv = sub.add_parser("serve", help="run the calibration service")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--scene-dir", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    # First pass only to locate --config; its values become new defaults for
    # the chosen subcommand (explicit flags still win).
    probe, _ = parser.parse_known_args(argv)
    if probe.config:
        try:
            values = load_config_file(probe.config)
            _apply_config_defaults(parser, probe.command, values)
        except FileNotFoundError:
            return _fail(EXIT_SCHEMA, f"config file not found: {probe.config}")
        except (ParseError, argparse.ArgumentTypeError, ValueError) as exc:
            return _fail(EXIT_SCHEMA, f"config: {exc}")

    args = parser.parse_args(argv)
    try:
        return {
            "vp": cmd_vp,
            "project": cmd_project,
            "analyze": cmd_analyze,
            "synth": cmd_synth,
            "serve": cmd_serve,
        }[args.command](args)
    except (InsufficientSegments, NoConsensus) as exc:
        return _fail(EXIT_ESTIMATION, str(exc))
    except MissingFile as exc:
        return _fail(EXIT_ESTIMATION, f"missing file: {exc}")
    except (SchemaError, ParseError, EmptyInput, MissingGeoAnchor) as exc:
        return _fail(EXIT_SCHEMA, str(exc))
    except UnknownCamera as exc:
        return _fail(EXIT_REFERENCE, str(exc))
    except FileNotFoundError as exc:
        return _fail(EXIT_SCHEMA, f"file not found: {exc.filename}")
    except TopviewError as exc:
        return _fail(EXIT_SCHEMA, str(exc))


def _apply_config_defaults(parser, command: str, values: dict[str, str]) -> None:
    """Install config values as defaults on the active subcommand's parser,
    coercing each through the flag's own type. Keys for other subcommands are
    ignored so one config file can serve the whole tool."""
    sub_action = next(
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    )
    target = sub_action.choices.get(command)
    if target is None:
        return
    by_dest = {a.dest: a for a in target._actions}
    defaults: dict = {}
    for key, raw in values.items():
        action = by_dest.get(key)
        if action is None:
            continue
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.lower() == "true"
        elif action.type is not None:
            defaults[key] = action.type(raw)
        else:
            defaults[key] = raw
    target.set_defaults(**defaults)


def cmd_vp(args) -> int:
    if args.sidecar:
        vp = load_vp_sidecar(args.sidecar)
        report = {"x": vp.x, "y": vp.y, "confidence": vp.confidence, "source": "sidecar"}
    else:
        segments = load_segments(args.segments)
        est = estimate_vp_ransac(
            segments,
            RansacConfig(
                iterations=args.iterations,
                threshold=args.threshold,
                min_inlier_ratio=args.min_inlier_ratio,
                seed=args.seed,
            ),
        )
        report = {
            "x": est.vp.x,
            "y": est.vp.y,
            "confidence": est.vp.confidence,
            "inlier_count": est.inlier_count,
            "segment_count": len(segments),
            "residual_px": est.residual,
            "source": "ransac",
        }
    if args.image_size:
        w, h = args.image_size
        report["x_normalized"] = report["x"] / w
        report["y_normalized"] = report["y"] / h
    print(json.dumps(report))
    return EXIT_OK


def cmd_project(args) -> int:
    try:
        detections = load_detections(args.detections)
    except EmptyInput:
        # An empty stream is a valid (if dull) scene: emit empty outputs.
        Path(args.out_tokens).write_text("")
        if args.out_geojson:
            Path(args.out_geojson).write_text(
                json.dumps({"type": "FeatureCollection", "features": []}) + "\n"
            )
        print("tracks=0 states=0 violations=0 dropped=0", file=sys.stderr)
        return EXIT_OK
    vp = load_vp_sidecar(args.vp)
    calibration = load_calibration(args.calib) if args.calib else CalibrationParams()
    config = PipelineConfig(
        tracker=TrackerConfig(iou_min=args.iou_min, max_age=args.max_age),
        repair=RepairConfig(),
        stationary=StationaryConfig(),
        grid=GridParams(
            alpha=args.alpha,
            subdivisions=args.subdivisions,
            bev_width=args.bev_width,
            bev_depth=args.bev_depth,
        ),
        calibration=calibration,
        smoothing_window=args.smoothing_window,
        fps=args.fps,
    )
    w, h = args.image_size
    result = run_pipeline(detections, vp, w, h, config)

    Path(args.out_tokens).write_text(export_tokens(result.streams))
    if args.out_geojson:
        doc = export_geojson(result.streams, mode=args.geojson_mode)
        Path(args.out_geojson).write_text(json.dumps(doc) + "\n")

    events, violation_count = analytics.detect_violations(
        result.streams, calibration, threshold=args.threshold
    )
    if result.dropped_above_horizon:
        print(
            f"warning: dropped {result.dropped_above_horizon} samples at or above the horizon",
            file=sys.stderr,
        )
    print(
        f"tracks={len(result.streams)} states={sum(len(s.states) for s in result.streams)} "
        f"violations={violation_count} dropped={result.dropped_above_horizon}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_analyze(args) -> int:
    calibration = load_calibration(args.calib) if args.calib else CalibrationParams()
    per_camera: dict[str, dict] = {}
    for token_path in args.tokens:
        path = Path(token_path)
        streams = load_tokens(path.read_text())
        if args.sample_fps:
            streams = analytics.downsample_streams(streams, args.sample_fps)
        events, count = analytics.detect_violations(
            streams, calibration, threshold=args.threshold, min_duration=args.min_duration
        )
        entry: dict = {
            "violation_count": count,
            "violations": [
                {
                    "frame": e.frame,
                    "frame_end": e.frame_end,
                    "t": e.t,
                    "pair": list(e.pair),
                    "distance_m": e.distance,
                }
                for e in events
            ],
        }
        if args.grid:
            grid = analytics.occupancy(streams, cell_size=args.grid)
            entry["occupancy"] = {
                "cell_size": grid.cell_size,
                "total_states": grid.total(),
                "classes": {cls: int(layer.sum()) for cls, layer in grid.counts.items()},
            }
        per_camera[path.stem] = entry

    if args.registry:
        registry = analytics.load_camera_registry(args.registry)
        doc = analytics.aggregate_scenes(
            {cam: entry["violation_count"] for cam, entry in per_camera.items()},
            registry,
        )
    else:
        doc = {
            "cameras": per_camera,
            "total_violations": sum(e["violation_count"] for e in per_camera.values()),
        }
    Path(args.out).write_text(json.dumps(doc) + "\n")
    print(
        f"analyzed {len(per_camera)} token file(s); total violations "
        f"{sum(e['violation_count'] for e in per_camera.values())}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    scenario = synth.load_scenario(args.scenario)
    noise = synth.NoiseParams(
        bbox_sigma=args.noise_sigma,
        dropout=args.dropout,
        drop_ids=args.drop_ids,
        seed=args.seed,
    )
    emitted = synth.emit_scenario(scenario, args.out_dir, noise)
    print(
        json.dumps(
            {
                "detections": str(emitted.detections),
                "vp": str(emitted.vp_sidecar),
                "ground_truth": str(emitted.ground_truth),
                "segments": str(emitted.segments),
                "scene": str(emitted.scene_meta),
            }
        )
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(Path(args.scene_dir))
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
