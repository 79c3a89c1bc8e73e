#!/usr/bin/env python3
"""Generate a synthetic street scene and push it through the whole pipeline.

Writes everything under ./demo_out: the oracle scene files, token stream,
GeoJSON trajectories, and an analytics report. Start the calibration service
on the result with:

    topview serve --scene-dir demo_out/scenes --port 8000
"""

import json
from pathlib import Path

from topview import synth
from topview.cli import main

OUT = Path("demo_out")


def build_scenario() -> synth.Scenario:
    cam = synth.camera_at((0.0, 0.0, 6.5), yaw_deg=0.0, pitch_deg=18.0)
    agents = (
        synth.Agent(1, "person", ((-2.0, 8.0), (-2.0, 38.0)), 1.4, synth.Footprint(0.4, 0.4, 1.7)),
        synth.Agent(2, "person", ((-1.4, 9.0), (-1.4, 38.0)), 1.5, synth.Footprint(0.4, 0.4, 1.7)),
        synth.Agent(3, "car", ((2.0, 10.0), (2.0, 45.0)), 6.0, synth.Footprint(4.2, 1.8, 1.5)),
        synth.Agent(4, "bicycle", ((0.8, 12.0), (0.8, 40.0)), 3.5, synth.Footprint(1.8, 0.6, 1.6)),
    )
    return synth.Scenario(
        camera=cam, agents=agents, duration=240, fps=12.0,
        image_width=640.0, image_height=360.0,
    )


def run() -> None:
    OUT.mkdir(exist_ok=True)
    scenario_path = OUT / "scenario.json"
    scenario_path.write_text(json.dumps(synth.scenario_to_json(build_scenario()), indent=2))

    scene_dir = OUT / "scenes" / "demo"
    assert main(["synth", "--scenario", str(scenario_path), "--out-dir", str(scene_dir)]) == 0

    calib = OUT / "calibration.json"
    calib.write_text(json.dumps({
        "z_value": 2.0, "x_value": 0.0, "meters_per_unit": 0.43,
        "camera_lat": 51.5074, "camera_lon": -0.1278, "heading": 0.0,
    }))

    tokens = OUT / "tokens.ndjson"
    assert main([
        "project",
        "--detections", str(scene_dir / "detections.ndjson"),
        "--vp", str(scene_dir / "vp.json"),
        "--image-size", "640x360",
        "--calib", str(calib),
        "--out-tokens", str(tokens),
        "--out-geojson", str(OUT / "trajectories.geojson"),
        "--geojson-mode", "linestrings",
    ]) == 0

    assert main([
        "analyze", "--tokens", str(tokens), "--calib", str(calib),
        "--grid", "1.0", "--out", str(OUT / "report.json"),
    ]) == 0

    report = json.loads((OUT / "report.json").read_text())
    print(json.dumps(report, indent=2))
    print(f"\noutputs in {OUT.resolve()}")


if __name__ == "__main__":
    run()
