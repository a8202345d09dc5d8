"""Every schema in schemas/ is validated against real writer output."""

import json
import shutil
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator

from sabersim.cli import main
from sabersim.core import Side
from sabersim.dataio import save_bout_file, save_manifest, save_transcript
from sabersim.simulator import RandomPolicy, SimConfig, run_touch

from tests.conftest import toy_skills
from tests.test_cli import write_archetype_bout

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


def load_schema(name: str) -> dict:
    return json.loads((SCHEMA_DIR / name).read_text())


def validate(schema: dict, instance) -> None:
    Draft202012Validator.check_schema(schema)
    Draft202012Validator(schema).validate(instance)


def validate_def(schema: dict, def_name: str, instance) -> None:
    # the JSONL schemas keep their line shapes under $defs with no
    # top-level constraints, so a $ref merge selects one line type
    validate({**schema, "$ref": f"#/$defs/{def_name}"}, instance)


def jsonl_lines(path: Path) -> list[dict]:
    return [json.loads(line) for line in path.read_text().splitlines()]


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("schema_artifacts")
    data = root / "data"
    data.mkdir()

    bout_path = data / "c0.jsonl"
    write_archetype_bout(bout_path, "c0", "ABBA", "AABA")
    shutil.copy(bout_path, data / "t0.jsonl")

    import numpy as np

    lit_path = data / "lit.jsonl"
    save_bout_file(
        lit_path,
        "lit",
        np.full(20, 5.0),
        np.zeros((20, 2, 3)),
        np.full(20, 9.0),
        np.zeros((20, 2, 3)),
        lights=[(4, Side.LEFT)],
        winner=Side.LEFT,
        metadata={"event": "demo"},
    )

    manifest = root / "manifest.json"
    save_manifest(
        manifest, clustering=["data/c0.jsonl"], training=["data/t0.jsonl"]
    )

    embeddings = root / "embed.npz"
    skills = root / "skills.json"
    annotations = root / "annotations.jsonl"
    strategy = root / "strategy.json"
    assert main(["embed", "--manifest", str(manifest), "--role", "clustering",
                 "--out", str(embeddings)]) == 0
    assert main(["cluster", "--embeddings", str(embeddings), "--stage1-k", "2",
                 "--k", "2", "--out", str(skills)]) == 0
    assert main(["annotate", "--manifest", str(manifest), "--role", "training",
                 "--skills", str(skills), "--out", str(annotations)]) == 0
    assert main(["fit", "--manifest", str(manifest), "--role", "training",
                 "--annotations", str(annotations), "--n-actions", "2",
                 "--out", str(strategy)]) == 0

    transcript = root / "touch.jsonl"
    save_transcript(
        transcript,
        run_touch(
            toy_skills([0.4, 1.0, -0.2], finishing={1}),
            SimConfig(seed=6),
            RandomPolicy(3),
            RandomPolicy(3),
        ),
    )

    calib_in = root / "calibration.json"
    calib_in.write_text(json.dumps({
        "schema_version": 1,
        "frames": [
            {
                "frame": 0,
                "lines": [
                    {"line_id": "left_en_garde", "top_px": [5.0, 0.0], "bottom_px": [5.0, 2.0]},
                    {"line_id": "right_en_garde", "top_px": [9.0, 0.0], "bottom_px": [9.0, 2.0]},
                ],
                "borders": {"top": [[0.0, 0.0], [14.0, 0.0]], "bottom": [[0.0, 2.0], [14.0, 2.0]]},
                "fencers": {"left": {"columns": {"6": 2, "7": 1}}, "right": 8.0},
            },
            {"frame": 1, "lines": [], "fencers": {}},
        ],
    }))
    calib_out = root / "calibration_result.json"
    assert main(["calibrate", "--input", str(calib_in), "--out", str(calib_out)]) == 0

    return {
        "bout": bout_path,
        "lit_bout": lit_path,
        "manifest": manifest,
        "skills": skills,
        "annotations": annotations,
        "strategy": strategy,
        "transcript": transcript,
        "calib_in": calib_in,
        "calib_out": calib_out,
    }


def test_bout_lines(artifacts):
    schema = load_schema("bout.schema.json")
    for key in ("bout", "lit_bout"):
        lines = jsonl_lines(artifacts[key])
        validate_def(schema, "header", lines[0])
        for row in lines[1:]:
            validate_def(schema, "frame", row)


def test_manifest(artifacts):
    validate(load_schema("manifest.schema.json"), json.loads(artifacts["manifest"].read_text()))


def test_skill_model_header(artifacts):
    validate(load_schema("skill_model.schema.json"), json.loads(artifacts["skills"].read_text()))


def test_strategy_model(artifacts):
    validate(load_schema("strategy_model.schema.json"), json.loads(artifacts["strategy"].read_text()))


def test_annotations_lines(artifacts):
    schema = load_schema("annotations.schema.json")
    lines = jsonl_lines(artifacts["annotations"])
    validate_def(schema, "header", lines[0])
    for row in lines[1:]:
        validate_def(schema, "row", row)


def test_transcript_lines(artifacts):
    schema = load_schema("transcript.schema.json")
    lines = jsonl_lines(artifacts["transcript"])
    validate_def(schema, "header", lines[0])
    assert lines[0]["n_steps"] == len(lines) - 1
    for row in lines[1:]:
        validate_def(schema, "step", row)


def test_calibration_files(artifacts):
    validate(load_schema("calibration_input.schema.json"), json.loads(artifacts["calib_in"].read_text()))
    validate(load_schema("calibration_result.schema.json"), json.loads(artifacts["calib_out"].read_text()))


def test_schema_rejects_wrong_kind(artifacts):
    doc = json.loads(artifacts["manifest"].read_text())
    doc["kind"] = "bout"
    with pytest.raises(Exception):
        validate(load_schema("manifest.schema.json"), doc)
