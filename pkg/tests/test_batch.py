"""Batch runs over the bundled samples and scratch directories."""

import json
import logging

import pytest

from jetlie.batch import (
    generate_report,
    process_batch_parallel,
    process_single_file,
    run_batch,
)
from jetlie.config import Config
from jetlie.dsl import parse_input, render_input

SAMPLES = sorted(Config.SAMPLES_DIR.glob("*.jlie"))

FAST_SAMPLES = [
    "degenerate_plane.jlie",
    "free_particle.jlie",
    "jet_bound.jlie",
    "line.jlie",
    "weighted_flows.jlie",
]


@pytest.fixture
def scratch(tmp_path):
    inputs = tmp_path / "inputs"
    inputs.mkdir()
    return inputs, tmp_path / "reports"


def test_samples_are_bundled():
    assert len(SAMPLES) >= 10


@pytest.mark.parametrize("path", SAMPLES, ids=lambda p: p.name)
def test_samples_parse_and_print_back(path):
    job = parse_input(path.read_text(encoding="utf-8"))
    assert parse_input(render_input(job)) == job


@pytest.mark.parametrize("name", FAST_SAMPLES)
def test_fast_samples_succeed(name):
    result = process_single_file(Config.SAMPLES_DIR / name)
    assert result["status"] == "success", result["error"]
    assert result["exit_code"] == 0
    assert result["document"]["input_digest"] == result["input_digest"]


def test_incompatible_sample_is_a_failed_check():
    result = process_single_file(Config.SAMPLES_DIR / "incompatible.jlie")
    assert result["status"] == "failed"
    assert result["exit_code"] == 1
    assert result["document"]["results"]["compatible"] is False


def test_parallel_runs_give_identical_documents(scratch, monkeypatch):
    inputs, _ = scratch
    monkeypatch.setattr(Config, "MAX_WORKERS", 4)
    names = ["line.jlie", "jet_bound.jlie", "degenerate_plane.jlie"]
    paths = []
    for name in names:
        text = (Config.SAMPLES_DIR / name).read_text(encoding="utf-8")
        for copy in range(2):
            path = inputs / f"{copy}_{name}"
            path.write_text(text, encoding="utf-8")
            paths.append(path)
    results = process_batch_parallel(paths)
    serialized = [json.dumps(r["document"], sort_keys=True) for r in results]
    assert serialized[0::2] == serialized[1::2]
    for name, result in zip(names, results[0::2]):
        direct = process_single_file(Config.SAMPLES_DIR / name)
        assert json.dumps(direct["document"], sort_keys=True) == json.dumps(
            result["document"], sort_keys=True
        )


def test_process_single_file_never_raises(scratch):
    inputs, _ = scratch
    broken = inputs / "broken.jlie"
    broken.write_text("manifold { x: 1; }\n", encoding="utf-8")
    result = process_single_file(broken)
    assert result["status"] == "error"
    assert result["exit_code"] == 2
    assert "chi" in result["error"]

    missing = process_single_file(inputs / "missing.jlie")
    assert missing["status"] == "error"
    assert missing["document"] is None


def test_empty_directory(scratch):
    inputs, reports = scratch
    assert run_batch(inputs, reports) == 2
    assert not reports.exists()


def test_batch_writes_report(scratch):
    inputs, reports = scratch
    (inputs / "a_bound.jlie").write_text(
        "job { command: bound; n: 1; m: 1; kappa: 2; theorem1: true; }\n", encoding="utf-8"
    )
    (inputs / "b_broken.jlie").write_text("job { command: bound; }\n", encoding="utf-8")
    assert run_batch(inputs, reports) == 2

    (report_path,) = reports.glob("jetlie_report_*.json")
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert set(report) == {"timestamp", "settings", "summary", "details"}
    assert report["summary"]["total_files"] == 2
    assert report["summary"]["successful"] == 1
    assert report["summary"]["errors"] == 1
    assert [d["input_file"] for d in report["details"]] == ["a_bound.jlie", "b_broken.jlie"]
    assert report["details"][0]["document"]["results"] == {"theorem1_bound": 8}


def test_report_summary_is_logged(tmp_path, caplog):
    logging.getLogger("jetlie").setLevel(logging.INFO)
    with caplog.at_level(logging.INFO, logger="jetlie"):
        generate_report([], tmp_path)
    assert "📊 BATCH COMPLETE" in caplog.text
    assert "Total files: 0" in caplog.text
