import json
from pathlib import Path

import pytest

from concordia.cli import main as cli_main


@pytest.fixture(scope="session")
def pipeline_dir(tmp_path_factory) -> Path:
    """One small, fully processed corpus shared by the service and CLI tests:
    fixtures -> ingest -> harmonize -> match."""
    root = tmp_path_factory.mktemp("pipeline")
    data = root / "data"
    steps = [
        [
            "make-fixtures",
            "--data-dir",
            str(data),
            "--clusters",
            "20",
            "--conflicts",
            "5",
            "--match-size",
            "40",
            "--artwork-pairs",
            "6",
        ],
        ["ingest", "--config", str(data / "config.json")],
        ["harmonize", "--config", str(data / "config.json")],
        [
            "match",
            "--config",
            str(data / "config.json"),
            "--external",
            str(data / "incoming_candidates.jsonl"),
        ],
    ]
    for step in steps:
        rc = cli_main(step)
        assert rc == 0, f"pipeline step failed: {step}"
    return data


@pytest.fixture()
def pipeline_config(pipeline_dir):
    from concordia.config import RunConfig

    return RunConfig.load(pipeline_dir / "config.json")


def load_manifest(data_dir: Path) -> dict:
    return json.loads((data_dir / "manifest.json").read_text(encoding="utf-8"))
