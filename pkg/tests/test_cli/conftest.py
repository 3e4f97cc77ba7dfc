import csv
import dataclasses
import json
import logging
import os
from unittest.mock import Mock

import pytest
from click.testing import CliRunner

from hybridsr.perf_models import default_profile


class _PathArgsRunner(CliRunner):
    # click parses argv as strings; accept os.PathLike args from tests
    def invoke(self, cli, args=None, *a, **kw):
        if args is not None and not isinstance(args, str):
            args = [os.fspath(arg) if isinstance(arg, os.PathLike) else arg for arg in args]
        return super().invoke(cli, args, *a, **kw)


@pytest.fixture
def runner():
    return _PathArgsRunner()


@pytest.fixture(autouse=True)
def basic_config(monkeypatch):
    # keep the root logger of the test process untouched
    rv = Mock()
    monkeypatch.setattr(logging, "basicConfig", rv)
    yield rv
    logging.disable(logging.NOTSET)


@pytest.fixture
def scenario_file(tmp_path):
    rv = tmp_path / "scenario.json"
    rv.write_text(
        json.dumps(
            {
                "requests": [
                    {"id": "a", "target_resolution": 128, "lambda": 0.02, "prompt_seed": 1},
                    {"id": "b/2", "target_resolution": 256, "lambda": 0.05, "prompt_seed": 2},
                ],
                "overlap": 4,
            }
        )
    )
    return rv


@pytest.fixture
def infeasible_scenario_file(tmp_path):
    profile = dataclasses.replace(default_profile(), budget_window=1e-9)
    rv = tmp_path / "infeasible.json"
    rv.write_text(json.dumps({"users": 2, "profile": dataclasses.asdict(profile)}))
    return rv


@pytest.fixture
def read_csv():
    def read_csv(path):
        with open(path, newline="") as f:
            return list(csv.DictReader(f))

    return read_csv
