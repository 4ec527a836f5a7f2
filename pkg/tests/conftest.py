import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from culturank import synth  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "data")
CITY_DIR = os.path.join(DATA, "city")


@pytest.fixture(scope="session")
def city_paths():
    return {k: os.path.join(CITY_DIR, v) for k, v in {
        "taxonomy": "taxonomy.json", "neighborhoods": "neighborhoods.geojson",
        "records": "records.ndjson", "census": "census.csv"}.items()}


@pytest.fixture(scope="session")
def world():
    return synth.taxonomy_world(seed=0)


@pytest.fixture(scope="session")
def world_paths(world, tmp_path_factory):
    return world.write(str(tmp_path_factory.mktemp("world")))


def write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return str(path)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
