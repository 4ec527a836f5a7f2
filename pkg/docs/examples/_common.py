"""Shared set-up for the example scripts: a synthetic city written to a temp dir."""

import tempfile

from culturank import ingest, pipeline, synth


def fixture_city():
    """Write the bundled synthetic city and return ``(paths, CityData, census)``."""
    paths = synth.fixture_city().write(tempfile.mkdtemp(prefix="culturank-city-"))
    city = pipeline.load_city(paths["records"], paths["neighborhoods"], paths["taxonomy"])
    return paths, city, ingest.load_census(paths["census"])
