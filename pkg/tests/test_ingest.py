import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from culturank import ingest
from culturank.errors import GeometryError, IntegrityError, ParseError
from culturank.ingest import (
    DAY, MediaRecord, Neighborhood, assign_all, assign_location, cultural_filter,
    load_census, load_neighborhoods, load_records, local_user_filter,
)
from culturank.taxonomy import seed_categories

from conftest import write
from oracles import point_segment_distance, winding_number


def rec(i="r", user="u", ts=0.0, lat=0.5, lon=0.5, tags=()):
    return MediaRecord(i, user, ts, lat, lon, frozenset(tags))


def square(x0, y0, x1, y1):
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0))


# -- records -------------------------------------------------------------------------------

def _ndjson(tmp_path, rows):
    return write(tmp_path / "r.ndjson",
                 "".join((r if isinstance(r, str) else json.dumps(r)) + "\n" for r in rows))


GOOD = {"id": "1", "user_id": "u", "timestamp": 1_300_000_000, "lat": 51.5, "lon": -0.1,
        "tags": ["Street Art", "street art", "Museum"]}


def test_records_normalized(tmp_path):
    stream = load_records(_ndjson(tmp_path, [GOOD]))
    (r,) = list(stream)
    assert r.tags == {"streetart", "museum"}
    assert stream.skipped == 0 and stream.read == 1


def test_records_skip_bad_lines(tmp_path):
    rows = [GOOD, dict(GOOD, lat=91), "{not json", dict(GOOD, lon=-181),
            {k: v for k, v in GOOD.items() if k != "tags"}, dict(GOOD, tags="museum"),
            dict(GOOD, id="2")]
    stream = load_records(_ndjson(tmp_path, rows))
    assert [r.id for r in stream] == ["1", "2"]
    assert stream.skipped == 5
    assert stream.skipped_lines == [2, 3, 4, 5, 6]


def test_records_empty_file(tmp_path):
    stream = load_records(write(tmp_path / "e.ndjson", ""))
    assert list(stream) == [] and stream.skipped == 0


def test_records_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_records(str(tmp_path / "nope.ndjson"))


def test_records_iso_timestamp(tmp_path):
    (r,) = load_records(_ndjson(tmp_path, [dict(GOOD, timestamp="2012-03-04T05:06:07Z")]))
    assert r.timestamp == 1330837567
    assert r.month == "2012-03"


def test_record_ranges():
    with pytest.raises(ValueError):
        rec(lat=-90.5)
    with pytest.raises(ValueError):
        rec(lon=180.1)
    rec(lat=90, lon=-180)


def test_month_is_utc():
    # 2012-01-31 23:30 UTC is already February in UTC+1 but not in UTC
    assert rec(ts=1328052600).month == "2012-01"


# -- geometry ------------------------------------------------------------------------------

UNIT = Neighborhood("A", "Unit", (square(0, 0, 1, 1),))


def test_point_inside_outside():
    assert assign_location((0.5, 0.5), [UNIT]) == "A"
    assert assign_location((2, 2), [UNIT]) is None
    assert assign_location(rec(lon=0.5, lat=0.5), [UNIT]) == "A"


@pytest.mark.parametrize("pt", [(0, 0), (1, 1), (0.5, 0), (1, 0.3), (0, 0.999), (0.25, 1)])
def test_boundary_counts_inside(pt):
    assert assign_location(pt, [UNIT]) == "A"


def test_shared_border_lowest_id():
    a = Neighborhood("A", "a", (square(0, 0, 1, 1),))
    b = Neighborhood("B", "b", (square(1, 0, 2, 1),))
    assert assign_location((1, 0.5), [a, b]) == "A"
    assert assign_all([rec(lon=1, lat=0.5)], [b, a])[0][0] == "A"


def test_overlap_lowest_id():
    a = Neighborhood("A", "a", (square(0, 0, 2, 2),))
    b = Neighborhood("B", "b", (square(1, 1, 3, 3),))
    assert assign_all([rec(lon=1.5, lat=1.5)], [b, a])[0][0] == "A"


def test_hole_subtracted():
    nb = Neighborhood("H", "h", (square(0, 0, 4, 4), square(1, 1, 2, 2)))
    assert nb.contains(0.5, 0.5)
    assert not nb.contains(1.5, 1.5)
    # hole boundary belongs to the polygon
    assert nb.contains(1, 1.5)
    assert nb.contains(3, 3)


def test_multipolygon_parts():
    nb = Neighborhood("M", "m", (square(0, 0, 1, 1), square(5, 5, 6, 6)))
    assert nb.contains(5.5, 5.5) and nb.contains(0.5, 0.5) and not nb.contains(3, 3)


def test_concave_polygon():
    # U shape: the notch is outside
    u = Neighborhood("U", "u", (((0, 0), (3, 0), (3, 3), (2, 3), (2, 1), (1, 1), (1, 3), (0, 3),
                                 (0, 0)),))
    assert not u.contains(1.5, 2)
    assert u.contains(0.5, 2) and u.contains(2.5, 2) and u.contains(1.5, 0.5)
    # horizontal ray through a vertex
    assert u.contains(0.5, 1) and not u.contains(-0.5, 1)


def test_ring_validation():
    with pytest.raises(GeometryError):
        Neighborhood("X", "x", (((0, 0), (1, 0), (1, 1), (0, 1)),))
    with pytest.raises(GeometryError):
        Neighborhood("X", "x", (((0, 0), (1, 0), (0, 0)),))
    with pytest.raises(GeometryError):
        Neighborhood("X", "x", ())


def _star(rng, cx, cy, k):
    ang = np.sort(rng.uniform(0, 2 * math.pi, k))
    rad = rng.uniform(0.3, 1.0, k)
    pts = [(cx + r * math.cos(a), cy + r * math.sin(a)) for a, r in zip(ang, rad)]
    return tuple(pts + [pts[0]])


def test_random_polygons_match_winding_number():
    rng = np.random.default_rng(11)
    for _ in range(20):
        ring = _star(rng, 0, 0, int(rng.integers(3, 12)))
        nb = Neighborhood("P", "p", (ring,))
        for x, y in rng.uniform(-1.1, 1.1, (200, 2)):
            near = min(point_segment_distance(x, y, *a, *b) for a, b in zip(ring, ring[1:]))
            if near < 1e-12:
                continue
            assert nb.contains(x, y) == (winding_number(x, y, ring) != 0)


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=30))
@settings(max_examples=100, deadline=None)
def test_integer_grid_vertices_and_edges_inside(points):
    nb = Neighborhood("S", "s", (square(-3, -3, 3, 3),))
    for x, y in points:
        want = -3 <= x <= 3 and -3 <= y <= 3
        assert nb.contains(x, y) == want


def _geojson(tmp_path, features):
    return write(tmp_path / "n.geojson", json.dumps({"type": "FeatureCollection",
                                                     "features": features}))


def _feature(fid, rings, kind="Polygon", name=None):
    props = {"id": fid}
    if name:
        props["name"] = name
    return {"type": "Feature", "properties": props,
            "geometry": {"type": kind, "coordinates": rings}}


def test_load_neighborhoods(tmp_path):
    sq = [list(map(list, square(0, 0, 1, 1)))]
    feats = [_feature(f"N{i:02d}", sq, name=f"Area {i}") for i in range(33, 0, -1)]
    feats.append(_feature("Z", [sq, [list(map(list, square(3, 3, 4, 4)))]], kind="MultiPolygon"))
    nbs = load_neighborhoods(_geojson(tmp_path, feats))
    assert len(nbs) == 34
    assert [n.id for n in nbs] == sorted(n.id for n in nbs)
    assert nbs[0].name == "Area 1"
    assert nbs[-1].name == "Z" and len(nbs[-1].rings) == 2


def test_load_neighborhoods_duplicate(tmp_path):
    sq = [list(map(list, square(0, 0, 1, 1)))]
    with pytest.raises(IntegrityError):
        load_neighborhoods(_geojson(tmp_path, [_feature("A", sq), _feature("A", sq)]))


def test_load_neighborhoods_unclosed(tmp_path):
    ring = [[[0, 0], [1, 0], [1, 1], [0, 1]]]
    with pytest.raises(GeometryError):
        load_neighborhoods(_geojson(tmp_path, [_feature("A", ring)]))


def test_load_neighborhoods_bad_document(tmp_path):
    with pytest.raises(ParseError):
        load_neighborhoods(write(tmp_path / "x.geojson", '{"type": "Feature"}'))
    with pytest.raises(ParseError):
        load_neighborhoods(write(tmp_path / "y.geojson", "{"))


def test_assign_all_workers_invariant():
    rng = np.random.default_rng(5)
    nbs = [Neighborhood(f"G{i}{j}", "g", (square(i, j, i + 1, j + 1),))
           for i in range(4) for j in range(4)]
    pts = rng.uniform(-0.5, 4.5, (5000, 2))
    pts[:100] = np.round(pts[:100])  # grid corners and borders
    recs = [rec(str(k), lon=float(x), lat=float(y)) for k, (x, y) in enumerate(pts)]
    one = assign_all(recs, nbs, workers=1)
    four = assign_all(recs, nbs, workers=4, chunk_size=500)
    assert one == four
    assert [r for _, r in one] == recs


# -- census ----------------------------------------------------------------------------------

CENSUS = "location,year,income,dev,house_price\nA,2010,100,1.5,300000\nA,2012,200,,\nB,2010,50,0.5,\n"


def test_census_load(tmp_path):
    t = load_census(write(tmp_path / "c.csv", CENSUS))
    assert len(t) == 3
    assert t.series("house_price", 2010) == {"A": 300000.0}
    assert t.series("income", 2010) == {"A": 100.0, "B": 50.0}
    assert t.rows[("A", 2012)].dev is None
    assert t.mean_over("income", range(2010, 2015)) == {"A": 150.0, "B": 50.0}


def test_census_duplicate(tmp_path):
    with pytest.raises(IntegrityError):
        load_census(write(tmp_path / "c.csv", CENSUS + "A,2010,1,1,1\n"))


@pytest.mark.parametrize("row", ["C,10,1,1,1", "C,20x0,1,1,1", "C,2010,abc,1,1", ",2010,1,1,1"])
def test_census_bad_rows(tmp_path, row):
    with pytest.raises(ParseError) as exc:
        load_census(write(tmp_path / "c.csv", CENSUS + row + "\n"))
    assert exc.value.line == 5


def test_census_unknown_field(tmp_path):
    t = load_census(write(tmp_path / "c.csv", CENSUS))
    with pytest.raises(KeyError):
        t.series("population", 2010)


# -- filters ---------------------------------------------------------------------------------

def test_local_user_span():
    recs = [rec("1", "keep", 0), rec("2", "keep", 31 * DAY), rec("3", "drop", 0),
            rec("4", "drop", 20 * DAY), rec("5", "once", 5 * DAY), rec("6", "edge", 0),
            rec("7", "edge", 30 * DAY)]
    assert [r.id for r in local_user_filter(recs)] == ["1", "2", "6", "7"]


def test_local_user_days_mode():
    recs = [rec(str(d), "busy", d * DAY) for d in range(30)] + [rec("x", "rare", 0),
                                                               rec("y", "rare", 400 * DAY)]
    assert {r.user_id for r in local_user_filter(recs, mode="days")} == {"busy"}
    assert {r.user_id for r in local_user_filter(recs, mode="span")} == {"rare"}
    with pytest.raises(ValueError):
        local_user_filter(recs, mode="weeks")


@given(st.lists(st.tuples(st.sampled_from("abcd"), st.integers(0, 90 * DAY)), max_size=40),
       st.sampled_from(["span", "days"]))
@settings(max_examples=100, deadline=None)
def test_local_user_idempotent(rows, mode):
    recs = [rec(str(i), u, float(t)) for i, (u, t) in enumerate(rows)]
    once = local_user_filter(recs, mode=mode)
    assert local_user_filter(once, mode=mode) == once


TAX = seed_categories().with_terms({"museum": 803, "streetart": 801})


def test_cultural_filter():
    recs = [rec("1", tags={"museum", "dog"}), rec("2", tags={"dog"}),
            rec("3", tags={"museum", "streetart"})]
    out = cultural_filter(recs, TAX)
    assert [r.id for r in out] == ["1", "3"]
    assert out[0].matches == {("museum", 803)}
    assert len(out[1].matches) == 2


@given(st.lists(st.sets(st.sampled_from(["museum", "streetart", "dog", "cat"])), max_size=20))
@settings(max_examples=100, deadline=None)
def test_cultural_filter_subset(tagsets):
    recs = [rec(str(i), tags=t) for i, t in enumerate(tagsets)]
    out = cultural_filter(recs, TAX)
    ids = {r.id for r in recs}
    assert {r.id for r in out} <= ids
    assert all(r.matches for r in out)


def test_fixture_city_loads(city_paths):
    stream = ingest.load_records(city_paths["records"])
    n = sum(1 for _ in stream)
    assert stream.skipped == 2 and n > 10000
    nbs = load_neighborhoods(city_paths["neighborhoods"])
    assert len(nbs) == 33
    census = load_census(city_paths["census"])
    assert census.rows[("L07", 2012)].house_price is None
