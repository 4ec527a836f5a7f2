"""Loading and filtering of media records, neighbourhood polygons and census rows."""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from .errors import GeometryError, IntegrityError, ParseError
from .normalize import normalize_term
from .taxonomy import match_tags

DAY = 86400
DEFAULT_LOCAL_DAYS = 30


@dataclass(frozen=True)
class MediaRecord:
    id: str
    user_id: str
    timestamp: float
    lat: float
    lon: float
    tags: frozenset
    matches: frozenset = field(default=frozenset(), compare=False)

    def __post_init__(self):
        if not -90 <= self.lat <= 90:
            raise ValueError(f"latitude {self.lat} out of range")
        if not -180 <= self.lon <= 180:
            raise ValueError(f"longitude {self.lon} out of range")

    @property
    def month(self):
        """UTC calendar month as ``YYYY-MM``."""
        return datetime.fromtimestamp(self.timestamp, tz=timezone.utc).strftime("%Y-%m")


def _parse_timestamp(value):
    if isinstance(value, bool):
        raise ValueError("boolean timestamp")
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ValueError("non-finite timestamp")
        return value
    dt = datetime.fromisoformat(str(value).replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def parse_record(obj):
    """Build a :class:`MediaRecord` from a decoded JSON object.

    Raises ``ValueError``/``KeyError``/``TypeError`` on malformed input.
    """
    tags = obj["tags"]
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise TypeError("tags must be a list of strings")
    lat, lon = obj["lat"], obj["lon"]
    if isinstance(lat, bool) or isinstance(lon, bool):
        raise TypeError("coordinates must be numbers")
    return MediaRecord(
        id=str(obj["id"]),
        user_id=str(obj["user_id"]),
        timestamp=_parse_timestamp(obj["timestamp"]),
        lat=float(lat),
        lon=float(lon),
        tags=frozenset(n for n in (normalize_term(t) for t in tags) if n),
    )


class RecordStream:
    """Iterable over the valid records of an NDJSON file.

    Malformed lines are skipped; after a full pass ``skipped`` holds their
    count and ``skipped_lines`` their line numbers. Each iteration re-reads
    the file and resets both.

    >>> stream = RecordStream("records.ndjson")   # doctest: +SKIP
    >>> records = list(stream); stream.skipped     # doctest: +SKIP
    0
    """

    def __init__(self, path):
        self.path = path
        self.skipped = 0
        self.skipped_lines = []
        self.read = 0
        # fail early on unreadable files
        with open(path, encoding="utf-8"):
            pass

    def __iter__(self):
        self.skipped = 0
        self.skipped_lines = []
        self.read = 0
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = parse_record(json.loads(line))
                except (ValueError, KeyError, TypeError):
                    self.skipped += 1
                    self.skipped_lines.append(lineno)
                    continue
                self.read += 1
                yield rec


def load_records(path):
    """Return a :class:`RecordStream` over ``path``."""
    return RecordStream(path)


# -- neighbourhoods ------------------------------------------------------------------------

@dataclass(frozen=True)
class Neighborhood:
    """A named area made of closed rings (outer boundaries and holes).

    Rings are tuples of ``(lon, lat)`` vertices. Containment uses the even-odd
    rule over all rings, so holes subtract without needing orientation.
    """

    id: str
    name: str
    rings: tuple
    bbox: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if not self.rings:
            raise GeometryError(f"neighbourhood {self.id!r} has no rings")
        for ring in self.rings:
            if len(ring) < 4:
                raise GeometryError(f"ring of {self.id!r} has {len(ring)} vertices, need >= 4")
            if tuple(ring[0]) != tuple(ring[-1]):
                raise GeometryError(f"ring of {self.id!r} is not closed")
        xs = [p[0] for r in self.rings for p in r]
        ys = [p[1] for r in self.rings for p in r]
        object.__setattr__(self, "bbox", (min(xs), min(ys), max(xs), max(ys)))

    def contains(self, x, y):
        """Point-in-polygon; points on any ring count as inside."""
        x0, y0, x1, y1 = self.bbox
        if x < x0 or x > x1 or y < y0 or y > y1:
            return False
        inside = False
        for ring in self.rings:
            for (ax, ay), (bx, by) in zip(ring, ring[1:]):
                if _on_segment(x, y, ax, ay, bx, by):
                    return True
                if (ay > y) != (by > y):
                    xcross = ax + (y - ay) * (bx - ax) / (by - ay)
                    if x < xcross:
                        inside = not inside
        return inside


def _on_segment(x, y, ax, ay, bx, by):
    if x < min(ax, bx) or x > max(ax, bx) or y < min(ay, by) or y > max(ay, by):
        return False
    return (bx - ax) * (y - ay) - (by - ay) * (x - ax) == 0


def assign_location(record, neighborhoods):
    """Id of the neighbourhood containing the record, or ``None``.

    ``record`` is a :class:`MediaRecord` or a ``(lon, lat)`` pair. When
    several neighbourhoods contain the point (shared borders) the lowest id
    wins.
    """
    if isinstance(record, MediaRecord):
        x, y = record.lon, record.lat
    else:
        x, y = record
    hits = [nb.id for nb in neighborhoods if nb.contains(x, y)]
    return min(hits) if hits else None


def _sorted_neighborhoods(neighborhoods):
    return sorted(neighborhoods, key=lambda n: n.id)


_WORKER_NBS = None


def _init_worker(nbs):
    global _WORKER_NBS
    _WORKER_NBS = nbs


def _assign_chunk(points):
    return [assign_location(p, _WORKER_NBS) for p in points]


def assign_all(records, neighborhoods, workers=1, chunk_size=2000):
    """Assign every record, returning ``[(location or None, record), ...]`` in input order."""
    nbs = _sorted_neighborhoods(neighborhoods)
    records = list(records)
    points = [(r.lon, r.lat) for r in records]
    if workers > 1 and len(points) > chunk_size:
        chunks = [points[i:i + chunk_size] for i in range(0, len(points), chunk_size)]
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(nbs,)) as ex:
            locs = [loc for part in ex.map(_assign_chunk, chunks) for loc in part]
    else:
        locs = [assign_location(p, nbs) for p in points]
    return list(zip(locs, records))


def _rings_from_geometry(geom, fid):
    kind = geom.get("type")
    coords = geom.get("coordinates")
    if kind == "Polygon":
        polys = [coords]
    elif kind == "MultiPolygon":
        polys = coords
    else:
        raise GeometryError(f"feature {fid!r}: unsupported geometry type {kind!r}")
    rings = []
    for poly in polys:
        for ring in poly:
            rings.append(tuple((float(p[0]), float(p[1])) for p in ring))
    return tuple(rings)


def load_neighborhoods(path):
    """Read a GeoJSON FeatureCollection of Polygon/MultiPolygon features.

    The id is taken from ``properties.id`` (falling back to the feature
    ``id``); the name from ``properties.name`` (falling back to the id).
    Returned sorted by id.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", path=path) from exc
    if doc.get("type") != "FeatureCollection":
        raise ParseError("expected a GeoJSON FeatureCollection", path=path)
    out = {}
    for i, feat in enumerate(doc.get("features", [])):
        props = feat.get("properties") or {}
        fid = props.get("id", feat.get("id"))
        if fid is None:
            raise ParseError(f"feature #{i} has no id", path=path)
        fid = str(fid)
        if fid in out:
            raise IntegrityError(f"duplicate neighbourhood id {fid!r}")
        geom = feat.get("geometry") or {}
        out[fid] = Neighborhood(fid, str(props.get("name", fid)), _rings_from_geometry(geom, fid))
    return [out[k] for k in sorted(out)]


# -- census -----------------------------------------------------------------------------------

CENSUS_FIELDS = ("income", "dev", "house_price")


@dataclass(frozen=True)
class CensusRow:
    location: str
    year: int
    income: float | None = None
    dev: float | None = None
    house_price: float | None = None


class CensusTable:
    """Sparse (location, year) table of income, development index and house price."""

    def __init__(self, rows):
        self.rows = {}
        for r in rows:
            key = (r.location, r.year)
            if key in self.rows:
                raise IntegrityError(f"duplicate census row for {r.location!r} in {r.year}")
            self.rows[key] = r

    def __len__(self):
        return len(self.rows)

    @property
    def locations(self):
        return sorted({loc for loc, _ in self.rows})

    @property
    def years(self):
        return sorted({y for _, y in self.rows})

    def series(self, fieldname, year):
        """``{location: value}`` for one year, omitting absent values."""
        if fieldname not in CENSUS_FIELDS:
            raise KeyError(fieldname)
        out = {}
        for (loc, y), row in sorted(self.rows.items()):
            v = getattr(row, fieldname)
            if y == year and v is not None:
                out[loc] = v
        return out

    def mean_over(self, fieldname, years):
        """Per-location mean of the available values within ``years``."""
        years = set(years)
        acc = {}
        for (loc, y), row in sorted(self.rows.items()):
            v = getattr(row, fieldname)
            if y in years and v is not None:
                acc.setdefault(loc, []).append(v)
        return {loc: math.fsum(vs) / len(vs) for loc, vs in acc.items()}


def _opt_float(text, path, lineno, name):
    text = (text or "").strip()
    if not text:
        return None
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"{name} is not a number: {text!r}", path=path, line=lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"{name} is not finite", path=path, line=lineno)
    return v


def load_census(path):
    """Read a census CSV with header ``location,year,income,dev,house_price``."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"location", "year"} - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"census header lacks {sorted(missing)}", path=path, line=1)
        for lineno, rec in enumerate(reader, 2):
            year_text = (rec.get("year") or "").strip()
            if len(year_text) != 4 or not year_text.isdigit():
                raise ParseError(f"year must be a 4-digit integer, got {year_text!r}",
                                 path=path, line=lineno)
            loc = (rec.get("location") or "").strip()
            if not loc:
                raise ParseError("empty location", path=path, line=lineno)
            rows.append(CensusRow(
                loc, int(year_text),
                *(_opt_float(rec.get(f), path, lineno, f) for f in CENSUS_FIELDS),
            ))
    return CensusTable(rows)


# -- filters ----------------------------------------------------------------------------------

def local_user_filter(records, days=DEFAULT_LOCAL_DAYS, mode="span"):
    """Drop records of users active in the city for fewer than ``days`` days.

    ``mode="span"`` measures activity as the time between a user's first and
    last record; ``mode="days"`` counts distinct UTC calendar days with at
    least one record. Input order is preserved.
    """
    records = list(records)
    if mode == "span":
        lo, hi = {}, {}
        for r in records:
            lo[r.user_id] = min(lo.get(r.user_id, r.timestamp), r.timestamp)
            hi[r.user_id] = max(hi.get(r.user_id, r.timestamp), r.timestamp)
        keep = {u for u in lo if hi[u] - lo[u] >= days * DAY}
    elif mode == "days":
        active = {}
        for r in records:
            active.setdefault(r.user_id, set()).add(int(r.timestamp // DAY))
        keep = {u for u, d in active.items() if len(d) >= days}
    else:
        raise ValueError(f"unknown local-user mode {mode!r}")
    return [r for r in records if r.user_id in keep]


def cultural_filter(records, tax):
    """Records with at least one taxonomy match, annotated with their matches."""
    out = []
    for r in records:
        m = match_tags(r.tags, tax)
        if m:
            out.append(replace(r, matches=frozenset(m)))
    return out
