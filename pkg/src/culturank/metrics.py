"""Capital, specialization, diversity and monthly event metrics per location."""

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import DegenerateError, InsufficientDataError, UndefinedMetricError
from .taxonomy import CATEGORIES, macro_code, match_tags

DEFAULT_FENCE = 1.5


class MonthCounts(NamedTuple):
    tags: int
    cultural: int
    # tags carried by records with at least one cultural match
    cultural_record_tags: int


@dataclass
class LocationStats:
    location: str
    n_tags: int = 0
    n_cultural: int = 0
    category_counts: dict = field(default_factory=lambda: {c: 0 for c in sorted(CATEGORIES)})
    monthly: dict = field(default_factory=dict)
    month_terms: dict = field(default_factory=dict)
    n_records: int = 0

    def add(self, record, matches):
        """Fold one record (with its taxonomy matches) into the counts."""
        n, k = len(record.tags), len(matches)
        self.n_records += 1
        self.n_tags += n
        self.n_cultural += k
        for _, code in matches:
            self.category_counts[macro_code(code)] += 1
        month = record.month
        prev = self.monthly.get(month, MonthCounts(0, 0, 0))
        self.monthly[month] = MonthCounts(prev.tags + n, prev.cultural + k,
                                          prev.cultural_record_tags + (n if k else 0))
        if k:
            self.month_terms.setdefault(month, Counter()).update(t for t, _ in matches)


def aggregate_stats(assigned, tax, locations=()):
    """Build :class:`LocationStats` from ``(location, record)`` pairs.

    Records whose location is ``None`` are ignored. Every id in
    ``locations`` gets an entry even when it received no records. Returns a
    dict ordered by location id.
    """
    stats = {loc: LocationStats(loc) for loc in locations}
    for loc, rec in assigned:
        if loc is None:
            continue
        st = stats.get(loc)
        if st is None:
            st = stats[loc] = LocationStats(loc)
        matches = rec.matches or match_tags(rec.tags, tax)
        st.add(rec, matches)
    for st in stats.values():
        st.monthly = dict(sorted(st.monthly.items()))
    return {k: stats[k] for k in sorted(stats)}


def fraction_cultural(stats):
    """Cultural tags over all tags at a location."""
    if stats.n_tags == 0:
        raise UndefinedMetricError(f"location {stats.location!r} has no tags")
    return stats.n_cultural / stats.n_tags


@dataclass
class CapitalVector:
    """z-scored values per location plus the locations left out."""

    kind: str
    values: dict
    excluded: list = field(default_factory=list)

    def __getitem__(self, loc):
        return self.values[loc]

    def __contains__(self, loc):
        return loc in self.values

    def items(self):
        return self.values.items()


def zscore(values, kind="value"):
    """Population z-scores over the locations with a defined value.

    ``None`` and NaN values are excluded and listed in ``excluded``. The
    result is re-centred once after the first pass so that its mean and
    standard deviation are 0 and 1 to within rounding, even for inputs with a
    large common offset.

    Raises
    ------
    InsufficientDataError
        Fewer than two defined values.
    DegenerateError
        All defined values are equal.
    """
    keys, xs, excluded = [], [], []
    for loc in sorted(values):
        v = values[loc]
        if v is None or (isinstance(v, float) and math.isnan(v)):
            excluded.append(loc)
            continue
        keys.append(loc)
        xs.append(float(v))
    if len(xs) < 2:
        raise InsufficientDataError(f"{kind}: need at least two locations, got {len(xs)}")
    mu = math.fsum(xs) / len(xs)
    dev = [x - mu for x in xs]
    shift = math.fsum(dev) / len(dev)
    dev = [d - shift for d in dev]
    scale = max(abs(d) for d in dev)
    if scale == 0 or all(x == xs[0] for x in xs):
        raise DegenerateError(f"{kind}: all values are equal, z-score undefined")
    # scaled so tiny spreads do not underflow when squared
    sigma = scale * math.sqrt(math.fsum((d / scale) ** 2 for d in dev) / len(dev))
    return CapitalVector(kind, {k: d / sigma for k, d in zip(keys, dev)}, excluded)


def _defined(stats_map, fn):
    out = {}
    for loc, st in stats_map.items():
        try:
            out[loc] = fn(st)
        except UndefinedMetricError:
            out[loc] = None
    return out


def cultural_capital(stats_map):
    """z-score of the cultural tag fraction; tag-less locations are excluded."""
    return zscore(_defined(stats_map, fraction_cultural), "cultural")


def penetration(stats_map):
    """z-score of total tag volume per location."""
    return zscore({loc: st.n_tags for loc, st in stats_map.items()}, "penetration")


def economic_capital(census, years, locations=None):
    """z-score of income, averaged per location over the available ``years``.

    ``years`` is one year or an iterable. Locations listed in ``locations``
    but lacking income in the period appear in ``excluded``.
    """
    years = [years] if isinstance(years, int) else list(years)
    income = census.mean_over("income", years)
    if locations is not None:
        income = {loc: income.get(loc) for loc in set(locations) | set(income)}
    return zscore(income, "economic")


def category_fractions(stats):
    """Exact per-category fractions of the cultural tags at one location."""
    if stats.n_cultural == 0:
        raise UndefinedMetricError(f"location {stats.location!r} has no cultural tags")
    return {c: Fraction(stats.category_counts.get(c, 0), stats.n_cultural)
            for c in sorted(CATEGORIES)}


def category_capital(stats_map, code):
    """z-score across locations of the share of cultural tags in category ``code``."""
    code = macro_code(code)
    fr = _defined(stats_map, lambda st: float(category_fractions(st)[code]))
    return zscore(fr, f"category:{code}")


def category_capitals(stats_map):
    """All computable category capitals, keyed by code; degenerate ones are omitted."""
    out = {}
    for code in sorted(CATEGORIES):
        try:
            out[code] = category_capital(stats_map, code)
        except (DegenerateError, InsufficientDataError):
            continue
    return out


def argmax_category(values):
    """Code with the highest value; ties go to the lowest code. ``None`` if empty."""
    best = None
    for code in sorted(values):
        v = values[code]
        if v is None:
            continue
        if best is None or v > values[best]:
            best = code
    return best


def specialization(capitals, location):
    """Category whose capital is highest at ``location``.

    ``capitals`` maps category code to :class:`CapitalVector` (see
    :func:`category_capitals`).
    """
    return argmax_category({c: vec.values[location]
                            for c, vec in capitals.items() if location in vec.values})


class EntropyEstimate(NamedTuple):
    plugin: float
    correction: Fraction
    value: float
    bins: int
    n: int


def plugin_entropy(counts):
    """Shannon entropy in nats of the empirical distribution of ``counts``."""
    counts = [c for c in counts if c > 0]
    total = sum(counts)
    if total == 0:
        raise UndefinedMetricError("entropy of an empty sample")
    return -math.fsum((c / total) * math.log(c / total) for c in counts) + 0.0


def miller_madow(counts):
    """Plug-in entropy plus the Miller-Madow term ``(m - 1) / (2 N)``.

    ``m`` is the number of non-empty bins and ``N`` the sample size. The
    correction is returned exactly as a :class:`~fractions.Fraction`.
    """
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError("counts must be non-negative")
    h = plugin_entropy(counts)
    m = sum(1 for c in counts if c > 0)
    n = sum(counts)
    corr = Fraction(m - 1, 2 * n)
    return EntropyEstimate(h, corr, h + float(corr), m, n)


def diversity(stats):
    """Miller-Madow entropy of a location's category distribution."""
    if stats.n_cultural == 0:
        raise UndefinedMetricError(f"location {stats.location!r} has no cultural tags")
    return miller_madow(stats.category_counts[c] for c in sorted(stats.category_counts))


def _month_range(first, last):
    y, m = map(int, first.split("-"))
    y1, m1 = map(int, last.split("-"))
    while (y, m) <= (y1, m1):
        yield f"{y:04d}-{m:02d}"
        m += 1
        if m == 13:
            y, m = y + 1, 1


class MonthlyCapital(NamedTuple):
    z: dict
    fractions: dict
    gaps: list


def monthly_fractions(stats, denominator="all"):
    """Cultural fraction per month; months without tags map to ``None``.

    ``denominator="all"`` divides by every tag posted that month,
    ``"cultural"`` only by tags on records with a cultural match.
    """
    if denominator not in ("all", "cultural"):
        raise ValueError(f"unknown denominator {denominator!r}")
    if not stats.monthly:
        return {}
    months = sorted(stats.monthly)
    out = {}
    for month in _month_range(months[0], months[-1]):
        mc = stats.monthly.get(month, MonthCounts(0, 0, 0))
        den = mc.tags if denominator == "all" else mc.cultural_record_tags
        out[month] = mc.cultural / den if den else None
    return out


def monthly_capital(stats, denominator="all"):
    """Each month's cultural fraction z-scored against the location's own months.

    Calendar months between the first and last record with no usable
    denominator are reported in ``gaps`` and left out of the moments.
    """
    fr = monthly_fractions(stats, denominator)
    gaps = [m for m, v in fr.items() if v is None]
    defined = {m: v for m, v in fr.items() if v is not None}
    if len(defined) < 2:
        raise InsufficientDataError(
            f"location {stats.location!r}: need at least two months with tags")
    try:
        vec = zscore(defined, f"monthly:{stats.location}")
    except DegenerateError:
        raise DegenerateError(
            f"location {stats.location!r}: monthly cultural fraction is constant") from None
    return MonthlyCapital(vec.values, defined, gaps)


@dataclass(frozen=True)
class EventPeak:
    location: str
    month: str
    z: float
    fence: float
    top_terms: tuple = ()


def tukey_fence(values, multiplier=DEFAULT_FENCE):
    """Upper fence ``Q3 + multiplier * (Q3 - Q1)`` with linearly interpolated quartiles."""
    q1, q3 = np.percentile(np.asarray(values, dtype=float), [25, 75])
    return float(q3 + multiplier * (q3 - q1))


def detect_events(z, multiplier=DEFAULT_FENCE, month_terms=None, location=None, top=5):
    """Months whose z value lies above the upper Tukey fence of the series.

    Peaks are sorted by z descending, then month ascending. With
    ``month_terms`` (month to term counter) each peak lists the ``top`` most
    frequent cultural terms of its month.
    """
    if len(z) < 4:
        raise InsufficientDataError(f"event detection needs >= 4 months, got {len(z)}")
    months = sorted(z)
    fence = tukey_fence([z[m] for m in months], multiplier)
    peaks = []
    for m in months:
        if z[m] > fence:
            terms = ()
            if month_terms and m in month_terms:
                ranked = sorted(month_terms[m].items(), key=lambda kv: (-kv[1], kv[0]))
                terms = tuple(t for t, _ in ranked[:top])
            peaks.append(EventPeak(location, m, z[m], fence, terms))
    peaks.sort(key=lambda p: (-p.z, p.month))
    return peaks
