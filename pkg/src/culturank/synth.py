"""Seeded synthetic inputs with planted structure.

:func:`taxonomy_world` produces every file the taxonomy build consumes (concept
graph, lexical graph, tagged records, 'is-a' decisions, agreement labels) with
known ground truth. :func:`fixture_city` produces a 33-neighbourhood city with
records, census rows and a readable taxonomy, where development and house
prices are planted linear functions of the two capitals.
"""

import csv
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .ingest import MediaRecord
from .taxonomy import CATEGORIES, SUBCATEGORIES, Taxonomy, macro_code
from .normalize import normalize_term

_FOUR_PS = ("process", "place", "person", "product")
_COMMUNITY_TITLES = ("Template:{}", "List of {} topics", "WikiProject {}", "Category:{}",
                     "Portal:{}")


@dataclass
class TaxonomyWorld:
    titles: dict
    edges: list
    stoplist: list
    decisions: dict
    lex_concepts: list
    lex_edges: list
    lexemes: dict
    records: list
    labels: list
    truth: dict = field(default_factory=dict)

    def write(self, directory):
        """Write every input file into ``directory``; returns ``{name: path}``."""
        os.makedirs(directory, exist_ok=True)
        p = {k: os.path.join(directory, v) for k, v in {
            "edges": "concept_edges.tsv", "titles": "concept_titles.tsv",
            "stoplist": "stoplist.txt", "decisions": "decisions.tsv",
            "lexgraph": "lexgraph.tsv", "records": "records.ndjson", "labels": "labels.tsv",
        }.items()}
        _write_lines(p["titles"], (f"{s}\t{t}" for s, t in sorted(self.titles.items())))
        _write_lines(p["edges"], (f"{a}\t{b}" for a, b in self.edges))
        _write_lines(p["stoplist"], self.stoplist)
        _write_lines(p["decisions"], (f"{t}\t{d}" for t, d in sorted(self.decisions.items())))
        lex = [f"C\t{c}" for c in self.lex_concepts]
        lex += [f"E\t{a}\t{b}" for a, b in self.lex_edges]
        lex += [f"L\t{t}\t{c}" for t, cs in sorted(self.lexemes.items()) for c in sorted(cs)]
        _write_lines(p["lexgraph"], lex)
        write_records(self.records, p["records"])
        _write_lines(p["labels"], (f"{t}\t{ph}\t{v}" for t, ph, v in self.labels))
        return p


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def write_records(records, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps({"id": r.id, "user_id": r.user_id, "timestamp": r.timestamp,
                                 "lat": r.lat, "lon": r.lon, "tags": sorted(r.tags)},
                                sort_keys=True) + "\n")


def taxonomy_world(seed=0, n_records=10_000, n_noise=300):
    """A 200-node concept graph world with planted taxonomy structure.

    Each subcategory page links to four topic articles, one community page
    and, for some, a filler article. Each subcategory also owns three "good"
    co-occurring tags lexically close to its category, plus in some cases a
    "bad" tag that co-occurs just as often but sits in another category's
    lexical cluster (removed by the agreement labels) and an 'is-a'-rejected
    tag. Noise tags co-occur rarely.
    """
    rng = np.random.default_rng(seed)
    codes = sorted(SUBCATEGORIES)
    macros = sorted(CATEGORIES)
    titles, edges = {}, set()

    def link(a, b):
        edges.add((a, b) if a < b else (b, a))

    wiki_terms = {}
    for i, code in enumerate(codes):
        label = SUBCATEGORIES[code]
        sub = f"sub{code}"
        titles[sub] = label
        wiki_terms[code] = []
        for k in range(4):
            slug = f"w{code}_{k}"
            titles[slug] = f"{label} topic {k}"
            link(sub, slug)
            wiki_terms[code].append(normalize_term(titles[slug]))
        comm = f"c{code}"
        titles[comm] = _COMMUNITY_TITLES[i % len(_COMMUNITY_TITLES)].format(label)
        link(sub, comm)
    # bridges: topic 0 also links to the next category's first subcategory
    bridges = {}
    for code in codes:
        nxt = [c for c in codes if macro_code(c) == macro_code(code) + 100]
        if nxt:
            link(f"w{code}_0", f"sub{nxt[0]}")
            bridges[wiki_terms[code][0]] = (code, nxt[0])
    titles["color"] = "Color"
    for code in (200, 403, 904):
        link("color", f"sub{code}")
    for j in range(49):
        slug = f"f{j:02d}"
        titles[slug] = f"Filler {j}"
        if j % 2 == 0:
            link(slug, f"sub{codes[j % len(codes)]}")
        if j:
            link(slug, f"f{j - 1:02d}")

    decisions = {}
    for code in codes:
        for k, term in enumerate(wiki_terms[code]):
            decisions[term] = "reject" if (k == 3 and code % 5 == 0) else _FOUR_PS[(code + k) % 4]
    for j in range(0, 49, 4):
        decisions[normalize_term(f"Filler {j}")] = "reject"

    good, bad, isa_rejected = {}, {}, {}
    for i, code in enumerate(codes):
        slug = SUBCATEGORIES[code].lower().replace(" ", "")
        good[code] = [f"{slug}tag{k}" for k in range(3)]
        for t in good[code]:
            decisions[t] = _FOUR_PS[i % 4]
        if i % 3 == 0:
            bad[code] = f"{slug}mislead"
            decisions[bad[code]] = "product"
        if i % 4 == 1:
            isa_rejected[code] = f"{slug}shot"
            decisions[isa_rejected[code]] = "reject"
    noise = [f"noise{j:03d}" for j in range(n_noise)]

    # lexical graph: root - a_c - b_c - hub_c, terms hang off hubs
    concepts = ["root"]
    lex_edges = []
    for c in macros:
        concepts += [f"a{c}", f"b{c}", f"hub{c}"]
        lex_edges += [("root", f"a{c}"), (f"a{c}", f"b{c}"), (f"b{c}", f"hub{c}")]
    lexemes = {}

    def attach(term, node):
        concepts.append(f"t:{term}")
        lex_edges.append((node, f"t:{term}"))
        lexemes[term] = {f"t:{term}"}

    for code in codes:
        hub = f"hub{macro_code(code)}"
        for t in wiki_terms[code] + good[code]:
            attach(t, hub)
        if code in bad:
            other = macros[(macros.index(macro_code(code)) + 4) % 9]
            attach(bad[code], f"hub{other}")
        if code in isa_rejected:
            attach(isa_rejected[code], f"hub{macros[int(rng.integers(9))]}")
    for j, t in enumerate(noise):
        if j % 10 == 9:
            continue  # out-of-lexicon noise
        attach(t, "root" if j % 3 == 0 else f"a{macros[int(rng.integers(9))]}")

    records = []
    t0 = datetime(2010, 1, 1, tzinfo=timezone.utc).timestamp()
    for n in range(n_records):
        code = codes[int(rng.integers(len(codes)))]
        tags = {wiki_terms[code][int(rng.integers(4))]}
        if rng.random() < 0.1:
            tags.add(wiki_terms[code][int(rng.integers(4))])
        extra = list(good[code]) + [x for x in (bad.get(code), isa_rejected.get(code)) if x]
        for t in extra:
            if rng.random() < 0.6:
                tags.add(t)
        for j in rng.choice(n_noise, size=2, replace=False):
            tags.add(noise[int(j)])
        records.append(MediaRecord(
            id=f"r{n:05d}", user_id=f"u{int(rng.integers(500)):03d}",
            timestamp=t0 + float(rng.integers(0, 5 * 365 * 86400)),
            lat=round(51.3 + 0.4 * float(rng.random()), 6),
            lon=round(-0.5 + 0.8 * float(rng.random()), 6), tags=frozenset(tags)))

    labels = []
    labelled = [t for code in codes for t in wiki_terms[code] + good[code]]
    labelled += list(bad.values())
    for term in sorted(set(labelled)):
        if term == wiki_terms[101][1]:
            continue  # left unlabeled on purpose
        positives = 8 if term in bad.values() else 19 + int(rng.integers(2))
        for ph in range(20):
            labels.append((term, f"p{ph:02d}", 1 if ph < positives else 0))

    truth = {"wiki_terms": wiki_terms, "good": good, "bad": bad,
             "isa_rejected": isa_rejected, "noise": noise, "bridges": bridges}
    return TaxonomyWorld(titles, sorted(edges), ["color"], decisions, concepts,
                         lex_edges, lexemes, records, labels, truth)


# -- fixture city ----------------------------------------------------------------------------

CITY_TERMS = {
    101: ["billboard", "poster", "advert"],
    102: ["brand", "promotion", "popupshop"],
    200: ["architecture", "skyscraper", "cathedral"],
    300: ["pottery", "knitting", "woodwork"],
    400: ["design", "typography", "interiordesign"],
    401: ["productdesign", "furniture", "prototype"],
    402: ["graphicdesign", "logo", "illustration"],
    403: ["fashion", "catwalk", "vintage"],
    501: ["film", "cinema", "filmfestival"],
    502: ["tvstudio", "broadcast", "television"],
    503: ["video", "musicvideo", "timelapse"],
    504: ["radio", "podcast", "dj"],
    505: ["photography", "streetphotography", "photowalk"],
    601: ["technology", "hackathon", "startup"],
    602: ["gaming", "arcade", "esports"],
    603: ["software", "coding", "opensource"],
    700: ["books", "newspaper", "bookshop"],
    801: ["streetart", "mural", "graffiti"],
    802: ["festival", "carnival", "parade"],
    803: ["museum", "exhibition", "gallery"],
    804: ["library", "archive", "reading"],
    901: ["concert", "gig", "jazz"],
    902: ["performance", "dance", "cabaret"],
    903: ["theatre", "musical", "opera"],
    904: ["painting", "sculpture", "artfair"],
}

GENERIC_TAGS = ["london", "city", "street", "food", "sunset", "friends", "bus", "rain",
                "park", "night", "cat", "dog", "coffee", "bridge", "river", "shopping",
                "family", "holiday", "iphone", "summer"]

# point-of-interest spelling variants exercised by tag normalization
_VARIANTS = {"streetart": "Street Art", "filmfestival": "Film Festival", "artfair": "Art Fair"}


def city_taxonomy():
    terms = {t: code for code, ts in CITY_TERMS.items() for t in ts}
    return Taxonomy(dict(CATEGORIES), dict(SUBCATEGORIES), terms)


def _z(v):
    v = np.asarray(v, dtype=float)
    return (v - v.mean()) / v.std()


@dataclass
class FixtureCity:
    taxonomy: Taxonomy
    features: list
    records: list
    census_rows: list
    truth: dict

    def write(self, directory):
        os.makedirs(directory, exist_ok=True)
        p = {k: os.path.join(directory, v) for k, v in {
            "taxonomy": "taxonomy.json", "neighborhoods": "neighborhoods.geojson",
            "records": "records.ndjson", "census": "census.csv"}.items()}
        self.taxonomy.save(p["taxonomy"])
        with open(p["neighborhoods"], "w", encoding="utf-8", newline="\n") as fh:
            json.dump({"type": "FeatureCollection", "features": self.features}, fh,
                      indent=1, sort_keys=True)
            fh.write("\n")
        with open(p["records"], "w", encoding="utf-8", newline="\n") as fh:
            for r in self.records:
                fh.write(json.dumps(r, sort_keys=True) + "\n")
        with open(p["census"], "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["location", "year", "income", "dev", "house_price"])
            for row in self.census_rows:
                w.writerow(["" if v is None else v for v in row])
        return p


def fixture_city(seed=7, n_locations=33, n_records=12000):
    """Synthetic city on a lon/lat grid with planted capitals and events."""
    rng = np.random.default_rng(seed)
    cols = 6
    x0, y0, dx, dy = -0.50, 51.30, 0.13, 0.07
    ids = [f"L{i + 1:02d}" for i in range(n_locations)]
    cells = {}
    features = []
    for i, loc in enumerate(ids):
        cx, cy = i % cols, i // cols
        bx, by = x0 + cx * dx, y0 + cy * dy
        outer = [[round(bx, 6), round(by, 6)], [round(bx + dx, 6), round(by, 6)],
                 [round(bx + dx, 6), round(by + dy, 6)], [round(bx, 6), round(by + dy, 6)],
                 [round(bx, 6), round(by, 6)]]
        rings = [outer]
        if loc == "L05":
            hx, hy = bx + dx * 0.4, by + dy * 0.4
            rings.append([[round(hx, 6), round(hy, 6)], [round(hx, 6), round(hy + dy * 0.2, 6)],
                          [round(hx + dx * 0.2, 6), round(hy + dy * 0.2, 6)],
                          [round(hx + dx * 0.2, 6), round(hy, 6)], [round(hx, 6), round(hy, 6)]])
        cells[loc] = (bx, by)
        features.append({"type": "Feature", "id": loc,
                         "properties": {"id": loc, "name": f"Borough {i + 1:02d}"},
                         "geometry": {"type": "Polygon", "coordinates": rings}})

    macros = sorted(CATEGORIES)
    frac = rng.uniform(0.15, 0.6, n_locations)
    income = np.round(np.exp(rng.normal(10.4, 0.25, n_locations)), 0)
    pref = rng.dirichlet(np.full(9, 0.8), n_locations)
    by_macro = {c: [t for code, ts in CITY_TERMS.items() if macro_code(code) == c for t in ts]
                for c in macros}

    t_start = datetime(2010, 1, 1, tzinfo=timezone.utc).timestamp()
    t_end = datetime(2015, 1, 1, tzinfo=timezone.utc).timestamp()
    n_users = 420
    home = rng.integers(0, n_locations, n_users)
    tourist = rng.random(n_users) < 0.15
    span_start = rng.uniform(t_start, t_end - 90 * 86400, n_users)
    span_len = np.where(tourist, rng.uniform(0, 5 * 86400, n_users),
                        rng.uniform(60 * 86400, 1400 * 86400, n_users))

    def point(li):
        bx, by = cells[ids[li]]
        while True:
            x, y = bx + dx * rng.uniform(0.02, 0.98), by + dy * rng.uniform(0.02, 0.98)
            if ids[li] != "L05" or not (0.38 < (x - bx) / dx < 0.62 and 0.38 < (y - by) / dy < 0.62):
                return round(float(x), 6), round(float(y), 6)

    def tags_for(li, boost_macro=None):
        out = []
        for _ in range(int(rng.integers(2, 7))):
            if boost_macro is not None and rng.random() < 0.8:
                terms = by_macro[boost_macro]
                out.append(terms[int(rng.integers(len(terms)))])
            elif rng.random() < frac[li]:
                c = macros[int(rng.choice(9, p=pref[li]))]
                terms = by_macro[c]
                out.append(terms[int(rng.integers(len(terms)))])
            else:
                out.append(GENERIC_TAGS[int(rng.integers(len(GENERIC_TAGS)))])
        return [_VARIANTS.get(t, t) for t in out]

    records = []
    for n in range(n_records):
        u = int(rng.integers(n_users))
        li = int(home[u]) if rng.random() < 0.75 else int(rng.integers(n_locations))
        ts = min(float(span_start[u] + rng.uniform(0, span_len[u])), t_end - 1)
        lon, lat = point(li)
        records.append({"id": f"p{n:05d}", "user_id": f"u{u:03d}", "timestamp": int(ts),
                        "lat": lat, "lon": lon, "tags": tags_for(li)})
    events = []
    for k in range(5):
        li = int(rng.integers(n_locations))
        month_start = datetime(2010 + k, 1 + int(rng.integers(12)), 10, tzinfo=timezone.utc)
        macro = macros[int(rng.integers(9))]
        events.append((ids[li], month_start.strftime("%Y-%m"), macro))
        local_users = [u for u in range(n_users) if not tourist[u]]
        for m in range(60):
            u = local_users[int(rng.integers(len(local_users)))]
            lon, lat = point(li)
            ts = month_start.timestamp() + float(rng.uniform(0, 5 * 86400))
            records.append({"id": f"e{k}{m:03d}", "user_id": f"u{u:03d}", "timestamp": int(ts),
                            "lat": lat, "lon": lon, "tags": tags_for(li, macro)})
    # a few malformed lines for the skip counter
    records.append({"id": "bad1", "user_id": "u000", "timestamp": int(t_start), "lat": 91.0,
                    "lon": 0.0, "tags": ["museum"]})
    records.append({"id": "bad2", "user_id": "u000", "timestamp": int(t_start)})

    c_plan, e_plan = _z(frac), _z(income)
    dev2015 = -0.51 + 3.4 * c_plan - 4.5 * e_plan + rng.normal(0, 0.5, n_locations)
    dev2010 = dev2015 + rng.normal(0.3, 0.4, n_locations)
    hp = 0.53 * c_plan + 0.73 * e_plan
    census = []
    for i, loc in enumerate(ids):
        for year in range(2010, 2016):
            inc = round(float(income[i] * 1.02 ** (year - 2010) * (1 + rng.normal(0, 0.01))), 2)
            dev = {2010: round(float(dev2010[i]), 4), 2015: round(float(dev2015[i]), 4)}.get(year)
            price = round(float(300_000 + 50_000 * hp[i] * 1.03 ** (year - 2010)
                                + rng.normal(0, 4000)), 0)
            if loc == "L07" and year == 2012:
                price = None
            census.append((loc, year, inc, dev, price))

    truth = {"fraction": dict(zip(ids, frac.tolist())), "income": dict(zip(ids, income.tolist())),
             "events": events}
    return FixtureCity(city_taxonomy(), features, records, census, truth)
