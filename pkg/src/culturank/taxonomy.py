"""Three-level cultural taxonomy: 9 categories, 25 subcategories, leaf terms.

The build runs in stages. Subcategory pages are expanded one hop in a concept
graph, filtered by an 'is-a' decisions file, extended with tags that co-occur
with them on tagged records, thresholded by co-occurrence count, cleaned with a
per-term agreement file, and finally each term is attached to one subcategory.
Silhouette scores over path similarity measure how well the terms cluster by
category at any stage.
"""

import csv
import json
import math
from collections import Counter
from collections.abc import Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import lexsim
from .concept_graph import ARTICLE
from .errors import (
    InsufficientDataError, IntegrityError, ParseError, UnknownKeyError,
)
from .normalize import normalize_term

CATEGORIES = {
    100: "Advertising and marketing",
    200: "Architecture",
    300: "Crafts",
    400: "Design",
    500: "Film, TV, video, radio and photography",
    600: "IT software and computer services",
    700: "Publishing",
    800: "Museums, galleries and libraries",
    900: "Music, performing and visual arts",
}

SUBCATEGORIES = {
    101: "Advertising", 102: "Marketing", 200: "Architecture", 300: "Crafts",
    400: "Design", 401: "Product design", 402: "Graphic design", 403: "Fashion",
    501: "Film", 502: "Television", 503: "Video", 504: "Radio", 505: "Photography",
    601: "Technology", 602: "Gaming", 603: "Software", 700: "Publishing",
    801: "Arts", 802: "Culture", 803: "Museums", 804: "Libraries",
    901: "Music", 902: "Performance art", 903: "Theatre", 904: "Visual arts",
}

FOUR_PS = frozenset(["process", "place", "person", "product"])
DECISION_LABELS = FOUR_PS | {"reject"}

DEFAULT_COOCCURRENCE_THRESHOLD = 2000
DEFAULT_MIN_AGREEMENT = 0.75


def macro_code(code):
    """Category code of a subcategory code (``403 -> 400``)."""
    macro = (int(code) // 100) * 100
    if macro not in CATEGORIES:
        raise ValueError(f"code {code} has no category in 100..900")
    return macro


@dataclass(frozen=True)
class Taxonomy:
    """Category, subcategory and term levels.

    ``terms`` maps a normalized surface to its subcategory code, so surfaces
    are unique and every term has exactly one parent by construction.
    """

    categories: dict
    subcategories: dict
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        for code in self.subcategories:
            if macro_code(code) not in self.categories:
                raise IntegrityError(f"subcategory {code} has no parent category")
        for surface, parent in self.terms.items():
            if parent not in self.subcategories:
                raise IntegrityError(f"term {surface!r} has unknown parent {parent}")
            if surface != normalize_term(surface) or not surface:
                raise IntegrityError(f"term surface {surface!r} is not normalized")

    def category_of(self, term):
        return macro_code(self.terms[term])

    def with_terms(self, terms):
        return Taxonomy(dict(self.categories), dict(self.subcategories), dict(terms))

    def to_json(self):
        doc = {
            "categories": [{"code": c, "label": self.categories[c]}
                           for c in sorted(self.categories)],
            "subcategories": [{"code": c, "label": self.subcategories[c], "parent": macro_code(c)}
                              for c in sorted(self.subcategories)],
            "terms": [{"surface": t, "parent": self.terms[t]} for t in sorted(self.terms)],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
            cats = {int(e["code"]): e["label"] for e in doc["categories"]}
            subs = {}
            for e in doc["subcategories"]:
                code = int(e["code"])
                if "parent" in e and int(e["parent"]) != macro_code(code):
                    raise IntegrityError(f"subcategory {code} declares parent {e['parent']}")
                subs[code] = e["label"]
            terms = {}
            for e in doc.get("terms", []):
                surface = normalize_term(e["surface"])
                if surface in terms:
                    raise IntegrityError(f"duplicate term surface {surface!r}")
                terms[surface] = int(e["parent"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, IntegrityError):
                raise
            raise ParseError(f"malformed taxonomy JSON: {exc}") from exc
        return cls(cats, subs, terms)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def seed_categories():
    """Levels 1 and 2: the nine categories and twenty-five coded subcategories."""
    return Taxonomy(dict(CATEGORIES), dict(SUBCATEGORIES))


# -- concept-graph expansion -------------------------------------------------

class Candidate(NamedTuple):
    term: str
    code: int
    node: str


def expand_subcategories(tax, graph, stoplist=frozenset()):
    """Attribute every 1-hop article neighbour of each subcategory page.

    A neighbour linked to several subcategory pages is emitted once per
    subcategory. Subcategory pages themselves are never candidates. Entries of
    ``stoplist`` are compared against both node slugs and normalized titles.
    """
    seeds = {}
    for code, label in sorted(tax.subcategories.items()):
        try:
            seeds[code] = graph.resolve(label)
        except UnknownKeyError:
            raise UnknownKeyError(f"subcategory {code} label {label!r} not found in concept graph") from None
    seed_nodes = set(seeds.values())
    stop = set(stoplist) | {normalize_term(s) for s in stoplist}
    out = set()
    for code, node in seeds.items():
        for nb in graph.adjacency[node]:
            if nb in seed_nodes or graph.nodes[nb].kind != ARTICLE:
                continue
            term = normalize_term(graph.nodes[nb].title)
            if nb in stop or term in stop:
                continue
            out.add(Candidate(term, code, nb))
    return sorted(out)


# -- 'is-a' filtering ------------------------------------------------------------------

class IsaResult(NamedTuple):
    kept: object
    rejected: list
    missing: list


def load_decisions(path):
    """Read a ``term \\t label`` decisions file into ``{term: label}``."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ParseError("expected 'term<TAB>label'", path=path, line=lineno)
            term, label = normalize_term(cols[0]), cols[1].strip().lower()
            if label not in DECISION_LABELS:
                raise ParseError(f"unknown decision label {cols[1]!r}", path=path, line=lineno)
            if out.get(term, label) != label:
                raise ParseError(f"conflicting decisions for {term!r}", path=path, line=lineno)
            out[term] = label
    return out


def _term(item):
    return item.term if isinstance(item, Candidate) else normalize_term(item)


def apply_isa_decisions(candidates, decisions):
    """Keep candidates labelled process, place, person or product.

    ``candidates`` is a list of :class:`Candidate` / term strings, or a mapping
    keyed by term (the filtered mapping is returned in that case).
    ``decisions`` is a path or an already loaded ``{term: label}`` dict.
    Candidates absent from the decisions are rejected and listed in
    ``missing``.
    """
    if not isinstance(decisions, Mapping):
        decisions = load_decisions(decisions)
    keys = list(candidates)
    kept, rejected, missing = [], set(), set()
    for item in keys:
        t = _term(item)
        label = decisions.get(t)
        if label is None:
            missing.add(t)
        elif label in FOUR_PS:
            kept.append(item)
        else:
            rejected.add(t)
    if isinstance(candidates, Mapping):
        kept = {k: candidates[k] for k in kept}
    return IsaResult(kept, sorted(rejected), sorted(missing))


# -- tag co-occurrences -----------------------------------------------------------

class CooccurrencePair(NamedTuple):
    seed_term: str
    other_tag: str
    count: int


def _tags_of(rec):
    return rec.tags if hasattr(rec, "tags") else rec


def _count_chunk(args):
    chunk, seeds = args
    counts = Counter()
    for tags in chunk:
        tags = set(tags)
        present = tags & seeds
        if not present:
            continue
        keys = set()
        for s in present:
            for o in tags:
                if o == s:
                    continue
                if o in seeds:
                    keys.add((s, o) if s < o else (o, s))
                else:
                    keys.add((s, o))
        counts.update(keys)
    return counts


def mine_cooccurrences(records, seed_terms, workers=1, chunk_size=5000):
    """Count, per record, each unordered (seed, other tag) pair once.

    Records are objects with a ``tags`` attribute or plain tag collections,
    already normalized. A pair of two seeds is keyed with the smaller term as
    ``seed_term``. Output is sorted by ``(seed_term, other_tag)`` and does not
    depend on ``workers``.
    """
    seeds = frozenset(normalize_term(s) for s in seed_terms)
    tag_sets = [frozenset(_tags_of(r)) for r in records]
    chunks = [(tag_sets[i:i + chunk_size], seeds) for i in range(0, len(tag_sets), chunk_size)]
    total = Counter()
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_count_chunk, chunks))
    else:
        parts = [_count_chunk(c) for c in chunks]
    for part in parts:
        total.update(part)
    return [CooccurrencePair(s, o, c) for (s, o), c in sorted(total.items())]


def write_pairs(pairs, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            fh.write(f"{p.seed_term}\t{p.other_tag}\t{p.count}\n")


def read_pairs(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            try:
                seed, other, count = cols
                count = int(count)
            except ValueError:
                raise ParseError("expected 'seed<TAB>other<TAB>count'", path=path, line=lineno) from None
            if count < 1 or seed == other:
                raise ParseError("count must be >= 1 and terms distinct", path=path, line=lineno)
            out.append(CooccurrencePair(seed, other, count))
    return out


# -- similarity-guided threshold ------------------------------------------------------

class SweepRow(NamedTuple):
    threshold: int
    mean: float | None
    std: float | None
    n: int


def threshold_sweep(pairs, lexgraph, depth, t_min=100, t_max=2500, step=100):
    """Average path similarity of pairs retained at each co-occurrence threshold.

    For every threshold ``tau`` in ``range(t_min, t_max + 1, step)`` the pairs
    with ``count >= tau`` are scored. ``n`` is the number of retained pairs;
    ``mean``/``std`` (population) are ``None`` when nothing scorable remains.
    """
    if t_min > t_max:
        raise ValueError("t_min must not exceed t_max")
    if step < 1:
        raise ValueError("step must be >= 1")
    counts = np.array([p.count for p in pairs], dtype=np.int64)
    scores = np.array([
        lexsim.path_similarity(lexgraph, p.seed_term, p.other_tag, depth)
        if p.seed_term in lexgraph and p.other_tag in lexgraph else np.nan
        for p in pairs
    ], dtype=float)
    rows = []
    for tau in range(t_min, t_max + 1, step):
        keep = counts >= tau
        sel = scores[keep]
        sel = sel[~np.isnan(sel)]
        if sel.size:
            rows.append(SweepRow(tau, float(sel.mean()), float(sel.std()), int(keep.sum())))
        else:
            rows.append(SweepRow(tau, None, None, int(keep.sum())))
    return rows


def write_sweep_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "mean", "std", "n"])
        for r in rows:
            w.writerow([r.threshold,
                        "" if r.mean is None else repr(r.mean),
                        "" if r.std is None else repr(r.std), r.n])


def apply_threshold(pairs, tau=DEFAULT_COOCCURRENCE_THRESHOLD, attribution=None):
    """Other-tag terms of pairs with ``count >= tau``, with their attribution.

    Returns ``{term: frozenset}`` where the set holds the subcategory codes of
    the seeds the term co-occurred with (via ``attribution``, a mapping of
    seed term to codes) or, without ``attribution``, the seed terms
    themselves.
    """
    if tau < 0:
        raise ValueError("threshold must be >= 0")
    out = {}
    for p in pairs:
        if p.count < tau:
            continue
        if attribution is None:
            src = {p.seed_term}
        else:
            src = set(attribution.get(p.seed_term, ()))
        out.setdefault(p.other_tag, set()).update(src)
    return {t: frozenset(v) for t, v in sorted(out.items())}


# -- agreement cleaning ---------------------------------------------------------------

class CleanResult(NamedTuple):
    kept: dict
    dropped: list
    unlabeled: list
    agreement: dict


def load_labels(path):
    """Read ``term \\t photo_id \\t {0,1}`` rows into ``{term: (positives, total)}``."""
    seen = set()
    tallies = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ParseError("expected 'term<TAB>photo_id<TAB>label'", path=path, line=lineno)
            term, photo, label = normalize_term(cols[0]), cols[1].strip(), cols[2].strip()
            if label not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {label!r}", path=path, line=lineno)
            if (term, photo) in seen:
                raise ParseError(f"duplicate label for {term!r} / {photo!r}", path=path, line=lineno)
            seen.add((term, photo))
            pos, tot = tallies.get(term, (0, 0))
            tallies[term] = (pos + (label == "1"), tot + 1)
    return tallies


def agreement_clean(terms, labels, min_agreement=DEFAULT_MIN_AGREEMENT):
    """Drop terms whose labelled agreement is below ``min_agreement``.

    Agreement is positives over labelled photos, compared exactly (the
    boundary is kept). Terms without any label are kept and listed in
    ``unlabeled``. ``terms`` may be a mapping (values are carried through) or
    an iterable of terms; ``labels`` a path or the output of
    :func:`load_labels`.
    """
    if not isinstance(labels, Mapping):
        labels = load_labels(labels)
    if not isinstance(terms, Mapping):
        terms = {normalize_term(t): None for t in terms}
    cut = Fraction(str(min_agreement))
    kept, dropped, unlabeled, agreement = {}, [], [], {}
    for term in sorted(terms):
        pos, tot = labels.get(term, (0, 0))
        if tot == 0:
            unlabeled.append(term)
            kept[term] = terms[term]
            continue
        frac = Fraction(pos, tot)
        agreement[term] = float(frac)
        if frac >= cut:
            kept[term] = terms[term]
        else:
            dropped.append(term)
    return CleanResult(kept, dropped, unlabeled, agreement)


# -- silhouette -------------------------------------------------------------------------------

@dataclass
class SilhouetteReport:
    values: dict
    cluster: dict
    flagged: list
    singletons: list
    unknown: list

    def summary(self):
        """Quartiles of the silhouette values (linear interpolation)."""
        if not self.values:
            return {"n": 0, "q1": None, "median": None, "q3": None, "mean": None}
        v = np.array([self.values[t] for t in sorted(self.values)])
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        return {"n": int(v.size), "q1": float(q1), "median": float(med),
                "q3": float(q3), "mean": float(v.mean())}

    @property
    def median(self):
        return self.summary()["median"]


def silhouette_value(sim_int, sim_ext):
    """Return ``(s, flagged)`` for one item; ``s = 0`` and flagged when both are 0."""
    top = max(sim_int, sim_ext)
    if top == 0:
        return 0.0, True
    return (sim_int - sim_ext) / top, False


def similarity_matrix(lexgraph, terms, depth):
    """Symmetric matrix of path similarities between ``terms``."""
    n = len(terms)
    sim = np.zeros((n, n))
    senses = [lexgraph.senses(t) for t in terms]
    for i, t in enumerate(terms):
        dist = lexgraph.distances(t)
        for j in range(n):
            d = min((dist[c] for c in senses[j] if c in dist), default=None)
            sim[i, j] = 0 if d is None else max(2 * depth - d, 0)
    return sim


def silhouette(assignment, lexgraph, depth):
    """Silhouette of each term against its cluster, on path similarity.

    ``sim_int`` is the mean similarity to the other members of the term's
    cluster; ``sim_ext`` the highest mean similarity to any other cluster.
    Terms missing from the lexicon, and terms alone in their cluster, get no
    value and are listed separately.
    """
    unknown = sorted(t for t in assignment if t not in lexgraph)
    known = sorted(t for t in assignment if t in lexgraph)
    labels = [assignment[t] for t in known]
    clusters = sorted(set(labels))
    if len(clusters) < 2:
        raise InsufficientDataError("silhouette needs at least two non-empty clusters")
    sim = similarity_matrix(lexgraph, known, depth)
    lab = np.array([clusters.index(c) for c in labels])
    members = [np.flatnonzero(lab == k) for k in range(len(clusters))]
    values, flagged, singletons = {}, [], []
    for i, term in enumerate(known):
        own = members[lab[i]]
        if own.size < 2:
            singletons.append(term)
            continue
        sim_int = (sim[i, own].sum() - sim[i, i]) / (own.size - 1)
        sim_ext = max(sim[i, m].mean() for k, m in enumerate(members) if k != lab[i])
        s, flag = silhouette_value(float(sim_int), float(sim_ext))
        values[term] = s
        if flag:
            flagged.append(term)
    return SilhouetteReport(values, dict(zip(known, labels)), flagged, singletons, unknown)


# -- matching and attachment ------------------------------------------------------------------

def match_tags(tags, tax):
    """Set of ``(term, subcategory)`` for tags that exactly match a term after normalization."""
    out = set()
    for tag in tags:
        key = normalize_term(tag)
        code = tax.terms.get(key)
        if code is not None:
            out.add((key, code))
    return out


def attach_terms(candidates, lexgraph, depth, base=None):
    """Resolve multi-attributed terms to a single subcategory.

    ``candidates`` maps a term to one or more subcategory codes. Terms with a
    single code are attached directly. A term with several codes goes to the
    subcategory whose singly-attributed terms (plus any already in ``base``)
    have the highest mean path similarity to it; ties, and terms for which no
    mean is defined, go to the lowest code. Because only singly-attributed
    terms are compared against, the result does not depend on iteration
    order.
    """
    base = base if base is not None else seed_categories()
    final = dict(base.terms)
    multi = {}
    for term, codes in candidates.items():
        key = normalize_term(term)
        codes = sorted(set(int(c) for c in codes))
        if not codes:
            raise ValueError(f"term {term!r} has no attribution")
        for c in codes:
            if c not in base.subcategories:
                raise UnknownKeyError(f"term {term!r} attributed to unknown subcategory {c}")
        if len(codes) == 1:
            final.setdefault(key, codes[0])
        else:
            multi[key] = codes
    members = {}
    for term, code in final.items():
        members.setdefault(code, []).append(term)
    for term in sorted(multi):
        if term in final:
            continue
        scored = []
        for code in multi[term]:
            score = _mean_similarity(lexgraph, term, members.get(code, ()), depth)
            scored.append((-math.inf if score is None else score, code))
        top = max(score for score, _ in scored)
        final[term] = min(code for score, code in scored if score == top)
    return base.with_terms(final)


def _mean_similarity(lexgraph, term, others, depth):
    if term not in lexgraph:
        return None
    scores = [lexsim.path_similarity(lexgraph, term, o, depth)
              for o in others if o != term and o in lexgraph]
    if not scores:
        return None
    return sum(scores) / len(scores)
