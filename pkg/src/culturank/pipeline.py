"""End-to-end wiring of the stages, shared by the command line and scripts."""

from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import ingest, lexsim, metrics, taxonomy as tx
from .concept_graph import load_concept_graph, load_stoplist


def _year_of(ts):
    return datetime.fromtimestamp(ts, tz=timezone.utc).year


@dataclass
class CityData:
    stats: dict
    neighborhoods: list
    report: dict = field(default_factory=dict)


def load_city(records_path, neighborhoods_path, taxonomy_path, local_days=ingest.DEFAULT_LOCAL_DAYS,
              local_mode="span", years=None, workers=1):
    """Read, filter and assign records, then aggregate per-location stats.

    ``years`` restricts records to those UTC years (inclusive collection).
    The local-user filter runs before the year restriction so a user's
    activity span is measured over the whole file.
    """
    tax = tx.Taxonomy.load(taxonomy_path)
    nbs = ingest.load_neighborhoods(neighborhoods_path)
    stream = ingest.load_records(records_path)
    records = list(stream)
    local = ingest.local_user_filter(records, days=local_days, mode=local_mode)
    if years is not None:
        years = set(years)
        local = [r for r in local if _year_of(r.timestamp) in years]
    assigned = ingest.assign_all(local, nbs, workers=workers)
    stats = metrics.aggregate_stats(assigned, tax, locations=[n.id for n in nbs])
    report = {
        "records_read": stream.read,
        "records_skipped": stream.skipped,
        "records_local": len(local),
        "records_unassigned": sum(1 for loc, _ in assigned if loc is None),
        "records_cultural": sum(1 for _, r in assigned if tx.match_tags(r.tags, tax)),
    }
    return CityData(stats, nbs, report)


@dataclass
class TaxonomyBuild:
    """Term sets after each stage, plus the attached taxonomy."""

    wiki: dict
    flickr: dict
    aug: dict
    val: dict
    taxonomy: tx.Taxonomy
    pairs: list
    reports: dict = field(default_factory=dict)

    def stage_assignments(self, stage):
        """``{term: category code}`` for a stage's terms (multi-attributed take the lowest)."""
        terms = getattr(self, stage)
        return {t: tx.macro_code(min(codes)) for t, codes in terms.items()}


def _merge(*maps):
    out = {}
    for m in maps:
        for t, codes in m.items():
            out.setdefault(t, set()).update(codes)
    return {t: frozenset(c) for t, c in sorted(out.items())}


def build_taxonomy(graph, lexgraph, records, decisions, labels, depth="exact",
                   stoplist=frozenset(), threshold=tx.DEFAULT_COOCCURRENCE_THRESHOLD,
                   second_decisions=None, min_agreement=tx.DEFAULT_MIN_AGREEMENT, workers=1):
    """Run expansion, both 'is-a' filters, co-occurrence threshold, cleaning and attachment.

    ``graph``/``lexgraph`` may be loaded objects or ``(edges, titles)`` /
    path arguments. The Flickr stage seeds on the kept concept-graph terms;
    co-occurring tags inherit their seeds' subcategories. ``aug`` merges the
    two sources; the second decisions file (default: the first) filters it;
    cleaning produces ``val``.
    """
    if isinstance(graph, tuple):
        graph = load_concept_graph(*graph)
    if not isinstance(lexgraph, lexsim.LexGraph):
        lexgraph = lexsim.LexGraph.load(lexgraph)
    if isinstance(stoplist, str):
        stoplist = load_stoplist(stoplist)
    d = lexsim.graph_depth(lexgraph, depth)
    seed = tx.seed_categories()

    cands = tx.expand_subcategories(seed, graph, stoplist)
    first = tx.apply_isa_decisions(cands, decisions)
    wiki = _merge({c.term: {c.code} for c in first.kept})

    pairs = tx.mine_cooccurrences(records, wiki, workers=workers)
    flickr = tx.apply_threshold(pairs, threshold, attribution=wiki)
    flickr = {t: c for t, c in flickr.items() if c}
    aug = _merge(wiki, flickr)

    second = tx.apply_isa_decisions(aug, second_decisions or decisions)
    cleaned = tx.agreement_clean(second.kept, labels, min_agreement)
    val = dict(cleaned.kept)
    final = tx.attach_terms(val, lexgraph, d, base=seed)
    reports = {
        "candidates": len(cands),
        "first_isa": {"kept": len(first.kept), "rejected": first.rejected, "missing": first.missing},
        "pairs": len(pairs),
        "second_isa": {"kept": len(second.kept), "rejected": second.rejected,
                       "missing": second.missing},
        "clean": {"kept": len(cleaned.kept), "dropped": cleaned.dropped,
                  "unlabeled": cleaned.unlabeled},
        "depth": d,
    }
    return TaxonomyBuild(wiki, flickr, aug, val, final, pairs, reports)
