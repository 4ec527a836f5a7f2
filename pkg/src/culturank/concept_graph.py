"""Linked-concept graph (wiki page/category links) used to seed the taxonomy.

The graph is loaded from two TSV files: an edge list of slug pairs and a
``slug \\t title`` table. Each node is classified as an ``article`` or a
``community`` page from its title; community pages never take part in
expansion.
"""

from dataclasses import dataclass, field
from types import MappingProxyType

from .errors import IntegrityError, ParseError, UnknownKeyError
from .normalize import normalize_term

ARTICLE = "article"
COMMUNITY = "community"

COMMUNITY_NAMESPACES = frozenset([
    "wikipedia", "wikiprojects", "lists", "mediawiki", "template",
    "user", "portal", "categories", "articles", "images",
])
# Singular spellings as they appear in real page titles.
_NAMESPACE_ALIASES = frozenset(["wikiproject", "list", "category", "article", "image"])
_LIST_PREFIXES = ("list of ", "lists of ")


def classify_community(title):
    """Return ``"community"`` for non-article pages, ``"article"`` otherwise.

    A title is a community page when its namespace token (the text before the
    first colon, lowercased, with a trailing ``" talk"`` removed) is one of the
    excluded namespaces, when it starts with ``"WikiProject"``, or when it is a
    ``"List of ..."`` / ``"Lists of ..."`` page.
    """
    low = title.strip().lower()
    if low.startswith(_LIST_PREFIXES) or low.startswith("wikiproject"):
        return COMMUNITY
    if ":" in low:
        ns = low.split(":", 1)[0].strip()
        if ns.endswith(" talk"):
            ns = ns[: -len(" talk")]
        if ns in COMMUNITY_NAMESPACES or ns in _NAMESPACE_ALIASES:
            return COMMUNITY
    return ARTICLE


@dataclass(frozen=True)
class ConceptNode:
    id: str
    title: str
    kind: str

    def __post_init__(self):
        if not self.id:
            raise IntegrityError("concept node id must be non-empty")


@dataclass(frozen=True)
class ConceptGraph:
    """Undirected, deduplicated concept graph.

    Build with :meth:`from_edges` or :func:`load_concept_graph`; instances are
    read-only afterwards.
    """

    nodes: MappingProxyType
    adjacency: MappingProxyType
    edges: frozenset = field(repr=False)

    @classmethod
    def from_edges(cls, titles, edges):
        """Build a graph from a ``{slug: title}`` mapping and slug pairs."""
        nodes = {}
        for slug, title in titles.items():
            nodes[slug] = ConceptNode(slug, title, classify_community(title))
        adj = {slug: set() for slug in nodes}
        edge_set = set()
        for a, b in edges:
            for end in (a, b):
                if end not in nodes:
                    raise IntegrityError(f"edge endpoint {end!r} has no title entry")
            if a == b:
                raise IntegrityError(f"self-loop on {a!r}")
            edge_set.add((a, b) if a < b else (b, a))
            adj[a].add(b)
            adj[b].add(a)
        return cls(
            nodes=MappingProxyType(nodes),
            adjacency=MappingProxyType({k: frozenset(v) for k, v in adj.items()}),
            edges=frozenset(edge_set),
        )

    def __contains__(self, slug):
        return slug in self.nodes

    def resolve(self, label):
        """Find the node id for a label, by exact title, slug, then normalized title."""
        if label in self.nodes:
            return label
        by_title = [n.id for n in self.nodes.values() if n.title == label]
        if not by_title:
            key = normalize_term(label)
            by_title = [n.id for n in self.nodes.values()
                        if normalize_term(n.title) == key or normalize_term(n.id) == key]
        if not by_title:
            raise UnknownKeyError(f"no concept node for label {label!r}")
        articles = [i for i in by_title if self.nodes[i].kind == ARTICLE]
        return min(articles or by_title)

    def to_tsv(self):
        """Serialize edges as sorted TSV text (used for determinism checks)."""
        return "".join(f"{a}\t{b}\n" for a, b in sorted(self.edges))


def _read_rows(path, ncols):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != ncols or not all(c.strip() for c in cols):
                raise ParseError(f"expected {ncols} tab-separated columns, got {len(cols)}",
                                 path=path, line=lineno)
            yield lineno, [c.strip() for c in cols]


def load_concept_graph(edges_path, titles_path):
    """Load a concept graph from an edge TSV and a ``slug \\t title`` TSV.

    Raises
    ------
    ParseError
        A row has the wrong arity; the message carries the line number.
    IntegrityError
        An edge references a slug missing from the titles file, or a slug is
        listed twice in the titles file.
    """
    titles = {}
    for lineno, (slug, title) in _read_rows(titles_path, 2):
        if slug in titles:
            raise IntegrityError(f"{titles_path}:{lineno}: duplicate slug {slug!r}")
        titles[slug] = title
    edges = [tuple(cols) for _, cols in _read_rows(edges_path, 2)]
    return ConceptGraph.from_edges(titles, edges)


def load_stoplist(path):
    """One slug or term per line; blank and ``#`` lines ignored."""
    out = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if s and not s.startswith("#"):
                out.add(s)
    return frozenset(out)


def neighbors_1hop(graph, seeds):
    """Direct article neighbours of ``seeds``, excluding the seeds themselves.

    Returns a list sorted by node id.
    """
    seeds = set(seeds)
    out = set()
    for s in seeds:
        if s not in graph.adjacency:
            raise UnknownKeyError(f"unknown seed node {s!r}")
        out.update(graph.adjacency[s])
    out -= seeds
    return sorted(n for n in out if graph.nodes[n].kind == ARTICLE)
