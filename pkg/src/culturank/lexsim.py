"""Path similarity over a WordNet-like lexical graph.

Similarity between two terms is ``2 * depth - len`` where ``len`` is the
unweighted shortest-path length between any concept of the first term and any
concept of the second, and ``depth`` is a graph-wide constant (the diameter, or
a configured value). Unreachable pairs score 0.
"""

import math
from collections import deque
from typing import NamedTuple

from .errors import EmptySampleError, ParseError, UnknownKeyError
from .normalize import normalize_term

#: Sentinel returned by :func:`shortest_len` when no path exists.
UNREACHABLE = None

DEFAULT_DEPTH = 20


class LexGraph:
    """Undirected concept graph with a lexeme index.

    Parameters
    ----------
    concepts : iterable of str
    edges : iterable of (str, str)
    lexemes : mapping of str to iterable of str, optional
        Term to concept ids. Terms are normalized. When omitted every concept
        id doubles as its own lexeme.
    """

    def __init__(self, concepts, edges, lexemes=None):
        self.concepts = frozenset(concepts)
        adj = {c: set() for c in self.concepts}
        for a, b in edges:
            if a not in adj or b not in adj:
                missing = a if a not in adj else b
                raise UnknownKeyError(f"edge references unknown concept {missing!r}")
            if a == b:
                raise ValueError(f"self-loop on concept {a!r}")
            adj[a].add(b)
            adj[b].add(a)
        self.adjacency = {c: frozenset(n) for c, n in adj.items()}
        if lexemes is None:
            lexemes = {c: [c] for c in self.concepts}
        lex = {}
        for term, ids in lexemes.items():
            key = normalize_term(term)
            ids = set(ids)
            unknown = ids - self.concepts
            if unknown:
                raise UnknownKeyError(f"lexeme {term!r} maps to unknown concept {min(unknown)!r}")
            if not ids:
                raise ValueError(f"lexeme {term!r} maps to no concept")
            lex.setdefault(key, set()).update(ids)
        self.lexemes = {k: frozenset(v) for k, v in lex.items()}
        self._dist = {}

    @classmethod
    def load(cls, path):
        """Read the section-tagged TSV format (``C``, ``E`` and ``L`` rows)."""
        concepts, edges, lexemes = set(), [], {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\r\n")
                if not line.strip() or line.startswith("#"):
                    continue
                cols = line.split("\t")
                tag = cols[0]
                if tag == "C" and len(cols) == 2:
                    concepts.add(cols[1])
                elif tag == "E" and len(cols) == 3:
                    edges.append((cols[1], cols[2]))
                elif tag == "L" and len(cols) == 3:
                    lexemes.setdefault(cols[1], set()).add(cols[2])
                else:
                    raise ParseError(f"bad lexical graph row {line!r}", path=path, line=lineno)
        return cls(concepts, edges, lexemes)

    def __contains__(self, term):
        return normalize_term(term) in self.lexemes

    def senses(self, term):
        key = normalize_term(term)
        try:
            return self.lexemes[key]
        except KeyError:
            raise UnknownKeyError(f"term {term!r} not in lexicon") from None

    def distances(self, term):
        """BFS distances from every sense of ``term`` (multi-source)."""
        key = normalize_term(term)
        cached = self._dist.get(key)
        if cached is not None:
            return cached
        dist = bfs(self.adjacency, self.senses(term))
        self._dist[key] = dist
        return dist


def bfs(adjacency, sources):
    """Unweighted single- or multi-source BFS, returning ``{node: distance}``."""
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        u = queue.popleft()
        d = dist[u] + 1
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = d
                queue.append(v)
    return dist


def shortest_len(graph, t1, t2):
    """Minimum path length between any sense of ``t1`` and any sense of ``t2``.

    Returns :data:`UNREACHABLE` (``None``) when no pair of senses is connected.
    """
    targets = graph.senses(t2)
    dist = graph.distances(t1)
    best = min((dist[c] for c in targets if c in dist), default=None)
    return best


def _components(adjacency):
    seen = set()
    for start in sorted(adjacency):
        if start in seen:
            continue
        comp = bfs(adjacency, [start])
        seen.update(comp)
        yield comp


def graph_depth(graph, mode="exact"):
    """Depth constant for path similarity.

    ``mode="exact"`` computes the diameter of the largest connected component
    by all-pairs BFS (ties on size go to the component holding the smallest
    concept id). An integer ``mode`` is returned unchanged after validation.
    """
    if mode != "exact":
        d = int(mode)
        if d != mode or d <= 0:
            raise ValueError(f"configured depth must be a positive integer, got {mode!r}")
        return d
    if not graph.concepts:
        raise ValueError("graph is empty")
    largest = max(_components(graph.adjacency), key=len)
    return max(max(bfs(graph.adjacency, [u]).values()) for u in sorted(largest))


def path_similarity(graph, t1, t2, depth):
    """``2 * depth - len(t1, t2)``; unreachable pairs score 0.

    Paths longer than ``2 * depth`` (possible only with a configured depth
    smaller than the true diameter) are clamped to 0.
    """
    n = shortest_len(graph, t1, t2)
    if n is UNREACHABLE:
        return 0
    return max(2 * depth - n, 0)


class PairSimilarity(NamedTuple):
    mean: float
    std: float
    n: int
    skipped: int


def avg_pair_similarity(graph, pairs, depth):
    """Mean and population standard deviation of path similarity over pairs.

    Pairs with a term missing from the lexicon are skipped and counted.
    """
    scores = []
    skipped = 0
    for t1, t2 in pairs:
        if t1 not in graph or t2 not in graph:
            skipped += 1
            continue
        scores.append(path_similarity(graph, t1, t2, depth))
    if not scores:
        raise EmptySampleError(f"no scorable pairs ({skipped} skipped)")
    mean, std = mean_std(scores)
    return PairSimilarity(mean, std, len(scores), skipped)


def mean_std(values):
    """Arithmetic mean and population standard deviation."""
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)
