import pytest
from hypothesis import given, settings, strategies as st

from culturank.concept_graph import (
    ARTICLE, COMMUNITY, ConceptGraph, classify_community, load_concept_graph, load_stoplist,
    neighbors_1hop,
)
from culturank.errors import IntegrityError, ParseError, UnknownKeyError

from conftest import write


def _graph(tmp_path, edges, titles):
    e = write(tmp_path / "edges.tsv", "".join(f"{r}\n" for r in edges))
    t = write(tmp_path / "titles.tsv", "".join(f"{s}\t{n}\n" for s, n in titles.items()))
    return load_concept_graph(e, t)


ABC = {"a": "A", "b": "B", "c": "C"}


def test_duplicate_rows_are_merged(tmp_path):
    g = _graph(tmp_path, ["a\tb", "b\tc", "a\tb"], ABC)
    assert len(g.nodes) == 3
    assert g.edges == {("a", "b"), ("b", "c")}


def test_reversed_duplicate_is_one_edge(tmp_path):
    g = _graph(tmp_path, ["a\tb", "b\ta"], ABC)
    assert len(g.edges) == 1


def test_one_column_row_reports_line(tmp_path):
    with pytest.raises(ParseError) as exc:
        _graph(tmp_path, ["# header", "a\tb", "a"], ABC)
    assert exc.value.line == 3
    assert ":3:" in str(exc.value)


def test_dangling_endpoint_named(tmp_path):
    with pytest.raises(IntegrityError, match="'z'"):
        _graph(tmp_path, ["a\tz"], ABC)


def test_self_loop_rejected(tmp_path):
    with pytest.raises(IntegrityError):
        _graph(tmp_path, ["a\ta"], ABC)


def test_duplicate_title_slug(tmp_path):
    e = write(tmp_path / "e.tsv", "a\tb\n")
    t = write(tmp_path / "t.tsv", "a\tA\nb\tB\na\tAgain\n")
    with pytest.raises(IntegrityError):
        load_concept_graph(e, t)


def test_comment_and_blank_lines_ignored(tmp_path):
    g = _graph(tmp_path, ["# comment", "", "a\tb"], ABC)
    assert g.edges == {("a", "b")}


@pytest.mark.parametrize("title, kind", [
    ("Template:Infobox", COMMUNITY),
    ("Architecture", ARTICLE),
    ("WikiProject Music", COMMUNITY),
    ("wikipedia:About", COMMUNITY),
    ("Portal:Arts", COMMUNITY),
    ("Category:Design", COMMUNITY),
    ("User talk:Someone", COMMUNITY),
    ("MediaWiki:Sidebar", COMMUNITY),
    ("Images:Logo.png", COMMUNITY),
    ("List of museums in London", COMMUNITY),
    ("Lists of painters", COMMUNITY),
    ("Listening", ARTICLE),
    ("Star Wars: A New Hope", ARTICLE),
    ("Blade Runner", ARTICLE),
])
def test_classify_community(title, kind):
    assert classify_community(title) == kind


def test_neighbors_direct():
    g = ConceptGraph.from_edges({"s": "S", "x": "X", "y": "Y", "z": "Z"},
                                [("s", "x"), ("s", "y"), ("x", "z")])
    assert neighbors_1hop(g, {"s"}) == ["x", "y"]


def test_neighbors_skip_community():
    g = ConceptGraph.from_edges({"s": "S", "x": "X", "t": "Template:S"},
                                [("s", "x"), ("s", "t")])
    assert neighbors_1hop(g, {"s"}) == ["x"]


def test_neighbors_shared_once():
    g = ConceptGraph.from_edges({"s": "S", "r": "R", "x": "X"}, [("s", "x"), ("r", "x")])
    assert neighbors_1hop(g, {"s", "r"}) == ["x"]


def test_neighbors_excludes_seeds():
    g = ConceptGraph.from_edges({"s": "S", "r": "R", "x": "X"}, [("s", "r"), ("r", "x")])
    assert neighbors_1hop(g, {"s", "r"}) == ["x"]


def test_neighbors_unknown_seed():
    g = ConceptGraph.from_edges({"s": "S"}, [])
    with pytest.raises(UnknownKeyError, match="nope"):
        neighbors_1hop(g, {"nope"})
    with pytest.raises(KeyError):
        neighbors_1hop(g, {"nope"})


def test_resolve_prefers_articles():
    g = ConceptGraph.from_edges({"cat_music": "Category:Music", "music": "Music"}, [])
    assert g.resolve("Music") == "music"
    assert g.resolve("music") == "music"
    assert g.resolve("MUSIC") == "music"
    with pytest.raises(UnknownKeyError):
        g.resolve("Opera")


def test_stoplist(tmp_path):
    p = write(tmp_path / "stop.txt", "# ambiguous\ncolor\n\n  shape \n")
    assert load_stoplist(p) == {"color", "shape"}


# -- properties ---------------------------------------------------------------------------

_titles = st.sampled_from(["Art", "Music", "Template:X", "List of things", "Portal:Y",
                           "WikiProject Z", "Film", "Opera", "User:Q"])


@st.composite
def graphs(draw):
    n = draw(st.integers(2, 12))
    titles = {f"n{i}": draw(_titles) for i in range(n)}
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=30))
    edges = [(f"n{a}", f"n{b}") for a, b in pairs if a != b]
    return ConceptGraph.from_edges(titles, edges)


@given(graphs(), st.data())
@settings(max_examples=150, deadline=None)
def test_neighbors_properties(g, data):
    ids = sorted(g.nodes)
    b = set(data.draw(st.lists(st.sampled_from(ids), min_size=1, unique=True)))
    a = set(data.draw(st.lists(st.sampled_from(sorted(b)), min_size=1, unique=True)))
    ra, rb = neighbors_1hop(g, a), neighbors_1hop(g, b)
    for res, seeds in ((ra, a), (rb, b)):
        assert res == sorted(set(res))
        assert not set(res) & seeds
        assert all(g.nodes[n].kind == ARTICLE for n in res)
    assert set(ra) - b <= set(rb)


def test_load_is_deterministic(tmp_path):
    rows = ["c\ta", "b\ta", "c\tb", "a\tb"]
    g1 = _graph(tmp_path, rows, ABC)
    g2 = _graph(tmp_path, list(reversed(rows)), ABC)
    assert g1.to_tsv() == g2.to_tsv() == "a\tb\na\tc\nb\tc\n"
