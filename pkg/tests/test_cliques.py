import random
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import A, B, C, D, E, F, G, letters
from streamph.cliques import CliqueRegistry, maximal_filter, stream_simplices
from streamph.edges import sorted_edges
from streamph.oracle import bron_kerbosch, rips_batch
from streamph.types import ContractError, Edge, InputError


def paper_registry(max_dim=4):
    return CliqueRegistry.from_cliques(7, max_dim, [(A, B, C, F), (A, B, C, G), (D, E, F), (D, E, G)])


PAPER_NEW = ["fg", "afg", "bfg", "cfg", "dfg", "efg", "abfg", "acfg", "bcfg", "defg", "abcfg"]


def test_init_registry():
    assert CliqueRegistry(1, 1).sorted_cliques() == [(0,)]
    assert CliqueRegistry(3, 2).sorted_cliques() == [(0,), (1,), (2,)]
    reg = CliqueRegistry(7, 3)
    assert len(reg) == 7
    assert all(reg.by_vertex[v] == {frozenset((v,))} for v in range(7))
    with pytest.raises(InputError):
        CliqueRegistry(0, 2)


def test_cliques_containing_fresh():
    assert CliqueRegistry(3, 2).cliques_containing(2) == {frozenset((2,))}
    with pytest.raises(InputError):
        CliqueRegistry(3, 2).cliques_containing(3)


def test_paper_graph_built_incrementally(paper_edges):
    reg = CliqueRegistry(7, 4)
    for e in paper_edges:
        reg.process_edge(e)
    assert {letters(c) for c in reg.sorted_cliques()} == {"abcf", "abcg", "def", "deg"}
    assert {letters(sorted(c)) for c in reg.cliques_containing(F)} == {"abcf", "def"}
    assert {letters(sorted(c)) for c in reg.cliques_containing(G)} == {"abcg", "deg"}


def test_paper_edge_fg():
    reg = paper_registry()
    out = reg.process_edge(Edge(F, G, 1.0))
    assert sorted(letters(s.vertices) for s in out) == sorted(PAPER_NEW)
    assert len(out) == 11
    assert {letters(c) for c in reg.sorted_cliques()} == {"abcfg", "defg"}
    assert all(s.filtration == 1.0 for s in out)


def test_paper_edge_fg_capped():
    out = paper_registry(max_dim=2).process_edge(Edge(F, G, 1.0))
    expected = [s for s in PAPER_NEW if len(s) <= 3]
    assert [letters(s.vertices) for s in out] == ["fg", "afg", "bfg", "cfg", "dfg", "efg"]
    assert sorted(expected) == sorted(letters(s.vertices) for s in out)


def test_emission_is_simplex_ordered():
    out = paper_registry().process_edge(Edge(F, G, 1.0))
    keys = [(len(s.vertices), s.vertices) for s in out]
    assert keys == sorted(keys)


def test_isolated_edge():
    reg = CliqueRegistry(2, 3)
    out = reg.process_edge(Edge(0, 1, 0.5))
    assert [s.vertices for s in out] == [(0, 1)]
    assert reg.sorted_cliques() == [(0, 1)]


def test_edge_errors():
    reg = CliqueRegistry(3, 2)
    with pytest.raises(InputError):
        reg.process_edge(Edge(1, 1, 0.0))
    reg.process_edge(Edge(0, 1, 1.0))
    with pytest.raises(ContractError):
        reg.process_edge(Edge(0, 1, 1.0))


def test_maximal_filter_examples():
    abc, ab, de, empty = frozenset("abc"), frozenset("ab"), frozenset("de"), frozenset()
    assert set(maximal_filter([abc, ab, de])) == {abc, de}
    assert set(maximal_filter([empty, abc, empty, de])) == {abc, de}
    assert maximal_filter([abc, abc]) == [abc]


def test_maximal_filter_random_vs_quadratic():
    rng = random.Random(11)
    for _ in range(20):
        sets = [frozenset(x for x in range(10) if rng.random() < 0.4) for _ in range(50)]
        uniq = set(sets)
        oracle = {c for c in uniq if not any(c < o for o in uniq)}
        got = maximal_filter(sets)
        assert len(got) == len(set(got))
        assert set(got) == oracle


graphs = st.integers(2, 9).flatmap(
    lambda n: st.tuples(st.just(n), st.permutations(list(combinations(range(n), 2)))
                        .flatmap(lambda p: st.integers(0, len(p)).map(lambda k: p[:k]))))


@settings(max_examples=60, deadline=None)
@given(graphs)
def test_registry_matches_bron_kerbosch_every_prefix(graph):
    n, edges = graph
    reg = CliqueRegistry(n, n)
    adj = np.zeros((n, n), dtype=bool)
    for i, (s, t) in enumerate(edges):
        reg.process_edge(Edge(s, t, float(i)))
        adj[s, t] = adj[t, s] = True
        assert reg.cliques == bron_kerbosch(adj)
        # antichain and by_vertex consistency
        cl = list(reg.cliques)
        assert not any(a < b for a in cl for b in cl)
        for v in range(n):
            assert reg.by_vertex[v] == {c for c in cl if v in c}


@settings(max_examples=40, deadline=None)
@given(graphs, st.integers(1, 4))
def test_freshness_and_no_repeats(graph, max_dim):
    n, edges = graph
    reg = CliqueRegistry(n, max_dim)
    seen = set()
    for i, (s, t) in enumerate(edges):
        for simplex in reg.process_edge(Edge(s, t, float(i))):
            assert s in simplex.vertices and t in simplex.vertices
            assert simplex.dim <= max_dim
            assert simplex.vertices not in seen
            seen.add(simplex.vertices)


@pytest.mark.parametrize("seed", range(10))
def test_stream_completeness(seed):
    rng = np.random.default_rng(seed)
    n, max_dim, eps = int(rng.integers(3, 16)), int(rng.integers(1, 4)), float(rng.uniform(0.3, 0.8))
    pts = rng.random((n, 2))
    got = sorted((s.vertices, s.filtration) for s in stream_simplices(sorted_edges(pts, max_epsilon=eps), n, max_dim))
    want = sorted((s.vertices, s.filtration) for s in rips_batch(pts, eps, max_dim))
    assert got == want


def test_listing_threshold_is_wrong():
    reg = CliqueRegistry(3, 2, listing_threshold=True)
    reg.process_edge(Edge(0, 1, 1.0))
    # the isolated vertex 2 was dropped even though it is still maximal
    assert frozenset((2,)) not in reg.cliques
