import itertools
import math
import random

import pytest

from oracles import ged_brute
from orgchart.evalmetrics import (
    GedBoundError,
    GedConfig,
    cosine_similarity,
    evaluate,
    graph_edit_distance,
    match_nodes,
    node_similarity,
    structural_accuracy,
    tokenize,
    total_score,
)
from orgchart.model import BBox, OrgGraph, OrgNode

B = BBox(0, 0, 4, 4)


def graph(texts, edges, root=1):
    """Graph with ids 1..n; ``edges`` are (parent, child) pairs."""
    parent = {c: p for p, c in edges}
    level = {}

    def lv(i):
        if i not in level:
            level[i] = 0 if parent.get(i) is None else lv(parent[i]) + 1
        return level[i]

    nodes = [OrgNode(i, B, t, lv(i), parent.get(i)) for i, t in enumerate(texts, 1)]
    return OrgGraph(tuple(nodes), frozenset(edges), root if texts else None)


def random_graph(rng, max_nodes, vocab):
    n = rng.randint(0, max_nodes)
    texts = [rng.choice(vocab) for _ in range(n)]
    edges = [(rng.randint(1, i - 1), i) for i in range(2, n + 1) if rng.random() < 0.8]
    return graph(texts, edges)


def labeled(g):
    index = {n.id: i for i, n in enumerate(g.nodes)}
    return [n.text for n in g.nodes], {(index[p], index[c]) for p, c in g.edges}


# -- tokens and cosine -------------------------------------------------------------

@pytest.mark.parametrize("text,counts", [
    ("CEO", {"ceo": 1}),
    ("Chief Executive Officer", {"chief": 1, "executive": 1, "officer": 1}),
    ("VP, Sales & VP, Ops", {"vp": 2, "sales": 1, "ops": 1}),
    ("", {}),
])
def test_tokenize(text, counts):
    assert dict(tokenize(text).counts) == counts


def test_cosine_examples():
    a = tokenize("chief executive officer")
    assert cosine_similarity(a, tokenize("chief officer")) == pytest.approx(2 / (math.sqrt(3) * math.sqrt(2)), abs=1e-12)
    assert cosine_similarity(a, a) == 1.0
    assert cosine_similarity(a, tokenize("vp sales")) == 0.0
    assert cosine_similarity(a, tokenize("")) == 0.0


def test_cosine_symmetric_and_order_free():
    rng = random.Random(4)
    words = "vp sales ops chief head of it".split()
    for _ in range(200):
        a = " ".join(rng.choices(words, k=rng.randint(0, 6)))
        b = " ".join(rng.choices(words, k=rng.randint(0, 6)))
        ta, tb = tokenize(a), tokenize(b)
        assert cosine_similarity(ta, tb) == cosine_similarity(tb, ta)
        assert cosine_similarity(tokenize(" ".join(reversed(a.split()))), tb) == \
            pytest.approx(cosine_similarity(ta, tb))
        # scalar multiples score 1
        if a:
            assert cosine_similarity(ta, tokenize(a + " " + a)) == pytest.approx(1.0)


# -- matching and scores -----------------------------------------------------------

def test_two_managers_one_match():
    gt = graph(["Manager", "Manager"], [(1, 2)])
    pred = graph(["Manager"], [])
    m = match_nodes(gt, pred)
    assert [(g, p) for g, p, _ in m.pairs] == [(1, 1)]
    assert m.unmatched_gt == (2,)


def test_match_threshold_is_strict():
    gt = graph(["chief executive officer"], [])
    pred = graph(["chief officer"], [])
    assert match_nodes(gt, pred).pairs == ()
    assert len(match_nodes(gt, pred, tau=0.8).pairs) == 1


def test_node_similarity_counts():
    gt = graph(["a", "b", "c"], [(1, 2), (1, 3)])
    pred = graph(["a", "b"], [(1, 2)])
    assert node_similarity(match_nodes(gt, pred), 3) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        node_similarity(match_nodes(gt, pred), 0)


def test_structural_accuracy_half():
    gt = graph(["A", "B", "C"], [(1, 2), (1, 3)])
    pred = graph(["A", "B", "C"], [(1, 2), (2, 3)])
    assert structural_accuracy(gt, pred, match_nodes(gt, pred)) == 0.5


def test_structural_accuracy_nothing_matched():
    gt = graph(["A", "B"], [(1, 2)])
    pred = graph(["x", "y"], [(1, 2)])
    assert structural_accuracy(gt, pred, match_nodes(gt, pred)) == 0.0


def test_single_node_graph():
    g = graph(["CEO"], [])
    assert evaluate(g, g).structural_accuracy == 1.0
    r = evaluate(g, OrgGraph.empty())
    assert (r.node_similarity, r.structural_accuracy, r.total_score) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("ns,sa,ts", [(1, 1, 1), (0.6667, 0.5, 0.58335), (0, 0, 0)])
def test_total_score(ns, sa, ts):
    assert total_score(ns, sa) == pytest.approx(ts)


def test_total_score_reported_table_value():
    # the best reported model: N_S 0.86274, S_A 0.530956, total 0.696851
    assert total_score(0.86274, 0.530956) == pytest.approx(0.696851, abs=1e-4)


def test_self_evaluation_is_one():
    rng = random.Random(7)
    for _ in range(50):
        g = random_graph(rng, 8, [f"name {i}" for i in range(40)])
        if not g.nodes:
            continue
        # texts must be distinct for a perfect self-match
        g = graph([f"person {i}" for i in range(len(g.nodes))], sorted(g.edges))
        r = evaluate(g, g)
        assert (r.node_similarity, r.structural_accuracy, r.total_score) == (1.0, 1.0, 1.0)


def test_scores_in_unit_interval():
    rng = random.Random(11)
    vocab = ["ceo", "vp sales", "vp ops", "manager", "head of it", "cto", "intern"]
    for _ in range(300):
        gt = random_graph(rng, 8, vocab)
        if not gt.nodes:
            continue
        r = evaluate(gt, random_graph(rng, 8, vocab))
        for v in (r.node_similarity, r.structural_accuracy, r.total_score):
            assert 0.0 <= v <= 1.0


def test_matching_ignores_input_order():
    gt = graph(["a", "a", "b"], [(1, 2), (1, 3)])
    pred = graph(["b", "a", "a"], [(2, 1), (2, 3)])
    rev = OrgGraph(tuple(reversed(pred.nodes)), pred.edges, pred.root_id)
    assert match_nodes(gt, pred) == match_nodes(gt, rev)


# -- graph edit distance -----------------------------------------------------------

def test_ged_examples():
    chain = graph(["a", "b", "c"], [(1, 2), (2, 3)])
    star = graph(["a", "b", "c"], [(1, 2), (1, 3)])
    assert graph_edit_distance(chain, chain) == 0
    assert graph_edit_distance(chain, star) == 2
    plus = graph(["a", "b", "c", "d"], [(1, 2), (2, 3)])
    assert graph_edit_distance(chain, plus) == 1
    assert graph_edit_distance(OrgGraph.empty(), chain) == 5


def test_ged_matches_brute_force():
    rng = random.Random(2)
    vocab = ["a", "b", "c"]
    for _ in range(60):
        g1, g2 = random_graph(rng, 4, vocab), random_graph(rng, 4, vocab)
        costs = tuple(rng.choice([0.5, 1.0, 2.0]) for _ in range(5))
        cfg = GedConfig(*costs)
        assert graph_edit_distance(g1, g2, cfg) == ged_brute(*labeled(g1), *labeled(g2), costs)


def test_ged_symmetry_and_triangle():
    rng = random.Random(9)
    vocab = ["a", "b"]
    graphs = [random_graph(rng, 4, vocab) for _ in range(12)]
    d = {}
    for i, j in itertools.product(range(len(graphs)), repeat=2):
        d[i, j] = graph_edit_distance(graphs[i], graphs[j])
        assert d[i, j] == ged_brute(*labeled(graphs[i]), *labeled(graphs[j]))
    for i, j in d:
        assert d[i, j] == d[j, i]
    for i, j, k in itertools.product(range(len(graphs)), repeat=3):
        assert d[i, k] <= d[i, j] + d[j, k]


def test_ged_bound():
    big = graph([str(i) for i in range(7)], [(1, i) for i in range(2, 8)])
    with pytest.raises(GedBoundError, match="exact GED bound"):
        graph_edit_distance(big, big)


def test_ged_config_rejects_negative():
    with pytest.raises(ValueError):
        GedConfig(node_ins=-1)
