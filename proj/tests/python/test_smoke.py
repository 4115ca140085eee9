"""Smoke tests for the python bindings."""

import numpy as np
import pytest

import hinembed


@pytest.fixture(scope="module")
def synth():
    graph, labels = hinembed.synthesize(
        communities=3, members=40, hubs=2, peers=4, noise=0.1, seed=5
    )
    return graph, labels


def test_synthesize_shapes(synth):
    graph, labels = synth
    assert graph.num_nodes == 3 * 40 + 3 * 2
    assert graph.count_of_type("M") == 120
    assert set(graph.relation_names()) == {"MH", "MM"}
    assert len(labels) == 120
    assert set(labels.values()) == {0, 1, 2}


def test_analyze_categories(synth):
    graph, _ = synth
    stats = hinembed.analyze(graph)
    by_name = {s.name: s for s in stats}
    assert by_name["MH"].category == "AR"
    assert by_name["MM"].category == "IR"
    assert by_name["MH"].degree_ratio > by_name["MM"].degree_ratio
    assert by_name["MM"].degree_ratio == pytest.approx(1.0)


def test_train_and_cluster(synth):
    graph, labels = synth
    emb, report = hinembed.train(graph, dim=12, epochs=12, lr=0.02, seed=3)
    assert emb.num_nodes == graph.num_nodes
    assert emb.dim == 12
    arr = emb.to_numpy()
    assert arr.shape == (graph.num_nodes, 12)
    assert np.isfinite(arr).all()
    assert len(report.epoch_losses) == 12
    assert report.deterministic

    nmi = hinembed.cluster_nmi(emb, graph, labels, seed=7)
    assert nmi > 0.7


def test_seeded_training_is_reproducible(synth):
    graph, _ = synth
    a, _ = hinembed.train(graph, dim=8, epochs=4, seed=11)
    b, _ = hinembed.train(graph, dim=8, epochs=4, seed=11)
    c, _ = hinembed.train(graph, dim=8, epochs=4, seed=12)
    assert np.array_equal(a.to_numpy(), b.to_numpy())
    assert not np.array_equal(a.to_numpy(), c.to_numpy())


def test_classify_and_linkpred(synth):
    graph, labels = synth
    emb, _ = hinembed.train(graph, dim=12, epochs=12, lr=0.02, seed=3)
    macro, micro = hinembed.classify(emb, graph, labels, seed=5)
    assert 0.0 <= macro <= 1.0
    assert micro > 0.5

    auc, f1 = hinembed.link_predict(graph, "MM", dim=12, epochs=12, lr=0.02, seed=3)
    assert 0.0 <= f1 <= 1.0
    assert auc > 0.5


def test_load_graph_errors(tmp_path):
    nodes = tmp_path / "nodes.tsv"
    edges = tmp_path / "edges.tsv"
    schema = tmp_path / "schema.tsv"
    nodes.write_text("a\tA\nb\tB\n")
    schema.write_text("E\tA\tB\tdirected\n")
    edges.write_text("a\tmissing\tE\n")
    with pytest.raises(RuntimeError, match="dangling"):
        hinembed.load_graph(str(nodes), str(edges), str(schema))
    edges.write_text("a\tb\tE\n")
    graph = hinembed.load_graph(str(nodes), str(edges), str(schema))
    assert graph.num_edges == 1
