from __future__ import annotations

import pytest

from rwm.errors import (
    DeltaError,
    DuplicateNodeError,
    FrozenModelError,
    SignatureError,
    UnknownElementError,
    ValidationError,
)
from rwm.worldmodel import (
    Delta,
    Edge,
    MetricVector,
    Node,
    NodeKind,
    ProvenanceStamp,
    Relation,
    WorldModel,
    create_empty,
)


def test_create_empty_has_no_elements():
    wm = create_empty()
    assert wm.node_count() == 0
    assert wm.edge_count() == 0
    assert wm.schema_version == 1


def test_add_node_starts_unverified():
    wm = create_empty()
    node_id = wm.add_node(Node.method(name="Safe-PPO"))
    assert wm.uncertainty_of(node_id) == 1
    assert wm.node_count() == 1


def test_add_module_accepts_listed_types():
    wm = create_empty()
    node_id = wm.add_node(Node.module(name="contrastive loss", module_type="loss"))
    assert wm.get_node(node_id).attributes["module_type"] == "loss"


def test_add_module_rejects_unknown_type():
    with pytest.raises(ValidationError):
        Node.module(name="TPU kernel", module_type="hardware")


def test_add_duplicate_canonical_key_rejected():
    wm = create_empty()
    wm.add_node(Node.method(name="Safe-PPO"))
    with pytest.raises(DuplicateNodeError):
        wm.add_node(Node.method(name="safe ppo"))  # same canonical key


def test_paper_year_plausibility():
    with pytest.raises(ValidationError):
        Node.paper(title="Old result", year=1800)


@pytest.fixture
def small_model():
    wm = create_empty()
    paper = wm.add_node(Node.paper(title="Scaling Safe RL"))
    method = wm.add_node(Node.method(name="Safe-PPO"))
    module = wm.add_node(Node.module(name="PPO optimizer", module_type="training"))
    bench = wm.add_node(Node.benchmark(name="SafetyGym"))
    return wm, paper, method, module, bench


def test_add_edge_proposes(small_model):
    wm, paper, method, *_ = small_model
    edge_id = wm.add_edge(paper, Relation.PROPOSES, method)
    assert wm.uncertainty_of(edge_id) == 1


def test_add_edge_with_metrics(small_model):
    wm, _, method, _, bench = small_model
    edge_id = wm.add_edge(method, Relation.EVALUATED_ON, bench,
                          metrics=MetricVector(reported=[("accuracy", 0.91)]))
    assert wm.edges[edge_id].metrics.entries == [("accuracy", 0.91)]


def test_add_edge_signature_violation(small_model):
    wm, paper, method, module, _ = small_model
    with pytest.raises(SignatureError):
        wm.add_edge(module, Relation.PROPOSES, method)


def test_add_edge_missing_endpoint(small_model):
    wm, paper, *_ = small_model
    with pytest.raises(UnknownElementError):
        wm.add_edge(paper, Relation.PROPOSES, "method:ghost")


def test_evaluated_on_requires_metrics(small_model):
    wm, _, method, _, bench = small_model
    with pytest.raises(ValidationError):
        wm.add_edge(method, Relation.EVALUATED_ON, bench)


def test_metrics_forbidden_elsewhere(small_model):
    wm, paper, method, *_ = small_model
    with pytest.raises(ValidationError):
        wm.add_edge(paper, Relation.PROPOSES, method,
                    metrics=MetricVector(reported=[("f1", 0.5)]))


def test_verify_transitions_and_idempotence(small_model):
    wm, paper, *_ = small_model
    wm.verify(paper)
    assert wm.uncertainty_of(paper) == 0
    wm.verify(paper)
    assert wm.uncertainty_of(paper) == 0


def test_verify_unknown_id(small_model):
    wm, *_ = small_model
    with pytest.raises(UnknownElementError):
        wm.verify("method:ghost")


def test_merge_grows_counts_and_defaults_unverified():
    wm = create_empty()
    delta = Delta(new_nodes=[Node.method(name=f"m{i}") for i in range(3)])
    summary = wm.merge(delta)
    assert summary["nodes_added"] == 3
    assert wm.node_count() == 3
    assert all(u == 1 for u in wm.uncertainty.values())


def test_merge_disjoint_union_count():
    wm = create_empty()
    wm.merge(Delta(new_nodes=[Node.method(name=f"a{i}") for i in range(7)]))
    wm.merge(Delta(new_nodes=[Node.method(name=f"b{i}") for i in range(2)]))
    assert wm.node_count() == 9


def test_merge_min_rule_keeps_verification():
    wm = create_empty()
    node = Node.method(name="Safe-PPO")
    wm.add_node(node)
    wm.verify(node.id)
    # adversarial delta re-submits the node (implicitly claiming U=1)
    wm.merge(Delta(new_nodes=[Node.method(name="Safe-PPO")]))
    assert wm.uncertainty_of(node.id) == 0


def test_merge_verifications_apply():
    wm = create_empty()
    node = Node.method(name="Safe-PPO")
    wm.merge(Delta(new_nodes=[node], verifications=[node.id]))
    assert wm.uncertainty_of(node.id) == 0


def test_merge_rejects_dangling_edges():
    wm = create_empty()
    edge = Edge.create("paper:ghost", Relation.PROPOSES, "method:ghost")
    with pytest.raises(DeltaError):
        wm.merge(Delta(new_edges=[edge]))
    assert wm.edge_count() == 0


def test_merge_rejects_dangling_verification():
    wm = create_empty()
    with pytest.raises(DeltaError):
        wm.merge(Delta(verifications=["method:ghost"]))


def test_merge_is_atomic_on_failure():
    wm = create_empty()
    good = Node.method(name="kept out")
    bad_edge = Edge.create("paper:ghost", Relation.PROPOSES, "method:ghost")
    with pytest.raises(DeltaError):
        wm.merge(Delta(new_nodes=[good], new_edges=[bad_edge]))
    assert wm.node_count() == 0


def test_merge_appends_conflicting_attributes_to_history():
    wm = create_empty()
    wm.add_node(Node.method(name="Safe-PPO", paradigm="on-policy"))
    wm.merge(Delta(new_nodes=[Node.method(name="Safe-PPO", paradigm="off-policy")]))
    node = wm.get_node("method:safe-ppo")
    assert node.attributes["paradigm"] == "on-policy"
    assert node.attribute_history["paradigm"] == ["off-policy"]


def test_merge_unions_limitation_papers():
    wm = create_empty()
    wm.add_node(Node.limitation(description="assumes stationarity", papers=["paper:a"]))
    wm.merge(Delta(new_nodes=[
        Node.limitation(description="assumes stationarity", papers=["paper:b", "paper:c"]),
    ]))
    node = wm.get_node("limitation:assumes-stationarity")
    assert node.shared_count() == 3


def test_merge_records_provenance_for_touched_elements():
    wm = create_empty()
    stamp = ProvenanceStamp(project="p1", phase="P2a", agent="extract", timestamp="t0")
    node = Node.module(name="PPO optimizer", module_type="training")
    wm.merge(Delta(new_nodes=[node]), stamp=stamp)
    stamp2 = ProvenanceStamp(project="p2", phase="P2a", agent="extract", timestamp="t1")
    wm.merge(Delta(new_nodes=[Node.module(name="PPO optimizer", module_type="training")]),
             stamp=stamp2)
    projects = [r["project"] for r in wm.provenance[node.id]]
    assert projects == ["p1", "p2"]


def test_record_measurement_within_tolerance():
    wm = create_empty()
    m = wm.add_node(Node.method(name="m"))
    b = wm.add_node(Node.benchmark(name="b"))
    e = wm.add_edge(m, Relation.EVALUATED_ON, b,
                    metrics=MetricVector(reported=[("accuracy", 0.90)]))
    failed = wm.record_measurement(e, [("accuracy", 0.885)])
    assert failed is False
    assert wm.edges[e].metrics.reproduction_failed is False
    assert wm.edges[e].metrics.reported == [("accuracy", 0.90)]


def test_record_measurement_flags_failures_without_touching_uncertainty():
    wm = create_empty()
    m = wm.add_node(Node.method(name="m"))
    b = wm.add_node(Node.benchmark(name="b"))
    e = wm.add_edge(m, Relation.EVALUATED_ON, b,
                    metrics=MetricVector(reported=[("accuracy", 0.90)]))
    wm.verify(e)
    failed = wm.record_measurement(e, [("accuracy", 0.70)])
    assert failed is True
    assert wm.edges[e].metrics.reproduction_failed is True
    assert wm.uncertainty_of(e) == 0  # irreversibility: flag, not U


def test_snapshot_is_frozen_and_isolated(small_model):
    wm, paper, method, *_ = small_model
    snap = wm.snapshot()
    with pytest.raises(FrozenModelError):
        snap.add_node(Node.method(name="new"))
    wm.add_edge(paper, Relation.PROPOSES, method)
    assert snap.edge_count() == 0


def test_metric_vector_validation():
    with pytest.raises(ValidationError):
        MetricVector(reported=[])
    with pytest.raises(ValidationError):
        MetricVector(reported=[("a", 1.0), ("a", 2.0)])


def test_concurrent_merges_serialize_through_the_committer():
    import threading

    wm = create_empty()
    errors = []

    def committer(worker: int):
        try:
            for i in range(50):
                wm.merge(Delta(new_nodes=[Node.method(name=f"w{worker} m{i}")]))
        except Exception as exc:  # any race surfaces here
            errors.append(exc)

    threads = [threading.Thread(target=committer, args=(w,)) for w in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    assert wm.node_count() == 8 * 50
    assert len(wm.uncertainty) == 8 * 50


def test_snapshot_is_consistent_under_concurrent_commits():
    import threading

    wm = create_empty()
    stop = threading.Event()

    def writer():
        i = 0
        while not stop.is_set():
            wm.merge(Delta(new_nodes=[Node.method(name=f"m{i}")]))
            i += 1

    thread = threading.Thread(target=writer)
    thread.start()
    try:
        for _ in range(50):
            snap = wm.snapshot()
            # every edge endpoint and uncertainty entry present in the copy
            assert set(snap.uncertainty) == set(snap.nodes) | set(snap.edges)
    finally:
        stop.set()
        thread.join()
