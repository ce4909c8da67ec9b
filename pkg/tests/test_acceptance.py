"""Acceptance suite: one test per release criterion, each printing a
verdict line. Run with `pytest tests/test_acceptance.py -v -s`.

Everything runs on scripted or seeded-stochastic backends; no network.
Tolerances are pinned here and nowhere else.
"""
from __future__ import annotations

import itertools
import json
import random
import time
from pathlib import Path

import pytest

from rwm.cli import entrypoint
from rwm.consensus import GapCandidate, corroborate
from rwm.devloop import GATE_CRITERIA, fuzz_dev_loops, gate_result_from_evidence
from rwm.engine import Engine, Phase, ProjectStore, ReviewWeakness, RunConfig, build_gateway, route_review
from rwm.ingestion import Pass1Score, Pass2Score
from rwm.worldmodel import (
    Delta,
    MetricVector,
    Node,
    NodeKind,
    ProvenanceStamp,
    Relation,
    WorldModel,
    brute_force_classes,
    create_empty,
    cross_links,
    dedup_modules,
    synthesize_gaps,
)
from rwm.worldmodel import persist as wm_persist

FIXTURES = Path(__file__).parent / "fixtures"

RECALL_TOLERANCE = 0.02
SIM_TRIALS = 10_000
SIM_RUNTIME_LIMIT_S = 30.0
FAST_RUNTIME_LIMIT_S = 1.0


def verdict(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: {status}{suffix}")
    assert ok, f"{name} failed: {detail}"


@pytest.mark.parametrize("agents,expected", [(5, 0.832), (1, 0.30), (3, 0.657)])
def test_consensus_recall_bound(agents, expected, capsys):
    started = time.time()
    code = entrypoint(["simulate-consensus", "--agents", str(agents),
                       "--hit-rate", "0.3", "--trials", str(SIM_TRIALS),
                       "--seed", "7"])
    elapsed = time.time() - started
    out = capsys.readouterr().out
    assert code == 0
    recall = float(out.strip().splitlines()[1].split(",")[4])
    with capsys.disabled():
        verdict(f"consensus-recall K={agents}",
                abs(recall - expected) <= RECALL_TOLERANCE and elapsed < SIM_RUNTIME_LIMIT_S,
                f"recall={recall:.4f} expected={expected}+-{RECALL_TOLERANCE}, "
                f"{elapsed:.1f}s")


def test_corroboration_exactness_exhaustive():
    started = time.time()
    agents = [f"a{i}" for i in range(5)]
    ok = True
    for bits in itertools.product([0, 1], repeat=5):
        sets = [[GapCandidate(description="the gap", proposer=agent, round=2)]
                if bit else [] for agent, bit in zip(agents, bits)]
        result = corroborate(sets)
        multiplicity = sum(bits)
        if multiplicity == 0:
            ok &= result == []
        else:
            ok &= result[0].multiplicity == multiplicity
            ok &= result[0].uncertainty == (0 if multiplicity >= 2 else 1)
    elapsed = time.time() - started
    verdict("corroboration-exactness", ok and elapsed < FAST_RUNTIME_LIMIT_S,
            f"32 proposer subsets, {elapsed:.3f}s")


def test_gate_truth_table_all_1024():
    started = time.time()
    criteria = sorted(GATE_CRITERIA)
    passes = 0
    ok = True
    for bits in itertools.product([True, False], repeat=10):
        evidence = {c: {"passed": b, "evidence": "tabled"}
                    for c, b in zip(criteria, bits)}
        result = gate_result_from_evidence(evidence)
        if result.passed:
            passes += 1
            ok &= all(bits)
        else:
            ok &= not all(bits)
    elapsed = time.time() - started
    verdict("gate-truth-table", ok and passes == 1 and elapsed < FAST_RUNTIME_LIMIT_S,
            f"1024 vectors, Q=1 on {passes}, {elapsed:.3f}s")


def test_loop_termination_and_unique_search():
    result = fuzz_dev_loops(runs=1000, t_max=5, seed=7, pass_probability=0.05)
    verdict("loop-termination",
            result.max_iterations <= 5 and result.duplicate_search_events == 0,
            f"1000 fuzzed runs, max t={result.max_iterations}, "
            f"duplicates={result.duplicate_search_events}")


def _random_monotonicity_walk(steps: int, seed: int) -> tuple[bool, bool]:
    """Randomized committed operations incl. adversarial deltas that claim
    verified elements are unverified. Returns (monotone, irreversible)."""
    from rwm.errors import RwmError

    rng = random.Random(seed)
    wm = create_empty()
    shadow: dict[str, int] = {}
    monotone = irreversible = True
    nodes_before = edges_before = 0
    makers = [
        lambda i: Node.paper(title=f"paper {i}"),
        lambda i: Node.method(name=f"method {i}"),
        lambda i: Node.module(name=f"module {i}", module_type="training"),
        lambda i: Node.benchmark(name=f"bench {i}"),
        lambda i: Node.gap(description=f"gap {i}"),
        lambda i: Node.limitation(description=f"limitation {i}"),
    ]
    for _ in range(steps):
        action = rng.randrange(5)
        try:
            if action == 0:
                wm.add_node(makers[rng.randrange(6)](rng.randrange(300)))
            elif action == 1 and wm.uncertainty:
                wm.verify(rng.choice(sorted(wm.uncertainty)))
            elif action == 2:
                relation = rng.choice(list(Relation))
                from rwm.worldmodel import EDGE_SIGNATURES
                src_kind, dst_kind = EDGE_SIGNATURES[relation]
                srcs = wm.nodes_of_kind(src_kind)
                dsts = wm.nodes_of_kind(dst_kind)
                if srcs and dsts:
                    metrics = (MetricVector(reported=[("m", rng.random())])
                               if relation is Relation.EVALUATED_ON else None)
                    wm.add_edge(rng.choice(srcs).id, relation,
                                rng.choice(dsts).id, metrics=metrics)
            elif action == 3:
                nodes = [makers[rng.randrange(6)](rng.randrange(300))
                         for _ in range(rng.randint(0, 3))]
                verifications = ([rng.choice(sorted(wm.uncertainty))]
                                 if wm.uncertainty and rng.random() < 0.4 else [])
                wm.merge(Delta(new_nodes=nodes, verifications=verifications))
            else:
                # adversarial: re-submit verified nodes, implicitly claiming U=1
                verified = [k for k, v in wm.uncertainty.items()
                            if v == 0 and k in wm.nodes]
                if verified:
                    resubmit = [wm.nodes[k] for k in verified[:3]]
                    wm.merge(Delta(new_nodes=resubmit))
        except RwmError:
            pass
        if wm.node_count() < nodes_before or wm.edge_count() < edges_before:
            monotone = False
        nodes_before, edges_before = wm.node_count(), wm.edge_count()
        for element_id, u in wm.uncertainty.items():
            prev = shadow.get(element_id)
            if prev == 0 and u == 1:
                irreversible = False
            shadow[element_id] = u
    return monotone, irreversible


def test_rwm_monotonicity_and_irreversibility_10k_steps():
    monotone, irreversible = _random_monotonicity_walk(steps=10_000, seed=1234)
    verdict("rwm-monotonicity", monotone, "10,000 randomized steps")
    verdict("rwm-irreversibility", irreversible,
            "zero 0->1 transitions under adversarial deltas")


def test_scoring_formulas_full_grid():
    grid = range(11)
    ok = True
    s1_seen = set()
    for r, c, v in itertools.product(grid, grid, grid):
        s1 = Pass1Score(r, c, v)
        ok &= s1.total == 3 * r + 2 * c + v
        ok &= 0 <= s1.total <= 60
        s1_seen.add(s1.total)
    s2_seen = set()
    pass1_by_total = {}
    for r, c, v in itertools.product(grid, grid, grid):
        pass1_by_total.setdefault(3 * r + 2 * c + v, Pass1Score(r, c, v))
    for s1 in pass1_by_total.values():
        for d, e, rep in itertools.product(grid, grid, grid):
            s2 = Pass2Score(s1, d, e, rep)
            ok &= s2.total == s1.total + 2 * d + 2 * e + rep
            ok &= 0 <= s2.total <= 110
            s2_seen.add(s2.total)
    ok &= 0 in s1_seen and 60 in s1_seen
    ok &= 0 in s2_seen and 110 in s2_seen
    verdict("scoring-formulas", ok,
            f"S1 grid 1331, S2 grid {61 * 1331}, extremes attained")


def test_gap_synthesis_threshold():
    wm = create_empty()
    for count in range(1, 6):
        wm.add_node(Node.limitation(
            description=f"limitation shared by {count}",
            papers=[f"paper:{count}-{i}" for i in range(count)]))
    promoted = synthesize_gaps(wm, tau_shared=3)
    got = sorted(g.attributes["description"] for g in promoted)
    expected = [f"limitation shared by {n}" for n in (3, 4, 5)]
    verdict("gap-synthesis", got == expected,
            f"multiplicities 1..5 with tau=3 promoted {len(got)}")


def test_dedup_oracle_equivalence_500_sets():
    rng = random.Random(2024)
    ok = True
    for trial in range(500):
        size = rng.randint(0, 20)
        names = [f"module {i}" for i in range(size)]
        sims: dict[frozenset, float] = {}
        for i in range(size):
            for j in range(i + 1, size):
                sims[frozenset((names[i], names[j]))] = rng.random()

        def sim(x: str, y: str) -> float:
            return 1.0 if x == y else sims[frozenset((x, y))]

        theta = rng.uniform(0.2, 0.95)
        wm = create_empty()
        ids = {}
        for name in names:
            ids[name] = wm.add_node(Node.module(name=name, module_type="training",
                                                description=name))
        report = dedup_modules(wm, similarity=sim, theta=theta)
        got = sorted(sorted(c.members) for c in report.classes)
        oracle = brute_force_classes({n: n for n in names}, sim, theta)
        expected = sorted(sorted(ids[d] for d in cls) for cls in oracle)
        if got != expected:
            ok = False
            break
    verdict("dedup-oracle", ok, "500 random module sets vs transitive-closure oracle")


def test_cross_project_growth_replay(tmp_path):
    config = RunConfig.from_dict({
        "non_interactive": True,
        "clock": "logical",
        "retry_backoff_s": 0.0,
        "scripted_fixtures_path": str(FIXTURES / "safety_trio.json"),
    })
    engine = Engine(store=ProjectStore(tmp_path / "store"), config=config,
                    gateway=build_gateway(config))
    shared = tmp_path / "shared.rwm.json"
    plans = [
        ("safety-1", "robustness of reward models in preference training",
         ["Instruction Tuning Survey", "Reward Modeling Primer"]),
        ("safety-2", "principle guided self improvement without human labels",
         ["Self-Critique Systems Overview", "Revision Loop Analysis"]),
        ("safety-3", "automated adversarial probing of aligned models",
         ["Adversarial Prompting Survey", "Attack Benchmark Notes"]),
    ]
    counts = []
    for project_id, interest, seeds in plans:
        state = engine.start_project(interest, seeds=[{"title": s} for s in seeds],
                                     project_id=project_id, prior_rwm_path=shared)
        while state.phase is not Phase.P2B:
            engine.advance(state)
        counts.append(engine.model(state).node_count())
    model = wm_persist.load(shared)
    links_12 = cross_links(model, "safety-1", "safety-2")
    links_23 = cross_links(model, "safety-2", "safety-3")
    verdict("cross-project-growth",
            counts == [7, 13, 19] and bool(links_12) and bool(links_23),
            f"growth {counts[0]}->{counts[1]}->{counts[2]}, "
            f"links {len(links_12)}/{len(links_23)}")


def test_review_routing_table():
    routed = route_review([
        ReviewWeakness(category="writing", text="w"),
        ReviewWeakness(category="missing_experiments", text="x"),
        ReviewWeakness(category="method_weakness", text="m"),
        ReviewWeakness(category="novelty_concern", text="n"),
    ])
    got = [(w.category, p.value) for w, p in routed]
    expected = [("writing", "P6"), ("missing_experiments", "P4"),
                ("method_weakness", "P3"), ("novelty_concern", "P2b")]
    verdict("review-routing", got == expected, "4-row category map")


def _fixture_models(tmp_path) -> list[WorldModel]:
    models = [create_empty()]
    populated = create_empty()
    paper = populated.add_node(Node.paper(title="Scaling Safe RL", year=2024))
    method = populated.add_node(Node.method(name="Safe-PPO"))
    bench = populated.add_node(Node.benchmark(name="SafetyGym"))
    populated.add_edge(paper, Relation.PROPOSES, method)
    edge = populated.add_edge(method, Relation.EVALUATED_ON, bench,
                              metrics=MetricVector(reported=[("accuracy", 0.91)]))
    populated.verify(method)
    populated.record_measurement(edge, [("accuracy", 0.5)])
    populated.merge(Delta(new_nodes=[Node.limitation(
        description="assumes stationarity", papers=[paper, paper])]),
        stamp=ProvenanceStamp(project="px", phase="P2a", agent="t", timestamp="t1"))
    models.append(populated)
    trio = FIXTURES / "safety_trio.json"
    if trio.exists():
        replay = create_empty()
        replay.merge(Delta(new_nodes=[
            Node.module(name="PPO optimizer", module_type="training"),
            Node.gap(description="replay gap")]),
            stamp=ProvenanceStamp(project="p1", phase="P2a", agent="x", timestamp="t2"))
        models.append(replay)
    return models


def test_persistence_identity_and_byte_stability(tmp_path):
    ok = True
    for index, wm in enumerate(_fixture_models(tmp_path)):
        path = tmp_path / f"fixture-{index}.rwm.json"
        wm_persist.save(wm, path)
        first = path.read_bytes()
        loaded = wm_persist.load(path)
        ok &= loaded == wm
        wm_persist.save(loaded, path)
        ok &= path.read_bytes() == first
        wm_persist.save(wm, path)
        ok &= path.read_bytes() == first
    verdict("persistence", ok, "load-save identity and byte stability on all fixtures")
