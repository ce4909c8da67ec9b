from __future__ import annotations

import itertools
import random

import pytest

from rwm.canonical import levenshtein_ratio
from rwm.errors import IngestionError, TransportError, ValidationError
from rwm.gateway import (
    AgentGateway,
    AgentRequest,
    AgentRole,
    GatewayConfig,
    ScriptedBackend,
    unlimited,
)
from rwm.ingestion import (
    Pass1Score,
    Pass2Score,
    PaperRecord,
    build_phase2a,
    extract_paper,
    merge_dedup,
    rank_and_cut,
    run_venue_search,
    score_pass1,
    score_pass2,
    write_literature_csv,
)
from rwm.worldmodel import NodeKind, create_empty


def scripted_gateway(fixtures=None, handlers=None) -> AgentGateway:
    gateway = AgentGateway(config=GatewayConfig(retry_backoff_s=0.0))
    gateway.register_backend("scripted", ScriptedBackend(fixtures=fixtures, handlers=handlers))
    return gateway


def venue_fixture(venues: list[str], papers_per_venue: int = 5) -> dict:
    by_key = {}
    for venue in venues:
        by_key[venue] = {"papers": [
            {"title": f"{venue} paper {i}", "venue": venue} for i in range(papers_per_venue)
        ]}
    return {"venue_search": {"by_key": by_key}}


def test_six_venues_yield_thirty_records_pre_merge():
    venues = [f"venue {i}" for i in range(6)]
    gateway = scripted_gateway(venue_fixture(venues))
    result = run_venue_search(["q"], venues, gateway, unlimited())
    assert len(result.records) == 30
    assert result.failures == []
    assert all(r.source_venues for r in result.records)


def test_failing_venue_recorded_and_skipped():
    venues = [f"venue {i}" for i in range(6)]
    fixtures = venue_fixture(venues[:5])  # venue 5 has no fixture -> transport failure
    gateway = scripted_gateway(fixtures)
    result = run_venue_search(["q"], venues, gateway, unlimited())
    assert len(result.records) == 25
    assert len(result.failures) == 1
    assert result.failures[0]["venue"] == "venue 5"


def test_all_venues_failing_is_an_error():
    gateway = scripted_gateway({"venue_search": {"by_key": {}}})
    with pytest.raises(IngestionError):
        run_venue_search(["q"], ["a", "b"], gateway, unlimited())


def test_venue_cap():
    venues = [f"venue {i}" for i in range(13)]
    gateway = scripted_gateway(venue_fixture(venues))
    with pytest.raises(ValidationError):
        run_venue_search(["q"], venues, gateway, unlimited())
    ok = run_venue_search(["q"], venues[:12], gateway, unlimited())
    assert len(ok.records) == 60


def test_merge_dedup_normalizes_case_and_punctuation():
    records = [
        PaperRecord(title="Attention Is All You Need", venue="NeurIPS"),
        PaperRecord(title="Attention is all you need.", abstract="the long abstract"),
    ]
    merged = merge_dedup(records)
    assert len(merged) == 1
    assert merged[0].abstract == "the long abstract"
    assert merged[0].venue == "NeurIPS"


def test_merge_dedup_keeps_distinct_titles():
    records = [
        PaperRecord(title="Graph neural message passing"),
        PaperRecord(title="Quantized codebook learning"),
    ]
    assert len(merge_dedup(records)) == 2


def test_merge_dedup_is_idempotent():
    records = [PaperRecord(title=f"title number {i}") for i in range(10)]
    records += [PaperRecord(title="title number 3 ")]
    once = merge_dedup(records)
    twice = merge_dedup(once)
    assert [r.title for r in twice] == [r.title for r in once]


def test_thirty_records_with_planted_duplicates_match_oracle():
    rng = random.Random(99)
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    base = ["".join(rng.choice(alphabet) for _ in range(24)) for _ in range(26)]
    titles = list(base)
    for i in rng.sample(range(26), 4):
        titles.append(base[i].upper() + ".")  # 4 planted duplicates
    records = [PaperRecord(title=t) for t in titles]
    merged = merge_dedup(records)

    # brute-force all-pairs transitive closure oracle over normalized titles
    n = len(records)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if levenshtein_ratio(records[i].normalized_title,
                                 records[j].normalized_title) > 0.9:
                parent[find(i)] = find(j)
    oracle_classes = len({find(i) for i in range(n)})
    assert len(merged) == oracle_classes == 26


def score1_fixture(title: str, r: int, c: int, v: int) -> dict:
    return {title: {"relevance": r, "code": c, "venue_prestige": v}}


def test_pass1_extremes():
    gateway = scripted_gateway({"pass1_scorer": {"by_key": score1_fixture("t", 10, 10, 10)}})
    score = score_pass1(PaperRecord(title="t"), gateway, unlimited())
    assert score.total == 60


def test_all_zero_components():
    gateway = scripted_gateway({
        "pass1_scorer": {"by_key": score1_fixture("t", 0, 0, 0)},
        "pass2_scorer": {"default": {"depth": 0, "experiments": 0, "reproducibility": 0}},
    })
    record = PaperRecord(title="t")
    s1 = score_pass1(record, gateway, unlimited())
    s2 = score_pass2(record, s1, gateway, unlimited())
    assert s1.total == 0
    assert s2.total == 0


def test_pass2_maximum():
    s1 = Pass1Score(relevance=10, code=10, venue_prestige=10)
    s2 = Pass2Score(pass1=s1, depth=10, experiments=10, reproducibility=10)
    assert s2.total == 110


def test_component_out_of_range_rejected():
    with pytest.raises(ValidationError):
        Pass1Score(relevance=11, code=0, venue_prestige=0)
    with pytest.raises(ValidationError):
        Pass2Score(pass1=Pass1Score(1, 1, 1), depth=-1, experiments=0, reproducibility=0)


def test_rank_and_cut_is_permutation_stable():
    rng = random.Random(4)
    scored = [(PaperRecord(title=f"paper {i:02d}"),
               Pass1Score(relevance=rng.randint(0, 10), code=rng.randint(0, 10),
                          venue_prestige=rng.randint(0, 10)))
              for i in range(30)]
    expected = [r.title for r, _ in rank_and_cut(scored, 20)]
    for _ in range(5):
        shuffled = list(scored)
        rng.shuffle(shuffled)
        assert [r.title for r, _ in rank_and_cut(shuffled, 20)] == expected
    assert len(expected) == 20


def test_rank_and_cut_tie_break_by_title():
    scored = [
        (PaperRecord(title="zebra"), Pass1Score(5, 5, 5)),
        (PaperRecord(title="apple"), Pass1Score(5, 5, 5)),
    ]
    top = rank_and_cut(scored, 1)
    assert top[0][0].title == "apple"


def test_write_literature_csv(tmp_path):
    rows = [(PaperRecord(title="t1", venue="V"), Pass1Score(10, 10, 10),
             Pass2Score(Pass1Score(10, 10, 10), 10, 10, 10))]
    path = tmp_path / "lit.csv"
    write_literature_csv(rows, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "rank,title,venue,s1,s2"
    assert lines[1] == "1,t1,V,60,110"


def extraction_fixtures(title: str, modules: list[str], method: str = "main method",
                        results=None, limitations=None) -> dict:
    return {
        f"{title}::methods": {
            "section": "methods",
            "method": method,
            "modules": [{"name": m, "module_type": "training"} for m in modules],
        },
        f"{title}::results": {"section": "results", "results": results or []},
        f"{title}::limitations": {"section": "limitations", "limitations": limitations or []},
    }


def test_extract_paper_seven_modules():
    fixtures = {"extractor": {"by_key": extraction_fixtures(
        "p", [f"module {i}" for i in range(7)])}}
    gateway = scripted_gateway(fixtures)
    record = PaperRecord(title="p", full_text="...")
    result = extract_paper(record, gateway, unlimited())
    assert len(result.modules) == 7
    assert result.warnings == []
    assert all(m.attributes["module_type"] == "training" for m in result.modules)


def test_extract_paper_metric_vector():
    fixtures = {"extractor": {"by_key": extraction_fixtures(
        "p", [f"m{i}" for i in range(5)],
        results=[{"method": "main method", "benchmark": "bench",
                  "metrics": {"accuracy": 0.91, "f1": 0.88}}])}}
    gateway = scripted_gateway(fixtures)
    result = extract_paper(PaperRecord(title="p", full_text="..."), gateway, unlimited())
    assert len(result.results) == 1
    _, _, metrics = result.results[0]
    assert metrics.entries == [("accuracy", 0.91), ("f1", 0.88)]


def test_extract_paper_low_module_count_warns():
    fixtures = {"extractor": {"by_key": extraction_fixtures("p", ["m1", "m2", "m3"])}}
    gateway = scripted_gateway(fixtures)
    result = extract_paper(PaperRecord(title="p", full_text="..."), gateway, unlimited())
    assert len(result.modules) == 3
    assert any("outside expected range" in w for w in result.warnings)


def test_extract_paper_requires_full_text():
    gateway = scripted_gateway({})
    with pytest.raises(ValidationError):
        extract_paper(PaperRecord(title="p"), gateway, unlimited())


def test_build_phase2a_counts_match_fixture_arithmetic():
    by_key = {}
    papers = []
    for i in range(3):
        title = f"paper {i}"
        papers.append(PaperRecord(title=title, full_text="..."))
        by_key.update(extraction_fixtures(
            title, [f"module {i}"], method=f"method {i}",
            limitations=[{"description": "assumes stationarity"}]))
    gateway = scripted_gateway({"extractor": {"by_key": by_key}})
    wm = create_empty()
    result = build_phase2a(wm, papers, gateway, unlimited())
    # 3 papers + 3 methods + 3 modules + 1 shared limitation + 1 promoted gap
    assert wm.node_count() == 11
    assert result.failures == []
    assert len(result.gaps_promoted) == 1
    shared = wm.nodes_of_kind(NodeKind.LIMITATION)[0]
    assert shared.shared_count() == 3


def test_build_phase2a_zero_papers_is_empty_delta():
    wm = create_empty()
    result = build_phase2a(wm, [], scripted_gateway({}), unlimited())
    assert result.delta.is_empty()
    assert wm.node_count() == 0


def test_build_phase2a_all_failures_raise():
    gateway = scripted_gateway({"extractor": {"by_key": {}}})
    with pytest.raises(IngestionError):
        build_phase2a(create_empty(), [PaperRecord(title="p", full_text="...")],
                      gateway, unlimited())


def test_build_phase2a_partial_failure_recorded():
    fixtures = {"extractor": {"by_key": extraction_fixtures("good", ["m1"])}}
    gateway = scripted_gateway(fixtures)
    wm = create_empty()
    result = build_phase2a(
        wm,
        [PaperRecord(title="good", full_text="..."), PaperRecord(title="bad", full_text="...")],
        gateway, unlimited())
    assert len(result.extractions) == 1
    assert len(result.failures) == 1
    assert result.failures[0]["paper"] == "bad"


def test_scoring_formula_property_sample():
    rng = random.Random(11)
    for _ in range(200):
        r, c, v = (rng.randint(0, 10) for _ in range(3))
        d, e, rep = (rng.randint(0, 10) for _ in range(3))
        s1 = Pass1Score(r, c, v)
        s2 = Pass2Score(s1, d, e, rep)
        assert s1.total == 3 * r + 2 * c + v
        assert s2.total == s1.total + 2 * d + 2 * e + rep
        assert 0 <= s1.total <= 60
        assert 0 <= s2.total <= 110
