"""Two-pass scoring, ranking, and the literature report."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

from ..gateway import AgentGateway, AgentRequest, AgentRole, Budget
from .records import Pass1Score, Pass2Score, PaperRecord

TOP_K = 20


def score_pass1(record: PaperRecord, gateway: AgentGateway, budget: Budget) -> Pass1Score:
    response = gateway.invoke(AgentRequest(
        role=AgentRole.PASS1_SCORER,
        context={"fixture_key": record.title, "title": record.title,
                 "abstract": record.abstract, "code_available": record.code_available},
        budget=budget,
    ))
    p = response.payload
    return Pass1Score(relevance=p["relevance"], code=p["code"],
                      venue_prestige=p["venue_prestige"])


def score_pass2(record: PaperRecord, pass1: Pass1Score,
                gateway: AgentGateway, budget: Budget) -> Pass2Score:
    response = gateway.invoke(AgentRequest(
        role=AgentRole.PASS2_SCORER,
        context={"fixture_key": record.title, "title": record.title,
                 "full_text": record.full_text or ""},
        budget=budget,
    ))
    p = response.payload
    return Pass2Score(pass1=pass1, depth=p["depth"], experiments=p["experiments"],
                      reproducibility=p["reproducibility"])


def rank_and_cut(scored: Sequence[tuple[PaperRecord, Pass1Score]],
                 k: int = TOP_K) -> list[tuple[PaperRecord, Pass1Score]]:
    """Descending by score, ties broken by normalized title ascending;
    exactly min(k, n) survive. Input order never affects the result."""
    ordered = sorted(scored, key=lambda pair: (-pair[1].total, pair[0].normalized_title))
    return ordered[:max(0, k)]


def write_literature_csv(rows: Sequence[tuple[PaperRecord, Pass1Score, Pass2Score | None]],
                         destination: str | Path) -> None:
    with open(destination, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["rank", "title", "venue", "s1", "s2"])
        for rank, (record, s1, s2) in enumerate(rows, start=1):
            writer.writerow([rank, record.title, record.venue, s1.total,
                             "" if s2 is None else s2.total])
