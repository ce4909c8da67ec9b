"""Phase 1 front half: parallel venue search and fuzzy merge.

One search agent runs per venue, concurrently; a failing venue is recorded
and skipped as long as at least one succeeds. Records whose normalized
titles are more than 90% similar (Levenshtein ratio) collapse into one,
keeping the union of fields and the richest abstract.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

from ..canonical import levenshtein_ratio
from ..errors import IngestionError, ValidationError
from ..gateway import AgentGateway, AgentRequest, AgentRole, Budget
from ..worldmodel.dedup import UnionFind
from .records import PaperRecord

MAX_VENUES = 12
TITLE_SIMILARITY_THRESHOLD = 0.9


@dataclass
class VenueSearchResult:
    records: list[PaperRecord]
    failures: list[dict[str, Any]] = field(default_factory=list)


def run_venue_search(queries: Sequence[str], venues: Sequence[str],
                     gateway: AgentGateway, budget: Budget,
                     max_venues: int = MAX_VENUES) -> VenueSearchResult:
    if not queries:
        raise ValidationError("venue search needs at least one query")
    if not venues:
        raise ValidationError("venue search needs at least one venue")
    if len(venues) > max_venues:
        raise ValidationError(f"{len(venues)} venues exceeds the configured cap of {max_venues}")

    requests = [
        AgentRequest(
            role=AgentRole.VENUE_SEARCH,
            context={"fixture_key": venue, "venue": venue, "queries": list(queries)},
            budget=budget,
            agent_id=f"venue-search:{venue}",
        )
        for venue in venues
    ]
    outcomes = gateway.invoke_all(requests)
    records: list[PaperRecord] = []
    failures: list[dict[str, Any]] = []
    for venue, outcome in zip(venues, outcomes):
        if isinstance(outcome, Exception):
            failures.append({"venue": venue, "error": str(outcome)})
            continue
        for payload in outcome.payload["papers"]:
            record = PaperRecord.from_dict(payload)
            if not record.venue:
                record.venue = venue
            record.source_venues = sorted(set(record.source_venues) | {venue})
            records.append(record)
    if not records and failures and len(failures) == len(venues):
        raise IngestionError(f"all {len(venues)} venue searches failed: {failures}")
    return VenueSearchResult(records=records, failures=failures)


def title_similarity(a: PaperRecord, b: PaperRecord) -> float:
    return levenshtein_ratio(a.normalized_title, b.normalized_title)


def merge_dedup(records: Sequence[PaperRecord],
                threshold: float = TITLE_SIMILARITY_THRESHOLD) -> list[PaperRecord]:
    """Cluster near-duplicate titles (transitive closure over pairwise
    similarity > threshold) and merge each cluster into one record."""
    if not records:
        return []
    uf = UnionFind()
    keys = [str(i) for i in range(len(records))]
    for key in keys:
        uf.find(key)
    for i in range(len(records)):
        for j in range(i + 1, len(records)):
            if title_similarity(records[i], records[j]) > threshold:
                uf.union(keys[i], keys[j])
    merged: list[PaperRecord] = []
    for members in uf.classes().values():
        cluster = [records[int(k)] for k in members]
        merged.append(_merge_cluster(cluster))
    return sorted(merged, key=lambda r: r.normalized_title)


def _merge_cluster(cluster: list[PaperRecord]) -> PaperRecord:
    cluster = sorted(cluster, key=lambda r: r.normalized_title)
    base = cluster[0]
    merged = PaperRecord(
        title=base.title,
        authors=list(base.authors),
        venue=base.venue,
        year=base.year,
        url=base.url,
        abstract=max((r.abstract for r in cluster), key=len),
        full_text=next((r.full_text for r in cluster if r.full_text), None),
        code_available=max(r.code_available for r in cluster),
        review_signals=None,
        source_venues=sorted({v for r in cluster for v in r.source_venues}),
    )
    for record in cluster:
        if not merged.authors and record.authors:
            merged.authors = list(record.authors)
        if not merged.venue and record.venue:
            merged.venue = record.venue
        if merged.year is None and record.year is not None:
            merged.year = record.year
        if not merged.url and record.url:
            merged.url = record.url
        if record.review_signals:
            merged.review_signals = (merged.review_signals or []) + list(record.review_signals)
    return merged
