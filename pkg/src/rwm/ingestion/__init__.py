"""Phases 1 and 2a: venue search, scoring, and extraction into the model."""
from .records import Pass1Score, Pass2Score, PaperRecord, S1_MAX, S2_MAX
from .search import (
    MAX_VENUES,
    TITLE_SIMILARITY_THRESHOLD,
    VenueSearchResult,
    merge_dedup,
    run_venue_search,
    title_similarity,
)
from .scoring import TOP_K, rank_and_cut, score_pass1, score_pass2, write_literature_csv
from .extraction import (
    ExtractionResult,
    Phase2aResult,
    build_phase2a,
    delta_for_extraction,
    extract_paper,
)

__all__ = [
    "Pass1Score", "Pass2Score", "PaperRecord", "S1_MAX", "S2_MAX",
    "MAX_VENUES", "TITLE_SIMILARITY_THRESHOLD", "VenueSearchResult",
    "merge_dedup", "run_venue_search", "title_similarity",
    "TOP_K", "rank_and_cut", "score_pass1", "score_pass2", "write_literature_csv",
    "ExtractionResult", "Phase2aResult", "build_phase2a",
    "delta_for_extraction", "extract_paper",
]
