"""Literature pipeline records and the two-pass scoring arithmetic."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..canonical import normalize_text
from ..errors import ValidationError

S1_WEIGHTS = (3, 2, 1)   # relevance, code, venue_prestige
S2_WEIGHTS = (2, 2, 1)   # depth, experiments, reproducibility
S1_MAX = 60
S2_MAX = 110


@dataclass
class PaperRecord:
    title: str
    authors: list[str] = field(default_factory=list)
    venue: str = ""
    year: int | None = None
    url: str = ""
    abstract: str = ""
    full_text: str | None = None
    code_available: int = 0
    review_signals: list[dict[str, Any]] | None = None
    source_venues: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.title or not normalize_text(self.title):
            raise ValidationError("paper record requires a nonempty title")
        if self.year is not None and not (1950 <= int(self.year) <= 2100):
            raise ValidationError(f"implausible year {self.year!r}")
        if not 0 <= int(self.code_available) <= 10:
            raise ValidationError("code_available must be in 0..10")

    @property
    def normalized_title(self) -> str:
        return normalize_text(self.title)

    def to_dict(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "authors": self.authors,
            "venue": self.venue,
            "year": self.year,
            "url": self.url,
            "abstract": self.abstract,
            "full_text": self.full_text,
            "code_available": self.code_available,
            "review_signals": self.review_signals,
            "source_venues": self.source_venues,
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "PaperRecord":
        return cls(
            title=payload["title"],
            authors=list(payload.get("authors", [])),
            venue=payload.get("venue", ""),
            year=payload.get("year"),
            url=payload.get("url", ""),
            abstract=payload.get("abstract", ""),
            full_text=payload.get("full_text"),
            code_available=int(payload.get("code_available", 0)),
            review_signals=payload.get("review_signals"),
            source_venues=list(payload.get("source_venues", [])),
        )


def _check_component(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= 10:
        raise ValidationError(f"score component {name} must be an integer in 0..10, got {value!r}")
    return value


@dataclass(frozen=True)
class Pass1Score:
    relevance: int
    code: int
    venue_prestige: int

    def __post_init__(self) -> None:
        for name in ("relevance", "code", "venue_prestige"):
            _check_component(name, getattr(self, name))

    @property
    def total(self) -> int:
        w_r, w_c, w_v = S1_WEIGHTS
        return w_r * self.relevance + w_c * self.code + w_v * self.venue_prestige


@dataclass(frozen=True)
class Pass2Score:
    pass1: Pass1Score
    depth: int
    experiments: int
    reproducibility: int

    def __post_init__(self) -> None:
        for name in ("depth", "experiments", "reproducibility"):
            _check_component(name, getattr(self, name))

    @property
    def total(self) -> int:
        w_d, w_e, w_r = S2_WEIGHTS
        return (self.pass1.total + w_d * self.depth + w_e * self.experiments
                + w_r * self.reproducibility)
