"""Canonical text normalization, ids, JSON encoding, and seed derivation.

Everything that must be byte-stable across sessions and machines funnels
through this module: identity keys for graph elements, the serialized model
format, and the RNG seeding used by the stochastic backends.
"""
from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from typing import Any

_PUNCT_RE = re.compile(r"[^\w\s]", re.UNICODE)
_WS_RE = re.compile(r"\s+")

SLUG_MAX_LEN = 60


def normalize_text(text: str) -> str:
    """Case-fold, strip punctuation, and collapse whitespace.

    This is the canonical identity key for names and descriptions: two
    strings that normalize equally denote the same element.
    """
    text = unicodedata.normalize("NFKC", text)
    text = _PUNCT_RE.sub(" ", text.casefold())
    return _WS_RE.sub(" ", text).strip()


def slugify(text: str) -> str:
    """Deterministic id fragment for a normalized key.

    Long keys are truncated with a short content hash appended so distinct
    keys never collapse to the same slug.
    """
    norm = normalize_text(text)
    slug = norm.replace(" ", "-") or "empty"
    if len(slug) > SLUG_MAX_LEN:
        digest = hashlib.sha1(norm.encode("utf-8")).hexdigest()[:8]
        slug = f"{slug[:SLUG_MAX_LEN].rstrip('-')}-{digest}"
    return slug


def token_set(text: str) -> frozenset[str]:
    return frozenset(normalize_text(text).split())


def jaccard(a: str, b: str) -> float:
    """Token-set Jaccard similarity over normalized text (default dedup sim)."""
    ta, tb = token_set(a), token_set(b)
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def levenshtein_ratio(a: str, b: str) -> float:
    """Normalized Levenshtein similarity in [0, 1] (1 = identical)."""
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    distance = previous[-1]
    return 1.0 - distance / max(len(a), len(b))


def canonical_json(payload: Any) -> str:
    """Render a JSON payload in the one canonical byte form.

    Sorted keys, compact separators, ASCII-only. Floats use Python's
    shortest-roundtrip repr, which is deterministic across runs.
    """
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def canonical_json_bytes(payload: Any) -> bytes:
    return (canonical_json(payload) + "\n").encode("utf-8")


def derive_seed(*parts: Any) -> int:
    """Stable 64-bit seed from arbitrary parts (never Python's salted hash)."""
    blob = canonical_json([str(p) for p in parts]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")
