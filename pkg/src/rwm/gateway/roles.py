"""Agent roles and their response schemas.

Every invocation's response is validated against its role's schema before
any protocol module sees it; a response that fails validation is retried
and ultimately surfaces as a SchemaValidationError, never as bad data
inside a protocol.
"""
from __future__ import annotations

from enum import Enum
from typing import Any, Callable

from ..errors import SchemaValidationError
from ..worldmodel.types import GAP_TYPES, MODULE_TYPES


class AgentRole(str, Enum):
    READER = "reader"
    BRAINSTORM = "brainstorm"
    QUERY_EXPANDER = "query_expander"
    VENUE_SEARCH = "venue_search"
    PASS1_SCORER = "pass1_scorer"
    PASS2_SCORER = "pass2_scorer"
    EXTRACTOR = "extractor"
    PROBER = "prober"
    ORCHESTRATOR = "orchestrator"
    MECHANISM_ANALYST = "mechanism_analyst"
    FIELD_MAPPER = "field_mapper"
    SEARCHER = "searcher"
    TESTER = "tester"
    GATE_EVALUATOR = "gate_evaluator"
    REASSESSOR = "reassessor"
    EVALUATOR = "evaluator"
    WRITER = "writer"
    REVIEWER = "reviewer"


def _fail(role: AgentRole, message: str) -> None:
    raise SchemaValidationError(f"{role.value} response invalid: {message}")


def _require(payload: dict, role: AgentRole, key: str, kind: type | tuple) -> Any:
    if key not in payload:
        _fail(role, f"missing '{key}'")
    value = payload[key]
    if not isinstance(value, kind):
        _fail(role, f"'{key}' must be {kind}, got {type(value).__name__}")
    return value


def _score_0_10(payload: dict, role: AgentRole, key: str) -> None:
    value = _require(payload, role, key, int)
    if isinstance(value, bool) or not 0 <= value <= 10:
        _fail(role, f"'{key}' must be an integer in 0..10, got {value!r}")


def _validate_reader(payload: dict) -> None:
    _require(payload, AgentRole.READER, "summary", str)


def _validate_brainstorm(payload: dict) -> None:
    directions = _require(payload, AgentRole.BRAINSTORM, "directions", list)
    if not directions or len(directions) > 10:
        _fail(AgentRole.BRAINSTORM, f"needs 1..10 directions, got {len(directions)}")
    for d in directions:
        for key in ("title", "novelty", "feasibility", "impact"):
            if key not in d:
                _fail(AgentRole.BRAINSTORM, f"direction missing '{key}'")


def _validate_query_expander(payload: dict) -> None:
    queries = _require(payload, AgentRole.QUERY_EXPANDER, "queries", list)
    venues = _require(payload, AgentRole.QUERY_EXPANDER, "venues", list)
    if not queries or len(queries) > 12:
        _fail(AgentRole.QUERY_EXPANDER, f"needs 1..12 queries, got {len(queries)}")
    if not venues:
        _fail(AgentRole.QUERY_EXPANDER, "needs at least one venue")


def _validate_venue_search(payload: dict) -> None:
    papers = _require(payload, AgentRole.VENUE_SEARCH, "papers", list)
    for p in papers:
        if not isinstance(p, dict) or not p.get("title"):
            _fail(AgentRole.VENUE_SEARCH, "every paper needs a nonempty title")


def _validate_pass1(payload: dict) -> None:
    for key in ("relevance", "code", "venue_prestige"):
        _score_0_10(payload, AgentRole.PASS1_SCORER, key)


def _validate_pass2(payload: dict) -> None:
    for key in ("depth", "experiments", "reproducibility"):
        _score_0_10(payload, AgentRole.PASS2_SCORER, key)


def _validate_extractor(payload: dict) -> None:
    role = AgentRole.EXTRACTOR
    section = payload.get("section")
    if section == "methods":
        modules = _require(payload, role, "modules", list)
        for m in modules:
            if not isinstance(m, dict) or not m.get("name"):
                _fail(role, "module entries need a name")
            if m.get("module_type") not in MODULE_TYPES:
                _fail(role, f"module_type {m.get('module_type')!r} not in {MODULE_TYPES}")
    elif section == "results":
        results = _require(payload, role, "results", list)
        for r in results:
            if not isinstance(r, dict) or not r.get("method") or not r.get("benchmark"):
                _fail(role, "result entries need method and benchmark")
            metrics = r.get("metrics")
            if not isinstance(metrics, dict) or not metrics:
                _fail(role, "result entries need a nonempty metric map")
    elif section == "limitations":
        limitations = _require(payload, role, "limitations", list)
        for l in limitations:
            if not isinstance(l, dict) or not l.get("description"):
                _fail(role, "limitation entries need a description")
    else:
        _fail(role, f"unknown section {section!r}")


def _validate_prober(payload: dict) -> None:
    role = AgentRole.PROBER
    gaps = _require(payload, role, "gaps", list)
    for g in gaps:
        if not isinstance(g, dict) or not g.get("description"):
            _fail(role, "gap candidates need a description")
        if g.get("gap_type", "methods") not in GAP_TYPES:
            _fail(role, f"gap_type {g.get('gap_type')!r} not in {GAP_TYPES}")
        if not isinstance(g.get("evidence", []), list):
            _fail(role, "gap evidence must be a list of element ids")
    for p in payload.get("proposals", []):
        if not isinstance(p, dict) or not p.get("description"):
            _fail(role, "task proposals need a description")
        if p.get("kind") not in ("new_direction", "combine_findings", "redirect_agent"):
            _fail(role, f"proposal kind {p.get('kind')!r} invalid")


def _validate_orchestrator(payload: dict) -> None:
    role = AgentRole.ORCHESTRATOR
    decisions = _require(payload, role, "decisions", list)
    for d in decisions:
        if not isinstance(d, dict):
            _fail(role, "decisions must be records")
        if d.get("action") not in ("merge", "kill", "redirect", "continue"):
            _fail(role, f"action {d.get('action')!r} invalid")
        if "subject" not in d:
            _fail(role, "decision missing subject")


def _validate_mechanism_analyst(payload: dict) -> None:
    role = AgentRole.MECHANISM_ANALYST
    links = _require(payload, role, "links", list)
    if len(links) != 5:
        _fail(role, f"causal chain must have exactly 5 links, got {len(links)}")
    for link in links:
        if not isinstance(link, dict) or not link.get("text"):
            _fail(role, "chain links need text")
        anchors = link.get("anchors")
        if not isinstance(anchors, list) or not anchors:
            _fail(role, "every chain link needs at least one anchor")
    _require(payload, role, "origin_field", str)


def _validate_field_mapper(payload: dict) -> None:
    fields = _require(payload, AgentRole.FIELD_MAPPER, "fields", list)
    if not fields:
        _fail(AgentRole.FIELD_MAPPER, "needs at least one field")
    for f in fields:
        if not isinstance(f, dict) or not f.get("name") or not f.get("query"):
            _fail(AgentRole.FIELD_MAPPER, "fields need name and translated query")


def _validate_searcher(payload: dict) -> None:
    techniques = _require(payload, AgentRole.SEARCHER, "techniques", list)
    for t in techniques:
        if not isinstance(t, dict) or not t.get("field") or not t.get("name"):
            _fail(AgentRole.SEARCHER, "techniques need field and name")


def _validate_tester(payload: dict) -> None:
    role = AgentRole.TESTER
    confirmed = _require(payload, role, "mechanism_confirmed", bool)
    method = _require(payload, role, "method", dict)
    if not method.get("name"):
        _fail(role, "tested method needs a name")


def _validate_gate_evaluator(payload: dict) -> None:
    from ..devloop.gate import GATE_CRITERIA

    role = AgentRole.GATE_EVALUATOR
    criteria = _require(payload, role, "criteria", dict)
    for criterion in GATE_CRITERIA:
        entry = criteria.get(criterion)
        if not isinstance(entry, dict) or "passed" not in entry:
            _fail(role, f"missing verdict for criterion '{criterion}'")
        if not isinstance(entry["passed"], bool):
            _fail(role, f"criterion '{criterion}' verdict must be boolean")
        if not entry.get("evidence"):
            _fail(role, f"criterion '{criterion}' needs evidence")


def _validate_reassessor(payload: dict) -> None:
    branch = _require(payload, AgentRole.REASSESSOR, "branch", str)
    if branch not in ("update_mechanism", "update_fields", "update_gap"):
        _fail(AgentRole.REASSESSOR, f"branch {branch!r} invalid")


def _validate_evaluator(payload: dict) -> None:
    role = AgentRole.EVALUATOR
    seeds = _require(payload, role, "seeds", int)
    if seeds != 3:
        _fail(role, f"evaluation plan must use exactly 3 seeds, got {seeds}")
    for key in ("cross_model", "ablation", "error_analysis"):
        if not payload.get(key):
            _fail(role, f"missing checklist item '{key}'")


def _validate_writer(payload: dict) -> None:
    _require(payload, AgentRole.WRITER, "section", str)
    _require(payload, AgentRole.WRITER, "text", str)


def _validate_reviewer(payload: dict) -> None:
    weaknesses = _require(payload, AgentRole.REVIEWER, "weaknesses", list)
    for w in weaknesses:
        if not isinstance(w, dict) or not w.get("text"):
            _fail(AgentRole.REVIEWER, "weaknesses need text")
        if w.get("category") not in ("writing", "missing_experiments",
                                     "method_weakness", "novelty_concern"):
            _fail(AgentRole.REVIEWER, f"category {w.get('category')!r} invalid")


ROLE_VALIDATORS: dict[AgentRole, Callable[[dict], None]] = {
    AgentRole.READER: _validate_reader,
    AgentRole.BRAINSTORM: _validate_brainstorm,
    AgentRole.QUERY_EXPANDER: _validate_query_expander,
    AgentRole.VENUE_SEARCH: _validate_venue_search,
    AgentRole.PASS1_SCORER: _validate_pass1,
    AgentRole.PASS2_SCORER: _validate_pass2,
    AgentRole.EXTRACTOR: _validate_extractor,
    AgentRole.PROBER: _validate_prober,
    AgentRole.ORCHESTRATOR: _validate_orchestrator,
    AgentRole.MECHANISM_ANALYST: _validate_mechanism_analyst,
    AgentRole.FIELD_MAPPER: _validate_field_mapper,
    AgentRole.SEARCHER: _validate_searcher,
    AgentRole.TESTER: _validate_tester,
    AgentRole.GATE_EVALUATOR: _validate_gate_evaluator,
    AgentRole.REASSESSOR: _validate_reassessor,
    AgentRole.EVALUATOR: _validate_evaluator,
    AgentRole.WRITER: _validate_writer,
    AgentRole.REVIEWER: _validate_reviewer,
}


def validate_response(role: AgentRole, payload: Any) -> None:
    if not isinstance(payload, dict):
        raise SchemaValidationError(f"{role.value} response must be a JSON object")
    ROLE_VALIDATORS[role](payload)
