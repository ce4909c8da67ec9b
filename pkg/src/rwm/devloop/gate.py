"""The ten-criterion quality gate.

A method finalizes only when every criterion holds; the gate is a pure
conjunction, so a single failing criterion routes the loop back to
direction reassessment. Verdicts are booleans supplied with evidence by an
agent or a human reviewer; the engine never interprets statistics itself.
"""
from __future__ import annotations

from typing import Any, Mapping

from ..errors import DevLoopError
from ..gateway import AgentGateway, AgentRequest, AgentRole, Budget
from .types import GateResult

# criterion id -> what must hold for a pass verdict
GATE_CRITERIA: dict[str, str] = {
    "novelty_new_gap": "gap was demonstrated by our own experiments, not assumed untested",
    "novelty_formulation": "formulation is new and mathematically grounded",
    "novelty_insight": "carries an insight that shifts how the problem is understood",
    "performance_baselines": "beats at least 2 published baselines on their own metrics",
    "performance_significance": "significant at p < 0.001 with n >= 50 and 3 seeds",
    "performance_ablation": "removing any component causes a measurable drop",
    "story_narrative": "gap, insight, method, and result form one coherent narrative",
    "story_evidence": "evidence spans multiple conditions with confounds tested",
    "compute_reproducible": "code, data, and instructions are public",
    "compute_honest": "compute requirements are stated honestly",
}


def gate_result_from_evidence(evidence: Mapping[str, Mapping[str, Any]]) -> GateResult:
    criteria: dict[str, bool] = {}
    texts: dict[str, str] = {}
    for criterion in GATE_CRITERIA:
        entry = evidence.get(criterion)
        if entry is None or "passed" not in entry:
            raise DevLoopError(f"gate evidence missing criterion {criterion!r}")
        if not entry.get("evidence"):
            raise DevLoopError(f"criterion {criterion!r} has a verdict but no evidence")
        criteria[criterion] = bool(entry["passed"])
        texts[criterion] = str(entry["evidence"])
    return GateResult(criteria=criteria, evidence=texts)


def evaluate_gate(method_record: Mapping[str, Any], *,
                  evidence: Mapping[str, Mapping[str, Any]] | None = None,
                  gateway: AgentGateway | None = None,
                  budget: Budget | None = None) -> GateResult:
    """Evaluate a method against all ten criteria.

    Manual mode passes the per-criterion evidence directly; otherwise a
    gate-evaluator agent supplies it. Either way every criterion needs a
    verdict plus evidence text.
    """
    if evidence is not None:
        return gate_result_from_evidence(evidence)
    if gateway is None or budget is None:
        raise DevLoopError("evaluate_gate needs either manual evidence or a gateway")
    response = gateway.invoke(AgentRequest(
        role=AgentRole.GATE_EVALUATOR,
        context={
            "fixture_key": str(method_record.get("name", "*")),
            "method": dict(method_record),
            "criteria": GATE_CRITERIA,
        },
        budget=budget,
    ))
    return gate_result_from_evidence(response.payload["criteria"])


def write_gate_report(result: GateResult, destination) -> None:
    """Ten-row criterion/verdict/evidence report."""
    import csv

    with open(destination, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["criterion", "verdict", "evidence"])
        for row in result.to_rows():
            writer.writerow([row["criterion"],
                             "pass" if row["passed"] else "fail",
                             row["evidence"]])
