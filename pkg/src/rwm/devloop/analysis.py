"""Root-cause decomposition and cross-domain field mapping.

A verified gap is traced through five why-steps anchored in world model
elements down to an abstract mechanism; the mechanism is then mapped to
other fields that study the same problem, each with a query translated
into that field's vocabulary. The gap's own field is excluded so searches
target the mechanism rather than in-domain incumbents.
"""
from __future__ import annotations

from typing import Any

from ..canonical import normalize_text
from ..errors import DevLoopError
from ..gateway import AgentGateway, AgentRequest, AgentRole, Budget
from ..worldmodel import WorldModel
from .types import CausalChain, ChainLink, FieldQuery, FieldSet, Mechanism

CHAIN_LENGTH = 5


ANCHOR_ATTEMPTS = 2


def build_causal_chain(gap_id: str, wm: WorldModel, gateway: AgentGateway,
                       budget: Budget, *, iteration: int = 1,
                       history: list[dict[str, Any]] | None = None) -> tuple[CausalChain, Mechanism]:
    """Five anchored why-steps ending in the root mechanism. Only verified
    gaps qualify; unverified ones have not earned development effort.
    A chain citing elements absent from the model is re-requested once
    with the dangling anchors named, then rejected."""
    gap = wm.get_node(gap_id)
    if wm.uncertainty_of(gap_id) != 0:
        raise DevLoopError(f"gap {gap_id} is unverified; the loop develops verified gaps only")
    context: dict[str, Any] = {
        "fixture_key": f"{gap_id}::chain::t{iteration}",
        "gap": gap.attributes,
        "gap_id": gap_id,
        "iteration": iteration,
        "history": history or [],
    }
    for attempt in range(1, ANCHOR_ATTEMPTS + 1):
        payload = gateway.invoke(AgentRequest(
            role=AgentRole.MECHANISM_ANALYST, context=context, budget=budget,
        )).payload
        links = []
        dangling: list[str] = []
        for entry in payload["links"]:
            anchors = [str(a) for a in entry["anchors"]]
            dangling.extend(a for a in anchors if not wm.has_element(a))
            links.append(ChainLink(text=entry["text"], anchors=anchors))
        if not dangling:
            break
        if attempt == ANCHOR_ATTEMPTS:
            raise DevLoopError(f"chain links anchored to unknown elements {sorted(set(dangling))}")
        context = dict(context)
        context["repair_hint"] = f"these anchors are not in the model: {sorted(set(dangling))}"
    if len(links) != CHAIN_LENGTH:
        raise DevLoopError(f"causal chain needs exactly {CHAIN_LENGTH} links")
    chain = CausalChain(gap_key=gap_id, links=links)
    mechanism = Mechanism(
        statement=chain.mechanism_text,
        origin_field=payload["origin_field"],
        anchors=links[-1].anchors,
    )
    return chain, mechanism


def map_fields(mechanism: Mechanism, gateway: AgentGateway, budget: Budget, *,
               iteration: int = 1,
               history: list[dict[str, Any]] | None = None) -> FieldSet:
    """Other fields studying the mechanism, each with a translated query.
    The origin field is filtered; if nothing else remains it is an error."""
    if not mechanism.origin_field:
        raise DevLoopError("mechanism must record its origin field")
    response = gateway.invoke(AgentRequest(
        role=AgentRole.FIELD_MAPPER,
        context={
            "fixture_key": f"{normalize_text(mechanism.statement)}::t{iteration}",
            "mechanism": mechanism.statement,
            "origin_field": mechanism.origin_field,
            "history": history or [],
        },
        budget=budget,
    ))
    origin = normalize_text(mechanism.origin_field)
    fields: list[FieldQuery] = []
    seen: set[str] = set()
    for entry in response.payload["fields"]:
        name = entry["name"]
        key = normalize_text(name)
        if key == origin or key in seen:
            continue
        seen.add(key)
        fields.append(FieldQuery(name=name, query=entry["query"]))
    if not fields:
        raise DevLoopError(
            f"field mapping produced nothing beyond the origin field {mechanism.origin_field!r}")
    return FieldSet(fields=fields)
