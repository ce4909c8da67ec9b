"""Phase 3: the quality-gated, self-correcting development loop."""
from .types import (
    CausalChain,
    ChainLink,
    DevOutcome,
    FieldQuery,
    FieldSet,
    GateResult,
    LoopState,
    Mechanism,
    technique_key,
)
from .analysis import CHAIN_LENGTH, build_causal_chain, map_fields
from .gate import GATE_CRITERIA, evaluate_gate, gate_result_from_evidence, write_gate_report
from .loop import DEFAULT_T_MAX, REASSESS_BRANCHES, reassess, run_dev_loop
from .simulate import LoopFuzzResult, fuzz_dev_loops

__all__ = [
    "CausalChain", "ChainLink", "DevOutcome", "FieldQuery", "FieldSet",
    "GateResult", "LoopState", "Mechanism", "technique_key",
    "CHAIN_LENGTH", "build_causal_chain", "map_fields",
    "GATE_CRITERIA", "evaluate_gate", "gate_result_from_evidence", "write_gate_report",
    "DEFAULT_T_MAX", "REASSESS_BRANCHES", "reassess", "run_dev_loop",
    "LoopFuzzResult", "fuzz_dev_loops",
]
