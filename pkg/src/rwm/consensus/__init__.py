"""Phase 2b: two-round probing with corroboration and orchestrated routing."""
from .types import (
    CORROBORATION_THRESHOLD,
    PROBE_PERSPECTIVES,
    AgentSpec,
    ConsensusResult,
    CorroboratedGap,
    GapCandidate,
    OrchestratorDecision,
    TaskProposal,
)
from .protocol import (
    ConsensusSession,
    corroborate,
    orchestrate,
    run_consensus,
    run_round1,
    run_round2,
)
from .simulate import (
    CSV_HEADER,
    PLANTED_GAP,
    SimulationResult,
    simulate_consensus,
    support_quorum,
    write_simulation_csv,
)

__all__ = [
    "CORROBORATION_THRESHOLD", "PROBE_PERSPECTIVES", "AgentSpec",
    "ConsensusResult", "CorroboratedGap", "GapCandidate",
    "OrchestratorDecision", "TaskProposal",
    "ConsensusSession", "corroborate", "orchestrate", "run_consensus",
    "run_round1", "run_round2",
    "CSV_HEADER", "PLANTED_GAP", "SimulationResult", "simulate_consensus",
    "support_quorum", "write_simulation_csv",
]
