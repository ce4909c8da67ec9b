"""The phase 0-7 state machine, its HTTP API, and run configuration."""
from .config import RunConfig, build_gateway
from .events import EventLog
from .project import (
    CONTRIBUTION_TRACKS,
    DECISION_KINDS,
    PHASE_ORDER,
    REVIEW_ROUTES,
    PendingDecision,
    Phase,
    ProjectState,
    ReviewWeakness,
    next_phase,
    route_review,
    validate_transition,
)
from .store import ProjectStore
from .engine import Engine
from .api import create_app, serve

__all__ = [
    "RunConfig", "build_gateway",
    "EventLog",
    "CONTRIBUTION_TRACKS", "DECISION_KINDS", "PHASE_ORDER", "REVIEW_ROUTES",
    "PendingDecision", "Phase", "ProjectState", "ReviewWeakness",
    "next_phase", "route_review", "validate_transition",
    "ProjectStore",
    "Engine",
    "create_app", "serve",
]
