"""Exception hierarchy for the engine.

Domain errors derive from RwmError so callers (CLI, HTTP API) can map them
to exit code 1 / HTTP 4xx uniformly; anything else is a genuine bug.
"""
from __future__ import annotations


class RwmError(Exception):
    """Base class for all domain errors raised by this package."""


# --- world model ---

class ValidationError(RwmError):
    """Malformed node/edge attributes or an ill-typed operation argument."""


class UnknownElementError(RwmError):
    """An operation referenced a node or edge id that does not exist."""


class DuplicateNodeError(RwmError):
    """add_node was called for a canonical key that is already present."""


class SignatureError(RwmError):
    """(src kind, relation, dst kind) violates the edge signature table."""


class DeltaError(RwmError):
    """A delta is not applicable to the target model (dangling refs)."""


class FrozenModelError(RwmError):
    """Mutation attempted on a read-only snapshot."""


class MigrationRequiredError(RwmError):
    """Serialized payload carries an unsupported schema_version."""


class CorruptModelError(RwmError):
    """Serialized payload is not a valid model file."""


# --- agent gateway ---

class GatewayError(RwmError):
    """Base class for invocation-layer failures."""


class BudgetExceededError(GatewayError):
    """Invocation refused: it would push spend past the configured maxima."""


class SchemaValidationError(GatewayError):
    """Agent response does not validate against the role's schema."""


class TransportError(GatewayError):
    """Backend could not produce a response (network, missing fixture)."""


class DuplicateBackendError(GatewayError):
    """register_backend was called with a name that is already taken."""


# --- pipeline / engine ---

class IngestionError(RwmError):
    """Phase 1/2a pipeline failure (all venues or all extractions failed)."""


class ConsensusError(RwmError):
    """Protocol violation in the probing rounds or orchestration."""


class DevLoopError(RwmError):
    """Precondition or protocol violation in the development loop."""


class EngineError(RwmError):
    """Phase machine violation (blocked decision, bad transition, ...)."""


class DecisionError(EngineError):
    """No such pending decision, or the chosen option was not offered."""


class ConfigError(RwmError):
    """Run configuration file is invalid."""
