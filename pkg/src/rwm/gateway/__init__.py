"""Uniform agent invocation with scripted, stochastic, and remote backends."""
from .base import AgentRequest, AgentResponse, Backend, estimate_tokens
from .budget import Budget, unlimited
from .gateway import AgentGateway, GatewayConfig, MAX_ATTEMPTS
from .remote import RemoteBackend, RemoteConfig
from .roles import AgentRole, validate_response
from .scripted import ScriptedBackend
from .stochastic import StochasticAgentConfig, StochasticBackend

__all__ = [
    "AgentRequest", "AgentResponse", "Backend", "estimate_tokens",
    "Budget", "unlimited",
    "AgentGateway", "GatewayConfig", "MAX_ATTEMPTS",
    "RemoteBackend", "RemoteConfig",
    "AgentRole", "validate_response",
    "ScriptedBackend",
    "StochasticAgentConfig", "StochasticBackend",
]
