"""rwm: a durable multi-agent research-orchestration engine.

The package is organized around a persistent research world model (a typed,
uncertainty-annotated property graph) plus the protocols that grow it:
literature ingestion, two-round consensus probing, a quality-gated
development loop, and a phase state machine with human decision points.
Agent backends are pluggable; scripted and seeded-stochastic backends make
every protocol property testable offline.
"""

__version__ = "0.1.0"
