"""Pre-Act / ReAct agent runtime with turn-level and end-to-end evaluation."""

__version__ = "0.1.0"
