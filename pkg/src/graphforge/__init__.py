"""Graph-state and measurement-based quantum computing toolkit."""

__version__ = "0.1.0"
