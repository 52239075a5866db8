"""Heterogeneous multi-agent debate engine with identity-filtered retrieval."""

__version__ = "0.1.0"
