"""Spatio-temporal knowledge-graph QA over vectorized historical map features."""

__version__ = "0.1.0"
