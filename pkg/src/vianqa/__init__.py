"""Verifiable-reward and benchmark toolkit for multi-view industrial video anomaly QA."""

__version__ = "0.1.0"
