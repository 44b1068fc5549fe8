"""Metrics engine and harness for benchmarking autonomous agents."""

__version__ = "0.1.0"
