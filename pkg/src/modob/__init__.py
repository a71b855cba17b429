"""Quadratic relations of log-generator groups and their obstruction cocycles on tori."""

__version__ = "0.1.0"
