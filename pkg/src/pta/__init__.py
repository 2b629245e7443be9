"""Threat-model-as-code auditor for CI/CD pipelines."""

__version__ = "0.1.0"
