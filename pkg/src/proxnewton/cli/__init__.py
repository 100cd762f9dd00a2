# ABOUTME: Subpackage exports for the experiment CLI.
# ABOUTME: Re-exports ExperimentConfig, parse_config and main from cli/main.py.
"""Experiment command-line interface."""
from proxnewton.cli.main import ExperimentConfig, main, parse_config

__all__ = ["ExperimentConfig", "main", "parse_config"]
