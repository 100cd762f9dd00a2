# ABOUTME: Utils-package exports: logging helpers, verbose console output, config file loading.
"""Shared utilities."""

from proxnewton.utils.output_control import vprint, set_verbose, is_verbose
from proxnewton.utils.config_loading import load_config_file, resolve_config_path

__all__ = [
    "vprint",
    "set_verbose",
    "is_verbose",
    "load_config_file",
    "resolve_config_path",
]
