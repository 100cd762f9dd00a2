# ABOUTME: Path resolution and YAML loading for experiment config files.
# ABOUTME: resolve_config_path handles absolute/relative lookup; load_config_file returns (success, data, error_msg) tuples.
"""Config file loading utilities."""

from pathlib import Path
from typing import Optional, Tuple

import yaml

from proxnewton import config


def resolve_config_path(filepath: str) -> Tuple[bool, Optional[Path], str]:
    """
    Resolve a config file path.

    Resolution strategy:
    1. If absolute path exists → use as-is
    2. If relative path exists from working directory → use it
    3. If relative to the project root → use that
    4. Otherwise → return error

    Args:
        filepath: User-provided path

    Returns:
        Tuple of (success, resolved_path, error_message)
    """
    path = Path(filepath)

    if path.is_absolute():
        if path.exists():
            return True, path, ""
        return False, None, f"Config file not found: {filepath}"

    if path.exists():
        return True, path, ""

    project_path = config.PROJECT_ROOT / filepath
    if project_path.exists():
        return True, project_path, ""

    suggestions = [
        f"  - As absolute path: {path.absolute()}",
        f"  - From project root: {project_path}",
    ]
    return False, None, f"Config file not found: {filepath}\nTried:\n" + "\n".join(suggestions)


def load_config_file(filepath: str) -> Tuple[bool, Optional[dict], str]:
    """
    Load a YAML experiment config into a flat dict.

    Args:
        filepath: Path to a .yaml / .yml file

    Returns:
        Tuple of (success, data, error_message)
        - data is None on failure; an empty file gives {}

    Examples:
        >>> ok, data, _ = load_config_file("experiments/alpha_sweep.yaml")
    """
    success, resolved, error_msg = resolve_config_path(filepath)
    if not success:
        return False, None, error_msg

    if resolved.suffix.lower() not in (".yaml", ".yml"):
        return False, None, f"Unsupported config format '{resolved.suffix}'. Use .yaml or .yml"

    try:
        with open(resolved) as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        return False, None, f"Error loading {resolved.name}: {e}"

    if data is None:
        return True, {}, ""
    if not isinstance(data, dict):
        return False, None, f"Error loading {resolved.name}: top level must be a mapping"
    return True, data, ""
