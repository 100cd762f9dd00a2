# ABOUTME: Verbose-mode print routing for the experiment CLI.
# ABOUTME: vprint is silent unless verbose mode is on; set_verbose / is_verbose manage the global flag.
"""Control verbose console output."""

# Global verbose flag, set by the CLI from --verbose
_verbose_mode: bool = False


def set_verbose(enabled: bool) -> None:
    """
    Turn verbose console output on or off.

    Args:
        enabled: New verbose setting
    """
    global _verbose_mode
    _verbose_mode = bool(enabled)


def vprint(message: str, force: bool = False) -> None:
    """
    Print message only if verbose mode is enabled.

    Args:
        message: Message to print
        force: If True, always print regardless of verbose mode

    Example:
        vprint("[OUTER] k=3 accepted")  # Only if verbose
        vprint("All runs converged", force=True)  # Always print
    """
    if force or _verbose_mode:
        print(message)


def is_verbose() -> bool:
    """
    Check if verbose mode is enabled.

    Returns:
        True if verbose mode is on, False otherwise
    """
    return _verbose_mode
