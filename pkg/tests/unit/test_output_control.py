# ABOUTME: Unit tests for vprint and the verbose flag in utils/output_control.py.
# ABOUTME: Verifies verbose-mode gating and forced output.
"""Unit tests for verbose mode output control."""

import pytest

from proxnewton.utils.output_control import is_verbose, set_verbose, vprint


@pytest.fixture(autouse=True)
def reset_verbose():
    set_verbose(False)
    yield
    set_verbose(False)


def test_vprint_verbose_off(capsys):
    """vprint should not output when verbose is OFF."""
    vprint("Test message")

    captured = capsys.readouterr()
    assert captured.out == ""


def test_vprint_verbose_on(capsys):
    """vprint should output when verbose is ON."""
    set_verbose(True)

    vprint("Test message")

    captured = capsys.readouterr()
    assert "Test message" in captured.out


def test_vprint_force_always_prints(capsys):
    """force=True prints even when verbose is OFF."""
    vprint("Forced message", force=True)

    captured = capsys.readouterr()
    assert "Forced message" in captured.out


def test_is_verbose_tracks_flag():
    """Test that is_verbose follows set_verbose."""
    assert not is_verbose()
    set_verbose(True)
    assert is_verbose()
