# ABOUTME: Test-suite package marker for proxnewton.
# ABOUTME: Subpackages organize tests by category (unit, properties, acceptance).
"""Test suite for proxnewton."""
