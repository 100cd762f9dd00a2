# ABOUTME: Core solver package.
# ABOUTME: Modules are imported directly (core.hilbert, core.problem, core.subsolver, core.criteria, core.outer).
"""Solver core: Hilbert-space layer, problems, subsolver, criteria, outer loop."""
