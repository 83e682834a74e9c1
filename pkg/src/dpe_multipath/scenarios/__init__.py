"""Bundled scenario fixtures; regenerate with scripts/build_scenarios.py."""
