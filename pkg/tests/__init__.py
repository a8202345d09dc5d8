"""Test package; keeps tests.conftest a single module under pytest."""
