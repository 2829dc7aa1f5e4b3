"""Tests for configuration, analysis, reports and self-checks."""
