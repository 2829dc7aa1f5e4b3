"""Tests for tabular MDPs and their fixture files."""
