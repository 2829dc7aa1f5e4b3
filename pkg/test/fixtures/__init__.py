"""Test fixture files."""
