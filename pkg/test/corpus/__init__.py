"""Tests for corpus indexing and transition queries."""
