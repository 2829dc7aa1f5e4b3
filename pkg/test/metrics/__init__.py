"""Tests for gambit statistics and ranking."""
