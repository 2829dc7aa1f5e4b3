"""Tests for the UCI engine bridge."""
