"""Test suite for the gambit_lab package."""
