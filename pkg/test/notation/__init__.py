"""Tests for FEN, SAN and PGN handling."""
