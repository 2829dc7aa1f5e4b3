"""Synthetic finite MDPs for checking the Bellman and gambit machinery."""
