"""Gambit statistics: continuation moments, test statistic, classification and ranking."""
