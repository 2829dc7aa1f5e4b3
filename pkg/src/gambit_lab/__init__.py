"""Gambit Lab: engine, corpus and skewness analysis of chess gambits."""
