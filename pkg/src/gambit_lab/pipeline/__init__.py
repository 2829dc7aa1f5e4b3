"""Run configuration, gambit analysis, report files and the self-check suite."""
