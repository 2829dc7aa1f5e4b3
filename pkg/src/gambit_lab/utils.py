"""Generic utility functions."""

from __future__ import annotations


def format_signed(value: float, digits: int = 2) -> str:
    """Format a number with an explicit sign, as evaluation tables print it.

    Args:
        value: The number to format.
        digits: Decimal places.

    Returns:
        The formatted string, e.g. "+0.39" or "-2.56".
    """
    return f"{value:+.{digits}f}"
