"""Exact rational helpers for costs, alphas and objective values."""

import math
from fractions import Fraction

INFINITY = math.inf


def parse_rational(value) -> Fraction:
    """Parse a non-negative rational from text or a number.

    Accepts integers, Fractions, decimal strings ("0.25") and ratios ("1/4").
    Floats are converted through their shortest repr so 0.1 becomes 1/10.

    Raises:
        ValueError: If the value is not a finite non-negative rational.
    """
    if isinstance(value, bool):
        raise ValueError(f"Not a rational: {value!r}")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"Not a finite rational: {value!r}")
        value = repr(value)
    try:
        result = Fraction(str(value).strip()) if not isinstance(value, Fraction) else value
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"Not a rational: {value!r}")
    if result < 0:
        raise ValueError(f"Expected a non-negative value, got {value!r}")
    return result


def format_rational(value) -> str:
    """Render a cost or objective: '5', '1/2' or 'inf'."""
    if value == INFINITY:
        return 'inf'
    return str(Fraction(value))


def rational_to_json(value):
    """JSON-safe rendering: ints stay ints, everything else becomes a string."""
    if value is None:
        return None
    if value == INFINITY:
        return 'inf'
    value = Fraction(value)
    if value.denominator == 1:
        return value.numerator
    return str(value)
