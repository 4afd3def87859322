"""
Utility functions for formatting report numbers
"""
from decimal import Decimal, ROUND_HALF_UP


def format_to_two_decimals(value):
    """Round a number to exactly 2 decimal places using Decimal for precision"""
    if value is None:
        return None
    decimal_val = Decimal(str(value)).quantize(Decimal('0.01'), rounding=ROUND_HALF_UP)
    return float(decimal_val)


def format_percent(rate):
    """0.0323 -> '3.23%'"""
    if rate is None:
        return 'n/a'
    return f"{format_to_two_decimals(rate * 100):.2f}%"


def format_threshold(value):
    """Thresholds keep full precision so they round-trip through text files"""
    return repr(float(value))
