"""Logarithm conventions shared by every formula.

``log2`` is the default logarithm; natural logs are always spelled ``ln``.
"""
import math
import warnings


class DegenerateLogWarning(UserWarning):
    pass


def log2(x: float) -> float:
    return math.log2(x)


def ln(x: float) -> float:
    return math.log(x)


def floor_log2(n: int) -> int:
    if n < 1:
        raise ValueError(f"floor_log2 needs n >= 1, got {n}")
    return int(n).bit_length() - 1


def ceil_log2(x: float) -> int:
    return math.ceil(math.log2(x) - 1e-12)


def clamped_log2(x: float, what: str = "log argument") -> float:
    """log2(x), clamped at 0 with a warning when x < 1.

    Cost formulas are upper bounds meant for small error targets; a negative
    log term would make them meaningless.
    """
    if x < 1.0:
        warnings.warn(f"{what} = {x:.6g} < 1; log term clamped at 0", DegenerateLogWarning, stacklevel=2)
        return 0.0
    return math.log2(x)


def is_power_of_two(n) -> bool:
    return isinstance(n, (int,)) and n >= 1 and (n & (n - 1)) == 0
