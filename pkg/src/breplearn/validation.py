"""Input validation helpers, sklearn check_array style but for our domain."""

import numbers

import numpy as np

from .exceptions import ArgumentError


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ArgumentError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_nonnegative_int(value, name):
    if not isinstance(value, numbers.Integral) or value < 0:
        raise ArgumentError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)


def check_positive_int(value, name):
    if not isinstance(value, numbers.Integral) or value < 1:
        raise ArgumentError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_in_range(value, name, low, high, inclusive=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ArgumentError(f"{name} must be a finite number, got {value!r}")
    ok = low <= value <= high if inclusive else low < value < high
    if not ok:
        bounds = f"[{low}, {high}]" if inclusive else f"({low}, {high})"
        raise ArgumentError(f"{name} must lie in {bounds}, got {value!r}")
    return float(value)


def check_choice(value, name, choices):
    if value not in choices:
        raise ArgumentError(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value


def check_finite_array(arr, name, shape=None, dtype=np.float64):
    out = np.asarray(arr, dtype=dtype)
    if shape is not None and out.shape != tuple(shape):
        raise ArgumentError(f"{name} must have shape {tuple(shape)}, got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ArgumentError(f"{name} contains non-finite values")
    return out
