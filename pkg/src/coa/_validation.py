"""Small argument checks shared by the public entry points."""

import numbers
import os

import numpy as np

DEFAULT_MAX_N = 8192


def max_cells():
    """Upper bound on the number of cells, overridable through ``COA_MAX_N``."""
    raw = os.environ.get("COA_MAX_N")
    if raw is None:
        return DEFAULT_MAX_N
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"COA_MAX_N must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("COA_MAX_N must be positive")
    return value


def check_positive(name, value, strict=True):
    if not isinstance(value, numbers.Real) or isinstance(value, bool) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    if strict and value <= 0:
        raise ValueError(f"{name} must be positive")
    if not strict and value < 0:
        raise ValueError(f"{name} must be non-negative")
    return float(value)


def check_count(name, value, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_option(name, value, options):
    if value not in options:
        raise ValueError(f"{name} must be one of {sorted(options)}, got {value!r}")
    return value


def check_cell_count(n):
    n = check_count("number of cells", n)
    cap = max_cells()
    if n > cap:
        raise ValueError(f"{n} cells exceeds the cap of {cap} (set COA_MAX_N to raise it)")
    return n


def check_vector(values, length=None, name="values"):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr
