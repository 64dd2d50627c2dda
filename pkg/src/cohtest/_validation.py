"""Small input-validation helpers shared by the public functions."""

import numbers

import numpy as np

from .exceptions import BadIndex, ShapeMismatch


def check_complex_vector(a, name="x"):
    a = np.asarray(a)
    if a.ndim != 1:
        raise ShapeMismatch(f"{name} must be one-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a.astype(np.complex128, copy=False)


def check_same_shape(a, b, names=("x", "y")):
    if np.shape(a) != np.shape(b):
        raise ShapeMismatch(
            f"{names[0]} and {names[1]} differ in shape: {np.shape(a)} vs {np.shape(b)}"
        )


def check_index(index, n, what="band"):
    if isinstance(index, (bool, np.bool_)) or not isinstance(index, numbers.Integral):
        raise BadIndex(f"{what} index must be an integer, got {index!r}")
    index = int(index)
    if not 0 <= index < n:
        raise BadIndex(f"{what} index {index} out of range [0, {n})")
    return index


def check_positive_int(value, name, minimum=1):
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)
