"""
Array aliases and coercion helpers for complex-valued data.
"""
from typing import Any, Tuple

import numpy as np
from typing_extensions import TypeAlias

from .errors import DimensionError

CVec: TypeAlias = np.ndarray
"""Dense 1-D array of complex scalars (tap weights, inputs, intermediate r)."""

CMat: TypeAlias = np.ndarray
"""Dense 2-D complex array."""


def as_cvec(value: Any, name: str = "vector") -> CVec:
    """Coerce ``value`` to a 1-D complex array."""
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionError(
            f"{name} must be one-dimensional, got shape {arr.shape}",
            {"name": name, "shape": arr.shape},
        )
    return arr


def as_cmat(value: Any, name: str = "matrix") -> CMat:
    """Coerce ``value`` to a 2-D complex array."""
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionError(
            f"{name} must be two-dimensional, got shape {arr.shape}",
            {"name": name, "shape": arr.shape},
        )
    return arr


def check_length(vec: np.ndarray, expected: int, name: str) -> None:
    if vec.shape[0] != expected:
        raise DimensionError(
            f"{name} has length {vec.shape[0]}, expected {expected}",
            {"name": name, "length": vec.shape[0], "expected": expected},
        )


def check_square(mat: np.ndarray, expected: int, name: str) -> None:
    shape: Tuple[int, ...] = mat.shape
    if shape != (expected, expected):
        raise DimensionError(
            f"{name} has shape {shape}, expected ({expected}, {expected})",
            {"name": name, "shape": shape, "expected": expected},
        )
