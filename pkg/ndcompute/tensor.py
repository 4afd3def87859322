"""
Tensor helpers shared by every operation

Tensors are plain row-major numpy arrays. Training runs at 32-bit, gradient
checks at 64-bit; operations keep the dtype of their inputs.
"""

import numpy as np

from utils.errors import InvalidShapeError, NonFiniteError

TRAIN_DTYPE = np.float32
CHECK_DTYPE = np.float64


def as_tensor(data, dtype=TRAIN_DTYPE):
    """Copy `data` into a contiguous array of the requested precision"""
    return np.ascontiguousarray(np.asarray(data, dtype=dtype))


def require_ndim(name, x, ndim):
    if x.ndim != ndim:
        raise InvalidShapeError(f"{name}: expected {ndim}-D tensor, got shape {x.shape}")


def require_finite(name, x):
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f"{name}: tensor holds non-finite values")


def triple(value):
    """Normalize an int or 3-sequence to a 3-tuple"""
    if isinstance(value, (int, np.integer)):
        return (int(value),) * 3
    value = tuple(int(v) for v in value)
    if len(value) != 3:
        raise InvalidShapeError(f"expected 3 values, got {value}")
    return value


def out_extent(size, kernel, stride, pad=0):
    """floor((size + 2*pad - kernel) / stride) + 1"""
    return (size + 2 * pad - kernel) // stride + 1
