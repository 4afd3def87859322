"""Affine map, matrix product and row normalization"""

import numpy as np

from utils.errors import InvalidShapeError
from .tensor import require_ndim

NORM_EPS = 1e-12


def affine(x, weight, bias):
    """B x F times F x O plus O"""
    require_ndim('affine input', x, 2)
    if weight.ndim != 2 or x.shape[1] != weight.shape[0] or bias.shape != (weight.shape[1],):
        raise InvalidShapeError(
            f"affine: input {x.shape}, weight {weight.shape}, bias {bias.shape} do not chain"
        )
    return x @ weight + bias, (x, weight)


def affine_backward(dout, cache):
    x, weight = cache
    return dout @ weight.T, x.T @ dout, dout.sum(axis=0)


def matmul(a, b):
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise InvalidShapeError(f"matmul: inner dimensions of {a.shape} and {b.shape} differ")
    return a @ b, (a, b)


def matmul_backward(dout, cache):
    a, b = cache
    return dout @ b.T, a.T @ dout


def l2_normalize(rows, eps=NORM_EPS):
    """Divide each row by max(||row||, eps); zero rows stay zero"""
    require_ndim('l2_normalize input', rows, 2)
    norms = np.sqrt(np.sum(rows * rows, axis=1, keepdims=True))
    denom = np.maximum(norms, eps)
    out = rows / denom
    return out, (out, norms, denom, eps)


def l2_normalize_backward(dout, cache):
    out, norms, denom, eps = cache
    scaled = norms > eps
    projection = np.sum(out * dout, axis=1, keepdims=True)
    # below eps the map is linear: y = x / eps
    return np.where(scaled, (dout - out * projection) / denom, dout / denom)
