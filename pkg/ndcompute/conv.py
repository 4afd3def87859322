"""
Spatiotemporal operations: conv3d, relu, maxpool3d

Each forward returns (output, cache); the matching *_backward consumes the
upstream gradient and the cache. Convolution loops over kernel offsets and
contracts channels with one tensordot per offset, so no im2col buffer is built.
"""

import numpy as np

from utils.errors import InvalidShapeError
from .tensor import out_extent, require_ndim, triple


def _window(offset, stride, count):
    return slice(offset, offset + stride * (count - 1) + 1, stride)


def conv3d(x, kernel, bias, stride=1, pad=0):
    """
    3D convolution with zero padding.

    x: B x C_in x T x H x W, kernel: C_out x C_in x kT x kH x kW, bias: C_out
    """
    require_ndim('conv3d input', x, 5)
    require_ndim('conv3d kernel', kernel, 5)
    stride, pad = triple(stride), triple(pad)
    B, C_in, T, H, W = x.shape
    C_out, k_in, kT, kH, kW = kernel.shape
    if k_in != C_in:
        raise InvalidShapeError(f"conv3d: kernel expects {k_in} input channels, input has {C_in}")
    if bias.shape != (C_out,):
        raise InvalidShapeError(f"conv3d: bias shape {bias.shape} != ({C_out},)")
    if min(stride) < 1 or min(pad) < 0:
        raise InvalidShapeError(f"conv3d: bad stride {stride} / pad {pad}")

    extents = [out_extent(n, k, s, p) for n, k, s, p in zip((T, H, W), (kT, kH, kW), stride, pad)]
    if min(extents) < 1:
        raise InvalidShapeError(
            f"conv3d: kernel {(kT, kH, kW)} does not fit padded input {(T, H, W)} with pad {pad}"
        )
    To, Ho, Wo = extents
    pT, pH, pW = pad
    xp = np.pad(x, ((0, 0), (0, 0), (pT, pT), (pH, pH), (pW, pW)))

    out = np.zeros((B, C_out, To, Ho, Wo), dtype=x.dtype)
    for dt in range(kT):
        st = _window(dt, stride[0], To)
        for dh in range(kH):
            sh = _window(dh, stride[1], Ho)
            for dw in range(kW):
                sw = _window(dw, stride[2], Wo)
                patch = xp[:, :, st, sh, sw]
                # (C_out, C_in) . (B, C_in, To, Ho, Wo) -> (C_out, B, To, Ho, Wo)
                out += np.tensordot(kernel[:, :, dt, dh, dw], patch, axes=([1], [1])).transpose(1, 0, 2, 3, 4)
    out += bias.reshape(1, C_out, 1, 1, 1)
    cache = (xp, kernel, stride, pad, x.shape)
    return out, cache


def conv3d_backward(dout, cache):
    """Returns (dx, dkernel, dbias)"""
    xp, kernel, stride, pad, x_shape = cache
    _, _, To, Ho, Wo = dout.shape
    _, _, kT, kH, kW = kernel.shape

    dxp = np.zeros_like(xp)
    dkernel = np.zeros_like(kernel)
    for dt in range(kT):
        st = _window(dt, stride[0], To)
        for dh in range(kH):
            sh = _window(dh, stride[1], Ho)
            for dw in range(kW):
                sw = _window(dw, stride[2], Wo)
                patch = xp[:, :, st, sh, sw]
                dkernel[:, :, dt, dh, dw] = np.tensordot(dout, patch, axes=([0, 2, 3, 4], [0, 2, 3, 4]))
                # (B, C_out, ...) x (C_out, C_in) -> (B, To, Ho, Wo, C_in)
                contrib = np.tensordot(dout, kernel[:, :, dt, dh, dw], axes=([1], [0]))
                dxp[:, :, st, sh, sw] += contrib.transpose(0, 4, 1, 2, 3)
    dbias = dout.sum(axis=(0, 2, 3, 4))

    pT, pH, pW = pad
    _, _, T, H, W = x_shape
    dx = dxp[:, :, pT:pT + T, pH:pH + H, pW:pW + W]
    return np.ascontiguousarray(dx), dkernel, dbias


def relu(x):
    out = np.maximum(x, 0)
    return out, x


def relu_backward(dout, cache):
    return dout * (cache > 0)


def maxpool3d(x, window, stride=None):
    """
    Max over (wT, wH, wW) windows; trailing remainders are dropped.
    Gradient goes to the first maximal element of each window.
    """
    require_ndim('maxpool3d input', x, 5)
    window = triple(window)
    stride = triple(stride if stride is not None else window)
    B, C, T, H, W = x.shape
    for axis, (n, w) in enumerate(zip((T, H, W), window)):
        if w > n:
            raise InvalidShapeError(f"maxpool3d: window {window} larger than input axis {axis} ({n})")
    To, Ho, Wo = (out_extent(n, w, s) for n, w, s in zip((T, H, W), window, stride))

    out = None
    argmax = np.zeros((B, C, To, Ho, Wo), dtype=np.int32)
    index = 0
    for dt in range(window[0]):
        st = _window(dt, stride[0], To)
        for dh in range(window[1]):
            sh = _window(dh, stride[1], Ho)
            for dw in range(window[2]):
                sw = _window(dw, stride[2], Wo)
                patch = x[:, :, st, sh, sw]
                if out is None:
                    out = patch.copy()
                else:
                    better = patch > out
                    out = np.where(better, patch, out)
                    argmax[better] = index
                index += 1
    cache = (x.shape, window, stride, argmax)
    return out, cache


def maxpool3d_backward(dout, cache):
    x_shape, window, stride, argmax = cache
    _, _, To, Ho, Wo = dout.shape
    dx = np.zeros(x_shape, dtype=dout.dtype)
    index = 0
    for dt in range(window[0]):
        st = _window(dt, stride[0], To)
        for dh in range(window[1]):
            sh = _window(dh, stride[1], Ho)
            for dw in range(window[2]):
                sw = _window(dw, stride[2], Wo)
                dx[:, :, st, sh, sw] += np.where(argmax == index, dout, 0)
                index += 1
    return dx
