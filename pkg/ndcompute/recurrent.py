"""
Bidirectional GRU layer and the temporal mean/max head

Gate layout inside the stacked weights is [reset, update, candidate]:

    r  = sigmoid(x W_xr + b_xr + h W_hr + b_hr)
    z  = sigmoid(x W_xz + b_xz + h W_hz + b_hz)
    n  = tanh(x W_xn + b_xn + r * (h W_hn + b_hn))
    h' = (1 - z) * n + z * h

The backward direction runs the same recurrence over the time-reversed
sequence; outputs are concatenated per timestep as [forward, backward].
"""

import numpy as np
from scipy.special import expit

from utils.errors import EmptySequenceError, InvalidShapeError
from .tensor import require_ndim


def gru_param_shapes(features, hidden):
    return {
        'w_x': (features, 3 * hidden),
        'w_h': (hidden, 3 * hidden),
        'b_x': (3 * hidden,),
        'b_h': (3 * hidden,),
    }


def _check_direction(params, features):
    hidden = params['w_h'].shape[0]
    expected = gru_param_shapes(features, hidden)
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise InvalidShapeError(f"gru {name}: expected {shape}, got {params[name].shape}")
    return hidden


def gru_sequence(x, params):
    """Run one direction over x (T x B x F) from a zero state; returns (T x B x h, cache)"""
    require_ndim('gru input', x, 3)
    T, B, F = x.shape
    if T == 0:
        raise EmptySequenceError("gru: sequence has no timesteps")
    hidden = _check_direction(params, F)
    w_x, w_h, b_x, b_h = params['w_x'], params['w_h'], params['b_x'], params['b_h']

    h = np.zeros((B, hidden), dtype=x.dtype)
    out = np.empty((T, B, hidden), dtype=x.dtype)
    steps = []
    gx_all = x.reshape(T * B, F) @ w_x + b_x
    gx_all = gx_all.reshape(T, B, 3 * hidden)
    for t in range(T):
        gx = gx_all[t]
        gh = h @ w_h + b_h
        r = expit(gx[:, :hidden] + gh[:, :hidden])
        z = expit(gx[:, hidden:2 * hidden] + gh[:, hidden:2 * hidden])
        gh_n = gh[:, 2 * hidden:]
        n = np.tanh(gx[:, 2 * hidden:] + r * gh_n)
        h_new = (1 - z) * n + z * h
        steps.append((h, r, z, n, gh_n))
        h = h_new
        out[t] = h
    return out, (x, params, steps)


def gru_sequence_backward(dout, cache):
    """Returns (dx, grads) where grads mirrors the parameter dict"""
    x, params, steps = cache
    T, B, F = x.shape
    w_x, w_h = params['w_x'], params['w_h']
    hidden = w_h.shape[0]

    grads = {name: np.zeros_like(value) for name, value in params.items()}
    dx = np.empty_like(x)
    dh_rec = np.zeros((B, hidden), dtype=dout.dtype)
    for t in reversed(range(T)):
        h_prev, r, z, n, gh_n = steps[t]
        dh = dout[t] + dh_rec
        dn = dh * (1 - z)
        dz = dh * (h_prev - n)
        dh_prev = dh * z

        dan = dn * (1 - n * n)
        dar = dan * gh_n * r * (1 - r)
        daz = dz * z * (1 - z)
        dgx = np.concatenate([dar, daz, dan], axis=1)
        dgh = np.concatenate([dar, daz, dan * r], axis=1)

        grads['w_x'] += x[t].T @ dgx
        grads['b_x'] += dgx.sum(axis=0)
        grads['w_h'] += h_prev.T @ dgh
        grads['b_h'] += dgh.sum(axis=0)
        dx[t] = dgx @ w_x.T
        dh_rec = dh_prev + dgh @ w_h.T
    return dx, grads


def bigru_layer(x, params):
    """
    x: T x B x F, params: {'fwd': {...}, 'bwd': {...}} -> T x B x 2h
    """
    out_f, cache_f = gru_sequence(x, params['fwd'])
    out_b, cache_b = gru_sequence(x[::-1], params['bwd'])
    out = np.concatenate([out_f, out_b[::-1]], axis=2)
    return out, (cache_f, cache_b, out_f.shape[2])


def bigru_layer_backward(dout, cache):
    cache_f, cache_b, hidden = cache
    dx_f, grads_f = gru_sequence_backward(dout[:, :, :hidden], cache_f)
    dx_b, grads_b = gru_sequence_backward(np.ascontiguousarray(dout[::-1, :, hidden:]), cache_b)
    return dx_f + dx_b[::-1], {'fwd': grads_f, 'bwd': grads_b}


def temporal_avgmax(x):
    """T x B x G -> B x 2G as [mean over time, max over time]"""
    require_ndim('temporal_avgmax input', x, 3)
    T = x.shape[0]
    if T == 0:
        raise EmptySequenceError("temporal_avgmax: sequence has no timesteps")
    argmax = np.argmax(x, axis=0)
    peak = np.take_along_axis(x, argmax[None], axis=0)[0]
    out = np.concatenate([x.mean(axis=0), peak], axis=1)
    return out, (x.shape, argmax)


def temporal_avgmax_backward(dout, cache):
    (T, B, G), argmax = cache
    dx = np.broadcast_to(dout[None, :, :G] / T, (T, B, G)).copy()
    rows, cols = np.indices((B, G))
    dx[argmax, rows, cols] += dout[:, G:]
    return dx
