"""
Finite-difference verification of analytic gradients

An operation under test is a callable `op(*inputs) -> (output, grad_fn)` where
`grad_fn(dout)` returns one gradient per input (None for inputs that are not
differentiated). The scalar checked is sum(output * R) for a fixed random R.
"""

import numpy as np

from .tensor import CHECK_DTYPE

FD_STEP = 1e-5


def differentiable(forward, backward, unpack=None):
    """Adapt a (forward, backward) pair using the cache convention"""

    def op(*inputs):
        out, cache = forward(*inputs)
        def grad_fn(dout):
            grads = backward(dout, cache)
            if unpack is not None:
                grads = unpack(grads)
            if not isinstance(grads, tuple):
                grads = (grads,)
            return grads
        return out, grad_fn

    return op


def nudge_kinks(x, rng, margin=1e-3):
    """Jitter values so no two coincide and none sit within `margin` of zero"""
    x = x + rng.uniform(-margin, margin, size=x.shape)
    close = np.abs(x) < margin
    return np.where(close, np.copysign(2 * margin, x), x)


def norm_relative_error(analytic, numeric):
    """||a - n|| / (||a|| + ||n||), 0 when both vanish"""
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def grad_check(operation, inputs, step=FD_STEP, seed=0, kinks=False, check=None, max_entries=None):
    """
    Compare analytic gradients against central differences at 64-bit.

    Returns the largest norm-relative error among the checked inputs, each
    input compared as one vector of its checked entries. `check` lists
    the input positions to differentiate (all by default); `max_entries`
    checks a seeded sample of at most that many entries per input.
    """
    rng = np.random.default_rng(seed)
    inputs = [np.array(x, dtype=CHECK_DTYPE) for x in inputs]
    if kinks:
        inputs = [nudge_kinks(x, rng) for x in inputs]
    check = range(len(inputs)) if check is None else check

    out, grad_fn = operation(*inputs)
    weights = rng.standard_normal(np.shape(out))
    analytic = grad_fn(weights)

    def scalar():
        value, _ = operation(*inputs)
        return float(np.sum(value * weights))

    worst = 0.0
    for position in check:
        x = inputs[position]
        flat = x.reshape(-1)
        entries = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            entries = np.sort(rng.choice(flat.size, size=max_entries, replace=False))
        numeric = np.zeros(entries.size)
        for k, j in enumerate(entries):
            saved = flat[j]
            flat[j] = saved + step
            plus = scalar()
            flat[j] = saved - step
            minus = scalar()
            flat[j] = saved
            numeric[k] = (plus - minus) / (2 * step)
        expected = np.asarray(analytic[position]).reshape(-1)[entries]
        worst = max(worst, norm_relative_error(expected, numeric))
    return worst
