"""Adam update rule over a flat dict of named parameters"""

import logging
from dataclasses import dataclass, field

import numpy as np

from utils.errors import InvalidShapeError, NonFiniteError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First/second moment accumulators per parameter name"""

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def for_params(cls, params, **hyper):
        state = cls(**hyper)
        for name, value in params.items():
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)
        return state


def adam_step(params, grads, state):
    """
    Bias-corrected Adam. Returns (new params, state); the input params dict is
    not modified. A non-finite gradient aborts the step before anything moves.
    """
    for name, grad in grads.items():
        if name not in params or grad.shape != params[name].shape:
            raise InvalidShapeError(f"adam: gradient '{name}' does not match its parameter")
        if not np.all(np.isfinite(grad)):
            logger.error(f"Non-finite gradient for {name} at step {state.step + 1}")
            raise NonFiniteError(f"adam: gradient '{name}' holds non-finite values; step aborted")

    state.step += 1
    t = state.step
    correction1 = 1 - state.beta1 ** t
    correction2 = 1 - state.beta2 ** t
    updated = dict(params)
    for name, grad in grads.items():
        param = params[name]
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(param)
            v = np.zeros_like(param)
        m = state.beta1 * m + (1 - state.beta1) * grad
        v = state.beta2 * v + (1 - state.beta2) * grad * grad
        state.m[name], state.v[name] = m.astype(param.dtype), v.astype(param.dtype)
        m_hat = m / correction1
        v_hat = v / correction2
        updated[name] = (param - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(param.dtype)
    return updated, state
