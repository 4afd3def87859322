"""
Embedding network shared by both siamese branches

    input B x 1 x T x H x W
    3 x [conv3d -> relu -> maxpool (1,2,2)]        channels 32 / 64 / 96
    flatten to T x B x (C*H*W)
    bi-GRU (hidden 128) -> bi-GRU (hidden 64)
    temporal [mean, max] -> affine -> row L2 normalization

A scale factor shrinks channels and hidden sizes for desk-sized runs; at
scale 1 with 50 x 100 x 50 inputs the recurrent input width is 96*6*3 = 1728.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Tuple

import numpy as np

from ndcompute import (
    TRAIN_DTYPE, affine, affine_backward, bigru_layer, bigru_layer_backward, conv3d,
    conv3d_backward, gru_param_shapes, l2_normalize, l2_normalize_backward, maxpool3d,
    maxpool3d_backward, relu, relu_backward, temporal_avgmax, temporal_avgmax_backward,
)
from ndcompute.tensor import out_extent
from utils.errors import InvalidShapeError, LipAuthError

logger = logging.getLogger(__name__)

BASE_CHANNELS = (32, 64, 96)
BASE_HIDDEN = (128, 64)
POOL = (1, 2, 2)

# (kernel, stride, pad) per conv block
CONV_GEOMETRY = (
    ((3, 5, 5), (1, 2, 2), (1, 2, 2)),
    ((3, 5, 5), (1, 1, 1), (1, 2, 2)),
    ((3, 3, 3), (1, 1, 1), (1, 1, 1)),
)


def _scaled(size, scale):
    return max(1, int(round(size * scale)))


@dataclass(frozen=True)
class ArchSpec:
    t: int = 50
    h: int = 100
    w: int = 50
    channels: Tuple[int, int, int] = BASE_CHANNELS
    hidden: Tuple[int, int] = BASE_HIDDEN
    embed_dim: int = 256

    @classmethod
    def from_config(cls, config):
        return cls(
            t=config.t, h=config.h, w=config.w,
            channels=tuple(_scaled(c, config.scale) for c in BASE_CHANNELS),
            hidden=tuple(_scaled(h, config.scale) for h in BASE_HIDDEN),
            embed_dim=config.embed_dim,
        )

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        data['channels'] = tuple(data['channels'])
        data['hidden'] = tuple(data['hidden'])
        return cls(**data)


def shape_chain(arch):
    """Per-layer output shapes with batch shown as -1"""
    chain = [('input', (-1, 1, arch.t, arch.h, arch.w))]
    extents = (arch.t, arch.h, arch.w)
    for block, (channels, (kernel, stride, pad)) in enumerate(zip(arch.channels, CONV_GEOMETRY), start=1):
        extents = tuple(out_extent(n, k, s, p) for n, k, s, p in zip(extents, kernel, stride, pad))
        if min(extents) < 1:
            raise InvalidShapeError(f"conv{block}: input too small for kernel {kernel}")
        chain.append((f"conv{block}", (-1, channels, *extents)))
        if any(w > n for n, w in zip(extents, POOL)):
            raise InvalidShapeError(f"pool{block}: window {POOL} larger than {extents}")
        extents = tuple(out_extent(n, w, w) for n, w in zip(extents, POOL))
        chain.append((f"pool{block}", (-1, channels, *extents)))
    t, h, w = extents
    chain.append(('flatten', (t, -1, arch.channels[-1] * h * w)))
    chain.append(('gru1', (t, -1, 2 * arch.hidden[0])))
    chain.append(('gru2', (t, -1, 2 * arch.hidden[1])))
    chain.append(('avgmax', (-1, 4 * arch.hidden[1])))
    chain.append(('head', (-1, arch.embed_dim)))
    return chain


def param_shapes(arch):
    """Ordered name -> shape for every trainable tensor"""
    shapes = {}
    c_in = 1
    for block, (c_out, (kernel, _, _)) in enumerate(zip(arch.channels, CONV_GEOMETRY), start=1):
        shapes[f"conv{block}.kernel"] = (c_out, c_in, *kernel)
        shapes[f"conv{block}.bias"] = (c_out,)
        c_in = c_out
    features = dict(shape_chain(arch))['flatten'][2]
    for layer, hidden in enumerate(arch.hidden, start=1):
        for direction in ('fwd', 'bwd'):
            for name, shape in gru_param_shapes(features, hidden).items():
                shapes[f"gru{layer}.{direction}.{name}"] = shape
        features = 2 * hidden
    shapes['head.weight'] = (2 * features, arch.embed_dim)
    shapes['head.bias'] = (arch.embed_dim,)
    return shapes


@dataclass
class ModelParams:
    arch: ArchSpec
    tensors: Dict[str, np.ndarray] = field(default_factory=dict)

    def astype(self, dtype):
        return ModelParams(self.arch, {k: v.astype(dtype) for k, v in self.tensors.items()})

    def bigru(self, layer):
        prefix = f"gru{layer}."
        return {
            direction: {
                name: self.tensors[f"{prefix}{direction}.{name}"] for name in ('w_x', 'w_h', 'b_x', 'b_h')
            }
            for direction in ('fwd', 'bwd')
        }

    def count(self):
        return int(sum(v.size for v in self.tensors.values()))


def init_bound(name, shape):
    """Half-width s of the uniform(-s, s) initializer; biases start at zero"""
    if name.endswith('bias') or name.split('.')[-1] in ('b_x', 'b_h'):
        return 0.0
    if name.startswith('gru'):
        return math.sqrt(1.0 / (shape[1] // 3))
    if name.startswith('conv'):
        return math.sqrt(1.0 / int(np.prod(shape[1:])))
    return math.sqrt(1.0 / shape[0])


def init_params(arch, seed=0, dtype=TRAIN_DTYPE):
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in param_shapes(arch).items():
        bound = init_bound(name, shape)
        if bound == 0.0:
            tensors[name] = np.zeros(shape, dtype=dtype)
        else:
            tensors[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
    params = ModelParams(arch, tensors)
    logger.debug(f"Initialized {params.count()} parameters with seed {seed}")
    return params


def _layer(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InvalidShapeError as e:
        raise InvalidShapeError(f"layer {name}: {e}") from e


def embed(x, params):
    """B x 1 x T x H x W -> (B x E unit rows, cache)"""
    arch = params.arch
    expected = (1, arch.t, arch.h, arch.w)
    if x.ndim != 5 or tuple(x.shape[1:]) != expected:
        raise InvalidShapeError(f"layer input: expected B x {' x '.join(map(str, expected))}, got {x.shape}")
    p = params.tensors
    caches = []
    a = x
    for block, (_, stride, pad) in enumerate(CONV_GEOMETRY, start=1):
        a, conv_cache = _layer(f"conv{block}", conv3d, a, p[f"conv{block}.kernel"], p[f"conv{block}.bias"],
                               stride=stride, pad=pad)
        a, relu_cache = relu(a)
        a, pool_cache = _layer(f"pool{block}", maxpool3d, a, POOL)
        caches.append((conv_cache, relu_cache, pool_cache))

    conv_shape = a.shape
    B, C, T, H, W = conv_shape
    seq = np.ascontiguousarray(a.transpose(2, 0, 1, 3, 4)).reshape(T, B, C * H * W)
    seq, gru1_cache = _layer('gru1', bigru_layer, seq, params.bigru(1))
    seq, gru2_cache = _layer('gru2', bigru_layer, seq, params.bigru(2))
    pooled, avgmax_cache = _layer('avgmax', temporal_avgmax, seq)
    head, head_cache = _layer('head', affine, pooled, p['head.weight'], p['head.bias'])
    z, norm_cache = l2_normalize(head)
    cache = (caches, conv_shape, gru1_cache, gru2_cache, avgmax_cache, head_cache, norm_cache)
    return z, cache


def embed_backward(dz, cache):
    """Gradients of every parameter tensor, keyed like ModelParams.tensors"""
    caches, conv_shape, gru1_cache, gru2_cache, avgmax_cache, head_cache, norm_cache = cache
    grads = {}
    dhead = l2_normalize_backward(dz, norm_cache)
    dpooled, grads['head.weight'], grads['head.bias'] = affine_backward(dhead, head_cache)
    dseq = temporal_avgmax_backward(dpooled, avgmax_cache)
    for layer, layer_cache in ((2, gru2_cache), (1, gru1_cache)):
        dseq, layer_grads = bigru_layer_backward(dseq, layer_cache)
        for direction, named in layer_grads.items():
            for name, grad in named.items():
                grads[f"gru{layer}.{direction}.{name}"] = grad

    B, C, T, H, W = conv_shape
    da = dseq.reshape(T, B, C, H, W).transpose(1, 2, 0, 3, 4)
    for block in range(len(caches), 0, -1):
        conv_cache, relu_cache, pool_cache = caches[block - 1]
        da = maxpool3d_backward(da, pool_cache)
        da = relu_backward(da, relu_cache)
        da, grads[f"conv{block}.kernel"], grads[f"conv{block}.bias"] = conv3d_backward(da, conv_cache)
    return grads


def cosine_score(z1, z2):
    """Row-wise cosine of unit embeddings"""
    if z1.shape != z2.shape:
        raise LipAuthError(f"cannot score embeddings of shapes {z1.shape} and {z2.shape}")
    return np.sum(z1 * z2, axis=-1)
