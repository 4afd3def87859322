"""
Checkpoint files

    b"LBCK"  version:u8  step:u32  lr, beta1, beta2, eps:f64
    arch_len:u32  arch JSON (utf-8)
    count:u32, then per tensor:
        name_len:u16  name  ndim:u8  dims:u32 * ndim  float32 LE data

Optimizer moments are stored as tensors named adam.m.<param> / adam.v.<param>.
"""

import hashlib
import logging
import struct

import numpy as np

from ndcompute import AdamState
from utils.errors import CheckpointError
from .model import ArchSpec, ModelParams, param_shapes

logger = logging.getLogger(__name__)

MAGIC = b'LBCK'
VERSION = 1
_HEADER = struct.Struct('<4sBI4d')
_U32 = struct.Struct('<I')
_U16 = struct.Struct('<H')
_LE_FLOAT32 = np.dtype('<f4')


def _pack_tensor(name, value):
    encoded = name.encode('utf-8')
    parts = [_U16.pack(len(encoded)), encoded, bytes([value.ndim])]
    parts += [_U32.pack(d) for d in value.shape]
    parts.append(np.ascontiguousarray(value, dtype=_LE_FLOAT32).tobytes())
    return b''.join(parts)


def save_checkpoint(path, params, state=None):
    state = state or AdamState()
    tensors = dict(params.tensors)
    for name in params.tensors:
        if name in state.m:
            tensors[f"adam.m.{name}"] = state.m[name]
            tensors[f"adam.v.{name}"] = state.v[name]
    arch = params.arch.to_json().encode('utf-8')

    blob = [
        _HEADER.pack(MAGIC, VERSION, state.step, state.lr, state.beta1, state.beta2, state.eps),
        _U32.pack(len(arch)), arch, _U32.pack(len(tensors)),
    ]
    blob += [_pack_tensor(name, value) for name, value in tensors.items()]
    try:
        with open(path, 'wb') as fh:
            fh.write(b''.join(blob))
    except OSError as e:
        raise CheckpointError(f"cannot write checkpoint {path}: {e}") from e
    logger.info(f"Saved checkpoint {path} ({len(params.tensors)} tensors, step {state.step})")
    return fingerprint(path)


class _Reader:
    def __init__(self, blob, path):
        self.blob, self.path, self.offset = blob, path, 0

    def take(self, size):
        if self.offset + size > len(self.blob):
            raise CheckpointError(f"{self.path}: truncated at byte {self.offset}")
        chunk = self.blob[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, layout):
        return layout.unpack(self.take(layout.size))


def load_checkpoint(path, expected_arch=None):
    """Returns (ModelParams, AdamState); `expected_arch` rejects other architectures"""
    try:
        with open(path, 'rb') as fh:
            reader = _Reader(fh.read(), path)
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e

    magic, version, step, lr, beta1, beta2, eps = reader.unpack(_HEADER)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (magic {magic!r})")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    (arch_len,) = reader.unpack(_U32)
    try:
        arch = ArchSpec.from_json(reader.take(arch_len).decode('utf-8'))
    except (ValueError, TypeError, KeyError) as e:
        raise CheckpointError(f"{path}: unreadable architecture record: {e}") from e
    if expected_arch is not None and arch != expected_arch:
        raise CheckpointError(f"{path}: checkpoint architecture {arch} does not match configured {expected_arch}")

    (count,) = reader.unpack(_U32)
    tensors = {}
    for _ in range(count):
        (name_len,) = reader.unpack(_U16)
        name = reader.take(name_len).decode('utf-8')
        ndim = reader.take(1)[0]
        shape = tuple(reader.unpack(_U32)[0] for _ in range(ndim))
        size = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(reader.take(size * 4), dtype=_LE_FLOAT32).astype(np.float32)
        tensors[name] = data.reshape(shape)
    if reader.offset != len(reader.blob):
        raise CheckpointError(f"{path}: {len(reader.blob) - reader.offset} trailing bytes")

    expected = param_shapes(arch)
    for name, shape in expected.items():
        if name not in tensors:
            raise CheckpointError(f"{path}: missing tensor {name}")
        if tensors[name].shape != shape:
            raise CheckpointError(f"{path}: tensor {name} has shape {tensors[name].shape}, expected {shape}")

    state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps, step=step)
    for name in expected:
        if f"adam.m.{name}" in tensors:
            state.m[name] = tensors.pop(f"adam.m.{name}")
            state.v[name] = tensors.pop(f"adam.v.{name}")
    params = ModelParams(arch, {name: tensors[name] for name in expected})
    return params, state


def fingerprint(path):
    """SHA-256 of the checkpoint file"""
    digest = hashlib.sha256()
    try:
        with open(path, 'rb') as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b''):
                digest.update(chunk)
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    return digest.hexdigest()
