"""Precomputed lookup table of the stabilised field, bilinear queries, and the WEPE file format.

File layout (all little-endian)::

    magic     4 bytes  b"WEPE"
    version   u32      1
    mode      u8       0 = pre-train encoder, 1 = fine-tuning surrogate
    res       u32      leading dimension of the stored array
    json_len  u32
    json      json_len bytes of UTF-8, {"config": ..., "shape": [R, C, K]}
    data      R*C*K binary32, row-major, channels interleaved
    crc       u32      CRC-32 of the data section

A LUT stores ``shape == [res, res, 4]`` with node ``(p, q)`` holding the field
at ``u = q/(res-1)``, ``v = p/(res-1)``.  The same container carries
arbitrary H x W x K fields written by ``encode --format bin``.
"""

from __future__ import annotations

import json
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .encoder import EncoderConfig, map_to_complex, stabilized_field
from .lattice import nearest_lattice_distance
from .surrogate import SurrogateConfig, ft_features, ft_map

MAGIC = b"WEPE"
VERSION = 1
MODES = {"pretrain": 0, "finetune": 1}
_MODE_NAMES = {v: k for k, v in MODES.items()}
_HEADER = struct.Struct("<4sIBII")
_CRC = struct.Struct("<I")

# snap tolerance (in node units) so that node coordinates like q/(R-1) hit the node exactly
_NODE_SNAP = 1e-9


class MalformedFile(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Lut:
    resolution: int
    config: EncoderConfig | SurrogateConfig
    data: np.ndarray  # (res, res, 4) float32

    @property
    def mode(self) -> str:
        return "finetune" if isinstance(self.config, SurrogateConfig) else "pretrain"

    @property
    def nbytes(self) -> int:
        return self.data.nbytes


def field_at(u, v, cfg: EncoderConfig | SurrogateConfig) -> np.ndarray:
    """Direct (non-LUT) stabilised field at ``(u, v)`` for either mode."""
    if isinstance(cfg, SurrogateConfig):
        return ft_features(u, v, cfg)
    return stabilized_field(u, v, cfg)


def build_lut(cfg: EncoderConfig | SurrogateConfig, res: int = 256, workers: int = 1) -> Lut:
    if res < 2:
        raise ValueError("LUT resolution must be >= 2")
    g = np.arange(res) / (res - 1)
    data = np.empty((res, res, 4), dtype=np.float32)
    rows_per_block = max(1, 8192 // res)
    blocks = [(s, min(s + rows_per_block, res)) for s in range(0, res, rows_per_block)]

    def fill(block):
        a, b = block
        vv, uu = np.meshgrid(g[a:b], g, indexing="ij")
        data[a:b] = field_at(uu, vv, cfg)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, blocks))
    else:
        for blk in blocks:
            fill(blk)
    data.setflags(write=False)
    return Lut(res, cfg, data)


def query_many(lut: Lut, u, v) -> np.ndarray:
    """Bilinear interpolation at arrays of ``(u, v)`` in [0, 1]; returns ``shape + (4,)``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if np.any((u < 0) | (u > 1) | (v < 0) | (v > 1)) or np.any(np.isnan(u) | np.isnan(v)):
        raise ValueError("LUT queries need u, v in [0, 1]")
    r = lut.resolution
    x = u * (r - 1)
    y = v * (r - 1)
    xr, yr = np.rint(x), np.rint(y)
    np.copyto(x, xr, where=np.abs(x - xr) < _NODE_SNAP)
    np.copyto(y, yr, where=np.abs(y - yr) < _NODE_SNAP)
    q = np.minimum(x.astype(np.intp), r - 2)
    p = np.minimum(y.astype(np.intp), r - 2)
    tx = (x - q)[..., None]
    ty = (y - p)[..., None]
    flat = lut.data.reshape(r * r, 4)
    k = p * r + q
    f00 = flat[k].astype(np.float64)
    f01 = flat[k + 1].astype(np.float64)
    f10 = flat[k + r].astype(np.float64)
    f11 = flat[k + r + 1].astype(np.float64)
    # weights are exactly 0 or 1 at a node (also on the clamped last row/column), so nodes come back bit-exact
    sx = 1.0 - tx
    return (1.0 - ty) * (sx * f00 + tx * f01) + ty * (sx * f10 + tx * f11)


def query_bilinear(lut: Lut, u: float, v: float) -> np.ndarray:
    return query_many(lut, np.array([u]), np.array([v]))[0]


@dataclass(frozen=True)
class ErrorScan:
    max_err: float
    mean_err: float
    max_err_channel: tuple[float, float, float, float]
    mean_err_channel: tuple[float, float, float, float]
    n_used: int
    resolution: int


def _distance_from_poles(u, v, cfg):
    if isinstance(cfg, SurrogateConfig):
        return np.abs(ft_map(u, v, cfg))
    return nearest_lattice_distance(map_to_complex(u, v, cfg), cfg.effective_lattice())


def safe_samples(cfg, n_samples: int, exclusion_radius: float, seed: int = 0):
    """Quasi-random ``(u, v)`` in the open unit square whose mapped ``z`` keeps clear of the poles."""
    pts = qmc.Halton(d=2, scramble=True, seed=seed).random(n_samples)
    u, v = pts[:, 0], pts[:, 1]
    keep = _distance_from_poles(u, v, cfg) >= exclusion_radius
    return u[keep], v[keep]


def error_scan(cfg, res: int, n_samples: int, exclusion_radius: float,
               seed: int = 0, lut: Lut | None = None) -> ErrorScan:
    """Max/mean |LUT - direct| over quasi-random samples away from the poles."""
    if n_samples < 100:
        raise ValueError("error_scan needs at least 100 samples")
    lut = lut if lut is not None else build_lut(cfg, res)
    u, v = safe_samples(cfg, n_samples, exclusion_radius, seed)
    if u.size == 0:
        raise ValueError("exclusion radius leaves no samples")
    err = np.abs(query_many(lut, u, v) - field_at(u, v, cfg))
    return ErrorScan(
        max_err=float(err.max()),
        mean_err=float(err.mean()),
        max_err_channel=tuple(float(x) for x in err.max(axis=0)),
        mean_err_channel=tuple(float(x) for x in err.mean(axis=0)),
        n_used=int(u.size),
        resolution=lut.resolution,
    )


# --- serialization ---------------------------------------------------------

def _snapshot(cfg, shape) -> bytes:
    doc = {"config": cfg.to_dict(), "shape": list(shape)}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def encode_container(data: np.ndarray, cfg) -> bytes:
    data = np.ascontiguousarray(data, dtype="<f4")
    if data.ndim != 3:
        raise ValueError("container data must be 3-D")
    mode = MODES["finetune" if isinstance(cfg, SurrogateConfig) else "pretrain"]
    blob = _snapshot(cfg, data.shape)
    payload = data.tobytes()
    head = _HEADER.pack(MAGIC, VERSION, mode, data.shape[0], len(blob))
    return head + blob + payload + _CRC.pack(zlib.crc32(payload))


def decode_container(buf: bytes):
    """Parse a container; returns ``(config, data)`` with ``data`` float32 of the stored shape."""
    if len(buf) < _HEADER.size:
        raise MalformedFile(f"file too short for header: {len(buf)} bytes")
    magic, version, mode, res, blen = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise MalformedFile(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise MalformedFile(f"unsupported version {version}")
    if mode not in _MODE_NAMES:
        raise MalformedFile(f"unknown mode byte {mode}")
    off = _HEADER.size
    if len(buf) < off + blen:
        raise MalformedFile("truncated config snapshot")
    try:
        doc = json.loads(buf[off:off + blen].decode("utf-8"))
        shape = tuple(int(s) for s in doc["shape"])
        cfg_dict = doc["config"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise MalformedFile(f"bad config snapshot: {exc}") from exc
    if len(shape) != 3 or shape[0] != res or min(shape) < 1:
        raise MalformedFile(f"shape {shape} inconsistent with header res={res}")
    off += blen
    expected = shape[0] * shape[1] * shape[2] * 4
    actual = len(buf) - off - _CRC.size
    if actual != expected:
        raise MalformedFile(f"data section has {max(actual, 0)} bytes, expected {expected}")
    payload = buf[off:off + expected]
    (crc,) = _CRC.unpack_from(buf, off + expected)
    if zlib.crc32(payload) != crc:
        raise MalformedFile("CRC-32 mismatch in data section")
    data = np.frombuffer(payload, dtype="<f4").reshape(shape)
    if not np.all(np.isfinite(data)):
        raise MalformedFile("non-finite values in data section")
    try:
        cfg = (SurrogateConfig if _MODE_NAMES[mode] == "finetune" else EncoderConfig).from_dict(cfg_dict)
    except (TypeError, ValueError) as exc:
        raise MalformedFile(f"bad config snapshot: {exc}") from exc
    return cfg, data


def write_lut(lut: Lut, path) -> int:
    buf = encode_container(lut.data, lut.config)
    Path(path).write_bytes(buf)
    return len(buf)


def read_lut(path) -> Lut:
    cfg, data = decode_container(Path(path).read_bytes())
    r = data.shape[0]
    if data.shape != (r, r, 4) or r < 2:
        raise MalformedFile(f"LUT must be Res x Res x 4 with Res >= 2, got {data.shape}")
    if np.any(np.abs(data) > 1.0):
        raise MalformedFile("LUT values outside [-1, 1]")
    data = data.astype(np.float32)
    data.setflags(write=False)
    return Lut(r, cfg, data)


def write_field(path, field: np.ndarray, cfg) -> int:
    buf = encode_container(field, cfg)
    Path(path).write_bytes(buf)
    return len(buf)


def read_field(path):
    return decode_container(Path(path).read_bytes())
