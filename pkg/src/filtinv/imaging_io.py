"""Test assets and file formats.

* Signals: CSV, one real per line.
* Filters: JSON ``{"coefficients": [c(-N) ... c(N)]}`` or ``{"half": [c(0) ... c(N)]}``.
* 2D kernels: JSON ``{"matrix": [[...], ...]}``.
* Images: binary (P5) or ASCII (P2) PGM, ``maxval <= 65535``.

Floats are written with 17 significant digits so every writer is
byte-deterministic and reads back bit-exactly.

Noise uses numpy's PCG64 generator (64-bit state, stable stream across
platforms) feeding a Box-Muller transform, so a given seed yields the same
samples everywhere.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .charpoly import Filter
from .elementary import InverseFilter
from .exceptions import InputError
from .separable2d import Kernel2D
from .signal import Image, Sequence


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise InputError(f"noise sigma must be finite and >= 0, got {self.sigma}")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError(f"seed must fit in 64 bits, got {self.seed}")


def checkerboard(width: int, height: int, tile: int) -> Image:
    """Alternating 0/1 blocks of ``tile x tile`` pixels, pixel (0, 0) = 0."""
    if width < 1 or height < 1:
        raise InputError(f"image dimensions must be positive, got {width}x{height}")
    if tile < 1:
        raise InputError(f"tile must be >= 1, got {tile}")
    r = np.arange(height)[:, None] // tile
    c = np.arange(width)[None, :] // tile
    return Image(((r + c) % 2).astype(float))


def gaussian_samples(shape, seed: int) -> np.ndarray:
    """Standard normal samples by Box-Muller over PCG64 uniforms."""
    n = int(np.prod(shape))
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    pairs = (n + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]: keeps log finite
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:n].reshape(shape)


def add_gaussian_noise(img: Image, spec: NoiseSpec) -> Image:
    if spec.sigma == 0:
        return img
    return Image(img.pixels + spec.sigma * gaussian_samples(img.shape, spec.seed))


def gaussian_filter(sigma: float, radius: int) -> Filter:
    """Sampled ``exp(-k**2 / (2 sigma**2))`` for ``|k| <= radius`` (not normalized)."""
    k = np.arange(-radius, radius + 1)
    return Filter(np.exp(-(k**2) / (2.0 * sigma**2)))


# --- number formatting -------------------------------------------------------

def format_float(v: float) -> str:
    v = float(v)
    if not math.isfinite(v):
        raise InputError(f"cannot serialize non-finite value {v}")
    return format(v, ".17g")


def _dump(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_dump(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _dump(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, np.ndarray):
        return _dump(obj.tolist(), indent, level)
    return json.dumps(str(obj))


def dumps_json(obj, indent: int = 2) -> str:
    """JSON with every float written to 17 significant digits."""
    return _dump(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path}: {exc}") from exc


# --- signals -----------------------------------------------------------------

def write_signal_csv(path, x) -> None:
    values = x.values if isinstance(x, Sequence) else np.asarray(x, dtype=float)
    Path(path).write_text("".join(format_float(v) + "\n" for v in values), encoding="utf-8")


def read_signal_csv(path, origin: int = 0) -> Sequence:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read signal from {path}: {exc}") from exc
    values = []
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line.split(",")[0]))
        except ValueError:
            raise InputError(f"{path}:{n}: not a number: {line!r}") from None
    if not values:
        raise InputError(f"{path}: empty signal")
    return Sequence(values, origin=origin)


# --- filters and kernels -------------------------------------------------------

def filter_from_obj(obj) -> Filter:
    if isinstance(obj, list):
        return Filter(obj)
    if not isinstance(obj, dict):
        raise InputError("filter JSON must be an object or a list")
    if "coefficients" in obj:
        return Filter(obj["coefficients"])
    if "half" in obj:
        return Filter.from_half(obj["half"])
    raise InputError('filter JSON needs a "coefficients" or "half" key')


def read_filter(path) -> Filter:
    return filter_from_obj(read_json(path))


def filter_to_obj(f: Filter) -> dict:
    return {"coefficients": [float(c) for c in f.coeffs]}


def write_filter(path, f: Filter) -> None:
    write_json(path, filter_to_obj(f))


def inverse_to_obj(inv: InverseFilter) -> dict:
    params = []
    for p in inv.params:
        p = complex(p)
        params.append([p.real, p.imag] if p.imag else p.real)
    return {
        "coefficients": [float(v) for v in inv.z.values],
        "metadata": {
            "pseudo": inv.pseudo,
            "truncationBound": inv.truncation_bound,
            "p": params,
        },
    }


def write_inverse(path, inv: InverseFilter) -> None:
    write_json(path, inverse_to_obj(inv))


def read_kernel(path) -> Kernel2D:
    obj = read_json(path)
    if isinstance(obj, dict) and "matrix" in obj:
        return Kernel2D(obj["matrix"])
    if isinstance(obj, list):
        return Kernel2D(obj)
    raise InputError('2D kernel JSON needs a "matrix" key')


def write_kernel(path, k: Kernel2D) -> None:
    write_json(path, {"matrix": k.matrix.tolist()})


# --- PGM ---------------------------------------------------------------------

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header_tokens(data: bytes, count: int):
    tokens, pos = [], 0
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise InputError("malformed PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens, pos


def read_pgm(path) -> Image:
    """Read a P2/P5 PGM, mapping ``[0, maxval]`` linearly onto ``[0, 1]``."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    tokens, pos = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise InputError(f"{path}: not a P2/P5 PGM (magic {magic!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise InputError(f"{path}: malformed PGM header") from None
    if width < 1 or height < 1:
        raise InputError(f"{path}: bad dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise InputError(f"{path}: maxval {maxval} outside [1, 65535]")
    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        raster = data[pos + 1 :]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(raster) < n * dtype.itemsize:
            raise InputError(f"{path}: truncated payload")
        values = np.frombuffer(raster, dtype=dtype, count=n).astype(float)
    else:
        fields = data[pos:].split()
        if len(fields) < n:
            raise InputError(f"{path}: truncated payload")
        try:
            values = np.array([int(v) for v in fields[:n]], dtype=float)
        except ValueError:
            raise InputError(f"{path}: non-integer sample in payload") from None
    if np.any(values > maxval):
        raise InputError(f"{path}: sample exceeds maxval {maxval}")
    return Image((values / maxval).reshape(height, width))


def quantize(img, maxval: int = 255) -> np.ndarray:
    """Map ``[0, 1]`` onto integers ``[0, maxval]``, rounding half away from zero."""
    pixels = img.pixels if isinstance(img, Image) else np.asarray(img, dtype=float)
    scaled = np.clip(pixels, 0.0, 1.0) * maxval
    return np.floor(scaled + 0.5).astype(np.int64)


def write_pgm(path, img, maxval: int = 255, binary: bool = True) -> None:
    if not 1 <= maxval <= 65535:
        raise InputError(f"maxval {maxval} outside [1, 65535]")
    q = quantize(img, maxval)
    h, w = q.shape
    header = f"{'P5' if binary else 'P2'}\n{w} {h}\n{maxval}\n".encode("ascii")
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        payload = q.astype(dtype).tobytes()
    else:
        payload = "".join(" ".join(str(v) for v in row) + "\n" for row in q).encode("ascii")
    Path(path).write_bytes(header + payload)
