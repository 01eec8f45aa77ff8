"""Bit-exact reading and writing of 2-D matrices and 3-D tensors.

Two on-disk formats are supported:

* Native ("GAK1"): magic bytes ``GAK1``, rank as u8 (2 or 3), element kind
  as u8 (0 = float32, 1 = float64), the shape as little-endian u64 values,
  then the raw little-endian row-major payload. Trivially parseable from
  any language.
* NPY v1.0, restricted to C-order little-endian ``<f4``/``<f8`` arrays of
  rank 2 or 3. Anything else (Fortran order, other dtypes, v2/v3 headers)
  raises :class:`~gak.errors.UnsupportedFormat`.

The format of a file is detected from its magic bytes on load. On store,
paths ending in ``.npy`` get the NPY format, everything else the native
format. Round-trips are bit-exact in both formats; NaN/Inf payloads are
accepted (some saliency floors are large-negative sentinels) but flagged
by :func:`validation_report`.
"""

from __future__ import annotations

import ast
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    FormatError,
    IoError,
    TruncationError,
    UnsupportedFormat,
    UnsupportedRank,
)

_GAK_MAGIC = b"GAK1"
_NPY_MAGIC = b"\x93NUMPY"

_KIND_TO_DTYPE = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_TO_KIND = {np.dtype("<f4"): 0, np.dtype("<f8"): 1}


@dataclass
class ValidationReport:
    """Post-load payload diagnostics. Non-finite values are legal but flagged."""

    n_nan: int
    n_inf: int

    @property
    def clean(self) -> bool:
        return self.n_nan == 0 and self.n_inf == 0


def validation_report(array: np.ndarray) -> ValidationReport:
    return ValidationReport(
        n_nan=int(np.isnan(array).sum()),
        n_inf=int(np.isinf(array).sum()),
    )


def _check_shape(shape: tuple[int, ...]) -> None:
    if len(shape) not in (2, 3):
        raise UnsupportedRank(f"rank {len(shape)} not in {{2, 3}}")
    if any(d <= 0 for d in shape):
        raise FormatError(f"non-positive dimension in shape {shape}")


def _coerce_dtype(array: np.ndarray) -> np.ndarray:
    dt = array.dtype.newbyteorder("<")
    if dt not in _DTYPE_TO_KIND:
        raise UnsupportedFormat(f"dtype {array.dtype} not storable; use float32/float64")
    return np.ascontiguousarray(array, dtype=dt)


def load_array(path: str | Path) -> np.ndarray:
    """Loads a 2-D or 3-D float array, detecting the format from magic bytes.

    Returns the stored values bit-exactly as a C-contiguous little-endian
    float32 or float64 ndarray.

    Raises:
        IoError: path unreadable.
        FormatError: malformed header or empty dimension.
        UnsupportedRank: rank outside {2, 3}.
        UnsupportedFormat: unknown magic, dtype, order, or format version.
        TruncationError: payload shorter than the header promises.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    if blob.startswith(_GAK_MAGIC):
        return _parse_gak(blob, path)
    if blob.startswith(_NPY_MAGIC):
        return _parse_npy(blob, path)
    raise UnsupportedFormat(f"{path}: unknown magic bytes {blob[:6]!r}")


def store_array(array: np.ndarray, path: str | Path) -> None:
    """Stores an array so that :func:`load_array` recovers it bit-exactly.

    ``.npy`` paths get the NPY v1.0 format, all others the native format.
    Storing the same array twice yields byte-identical files.

    Raises:
        FormatError / UnsupportedRank / UnsupportedFormat: invalid array.
        IoError: unwritable path.
    """
    array = np.asarray(array)
    _check_shape(array.shape)
    array = _coerce_dtype(array)
    path = Path(path)
    if path.suffix == ".npy":
        blob = _encode_npy(array)
    else:
        blob = _encode_gak(array)
    try:
        path.write_bytes(blob)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# --- native format ---


def _encode_gak(array: np.ndarray) -> bytes:
    kind = _DTYPE_TO_KIND[array.dtype]
    head = _GAK_MAGIC + struct.pack("<BB", array.ndim, kind)
    head += struct.pack(f"<{array.ndim}Q", *array.shape)
    return head + array.tobytes(order="C")


def _parse_gak(blob: bytes, path: Path) -> np.ndarray:
    if len(blob) < 6:
        raise TruncationError(f"{path}: header truncated")
    rank, kind = struct.unpack_from("<BB", blob, 4)
    if rank not in (2, 3):
        raise UnsupportedRank(f"{path}: rank {rank} not in {{2, 3}}")
    if kind not in _KIND_TO_DTYPE:
        raise FormatError(f"{path}: unknown element kind {kind}")
    shape_end = 6 + 8 * rank
    if len(blob) < shape_end:
        raise TruncationError(f"{path}: shape truncated")
    shape = struct.unpack_from(f"<{rank}Q", blob, 6)
    if any(d == 0 for d in shape):
        raise FormatError(f"{path}: non-positive dimension in shape {shape}")
    dtype = _KIND_TO_DTYPE[kind]
    n_bytes = int(np.prod(shape)) * dtype.itemsize
    payload = blob[shape_end:]
    if len(payload) < n_bytes:
        raise TruncationError(f"{path}: payload has {len(payload)} of {n_bytes} bytes")
    if len(payload) > n_bytes:
        raise FormatError(f"{path}: {len(payload) - n_bytes} trailing bytes after payload")
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


# --- NPY v1.0 ---


def _encode_npy(array: np.ndarray) -> bytes:
    descr = "<f4" if array.dtype == np.dtype("<f4") else "<f8"
    shape_repr = "(" + ", ".join(str(d) for d in array.shape) + ")"
    header = f"{{'descr': '{descr}', 'fortran_order': False, 'shape': {shape_repr}, }}"
    # Pad with spaces so magic + version + length field + header is 64-aligned,
    # with a final newline, matching the reference v1.0 layout.
    base = len(_NPY_MAGIC) + 2 + 2
    pad = 64 - (base + len(header) + 1) % 64
    header = header + " " * pad + "\n"
    out = _NPY_MAGIC + bytes([1, 0]) + struct.pack("<H", len(header))
    return out + header.encode("latin1") + array.tobytes(order="C")


def _parse_npy(blob: bytes, path: Path) -> np.ndarray:
    if len(blob) < 10:
        raise TruncationError(f"{path}: header truncated")
    major, minor = blob[6], blob[7]
    if (major, minor) != (1, 0):
        raise UnsupportedFormat(f"{path}: NPY version {major}.{minor}, only 1.0 accepted")
    (header_len,) = struct.unpack_from("<H", blob, 8)
    header_end = 10 + header_len
    if len(blob) < header_end:
        raise TruncationError(f"{path}: header truncated")
    try:
        header = ast.literal_eval(blob[10:header_end].decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"{path}: unparseable NPY header") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError(f"{path}: unexpected NPY header keys")
    if header["fortran_order"]:
        raise UnsupportedFormat(f"{path}: Fortran order not accepted")
    if header["descr"] not in ("<f4", "<f8"):
        raise UnsupportedFormat(f"{path}: dtype {header['descr']!r} not accepted")
    shape = tuple(header["shape"])
    if len(shape) not in (2, 3):
        raise UnsupportedRank(f"{path}: rank {len(shape)} not in {{2, 3}}")
    if any(d <= 0 for d in shape):
        raise FormatError(f"{path}: non-positive dimension in shape {shape}")
    dtype = np.dtype(header["descr"])
    n_bytes = int(np.prod(shape)) * dtype.itemsize
    payload = blob[header_end:]
    if len(payload) < n_bytes:
        raise TruncationError(f"{path}: payload has {len(payload)} of {n_bytes} bytes")
    return np.frombuffer(payload[:n_bytes], dtype=dtype).reshape(shape).copy()
