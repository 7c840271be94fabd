"""Binary formats for tensors and learned bases.

DT01 tensor layout (all little-endian)::

    b"DT01" | u32 order P | P x u64 dims | prod(dims) x f64 values

Values are written column-major (mode-1 index fastest).

Basis container layout::

    b"SSFB" | u32 version | u32 header length | UTF-8 JSON header |
    per block: u64 length | DT01 payload

The JSON header carries the type tag, scalar hyper-parameters and the
ordered block names.  Complex matrices are split into ``.re``/``.im``
blocks.
"""
import json
import struct
from pathlib import Path

import numpy as np

from .classical import EofBasis, FourierEofBasis
from .errors import (
    BadMagicError,
    DomainError,
    PayloadMismatchError,
    TruncatedError,
    TypeTagError,
)
from .ksvd import KsvdDictionary
from .tucker import TuckerBasis

__all__ = [
    "tensor_to_bytes",
    "tensor_from_bytes",
    "write_tensor",
    "read_tensor",
    "basis_to_bytes",
    "basis_from_bytes",
    "write_basis",
    "read_basis",
]

DT_MAGIC = b"DT01"
BASIS_MAGIC = b"SSFB"
BASIS_VERSION = 1


def tensor_to_bytes(t):
    t = np.asarray(t)
    if np.iscomplexobj(t):
        raise DomainError("DT01 stores real tensors only; split complex data first")
    t = t.astype("<f8", copy=False)
    dims = t.shape if t.ndim else (1,)
    head = DT_MAGIC + struct.pack("<I", len(dims)) + struct.pack(f"<{len(dims)}Q", *dims)
    return head + t.ravel(order="F").tobytes()


def tensor_from_bytes(buf):
    buf = bytes(buf)
    if len(buf) < 4 or buf[:4] != DT_MAGIC:
        raise BadMagicError("bad magic")
    if len(buf) < 8:
        raise TruncatedError("truncated header: missing order")
    (order,) = struct.unpack_from("<I", buf, 4)
    if order < 1:
        raise PayloadMismatchError("tensor order must be >= 1")
    end = 8 + 8 * order
    if len(buf) < end:
        raise TruncatedError("truncated header: missing dimensions")
    dims = struct.unpack_from(f"<{order}Q", buf, 8)
    if any(d < 1 for d in dims):
        raise PayloadMismatchError(f"non-positive dimension in {dims}")
    count = int(np.prod(dims, dtype=object))
    payload = len(buf) - end
    if payload != 8 * count:
        raise PayloadMismatchError(
            f"payload length mismatch: {dims} needs {count} values, found {payload / 8:g}"
        )
    data = np.frombuffer(buf, dtype="<f8", count=count, offset=end)
    return data.astype(np.float64).reshape(dims, order="F")


def write_tensor(path, t):
    Path(path).write_bytes(tensor_to_bytes(t))


def read_tensor(path):
    return tensor_from_bytes(Path(path).read_bytes())


def _split(name, arr):
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        return [(name + ".re", arr.real), (name + ".im", arr.imag)]
    return [(name, arr)]


def _encode(basis):
    if isinstance(basis, TuckerBasis):
        params = {"rank_deficient": bool(basis.rank_deficient)}
        blocks = [("b1", basis.b1), ("b2", basis.b2), ("b3", basis.b3)]
        blocks.append(("fit_trace", np.asarray(basis.fit_trace, dtype=np.float64)))
        mean = basis.mean_field
    elif isinstance(basis, EofBasis):
        params = {}
        blocks = [("factors", basis.factors), ("eigenvalues", basis.eigenvalues)]
        mean = basis.mean
    elif isinstance(basis, FourierEofBasis):
        params = {"lx": basis.lx, "ly": basis.ly}
        blocks = _split("f1", basis.f1) + _split("f2", basis.f2) + [("eof", basis.eof)]
        mean = basis.mean_field
    elif isinstance(basis, KsvdDictionary):
        params = {"sparsity": int(basis.sparsity), "seed": basis.seed}
        blocks = [
            ("atoms", basis.atoms),
            ("train_objective", np.asarray(basis.train_objective, dtype=np.float64)),
        ]
        mean = None
    else:
        raise TypeTagError(f"cannot serialize {type(basis).__name__}")
    if mean is not None:
        blocks.append(("mean", mean))
    return type(basis).__name__, params, blocks


def basis_to_bytes(basis):
    tag, params, blocks = _encode(basis)
    header = {
        "type": tag,
        "params": params,
        "blocks": [name for name, _ in blocks],
    }
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    out = [BASIS_MAGIC, struct.pack("<II", BASIS_VERSION, len(hbytes)), hbytes]
    for _, arr in blocks:
        arr = np.asarray(arr, dtype=np.float64)
        if arr.size == 0:
            arr = arr.reshape(0)
        payload = _empty_vector_bytes() if arr.size == 0 else tensor_to_bytes(arr)
        out.append(struct.pack("<Q", len(payload)))
        out.append(payload)
    return b"".join(out)


def _empty_vector_bytes():
    # DT01 cannot hold zero-length tensors; an empty trace is just the magic
    return DT_MAGIC


def _decode_block(payload):
    if payload == DT_MAGIC:
        return np.zeros(0)
    return tensor_from_bytes(payload)


def basis_from_bytes(buf, expected=None):
    buf = bytes(buf)
    if len(buf) < 4 or buf[:4] != BASIS_MAGIC:
        raise BadMagicError("bad magic")
    if len(buf) < 12:
        raise TruncatedError("truncated basis header")
    version, hlen = struct.unpack_from("<II", buf, 4)
    if version != BASIS_VERSION:
        raise TypeTagError(f"unsupported basis container version {version}")
    if len(buf) < 12 + hlen:
        raise TruncatedError("truncated basis header")
    try:
        header = json.loads(buf[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TypeTagError(f"unreadable basis header: {exc}") from exc
    tag = header.get("type")
    if expected is not None:
        want = expected if isinstance(expected, str) else expected.__name__
        if tag != want:
            raise TypeTagError(f"file holds a {tag}, expected {want}")
    pos = 12 + hlen
    blocks = {}
    for name in header.get("blocks", []):
        if len(buf) < pos + 8:
            raise TruncatedError(f"truncated before block {name!r}")
        (n,) = struct.unpack_from("<Q", buf, pos)
        pos += 8
        if len(buf) < pos + n:
            raise TruncatedError(f"truncated inside block {name!r}")
        blocks[name] = _decode_block(buf[pos : pos + n])
        pos += n
    if pos != len(buf):
        raise PayloadMismatchError("payload length mismatch: trailing bytes after last block")
    return _build(tag, header.get("params", {}), blocks)


def _complex(blocks, name):
    re, im = blocks[name + ".re"], blocks[name + ".im"]
    out = np.empty(re.shape, dtype=np.complex128)
    out.real = re
    out.imag = im
    return out


def _build(tag, params, blocks):
    mean = blocks.get("mean")
    try:
        if tag == "TuckerBasis":
            return TuckerBasis(
                blocks["b1"],
                blocks["b2"],
                blocks["b3"],
                mean_field=mean,
                fit_trace=blocks["fit_trace"].tolist(),
                rank_deficient=bool(params.get("rank_deficient", False)),
            )
        if tag == "EofBasis":
            return EofBasis(blocks["factors"], blocks["eigenvalues"], mean)
        if tag == "FourierEofBasis":
            return FourierEofBasis(
                f1=_complex(blocks, "f1"),
                f2=_complex(blocks, "f2"),
                eof=blocks["eof"],
                lx=float(params["lx"]),
                ly=float(params["ly"]),
                mean_field=mean,
            )
        if tag == "KsvdDictionary":
            return KsvdDictionary(
                atoms=blocks["atoms"],
                sparsity=int(params["sparsity"]),
                train_objective=blocks["train_objective"].tolist(),
                seed=params.get("seed"),
            )
    except KeyError as exc:
        raise PayloadMismatchError(f"{tag} container is missing {exc}") from exc
    raise TypeTagError(f"unknown basis type tag {tag!r}")


def write_basis(path, basis):
    Path(path).write_bytes(basis_to_bytes(basis))


def read_basis(path, expected=None):
    return basis_from_bytes(Path(path).read_bytes(), expected)
