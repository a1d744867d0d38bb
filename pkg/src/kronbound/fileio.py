"""Plain-text formats for tensors, matrices, box tensors and decompositions.

Tensor::

    tensor <domain> <d1> ... <dk>
    i1 ... ik <scalar>          (nonzero entries, lexicographic order)

Matrix::

    matrix <rows> <cols>
    <row of scalars>
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .boxparam import read_boxtensor, write_boxtensor
from .decomp import read_decomposition, write_decomposition
from .errors import DimensionMismatch
from .scalar import DOMAINS, QQ, RR, format_scalar, parse_scalar
from .tensor import Tensor

__all__ = [
    "write_tensor",
    "read_tensor",
    "write_matrix",
    "read_matrix",
    "write_boxtensor",
    "read_boxtensor",
    "write_decomposition",
    "read_decomposition",
    "load_text",
]


def write_tensor(T: Tensor) -> str:
    lines = [f"tensor {T.domain} " + " ".join(str(d) for d in T.dims)]
    for idx, v in T.nonzero():
        lines.append(" ".join(str(i) for i in idx) + " " + format_scalar(v))
    return "\n".join(lines) + "\n"


def read_tensor(text: str) -> Tensor:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0][0] != "tensor":
        raise ValueError("tensor file must start with 'tensor <domain> <dims...>'")
    domain = lines[0][1]
    if domain not in DOMAINS:
        raise ValueError(f"unknown domain {domain!r}")
    dims = tuple(int(x) for x in lines[0][2:])
    k = len(dims)
    items = []
    for parts in lines[1:]:
        if len(parts) != k + 1:
            raise DimensionMismatch(f"entry line {' '.join(parts)!r} needs {k} indices and a value")
        idx = tuple(int(x) for x in parts[:k])
        if any(not 0 <= i < d for i, d in zip(idx, dims)):
            raise DimensionMismatch(f"index {idx} out of range for dims {dims}")
        items.append((idx, parse_scalar(parts[k], domain)))
    if domain == RR:
        arr = np.zeros(dims)
        for idx, v in items:
            arr[idx] += v
        return Tensor(arr, RR)
    return Tensor.from_entries(dims, items, domain)


def write_matrix(M) -> str:
    a = np.asarray(M)
    lines = [f"matrix {a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(format_scalar(x.item() if hasattr(x, "item") else x) for x in row))
    return "\n".join(lines) + "\n"


def read_matrix(text: str, domain: str | None = None) -> np.ndarray:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0][0] != "matrix":
        raise ValueError("matrix file must start with 'matrix <rows> <cols>'")
    r, c = int(lines[0][1]), int(lines[0][2])
    if len(lines) - 1 != r or any(len(row) != c for row in lines[1:]):
        raise DimensionMismatch(f"expected {r} rows of {c} entries")
    vals = [parse_scalar(x, domain) for row in lines[1:] for x in row]
    if all(isinstance(v, int) for v in vals):
        return np.array(vals, dtype=np.int64).reshape(r, c)
    out = np.empty((r, c), dtype=object)
    out.reshape(-1)[:] = vals
    return out


def load_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def tensor_from_file(path) -> Tensor:
    return read_tensor(load_text(path))


def matrix_from_file(path, domain: str | None = QQ) -> np.ndarray:
    return read_matrix(load_text(path), domain)
