"""Input checks in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import numpy as np

from .exceptions import BadNodeId, SelfPair
from .topology import Topology


def check_trace(X, n_nodes: int | None = None) -> np.ndarray:
    """Validate a request sequence and return it as canonical ``(m, 2)`` int64.

    Rows are sorted so that column 0 holds the smaller node id.
    """
    arr = np.asarray(X)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"trace must have shape (n_requests, 2), got {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
            raise ValueError("node ids must be integers")
    elif arr.dtype.kind not in "iu":
        raise ValueError(f"node ids must be integers, got dtype {arr.dtype}")
    arr = np.sort(arr.astype(np.int64), axis=1)
    if arr.min() < 0 or (n_nodes is not None and arr.max() >= n_nodes):
        raise BadNodeId(f"trace references nodes outside 0..{n_nodes - 1 if n_nodes else '?'}")
    if np.any(arr[:, 0] == arr[:, 1]):
        row = int(np.flatnonzero(arr[:, 0] == arr[:, 1])[0])
        raise SelfPair(f"request {row} is a self-pair")
    return arr


def check_topology(topology) -> Topology:
    if not isinstance(topology, Topology):
        raise TypeError(f"expected a Topology, got {type(topology).__name__}")
    return topology


def check_positive(name: str, value, integer: bool = False):
    if value is None or value <= 0 or (integer and int(value) != value):
        kind = "positive integer" if integer else "positive number"
        raise ValueError(f"{name} must be a {kind}, got {value!r}")
    return int(value) if integer else float(value)
