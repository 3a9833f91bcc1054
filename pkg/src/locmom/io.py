"""Deterministic serialization: CSV and JSON with fixed float formatting,
and the compact binary layout for distributions.

CSV: '.' decimal, ',' separator, header row always present, floats at 17
significant digits, so identical inputs yield byte-identical files.

Binary distribution layout (little-endian):
    bytes  0..15   kind, ASCII, null-padded ("weyl_wigner", "margenau_hill"
                   or "classical")
    bytes 16..23   n as uint64
    bytes 24..47   dq, dp, hbar as three float64
    bytes 48..     n*n float64 cell values, row-major (q rows, ascending p)
"""

from __future__ import annotations

import json
import struct
from typing import Iterable

import numpy as np

from .errors import ConfigError
from .moments import LocalProfile

_HEADER = struct.Struct("<16sQddd")


def fmt(x: float) -> str:
    return "%.17g" % float(x)


def profile_csv(profiles: Iterable[LocalProfile]) -> str:
    """Long-format CSV with columns q, value, mask, definition, order."""
    lines = ["q,value,mask,definition,order"]
    for prof in profiles:
        grid = prof.profile.grid
        order = str(prof.order)
        for qj, vj, mj in zip(grid.q, prof.profile.values, prof.profile.mask):
            lines.append("%s,%s,%d,%s,%s"
                         % (fmt(qj), fmt(vj), int(mj), prof.definition, order))
    return "\n".join(lines) + "\n"


def distribution_csv(grid, pgrid: np.ndarray, values: np.ndarray) -> str:
    """Dense CSV with columns q, p, value (q-major, ascending p)."""
    lines = ["q,p,value"]
    q = grid.q
    for i in range(values.shape[0]):
        qi = fmt(q[i])
        row = values[i]
        for k in range(values.shape[1]):
            lines.append("%s,%s,%s" % (qi, fmt(pgrid[k]), fmt(row[k])))
    return "\n".join(lines) + "\n"


def distribution_binary(kind: str, grid, dp: float,
                        values: np.ndarray) -> bytes:
    kind_bytes = kind.encode("ascii")
    if len(kind_bytes) > 16:
        raise ConfigError("kind %r does not fit the 16-byte header field" % kind)
    header = _HEADER.pack(kind_bytes.ljust(16, b"\0"), grid.n,
                          grid.dq, dp, grid.hbar)
    body = np.ascontiguousarray(values, dtype="<f8").tobytes()
    return header + body


def read_distribution_binary(blob: bytes):
    """Inverse of distribution_binary; returns (kind, n, dq, dp, hbar, values)."""
    kind_raw, n, dq, dp, hbar = _HEADER.unpack(blob[:_HEADER.size])
    kind = kind_raw.rstrip(b"\0").decode("ascii")
    values = np.frombuffer(blob[_HEADER.size:], dtype="<f8").reshape(n, n)
    return kind, n, dq, dp, hbar, values


def trace_csv(trace, values_per_time: list[np.ndarray],
              masks_per_time: list[np.ndarray]) -> str:
    """Per-observable trace CSV with columns t, q, value, mask, preceded by
    comment lines recording the potential label, dt, hbar and mass."""
    grid = trace.snapshots[0].grid
    dt = trace.times[1] - trace.times[0] if len(trace.times) > 1 else 0.0
    lines = ["# potential=%s" % trace.potential.label,
             "# dt=%s" % fmt(dt),
             "# hbar=%s" % fmt(grid.hbar),
             "# mass=%s" % fmt(grid.mass),
             "t,q,value,mask"]
    for t, vals, mask in zip(trace.times, values_per_time, masks_per_time):
        ts = fmt(t)
        for qj, vj, mj in zip(grid.q, vals, mask):
            lines.append("%s,%s,%s,%d" % (ts, fmt(qj), fmt(vj), int(mj)))
    return "\n".join(lines) + "\n"


def json_text(payload) -> str:
    """Deterministic JSON: sorted keys, newline-terminated."""
    return json.dumps(payload, sort_keys=True) + "\n"
