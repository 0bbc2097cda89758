"""Edge-list files.

Text: optional header ``# n=<n> directed=<0|1>``, then ``u v`` (or
``u v w`` when weighted) per line, zero-based decimal ids.

Binary: ``GFG1``, ``n`` as u64 little-endian, one directed-flag byte, then
``(u, v)`` pairs as u64 little-endian.
"""

from __future__ import annotations

import io as _io
import re
import struct
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .core import Graph
from .errors import GraphForgeError, UnsupportedInputError

MAGIC = b"GFG1"
_HEADER = re.compile(rb"#\s*n=(\d+)\s+directed=([01])")


class ParseError(GraphForgeError):
    exit_code = 1


def format_text(g: Graph, header: bool = True) -> bytes:
    out = _io.StringIO()
    if header:
        out.write(f"# n={g.n} directed={int(g.directed)}\n")
    if g.m:
        cols = [g.edges[:, 0], g.edges[:, 1]]
        if g.weights is not None:
            cols.append(g.weights)
        arr = np.stack(cols, axis=1)
        np.savetxt(out, arr, fmt="%d", delimiter=" ")
    return out.getvalue().encode("ascii")


def parse_text(data: bytes) -> Graph:
    n = None
    directed = False
    lines = data.splitlines()
    body = []
    for ln in lines:
        s = ln.strip()
        if not s:
            continue
        if s.startswith(b"#"):
            m = _HEADER.match(s)
            if m and n is None:
                n, directed = int(m.group(1)), m.group(2) == b"1"
            continue
        body.append(s)
    if body:
        widths = {len(s.split()) for s in body}
        if len(widths) != 1 or widths.pop() not in (2, 3):
            raise ParseError("each edge line needs 'u v' or 'u v w'")
        try:
            arr = np.array(b" ".join(body).split()).astype(np.int64).reshape(len(body), -1)
        except ValueError as exc:
            raise ParseError(f"malformed edge line: {exc}") from None
    else:
        arr = np.zeros((0, 2), dtype=np.int64)
    if len(arr) and arr[:, :2].min() < 0:
        raise ParseError("negative node id")
    if n is None:
        n = int(arr[:, :2].max()) + 1 if len(arr) else 0
    weights = arr[:, 2] if arr.shape[1] == 3 else None
    try:
        return Graph(n, arr[:, :2], directed=directed, allow_loops=True, allow_multi=True,
                     weights=weights)
    except GraphForgeError as exc:
        raise ParseError(str(exc)) from None


def format_binary(g: Graph) -> bytes:
    if g.weights is not None:
        raise UnsupportedInputError("the binary format carries no weights")
    head = MAGIC + struct.pack("<QB", g.n, int(g.directed))
    return head + g.edges.astype("<u8").tobytes()


def parse_binary(data: bytes) -> Graph:
    if len(data) < 13 or data[:4] != MAGIC:
        raise ParseError("not a GFG1 file")
    n, directed = struct.unpack("<QB", data[4:13])
    body = data[13:]
    if len(body) % 16:
        raise ParseError("truncated edge data")
    e = np.frombuffer(body, dtype="<u8").astype(np.int64).reshape(-1, 2)
    try:
        return Graph(int(n), e, directed=bool(directed), allow_loops=True, allow_multi=True)
    except GraphForgeError as exc:
        raise ParseError(str(exc)) from None


def write_graph(g: Graph, path: Union[str, Path, BinaryIO], fmt: str = "text") -> None:
    data = format_binary(g) if fmt == "bin" else format_text(g)
    if hasattr(path, "write"):
        path.write(data)
    else:
        Path(path).write_bytes(data)


def read_graph(path: Union[str, Path, BinaryIO]) -> Graph:
    data = path.read() if hasattr(path, "read") else Path(path).read_bytes()
    if data[:4] == MAGIC:
        return parse_binary(data)
    return parse_text(data)


def write_labels(path, labels) -> None:
    lines = "".join(f"{i} {int(c)}\n" for i, c in enumerate(np.asarray(labels)))
    Path(path).write_text(lines)


def write_points(path, points) -> None:
    Path(path).write_text("".join(line + "\n" for line in points.lines()))


def read_numbers(path, kind=int) -> list:
    """One number per line; blank lines and ``#`` comments ignored."""
    out = []
    for ln in Path(path).read_text().splitlines():
        s = ln.split("#", 1)[0].strip()
        if s:
            try:
                out.append(kind(s))
            except ValueError:
                raise ParseError(f"not a number: {s!r}") from None
    return out
