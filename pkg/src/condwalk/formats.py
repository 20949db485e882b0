"""On-disk formats: path CSV, binary path frames, JSON documents.

Binary frame layout (all integers little-endian)::

    magic      4 bytes   b"CWPF"
    version    uint16    FRAME_VERSION
    reserved   uint16    0
    hlen       uint32    length of the JSON header in bytes
    header     hlen      UTF-8 JSON (schema, law, parameters, seed)
    count      uint64    number of paths
    count times:
        length uint64    number of positions in the path
        data   length x int64 positions

CSV files start with one ``# {json}`` metadata line, then a header row.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import ConfigError

SCHEMA = "condwalk/1"
FRAME_MAGIC = b"CWPF"
FRAME_VERSION = 1


def dumps_json(doc: dict[str, Any]) -> str:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: str | Path, doc: dict[str, Any]) -> None:
    Path(path).write_text(dumps_json(doc))


def read_json(path: str | Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text())


def csv_text(meta: dict[str, Any], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps({"schema": SCHEMA, **meta}, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def read_csv(path_or_text: str | Path, text: bool = False) -> tuple[dict[str, Any], list[dict[str, str]]]:
    raw = str(path_or_text) if text else Path(path_or_text).read_text()
    lines = raw.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ConfigError("CSV lacks the '# {json}' metadata line")
    meta = json.loads(lines[0][2:])
    return meta, list(csv.DictReader(lines[1:]))


def paths_csv(paths: np.ndarray, meta: dict[str, Any]) -> str:
    rows = ((r, s, int(z)) for r, path in enumerate(paths) for s, z in enumerate(path))
    return csv_text(meta, ("replica", "step", "position"), rows)


def read_paths_csv(path: str | Path) -> tuple[dict[str, Any], list[np.ndarray]]:
    meta, rows = read_csv(path)
    out: dict[int, list[tuple[int, int]]] = {}
    for r in rows:
        out.setdefault(int(r["replica"]), []).append((int(r["step"]), int(r["position"])))
    return meta, [np.array([z for _, z in sorted(v)], dtype=np.int64) for _, v in sorted(out.items())]


def write_frame(path: str | Path, paths: Sequence[np.ndarray] | np.ndarray, meta: dict[str, Any]) -> None:
    header = json.dumps({"schema": SCHEMA, **meta}, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(FRAME_MAGIC + struct.pack("<HHI", FRAME_VERSION, 0, len(header)) + header)
        f.write(struct.pack("<Q", len(paths)))
        for p in paths:
            arr = np.asarray(p, dtype="<i8")
            f.write(struct.pack("<Q", len(arr)))
            f.write(arr.tobytes())


def read_frame(path: str | Path) -> tuple[dict[str, Any], list[np.ndarray]]:
    data = Path(path).read_bytes()
    if data[:4] != FRAME_MAGIC:
        raise ConfigError(f"{path}: not a path frame (bad magic)")
    version, _, hlen = struct.unpack_from("<HHI", data, 4)
    if version != FRAME_VERSION:
        raise ConfigError(f"{path}: unsupported frame version {version}")
    pos = 12
    meta = json.loads(data[pos:pos + hlen])
    pos += hlen
    (count,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    paths = []
    for _ in range(count):
        (n,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        paths.append(np.frombuffer(data, dtype="<i8", count=n, offset=pos).astype(np.int64))
        pos += 8 * n
    if pos != len(data):
        raise ConfigError(f"{path}: {len(data) - pos} trailing bytes")
    return meta, paths


def read_paths(path: str | Path) -> tuple[dict[str, Any], list[np.ndarray]]:
    """Read either format, sniffing the magic bytes."""
    with open(path, "rb") as f:
        head = f.read(4)
    return read_frame(path) if head == FRAME_MAGIC else read_paths_csv(path)
