"""Atomic CSV/JSON writers with a ``#`` metadata header.

Every file starts with ``# config_hash=<hex>`` and ``# master_seed=<u64>``
lines; CSV files then carry one header row and the data rows.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence


def _atomic_write(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _header(meta: dict) -> str:
    return "".join(f"# {k}={v}\n" for k, v in meta.items())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], meta: dict) -> Path:
    buf = io.StringIO()
    buf.write(_header(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return _atomic_write(Path(path), buf.getvalue())


def write_json(path, payload: dict, meta: dict) -> Path:
    text = _header(meta) + json.dumps(payload, indent=1, sort_keys=True) + "\n"
    return _atomic_write(Path(path), text)


def read_meta(path) -> dict:
    meta = {}
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
    return meta


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path) as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def read_json(path) -> dict:
    with open(path) as f:
        return json.loads("".join(ln for ln in f if not ln.startswith("#")))
