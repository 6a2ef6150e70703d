"""CSV and JSON artifact helpers shared by the CLI and the experiment scripts.

Every CSV starts with a ``# qht <version> config=<hash>`` comment, then a
header row; floats are written with 17 significant digits so that doubles
round-trip exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=_jsonable).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.17g}"


def csv_text(header: Sequence[str], rows: Iterable[Sequence], config: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# qht {__version__} config={config_hash(config or {})}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def write_csv(path, header, rows, config: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, rows, config))
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and float body of a CSV written by :func:`write_csv` (comments skipped)."""
    text = Path(path).read_text()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable)


def load_json(path) -> dict:
    with open(path) as f:
        return json.load(f)


def thread_count() -> int:
    """Worker cap from ``QHT_THREADS`` (default 1)."""
    raw = os.environ.get("QHT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"QHT_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def ordered_map(fn, items: Sequence) -> list:
    """``[fn(x) for x in items]``, threaded up to ``QHT_THREADS``; order follows ``items``."""
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
