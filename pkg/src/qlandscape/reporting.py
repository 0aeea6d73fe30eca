"""CSV / JSON emitters with atomic writes."""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

UNITS_COMMENT = (
    "units: natural units of H = sigma_z + f(t) V with hbar = 1; "
    "times and angles dimensionless"
)


def fmt(x) -> str:
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return "" if x is None else str(x)
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.17g}"


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    lines = [f"# {UNITS_COMMENT}"] + [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows, comments=()) -> Path:
    return atomic_write(path, csv_text(header, rows, comments))


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write(path, json_text(obj))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and rows of a CSV written by :func:`write_csv`, skipping comments."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]
