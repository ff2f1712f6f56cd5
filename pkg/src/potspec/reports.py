"""CSV/JSON report writing with a reproducibility header."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile

from . import __version__

TOOL = "potspec"


def config_hash(config):
    """Short sha256 of the canonical JSON form of ``config``."""
    text = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def header(config):
    return {"tool": TOOL, "version": __version__, "config_hash": config_hash(config)}


def _cell(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return v


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def render(rows, fmt, meta, columns=None):
    """Report text; ``meta`` goes in '#' lines (CSV) or a 'meta' object (JSON)."""
    if fmt == "json":
        doc = {"meta": _json_safe(meta), "rows": [_json_safe(r) for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    for key in sorted(meta):
        buf.write(f"# {key}={_cell(meta[key])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


def write_text(path, text):
    """Write atomically so a failed run leaves no partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".potspec-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
