"""Deterministic JSON and CSV emission for reports."""

import csv
import io
import json
import math

import numpy as np

from .perturbation import HypothesisFailed


def fmt_float(x):
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def to_data(obj):
    """Convert numpy values, tuples and report objects to plain JSON data."""
    if isinstance(obj, HypothesisFailed):
        return to_data(obj.as_dict())
    if isinstance(obj, dict):
        return {str(k): to_data(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_data(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_data(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(obj, out, indent, level):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ", "
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + pad)
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(sep)
            out.append(json.dumps(k) + ": ")
            _emit(v, out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        # numeric rows stay on one line
        flat = all(not isinstance(v, (dict, list)) for v in obj)
        if flat or not indent:
            out.append("[")
            for i, v in enumerate(obj):
                if i:
                    out.append(", ")
                _emit(v, out, 0, 0)
            out.append("]")
            return
        out.append("[" + pad)
        for i, v in enumerate(obj):
            if i:
                out.append(sep)
            _emit(v, out, indent, level + 1)
        out.append(end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt_float(obj) if math.isfinite(obj) else "null")
    else:
        out.append(json.dumps(obj))


def dumps(obj, indent=2):
    """JSON text with insertion-ordered keys and floats at 17 digits.

    Non-finite floats become ``null``.
    """
    out = []
    _emit(to_data(obj), out, indent, 0)
    return "".join(out) + "\n"


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()
