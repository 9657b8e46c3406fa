"""Deterministic text output: every float printed with 17 significant digits."""
from __future__ import annotations

import hashlib
import json
import math
import re

import numpy as np

_MARK = re.compile(r'"@@F(.*?)@@"')


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _mark(obj):
    if isinstance(obj, dict):
        return {str(k): _mark(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_mark(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _mark(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return f"@@F{fmt(obj)}@@"
    return obj


def dumps_17g(obj) -> str:
    """``json.dumps`` with sorted keys and floats at 17 significant digits."""
    text = json.dumps(_mark(obj), indent=2, sort_keys=True)
    return _MARK.sub(lambda m: m.group(1), text) + "\n"


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def write_csv(path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) if not isinstance(v, str) else v for v in row) for row in rows]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
