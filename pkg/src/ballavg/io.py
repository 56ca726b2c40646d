"""Text formats: GF1 grid files and flat ``key=value`` blocks.

A GF1 file starts with ``GF1 dim=<n> N=<N>``, may carry ``# key=value``
comment lines, and then lists the ``N^n`` samples in C (lexicographic) order.
"""

from __future__ import annotations

import io
import math
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np

from .grid import GridFunction

PathLike = Union[str, Path]


def format_kv(pairs: Mapping) -> str:
    return "".join(f"{k}={_fmt(v)}\n" for k, v in pairs.items())


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def parse_kv(text: str) -> Dict[str, str]:
    out = {}
    for line in text.splitlines():
        line = line.strip().lstrip("#").strip()
        if not line or "=" not in line:
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def format_gf1(f: GridFunction, header: Optional[Mapping] = None) -> str:
    buf = io.StringIO()
    buf.write(f"GF1 dim={f.dim} N={f.N}\n")
    for k, v in (header or {}).items():
        buf.write(f"# {k}={_fmt(v)}\n")
    # repr-exact floats; numpy's text writer is locale independent
    np.savetxt(buf, f.values.reshape(-1, f.N), fmt="%.17g")
    return buf.getvalue()


def parse_gf1(text: str) -> Tuple[GridFunction, Dict[str, str]]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("GF1"):
        raise ValueError("not a GF1 file: first line must start with 'GF1'")
    head = parse_kv(lines[0][3:].replace(" ", "\n"))
    try:
        dim, N = int(head["dim"]), int(head["N"])
    except (KeyError, ValueError):
        raise ValueError(f"malformed GF1 header: {lines[0]!r}") from None
    meta = {}
    samples = []
    for line in lines[1:]:
        s = line.strip()
        if s.startswith("#"):
            meta.update(parse_kv(s))
        elif s:
            samples.append(s)
    values = np.array(" ".join(samples).split(), dtype=float)
    if values.size != N**dim:
        raise ValueError(f"GF1 body has {values.size} samples, expected {N}^{dim} = {N**dim}")
    return GridFunction(values.reshape((N,) * dim)), meta


def write_gf1(path: PathLike, f: GridFunction, header: Optional[Mapping] = None) -> None:
    Path(path).write_text(format_gf1(f, header))


def read_gf1(path: PathLike) -> Tuple[GridFunction, Dict[str, str]]:
    return parse_gf1(Path(path).read_text())
