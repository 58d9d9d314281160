"""Interchange files, report serialization, and delimited output.

The graph/measure interchange format is JSON-shaped text:

    { "n": int, "edges": [[x, y, w], ...], "killing": [c0, ...],
      "measure": [m0, ...] }

The edge list is unordered on input; the loader symmetrizes and validates.
Writers emit a canonical form (edges sorted with x < y) so that a
load/save round trip of a canonically written file is byte-stable.  All
floating output is printed with 17 significant digits, which round-trips
IEEE doubles exactly.
"""

from __future__ import annotations

import hashlib
import math
from pathlib import Path
from typing import Any, IO, Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .graphs import Graph, MeasureSpace, build_graph


def format_float(x: float) -> str:
    """17-significant-digit decimal form; exact double round trip."""
    return f"{float(x):.17g}"


def dumps_json(obj: Any, indent: int = 2) -> str:
    """Serialize dicts/lists/scalars with 17-digit floats.

    A tiny deterministic writer: key order is insertion order, floats go
    through :func:`format_float`.  Non-finite floats are rejected (the
    infinite Sobolev exponent is serialized as the string "inf" upstream).
    """
    import json

    out: list[str] = []

    def emit(o: Any, depth: int) -> None:
        pad = " " * (indent * depth)
        inner = " " * (indent * (depth + 1))
        if isinstance(o, dict):
            if not o:
                out.append("{}")
                return
            out.append("{\n")
            for i, (k, v) in enumerate(o.items()):
                if not isinstance(k, str):
                    raise TypeError(f"JSON object keys must be strings, got {k!r}")
                out.append(f"{inner}{json.dumps(k)}: ")
                emit(v, depth + 1)
                out.append(",\n" if i + 1 < len(o) else "\n")
            out.append(pad + "}")
        elif isinstance(o, (list, tuple)):
            if len(o) == 0:
                out.append("[]")
                return
            scalars = all(not isinstance(v, (dict, list, tuple)) for v in o)
            if scalars and len(o) <= 8:
                out.append("[" + ", ".join(_scalar(v) for v in o) + "]")
                return
            out.append("[\n")
            for i, v in enumerate(o):
                out.append(inner)
                emit(v, depth + 1)
                out.append(",\n" if i + 1 < len(o) else "\n")
            out.append(pad + "]")
        else:
            out.append(_scalar(o))

    def _scalar(o: Any) -> str:
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            if not math.isfinite(o):
                raise ValueError(f"non-finite float {o!r} in JSON output")
            return format_float(float(o))
        if isinstance(o, str):
            return json.dumps(o)
        raise TypeError(f"cannot serialize {type(o).__name__}")

    emit(obj, 0)
    out.append("\n")
    return "".join(out)


# ---------------------------------------------------------------------------
# Interchange format
# ---------------------------------------------------------------------------

def instance_to_dict(g: Graph, ms: MeasureSpace) -> dict:
    u, v, w = g.edge_arrays()
    return {
        "n": g.n,
        "edges": [[int(a), int(b), float(c)] for a, b, c in zip(u, v, w)],
        "killing": [float(x) for x in g.killing],
        "measure": [float(x) for x in ms.m],
    }


def instance_from_dict(d: dict, where: str = "instance") -> tuple[Graph, MeasureSpace]:
    def need(key: str, types: tuple) -> Any:
        if key not in d:
            raise ConfigError(f"{where}: missing field {key!r}")
        val = d[key]
        if not isinstance(val, types):
            raise ConfigError(f"{where}.{key}: expected {'/'.join(t.__name__ for t in types)}")
        return val

    n = need("n", (int,))
    edges_raw = need("edges", (list,))
    killing = need("killing", (list,))
    measure = need("measure", (list,))
    if len(killing) != n:
        raise ConfigError(f"{where}.killing: expected {n} entries, got {len(killing)}")
    if len(measure) != n:
        raise ConfigError(f"{where}.measure: expected {n} entries, got {len(measure)}")
    edges = []
    for i, e in enumerate(edges_raw):
        if not (isinstance(e, list) and len(e) == 3):
            raise ConfigError(f"{where}.edges[{i}]: expected [x, y, w]")
        edges.append((e[0], e[1], float(e[2])))
    try:
        g = build_graph(edges, killing, n)
        ms = MeasureSpace(measure)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    except Exception as exc:  # our own graph errors carry good messages
        raise type(exc)(f"{where}: {exc}") from None
    return g, ms


def load_instance(path: str | Path) -> tuple[Graph, MeasureSpace]:
    import json

    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return instance_from_dict(d, where=str(path))


def save_instance(path: str | Path, g: Graph, ms: MeasureSpace) -> Path:
    path = Path(path)
    path.write_text(dumps_json(instance_to_dict(g, ms)))
    return path


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# Delimited output
# ---------------------------------------------------------------------------

def write_spectrum_csv(out: IO[str], lambdas: Sequence[float],
                       mean_prefix: Sequence[float]) -> None:
    """Columns (k, lambda, mean_prefix), k one-based."""
    out.write("k,lambda,mean_prefix\n")
    for k, (lam, bar) in enumerate(zip(lambdas, mean_prefix), start=1):
        out.write(f"{k},{format_float(lam)},{format_float(bar)}\n")


def write_heat_kernel_csv(out: IO[str],
                          kernels: Iterable[tuple[float, np.ndarray]]) -> None:
    """Triples (x, y, value) per requested time, as columns t,x,y,value."""
    out.write("t,x,y,value\n")
    for t, values in kernels:
        n = values.shape[0]
        ts = format_float(t)
        for x in range(n):
            for y in range(n):
                out.write(f"{ts},{x},{y},{format_float(values[x, y])}\n")


def write_decay_csv(out: IO[str],
                    rows: Iterable[tuple[float, float, float, float]]) -> None:
    """Heat-decay table, columns t,p_2t_xx,c1_bound,margin."""
    out.write("t,p_2t_xx,c1_bound,margin\n")
    for t, diag, bound, margin in rows:
        out.write(f"{format_float(t)},{format_float(diag)},"
                  f"{format_float(bound)},{format_float(margin)}\n")


def write_bound_csv(out: IO[str], name: str,
                    records: Iterable[tuple[float, float, float, float]]) -> None:
    """Per-k table of one bound report, columns bound,k,bound_value,observed,margin."""
    out.write("bound,k,bound_value,observed,margin\n")
    for k, bound, observed, margin in records:
        kf = str(int(k)) if float(k).is_integer() else format_float(k)
        out.write(f"{name},{kf},{format_float(bound)},"
                  f"{format_float(observed)},{format_float(margin)}\n")
