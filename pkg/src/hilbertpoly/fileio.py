"""Polytope files and reproducible CSV / JSON / SVG output.

Every emitted file starts with a header line carrying the package version,
the seed and a hash of the input, and floats are written with ``repr`` so
identical runs give byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DegenerateInput, WrongDimension
from .polytope import HRep, VRep, hrep_from_vrep, polygon_order


def polytope_from_json(doc: dict) -> HRep:
    """``{"dim", "vertices"}`` or ``{"dim", "halfspaces": [{"gradient", "offset"}]}``."""
    if not isinstance(doc, dict):
        raise DegenerateInput("polytope JSON must be an object")
    dim = doc.get("dim", -1)
    if "vertices" in doc:
        h = hrep_from_vrep(VRep(np.asarray(doc["vertices"], dtype=float), dim))
    elif "halfspaces" in doc:
        hs = doc["halfspaces"]
        if not hs:
            raise DegenerateInput("empty halfspace list")
        G = np.array([f["gradient"] for f in hs], dtype=float)
        c = np.array([f["offset"] for f in hs], dtype=float)
        h = HRep(G, c)
    else:
        raise DegenerateInput("polytope JSON needs 'vertices' or 'halfspaces'")
    if dim not in (-1, h.dim):
        raise WrongDimension(f"declared dim {dim} but data is {h.dim}-D")
    return h


def load_polytope(path) -> HRep:
    with open(path, encoding="utf-8") as f:
        return polytope_from_json(json.load(f))


def file_hash(*paths) -> str:
    """Short sha256 over the bytes of the given files (empty input -> 'none')."""
    if not paths:
        return "none"
    m = hashlib.sha256()
    for p in paths:
        m.update(Path(p).read_bytes())
    return m.hexdigest()[:16]


def header_fields(seed=None, input_hash="none", **extra) -> dict:
    d = {"program": "hilbertpoly", "version": __version__, "seed": seed, "input": input_hash}
    d.update(extra)
    return d


def header_line(fields: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in fields.items())


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_fmt(x) for x in v)
    return str(v)


def csv_text(fields: dict, columns, rows) -> str:
    lines = ["# " + header_line(fields), ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _plain(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def json_text(fields: dict, payload: dict) -> str:
    """JSON object whose first line holds the header."""
    head = '{"header": ' + json.dumps(fields, sort_keys=True, default=_plain)
    body = json.dumps(payload, indent=2, sort_keys=True, default=_plain)
    if body == "{}":
        return head + "}\n"
    return head + ",\n" + body[2:] + "\n"


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def svg_text(fields: dict, h: HRep, curves, width: int = 480, pad: float = 0.05) -> str:
    """Polygon outline plus closed polylines (2-D only)."""
    if h.dim != 2:
        raise WrongDimension("SVG output is planar only")
    V = h.vertices[polygon_order(h.vertices)]
    lo = V.min(axis=0)
    span = float((V.max(axis=0) - lo).max())
    scale = width * (1 - 2 * pad) / span

    def pts(P):
        Q = (np.asarray(P) - lo) * scale + width * pad
        Q[:, 1] = width - Q[:, 1]
        return " ".join(f"{x:.3f},{y:.3f}" for x, y in Q)

    out = [f"<!-- {header_line(fields)} -->",
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{width}" '
           f'viewBox="0 0 {width} {width}">',
           f'<polygon points="{pts(V)}" fill="none" stroke="black" stroke-width="1.5"/>']
    for P in curves:
        P = np.asarray(P)
        P = np.vstack([P, P[:1]])
        out.append(f'<polyline points="{pts(P)}" fill="none" stroke="#c0392b" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
