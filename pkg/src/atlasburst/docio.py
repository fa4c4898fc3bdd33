"""Canonical JSON documents.

All wire and file outputs go through one writer so identical inputs always
serialize to identical bytes: keys keep insertion order, numbers are fixed
at 9 decimal places, and there is no whitespace variance.
"""

from __future__ import annotations

import json
from typing import Any

from .anatomy import StagedTree
from .layout import Label, NodeArc, NodeRect

FLOAT_DECIMALS = 9


def fmt_num(value: float, decimals: int = FLOAT_DECIMALS) -> str:
    s = f"{value:.{decimals}f}"
    if s.startswith("-") and float(s) == 0.0:
        s = s[1:]
    return s


def canon_dumps(obj: Any) -> str:
    """Compact JSON with fixed-precision floats and insertion-ordered keys."""
    out: list[str] = []
    _write(obj, out)
    return "".join(out)


def _write(obj: Any, out: "list[str]"):
    if obj is None or isinstance(obj, (bool, int)):
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        out.append(fmt_num(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(json.dumps(str(key), ensure_ascii=False))
            out.append(":")
            _write(value, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, value in enumerate(obj):
            if i:
                out.append(",")
            _write(value, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def geometry_node_fields(geom) -> "dict[str, Any]":
    if isinstance(geom, NodeArc):
        return {
            "id": geom.node.text,
            "depth": geom.depth,
            "a0": geom.start_angle,
            "a1": geom.end_angle,
            "r0": geom.inner_radius,
            "r1": geom.outer_radius,
        }
    if isinstance(geom, NodeRect):
        return {
            "id": geom.node.text,
            "depth": geom.depth,
            "x0": geom.x0,
            "x1": geom.x1,
            "y0": geom.y0,
            "y1": geom.y1,
        }
    raise TypeError(f"not a geometry node: {type(geom).__name__}")


def geometry_doc(kind: str, mode: str, stage, geometry) -> "dict[str, Any]":
    """Geometry document; ``stage`` is omitted in abstract mode because the
    layout does not depend on it (that independence is the point)."""
    doc: dict[str, Any] = {"kind": kind, "mode": mode}
    if mode != "abstract" and stage is not None:
        doc["stage"] = stage
    doc["nodes"] = [geometry_node_fields(g) for g in geometry]
    return doc


def label_fields(label: Label) -> "dict[str, Any]":
    return {
        "id": label.node.text,
        "text": label.text,
        "x": label.x,
        "y": label.y,
        "orientation": label.orientation,
    }


def anatomy_view_doc(anatomy, view: StagedTree, mode: str) -> "dict[str, Any]":
    doc: dict[str, Any] = {"mode": mode}
    if mode != "abstract" and view.stage is not None:
        doc["stage"] = view.stage
    doc["root"] = view.root.text
    nodes = []
    for node in view.nodes:
        s = anatomy.structures[node.id]
        parent = view.nodes[node.parent].id.text if node.parent is not None else None
        nodes.append({
            "id": node.id.text,
            "name": s.name,
            "abbr": s.abbreviation,
            "parent": parent,
            "depth": node.depth,
        })
    doc["nodes"] = nodes
    return doc
