"""Join geometry, expression states, palette, and labels into render models.

A render model is everything a renderer or the explorer UI needs for one
diagram: per-node shapes with fills, state classes, names and hover text,
plus the major-system label plan.  Grids assemble many models row-major;
in abstract mode every cell shares one geometry, so a grid over stages or
genes changes only fills.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Optional

from .anatomy import Anatomy, check_stage
from .docio import geometry_node_fields, label_fields
from .expression import (
    AnnotationStore,
    ExpressionState,
    check_mode,
    propagate_states,
    view_for_mode,
)
from .layout import EmptyViewError, GeometryNode, Label, LayoutParams, layout_view, plan_labels

STATE_CLASSES = (
    "strong", "moderate", "weak", "present",
    "not_detected", "propagated", "no_info", "not_present",
)

_HEX_RE = re.compile(r"^#[0-9a-fA-F]{6}$")


@dataclass(frozen=True)
class PaletteColor:
    name: str
    hex: str


DEFAULT_PALETTE_COLORS = {
    "strong": PaletteColor("red", "#d62728"),
    "moderate": PaletteColor("yellow", "#ffd700"),
    "weak": PaletteColor("purple", "#9467bd"),
    "present": PaletteColor("orange", "#ff7f0e"),
    "not_detected": PaletteColor("cyan", "#17becf"),
    "propagated": PaletteColor("pink", "#f7b6d2"),
    "no_info": PaletteColor("grey", "#9e9e9e"),
    "not_present": PaletteColor("light grey", "#e0e0e0"),
}


@dataclass(frozen=True)
class Palette:
    """Total mapping from expression state class to a named color."""

    colors: "dict[str, PaletteColor]"

    def __post_init__(self):
        missing = [c for c in STATE_CLASSES if c not in self.colors]
        if missing:
            raise ValueError(f"palette missing state classes: {missing}")
        for key, color in self.colors.items():
            if not _HEX_RE.match(color.hex):
                raise ValueError(f"bad hex {color.hex!r} for {key!r}")


DEFAULT_PALETTE = Palette(dict(DEFAULT_PALETTE_COLORS))


def load_palette(source) -> Palette:
    """Palette config: a JSON map of state class to hex, overriding defaults."""
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    overrides = json.loads(text)
    if not isinstance(overrides, dict):
        raise ValueError("palette config must be a JSON object")
    colors = dict(DEFAULT_PALETTE_COLORS)
    for key, hex_value in overrides.items():
        if key not in colors:
            raise ValueError(f"unknown state class {key!r} in palette config")
        colors[key] = PaletteColor(colors[key].name, hex_value)
    return Palette(colors)


def color_of(state: ExpressionState, palette: Palette = DEFAULT_PALETTE) -> PaletteColor:
    return palette.colors[state.state_class]


def hover_text(name: str, state: ExpressionState, source_ref: Optional[str] = None) -> str:
    if state.kind == "direct":
        detail = state.level.value
    elif state.kind == "propagated":
        detail = "propagated"
    elif state.kind == "not_present":
        detail = "not present at this stage"
    else:
        detail = "no data"
    text = f"{name} — {detail}"
    if source_ref:
        text += f"\n{source_ref}"
    return text


@dataclass(frozen=True)
class RenderNode:
    geometry: GeometryNode
    fill: str
    state: str
    name: str
    hover: str


@dataclass
class RenderModel:
    title: str
    kind: str
    mode: str
    stage: int
    nodes: "list[RenderNode]"
    labels: "list[Label]"

    def to_doc(self) -> "dict[str, Any]":
        doc: dict[str, Any] = {"title": self.title, "kind": self.kind, "mode": self.mode}
        if self.mode != "abstract":
            doc["stage"] = self.stage
        doc["nodes"] = [
            {**geometry_node_fields(n.geometry),
             "fill": n.fill, "state": n.state, "name": n.name, "hover": n.hover}
            for n in self.nodes
        ]
        doc["labels"] = [label_fields(l) for l in self.labels]
        return doc


def compose_diagram(anatomy: Anatomy, store: AnnotationStore, gene: str, stage: int,
                    mode: str = "staged", kind: str = "sunburst",
                    palette: Palette = DEFAULT_PALETTE,
                    params: Optional[LayoutParams] = None,
                    states=None, _shared=None) -> RenderModel:
    """Full pipeline for one diagram: view, layout, states, colors, labels.

    ``states`` may carry a precomputed (cached) StateMap for this exact
    (gene, stage, mode); the result is identical either way.
    """
    check_stage(stage)
    check_mode(mode)
    if params is None:
        params = LayoutParams(kind=kind)
    elif params.kind != kind:
        raise ValueError("params.kind disagrees with kind")
    if _shared is None:
        view = view_for_mode(anatomy, stage, mode)
        try:
            geometry = layout_view(view, params)
        except EmptyViewError:
            # A stage where even the root is absent: an empty diagram, not a failure.
            geometry = []
        labels = plan_labels(anatomy, view, geometry)
    else:
        view, geometry, labels = _shared

    state_map = states
    if state_map is None:
        state_map = propagate_states(store, anatomy, gene, stage, mode, view=view)
    directs = store.direct_annotations(gene, stage)
    nodes = []
    for geom in geometry:
        state = state_map.states[geom.node]
        name = anatomy.structures[geom.node].name
        annotation = directs.get(geom.node)
        ref = annotation.source_ref if annotation is not None else None
        nodes.append(RenderNode(
            geometry=geom,
            fill=color_of(state, palette).hex,
            state=state.state_class,
            name=name,
            hover=hover_text(name, state, ref),
        ))
    title = f"{store.display_symbol(gene)} @ TS{stage}"
    return RenderModel(title, kind, mode, stage, nodes, labels)


@dataclass(frozen=True)
class GridSpec:
    cells: "tuple[tuple[str, int], ...]"  # ordered (gene, stage) pairs
    columns: int = 1
    mode: str = "staged"
    kind: str = "sunburst"

    def __post_init__(self):
        if not self.cells:
            raise ValueError("grid needs at least one cell")
        if self.columns < 1:
            raise ValueError("columns must be positive")
        check_mode(self.mode)


@dataclass
class GridResult:
    models: "list[RenderModel]"
    placements: "list[tuple[int, int]]"  # (row, col), row-major
    columns: int

    def to_doc(self) -> "dict[str, Any]":
        return {
            "columns": self.columns,
            "cells": [
                {"row": row, "col": col, "model": model.to_doc()}
                for (row, col), model in zip(self.placements, self.models)
            ],
        }


def compose_grid(anatomy: Anatomy, store: AnnotationStore, spec: GridSpec,
                 palette: Palette = DEFAULT_PALETTE,
                 params: Optional[LayoutParams] = None) -> GridResult:
    """One model per (gene, stage) cell, placed row-major.

    Abstract-mode cells share a single geometry object, so their serialized
    geometry sections are identical byte for byte.
    """
    if params is None:
        params = LayoutParams(kind=spec.kind)
    shared = None
    if spec.mode == "abstract":
        view = view_for_mode(anatomy, spec.cells[0][1], "abstract")
        geometry = layout_view(view, params)
        shared = (view, geometry, plan_labels(anatomy, view, geometry))
    models = []
    placements = []
    for i, (gene, stage) in enumerate(spec.cells):
        models.append(compose_diagram(
            anatomy, store, gene, stage, spec.mode, spec.kind, palette,
            params=params, _shared=shared))
        placements.append(divmod(i, spec.columns))
    return GridResult(models, placements, spec.columns)
