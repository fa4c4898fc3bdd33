"""Weighted partition layouts for tree views.

Sunburst: the root fills the disc centre, each depth occupies one ring,
and a node's angular extent divides its parent's proportionally to weight.
Icicle: the same partition unrolled onto the unit square, root band on top.

Weights are subtree leaf counts, kept as exact integers so that sibling
boundaries are computed from identical expressions: the layouts carry no
accumulated gap or overlap at all, which is what keeps re-rooted zooms
exact at any tree size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .anatomy import Anatomy, StagedTree, StructureId, subtree_view

TAU = 2.0 * math.pi


class EmptyViewError(ValueError):
    pass


@dataclass(frozen=True)
class LayoutParams:
    kind: str = "sunburst"  # "sunburst" | "icicle"
    max_depth_hint: Optional[int] = None
    root_disc: bool = True  # sunburst only: include the central root disc

    def __post_init__(self):
        if self.kind not in ("sunburst", "icicle"):
            raise ValueError(f"unknown layout kind {self.kind!r}")


@dataclass(frozen=True)
class NodeArc:
    node: StructureId
    depth: int
    start_angle: float
    end_angle: float
    inner_radius: float
    outer_radius: float

    @property
    def extent(self) -> float:
        return self.end_angle - self.start_angle


@dataclass(frozen=True)
class NodeRect:
    node: StructureId
    depth: int
    x0: float
    x1: float
    y0: float
    y1: float

    @property
    def extent(self) -> float:
        return self.x1 - self.x0


GeometryNode = Union[NodeArc, NodeRect]


def compute_weights(view: StagedTree) -> "dict[StructureId, int]":
    """Subtree leaf count per node: leaves weigh 1, internals sum their children."""
    if not view.nodes:
        raise EmptyViewError("cannot weight an empty view")
    n = len(view.nodes)
    weights = [0] * n
    for i in range(n - 1, -1, -1):
        if weights[i] == 0:
            weights[i] = 1  # no child contributed: a leaf
        parent = view.nodes[i].parent
        if parent is not None:
            weights[parent] += weights[i]
    return {view.nodes[i].id: weights[i] for i in range(n)}


def _spans(view: StagedTree, weights, lo: float, hi: float) -> "list[tuple[float, float]]":
    """Per-node interval over [lo, hi], partitioned by weight.

    Sibling boundaries reuse the same floating expression, so consecutive
    intervals meet exactly and the last child ends exactly at its parent's
    end.
    """
    n = len(view.nodes)
    spans: list[tuple[float, float]] = [(0.0, 0.0)] * n
    spans[0] = (lo, hi)
    consumed = [0] * n  # weight of earlier siblings, per parent index
    for i in range(1, n):
        node = view.nodes[i]
        p = node.parent
        w = weights[node.id]
        p_lo, p_hi = spans[p]
        p_extent = p_hi - p_lo
        total = weights[view.nodes[p].id]
        before = consumed[p]
        start = p_lo + p_extent * (before / total)
        end = p_lo + p_extent * ((before + w) / total)
        spans[i] = (start, end)
        consumed[p] = before + w
    return spans


def _band(view: StagedTree, params: LayoutParams) -> float:
    depth = view.max_depth()
    if params.max_depth_hint is not None:
        depth = max(depth, params.max_depth_hint)
    return 1.0 / (depth + 1)


def sunburst_layout(view: StagedTree, weights: "dict[StructureId, int]",
                    params: LayoutParams = LayoutParams()) -> "list[NodeArc]":
    """Radial partition; angle 0 points up and grows clockwise on screen."""
    if not view.nodes:
        raise EmptyViewError("cannot lay out an empty view")
    band = _band(view, params)
    spans = _spans(view, weights, 0.0, TAU)
    arcs = []
    for node, (a0, a1) in zip(view.nodes, spans):
        if node.depth == 0 and not params.root_disc:
            continue
        arcs.append(NodeArc(node.id, node.depth, a0, a1,
                            node.depth * band, (node.depth + 1) * band))
    return arcs


def icicle_layout(view: StagedTree, weights: "dict[StructureId, int]",
                  params: LayoutParams = LayoutParams(kind="icicle")) -> "list[NodeRect]":
    """Linear partition on the unit square; root band on top, depth grows down."""
    if not view.nodes:
        raise EmptyViewError("cannot lay out an empty view")
    band = _band(view, params)
    spans = _spans(view, weights, 0.0, 1.0)
    return [
        NodeRect(node.id, node.depth, x0, x1, node.depth * band, (node.depth + 1) * band)
        for node, (x0, x1) in zip(view.nodes, spans)
    ]


def reroot(view: StagedTree, clicked: StructureId) -> StagedTree:
    """Zoom rule: clicking a node re-roots the diagram at the node's parent.

    Clicking the root, or a child of the root, keeps the current view.
    Layout of the result recomputes weights over the subtree alone, which
    preserves every extent ratio between surviving nodes.
    """
    index = view.index_of(clicked)
    node = view.nodes[index]
    if node.parent is None or view.nodes[node.parent].parent is None:
        return view
    return subtree_view(view, view.nodes[node.parent].id)


@dataclass(frozen=True)
class Label:
    node: StructureId
    text: str
    x: float
    y: float
    orientation: str = "horizontal"


def plan_labels(anatomy: Anatomy, view: StagedTree,
                geometry: Sequence[GeometryNode]) -> "list[Label]":
    """Labels for major-system nodes only, anchored at shape centroids.

    Label text prefers the structure's abbreviation (CNS over Central
    Nervous System); orientation is always horizontal.  Sunburst anchors are
    unit-disc coordinates centred on the origin, icicle anchors unit-square
    coordinates.
    """
    labels = []
    for geom in geometry:
        structure = anatomy.structures.get(geom.node)
        if structure is None or not structure.is_major_system:
            continue
        text = structure.abbreviation or structure.name
        if isinstance(geom, NodeArc):
            mid_angle = (geom.start_angle + geom.end_angle) / 2.0
            mid_radius = (geom.inner_radius + geom.outer_radius) / 2.0
            x = mid_radius * math.sin(mid_angle)
            y = -mid_radius * math.cos(mid_angle)
        else:
            x = (geom.x0 + geom.x1) / 2.0
            y = (geom.y0 + geom.y1) / 2.0
        labels.append(Label(geom.node, text, x, y))
    return labels


def layout_view(view: StagedTree, params: LayoutParams) -> "list[GeometryNode]":
    """Weights plus the layout matching ``params.kind`` in one call."""
    weights = compute_weights(view)
    if params.kind == "sunburst":
        return sunburst_layout(view, weights, params)
    return icicle_layout(view, weights, params)
