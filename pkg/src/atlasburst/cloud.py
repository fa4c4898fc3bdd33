"""Per-stage gene cloud for building multi-gene queries.

One node per gene annotated at the stage, sized by annotation count and
packed alphabetically on a square grid so gene families sit together.
An optional structure filter keeps only genes annotated somewhere inside
that structure's subtree, mirroring "focus on the eye" style narrowing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional

from .anatomy import Anatomy, StructureId, check_stage, staged_view, subtree_view
from .expression import AnnotationStore, gene_key


@dataclass(frozen=True)
class CloudNode:
    gene: str
    count: int
    x: float = 0.0
    y: float = 0.0
    radius: float = 0.0
    selected: bool = False


@dataclass
class CloudModel:
    stage: int
    filter: Optional[StructureId]
    nodes: "list[CloudNode]"  # alphabetical by gene, case-insensitive

    def genes(self) -> "list[str]":
        return [n.gene for n in self.nodes]

    def to_doc(self) -> "dict[str, Any]":
        doc: dict[str, Any] = {"stage": self.stage}
        if self.filter is not None:
            doc["filter"] = self.filter.text
        doc["nodes"] = [
            {"gene": n.gene, "count": n.count, "x": n.x, "y": n.y, "r": n.radius}
            for n in self.nodes
        ]
        return doc


def build_cloud(store: AnnotationStore, anatomy: Anatomy, stage: int,
                filter: Optional[StructureId] = None) -> CloudModel:
    """Counts per gene at the stage, optionally restricted to a subtree."""
    check_stage(stage)
    if filter is None:
        counted = [(g, store.annotation_count(g, stage)) for g in store.genes_at_stage(stage)]
    else:
        view = staged_view(anatomy, stage)
        if filter not in view:
            raise KeyError(f"filter structure {filter.text} absent at stage {stage}")
        subtree = set(subtree_view(view, filter).ids())
        counts: dict[str, int] = {}
        for sid in sorted(subtree, key=lambda s: s.number):
            for gene in store.genes_at_structure(sid, stage):
                counts[gene] = counts.get(gene, 0) + 1
        counted = sorted(counts.items(), key=lambda item: gene_key(item[0]))
    nodes = [CloudNode(gene, count) for gene, count in counted if count > 0]
    return CloudModel(stage, filter, cloud_layout(nodes))


def cloud_layout(nodes: "list[CloudNode]") -> "list[CloudNode]":
    """Row-major square grid over the unit square.

    ceil(sqrt(n)) columns; radius scales with sqrt(count) so area tracks the
    annotation count and one heavy gene cannot swallow its neighbours.
    Alphabetical input order is preserved along the rows.
    """
    n = len(nodes)
    if n == 0:
        return []
    cols = math.isqrt(n - 1) + 1  # ceil(sqrt(n))
    cell = 1.0 / cols
    max_count = max(node.count for node in nodes)
    placed = []
    for i, node in enumerate(nodes):
        row, col = divmod(i, cols)
        placed.append(CloudNode(
            gene=node.gene,
            count=node.count,
            x=(col + 0.5) * cell,
            y=(row + 0.5) * cell,
            radius=0.5 * cell * math.sqrt(node.count / max_count),
            selected=node.selected,
        ))
    return placed


def search_prefix(cloud: CloudModel, prefix: str) -> "list[str]":
    """Case-insensitive prefix matches, in cloud order."""
    needle = prefix.casefold()
    return [n.gene for n in cloud.nodes if n.gene.casefold().startswith(needle)]


def toggle_selection(cloud: CloudModel, selection: "list[str]", gene: str) -> "list[str]":
    """Flip a gene's membership; insertion order is kept for grid layouts."""
    key = gene_key(gene)
    match = next((n.gene for n in cloud.nodes if gene_key(n.gene) == key), None)
    if match is None:
        raise KeyError(f"gene {gene!r} not in cloud")
    if any(gene_key(g) == key for g in selection):
        return [g for g in selection if gene_key(g) != key]
    return [*selection, match]
