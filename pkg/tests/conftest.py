"""Shared fixtures and independent oracles.

The oracles here deliberately recompute results by brute force (parent
chain walks, exhaustive descendant scans) so they share no code with the
implementations they check.
"""

from __future__ import annotations

import json
import random

import pytest

from atlasburst.anatomy import Anatomy, StagedTree, Structure, emapa, parse_anatomy
from atlasburst.expression import Annotation, AnnotationStore, Level


def anatomy_json(root: str, rows) -> str:
    """Build an anatomy file from (id, name, parent, stages, extra) rows."""
    structures = []
    for sid, name, parent, stages, *rest in rows:
        doc = {"id": sid, "name": name, "stages": stages}
        if parent is not None:
            doc["parent"] = parent
        if rest:
            doc.update(rest[0])
        structures.append(doc)
    return json.dumps({
        "format": "atlasburst-anatomy/1",
        "root": root,
        "structures": structures,
    })


MOUSE_ROWS = [
    ("EMAPA:1", "mouse", None, ["1-26"]),
    ("EMAPA:2", "zona pellucida", "EMAPA:1", ["1-5"]),
    ("EMAPA:3", "polar body", "EMAPA:1", [1, 2]),
    ("EMAPA:4", "cytoplasm", "EMAPA:1", ["1-9"]),
    ("EMAPA:5", "nucleus", "EMAPA:1", ["1-9"]),
    ("EMAPA:10", "limb", "EMAPA:1", ["9-26"]),
    ("EMAPA:11", "paw", "EMAPA:10", ["10-26"]),
    ("EMAPA:12", "digit", "EMAPA:11", ["12-26"]),
    ("EMAPA:13", "paw pad", "EMAPA:11", ["12-26"]),
    ("EMAPA:20", "eye", "EMAPA:1", ["11-26"], {"major_system": True}),
    ("EMAPA:21", "retina", "EMAPA:20", ["12-26"]),
    ("EMAPA:22", "lens", "EMAPA:20", ["12-26"]),
    ("EMAPA:16105", "heart", "EMAPA:1", ["10-26"],
     {"aliases": {"12": "EMAP:315", "17": "EMAP:2411"}, "major_system": True}),
    ("EMAPA:30", "central nervous system", "EMAPA:1", ["2-26"],
     {"abbr": "CNS", "major_system": True}),
    ("EMAPA:31", "future brain", "EMAPA:30", ["2-26"]),
]


@pytest.fixture(scope="session")
def mouse_anatomy() -> Anatomy:
    return parse_anatomy(anatomy_json("EMAPA:1", MOUSE_ROWS))


def ann_lines(records) -> str:
    """Annotation file text from (gene, structure, stage, level[, ref]) rows."""
    lines = []
    for gene, structure, stage, level, *rest in records:
        doc = {"gene": gene, "structure": structure, "stage": stage, "level": level}
        if rest and rest[0] is not None:
            doc["ref"] = rest[0]
        lines.append(json.dumps(doc))
    return "\n".join(lines) + "\n"


# -- random instance builders ------------------------------------------------


def random_anatomy(rng: random.Random, n: int, max_stage: int = 26,
                   full_span: bool = False) -> Anatomy:
    """Random valid anatomy built directly from Structure records."""
    structures: dict = {}
    root = emapa(1)
    spans: list[tuple[int, int]] = [(1, max_stage)]
    ids = [root]
    structures[root] = Structure(root, "n1", frozenset(range(1, max_stage + 1)))
    for i in range(2, n + 1):
        parent_index = rng.randrange(len(ids))
        lo, hi = spans[parent_index]
        if full_span:
            a, b = lo, hi
        else:
            a = rng.randint(lo, hi)
            b = rng.randint(a, hi)
        sid = emapa(i)
        structures[sid] = Structure(sid, f"n{i}", frozenset(range(a, b + 1)),
                                    parent=ids[parent_index])
        ids.append(sid)
        spans.append((a, b))
    return Anatomy(root, structures)


def random_annotations(rng: random.Random, anatomy: Anatomy, genes, count: int,
                       positive_only: bool = False) -> "list[Annotation]":
    levels = [l for l in Level if l.positive] if positive_only else list(Level)
    sids = sorted(anatomy.structures, key=lambda s: s.number)
    taken = set()
    out = []
    for _ in range(count):
        gene = rng.choice(genes)
        sid = rng.choice(sids)
        stage = rng.choice(sorted(anatomy.structures[sid].stages))
        if (gene, sid, stage) in taken:
            continue
        taken.add((gene, sid, stage))
        out.append(Annotation(gene, sid, stage, rng.choice(levels)))
    return out


# -- independent oracles -----------------------------------------------------


def ancestors_of(view: StagedTree, index: int) -> "list[int]":
    chain = []
    parent = view.nodes[index].parent
    while parent is not None:
        chain.append(parent)
        parent = view.nodes[parent].parent
    return chain


def oracle_descendants(view: StagedTree, index: int) -> "set[int]":
    """Strict descendants by scanning every node's parent chain."""
    return {j for j in range(len(view.nodes)) if index in ancestors_of(view, j)}


def oracle_leaf_count(view: StagedTree, index: int) -> int:
    subtree = oracle_descendants(view, index) | {index}
    parents = {view.nodes[j].parent for j in range(len(view.nodes))}
    leaves = [j for j in subtree if j not in parents]
    return len(leaves)


def oracle_states(view: StagedTree, directs: dict, anatomy: Anatomy = None,
                  stage: int = None) -> "dict[int, str]":
    """Per-node state class by exhaustive descendant scan.

    ``directs`` maps StructureId to Level.  When ``anatomy``/``stage`` are
    given, nodes absent at the stage are "not_present" (abstract mode).
    """
    result = {}
    for i, node in enumerate(view.nodes):
        if anatomy is not None and stage not in anatomy.structures[node.id].stages:
            result[i] = "not_present"
            continue
        level = directs.get(node.id)
        if level is not None:
            result[i] = level.value
            continue
        below = oracle_descendants(view, i)
        if any(directs.get(view.nodes[j].id) is not None
               and directs[view.nodes[j].id].positive for j in below):
            result[i] = "propagated"
        else:
            result[i] = "no_info"
    return result


def oracle_profile(view: StagedTree, directs: dict) -> set:
    """Union of every positive direct node with its whole ancestor chain."""
    out = set()
    for i, node in enumerate(view.nodes):
        level = directs.get(node.id)
        if level is not None and level.positive:
            out.add(node.id)
            out.update(view.nodes[j].id for j in ancestors_of(view, i))
    return out


def store_of(anatomy: Anatomy, annotations) -> AnnotationStore:
    store, _ = AnnotationStore.build(annotations, anatomy)
    return store
