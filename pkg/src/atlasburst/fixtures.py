"""Deterministic synthetic datasets.

Generated anatomies mirror the real thing in shape: a root organism that
spans all stages, exactly five structures alive at stage 1, structures
that mostly persist once they appear, and a fixed heart carrying the two
well-known staged aliases.  Gene symbols come in alphabetical families so
cloud packing has something to cluster.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .anatomy import Anatomy, Structure, StructureId, emap, emapa
from .expression import Annotation, AnnotationStore, Level

HEART_ID = 16105
HEART_ALIASES = {12: 315, 17: 2411}

_ADJECTIVES = [
    "anterior", "caudal", "cranial", "distal", "dorsal", "future", "inner",
    "lateral", "left", "medial", "outer", "posterior", "primitive", "proximal",
    "right", "ventral",
]
_NOUNS = [
    "arch", "bud", "canal", "crest", "duct", "fold", "ganglion", "groove",
    "layer", "lobe", "mesenchyme", "node", "plate", "plexus", "pouch", "ridge",
    "septum", "sinus", "somite", "tract", "tube", "vesicle",
]
_GENE_SYLLABLES = [
    "Ax", "Bar", "Cro", "Del", "Eph", "Fyn", "Gor", "Hap", "Irx", "Jag",
    "Kel", "Lim", "Mex", "Nod", "Oto", "Pax", "Quo", "Rom", "Sev", "Tal",
    "Ulk", "Vax", "Wnt", "Xop", "Yel", "Zic",
]
_LEVEL_WEIGHTS = [
    (Level.STRONG, 20),
    (Level.MODERATE, 25),
    (Level.WEAK, 20),
    (Level.PRESENT, 25),
    (Level.NOT_DETECTED, 10),
]


@dataclass(frozen=True)
class FixtureSpec:
    structures: int
    genes: int
    stages: int = 26
    density: float = 3.0  # mean annotations per gene
    seed: int = 0

    def __post_init__(self):
        if self.structures < 5:
            raise ValueError("need at least 5 structures (root plus the stage-1 four)")
        if self.genes < 1 or self.density <= 0:
            raise ValueError("genes and density must be positive")
        if not 1 <= self.stages <= 26:
            raise ValueError("stages must be in [1, 26]")
        if self.stages == 1 and self.structures > 5:
            raise ValueError("a single-stage anatomy can only hold the 5 stage-1 structures")


def _weighted_level(rng: random.Random) -> Level:
    total = sum(w for _, w in _LEVEL_WEIGHTS)
    pick = rng.randrange(total)
    for level, weight in _LEVEL_WEIGHTS:
        pick -= weight
        if pick < 0:
            return level
    return Level.PRESENT


def _unique_name(rng: random.Random, used: "dict[str, int]") -> str:
    base = f"{rng.choice(_ADJECTIVES)} {rng.choice(_NOUNS)}"
    n = used.get(base, 0) + 1
    used[base] = n
    return base if n == 1 else f"{base} {n}"


def synth_structures(spec: FixtureSpec, rng: random.Random) -> "list[Structure]":
    """The abstract tree as Structure records, root first."""
    last = spec.stages
    used_names: dict[str, int] = {}
    next_alias = [100000]

    def alias_id() -> StructureId:
        next_alias[0] += 1
        return emap(next_alias[0])

    def span_aliases(lo: int, hi: int) -> "dict[int, StructureId]":
        # Staged ids for the first and last stage of existence.
        out = {lo: alias_id()}
        if hi != lo:
            out[hi] = alias_id()
        return out

    structures: list[Structure] = []
    intervals: dict[StructureId, tuple[int, int]] = {}

    def add(struct: Structure, lo: int, hi: int):
        structures.append(struct)
        intervals[struct.id] = (lo, hi)

    root_id = emapa(1)
    add(Structure(root_id, "mouse", frozenset(range(1, last + 1)),
                  aliases=span_aliases(1, last)), 1, last)

    # Exactly four structures accompany the root at stage 1.
    for _ in range(4):
        hi = last if last == 1 or rng.random() < 0.9 else rng.randint(1, last)
        sid = emapa(1 + len(structures))
        add(Structure(sid, _unique_name(rng, used_names), frozenset(range(1, hi + 1)),
                      parent=root_id, aliases=span_aliases(1, hi)), 1, hi)

    if spec.structures >= 6:
        aliases = {s: emap(n) for s, n in sorted(HEART_ALIASES.items()) if 2 <= s <= last}
        add(Structure(emapa(HEART_ID), "heart", frozenset(range(2, last + 1)),
                      parent=root_id, aliases=aliases, is_major_system=True), 2, last)
    if spec.structures >= 7:
        sid = emapa(1 + len(structures))
        add(Structure(sid, "central nervous system", frozenset(range(2, last + 1)),
                      parent=root_id, abbreviation="CNS", is_major_system=True), 2, last)

    while len(structures) < spec.structures:
        # Parent must survive past stage 1 so the child can start at 2.
        parent = structures[rng.randrange(len(structures))]
        p_lo, p_hi = intervals[parent.id]
        if p_hi < 2:
            continue
        lo = max(2, p_lo)
        if rng.random() >= 0.8:
            lo = min(p_hi, lo + rng.randint(1, 2))
        hi = p_hi if rng.random() < 0.98 else rng.randint(lo, p_hi)
        number = 1 + len(structures)
        if number >= HEART_ID:
            number += 1  # keep the fixed heart id unique
        sid = emapa(number)
        major = parent.id == root_id and rng.random() < 0.25
        name = _unique_name(rng, used_names)
        abbr = "".join(w[0] for w in name.split()).upper() if major else None
        add(Structure(sid, name, frozenset(range(lo, hi + 1)), parent=parent.id,
                      abbreviation=abbr, aliases=span_aliases(lo, hi),
                      is_major_system=major), lo, hi)

    return structures


def synth_gene_symbols(spec: FixtureSpec, rng: random.Random) -> "list[str]":
    """Unique symbols in alphabetical families (Pax1, Pax2, ...).

    Family numbering continues per base across draws, so any requested count
    is reachable (bases carry no digits, so base+number never collides).
    """
    symbols: list[str] = []
    counters: dict[str, int] = {}
    while len(symbols) < spec.genes:
        base = rng.choice(_GENE_SYLLABLES) + rng.choice(_GENE_SYLLABLES).lower()
        family = rng.randint(1, 6)
        start = counters.get(base, 0)
        counters[base] = start + family
        for k in range(start + 1, start + family + 1):
            symbols.append(f"{base}{k}")
            if len(symbols) == spec.genes:
                break
    return symbols


def synth_annotations(spec: FixtureSpec, structures: "list[Structure]",
                      genes: "list[str]", rng: random.Random) -> "list[Annotation]":
    """At least one annotation per gene, deduplicated on (gene, structure, stage)."""
    total = max(spec.genes, round(spec.density * spec.genes))
    annotations: list[Annotation] = []
    taken: set[tuple[str, StructureId, int]] = set()
    ref_counter = 0

    def draw(gene: str) -> Optional[Annotation]:
        nonlocal ref_counter
        for _ in range(40):
            s = structures[rng.randrange(len(structures))]
            stage = rng.choice(sorted(s.stages))
            key = (gene.casefold(), s.id, stage)
            if key in taken:
                continue
            taken.add(key)
            ref_counter += 1
            ref = f"EXP:{ref_counter}" if rng.random() < 0.5 else None
            return Annotation(gene, s.id, stage, _weighted_level(rng), ref)
        return None

    for gene in genes:
        a = draw(gene)
        if a is not None:
            annotations.append(a)
    while len(annotations) < total:
        a = draw(genes[rng.randrange(len(genes))])
        if a is None:
            break
        annotations.append(a)
    annotations.sort(key=lambda a: (a.gene.casefold(), a.stage, a.structure.number))
    return annotations


def _stage_tokens(stages: frozenset[int]) -> "list[Any]":
    """Contiguous runs of three or more collapse to interval strings."""
    ordered = sorted(stages)
    tokens: list[Any] = []
    i = 0
    while i < len(ordered):
        j = i
        while j + 1 < len(ordered) and ordered[j + 1] == ordered[j] + 1:
            j += 1
        if j - i >= 2:
            tokens.append(f"{ordered[i]}-{ordered[j]}")
        else:
            tokens.extend(ordered[i:j + 1])
        i = j + 1
    return tokens


def anatomy_doc(structures: "list[Structure]") -> "dict[str, Any]":
    docs = []
    for s in structures:
        doc: dict[str, Any] = {"id": s.id.text, "name": s.name}
        if s.abbreviation is not None:
            doc["abbr"] = s.abbreviation
        if s.parent is not None:
            doc["parent"] = s.parent.text
        doc["stages"] = _stage_tokens(s.stages)
        if s.aliases:
            doc["aliases"] = {str(k): v.text for k, v in sorted(s.aliases.items())}
        if s.is_major_system:
            doc["major_system"] = True
        docs.append(doc)
    return {"format": "atlasburst-anatomy/1", "root": structures[0].id.text,
            "structures": docs}


def annotation_lines(annotations: "list[Annotation]") -> "list[str]":
    lines = []
    for a in annotations:
        record: dict[str, Any] = {
            "gene": a.gene, "structure": a.structure.text,
            "stage": a.stage, "level": a.level.value,
        }
        if a.source_ref is not None:
            record["ref"] = a.source_ref
        lines.append(json.dumps(record, ensure_ascii=False, separators=(",", ":")))
    return lines


def build_fixture(spec: FixtureSpec) -> "tuple[Anatomy, AnnotationStore]":
    """In-memory fixture, bypassing the file round trip."""
    rng = random.Random(spec.seed)
    structures = synth_structures(spec, rng)
    genes = synth_gene_symbols(spec, rng)
    annotations = synth_annotations(spec, structures, genes, rng)
    anatomy = Anatomy(structures[0].id, {s.id: s for s in structures})
    store, _ = AnnotationStore.build(annotations, anatomy)
    return anatomy, store


def generate_fixtures(spec: FixtureSpec, out_dir) -> "tuple[Path, Path]":
    """Write anatomy.json and annotations.jsonl; byte-identical per seed."""
    rng = random.Random(spec.seed)
    structures = synth_structures(spec, rng)
    genes = synth_gene_symbols(spec, rng)
    annotations = synth_annotations(spec, structures, genes, rng)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    anatomy_path = out / "anatomy.json"
    annotation_path = out / "annotations.jsonl"
    anatomy_path.write_text(
        json.dumps(anatomy_doc(structures), indent=1, ensure_ascii=False) + "\n",
        encoding="utf-8")
    header = (f"# atlasburst fixture: structures={spec.structures} genes={spec.genes} "
              f"stages={spec.stages} density={spec.density} seed={spec.seed}")
    annotation_path.write_text(
        "\n".join([header, *annotation_lines(annotations)]) + "\n", encoding="utf-8")
    return anatomy_path, annotation_path
