"""Textual annotations and derived expression states.

An annotation records that a gene is expressed (at some strength) in one
structure at one stage.  Positive expression flows up the partOf tree:
if a gene is expressed in the digit it is also expressed in the paw and
the limb.  Negative expression is never propagated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .anatomy import (
    Anatomy,
    StagedTree,
    StructureId,
    abstract_view,
    check_stage,
    parse_structure_id,
    staged_view,
)

MAX_GENE_LENGTH = 64


class Level(str, Enum):
    STRONG = "strong"
    MODERATE = "moderate"
    WEAK = "weak"
    PRESENT = "present"
    NOT_DETECTED = "not_detected"

    @property
    def positive(self) -> bool:
        return self is not Level.NOT_DETECTED


# Conflict precedence for duplicate (gene, structure, stage) records:
# keep the most informative positive claim.
_PRECEDENCE = {
    Level.STRONG: 4,
    Level.MODERATE: 3,
    Level.WEAK: 2,
    Level.PRESENT: 1,
    Level.NOT_DETECTED: 0,
}


def gene_key(symbol: str) -> str:
    """Canonical comparison key; gene symbols compare case-insensitively."""
    return symbol.casefold()


def check_gene_symbol(symbol: str) -> str:
    if not symbol or len(symbol) > MAX_GENE_LENGTH or any(c.isspace() for c in symbol):
        raise ValueError(f"bad gene symbol {symbol!r}")
    return symbol


@dataclass(frozen=True)
class Annotation:
    gene: str
    structure: StructureId
    stage: int
    level: Level
    source_ref: Optional[str] = None


@dataclass(frozen=True)
class Conflict:
    """A duplicate (gene, structure, stage) record resolved by precedence."""

    gene: str
    structure: StructureId
    stage: int
    kept: Level
    dropped: Level


class AnnotationError(Exception):
    """Raised when an annotation source cannot be ingested."""

    def __init__(self, line: int, detail: str):
        self.line = line
        self.detail = detail
        super().__init__(f"line {line}: {detail}")


class AnnotationStore:
    """Immutable indexed collection of annotations.

    After conflict resolution each (gene, structure, stage) holds exactly
    one level.  Lookups are case-insensitive on the gene symbol; the first
    seen spelling is kept for display.
    """

    def __init__(self):
        self._by_gene_stage: dict[tuple[str, int], dict[StructureId, Annotation]] = {}
        self._by_structure_stage: dict[tuple[StructureId, int], dict[str, Annotation]] = {}
        self._genes_by_stage: dict[int, set[str]] = {}
        self._display: dict[str, str] = {}

    @classmethod
    def build(cls, annotations: Iterable[Annotation], anatomy: Anatomy
              ) -> "tuple[AnnotationStore, list[Conflict]]":
        store = cls()
        conflicts: list[Conflict] = []
        for a in annotations:
            check_gene_symbol(a.gene)
            check_stage(a.stage)
            if a.structure not in anatomy.structures:
                raise ValueError(f"unknown structure {a.structure.text}")
            if a.stage not in anatomy.structures[a.structure].stages:
                raise ValueError(
                    f"structure {a.structure.text} does not exist at stage {a.stage}")
            dropped = store._insert(a)
            if dropped is not None:
                conflicts.append(dropped)
        return store, conflicts

    def _insert(self, a: Annotation) -> Optional[Conflict]:
        key = gene_key(a.gene)
        self._display.setdefault(key, a.gene)
        slot = self._by_gene_stage.setdefault((key, a.stage), {})
        previous = slot.get(a.structure)
        winner = a
        conflict = None
        if previous is not None:
            if _PRECEDENCE[a.level] > _PRECEDENCE[previous.level]:
                conflict = Conflict(self._display[key], a.structure, a.stage,
                                    kept=a.level, dropped=previous.level)
            else:
                winner = previous
                conflict = Conflict(self._display[key], a.structure, a.stage,
                                    kept=previous.level, dropped=a.level)
        slot[a.structure] = winner
        self._by_structure_stage.setdefault((a.structure, a.stage), {})[key] = winner
        self._genes_by_stage.setdefault(a.stage, set()).add(key)
        return conflict

    # -- queries -----------------------------------------------------------

    def direct_level(self, gene: str, structure: StructureId, stage: int) -> Optional[Level]:
        slot = self._by_gene_stage.get((gene_key(gene), stage))
        if slot is None:
            return None
        a = slot.get(structure)
        return a.level if a is not None else None

    def direct_annotations(self, gene: str, stage: int) -> "dict[StructureId, Annotation]":
        return self._by_gene_stage.get((gene_key(gene), stage), {})

    def annotation_count(self, gene: str, stage: int) -> int:
        return len(self._by_gene_stage.get((gene_key(gene), stage), {}))

    def genes_at_stage(self, stage: int) -> "list[str]":
        """Display symbols annotated at a stage, sorted case-insensitively."""
        keys = self._genes_by_stage.get(stage, set())
        return sorted((self._display[k] for k in keys), key=gene_key)

    def genes_at_structure(self, structure: StructureId, stage: int) -> "list[str]":
        keys = self._by_structure_stage.get((structure, stage), {})
        return sorted((self._display[k] for k in keys), key=gene_key)

    def display_symbol(self, gene: str) -> str:
        return self._display.get(gene_key(gene), gene)

    def total_annotations(self) -> int:
        return sum(len(slot) for slot in self._by_gene_stage.values())

    def gene_count(self) -> int:
        return len(self._display)

    def stages_with_annotations(self) -> "list[int]":
        return sorted(s for s, genes in self._genes_by_stage.items() if genes)


def parse_annotations(source, anatomy: Anatomy) -> "tuple[AnnotationStore, list[Conflict]]":
    """Ingest newline-delimited JSON annotation records.

    Lines starting with ``#`` are comments.  Any malformed record aborts the
    whole ingest with the offending line number.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    annotations: list[Annotation] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            record = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise AnnotationError(lineno, f"bad JSON: {exc.msg}") from None
        if not isinstance(record, dict):
            raise AnnotationError(lineno, "record must be a JSON object")
        try:
            gene = check_gene_symbol(record["gene"])
        except (KeyError, TypeError, ValueError):
            raise AnnotationError(lineno, f"bad gene symbol {record.get('gene')!r}") from None
        try:
            structure = parse_structure_id(record["structure"])
        except (KeyError, TypeError, ValueError) as exc:
            raise AnnotationError(lineno, f"bad structure id: {exc}") from None
        try:
            stage = check_stage(record["stage"])
        except (KeyError, ValueError) as exc:
            raise AnnotationError(lineno, f"bad stage: {exc}") from None
        try:
            level = Level(record["level"])
        except (KeyError, ValueError):
            raise AnnotationError(lineno, f"unknown level token {record.get('level')!r}") from None
        if structure not in anatomy.structures:
            raise AnnotationError(lineno, f"unknown structure {structure.text}")
        if stage not in anatomy.structures[structure].stages:
            raise AnnotationError(
                lineno, f"structure {structure.text} does not exist at stage {stage}")
        ref = record.get("ref")
        if ref is not None and not isinstance(ref, str):
            raise AnnotationError(lineno, "ref must be a string")
        annotations.append(Annotation(gene, structure, stage, level, ref))

    return AnnotationStore.build(annotations, anatomy)


# ---------------------------------------------------------------------------
# expression states


@dataclass(frozen=True)
class ExpressionState:
    """Per-node state: a direct level, or one of the derived markers."""

    kind: str  # "direct" | "propagated" | "no_info" | "not_present"
    level: Optional[Level] = None

    @property
    def state_class(self) -> str:
        """Palette key: the level name for direct states, else the kind."""
        if self.kind == "direct":
            assert self.level is not None
            return self.level.value
        return self.kind

    @property
    def positive(self) -> bool:
        if self.kind == "direct":
            return self.level.positive
        return self.kind == "propagated"


PROPAGATED = ExpressionState("propagated")
NO_INFO = ExpressionState("no_info")
NOT_PRESENT = ExpressionState("not_present")


def direct(level: Level) -> ExpressionState:
    return ExpressionState("direct", level)


@dataclass
class StateMap:
    gene: str
    stage: int
    mode: str  # "staged" | "abstract"
    states: "dict[StructureId, ExpressionState]"


def check_mode(mode: str) -> str:
    if mode not in ("staged", "abstract"):
        raise ValueError(f"mode must be 'staged' or 'abstract', got {mode!r}")
    return mode


def view_for_mode(anatomy: Anatomy, stage: int, mode: str) -> StagedTree:
    return abstract_view(anatomy) if mode == "abstract" else staged_view(anatomy, stage)


def propagate_states(store: AnnotationStore, anatomy: Anatomy, gene: str, stage: int,
                     mode: str = "staged", view: Optional[StagedTree] = None) -> StateMap:
    """Resolve the per-node state for one gene at one stage.

    A direct annotation always wins; otherwise a node is ``propagated`` when
    any strict descendant in the view carries a direct positive annotation,
    and ``no_info`` when none does.  In abstract mode, structures absent at
    the stage are ``not_present`` regardless of other stages.  Unknown genes
    are not an error: every node simply reports no information.
    """
    check_stage(stage)
    check_mode(mode)
    if view is None:
        view = view_for_mode(anatomy, stage, mode)
    directs = store.direct_annotations(gene, stage)

    n = len(view.nodes)
    # positive_below[i]: some strict descendant of i has a direct positive level.
    positive_below = [False] * n
    for i in range(n - 1, 0, -1):
        node = view.nodes[i]
        a = directs.get(node.id)
        self_positive = a is not None and a.level.positive
        if (self_positive or positive_below[i]) and node.parent is not None:
            positive_below[node.parent] = True

    states: dict[StructureId, ExpressionState] = {}
    for i, node in enumerate(view.nodes):
        if mode == "abstract" and stage not in anatomy.structures[node.id].stages:
            # Annotations are validated against existence, so an absent node
            # can never also hold a direct annotation at this stage.
            states[node.id] = NOT_PRESENT
            continue
        a = directs.get(node.id)
        if a is not None:
            states[node.id] = direct(a.level)
        elif positive_below[i]:
            states[node.id] = PROPAGATED
        else:
            states[node.id] = NO_INFO
    return StateMap(store.display_symbol(gene), stage, mode, states)


def expression_profile(store: AnnotationStore, anatomy: Anatomy, gene: str,
                       stage: int) -> "set[StructureId]":
    """The upward-closed positive set: directly positive or propagated nodes
    of the staged view."""
    state_map = propagate_states(store, anatomy, gene, stage, mode="staged")
    return {sid for sid, state in state_map.states.items() if state.positive}


def profile_subset(store: AnnotationStore, anatomy: Anatomy, g1: str, g2: str,
                   stage: int) -> "tuple[bool, Optional[StructureId]]":
    """Whether g1's profile is contained in g2's; a witness id when not."""
    p1 = expression_profile(store, anatomy, g1, stage)
    p2 = expression_profile(store, anatomy, g2, stage)
    missing = p1 - p2
    if not missing:
        return True, None
    witness = min(missing, key=lambda sid: sid.number)
    return False, witness


def annotation_count(store: AnnotationStore, gene: str, stage: int) -> int:
    return store.annotation_count(gene, stage)
