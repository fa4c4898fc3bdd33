"""Developmental anatomy model.

One abstract partOf tree carries the canonical structure set; each of the
26 developmental stages is a derived restriction of it.  Structures are
keyed by abstract ids (``EMAPA:<n>``) and may carry per-stage alias ids
(``EMAP:<n>``) plus per-stage existence sets.

The anatomy is immutable after parsing and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

STAGE_MIN = 1
STAGE_MAX = 26

ANATOMY_FORMAT = "atlasburst-anatomy/1"

_STRUCTURE_KEYS = {"id", "name", "abbr", "parent", "stages", "aliases", "major_system", "isa"}
_TOP_KEYS = {"format", "root", "structures"}


class AnatomyError(Exception):
    """Raised when an anatomy source cannot be ingested.

    Carries the full list of findings so callers can report every problem,
    not just the first.
    """

    def __init__(self, findings: "list[Finding]"):
        self.findings = findings
        first = findings[0] if findings else None
        detail = f"{first.rule}: {first.detail}" if first else "unknown"
        more = f" (+{len(findings) - 1} more)" if len(findings) > 1 else ""
        super().__init__(f"invalid anatomy: {detail}{more}")


@dataclass(frozen=True, eq=False)
class StructureId:
    """Identifier of an anatomical structure.

    ``namespace`` is ``"abstract"`` (text form ``EMAPA:<n>``) or ``"staged"``
    (text form ``EMAP:<n>``).
    """

    namespace: str
    number: int

    def __post_init__(self):
        if self.namespace not in ("staged", "abstract"):
            raise ValueError(f"bad namespace {self.namespace!r}")
        if self.number < 0:
            raise ValueError("structure number must be non-negative")
        # Ids are dict keys on every hot path; cache the hash once.
        object.__setattr__(self, "_hash", hash((self.namespace, self.number)))

    def __eq__(self, other):
        if not isinstance(other, StructureId):
            return NotImplemented
        return self.number == other.number and self.namespace == other.namespace

    def __hash__(self):
        return self._hash

    @property
    def text(self) -> str:
        prefix = "EMAPA" if self.namespace == "abstract" else "EMAP"
        return f"{prefix}:{self.number}"

    def __str__(self) -> str:
        return self.text


def emapa(number: int) -> StructureId:
    return StructureId("abstract", number)


def emap(number: int) -> StructureId:
    return StructureId("staged", number)


def parse_structure_id(text: str) -> StructureId:
    """Parse ``EMAP:<n>`` / ``EMAPA:<n>``; inverse of ``StructureId.text``."""
    prefix, sep, num = text.partition(":")
    if not sep or not num.isdigit():
        raise ValueError(f"malformed structure id {text!r}")
    if prefix == "EMAPA":
        return emapa(int(num))
    if prefix == "EMAP":
        return emap(int(num))
    raise ValueError(f"unknown id namespace in {text!r}")


def check_stage(value: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or not STAGE_MIN <= value <= STAGE_MAX:
        raise ValueError(f"stage must be an integer in [{STAGE_MIN}, {STAGE_MAX}], got {value!r}")
    return value


@dataclass(frozen=True)
class Structure:
    """One abstract anatomical structure and its staged presence."""

    id: StructureId
    name: str
    stages: frozenset[int]
    parent: Optional[StructureId] = None
    abbreviation: Optional[str] = None
    aliases: "dict[int, StructureId]" = field(default_factory=dict)
    is_major_system: bool = False
    isa: "tuple[StructureId, ...]" = ()  # DAG edges, metadata only, never laid out


@dataclass(frozen=True)
class Finding:
    """A single validation finding; ``severity`` is ``"error"`` or ``"warning"``."""

    rule: str
    severity: str
    detail: str
    structure: Optional[StructureId] = None


class Anatomy:
    """The abstract partOf tree plus derived lookup tables."""

    def __init__(self, root: StructureId, structures: "dict[StructureId, Structure]"):
        self.root = root
        self.structures = structures
        self._children: dict[StructureId, tuple[StructureId, ...]] = {}
        self._alias_to_abstract: dict[StructureId, StructureId] = {}
        self._build_indexes()

    def _build_indexes(self):
        by_parent: dict[StructureId, list[Structure]] = {}
        for s in self.structures.values():
            if s.parent is not None and s.parent in self.structures:
                by_parent.setdefault(s.parent, []).append(s)
            for staged_id in s.aliases.values():
                # First writer wins; duplicates are reported by validate_anatomy.
                self._alias_to_abstract.setdefault(staged_id, s.id)
        for parent_id, kids in by_parent.items():
            kids.sort(key=sibling_sort_key)
            self._children[parent_id] = tuple(k.id for k in kids)

    def children(self, node: StructureId) -> "tuple[StructureId, ...]":
        """Children in deterministic sibling order."""
        return self._children.get(node, ())

    def __contains__(self, node: StructureId) -> bool:
        return node in self.structures

    def __len__(self) -> int:
        return len(self.structures)


def sibling_sort_key(s: Structure):
    # Case-insensitive name, ties broken by id number: fixed once so that
    # staged restrictions and the abstract tree always agree on order.
    return (s.name.casefold(), s.id.number)


class ViewNode(NamedTuple):
    id: StructureId
    depth: int
    parent: Optional[int]  # index of parent within the view, None for the view root


class StagedTree:
    """A preorder tree view: the anatomy restricted to one stage, or the
    full abstract tree when ``stage`` is None."""

    def __init__(self, stage: Optional[int], root: StructureId, nodes: "list[ViewNode]"):
        self.stage = stage
        self.root = root
        self.nodes = nodes
        self._index = {n.id: i for i, n in enumerate(nodes)}

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node: StructureId) -> bool:
        return node in self._index

    def index_of(self, node: StructureId) -> int:
        try:
            return self._index[node]
        except KeyError:
            raise KeyError(f"{node.text} not in view") from None

    def ids(self) -> "list[StructureId]":
        return [n.id for n in self.nodes]

    def max_depth(self) -> int:
        return max((n.depth for n in self.nodes), default=0)

    def subtree_sizes(self) -> "list[int]":
        """Node count of every subtree, by node index (self included)."""
        sizes = [1] * len(self.nodes)
        for i in range(len(self.nodes) - 1, 0, -1):
            parent = self.nodes[i].parent
            if parent is not None:
                sizes[parent] += sizes[i]
        return sizes


def _walk(anatomy: Anatomy, include) -> "list[ViewNode]":
    nodes: list[ViewNode] = []
    if anatomy.root not in anatomy.structures or not include(anatomy.root):
        return nodes
    stack: list[tuple[StructureId, int, Optional[int]]] = [(anatomy.root, 0, None)]
    while stack:
        sid, depth, parent_index = stack.pop()
        index = len(nodes)
        nodes.append(ViewNode(sid, depth, parent_index))
        kids = [c for c in anatomy.children(sid) if include(c)]
        for child in reversed(kids):
            stack.append((child, depth + 1, index))
    return nodes


def staged_view(anatomy: Anatomy, stage: int) -> StagedTree:
    """Restrict the anatomy to structures existing at ``stage``.

    A structure appears only when its whole ancestor chain exists at the
    stage; the walk simply never descends through an absent node.
    """
    check_stage(stage)
    nodes = _walk(anatomy, lambda sid: stage in anatomy.structures[sid].stages)
    return StagedTree(stage, anatomy.root, nodes)


def abstract_view(anatomy: Anatomy) -> StagedTree:
    """The full abstract tree; sibling order identical to every staged view."""
    nodes = _walk(anatomy, lambda sid: True)
    return StagedTree(None, anatomy.root, nodes)


def resolve_alias(anatomy: Anatomy, staged: StructureId) -> StructureId:
    """Map a staged id (``EMAP:<n>``) to the owning abstract id."""
    if staged.namespace != "staged":
        raise KeyError(f"{staged.text} is not a staged id")
    try:
        return anatomy._alias_to_abstract[staged]
    except KeyError:
        raise KeyError(f"unknown staged id {staged.text}") from None


def descendant_count(view: StagedTree, node: StructureId) -> int:
    """Number of strict descendants of ``node`` within this view."""
    index = view.index_of(node)
    return view.subtree_sizes()[index] - 1


def subtree_view(view: StagedTree, node: StructureId) -> StagedTree:
    """The view restricted to ``node`` and its descendants.

    Preorder keeps subtrees contiguous, so this is a slice with depths and
    parent indices rebased.
    """
    start = view.index_of(node)
    size = view.subtree_sizes()[start]
    base_depth = view.nodes[start].depth
    nodes = [ViewNode(view.nodes[start].id, 0, None)]
    for i in range(start + 1, start + size):
        old = view.nodes[i]
        assert old.parent is not None
        nodes.append(ViewNode(old.id, old.depth - base_depth, old.parent - start))
    return StagedTree(view.stage, node, nodes)


# ---------------------------------------------------------------------------
# validation


def validate_anatomy(anatomy: Anatomy) -> "list[Finding]":
    """Check every anatomy invariant; empty report means the anatomy is valid."""
    findings: list[Finding] = []

    def err(rule, detail, structure=None):
        findings.append(Finding(rule, "error", detail, structure))

    if anatomy.root not in anatomy.structures:
        err("ROOT_MISSING", f"declared root {anatomy.root.text} has no structure")
        return findings

    for s in anatomy.structures.values():
        if s.id.namespace != "abstract":
            err("NAMESPACE", f"structure id {s.id.text} is not abstract", s.id)
        if not s.stages:
            err("EMPTY_STAGES", "structure has an empty stage set", s.id)
        for stage in sorted(s.stages):
            if not STAGE_MIN <= stage <= STAGE_MAX:
                err("STAGE_RANGE", f"stage {stage} outside [{STAGE_MIN}, {STAGE_MAX}]", s.id)
        for stage, staged_id in sorted(s.aliases.items()):
            if stage not in s.stages:
                err("ALIAS_STAGE_MISMATCH",
                    f"alias {staged_id.text} declared for stage {stage} not in stage set", s.id)
            if staged_id.namespace != "staged":
                err("NAMESPACE", f"alias {staged_id.text} is not a staged id", s.id)
        if s.id == anatomy.root:
            if s.parent is not None:
                err("ROOT_HAS_PARENT", f"root has parent {s.parent.text}", s.id)
            continue
        if s.parent is None:
            err("EXTRA_ROOT", "non-root structure has no parent", s.id)
        elif s.parent not in anatomy.structures:
            err("MISSING_PARENT", f"parent {s.parent.text} does not exist", s.id)
        else:
            parent = anatomy.structures[s.parent]
            orphan_stages = sorted(s.stages - parent.stages)
            if orphan_stages:
                err("ORPHAN_AT_STAGE",
                    f"exists at stage(s) {orphan_stages} where parent {parent.id.text} does not",
                    s.id)

    # Parent-chain cycles: walk upward, memoizing chain status.
    status: dict[StructureId, str] = {}
    for start in anatomy.structures:
        if start in status:
            continue
        chain = []
        node: Optional[StructureId] = start
        while node is not None and node in anatomy.structures and node not in status:
            status[node] = "walking"
            chain.append(node)
            node = anatomy.structures[node].parent
            if node is not None and status.get(node) == "walking":
                err("CYCLE_DETECTED", f"parent chain cycles through {node.text}", node)
                node = None
                for c in chain:
                    status[c] = "cycle"
                chain = []
        for c in chain:
            status[c] = "ok"

    # Duplicate sibling names (case-insensitive, matching the sort key).
    for parent_id in sorted(anatomy._children, key=lambda i: i.number):
        seen: dict[str, StructureId] = {}
        for child_id in anatomy.children(parent_id):
            name = anatomy.structures[child_id].name.casefold()
            if name in seen:
                err("DUP_SIBLING_NAME",
                    f"siblings {seen[name].text} and {child_id.text} share the name {name!r}",
                    child_id)
            else:
                seen[name] = child_id

    # Alias injectivity: one staged id never maps to two structures.
    owners: dict[StructureId, StructureId] = {}
    for sid in sorted(anatomy.structures, key=lambda i: i.number):
        for stage, staged_id in sorted(anatomy.structures[sid].aliases.items()):
            if staged_id in owners and owners[staged_id] != sid:
                err("ALIAS_DUPLICATE",
                    f"staged id {staged_id.text} claimed by both {owners[staged_id].text} and {sid.text}",
                    sid)
            else:
                owners[staged_id] = sid

    return findings


# ---------------------------------------------------------------------------
# parsing


def _expand_stages(raw, err) -> frozenset[int]:
    stages: set[int] = set()
    if not isinstance(raw, list):
        err("BAD_VALUE", f"stages must be a list, got {type(raw).__name__}")
        return frozenset()
    for item in raw:
        if isinstance(item, int) and not isinstance(item, bool):
            values = [item]
        elif isinstance(item, str):
            lo, sep, hi = item.partition("-")
            if not sep or not lo.isdigit() or not hi.isdigit() or int(lo) > int(hi):
                err("BAD_VALUE", f"malformed stage interval {item!r}")
                continue
            values = list(range(int(lo), int(hi) + 1))
        else:
            err("BAD_VALUE", f"stage entry {item!r} is neither int nor interval")
            continue
        for v in values:
            if not STAGE_MIN <= v <= STAGE_MAX:
                err("STAGE_RANGE", f"stage {v} outside [{STAGE_MIN}, {STAGE_MAX}]")
            else:
                stages.add(v)
    return frozenset(stages)


def _structure_from_doc(doc: dict, strict: bool, findings: "list[Finding]") -> Optional[Structure]:
    sid_text = doc.get("id")

    def err(rule, detail):
        structure = None
        if isinstance(sid_text, str):
            try:
                structure = parse_structure_id(sid_text)
            except ValueError:
                pass
        findings.append(Finding(rule, "error", detail, structure))

    for key in doc:
        if key not in _STRUCTURE_KEYS:
            severity = "error" if strict else "warning"
            findings.append(Finding("UNKNOWN_KEY", severity,
                                    f"unknown key {key!r} in structure {sid_text!r}"))
            if strict:
                return None

    try:
        sid = parse_structure_id(doc["id"])
    except (KeyError, TypeError, ValueError) as exc:
        err("BAD_VALUE", f"bad structure id: {exc}")
        return None
    if sid.namespace != "abstract":
        err("NAMESPACE", f"structure id {sid.text} must be abstract (EMAPA)")
        return None

    name = doc.get("name")
    if not isinstance(name, str) or not name:
        err("BAD_VALUE", f"structure {sid.text} needs a non-empty name")
        return None

    parent = None
    if doc.get("parent") is not None:
        try:
            parent = parse_structure_id(doc["parent"])
        except (TypeError, ValueError) as exc:
            err("BAD_VALUE", f"bad parent for {sid.text}: {exc}")
            return None

    stages = _expand_stages(doc.get("stages", []), err)

    aliases: dict[int, StructureId] = {}
    raw_aliases = doc.get("aliases", {})
    if not isinstance(raw_aliases, dict):
        err("BAD_VALUE", f"aliases of {sid.text} must be an object")
        return None
    for key, value in raw_aliases.items():
        if not isinstance(key, str) or not key.isdigit():
            err("BAD_VALUE", f"alias stage key {key!r} of {sid.text} is not a stage number")
            continue
        stage = int(key)
        if not STAGE_MIN <= stage <= STAGE_MAX:
            err("STAGE_RANGE", f"alias stage {stage} outside [{STAGE_MIN}, {STAGE_MAX}]")
            continue
        try:
            staged_id = parse_structure_id(value)
        except (TypeError, ValueError) as exc:
            err("BAD_VALUE", f"bad alias id for {sid.text}: {exc}")
            continue
        aliases[stage] = staged_id

    isa: tuple[StructureId, ...] = ()
    if "isa" in doc:
        raw_isa = doc["isa"]
        if not isinstance(raw_isa, list):
            err("BAD_VALUE", f"isa of {sid.text} must be a list")
        else:
            try:
                isa = tuple(parse_structure_id(t) for t in raw_isa)
            except (TypeError, ValueError) as exc:
                err("BAD_VALUE", f"bad isa entry for {sid.text}: {exc}")

    abbr = doc.get("abbr")
    if abbr is not None and not isinstance(abbr, str):
        err("BAD_VALUE", f"abbr of {sid.text} must be a string")
        abbr = None

    return Structure(
        id=sid,
        name=name,
        stages=stages,
        parent=parent,
        abbreviation=abbr,
        aliases=aliases,
        is_major_system=bool(doc.get("major_system", False)),
        isa=isa,
    )


def _read_source(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data


def load_anatomy(source, strict: bool = True) -> "tuple[Optional[Anatomy], list[Finding]]":
    """Parse and validate; returns the anatomy (or None) plus every finding."""
    findings: list[Finding] = []
    text = _read_source(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        findings.append(Finding("SYNTAX", "error",
                                f"line {exc.lineno} column {exc.colno}: {exc.msg}"))
        return None, findings

    if not isinstance(doc, dict):
        findings.append(Finding("SYNTAX", "error", "top level must be a JSON object"))
        return None, findings
    if doc.get("format") != ANATOMY_FORMAT:
        findings.append(Finding("FORMAT", "error",
                                f"expected format {ANATOMY_FORMAT!r}, got {doc.get('format')!r}"))
        return None, findings
    for key in doc:
        if key not in _TOP_KEYS:
            severity = "error" if strict else "warning"
            findings.append(Finding("UNKNOWN_KEY", severity, f"unknown top-level key {key!r}"))
    if strict and any(f.severity == "error" for f in findings):
        return None, findings

    try:
        root = parse_structure_id(doc.get("root", ""))
    except (TypeError, ValueError) as exc:
        findings.append(Finding("BAD_VALUE", "error", f"bad root id: {exc}"))
        return None, findings

    structures: dict[StructureId, Structure] = {}
    raw_structures = doc.get("structures")
    if not isinstance(raw_structures, list):
        findings.append(Finding("BAD_VALUE", "error", "structures must be a list"))
        return None, findings
    for raw in raw_structures:
        if not isinstance(raw, dict):
            findings.append(Finding("BAD_VALUE", "error", "structure entry must be an object"))
            continue
        s = _structure_from_doc(raw, strict, findings)
        if s is None:
            continue
        if s.id in structures:
            findings.append(Finding("DUPLICATE_ID", "error",
                                    f"structure id {s.id.text} declared twice", s.id))
            continue
        structures[s.id] = s

    if any(f.severity == "error" for f in findings):
        return None, findings

    anatomy = Anatomy(root, structures)
    findings.extend(validate_anatomy(anatomy))
    if any(f.severity == "error" for f in findings):
        return None, findings
    return anatomy, findings


def parse_anatomy(source, strict: bool = True) -> Anatomy:
    """Parse an anatomy file, raising ``AnatomyError`` on any error finding."""
    anatomy, findings = load_anatomy(source, strict=strict)
    if anatomy is None:
        raise AnatomyError([f for f in findings if f.severity == "error"])
    return anatomy
