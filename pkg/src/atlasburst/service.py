"""HTTP service over an immutable ingested snapshot.

All read endpoints serve from one snapshot reference captured at request
start, so a concurrent reload can never mix data from two versions; reload
builds a complete new snapshot and swaps it in atomically (or keeps the
old one on failure).  Identical requests against one snapshot version
return byte-identical bodies.
"""

from __future__ import annotations

import hashlib
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import cloud as cloudmod
from .anatomy import (
    Anatomy,
    STAGE_MAX,
    StructureId,
    parse_anatomy,
    parse_structure_id,
    staged_view,
    subtree_view,
)
from .compose import DEFAULT_PALETTE, GridSpec, Palette, compose_grid, load_palette
from .docio import anatomy_view_doc, canon_dumps, geometry_doc
from .expression import (
    AnnotationStore,
    StateMap,
    check_mode,
    expression_profile,
    gene_key,
    parse_annotations,
    profile_subset,
    propagate_states,
    view_for_mode,
)
from .layout import EmptyViewError, LayoutParams, layout_view

VERSION_HEADER = "X-Snapshot-Version"


class SnapshotError(Exception):
    pass


class BadRequest(Exception):
    pass


class NotFound(Exception):
    pass


@dataclass
class ServiceConfig:
    data_dir: Path
    host: str = "127.0.0.1"
    port: int = 8000
    palette_path: Optional[Path] = None
    strict: bool = True
    cache_size: int = 128

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port {self.port} outside [1, 65535]")
        if not self.data_dir.is_dir():
            raise ValueError(f"data directory {self.data_dir} does not exist")


class Snapshot:
    """One fully validated dataset plus a bounded StateMap cache."""

    def __init__(self, anatomy: Anatomy, store: AnnotationStore, palette: Palette,
                 version: int, content_hash: str, cache_size: int = 128):
        self.anatomy = anatomy
        self.store = store
        self.palette = palette
        self.version = version
        self.content_hash = content_hash
        self._cache_size = cache_size
        self._cache: OrderedDict[tuple[str, int, str], StateMap] = OrderedDict()
        self._lock = threading.Lock()

    def state_map(self, gene: str, stage: int, mode: str) -> StateMap:
        """Cached propagate_states; transparent because the function is pure."""
        key = (gene_key(gene), stage, mode)
        if self._cache_size > 0:
            with self._lock:
                hit = self._cache.get(key)
                if hit is not None:
                    self._cache.move_to_end(key)
                    return hit
        result = propagate_states(self.store, self.anatomy, gene, stage, mode)
        if self._cache_size > 0:
            with self._lock:
                self._cache[key] = result
                self._cache.move_to_end(key)
                while len(self._cache) > self._cache_size:
                    self._cache.popitem(last=False)
        return result


def load_snapshot(config: ServiceConfig, version: int = 1) -> Snapshot:
    """Parse and validate the data directory; raises SnapshotError on any problem."""
    anatomy_path = config.data_dir / "anatomy.json"
    annotation_path = config.data_dir / "annotations.jsonl"
    for path in (anatomy_path, annotation_path):
        if not path.is_file():
            raise SnapshotError(f"missing data file {path}")
    anatomy_bytes = anatomy_path.read_bytes()
    annotation_bytes = annotation_path.read_bytes()
    digest = hashlib.sha256()
    digest.update(anatomy_bytes)
    digest.update(annotation_bytes)

    try:
        anatomy = parse_anatomy(anatomy_bytes, strict=config.strict)
    except Exception as exc:
        raise SnapshotError(f"anatomy: {exc}") from exc
    try:
        store, _conflicts = parse_annotations(annotation_bytes, anatomy)
    except Exception as exc:
        raise SnapshotError(f"annotations: {exc}") from exc

    palette = DEFAULT_PALETTE
    if config.palette_path is not None:
        palette_bytes = Path(config.palette_path).read_bytes()
        digest.update(palette_bytes)
        try:
            palette = load_palette(palette_bytes)
        except Exception as exc:
            raise SnapshotError(f"palette: {exc}") from exc

    return Snapshot(anatomy, store, palette, version, digest.hexdigest(),
                    cache_size=config.cache_size)


class AtlasState:
    """Holds the live snapshot; reload swaps it atomically."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._swap_lock = threading.Lock()
        self.snapshot = load_snapshot(config, version=1)

    def reload(self) -> Snapshot:
        with self._swap_lock:
            fresh = load_snapshot(self.config, version=self.snapshot.version + 1)
            self.snapshot = fresh
            return fresh


# -- request parsing helpers -------------------------------------------------


def _require(params, name: str) -> str:
    value = params.get(name)
    if value is None or value == "":
        raise BadRequest(f"missing parameter {name!r}")
    return value


def _parse_stage(raw: str) -> int:
    try:
        stage = int(raw)
    except ValueError:
        raise BadRequest(f"stage must be an integer, got {raw!r}") from None
    if not 1 <= stage <= STAGE_MAX:
        raise BadRequest(f"stage {stage} outside [1, {STAGE_MAX}]")
    return stage


def _parse_mode(params, default: str = "staged") -> str:
    mode = params.get("mode", default)
    try:
        return check_mode(mode)
    except ValueError as exc:
        raise BadRequest(str(exc)) from None


def _parse_kind(params, default: str = "sunburst") -> str:
    kind = params.get("kind", default)
    if kind not in ("sunburst", "icicle"):
        raise BadRequest(f"kind must be 'sunburst' or 'icicle', got {kind!r}")
    return kind


def _parse_structure(raw: str, anatomy: Anatomy) -> StructureId:
    try:
        sid = parse_structure_id(raw)
    except ValueError as exc:
        raise BadRequest(str(exc)) from None
    if sid.namespace != "abstract" or sid not in anatomy.structures:
        raise NotFound(f"unknown structure {raw}")
    return sid


def _parse_positive_int(params, name: str, default: int) -> int:
    raw = params.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise BadRequest(f"{name} must be an integer, got {raw!r}") from None
    if value < 1:
        raise BadRequest(f"{name} must be positive")
    return value


def _grid_spec(params, snapshot: Snapshot) -> GridSpec:
    genes = [g for g in _require(params, "genes").split(",") if g]
    if not genes:
        raise BadRequest("genes list is empty")
    stages = [_parse_stage(s) for s in _require(params, "stages").split(",") if s]
    if not stages:
        raise BadRequest("stages list is empty")
    kind = _parse_kind(params)
    mode = _parse_mode(params, default="abstract")
    cells = tuple((gene, stage) for gene in genes for stage in stages)
    default_columns = len(stages) if len(stages) > 1 else math.isqrt(len(cells) - 1) + 1
    columns = _parse_positive_int(params, "columns", default_columns)
    return GridSpec(cells=cells, columns=columns, mode=mode, kind=kind)


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="atlasburst", docs_url=None, redoc_url=None)
    # The explorer UI is served from a different origin during development.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["GET", "POST"], allow_headers=["*"])
    state = AtlasState(config)
    app.state.atlas = state

    def json_response(doc: Any, snapshot: Snapshot, status: int = 200) -> Response:
        return Response(
            content=canon_dumps(doc),
            status_code=status,
            media_type="application/json",
            headers={VERSION_HEADER: str(snapshot.version)},
        )

    def error_response(status: int, code: str, detail: str, snapshot: Snapshot) -> Response:
        return json_response({"error": code, "detail": detail}, snapshot, status)

    def endpoint(handler):
        """Capture one snapshot reference per request and map typed failures."""

        async def wrapped(request: Request) -> Response:
            snapshot = state.snapshot
            try:
                return handler(request.query_params, snapshot)
            except BadRequest as exc:
                return error_response(400, "bad_request", str(exc), snapshot)
            except NotFound as exc:
                return error_response(404, "not_found", str(exc), snapshot)

        # Keep route names distinct without functools.wraps: FastAPI must see
        # wrapped's own (request) signature, not the handler's.
        wrapped.__name__ = getattr(handler, "__name__", "endpoint")
        return wrapped

    def view_of(params, snapshot: Snapshot):
        mode = _parse_mode(params)
        if mode == "abstract":
            stage = None
            view = view_for_mode(snapshot.anatomy, 1, "abstract")
        else:
            stage = _parse_stage(_require(params, "stage"))
            view = staged_view(snapshot.anatomy, stage)
        return mode, stage, view

    # -- routes --------------------------------------------------------------

    @app.get("/api/v1/meta")
    @endpoint
    def meta(params, snapshot: Snapshot) -> Response:
        doc = {
            "stages": STAGE_MAX,
            "version": snapshot.version,
            "counts": {
                "structures": len(snapshot.anatomy),
                "annotations": snapshot.store.total_annotations(),
                "genes": snapshot.store.gene_count(),
            },
            "populated_stages": snapshot.store.stages_with_annotations(),
            "hash": snapshot.content_hash,
        }
        return json_response(doc, snapshot)

    @app.get("/api/v1/anatomy")
    @endpoint
    def anatomy_route(params, snapshot: Snapshot) -> Response:
        mode, _stage, view = view_of(params, snapshot)
        return json_response(anatomy_view_doc(snapshot.anatomy, view, mode), snapshot)

    @app.get("/api/v1/layout")
    @endpoint
    def layout_route(params, snapshot: Snapshot) -> Response:
        kind = _parse_kind(params)
        mode, stage, view = view_of(params, snapshot)
        root_param = params.get("root")
        if root_param:
            root = _parse_structure(root_param, snapshot.anatomy)
            if root not in view:
                raise NotFound(f"structure {root.text} not in this view")
            view = subtree_view(view, root)
        try:
            geometry = layout_view(view, LayoutParams(kind=kind))
        except EmptyViewError:
            geometry = []
        return json_response(geometry_doc(kind, mode, stage, geometry), snapshot)

    @app.get("/api/v1/expression")
    @endpoint
    def expression_route(params, snapshot: Snapshot) -> Response:
        gene = _require(params, "gene")
        stage = _parse_stage(_require(params, "stage"))
        mode = _parse_mode(params)
        states = snapshot.state_map(gene, stage, mode)
        profile = expression_profile(snapshot.store, snapshot.anatomy, gene, stage)
        view = view_for_mode(snapshot.anatomy, stage, mode)
        doc = {
            "states": {node.id.text: states.states[node.id].state_class
                       for node in view.nodes},
            "profile": [node.id.text for node in staged_view(snapshot.anatomy, stage).nodes
                        if node.id in profile],
        }
        return json_response(doc, snapshot)

    @app.get("/api/v1/subset")
    @endpoint
    def subset_route(params, snapshot: Snapshot) -> Response:
        g1 = _require(params, "g1")
        g2 = _require(params, "g2")
        stage = _parse_stage(_require(params, "stage"))
        subset, witness = profile_subset(snapshot.store, snapshot.anatomy, g1, g2, stage)
        doc: dict[str, Any] = {"subset": subset}
        if witness is not None:
            doc["witness"] = witness.text
        return json_response(doc, snapshot)

    @app.get("/api/v1/compose")
    @endpoint
    def compose_route(params, snapshot: Snapshot) -> Response:
        spec = _grid_spec(params, snapshot)
        grid = compose_grid(snapshot.anatomy, snapshot.store, spec, snapshot.palette)
        return json_response(grid.to_doc(), snapshot)

    @app.get("/api/v1/cloud")
    @endpoint
    def cloud_route(params, snapshot: Snapshot) -> Response:
        stage = _parse_stage(_require(params, "stage"))
        structure = None
        if params.get("structure"):
            structure = _parse_structure(params["structure"], snapshot.anatomy)
        try:
            model = cloudmod.build_cloud(snapshot.store, snapshot.anatomy, stage, structure)
        except KeyError as exc:
            raise NotFound(str(exc.args[0]) if exc.args else "unknown structure") from None
        prefix = params.get("q")
        if prefix:
            keep = set(cloudmod.search_prefix(model, prefix))
            nodes = [n for n in model.nodes if n.gene in keep]
            model = cloudmod.CloudModel(stage, structure, cloudmod.cloud_layout(nodes))
        return json_response(model.to_doc(), snapshot)

    @app.get("/api/v1/render.svg")
    @endpoint
    def render_route(params, snapshot: Snapshot) -> Response:
        from .svgrender import render_grid_svg

        spec = _grid_spec(params, snapshot)
        size = _parse_positive_int(params, "size", 300)
        grid = compose_grid(snapshot.anatomy, snapshot.store, spec, snapshot.palette)
        return Response(
            content=render_grid_svg(grid, cell_px=size),
            media_type="image/svg+xml",
            headers={VERSION_HEADER: str(snapshot.version)},
        )

    @app.post("/admin/reload")
    async def reload_route() -> Response:
        old = state.snapshot
        try:
            fresh = state.reload()
        except SnapshotError as exc:
            return Response(
                content=canon_dumps({"error": "reload_failed", "detail": str(exc)}),
                status_code=400,
                media_type="application/json",
                headers={VERSION_HEADER: str(old.version)},
            )
        return Response(
            content=canon_dumps({"version": fresh.version}),
            media_type="application/json",
            headers={VERSION_HEADER: str(fresh.version)},
        )

    return app


def serve(config: ServiceConfig):
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="info")
