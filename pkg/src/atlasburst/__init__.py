"""Stage-stable sunburst and icicle views of in-situ gene expression.

The pipeline: parse a staged anatomy ontology and its textual annotations,
propagate positive expression up the partOf tree, lay the tree out as a
weighted partition (radial or linear), join states with a palette into
render models, and emit deterministic SVG, JSON documents, or serve it
all over HTTP for the explorer UI.
"""

from .anatomy import (
    Anatomy,
    AnatomyError,
    Finding,
    StagedTree,
    Structure,
    StructureId,
    abstract_view,
    descendant_count,
    emap,
    emapa,
    parse_anatomy,
    parse_structure_id,
    resolve_alias,
    staged_view,
    subtree_view,
    validate_anatomy,
)
from .cloud import CloudModel, CloudNode, build_cloud, cloud_layout, search_prefix, toggle_selection
from .compose import (
    DEFAULT_PALETTE,
    GridSpec,
    Palette,
    RenderModel,
    color_of,
    compose_diagram,
    compose_grid,
    load_palette,
)
from .expression import (
    Annotation,
    AnnotationError,
    AnnotationStore,
    ExpressionState,
    Level,
    StateMap,
    annotation_count,
    expression_profile,
    parse_annotations,
    profile_subset,
    propagate_states,
)
from .fixtures import FixtureSpec, build_fixture, generate_fixtures
from .layout import (
    Label,
    LayoutParams,
    NodeArc,
    NodeRect,
    compute_weights,
    icicle_layout,
    plan_labels,
    reroot,
    sunburst_layout,
)
from .svgrender import render_grid_svg, render_svg

__version__ = "0.1.0"
