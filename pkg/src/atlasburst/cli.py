"""Operator command line.

Subcommands: validate, render, compare, cloud, serve, fixtures.
Exit codes: 0 success, 1 validation findings, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .anatomy import AnatomyError, load_anatomy, parse_structure_id
from .cloud import build_cloud
from .compose import DEFAULT_PALETTE, GridSpec, compose_diagram, compose_grid, load_palette
from .docio import canon_dumps
from .expression import AnnotationError, parse_annotations, profile_subset
from .fixtures import FixtureSpec, generate_fixtures
from .svgrender import render_grid_svg, render_svg


def _data_dir(args) -> Path:
    raw = args.data or os.environ.get("ATLASBURST_DATA")
    if not raw:
        raise SystemExit("no data directory: pass --data or set ATLASBURST_DATA")
    return Path(raw)


def _load(args):
    data = _data_dir(args)
    anatomy_path = data / "anatomy.json"
    annotation_path = data / "annotations.jsonl"
    anatomy, findings = load_anatomy(anatomy_path.read_bytes(),
                                     strict=not getattr(args, "lenient", False))
    if anatomy is None:
        for f in findings:
            print(f"{f.severity}: {f.rule}: {f.detail}", file=sys.stderr)
        raise SystemExit(1)
    store, conflicts = parse_annotations(annotation_path.read_bytes(), anatomy)
    return anatomy, store, findings, conflicts


def _write_output(text: str, destination: str):
    if destination == "-":
        sys.stdout.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")


def cmd_validate(args) -> int:
    data = _data_dir(args)
    anatomy, findings = load_anatomy((data / "anatomy.json").read_bytes(),
                                     strict=not args.lenient)
    total = 0
    for f in findings:
        total += 1
        print(f"{f.severity}: {f.rule}: {f.detail}")
    if anatomy is not None:
        try:
            _store, conflicts = parse_annotations((data / "annotations.jsonl").read_bytes(),
                                                  anatomy)
        except AnnotationError as exc:
            total += 1
            print(f"error: ANNOTATION: {exc}")
        else:
            for c in conflicts:
                total += 1
                print(f"warning: CONFLICT: {c.gene} at {c.structure.text} TS{c.stage}: "
                      f"kept {c.kept.value}, dropped {c.dropped.value}")
    print(f"{total} findings")
    return 0 if total == 0 else 1


def cmd_render(args) -> int:
    anatomy, store, _, _ = _load(args)
    palette = load_palette(Path(args.palette).read_bytes()) if args.palette else DEFAULT_PALETTE
    genes = [g for g in args.gene.split(",") if g]
    stages = [int(s) for s in args.stage.split(",") if s]
    if len(genes) == 1 and len(stages) == 1:
        model = compose_diagram(anatomy, store, genes[0], stages[0],
                                mode=args.mode, kind=args.kind, palette=palette)
        _write_output(render_svg(model, size_px=args.size), args.output)
    else:
        cells = tuple((g, s) for g in genes for s in stages)
        columns = args.columns or (len(stages) if len(stages) > 1 else len(genes))
        spec = GridSpec(cells=cells, columns=columns, mode=args.mode, kind=args.kind)
        grid = compose_grid(anatomy, store, spec, palette)
        _write_output(render_grid_svg(grid, cell_px=args.size), args.output)
    return 0


def cmd_compare(args) -> int:
    anatomy, store, _, _ = _load(args)
    genes = [g for g in args.genes.split(",") if g]
    if len(genes) < 2:
        raise SystemExit("compare needs at least two genes")
    stage = args.stage
    relations = {}
    for g1 in genes:
        for g2 in genes:
            sub, _ = profile_subset(store, anatomy, g1, g2, stage)
            sup, _ = profile_subset(store, anatomy, g2, g1, stage)
            if sub and sup:
                relations[(g1, g2)] = "="
            elif sub:
                relations[(g1, g2)] = "⊆"
            elif sup:
                relations[(g1, g2)] = "⊇"
            else:
                relations[(g1, g2)] = "·"
    width = max(len(g) for g in genes)
    print(" " * width + "  " + "  ".join(g.rjust(width) for g in genes))
    for g1 in genes:
        row = "  ".join(relations[(g1, g2)].rjust(width) for g2 in genes)
        print(f"{g1.rjust(width)}  {row}")
    return 0


def cmd_cloud(args) -> int:
    anatomy, store, _, _ = _load(args)
    structure = parse_structure_id(args.structure) if args.structure else None
    model = build_cloud(store, anatomy, args.stage, structure)
    _write_output(canon_dumps(model.to_doc()) + "\n", args.output)
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    config = ServiceConfig(
        data_dir=_data_dir(args),
        host=args.host,
        port=args.port,
        palette_path=Path(args.palette) if args.palette else None,
        strict=not args.lenient,
        cache_size=args.cache_size,
    )
    serve(config)
    return 0


def cmd_fixtures(args) -> int:
    spec = FixtureSpec(structures=args.structures, genes=args.genes,
                       stages=args.stages, density=args.density, seed=args.seed)
    anatomy_path, annotation_path = generate_fixtures(spec, args.out)
    print(f"wrote {anatomy_path}")
    print(f"wrote {annotation_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atlasburst",
        description="gene expression sunbursts and icicles over a staged anatomy")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data(p):
        p.add_argument("--data", help="data directory (default: $ATLASBURST_DATA)")
        p.add_argument("--lenient", action="store_true",
                       help="warn instead of reject on unknown file keys")

    p = sub.add_parser("validate", help="check a data directory and list findings")
    add_data(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="render a diagram or grid to SVG")
    add_data(p)
    p.add_argument("--gene", required=True, help="gene symbol(s), comma separated")
    p.add_argument("--stage", required=True, help="stage(s), comma separated")
    p.add_argument("--kind", choices=["sunburst", "icicle"], default="sunburst")
    p.add_argument("--mode", choices=["staged", "abstract"], default="abstract")
    p.add_argument("--size", type=int, default=600, help="cell size in pixels")
    p.add_argument("--columns", type=int, default=0, help="grid columns (0 = auto)")
    p.add_argument("--palette", help="palette config JSON path")
    p.add_argument("-o", "--output", default="-", help="output file, or - for stdout")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("compare", help="pairwise profile containment matrix")
    add_data(p)
    p.add_argument("--genes", required=True, help="comma separated gene symbols")
    p.add_argument("--stage", required=True, type=int)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cloud", help="gene cloud document for one stage")
    add_data(p)
    p.add_argument("--stage", required=True, type=int)
    p.add_argument("--structure", help="restrict to one structure's subtree")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_cloud)

    p = sub.add_parser("serve", help="run the HTTP service")
    add_data(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--palette", help="palette config JSON path")
    p.add_argument("--cache-size", type=int, default=128)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("fixtures", help="generate a deterministic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--structures", type=int, default=2000)
    p.add_argument("--genes", type=int, default=500)
    p.add_argument("--stages", type=int, default=26)
    p.add_argument("--density", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixtures)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SystemExit as exc:
        if isinstance(exc.code, int):
            return exc.code
        print(exc.code, file=sys.stderr)
        return 1
    except (AnatomyError, AnnotationError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())
