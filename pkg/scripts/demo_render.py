#!/usr/bin/env python3
"""Render a demo set of diagrams from a generated dataset.

Writes sunburst/icicle singles, a stage-series grid, and a gene-family grid
into the output directory, plus the dataset itself for poking at with the
CLI or service.
"""

import argparse
from pathlib import Path

from atlasburst.anatomy import parse_anatomy
from atlasburst.compose import GridSpec, compose_diagram, compose_grid
from atlasburst.expression import parse_annotations
from atlasburst.fixtures import FixtureSpec, generate_fixtures
from atlasburst.svgrender import render_grid_svg, render_svg


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out", help="output directory")
    parser.add_argument("--structures", type=int, default=400)
    parser.add_argument("--genes", type=int, default=40)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    out = Path(args.out)
    data = out / "data"
    anatomy_path, annotation_path = generate_fixtures(
        FixtureSpec(structures=args.structures, genes=args.genes, seed=args.seed), data)
    anatomy = parse_anatomy(anatomy_path.read_bytes())
    store, _ = parse_annotations(annotation_path.read_bytes(), anatomy)

    stage = max(store.stages_with_annotations(),
                key=lambda s: len(store.genes_at_stage(s)))
    genes = store.genes_at_stage(stage)[:4]
    gene = genes[0]
    print(f"dataset: {args.structures} structures, {args.genes} genes")
    print(f"rendering {gene} at TS{stage} and friends {genes[1:]}")

    single = compose_diagram(anatomy, store, gene, stage, mode="abstract", kind="sunburst")
    (out / "sunburst.svg").write_text(render_svg(single, 700), encoding="utf-8")

    icicle = compose_diagram(anatomy, store, gene, stage, mode="abstract", kind="icicle")
    (out / "icicle.svg").write_text(render_svg(icicle, 700), encoding="utf-8")

    stages = [s for s in range(max(2, stage - 3), stage + 1)]
    series = compose_grid(anatomy, store, GridSpec(
        cells=tuple((gene, s) for s in stages), columns=len(stages), mode="abstract"))
    (out / "stage_series.svg").write_text(render_grid_svg(series, 260), encoding="utf-8")

    family = compose_grid(anatomy, store, GridSpec(
        cells=tuple((g, stage) for g in genes), columns=2, mode="abstract"))
    (out / "gene_family.svg").write_text(render_grid_svg(family, 320), encoding="utf-8")

    for name in ("sunburst.svg", "icicle.svg", "stage_series.svg", "gene_family.svg"):
        print(f"wrote {out / name}")


if __name__ == "__main__":
    main()
