#!/usr/bin/env python3
"""Measure the scale budgets on this machine: layout+compose at 2000 nodes,
cloud build at 19000 genes, SVG build for the 2000-node model."""

import statistics
import time

from atlasburst.anatomy import abstract_view
from atlasburst.cloud import build_cloud
from atlasburst.compose import GridSpec, compose_diagram, compose_grid
from atlasburst.expression import Annotation, AnnotationStore, Level
from atlasburst.fixtures import FixtureSpec, build_fixture
from atlasburst.svgrender import render_grid_svg


def median_ms(fn, runs=9):
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1000)
    return statistics.median(times)


def main():
    anatomy, store = build_fixture(FixtureSpec(structures=2000, genes=50, seed=42))
    gene = store.genes_at_stage(store.stages_with_annotations()[0])[0]

    compose_ms = median_ms(lambda: compose_diagram(
        anatomy, store, gene, 20, mode="abstract", kind="sunburst"))

    sids = [n.id for n in abstract_view(anatomy).nodes
            if 23 in anatomy.structures[n.id].stages]
    annotations = [Annotation(f"Gene{i}", sids[i % len(sids)], 23, Level.PRESENT)
                   for i in range(19000)]
    cloud_store, _ = AnnotationStore.build(annotations, anatomy)
    cloud_ms = median_ms(lambda: build_cloud(cloud_store, anatomy, 23))

    grid = compose_grid(anatomy, store,
                        GridSpec(cells=((gene, 20),), columns=1, mode="abstract"))
    svg_ms = median_ms(lambda: render_grid_svg(grid, cell_px=600))

    print(f"{'operation':<42}{'median':>10}{'budget':>10}")
    print(f"{'sunburst layout + compose, 2000 nodes':<42}{compose_ms:>8.1f}ms{'50ms':>10}")
    print(f"{'cloud build, 19000 genes':<42}{cloud_ms:>8.1f}ms{'200ms':>10}")
    print(f"{'render.svg, 2000-node model':<42}{svg_ms:>8.1f}ms{'150ms':>10}")


if __name__ == "__main__":
    main()
