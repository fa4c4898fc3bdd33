#!/usr/bin/env python3
"""Capture service responses for the explorer UI contract tests.

Builds a small hand-written dataset (digit chain, eye subtree, heart),
serves it through the real app, and freezes the JSON bodies the UI will
request into frontend/tests/fixtures/ plus a manifest mapping URL to file.
The frontend test suite replays these documents through a mocked fetch, so
its assertions run against genuine engine output.
"""

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from conftest import MOUSE_ROWS, anatomy_json, ann_lines  # noqa: E402

from atlasburst.service import ServiceConfig, create_app  # noqa: E402

ANNOTATIONS = [
    ("Shh", "EMAPA:12", 14, "strong", "EXP:7"),     # digit: paw/limb turn pink
    ("Shh", "EMAPA:12", 15, "moderate", "EXP:8"),
    ("Bmp4", "EMAPA:31", 14, "weak"),               # future brain
    ("Bmp4", "EMAPA:31", 15, "strong", "EXP:101"),
    ("Pax6", "EMAPA:21", 14, "strong"),             # retina (eye subtree)
    ("Six3", "EMAPA:22", 14, "moderate"),           # lens (eye subtree)
    ("Otx2", "EMAPA:20", 14, "weak"),               # eye itself
]

URLS = [
    "/api/v1/meta",
    "/api/v1/anatomy?mode=abstract",
    "/api/v1/layout?kind=sunburst&mode=abstract",
    "/api/v1/layout?kind=icicle&mode=abstract",
    "/api/v1/layout?kind=sunburst&mode=staged&stage=14",
    "/api/v1/layout?kind=sunburst&mode=staged&stage=15",
    "/api/v1/layout?kind=sunburst&mode=abstract&root=EMAPA:1",
    "/api/v1/layout?kind=sunburst&mode=abstract&root=EMAPA:20",
    "/api/v1/layout?kind=icicle&mode=abstract&root=EMAPA:20",
    "/api/v1/expression?gene=Shh&stage=14&mode=abstract",
    "/api/v1/expression?gene=Shh&stage=15&mode=abstract",
    "/api/v1/expression?gene=Shh&stage=14&mode=staged",
    "/api/v1/expression?gene=Bmp4&stage=14&mode=abstract",
    "/api/v1/expression?gene=Bmp4&stage=15&mode=abstract",
    "/api/v1/expression?gene=Pax6&stage=14&mode=abstract",
    "/api/v1/expression?gene=Pax6&stage=15&mode=abstract",
    "/api/v1/expression?gene=Otx2&stage=14&mode=abstract",
    "/api/v1/cloud?stage=14",
    "/api/v1/cloud?stage=15",
    "/api/v1/cloud?stage=14&structure=EMAPA:20",
    "/api/v1/cloud?stage=14&q=Pa",
]


def slug(url: str) -> str:
    name = url.replace("/api/v1/", "").replace("?", "__").replace("&", "_")
    return name.replace("=", "-").replace(":", "").replace(".", "_") + ".json"


def main():
    out = REPO / "frontend" / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)

    data = out / "_data"
    data.mkdir(exist_ok=True)
    (data / "anatomy.json").write_text(anatomy_json("EMAPA:1", MOUSE_ROWS),
                                       encoding="utf-8")
    (data / "annotations.jsonl").write_text(ann_lines(ANNOTATIONS), encoding="utf-8")

    app = create_app(ServiceConfig(data_dir=data))
    manifest = {}
    with TestClient(app) as client:
        for url in URLS:
            response = client.get(url)
            assert response.status_code == 200, f"{url}: {response.status_code}"
            name = slug(url)
            (out / name).write_bytes(response.content)
            manifest[url] = name
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n",
                                       encoding="utf-8")
    print(f"captured {len(manifest)} documents into {out}")


if __name__ == "__main__":
    main()
