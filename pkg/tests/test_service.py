import json

import pytest
from fastapi.testclient import TestClient

from atlasburst.fixtures import FixtureSpec, generate_fixtures
from atlasburst.service import AtlasState, ServiceConfig, SnapshotError, create_app, load_snapshot

SPEC = FixtureSpec(structures=150, genes=30, seed=42)


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    generate_fixtures(SPEC, out)
    return out


@pytest.fixture()
def client(data_dir):
    app = create_app(ServiceConfig(data_dir=data_dir))
    with TestClient(app) as c:
        yield c


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        ServiceConfig(data_dir=tmp_path / "missing")
    with pytest.raises(ValueError):
        ServiceConfig(data_dir=tmp_path, port=0)


def test_load_snapshot_version_one(data_dir):
    snapshot = load_snapshot(ServiceConfig(data_dir=data_dir))
    assert snapshot.version == 1
    assert len(snapshot.content_hash) == 64


def test_load_snapshot_missing_files(tmp_path):
    with pytest.raises(SnapshotError):
        load_snapshot(ServiceConfig(data_dir=tmp_path))


def test_load_rejects_unknown_structure(tmp_path, data_dir):
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "anatomy.json").write_bytes((data_dir / "anatomy.json").read_bytes())
    (bad / "annotations.jsonl").write_text(
        '{"gene":"g","structure":"EMAPA:99999","stage":3,"level":"weak"}\n')
    with pytest.raises(SnapshotError) as exc:
        load_snapshot(ServiceConfig(data_dir=bad))
    assert "line 1" in str(exc.value)
    assert "unknown structure" in str(exc.value)


def test_meta_route(client):
    r = client.get("/api/v1/meta")
    assert r.status_code == 200
    assert r.headers["X-Snapshot-Version"] == "1"
    doc = r.json()
    assert doc["stages"] == 26
    assert doc["counts"]["structures"] == 150
    assert doc["counts"]["genes"] == 30
    assert doc["version"] == 1
    assert doc["populated_stages"]


def test_anatomy_route(client):
    r = client.get("/api/v1/anatomy", params={"mode": "staged", "stage": 1})
    assert r.status_code == 200
    doc = r.json()
    assert len(doc["nodes"]) == 5
    assert doc["nodes"][0]["depth"] == 0


def test_anatomy_stage_out_of_range_is_400(client):
    r = client.get("/api/v1/anatomy", params={"mode": "staged", "stage": 27})
    assert r.status_code == 400
    assert r.json()["error"] == "bad_request"


def test_layout_route_contract(client):
    r = client.get("/api/v1/layout",
                   params={"kind": "sunburst", "mode": "abstract", "stage": 17})
    assert r.status_code == 200
    doc = r.json()
    assert doc["kind"] == "sunburst"
    assert "stage" not in doc
    assert len(doc["nodes"]) == 150
    node = doc["nodes"][0]
    assert node["id"] == "EMAPA:1"
    assert node["r0"] == 0.0


def test_layout_bad_kind(client):
    r = client.get("/api/v1/layout", params={"kind": "pie", "mode": "abstract"})
    assert r.status_code == 400


def test_layout_reroot_param(client):
    anatomy = client.get("/api/v1/anatomy", params={"mode": "abstract"}).json()
    child = next(n for n in anatomy["nodes"] if n["depth"] == 1)
    r = client.get("/api/v1/layout",
                   params={"kind": "icicle", "mode": "abstract", "root": child["id"]})
    assert r.status_code == 200
    doc = r.json()
    assert doc["nodes"][0]["id"] == child["id"]
    assert doc["nodes"][0]["depth"] == 0
    # rerooting at the root id returns the full view
    full = client.get("/api/v1/layout",
                      params={"kind": "icicle", "mode": "abstract", "root": "EMAPA:1"})
    assert len(full.json()["nodes"]) == 150


def test_layout_unknown_root_404(client):
    r = client.get("/api/v1/layout",
                   params={"kind": "sunburst", "mode": "abstract", "root": "EMAPA:424242"})
    assert r.status_code == 404
    assert r.json()["error"] == "not_found"


def test_expression_route(client):
    meta = client.get("/api/v1/meta").json()
    stage = meta["populated_stages"][0]
    cloud = client.get("/api/v1/cloud", params={"stage": stage}).json()
    gene = cloud["nodes"][0]["gene"]
    r = client.get("/api/v1/expression",
                   params={"gene": gene, "stage": stage, "mode": "staged"})
    assert r.status_code == 200
    doc = r.json()
    assert set(doc) == {"states", "profile"}
    assert doc["profile"]
    for sid in doc["profile"]:
        assert doc["states"][sid] in (
            "strong", "moderate", "weak", "present", "propagated")


def test_expression_unknown_gene_is_200_no_info(client):
    r = client.get("/api/v1/expression", params={"gene": "Nonexistent1", "stage": 12})
    assert r.status_code == 200
    doc = r.json()
    assert doc["profile"] == []
    assert set(doc["states"].values()) == {"no_info"}


def test_subset_route(client):
    r = client.get("/api/v1/subset", params={"g1": "nope1", "g2": "nope2", "stage": 12})
    assert r.status_code == 200
    assert r.json() == {"subset": True}


def test_compose_route(client):
    r = client.get("/api/v1/compose", params={
        "genes": "a,b", "stages": "12,13", "kind": "sunburst", "mode": "abstract",
        "columns": 2})
    assert r.status_code == 200
    doc = r.json()
    assert doc["columns"] == 2
    assert len(doc["cells"]) == 4
    assert doc["cells"][0]["row"] == 0 and doc["cells"][1]["col"] == 1
    assert doc["cells"][0]["model"]["title"] == "a @ TS12"


def test_cloud_route_with_prefix(client):
    meta = client.get("/api/v1/meta").json()
    stage = meta["populated_stages"][0]
    full = client.get("/api/v1/cloud", params={"stage": stage}).json()
    assert full["nodes"]
    prefix = full["nodes"][0]["gene"][:2]
    filtered = client.get("/api/v1/cloud", params={"stage": stage, "q": prefix}).json()
    assert filtered["nodes"]
    assert all(n["gene"].lower().startswith(prefix.lower()) for n in filtered["nodes"])


def test_render_svg_route(client):
    r = client.get("/api/v1/render.svg", params={
        "genes": "a", "stages": "12", "mode": "abstract", "size": 200})
    assert r.status_code == 200
    assert r.headers["content-type"].startswith("image/svg+xml")
    assert r.content.startswith(b"<?xml")


def test_responses_byte_identical(client):
    params = {"kind": "sunburst", "mode": "abstract", "stage": 17}
    one = client.get("/api/v1/layout", params=params).content
    two = client.get("/api/v1/layout", params=params).content
    assert one == two
    svg_params = {"genes": "a", "stages": "12", "mode": "abstract"}
    assert (client.get("/api/v1/render.svg", params=svg_params).content
            == client.get("/api/v1/render.svg", params=svg_params).content)


def test_cache_transparency(data_dir):
    cached = create_app(ServiceConfig(data_dir=data_dir, cache_size=64))
    uncached = create_app(ServiceConfig(data_dir=data_dir, cache_size=0))
    with TestClient(cached) as c1, TestClient(uncached) as c2:
        meta = c1.get("/api/v1/meta").json()
        stage = meta["populated_stages"][0]
        gene = c1.get("/api/v1/cloud", params={"stage": stage}).json()["nodes"][0]["gene"]
        params = {"gene": gene, "stage": stage, "mode": "abstract"}
        warm = c1.get("/api/v1/expression", params=params).content
        again = c1.get("/api/v1/expression", params=params).content
        cold = c2.get("/api/v1/expression", params=params).content
        assert warm == again == cold


def test_reload_bumps_version_and_inflight_reads_stay_consistent(tmp_path):
    data = tmp_path / "reload"
    generate_fixtures(FixtureSpec(structures=30, genes=5, seed=1), data)
    app = create_app(ServiceConfig(data_dir=data))
    state: AtlasState = app.state.atlas

    with TestClient(app) as client:
        assert client.get("/api/v1/meta").json()["version"] == 1

        # An in-flight request holds the old snapshot reference while the
        # dataset is regenerated and swapped underneath it.
        held = state.snapshot
        generate_fixtures(FixtureSpec(structures=40, genes=5, seed=2), data)
        r = client.post("/admin/reload")
        assert r.status_code == 200
        assert r.json() == {"version": 2}
        assert held.version == 1
        assert len(held.anatomy) == 30          # old data, untouched
        assert len(state.snapshot.anatomy) == 40
        assert client.get("/api/v1/meta").json()["version"] == 2


def test_failed_reload_keeps_old_snapshot(tmp_path):
    data = tmp_path / "broken"
    generate_fixtures(FixtureSpec(structures=30, genes=5, seed=1), data)
    app = create_app(ServiceConfig(data_dir=data))
    with TestClient(app) as client:
        (data / "anatomy.json").write_text("{ not json")
        r = client.post("/admin/reload")
        assert r.status_code == 400
        assert r.json()["error"] == "reload_failed"
        meta = client.get("/api/v1/meta").json()
        assert meta["version"] == 1
        assert meta["counts"]["structures"] == 30


def test_empty_stage_routes_return_200(tmp_path):
    # Root absent before stage 5: staged requests at stage 3 must not be 500s.
    import json

    data = tmp_path / "late"
    data.mkdir()
    (data / "anatomy.json").write_text(json.dumps({
        "format": "atlasburst-anatomy/1",
        "root": "EMAPA:1",
        "structures": [
            {"id": "EMAPA:1", "name": "late riser", "stages": ["5-26"]},
            {"id": "EMAPA:2", "name": "lobe", "parent": "EMAPA:1", "stages": ["5-26"]},
        ],
    }))
    (data / "annotations.jsonl").write_text("")
    app = create_app(ServiceConfig(data_dir=data))
    with TestClient(app) as client:
        layout = client.get("/api/v1/layout",
                            params={"kind": "sunburst", "mode": "staged", "stage": 3})
        assert layout.status_code == 200
        assert layout.json()["nodes"] == []
        compose = client.get("/api/v1/compose",
                             params={"genes": "g", "stages": "3", "mode": "staged"})
        assert compose.status_code == 200
        assert compose.json()["cells"][0]["model"]["nodes"] == []


def test_palette_config_changes_fills(tmp_path, data_dir):
    import json
    import shutil

    shutil.copy(data_dir / "anatomy.json", tmp_path / "anatomy.json")
    shutil.copy(data_dir / "annotations.jsonl", tmp_path / "annotations.jsonl")
    palette_path = tmp_path / "palette.json"
    palette_path.write_text(json.dumps({"no_info": "#123456"}))
    app = create_app(ServiceConfig(data_dir=tmp_path, palette_path=palette_path))
    with TestClient(app) as client:
        doc = client.get("/api/v1/compose", params={
            "genes": "Nonexistent1", "stages": "12", "mode": "staged"}).json()
        fills = {n["fill"] for n in doc["cells"][0]["model"]["nodes"]}
        assert fills == {"#123456"}


def test_no_response_mixes_snapshot_versions(tmp_path):
    # Readers hammer /meta while a writer alternates datasets via reload;
    # every body must be internally consistent with exactly one snapshot.
    import threading

    data = tmp_path / "swap"
    generate_fixtures(FixtureSpec(structures=30, genes=5, seed=1), data)
    app = create_app(ServiceConfig(data_dir=data))
    seen: list[dict] = []
    errors: list[str] = []
    stop = threading.Event()

    def reader():
        with TestClient(app) as client:
            while not stop.is_set():
                r = client.get("/api/v1/meta")
                doc = r.json()
                if str(doc["version"]) != r.headers["X-Snapshot-Version"]:
                    errors.append("header/body version mismatch")
                seen.append(doc)

    def writer():
        with TestClient(app) as client:
            for i in range(10):
                size = 30 if i % 2 else 40
                generate_fixtures(FixtureSpec(structures=size, genes=5, seed=1), data)
                client.post("/admin/reload")
        stop.set()

    threads = [threading.Thread(target=reader) for _ in range(4)]
    wt = threading.Thread(target=writer)
    for t in threads:
        t.start()
    wt.start()
    wt.join()
    for t in threads:
        t.join()

    assert not errors
    assert len(seen) > 0
    by_version = {}
    for doc in seen:
        counts = doc["counts"]["structures"]
        assert counts in (30, 40)
        previous = by_version.setdefault(doc["version"], counts)
        assert previous == counts  # one version never reports two datasets


def test_subset_route_with_witness(tmp_path):
    import json as _json
    import sys

    sys.path.insert(0, "tests")
    from conftest import MOUSE_ROWS, anatomy_json, ann_lines

    data = tmp_path / "chain"
    data.mkdir()
    (data / "anatomy.json").write_text(anatomy_json("EMAPA:1", MOUSE_ROWS))
    (data / "annotations.jsonl").write_text(ann_lines([
        ("gA", "EMAPA:12", 14, "strong"),
        ("gB", "EMAPA:12", 14, "weak"),
        ("gB", "EMAPA:13", 14, "present"),
    ]))
    app = create_app(ServiceConfig(data_dir=data))
    with TestClient(app) as client:
        forward = client.get("/api/v1/subset",
                             params={"g1": "gA", "g2": "gB", "stage": 14}).json()
        assert forward == {"subset": True}
        backward = client.get("/api/v1/subset",
                              params={"g1": "gB", "g2": "gA", "stage": 14}).json()
        assert backward["subset"] is False
        assert backward["witness"] == "EMAPA:13"
