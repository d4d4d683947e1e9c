import json
import threading
import urllib.request
import urllib.error

import pytest

from pvg import solver
from pvg.model import PvgDocument, serialize_document
from pvg.service import serve

from conftest import full_scene_doc, nested_dc_pc_doc, simple_rect_doc


@pytest.fixture
def server(tmp_path):
    srv = serve(0, str(tmp_path / "sessions"))
    port = srv.server_address[1]
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{port}", srv, str(tmp_path / "sessions")
    srv.shutdown()


def _get(url):
    try:
        with urllib.request.urlopen(url) as r:
            return r.status, r.read(), dict(r.headers)
    except urllib.error.HTTPError as e:
        return e.code, e.read(), dict(e.headers)


def _put(url, body: bytes):
    req = urllib.request.Request(url, data=body, method="PUT")
    try:
        with urllib.request.urlopen(req) as r:
            return r.status, r.read()
    except urllib.error.HTTPError as e:
        return e.code, e.read()


def test_health(server):
    base, _, _ = server
    code, body, _ = _get(base + "/api/health")
    assert code == 200
    assert json.loads(body)["status"] == "ok"


def test_unknown_session_404(server):
    base, _, _ = server
    code, _, _ = _get(base + "/api/doc/nope")
    assert code == 404
    code, _, _ = _get(base + "/api/render/nope")
    assert code == 404


def test_put_then_get_roundtrip(server):
    base, _, _ = server
    doc = simple_rect_doc()
    code, body = _put(base + "/api/doc/s1", serialize_document(doc))
    assert code == 200
    assert json.loads(body)["diagnostics"] == []
    code, body, _ = _get(base + "/api/doc/s1")
    assert code == 200
    assert body == serialize_document(doc)


def test_put_garbage_422(server):
    base, _, _ = server
    code, body = _put(base + "/api/doc/s1", b"{garbage")
    assert code == 422


def test_put_crossing_dcs_stored_but_unrenderable(server):
    from conftest import line_spline, solid_dc

    base, _, _ = server
    a = solid_dc(line_spline((10, 30), (50, 30)), (0.2,) * 3, (0.8,) * 3)
    b = solid_dc(line_spline((30, 10), (30, 50)), (0.2,) * 3, (0.8,) * 3)
    doc = PvgDocument(
        canvas_width=64, canvas_height=64, background=(1, 1, 1),
        diffusion_curves=(a, b), border=(1, 1, 1),
    )
    code, body = _put(base + "/api/doc/bad", serialize_document(doc))
    assert code == 200
    diags = json.loads(body)["diagnostics"]
    assert any(d["severity"] == "error" for d in diags)
    code, _, _ = _get(base + "/api/render/bad?w=32&h=32")
    assert code == 409


def test_render_and_cache(server):
    base, _, _ = server
    _put(base + "/api/doc/s2", serialize_document(simple_rect_doc(size=48)))
    code, img1, h1 = _get(base + "/api/render/s2?w=48&h=48")
    assert code == 200
    assert img1[:8] == b"\x89PNG\r\n\x1a\n"
    code, img2, h2 = _get(base + "/api/render/s2?w=48&h=48")
    assert img1 == img2
    assert h1["X-Content-Hash"] == h2["X-Content-Hash"]
    assert h2["X-Cache"] == "hit"


def test_mutation_invalidates_cache_and_changes_image(server):
    base, _, _ = server
    doc1 = nested_dc_pc_doc(size=96, f_plus=41.0 / 255.0)
    doc2 = nested_dc_pc_doc(size=96, f_plus=82.0 / 255.0)
    _put(base + "/api/doc/s3", serialize_document(doc1))
    _, img1, h1 = _get(base + "/api/render/s3?w=96&h=96")
    _put(base + "/api/doc/s3", serialize_document(doc2))
    _, img2, h2 = _get(base + "/api/render/s3?w=96&h=96")
    assert h2.get("X-Cache") == "miss"
    assert h1["X-Content-Hash"] != h2["X-Content-Hash"]
    assert img1 != img2


def test_viewport_render_does_not_refactorize(server):
    base, _, _ = server
    doc = full_scene_doc(seed=6, size=64)
    _put(base + "/api/doc/s4", serialize_document(doc))
    code, _, _ = _get(base + "/api/render/s4?w=64&h=64")
    assert code == 200
    before = solver.factorization_count()
    code, img, _ = _get(base + "/api/render/s4?w=64&h=64&viewport=16,16,16,16")
    assert code == 200
    code, img, _ = _get(base + "/api/render/s4?w=64&h=64&viewport=20,20,8,8")
    assert code == 200
    assert solver.factorization_count() == before
    code, body, _ = _get(base + "/api/metrics")
    metrics = json.loads(body)
    assert metrics["renders"] >= 3


def test_bad_render_params(server):
    base, _, _ = server
    _put(base + "/api/doc/s5", serialize_document(simple_rect_doc(size=32)))
    code, _, _ = _get(base + "/api/render/s5?w=0&h=32")
    assert code == 400
    code, _, _ = _get(base + "/api/render/s5?w=32&h=32&viewport=1,2,3")
    assert code == 400


def test_oversized_put_413(server):
    base, _, _ = server
    req = urllib.request.Request(
        base + "/api/doc/big", data=b"x", method="PUT",
        headers={"Content-Length": str(20 * 1024 * 1024)},
    )
    try:
        with urllib.request.urlopen(req) as r:
            code = r.status
    except urllib.error.HTTPError as e:
        code = e.code
    assert code == 413


def test_persistence_across_restart(server, tmp_path):
    base, srv, state_dir = server
    doc = simple_rect_doc(size=40)
    _put(base + "/api/doc/keep", serialize_document(doc))
    # a fresh store over the same directory serves the persisted document
    srv2 = serve(0, state_dir)
    port2 = srv2.server_address[1]
    t = threading.Thread(target=srv2.serve_forever, daemon=True)
    t.start()
    try:
        code, body, _ = _get(f"http://127.0.0.1:{port2}/api/doc/keep")
        assert code == 200
        assert body == serialize_document(doc)
    finally:
        srv2.shutdown()
