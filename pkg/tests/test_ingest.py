import json
import shutil

import pytest
import requests

from artifact.ingest import (
    SCHEMA_VERSION,
    CacheEntry,
    CacheMiss,
    JsonCache,
    LMFDBClient,
    NetworkError,
    NewformQuery,
    SchemaError,
    _atomic_write,
    _RateLimiter,
    default_fixture_dir,
    load_fixture,
    query_hash,
    sort_labels,
    write_bundle_file,
)
from artifact.jacobian import ValidationError


class FakeResponse:
    def __init__(self, status, payload=None):
        self.status_code = status
        self._payload = payload

    def json(self):
        if self._payload is None:
            raise ValueError("no json")
        return self._payload

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(f"HTTP {self.status_code}")


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def get(self, url, params=None, timeout=None):
        self.calls.append((url, dict(params)))
        return self.responses.pop(0)


def nf(label, dim, fricke, rank=0):
    return {"label": label, "level": int(label.split(".")[0]), "dim": dim, "fricke_eigenval": fricke,
            "analytic_rank": rank}


def client(tmp_path, responses, sleeps=None, **kw):
    sleeps = sleeps if sleeps is not None else []
    return LMFDBClient(tmp_path / "cache", session=FakeSession(responses), sleep=sleeps.append,
                       min_interval=0.0, **kw)


def test_query_params():
    q = NewformQuery(11, 37)
    assert q.params()["level"] == "i11-37" and q.params()["char_order"] == "i1"
    with pytest.raises(ValueError):
        NewformQuery(11, 37, weight=4)
    with pytest.raises(ValueError):
        NewformQuery(40, 37)


def test_query_hash_stable():
    assert query_hash("x", {"a": "1", "b": "2"}) == query_hash("x", {"b": "2", "a": "1"})
    assert query_hash("x", {"a": "1"}) != query_hash("y", {"a": "1"})


def test_fetch_newforms_and_cache(tmp_path):
    page = {"data": [nf("37.2.a.b", 1, -1), nf("37.2.a.a", 1, 1, 1)]}
    c = client(tmp_path, [FakeResponse(200, page)])
    out = c.fetch_newforms(NewformQuery(37, 37))
    assert [f.label for f in out] == ["37.2.a.a", "37.2.a.b"]
    # second call is served from the cache: the fake session has no responses left
    assert c.fetch_newforms(NewformQuery(37, 37)) == out
    assert len(c.session.calls) == 1
    # and an offline client sees the same cached payload
    off = LMFDBClient(tmp_path / "cache", offline=True)
    assert off.fetch_newforms(NewformQuery(37, 37)) == out


def test_pagination(tmp_path):
    pages = [FakeResponse(200, {"data": [nf("11.2.a.a", 1, -1)], "next": "/more"}),
             FakeResponse(200, {"data": [nf("37.2.a.a", 1, 1)], "next": "/more"}),
             FakeResponse(200, {"data": []})]
    c = client(tmp_path, pages)
    recs = c.query("mf_newforms", {"level": "i11-37"})
    assert len(recs) == 2
    offsets = [p["_offset"] for _, p in c.session.calls]
    assert offsets == ["0", "1", "2"]


def test_fetch_validates_levels(tmp_path):
    page = {"data": [nf("37.2.a.a", 1, 1)]}
    c = client(tmp_path, [FakeResponse(200, page)])
    with pytest.raises(ValidationError):
        c.fetch_newforms(NewformQuery(37, 37))


def test_offline_cache_miss(tmp_path):
    c = LMFDBClient(tmp_path, offline=True)
    with pytest.raises(CacheMiss):
        c.fetch_newforms(NewformQuery(11, 11))


def test_backoff_then_success(tmp_path):
    sleeps = []
    responses = [FakeResponse(429), FakeResponse(503), FakeResponse(200, {"data": []})]
    c = client(tmp_path, responses, sleeps)
    assert c.query("mf_newforms", {"level": "i2-3"}) == []
    assert sleeps == [1.0, 2.0]


def test_backoff_exhausted(tmp_path):
    sleeps = []
    c = client(tmp_path, [FakeResponse(500)] * 5, sleeps, retries=4)
    with pytest.raises(NetworkError):
        c.query("mf_newforms", {"level": "i2-3"})
    assert sleeps == [1.0, 2.0, 4.0, 8.0]
    # nothing cached after a failure
    assert list((tmp_path / "cache").glob("*.json")) == []


def test_client_error_not_json(tmp_path):
    c = client(tmp_path, [FakeResponse(200)] * 2, retries=1)
    with pytest.raises(NetworkError):
        c.query("mf_newforms", {})


def test_rate_limiter_spacing():
    now = [0.0]
    slept = []

    def sleep(dt):
        slept.append(dt)
        now[0] += dt

    rl = _RateLimiter(1.0, clock=lambda: now[0], sleep=sleep)
    rl.wait()
    now[0] += 0.25
    rl.wait()
    rl.wait()
    assert slept == pytest.approx([0.75, 1.0])


def test_fetch_elliptic_curves(tmp_path):
    page = {"data": [{"Clabel": "37.a1", "conductor": 37, "rank": 1, "degree": 2}]}
    c = client(tmp_path, [FakeResponse(200, page)])
    (e,) = c.fetch_elliptic_curves(37, 37, rank_min=1)
    assert (e.conductor, e.rank, e.modular_degree) == (37, 1, 2)
    assert c.session.calls[0][1]["rank"] == "i1-"


def test_cache_roundtrip_and_corruption(tmp_path):
    cache = JsonCache(tmp_path)
    key = query_hash("x", {})
    entry = CacheEntry(key, "2024-01-01T00:00:00+00:00", [{"a": 1}])
    cache.put(entry)
    assert cache.get(key) == entry
    cache.put(entry)
    assert cache.get(key) == entry and len(list(tmp_path.iterdir())) == 1
    (tmp_path / f"{key}.json").write_text("{truncated")
    assert cache.get(key) is None
    other = CacheEntry(key, "t", [], schema_version="0.9")
    cache.put(other)
    assert cache.get(key) is None


def test_atomic_write_leaves_no_temp_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "out.json"
    _atomic_write(target, "old")

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr("artifact.ingest.os.replace", boom)
    with pytest.raises(OSError):
        _atomic_write(target, "new")
    assert target.read_text() == "old"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


# ------------------------------------------------------------- fixture bundle


@pytest.fixture
def fixture_copy(tmp_path):
    dst = tmp_path / "fx"
    shutil.copytree(default_fixture_dir(), dst)
    return dst


def _edit(path, fn):
    doc = json.loads(path.read_text())
    fn(doc)
    path.write_text(json.dumps(doc))


def test_bundle_loads(bundle):
    assert bundle.manifest["schema_version"] == SCHEMA_VERSION
    assert bundle.morphism_level_bound <= bundle.factor_level_bound
    assert set(bundle.manifest["files"]) >= {"factors", "kernel_exponents", "elliptic_curves"}
    for name, meta in bundle.manifest["files"].items():
        assert meta["provenance"]


def test_corrupt_dimension_raises_validation_error(fixture_copy):
    def bump(doc):
        rec = next(r for r in doc["records"] if r["level"] == 389)
        rec["dim"] += 1

    _edit(fixture_copy / "factors.json", bump)
    with pytest.raises(ValidationError, match="level 389"):
        load_fixture(fixture_copy)


def test_truncated_file_raises_schema_error(fixture_copy):
    f = fixture_copy / "gonality.json"
    f.write_text(f.read_text()[:200])
    with pytest.raises(SchemaError, match="gonality.json"):
        load_fixture(fixture_copy)


def test_schema_error_names_record(fixture_copy):
    def bad(doc):
        doc["records"][3]["fricke"] = 0

    _edit(fixture_copy / "factors.json", bad)
    with pytest.raises(SchemaError, match=r"records/3/fricke label=\S+, level=\d+"):
        load_fixture(fixture_copy)


def test_missing_file(fixture_copy):
    (fixture_copy / "certificates.json").unlink()
    with pytest.raises(SchemaError, match="missing"):
        load_fixture(fixture_copy)


def test_unknown_kernel_member(fixture_copy):
    def bad(doc):
        doc["records"][0]["members"] = ["223.2.a.zz"]

    _edit(fixture_copy / "kernel_exponents.json", bad)
    with pytest.raises(ValidationError, match="unknown factors"):
        load_fixture(fixture_copy)


def test_missing_level(fixture_copy):
    _edit(fixture_copy / "factors.json", lambda d: d.update(records=[r for r in d["records"] if r["level"] != 389]))
    with pytest.raises(ValidationError, match="level 389"):
        load_fixture(fixture_copy)


def test_write_bundle_file_deterministic(tmp_path):
    write_bundle_file(tmp_path, "x", [{"b": 1, "a": 2}], note="n")
    first = (tmp_path / "x.json").read_text()
    write_bundle_file(tmp_path, "x", [{"a": 2, "b": 1}], note="n")
    assert (tmp_path / "x.json").read_text() == first
    assert json.loads(first)["schema_version"] == SCHEMA_VERSION


def test_sort_labels():
    assert sort_labels(["11.2.a.b", "11.2.a.ba", "11.2.a.c"]) == ["11.2.a.b", "11.2.a.c", "11.2.a.ba"]
