"""Newform and elliptic-curve data: HTTP client with a JSON cache, and the bundled offline fixture."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Iterable

import jsonschema

from .arith import genus_x0, is_prime, primes_in
from .density import (
    Certificate,
    EllipticCurveRecord,
    ExternalFacts,
    FactorTables,
    KnownDensity,
)
from .jacobian import (
    Genus2QuotientTable,
    KernelData,
    NewformFactor,
    ValidationError,
    label_sort_key,
    validate_factors,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
API_ROOT = "https://www.lmfdb.org/api"
CACHE_ENV = "ARTIFACT_CACHE_DIR"
FIXTURE_ENV = "ARTIFACT_FIXTURE_DIR"

__all__ = [
    "CacheMiss",
    "FixtureBundle",
    "LMFDBClient",
    "NetworkError",
    "NewformQuery",
    "SchemaError",
    "ValidationError",
    "default_fixture_dir",
    "load_fixture",
]


class SchemaError(ValueError):
    pass


class CacheMiss(LookupError):
    pass


class NetworkError(RuntimeError):
    """A request failed after all retries; the caller may try again later."""


@dataclass(frozen=True)
class NewformQuery:
    level_min: int
    level_max: int
    weight: int = 2
    char_order: int = 1
    fields: tuple[str, ...] = ("level", "label", "dim", "fricke_eigenval", "analytic_rank")

    def __post_init__(self):
        if self.weight != 2 or self.char_order != 1:
            raise ValueError("only weight 2 with trivial character is supported")
        if not 1 <= self.level_min <= self.level_max:
            raise ValueError("bad level range")

    def params(self) -> dict[str, str]:
        return {
            "level": f"i{self.level_min}-{self.level_max}",
            "weight": "i2",
            "char_order": "i1",
            "level_is_prime": "true",
            "_fields": ",".join(self.fields),
        }


@dataclass(frozen=True)
class CacheEntry:
    query_hash: str
    fetched_at: str
    payload: list[dict]
    schema_version: str = SCHEMA_VERSION


def query_hash(endpoint: str, params: dict[str, str]) -> str:
    blob = json.dumps([endpoint, sorted(params.items())], separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        # mkstemp creates 0600; give the file ordinary permissions
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


class JsonCache:
    def __init__(self, root: str | os.PathLike | None = None):
        root = root or os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "artifact"
        self.root = Path(root)

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, key: str) -> CacheEntry | None:
        path = self._path(key)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError:
            return None
        except json.JSONDecodeError:
            log.warning("ignoring corrupt cache file %s", path)
            return None
        if raw.get("query_hash") != key or raw.get("schema_version") != SCHEMA_VERSION:
            return None
        return CacheEntry(raw["query_hash"], raw["fetched_at"], raw["payload"], raw["schema_version"])

    def put(self, entry: CacheEntry) -> None:
        text = json.dumps(entry.__dict__, sort_keys=True, separators=(",", ":"))
        _atomic_write(self._path(entry.query_hash), text)


class _RateLimiter:
    def __init__(self, min_interval: float, clock=time.monotonic, sleep=time.sleep):
        self.min_interval = min_interval
        self._clock, self._sleep = clock, sleep
        self._lock = threading.Lock()
        self._last = float("-inf")

    def wait(self) -> None:
        with self._lock:
            delay = self._last + self.min_interval - self._clock()
            if delay > 0:
                self._sleep(delay)
            self._last = self._clock()


class LMFDBClient:
    """Rate-limited (1 request/s) client with retries and a query-hash keyed cache."""

    page_size = 1000
    chunk = 500

    def __init__(
        self,
        cache_dir: str | os.PathLike | None = None,
        offline: bool = False,
        session: Any = None,
        api_root: str = API_ROOT,
        retries: int = 4,
        min_interval: float = 1.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.cache = JsonCache(cache_dir)
        self.offline = offline
        self.api_root = api_root.rstrip("/")
        self.retries = retries
        self._sleep = sleep
        self._limiter = _RateLimiter(min_interval, sleep=sleep)
        self._session = session

    @property
    def session(self):
        if self._session is None:
            import requests

            self._session = requests.Session()
        return self._session

    def _get(self, url: str, params: dict[str, str]) -> dict:
        import requests

        for attempt in range(self.retries + 1):
            self._limiter.wait()
            try:
                resp = self.session.get(url, params=params, timeout=30)
                if resp.status_code == 429 or resp.status_code >= 500:
                    raise requests.HTTPError(f"HTTP {resp.status_code}")
                resp.raise_for_status()
                return resp.json()
            except (requests.RequestException, ValueError) as exc:
                if attempt == self.retries:
                    raise NetworkError(f"{url}: {exc}") from exc
                backoff = 2.0**attempt
                log.info("request failed (%s); retrying in %.0fs", exc, backoff)
                self._sleep(backoff)
        raise AssertionError("unreachable")

    def query(self, collection: str, params: dict[str, str]) -> list[dict]:
        """All records of one query, served from the cache when possible."""
        key = query_hash(collection, params)
        hit = self.cache.get(key)
        if hit is not None:
            return hit.payload
        if self.offline:
            raise CacheMiss(f"{collection} {params} is not cached (offline mode)")
        url = f"{self.api_root}/{collection}/"
        records: list[dict] = []
        offset = 0
        while True:
            page = self._get(url, {**params, "_format": "json", "_offset": str(offset)})
            data = page.get("data", [])
            records.extend(data)
            if len(data) == 0 or "next" not in page or not page["next"]:
                break
            offset += len(data)
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.cache.put(CacheEntry(key, stamp, records))
        return self.cache.get(key).payload

    def fetch_newforms(self, q: NewformQuery) -> list[NewformFactor]:
        """Factors for every prime level in range, validated level by level."""
        raw: list[dict] = []
        for lo in range(q.level_min, q.level_max + 1, self.chunk):
            hi = min(lo + self.chunk - 1, q.level_max)
            raw += self.query("mf_newforms", NewformQuery(lo, hi, fields=q.fields).params())
        by_level: dict[int, list[NewformFactor]] = defaultdict(list)
        for rec in raw:
            by_level[int(rec["level"])].append(
                NewformFactor(
                    label=rec["label"],
                    level=int(rec["level"]),
                    dim=int(rec["dim"]),
                    fricke=int(rec["fricke_eigenval"]),
                    analytic_rank=None if rec.get("analytic_rank") is None else int(rec["analytic_rank"]),
                )
            )
        out: list[NewformFactor] = []
        for p in primes_in(q.level_min, q.level_max + 1):
            out += validate_factors(p, by_level.get(p, []))
        return out

    def fetch_elliptic_curves(
        self, conductor_min: int, conductor_max: int, rank_min: int = 0
    ) -> list[EllipticCurveRecord]:
        params = {
            "conductor": f"i{conductor_min}-{conductor_max}",
            "rank": f"i{rank_min}-",
            "_fields": "Clabel,conductor,rank,degree",
        }
        recs = self.query("ec_curvedata", params)
        out = [
            EllipticCurveRecord(int(r["conductor"]), int(r["rank"]), int(r["degree"]), r["Clabel"]) for r in recs
        ]
        return sorted(out, key=lambda e: (e.conductor, e.label))


# ---------------------------------------------------------------- fixture bundle

FILES = (
    "factors",
    "kernel_exponents",
    "genus2_table",
    "elliptic_curves",
    "gonality",
    "plus_cubic",
    "certificates",
    "known_density",
)


def default_fixture_dir() -> Path:
    env = os.environ.get(FIXTURE_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("artifact") / "data" / "fixtures"))


def _schema(name: str) -> dict:
    return json.loads((resources.files("artifact") / "data" / "schemas" / f"{name}.schema.json").read_text())


def _read(path: Path, name: str) -> dict:
    f = path / f"{name}.json"
    try:
        doc = json.loads(f.read_text())
    except FileNotFoundError as exc:
        raise SchemaError(f"{f}: missing") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{f}: not valid JSON ({exc.msg} at line {exc.lineno}, column {exc.colno})") from exc
    validator = jsonschema.Draft202012Validator(_schema(name))
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        where = "/".join(str(x) for x in err.absolute_path) or "<root>"
        ident = ""
        if len(err.absolute_path) >= 2 and err.absolute_path[0] == "records":
            rec = doc["records"][err.absolute_path[1]]
            if isinstance(rec, dict):
                ident = " " + ", ".join(f"{k}={rec[k]}" for k in ("label", "level", "conductor") if k in rec)
        raise SchemaError(f"{f.name}: record {where}{ident}: {err.message}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{f.name}: schema version {doc.get('schema_version')} != {SCHEMA_VERSION}")
    return doc


@dataclass(frozen=True)
class FixtureBundle:
    factors: dict[int, tuple[NewformFactor, ...]]
    kernel_data: KernelData
    genus2: Genus2QuotientTable
    facts: ExternalFacts
    manifest: dict = field(default_factory=dict)

    @property
    def factor_level_bound(self) -> int:
        return int(self.manifest["factor_level_bound"])

    @property
    def morphism_level_bound(self) -> int:
        return int(self.manifest["morphism_level_bound"])


def _factors_from(doc: dict, bound: int) -> dict[int, tuple[NewformFactor, ...]]:
    by_level: dict[int, list[NewformFactor]] = defaultdict(list)
    for rec in doc["records"]:
        by_level[rec["level"]].append(
            NewformFactor(rec["label"], rec["level"], rec["dim"], rec["fricke"], rec["analytic_rank"])
        )
    stray = [lvl for lvl in by_level if not is_prime(lvl) or lvl >= bound]
    if stray:
        raise ValidationError(f"factor records at unexpected levels {sorted(stray)[:5]}")
    out = {}
    for p in primes_in(2, bound):
        fs = by_level.get(p, [])
        if not fs and genus_x0(p) > 0:
            raise ValidationError(f"level {p}: no factor records but genus {genus_x0(p)}")
        out[p] = tuple(validate_factors(p, fs))
    return out


def _known_density(doc: dict) -> KnownDensity:
    complete, conditional = {}, {}
    for rec in doc["records"]:
        target = complete if rec["complete"] else conditional
        target[rec["degree"]] = frozenset(rec["infinite_levels"])
    return KnownDensity(complete, conditional)


def load_fixture(path: str | os.PathLike | None = None) -> FixtureBundle:
    """Load and validate the fixture bundle; no verdict can see unvalidated data."""
    root = Path(path) if path is not None else default_fixture_dir()
    try:
        manifest = json.loads((root / "manifest.json").read_text())
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{root / 'manifest.json'}: {exc}") from exc
    jsonschema_err = jsonschema.exceptions.best_match(
        jsonschema.Draft202012Validator(_schema("manifest")).iter_errors(manifest)
    )
    if jsonschema_err is not None:
        raise SchemaError(f"manifest.json: {jsonschema_err.message}")
    docs = {name: _read(root, name) for name in FILES}

    factors = _factors_from(docs["factors"], int(manifest["factor_level_bound"]))
    kd = KernelData()
    for rec in docs["kernel_exponents"]["records"]:
        known = {f.label for f in factors.get(rec["level"], ())}
        unknown = set(rec["members"]) - known
        if unknown:
            raise ValidationError(f"kernel exponent at level {rec['level']} names unknown factors {sorted(unknown)}")
        kd.add(rec["level"], rec["members"], rec["exponent"])
    genus2 = Genus2QuotientTable({r["level"]: r["has_genus2_new_quotient"] for r in docs["genus2_table"]["records"]})
    ec = docs["elliptic_curves"]
    facts = ExternalFacts(
        gonality={r["level"]: (r["lower"], r["upper"]) for r in docs["gonality"]["records"]},
        plus_cubic_infinite={r["level"]: r["infinite"] for r in docs["plus_cubic"]["records"]},
        elliptic_curves=tuple(
            EllipticCurveRecord(r["conductor"], r["rank"], r["modular_degree"], r["label"]) for r in ec["records"]
        ),
        elliptic_curve_bound=ec["conductor_bound"],
        certificates=tuple(Certificate(r["level"], r["statement_id"], r["source"]) for r in docs["certificates"]["records"]),
        known_density=_known_density(docs["known_density"]),
        tables=FactorTables(
            {p: fs for p, fs in factors.items() if p < int(manifest["morphism_level_bound"])}, kd, genus2
        ),
    )
    return FixtureBundle(factors, kd, genus2, facts, manifest)


def write_bundle_file(root: Path, name: str, records: Iterable[dict], **extra) -> None:
    """Deterministic writer used when promoting fetched or computed data into a bundle."""
    doc = {"schema_version": SCHEMA_VERSION, **extra, "records": list(records)}
    _atomic_write(Path(root) / f"{name}.json", json.dumps(doc, indent=1, sort_keys=True) + "\n")


def sort_labels(labels: Iterable[str]) -> list[str]:
    return sorted(labels, key=label_sort_key)
