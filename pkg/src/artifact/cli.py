"""Command line: genus tables, morphism classification, degree-d density and decomposition statistics.

Exit codes: 0 success, 1 verdict mismatch, 2 missing data, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .arith import genus_profile, is_prime, primes_in
from .density import EXPECTED_DEGREE6_INFINITE, Status, classify_degree
from .ingest import CacheMiss, FixtureBundle, LMFDBClient, NetworkError, NewformQuery, SchemaError, load_fixture
from .jacobian import KernelData, LevelStatus, ValidationError, check_thm13_hypothesis, classify_level
from .quadforms import genus_x0_plus
from .reports import FORMATS, Report, case4_report, render

EXIT_OK, EXIT_MISMATCH, EXIT_MISSING, EXIT_USAGE = 0, 1, 2, 3

log = logging.getLogger("artifact")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def parse_range(text: str) -> range:
    """'N' or 'a..b' (inclusive) into a range of positive integers."""
    try:
        if ".." in text:
            a, b = (int(x) for x in text.split("..", 1))
        else:
            a = b = int(text)
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}; expected N or a..b") from exc
    if a < 1 or b < a - 1:
        raise UsageError(f"bad range {text!r}; levels must be positive and a <= b")
    return range(a, b + 1)


def _primes(r: range) -> list[int]:
    return primes_in(r.start, r.stop)


# ---------------------------------------------------------------- data access


class DataSource:
    """Bundled fixture, optionally topped up from the online database."""

    def __init__(self, facts_dir: str | None, kernel_data: str | None, offline: bool, cache_dir: str | None):
        self.bundle: FixtureBundle = load_fixture(facts_dir)
        if kernel_data:
            doc = json.loads(Path(kernel_data).read_text())
            self.bundle = FixtureBundle(
                self.bundle.factors,
                KernelData((r["level"], r["members"], r["exponent"]) for r in doc["records"]),
                self.bundle.genus2,
                self.bundle.facts,
                self.bundle.manifest,
            )
        self.offline = offline
        self.cache_dir = cache_dir
        self._client: LMFDBClient | None = None

    def factors(self, p: int):
        if p in self.bundle.factors:
            return self.bundle.factors[p]
        if self.offline:
            raise CacheMiss(f"level {p} is outside the bundled fixture (offline mode)")
        if self._client is None:
            self._client = LMFDBClient(self.cache_dir, offline=False)
        return tuple(self._client.fetch_newforms(NewformQuery(p, p)))


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


# ---------------------------------------------------------------- commands


def cmd_genus(args) -> int:
    rows = []
    for n in parse_range(args.levels):
        gp = genus_profile(n)
        plus = genus_x0_plus(n) if is_prime(n) and n > 3 else (0 if n in (2, 3) else None)
        rows.append((n, gp.psi, gp.nu2, gp.nu3, gp.nu_inf, gp.genus, plus))
    report = Report(("N", "psi", "nu2", "nu3", "nu_inf", "g0", "g0_plus"), tuple(rows))
    sys.stdout.write(render(report, args.format))
    return EXIT_OK


def _classify_one(p: int, src: DataSource):
    b = src.bundle
    return classify_level(p, src.factors(p), b.kernel_data, b.genus2)


def cmd_classify_morphisms(args) -> int:
    src = DataSource(args.facts, args.kernel_data, args.offline, args.cache_dir)
    primes = _primes(parse_range(args.levels))
    beyond = [p for p in primes if p >= src.bundle.morphism_level_bound]
    if beyond and args.offline:
        print(f"no morphism data for levels {beyond[0]}..{beyond[-1]} (offline)", file=sys.stderr)
        return EXIT_MISSING
    verdicts = _pmap(partial(_classify_one, src=src), primes, args.jobs)
    missing = [(v.p, m) for v in verdicts for m in v.missing]
    rows = tuple(
        (v.p, v.genus, v.plus_genus, len(src.factors(v.p)), len(v.verdicts), v.status.value)
        for v in verdicts
    )
    if args.show_residual:
        residual = [r for v in verdicts for r in v.residual_rows()]
        sys.stdout.write(render(case4_report(residual), args.format))
    else:
        sys.stdout.write(render(Report(("p", "g", "g_plus", "factors", "subsets", "verdict"), rows), args.format))
    resolved = sum(v.status is not LevelStatus.Unresolved for v in verdicts)
    print(f"{resolved}/{len(verdicts)} levels resolved", file=sys.stderr)
    if missing:
        for p, m in missing:
            print(f"NeedsKernelData: level {p}: {{{', '.join(m)}}}", file=sys.stderr)
        return EXIT_MISSING
    return EXIT_OK


def _degree_one(p: int, d: int, facts):
    return classify_degree(p, d, facts)


def cmd_classify_degree(args) -> int:
    if args.expect_theorem17 and args.degree != 6:
        raise UsageError("--expect-theorem17 only applies to degree 6")
    src = DataSource(args.facts, args.kernel_data, args.offline, args.cache_dir)
    primes = _primes(parse_range(args.levels))
    verdicts = _pmap(partial(_degree_one, d=args.degree, facts=src.bundle.facts), primes, args.jobs)
    if args.format == "json":
        sys.stdout.write(json.dumps([v.as_dict() for v in verdicts], indent=1) + "\n")
    else:
        rows = tuple(
            (v.level, v.status.value, ",".join(e.rule_id.value for e in v.evidence) or None,
             [e.as_dict()["inputs"] for e in v.evidence] if v.evidence else None, ",".join(v.missing) or None)
            for v in verdicts
        )
        sys.stdout.write(render(Report(("p", "status", "rules", "inputs", "missing"), rows), args.format))
    unknown = [v.level for v in verdicts if v.status is Status.Unknown]
    conflicts = [v.level for v in verdicts if v.conflict]
    code = EXIT_OK
    if args.expect_theorem17:
        got = {v.level for v in verdicts if v.status is Status.Infinite}
        want = EXPECTED_DEGREE6_INFINITE & set(primes)
        if got != want:
            print(f"mismatch: unexpected {sorted(got - want)}, missing {sorted(want - got)}", file=sys.stderr)
            code = EXIT_MISMATCH
        else:
            print(f"Infinite set matches the expected list ({len(got)} primes)", file=sys.stderr)
    if conflicts:
        print(f"conflicting evidence at {conflicts}", file=sys.stderr)
        code = EXIT_MISMATCH
    if unknown and code == EXIT_OK:
        print(f"Unknown at {unknown}", file=sys.stderr)
        code = EXIT_MISSING
    return code


def thm13_count(levels: Iterable[tuple[int, Sequence]]) -> tuple[int, int]:
    hits = total = 0
    for _, fs in levels:
        total += 1
        hits += check_thm13_hypothesis(fs)
    return hits, total


def cmd_thm13_stats(args) -> int:
    src = DataSource(args.facts, None, args.offline, args.cache_dir)
    primes = _primes(parse_range(args.levels))
    hits, total = thm13_count((p, src.factors(p)) for p in primes)
    pct = f"{100 * hits / total:.2f}" if total else ""
    report = Report(("satisfying", "total", "percent"), ((hits, total, pct),))
    sys.stdout.write(render(report, args.format))
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="md")
    common.add_argument("--offline", action="store_true", help="use only the fixture bundle and cache")
    common.add_argument("--cache-dir", help="directory for cached database queries")
    common.add_argument("--facts", help="fixture bundle directory (defaults to the bundled one)")
    common.add_argument("--kernel-data", help="kernel-exponent JSON replacing the bundled one")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="artifact", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("genus", parents=[common], help="genus invariants of X0(N)")
    g.add_argument("levels", help="N or a..b")
    g.set_defaults(func=cmd_genus)

    m = sub.add_parser("classify-morphisms", parents=[common], help="morphisms X0(p) -> curves of genus >= 2")
    m.add_argument("levels")
    m.add_argument("--show-residual", action="store_true", help="print the subsets settled by the genus-2 table")
    m.set_defaults(func=cmd_classify_morphisms)

    d = sub.add_parser("classify-degree", parents=[common], help="infinitely many degree-d points?")
    d.add_argument("levels")
    d.add_argument("--degree", "-d", type=int, default=6)
    d.add_argument("--expect-theorem17", action="store_true", help="compare the Infinite set with the known list")
    d.set_defaults(func=cmd_classify_degree)

    t = sub.add_parser("thm13-stats", parents=[common], help="count levels with at most 2 dimensions outside the two largest factors")
    t.add_argument("levels")
    t.set_defaults(func=cmd_thm13_stats)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, ValidationError) as exc:
        print(f"invalid data: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (CacheMiss, NetworkError) as exc:
        print(f"missing data: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
