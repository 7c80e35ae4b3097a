"""Independent brute-force count for the decomposition statistic.

    python tools/thm13_golden.py FIXTURE_DIR BOUND OUT.json

For each prime p < BOUND, tries every choice of at most one w-invariant and at
most one w-anti-invariant factor and asks whether the complement has dimension
at most 2.  Reads factors.json directly; no code from the package is used.
Primes without records have genus 0 and satisfy the condition vacuously.
"""

import itertools
import json
import sys
from collections import defaultdict
from pathlib import Path


def sieve(n):
    flags = bytearray([1]) * n
    flags[:2] = b"\x00\x00"
    for i in range(2, int(n**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return [i for i in range(n) if flags[i]]


def satisfies(factors):
    plus = [f["dim"] for f in factors if f["fricke"] == 1]
    minus = [f["dim"] for f in factors if f["fricke"] == -1]
    total = sum(plus) + sum(minus)
    for a, b in itertools.product([0] + plus, [0] + minus):
        if total - a - b <= 2:
            return True
    return False


def main(fixture_dir, bound, out):
    doc = json.loads((Path(fixture_dir) / "factors.json").read_text())
    by_level = defaultdict(list)
    for rec in doc["records"]:
        by_level[rec["level"]].append(rec)
    primes = sieve(bound)
    hits = sum(satisfies(by_level.get(p, [])) for p in primes)
    failing = [p for p in primes if not satisfies(by_level.get(p, []))]
    result = {"bound": bound, "satisfying": hits, "total": len(primes), "failing": failing}
    Path(out).write_text(json.dumps(result, indent=1) + "\n")
    print(f"{hits}/{len(primes)}")


if __name__ == "__main__":
    main(sys.argv[1], int(sys.argv[2]), sys.argv[3])
