"""Decompose J_0(p) for all primes p < bound via modular symbols; one JSON line per level.

Resumable: levels already present in the output file are skipped.

    python -m tools.fixturegen.sweep_modsym out.jsonl [bound]
"""

from __future__ import annotations

import itertools
import json
import sys
import time
from pathlib import Path

from flint import fmpz

from .level import Level


def needs_exponent(g: int, dim_total: int, is_full: bool, is_plus: bool) -> bool:
    if dim_total < 2 or is_full or is_plus:
        return False
    return not (2 * g - 2 < 3 * (2 * dim_total - 2))


def analyse(p: int) -> dict:
    t0 = time.time()
    lv = Level(p)
    lv.compute_traces()
    if lv.genus:
        lv.central_value_test()
    n = len(lv.factors)
    plus = frozenset(i for i, f in enumerate(lv.factors) if f.fricke == 1)
    exponents = []
    for k in range(1, n):
        for sub in itertools.combinations(range(n), k):
            dim = sum(lv.factors[i].dim for i in sub)
            want = needs_exponent(lv.genus, dim, False, frozenset(sub) == plus)
            if want or (k == 1 and dim == 1):
                exponents.append([list(sub), lv.kernel_exponent(sub)])
    return {
        "p": p,
        "genus": lv.genus,
        "op_coeffs": list(lv.op_coeffs),
        "factors": [
            {
                "dim": f.dim,
                "fricke": f.fricke,
                "traces": f.traces,
                "central_value_nonzero": f.central_value_nonzero,
                "poly": [int(c) for c in f.poly.coeffs()],
            }
            for f in lv.factors
        ],
        "exponents": exponents,
        "seconds": round(time.time() - t0, 2),
    }


def main(argv: list[str]) -> None:
    out = Path(argv[0])
    bound = int(argv[1]) if len(argv) > 1 else 3000
    done = set()
    if out.exists():
        done = {json.loads(line)["p"] for line in out.read_text().splitlines() if line.strip()}
    with out.open("a") as fh:
        for p in range(3, bound):
            if p in done or not fmpz(p).is_prime():
                continue
            rec = analyse(p)
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
            fh.flush()
            print(p, rec["genus"], len(rec["factors"]), rec["seconds"], flush=True)


if __name__ == "__main__":
    main(sys.argv[1:])
