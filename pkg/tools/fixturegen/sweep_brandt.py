"""Brandt-module dims and Fricke signs for all primes p < bound; one JSON line per level.

    python -m tools.fixturegen.sweep_brandt out.jsonl [bound]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from flint import fmpz

from .brandt import Brandt


def main(argv: list[str]) -> None:
    out = Path(argv[0])
    bound = int(argv[1]) if len(argv) > 1 else 10000
    done = set()
    if out.exists():
        done = {json.loads(line)["p"] for line in out.read_text().splitlines() if line.strip()}
    with out.open("a") as fh:
        for p in range(11, bound):
            if p in done or not fmpz(p).is_prime():
                continue
            b = Brandt(p)
            blocks = b.factor_blocks()
            rec = {"p": p, "rank": b.n, "blocks": [list(x) for x in blocks]}
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
            fh.flush()


if __name__ == "__main__":
    main(sys.argv[1:])
