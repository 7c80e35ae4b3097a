"""Per-factor (dim, Fricke sign, tie-breaking traces) from the Brandt module, for lo <= p < hi.

    python -m tools.fixturegen.brandt_factors out.jsonl lo hi

Traces of B_2 and B_3 are computed only for factors whose dimension is shared
with another factor at the same level (they only serve to order labels).
"""

from __future__ import annotations

import json
import random
import sys
import time
from collections import Counter
from pathlib import Path

from flint import fmpz, fmpz_mat, nmod_mat

from .brandt import Brandt, _hecke

_Q = (1 << 61) - 1


def _separating(br: Brandt):
    """An integer combination of Hecke operators whose charpoly separates every orbit."""
    for c in range(8):
        op = br.b2 + c * br.b3
        blocks = br._decompose(op, 3 + 4 * c)
        if all(m == 1 for _, m, _ in blocks):
            return op, 3 + 4 * c
    ops = [br.b2, br.b3, _hecke(br, 5), _hecke(br, 7)]
    eis = [3, 4, 6, 8]
    rng = random.Random(br.p)
    for _ in range(40):
        cs = [1] + [rng.randint(-3, 3) for _ in ops[1:]]
        op = ops[0]
        for c, o in zip(cs[1:], ops[1:]):
            op = op + c * o
        e = sum(c * x for c, x in zip(cs, eis))
        if all(m == 1 for _, m, _ in br._decompose(op, e)):
            return op, e
    raise ValueError(f"level {br.p}: no separating operator")


def _restricted_trace(kernel_rows: nmod_mat, op: nmod_mat) -> int:
    """Trace of op on the row space of an RREF basis."""
    img = kernel_rows * op
    total = 0
    for i in range(kernel_rows.nrows()):
        piv = next(k for k in range(kernel_rows.ncols()) if int(kernel_rows[i, k]))
        total += int(img[i, piv])
    total %= _Q
    return total - _Q if total > _Q // 2 else total


def _to_nmod(m: fmpz_mat) -> nmod_mat:
    return nmod_mat([[int(m[i, k]) % _Q for k in range(m.ncols())] for i in range(m.nrows())], _Q)


def analyse(p: int) -> dict:
    t0 = time.time()
    br = Brandt(p)
    op, eis = _separating(br)
    factors = []
    for fr_eig, fricke in ((1, -1), (-1, 1)):
        block = br._sign_block(op, fr_eig)
        if block.nrows() == 0:
            continue
        parts = []
        for f, _ in block.charpoly().factor()[1]:
            if fr_eig == 1 and f.degree() == 1 and f(eis) == 0:
                continue
            parts.append(f)
        dims = Counter(f.degree() for f in parts)
        need = any(dims[f.degree()] > 1 for f in parts)
        if need:
            bq = _to_nmod(block)
            b2 = _to_nmod(br._sign_block(br.b2, fr_eig))
            b3 = _to_nmod(br._sign_block(br.b3, fr_eig))
        for f in parts:
            traces = None
            if dims[f.degree()] > 1:
                # f(op) mod q, then its left kernel in RREF
                n = bq.nrows()
                acc = nmod_mat(n, n, _Q)
                for c in reversed(f.coeffs()):
                    acc = acc * bq
                    for i in range(n):
                        acc[i, i] = (int(acc[i, i]) + int(c)) % _Q
                ker = acc.transpose().nullspace()
                basis, k = ker
                rows = nmod_mat([[int(basis[r, c]) for r in range(n)] for c in range(k)], _Q).rref()[0]
                traces = [_restricted_trace(rows, b2), _restricted_trace(rows, b3)]
            factors.append({"dim": f.degree(), "fricke": fricke, "traces": traces,
                            "poly": [int(c) for c in f.coeffs()] if f.degree() <= 8 else None})
    return {"p": p, "rank": br.n, "factors": factors, "seconds": round(time.time() - t0, 2)}


def main(argv: list[str]) -> None:
    out = Path(argv[0])
    lo, hi = int(argv[1]), int(argv[2])
    done = set()
    if out.exists():
        done = {json.loads(line)["p"] for line in out.read_text().splitlines() if line.strip()}
    with out.open("a") as fh:
        for p in range(lo, hi):
            if p in done or not fmpz(p).is_prime():
                continue
            rec = analyse(p)
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
            fh.flush()
            print(p, len(rec["factors"]), rec["seconds"], flush=True)


if __name__ == "__main__":
    main(sys.argv[1:])
