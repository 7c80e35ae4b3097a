"""Assemble the offline fixture bundle from the sweep outputs.

    python -m tools.fixturegen.assemble OUT_DIR

Inputs (tools/fixturegen/out/):
  modsym.jsonl          exact decomposition, traces, central values, kernel exponents (p < 3000)
  brandt.jsonl          Brandt-module charpoly blocks (cross-check, p < 10000)
  brandt_factors.jsonl  resolved Brandt factors with tie-breaking traces (3000 <= p < 10000)
"""

from __future__ import annotations

import json
import sys
from collections import Counter
from pathlib import Path

from artifact.arith import genus_x0, primes_in
from artifact.ingest import SCHEMA_VERSION, write_bundle_file
from artifact.jacobian import label_sort_key
from artifact.quadforms import genus_x0_plus

OUT = Path(__file__).parent / "out"
MORPHISM_BOUND = 3000
FACTOR_BOUND = 10000

NAJMAN_ORLIC = "Najman-Orlic, gonality of X0(N) (Math. Comp. 2023)"
OGG_HS = "Ogg 1974; Hasegawa-Shimura 1999 (gonality at most 3)"
BARS_DALAL = "Bars-Dalal, cubic points on X0+(p) (2022)"


def letters(i: int) -> str:
    """0 -> a, 25 -> z, 26 -> ba, ... (base-26 with a as zero digit)."""
    s = ""
    while True:
        s = chr(ord("a") + i % 26) + s
        i //= 26
        if i == 0:
            return s


def _jsonl(name: str) -> dict[int, dict]:
    path = OUT / name
    if not path.exists():
        return {}
    return {r["p"]: r for r in map(json.loads, path.read_text().splitlines()) if r}


def _analytic_rank(f: dict) -> int:
    # exact when zero; otherwise the least value compatible with the root number
    if f["central_value_nonzero"]:
        return 0
    return 1 if f["fricke"] == 1 else 2


def _order(factors: list[dict]) -> list[int]:
    def key(i):
        f = factors[i]
        return (f["dim"], f.get("traces") or [], f["fricke"], f.get("poly") or [])

    return sorted(range(len(factors)), key=key)


def main(out_dir: str, morphism_bound: int = MORPHISM_BOUND, factor_bound: int = FACTOR_BOUND) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    modsym, brandt, bfac = _jsonl("modsym.jsonl"), _jsonl("brandt.jsonl"), _jsonl("brandt_factors.jsonl")

    factor_recs, kernel_recs, ec_recs = [], [], []
    problems = []
    for p in primes_in(2, factor_bound):
        g = genus_x0(p)
        if g == 0:
            continue
        if p < morphism_bound:
            rec = modsym.get(p)
            if rec is None:
                problems.append(f"{p}: no modular-symbols record")
                continue
            fs = rec["factors"]
        else:
            rec = bfac.get(p)
            if rec is None:
                problems.append(f"{p}: no Brandt factor record")
                continue
            fs = [{**f, "central_value_nonzero": None} for f in rec["factors"]]
        order = _order(fs)
        label = {i: f"{p}.2.a.{letters(k)}" for k, i in enumerate(order)}
        if sum(f["dim"] for f in fs) != g or sum(f["dim"] for f in fs if f["fricke"] == 1) != genus_x0_plus(p):
            problems.append(f"{p}: dimension check failed")
        # Brandt cross-check: dimensions and signs, up to blocks it could not separate
        if p in brandt and p < morphism_bound:
            want = Counter((d, s) for d, m, s in brandt[p]["blocks"] for _ in range(m))
            have = Counter((f["dim"], f["fricke"]) for f in fs)
            amb = [b for b in brandt[p]["blocks"] if b[1] != 1]
            if want != have and not amb:
                problems.append(f"{p}: Brandt {sorted(want.items())} vs modular symbols {sorted(have.items())}")
            if amb and sum(d * c for (d, _), c in want.items()) != g:
                problems.append(f"{p}: Brandt block dimensions do not sum to the genus")
        for k, i in enumerate(order):
            f = fs[i]
            rank = _analytic_rank(f) if p < morphism_bound else None
            factor_recs.append(
                {"label": label[i], "level": p, "dim": f["dim"], "fricke": f["fricke"], "analytic_rank": rank}
            )
        if p < morphism_bound:
            for members, exp in rec["exponents"]:
                dim = sum(fs[i]["dim"] for i in members)
                if len(members) == 1 and dim == 1:
                    f = fs[members[0]]
                    ec_recs.append(
                        {"conductor": p, "rank": _analytic_rank(f), "modular_degree": exp,
                         "label": label[members[0]].replace(".2.a.", ".")}
                    )
                elif dim >= 2:
                    kernel_recs.append(
                        {"level": p, "members": sorted((label[i] for i in members), key=label_sort_key),
                         "exponent": exp}
                    )
    if problems:
        print("\n".join(problems), file=sys.stderr)
        raise SystemExit(1)

    factor_recs.sort(key=lambda r: label_sort_key(r["label"]))
    kernel_recs.sort(key=lambda r: (r["level"], [label_sort_key(m) for m in r["members"]]))
    ec_recs.sort(key=lambda r: (r["conductor"], len(r["label"]), r["label"]))

    files = {}

    def emit(name, recs, provenance, **extra):
        write_bundle_file(out, name, recs, **extra)
        files[name] = {"provenance": provenance, "records": len(recs)}

    emit(
        "factors", factor_recs,
        "computed: p < 3000 from exact modular symbols (signs, Hecke traces, central values); "
        "3000 <= p < 10000 from the Brandt module of supersingular 2- and 3-isogenies",
        fricke_convention="fricke = +1 marks the w_p-invariant part (database convention); "
        "these factors have odd analytic rank",
        analytic_rank_note="0 is exact (central value nonzero); positive values are the least rank of the right parity; "
        "null where not computed",
    )
    emit("kernel_exponents", kernel_recs,
         "computed: exponent of the kernel of the induced polarization, via exact lattice projections")
    emit("genus2_table", [], "published tables of genus-2 new quotients: none occur at prime level")
    emit("elliptic_curves", ec_recs,
         "computed: optimal curve per isogeny class of prime conductor < 3000; modular degree = kernel exponent",
         conductor_bound=morphism_bound)

    gon = []
    small = [p for p in primes_in(2, 48)] + [59, 71]
    gon += [{"level": p, "lower": 1, "upper": 3, "source": OGG_HS} for p in small]
    six = [97, 113, 127, 137, 139, 149, 151, 179, 181, 227, 239]
    gon += [{"level": p, "lower": 6, "upper": 6, "source": NAJMAN_ORLIC} for p in six]
    gon += [{"level": 163, "lower": 7, "upper": 8, "source": NAJMAN_ORLIC}]
    gon += [{"level": p, "lower": 8, "upper": 8, "source": NAJMAN_ORLIC} for p in (193, 197)]
    seven = [157, 173, 199] + [p for p in primes_in(200, 697) if p not in (227, 239, 269)]
    gon += [{"level": p, "lower": 7, "upper": None, "source": NAJMAN_ORLIC} for p in seven]
    gon.sort(key=lambda r: r["level"])
    emit("gonality", gon, "published gonality bounds")

    pc_true = [67, 73, 103, 107, 109, 163, 167, 191, 269]
    pc_false = [193] + [p for p in primes_in(200, 697) if p not in (227, 239, 269)]
    pc = [{"level": p, "infinite": True, "source": BARS_DALAL} for p in pc_true]
    pc += [{"level": p, "infinite": False, "source": BARS_DALAL} for p in pc_false]
    pc.sort(key=lambda r: r["level"])
    emit("plus_cubic", pc, "published classification of cubic points on X0+(p)")

    emit(
        "certificates",
        [{"level": 197, "statement_id": "W60_no_positive_rank_translate",
          "source": "W_6^0 X0(197) contains no translate of a positive-rank abelian variety: explicit "
                    "parametrization X0(197) -> 197.a, enumeration over F_3, lifted by a reduction lemma"}],
        "imported certificate (not recomputed)",
    )

    def expand(spec):
        out = []
        for part in spec:
            if isinstance(part, tuple):
                out += list(range(part[0], part[1] + 1))
            else:
                out.append(part)
        return out

    quad = expand([(1, 33), (35, 37), (39, 41), 43, (46, 50), 53, 59, 61, 65, 71, 79, 83, 89, 101, 131])
    cubic = expand([(1, 29), 31, 32, 34, 36, 37, 43, 45, 49, 50, 54, 64, 81])
    quartic = expand([(1, 75), (77, 83), (85, 89), 91, 92, (94, 96), (98, 101), 103, 104, 107, 111, 118, 119,
                      121, 123, 125, 128, 131, (141, 143), 145, 155, 159, 167, 191])
    kd = [
        {"degree": 2, "complete": True, "infinite_levels": quad, "source": "Bars 1999"},
        {"degree": 3, "complete": True, "infinite_levels": cubic, "source": "Jeon 2021"},
        {"degree": 4, "complete": True, "infinite_levels": quartic, "source": "Hwang-Jeon; Derickx-Orlic 2023"},
        {"degree": 5, "complete": False, "infinite_levels": [109],
         "source": "Derickx-Hwang-Jeon-Orlic: decided only where degrees <= 4 are finite"},
    ]
    emit("known_density", kd, "published classifications of degree 2-5 points on X0(N)")

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "bundle_version": "1",
        "factor_level_bound": factor_bound,
        "morphism_level_bound": morphism_bound,
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(factor_recs)} factors, {len(kernel_recs)} exponents, {len(ec_recs)} curves", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1], *map(int, sys.argv[2:4]))
