"""Infinitude of degree-d points on X_0(p): witnesses, finiteness gates and the degree-6 classifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Callable, Iterable, Mapping

from .arith import genus_x0, is_prime
from .jacobian import (
    Genus2QuotientTable,
    KernelData,
    LevelStatus,
    NeedsKernelData,
    NewformFactor,
    classify_level,
)
from .pointbounds import finite_by_ogg, finiteness_threshold
from .quadforms import genus_x0_plus

# Infinite set for degree 6 below the bundled data bound.
EXPECTED_DEGREE6_INFINITE = frozenset(
    [p for p in range(2, 152) if is_prime(p)] + [163, 167, 179, 181, 191, 227, 239, 269]
)

# Levels below this bound have the morphism classification of X_0(p) available.
MORPHISM_DATA_BOUND = 3000

W60_CERTIFICATE = "W60_no_positive_rank_translate"


class MissingFacts(LookupError):
    def __init__(self, level: int, missing: Iterable[str]):
        self.level = level
        self.missing = tuple(missing)
        super().__init__(f"level {level}: missing {', '.join(self.missing)}")


@dataclass(frozen=True)
class EllipticCurveRecord:
    conductor: int
    rank: int
    modular_degree: int
    label: str

    def __post_init__(self):
        if self.modular_degree < 1 or self.rank < 0 or self.conductor < 1:
            raise ValueError(f"invalid elliptic curve record {self.label}")


@dataclass(frozen=True)
class Certificate:
    level: int
    statement_id: str
    source: str


@dataclass(frozen=True)
class KnownDensity:
    """Imported classifications of levels with infinitely many points of degree 2..5.

    ``complete`` lists are "if and only if" statements.  A conditional list
    only decides levels whose lower degrees are all finite.
    """

    complete: Mapping[int, frozenset[int]] = field(default_factory=dict)
    conditional: Mapping[int, frozenset[int]] = field(default_factory=dict)

    def get(self, level: int, degree: int) -> bool | None:
        if degree in self.complete:
            return level in self.complete[degree]
        if degree in self.conditional:
            lower = [self.get(level, d) for d in range(2, degree)]
            if all(v is False for v in lower):
                return level in self.conditional[degree]
        return None


@dataclass(frozen=True)
class FactorTables:
    """Per-level Jacobian data needed by the morphism-based rules."""

    factors: Mapping[int, tuple[NewformFactor, ...]]
    kernel_data: KernelData
    genus2: Genus2QuotientTable = field(default_factory=Genus2QuotientTable)


@dataclass(frozen=True)
class ExternalFacts:
    gonality: Mapping[int, tuple[int, int | None]] = field(default_factory=dict)
    plus_cubic_infinite: Mapping[int, bool] = field(default_factory=dict)
    elliptic_curves: tuple[EllipticCurveRecord, ...] = ()
    # conductors below this bound are covered completely by elliptic_curves
    elliptic_curve_bound: int = 0
    certificates: tuple[Certificate, ...] = ()
    known_density: KnownDensity = field(default_factory=KnownDensity)
    tables: FactorTables | None = None

    def __post_init__(self):
        for lvl, (lo, hi) in self.gonality.items():
            if hi is not None and lo > hi:
                raise ValueError(f"gonality bounds inverted at level {lvl}")

    def curves_of_conductor(self, p: int) -> list[EllipticCurveRecord]:
        if p >= self.elliptic_curve_bound:
            raise MissingFacts(p, ["elliptic_curves"])
        return [e for e in self.elliptic_curves if e.conductor == p]

    def gonality_of(self, p: int) -> tuple[int, int | None]:
        if p not in self.gonality:
            raise MissingFacts(p, ["gonality"])
        return self.gonality[p]

    def plus_cubic(self, p: int) -> bool:
        if p not in self.plus_cubic_infinite:
            raise MissingFacts(p, ["plus_cubic"])
        return self.plus_cubic_infinite[p]

    def factors_of(self, p: int) -> tuple[NewformFactor, ...]:
        if self.tables is None or p not in self.tables.factors:
            raise MissingFacts(p, ["newform_factors"])
        return self.tables.factors[p]

    def has_certificate(self, p: int, statement_id: str) -> Certificate | None:
        return next((c for c in self.certificates if c.level == p and c.statement_id == statement_id), None)


class Rule(Enum):
    GonalityDivides = "GonalityDivides"
    PlusQuotientElliptic = "PlusQuotientElliptic"
    PlusCubicPullback = "PlusCubicPullback"
    OggThreshold = "OggThreshold"
    KVGate = "KVGate"
    RankFilter = "RankFilter"
    DFMinimality = "DFMinimality"
    Certificate = "Certificate"
    KnownTable = "KnownTable"


_REQUIRED_INPUTS = {
    Rule.GonalityDivides: {"gonality_upper"},
    Rule.PlusQuotientElliptic: {"plus_genus"},
    Rule.PlusCubicPullback: {"plus_cubic_infinite", "cubic_infinite"},
    Rule.OggThreshold: {"threshold"},
    Rule.KVGate: {"gonality_lower", "genus", "small_degree_elliptic", "plus_cubic_infinite", "maps"},
    Rule.RankFilter: {"gonality_lower", "genus", "dim_cap", "small_factors"},
    Rule.DFMinimality: {"genus", "genus_bound", "positive_rank_curves", "plus_cubic_infinite", "maps"},
    Rule.Certificate: {"statement_id", "source", "gonality_lower"},
    Rule.KnownTable: {"degree", "infinite"},
}

_ANCHORS = {
    Rule.GonalityDivides: "gonal map composed with a power map, Hilbert irreducibility (Najman-Orlic gonality data)",
    Rule.PlusQuotientElliptic: "X0+(p) elliptic: degree-3 coordinate map composed with the quotient map",
    Rule.PlusCubicPullback: "pullback of cubic points on X0+(p) (Bars-Dalal)",
    Rule.OggThreshold: "Ogg F_4 point count with Frey's gonality bound: finite for p > 120d - 24",
    Rule.KVGate: "Kadets-Vogt: no low-degree map explains the degree, genus above the bound",
    Rule.RankFilter: "Debarre-Fahlaoui dimension bound with Kolyvagin-Kato for rank-0 factors",
    Rule.DFMinimality: "Kadets-Vogt d-minimality bound; Debarre-Fahlaoui curves map to positive-rank elliptic curves",
    Rule.Certificate: "imported certificate record with the gonality bound",
    Rule.KnownTable: "published classifications of degree 2, 3, 4 and 5 points on X0(N)",
}


@dataclass(frozen=True)
class EvidenceItem:
    rule_id: Rule
    inputs: Mapping[str, object]
    paper_anchor: str = ""

    def __post_init__(self):
        need = _REQUIRED_INPUTS[self.rule_id] - set(self.inputs)
        if need:
            raise ValueError(f"{self.rule_id.value} evidence lacks inputs {sorted(need)}")
        object.__setattr__(self, "inputs", MappingProxyType(dict(self.inputs)))
        if not self.paper_anchor:
            object.__setattr__(self, "paper_anchor", _ANCHORS[self.rule_id])

    def __reduce__(self):
        # mappingproxy does not pickle; rebuild from a plain dict in worker processes
        return (EvidenceItem, (self.rule_id, dict(self.inputs), self.paper_anchor))

    def as_dict(self) -> dict:
        return {"rule_id": self.rule_id.value, "inputs": dict(self.inputs), "anchor": self.paper_anchor}


class Status(Enum):
    Infinite = "Infinite"
    Finite = "Finite"
    Unknown = "Unknown"


@dataclass(frozen=True)
class DensityVerdict:
    level: int
    degree: int
    status: Status
    evidence: tuple[EvidenceItem, ...] = ()
    missing: tuple[str, ...] = ()
    conflict: bool = False

    def __post_init__(self):
        if self.status is not Status.Unknown and not self.evidence:
            raise ValueError("a decided verdict needs evidence")

    def as_dict(self) -> dict:
        return {
            "level": self.level,
            "degree": self.degree,
            "status": self.status.value,
            "evidence": [e.as_dict() for e in self.evidence],
            "missing": list(self.missing),
            "conflict": self.conflict,
        }


# ---------------------------------------------------------------- thresholds


def kv_thresholds(d: int) -> tuple[int, int, int]:
    """(m, epsilon, genus_bound) with m = ceil(d/2) - 1 and epsilon = 3d - 1 - 6m."""
    if d < 1:
        raise ValueError("degree must be positive")
    m = -(-d // 2) - 1
    eps = 3 * d - 1 - 6 * m
    return m, eps, max(d * (d - 1) // 2 + 1, 3 * m * (m - 1) + m * eps)


def kv_applicable(d: int) -> bool:
    """False once Ogg's threshold already beats the Kadets-Vogt genus route."""
    if d < 1:
        raise ValueError("degree must be positive")
    return not 6 * d * (d - 1) + 23 > finiteness_threshold(d)


def df_genus_bound(d: int) -> int:
    """A d-minimal curve that is not Debarre-Fahlaoui has genus at most (d-1)(d-2)/2 + 2."""
    return (d - 1) * (d - 2) // 2 + 2


def rank_filter_dim_cap(d: int, r: int = 0) -> int:
    """Largest dimension of an abelian variety inside W_d^r, namely floor(d/2) - r."""
    return d // 2 - r


# ---------------------------------------------------------------- small-degree maps


class MapVerdict(Enum):
    OnlyQuotient = "OnlyQuotient"
    NoneExists = "NoneExists"


def small_degree_maps(p: int, d: int, facts: ExternalFacts) -> MapVerdict:
    """Morphisms from X_0(p) to curves of genus >= 2 relevant to degree-d points (d <= 25)."""
    if d > 25:
        raise ValueError("only degrees up to 25 are covered")
    if p >= MORPHISM_DATA_BOUND:
        if finite_by_ogg(p, d):
            return MapVerdict.NoneExists
        raise MissingFacts(p, ["morphism classification"])
    tables = facts.tables
    if tables is None or p not in tables.factors:
        raise MissingFacts(p, ["newform_factors"])
    lv = classify_level(p, tables.factors[p], tables.kernel_data, tables.genus2)
    if lv.status is LevelStatus.Unresolved:
        raise NeedsKernelData(p, lv.missing)
    return MapVerdict.OnlyQuotient if lv.status is LevelStatus.OnlyQuotient else MapVerdict.NoneExists


def plus_small_degree_maps(p: int, d: int) -> MapVerdict:
    """X_0^+(p) has no non-constant map to a curve of genus >= 2 in the covered range."""
    if d > 12:
        raise ValueError("only degrees up to 12 are covered")
    if p < MORPHISM_DATA_BOUND or finite_by_ogg(p, 2 * d):
        return MapVerdict.NoneExists
    raise MissingFacts(p, ["morphism classification"])


# ---------------------------------------------------------------- rules


def _plus_genus(p: int) -> int:
    return genus_x0_plus(p) if p > 3 else 0


def infinitude_witness(p: int, facts: ExternalFacts) -> EvidenceItem | None:
    """First constructive source of infinitely many degree-6 points, if any."""
    missing: list[str] = []
    gon: tuple[int, int | None] | None = None
    try:
        gon = facts.gonality_of(p)
    except MissingFacts as e:
        missing += e.missing
    if gon is not None and gon[1] is not None and gon[1] in (1, 2, 3):
        return EvidenceItem(Rule.GonalityDivides, {"gonality_upper": gon[1]})
    gp = _plus_genus(p)
    if gp == 1:
        return EvidenceItem(Rule.PlusQuotientElliptic, {"plus_genus": gp})
    if gon is not None and gon[1] == 6:
        return EvidenceItem(Rule.GonalityDivides, {"gonality_upper": 6})
    try:
        pc = facts.plus_cubic(p)
    except MissingFacts as e:
        missing += e.missing
        pc = None
    if pc:
        cubic = facts.known_density.get(p, 3)
        if cubic is False:
            return EvidenceItem(Rule.PlusCubicPullback, {"plus_cubic_infinite": True, "cubic_infinite": False})
        if cubic is None:
            missing.append("known_density[3]")
    if missing:
        raise MissingFacts(p, missing)
    return None


def _small_degree_elliptic(p: int, facts: ExternalFacts, d: int) -> list[str]:
    return [e.label for e in facts.curves_of_conductor(p) if e.rank >= 1 and e.modular_degree <= d]


def finiteness_by_kv_deg6(p: int, facts: ExternalFacts) -> EvidenceItem | None:
    if not 200 < p <= finiteness_threshold(6):
        return None
    g = genus_x0(p)
    if g <= kv_thresholds(6)[2]:
        return None
    lo, _ = facts.gonality_of(p)
    if lo < 7:
        return None
    bad = _small_degree_elliptic(p, facts, 6)
    if bad:
        return None
    if facts.plus_cubic(p):
        return None
    maps = small_degree_maps(p, 6, facts)
    if maps is not MapVerdict.OnlyQuotient:
        return None
    return EvidenceItem(
        Rule.KVGate,
        {"gonality_lower": lo, "genus": g, "small_degree_elliptic": bad, "plus_cubic_infinite": False, "maps": maps.value},
    )


def finiteness_by_rank_filter(p: int, facts: ExternalFacts, d: int = 6) -> EvidenceItem | None:
    lo, _ = facts.gonality_of(p)
    g = genus_x0(p)
    if lo <= d or g < d + 1:
        return None
    cap = rank_filter_dim_cap(d)
    small = [f for f in facts.factors_of(p) if f.dim <= cap]
    if any(f.analytic_rank is None for f in small):
        raise MissingFacts(p, ["analytic_rank"])
    if any(f.analytic_rank != 0 for f in small):
        return None
    return EvidenceItem(
        Rule.RankFilter,
        {"gonality_lower": lo, "genus": g, "dim_cap": cap, "small_factors": [f.label for f in small]},
    )


def finiteness_by_df_minimality(p: int, facts: ExternalFacts, d: int = 6) -> EvidenceItem | None:
    lower = [facts.known_density.get(p, k) for k in range(2, d)]
    if any(v is None for v in lower):
        raise MissingFacts(p, [f"known_density[{k}]" for k, v in zip(range(2, d), lower) if v is None])
    if any(lower):
        return None
    g = genus_x0(p)
    bound = df_genus_bound(d)
    if g <= bound:
        return None
    positive = [e.label for e in facts.curves_of_conductor(p) if e.rank >= 1]
    if positive or facts.plus_cubic(p):
        return None
    maps = small_degree_maps(p, d, facts)
    if maps is not MapVerdict.OnlyQuotient:
        return None
    return EvidenceItem(
        Rule.DFMinimality,
        {"genus": g, "genus_bound": bound, "positive_rank_curves": positive, "plus_cubic_infinite": False, "maps": maps.value},
    )


def finiteness_by_certificate(p: int, facts: ExternalFacts, d: int = 6) -> EvidenceItem | None:
    cert = facts.has_certificate(p, W60_CERTIFICATE)
    if cert is None:
        return None
    lo, _ = facts.gonality_of(p)
    if lo <= d:
        return None
    return EvidenceItem(Rule.Certificate, {"statement_id": cert.statement_id, "source": cert.source, "gonality_lower": lo})


def _known_short_circuit(p: int, facts: ExternalFacts) -> EvidenceItem | None:
    for k in (2, 3):
        if facts.known_density.get(p, k):
            return EvidenceItem(Rule.KnownTable, {"degree": k, "infinite": True})
    return None


def _ogg(p: int, d: int) -> EvidenceItem | None:
    if finite_by_ogg(p, d):
        return EvidenceItem(Rule.OggThreshold, {"threshold": finiteness_threshold(d)})
    return None


_Step = Callable[[int, ExternalFacts], "EvidenceItem | None"]

_INFINITE_STEPS: tuple[_Step, ...] = (_known_short_circuit, infinitude_witness)
_FINITE_STEPS: tuple[_Step, ...] = (
    lambda p, f: _ogg(p, 6),
    finiteness_by_kv_deg6,
    finiteness_by_rank_filter,
    finiteness_by_df_minimality,
    finiteness_by_certificate,
)


def _run(steps, p, facts, missing: list[str]) -> EvidenceItem | None:
    for step in steps:
        try:
            ev = step(p, facts)
        except MissingFacts as e:
            missing.extend(m for m in e.missing if m not in missing)
            continue
        except NeedsKernelData:
            if "kernel_exponents" not in missing:
                missing.append("kernel_exponents")
            continue
        if ev is not None:
            return ev
    return None


def classify_degree6(p: int, facts: ExternalFacts) -> DensityVerdict:
    """Infinite / Finite / Unknown for degree-6 points on X_0(p); never raises on data gaps.

    Both sides are evaluated so that a prime with witness and finiteness
    evidence at once is reported as a conflict rather than silently decided.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    missing: list[str] = []
    inf = _run(_INFINITE_STEPS, p, facts, missing)
    fin = _run(_FINITE_STEPS, p, facts, missing)
    if inf is not None and fin is not None:
        return DensityVerdict(p, 6, Status.Unknown, (inf, fin), conflict=True)
    if inf is not None:
        return DensityVerdict(p, 6, Status.Infinite, (inf,))
    if fin is not None:
        return DensityVerdict(p, 6, Status.Finite, (fin,))
    return DensityVerdict(p, 6, Status.Unknown, missing=tuple(missing))


def classify_degree(p: int, d: int, facts: ExternalFacts) -> DensityVerdict:
    """Degree-d classifier for d <= 6."""
    if d == 6:
        return classify_degree6(p, facts)
    if d > 6:
        raise ValueError(
            "degrees above 6 are not supported: the gonality of X0(163) is only known to be 7 or 8,"
            " so even degree 7 cannot be decided from available data"
        )
    if d < 1:
        raise ValueError("degree must be positive")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if d == 1:
        return _classify_degree1(p, facts)
    known = facts.known_density.get(p, d)
    if known is None:
        return DensityVerdict(p, d, Status.Unknown, missing=(f"known_density[{d}]",))
    ev = EvidenceItem(Rule.KnownTable, {"degree": d, "infinite": known})
    return DensityVerdict(p, d, Status.Infinite if known else Status.Finite, (ev,))


def _classify_degree1(p: int, facts: ExternalFacts) -> DensityVerdict:
    g = genus_x0(p)
    ev = EvidenceItem(Rule.KnownTable, {"degree": 1, "infinite": None, "genus": g})
    if g == 0:
        return DensityVerdict(p, 1, Status.Infinite, (ev,))
    if g >= 2:
        return DensityVerdict(p, 1, Status.Finite, (ev,))
    try:
        curves = facts.curves_of_conductor(p)
    except MissingFacts as e:
        return DensityVerdict(p, 1, Status.Unknown, missing=e.missing)
    positive = any(c.rank >= 1 for c in curves)
    ev = EvidenceItem(Rule.KnownTable, {"degree": 1, "infinite": positive, "genus": g, "ranks": [c.rank for c in curves]})
    return DensityVerdict(p, 1, Status.Infinite if positive else Status.Finite, (ev,))
