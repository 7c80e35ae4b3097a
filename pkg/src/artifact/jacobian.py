"""Isogeny factors of J_0(p), their 2^n abelian subvarieties, and the morphism classifier."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .arith import genus_x0, is_prime
from .quadforms import genus_x0_plus


class ValidationError(ValueError):
    """Factor data inconsistent with the genus of the level."""


class NeedsKernelData(LookupError):
    """Some subsets cannot be decided without their kernel exponent."""

    def __init__(self, level: int, subsets: list[tuple[str, ...]]):
        self.level = level
        self.subsets = subsets
        listed = "; ".join("{" + ", ".join(s) + "}" for s in subsets)
        super().__init__(f"level {level}: kernel exponent needed for {listed}")


_LABEL = re.compile(r"^(\d+)\.2\.a\.([a-z]+)$")


def label_sort_key(label: str) -> tuple:
    """Order newform labels by level, then by the base-26 orbit code (a..z, ba, bb, ...)."""
    m = _LABEL.match(label)
    if not m:
        return (float("inf"), 0, label)
    code = 0
    for ch in m.group(2):
        code = code * 26 + ord(ch) - ord("a")
    return (int(m.group(1)), code, label)


@dataclass(frozen=True)
class NewformFactor:
    label: str
    level: int
    dim: int
    fricke: int
    analytic_rank: int | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"{self.label}: dimension must be positive, got {self.dim}")
        if self.fricke not in (1, -1):
            raise ValidationError(f"{self.label}: Fricke eigenvalue must be +1 or -1, got {self.fricke}")
        if self.analytic_rank is not None and self.analytic_rank < 0:
            raise ValidationError(f"{self.label}: negative analytic rank")


@dataclass(frozen=True)
class SubvarietySelection:
    level: int
    members: tuple[str, ...]
    dim_total: int
    kernel_exponent: int | None = None
    mask: int = 0

    def __post_init__(self):
        if self.kernel_exponent is not None and self.kernel_exponent < 1:
            raise ValueError("kernel exponent must be at least 1")


class KernelData:
    """Kernel exponents keyed by (level, sorted member labels)."""

    def __init__(self, entries: Iterable[tuple[int, Iterable[str], int]] = ()):
        self._map: dict[tuple[int, tuple[str, ...]], int] = {}
        for level, members, exponent in entries:
            self.add(level, members, exponent)

    @staticmethod
    def _key(level: int, members: Iterable[str]) -> tuple[int, tuple[str, ...]]:
        return level, tuple(sorted(members, key=label_sort_key))

    def add(self, level: int, members: Iterable[str], exponent: int) -> None:
        if exponent < 1:
            raise ValueError(f"kernel exponent must be positive at level {level}")
        self._map[self._key(level, members)] = exponent

    def get(self, level: int, members: Iterable[str]) -> int | None:
        return self._map.get(self._key(level, members))

    def __len__(self) -> int:
        return len(self._map)

    def levels(self) -> set[int]:
        return {lvl for lvl, _ in self._map}


@dataclass(frozen=True)
class Genus2QuotientTable:
    entries: Mapping[int, bool] = field(default_factory=dict)

    def excludes_genus2(self, level: int) -> bool:
        """True unless the table records a genus-2 new quotient at this level.

        Prime levels are covered exhaustively by the hyperelliptic-quotient
        classifications, so an absent prime level counts as excluded.
        """
        if level in self.entries:
            return not self.entries[level]
        return is_prime(level)


class Outcome(Enum):
    RuledOut_Case1_KernelRH = "ruled-out:kernel-exponent"
    RuledOut_Case2_OnlyFrickeInvolution = "ruled-out:degree-two"
    Survives_QuotientMap_Case3 = "survives:quotient-map"
    RuledOut_Case4_Genus2Table = "ruled-out:genus-2-table"
    NeedsKernelData = "needs-kernel-data"


@dataclass(frozen=True)
class MorphismVerdict:
    selection: SubvarietySelection
    outcome: Outcome
    detail: str


class LevelStatus(Enum):
    OnlyQuotient = "only the quotient map X0(p) -> X0+(p)"
    NoTargets = "no genus >= 2 targets"
    Unresolved = "unresolved"


@dataclass(frozen=True)
class ResidualRow:
    p: int
    g: int
    g_plus: int
    g_prime: int
    exponent: int
    rh_bound: int


@dataclass(frozen=True)
class LevelVerdict:
    p: int
    genus: int
    plus_genus: int
    status: LevelStatus
    verdicts: tuple[MorphismVerdict, ...]

    @property
    def missing(self) -> list[tuple[str, ...]]:
        return [v.selection.members for v in self.verdicts if v.outcome is Outcome.NeedsKernelData]

    def residual_rows(self) -> list[ResidualRow]:
        return [
            ResidualRow(
                self.p, self.genus, self.plus_genus, v.selection.dim_total, v.selection.kernel_exponent,
                (2 * self.genus - 2) // (2 * v.selection.dim_total - 2),
            )
            for v in self.verdicts
            if v.outcome is Outcome.RuledOut_Case4_Genus2Table
        ]


def _sorted_factors(factors: Iterable[NewformFactor]) -> list[NewformFactor]:
    fs = sorted(factors, key=lambda f: label_sort_key(f.label))
    levels = {f.level for f in fs}
    if len(levels) > 1:
        raise ValueError(f"factors from several levels: {sorted(levels)}")
    labels = [f.label for f in fs]
    if len(set(labels)) != len(labels):
        raise ValidationError(f"duplicate labels in {labels}")
    return fs


def enumerate_subvarieties(
    factors: Iterable[NewformFactor], kernel_data: KernelData | None = None
) -> Iterator[SubvarietySelection]:
    """Stream all 2^n subsets; bit i of the mask is the i-th factor in label order."""
    fs = _sorted_factors(factors)
    level = fs[0].level if fs else 0
    for mask in range(1 << len(fs)):
        chosen = [f for i, f in enumerate(fs) if mask >> i & 1]
        members = tuple(f.label for f in chosen)
        exp = kernel_data.get(level, members) if kernel_data is not None and chosen else None
        yield SubvarietySelection(level, members, sum(f.dim for f in chosen), exp, mask)


def not_curve_criterion(g: int, sel: SubvarietySelection) -> bool:
    """2g - 2 < exp * (2g' - 2): no curve has this subvariety as its pulled-back Jacobian."""
    if sel.dim_total < 2:
        raise ValueError("criterion needs a subvariety of dimension at least 2")
    if sel.kernel_exponent is None:
        raise NeedsKernelData(sel.level, [sel.members])
    return 2 * g - 2 < sel.kernel_exponent * (2 * sel.dim_total - 2)


def divisibility_filter(deg_f: int, sel: SubvarietySelection) -> bool:
    if sel.kernel_exponent is None:
        raise NeedsKernelData(sel.level, [sel.members])
    return deg_f % sel.kernel_exponent == 0


def admissible_degrees(g: int, sel: SubvarietySelection) -> list[int]:
    """Degrees d > 1 allowed by Riemann-Hurwitz and divisibility by the exponent."""
    cap = (2 * g - 2) // (2 * sel.dim_total - 2)
    return [d for d in range(2, cap + 1) if divisibility_filter(d, sel)]


def forced_degree_two(g: int, g_prime: int) -> bool:
    if g_prime < 2:
        raise ValueError("target genus must be at least 2")
    return 2 * g - 2 < 3 * (2 * g_prime - 2)


def validate_factors(p: int, factors: Iterable[NewformFactor]) -> list[NewformFactor]:
    """Check the factor list is complete for level p; returns it in label order."""
    fs = _sorted_factors(factors)
    if any(f.level != p for f in fs):
        raise ValidationError(f"factor list for {p} contains other levels")
    g = genus_x0(p)
    total = sum(f.dim for f in fs)
    if total != g:
        raise ValidationError(f"level {p}: factor dimensions sum to {total}, genus is {g}")
    if p > 3:
        gp = genus_x0_plus(p)
        plus = sum(f.dim for f in fs if f.fricke == 1)
        if plus != gp:
            raise ValidationError(
                f"level {p}: Fricke +1 factors have total dimension {plus}, plus-genus is {gp}"
                " (flipped sign convention?)"
            )
    return fs


def _classify(g: int, sel: SubvarietySelection, plus: tuple[str, ...], table: Genus2QuotientTable) -> MorphismVerdict:
    p, d = sel.level, sel.dim_total
    if sel.members == plus:
        return MorphismVerdict(sel, Outcome.Survives_QuotientMap_Case3, "pullback of the plus-quotient Jacobian")
    if forced_degree_two(g, d):
        if p == 37:
            why = "degree 2 forced; the three involution quotients of X0(37) have genus <= 1"
        else:
            why = f"degree 2 forced (2g-2={2 * g - 2} < {3 * (2 * d - 2)}); w_p is the only involution"
        return MorphismVerdict(sel, Outcome.RuledOut_Case2_OnlyFrickeInvolution, why)
    if sel.kernel_exponent is None:
        return MorphismVerdict(sel, Outcome.NeedsKernelData, "kernel exponent missing")
    e = sel.kernel_exponent
    if not_curve_criterion(g, sel):
        return MorphismVerdict(sel, Outcome.RuledOut_Case1_KernelRH, f"2g-2={2 * g - 2} < {e}*(2g'-2)={e * (2 * d - 2)}")
    if d == 2 and table.excludes_genus2(p):
        return MorphismVerdict(sel, Outcome.RuledOut_Case4_Genus2Table, f"exp {e}; no genus-2 quotient at level {p}")
    return MorphismVerdict(sel, Outcome.NeedsKernelData, f"exp {e} does not rule out dimension {d}")


def classify_level(
    p: int,
    factors: Iterable[NewformFactor],
    kernel_data: KernelData | None = None,
    table: Genus2QuotientTable | None = None,
) -> LevelVerdict:
    """Verdict for every subset of dimension >= 2 (empty and full subsets are skipped)."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    fs = validate_factors(p, factors)
    table = table if table is not None else Genus2QuotientTable()
    g = genus_x0(p)
    gp = genus_x0_plus(p) if p > 3 else 0
    plus = tuple(f.label for f in fs if f.fricke == 1)
    full = (1 << len(fs)) - 1
    verdicts = tuple(
        _classify(g, sel, plus, table)
        for sel in enumerate_subvarieties(fs, kernel_data)
        if sel.mask not in (0, full) and sel.dim_total >= 2
    )
    outcomes = {v.outcome for v in verdicts}
    if Outcome.NeedsKernelData in outcomes:
        status = LevelStatus.Unresolved
    elif Outcome.Survives_QuotientMap_Case3 in outcomes:
        status = LevelStatus.OnlyQuotient
    else:
        status = LevelStatus.NoTargets
    return LevelVerdict(p, g, gp, status, verdicts)


def classify_morphisms(
    p: int,
    factors: Iterable[NewformFactor],
    kernel_data: KernelData | None = None,
    table: Genus2QuotientTable | None = None,
) -> list[MorphismVerdict]:
    lv = classify_level(p, factors, kernel_data, table)
    if lv.missing:
        raise NeedsKernelData(p, lv.missing)
    return list(lv.verdicts)


def check_thm13_hypothesis(factors: Iterable[NewformFactor]) -> bool:
    """Removing the largest plus factor and the largest minus factor leaves dimension <= 2."""
    fs = list(factors)
    dims_plus = [f.dim for f in fs if f.fricke == 1]
    dims_minus = [f.dim for f in fs if f.fricke == -1]
    rest = sum(dims_plus) + sum(dims_minus) - max(dims_plus, default=0) - max(dims_minus, default=0)
    return rest <= 2
