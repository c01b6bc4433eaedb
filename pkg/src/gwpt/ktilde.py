"""Descendent correspondence matrix data and the barred insertion transform.

Entries of the matrix are supplied as data: for each pair of partitions
``(alpha, alpha_hat)`` a polynomial in the formal Chern variables
``c1, c2, c3`` with u-series coefficients. Only the two structural
properties and the diagonal leading term are used.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .degeneration import Block, Insertion, InsertionKey, Unit, make_key
from .partitions import IntPartition, canonical_partition, enumerate_partitions, enumerate_set_partitions
from .series import I, TruncatedSeries

Monomial = Tuple[int, int, int]
KEntry = Dict[Monomial, TruncatedSeries]


def chern_degree(m: Monomial) -> int:
    return m[0] + 2 * m[1] + 3 * m[2]


def required_degree(alpha: Sequence[int], alpha_hat: Sequence[int]) -> int:
    la, lh = len(alpha), len(alpha_hat)
    return sum(alpha) + la - sum(alpha_hat) - lh - 3 * (la - 1)


def diagonal_entry(a: int) -> KEntry:
    """Leading term ``(iu)^{1-a}`` of the entry at ``((a), (a))``."""
    return {(0, 0, 0): TruncatedSeries.monomial("u", 1 - a, I ** (1 - a))}


class KtildeTable:
    """Sparse matrix of entries ``(alpha, alpha_hat) -> {chern monomial: u-series}``.

    Missing entries are zero, except the single-part diagonal ``((a), (a))``
    which defaults to ``(iu)^{1-a}`` when ``default_diagonal`` is set.
    ``chern_substitution`` records which Chern classes the formal variables
    stand for (``"log"`` for the relative geometry, ``"absolute"`` otherwise).
    """

    def __init__(self, entries: Optional[Mapping] = None, default_diagonal: bool = True,
                 chern_substitution: str = "log"):
        if chern_substitution not in ("log", "absolute"):
            raise ValueError("chern_substitution must be 'log' or 'absolute'")
        self.default_diagonal = default_diagonal
        self.chern_substitution = chern_substitution
        self.entries: Dict[Tuple[IntPartition, IntPartition], KEntry] = {}
        for (alpha, alpha_hat), poly in (entries or {}).items():
            self.set(alpha, alpha_hat, poly)

    def set(self, alpha, alpha_hat, poly: Mapping[Sequence[int], TruncatedSeries]):
        alpha, alpha_hat = canonical_partition(alpha), canonical_partition(alpha_hat)
        if not alpha or not alpha_hat:
            raise ValueError("matrix entries are indexed by partitions of positive size")
        clean = {}
        for m, s in poly.items():
            m = tuple(int(x) for x in m)
            if len(m) != 3 or any(x < 0 for x in m):
                raise ValueError(f"bad Chern monomial {m}")
            if s.variable != "u":
                raise ValueError("matrix coefficients are u-series")
            if not s.is_zero():
                clean[m] = s
        self.entries[(alpha, alpha_hat)] = clean

    def entry(self, alpha, alpha_hat) -> KEntry:
        alpha, alpha_hat = canonical_partition(alpha), canonical_partition(alpha_hat)
        if (alpha, alpha_hat) in self.entries:
            return self.entries[(alpha, alpha_hat)]
        if self.default_diagonal and len(alpha) == 1 and alpha == alpha_hat:
            return diagonal_entry(alpha[0])
        return {}


def validate_Ktilde(K: KtildeTable) -> Tuple[bool, List[str]]:
    """Check vanishing for ``|alpha| < |alpha_hat|`` and homogeneity of every u-coefficient."""
    violations = []
    for (alpha, alpha_hat), poly in sorted(K.entries.items()):
        if not poly:
            continue
        name = f"K[{list(alpha)},{list(alpha_hat)}]"
        if sum(alpha) < sum(alpha_hat):
            violations.append(f"{name}: nonzero although |alpha| < |alpha_hat| (size bound)")
            continue
        want = required_degree(alpha, alpha_hat)
        exponents = sorted({e for s in poly.values() for e in s.terms})
        for e in exponents:
            degrees = sorted({chern_degree(m) for m, s in poly.items() if e < s.order and s.coefficient(e)})
            if degrees and degrees != [want]:
                kind = "mixed degrees" if len(degrees) > 1 else "wrong degree"
                violations.append(
                    f"{name}: u^{e} coefficient has {kind} {degrees} in c1,c2,c3, expected {want} (homogeneity)"
                )
    return not violations, violations


FormalSum = Dict[InsertionKey, TruncatedSeries]


def _product_classes(gammas: Iterable[str]) -> Tuple[str, ...]:
    return tuple(sorted(g for g in gammas if g != "1")) or ("1",)


def bar_transform(insertions: Sequence[Insertion], K: KtildeTable, dimension: int = 3) -> FormalSum:
    """Expand the barred product of descendents into ``tau_[alpha_hat]`` terms.

    Sums over set partitions of the insertions; each block ``S``
    contributes ``sum_{alpha_hat} tau_[alpha_hat](K[alpha_S, alpha_hat] . gamma_S)``.
    Terms whose class exceeds the real dimension ``2 * dimension`` vanish.
    """
    for x in insertions:
        if x.degree % 2:
            raise ValueError(f"odd class {x.label} is not supported")
    degree = {x.label: x.degree for x in insertions}
    degree["1"] = 0
    n = len(insertions)
    out: FormalSum = {}
    for P in enumerate_set_partitions(n):
        block_terms: List[List[Tuple[Block, TruncatedSeries]]] = []
        for S in P:
            members = [insertions[i - 1] for i in S]
            alpha_S = canonical_partition([x.order + 1 for x in members])
            gammas = _product_classes(x.label for x in members)
            base = sum(degree[g] for g in gammas)
            choices = []
            for size in range(1, sum(alpha_S) + 1):
                for alpha_hat in enumerate_partitions(size):
                    for mono, coeff in K.entry(alpha_S, alpha_hat).items():
                        if base + 2 * chern_degree(mono) > 2 * dimension:
                            continue
                        choices.append((Block(alpha_hat, mono, gammas), coeff))
            if not choices:
                block_terms = []
                break
            block_terms.append(choices)
        if not block_terms and n:
            continue
        for combo in itertools.product(*block_terms):
            key = make_key(b for b, _ in combo)
            coeff = TruncatedSeries.one("u")
            for _, c in combo:
                coeff = coeff * c
            out[key] = out[key] + coeff if key in out else coeff
    return {k: v for k, v in sorted(out.items()) if not (v.is_zero() and v.is_exact)}


def leading_key(insertions: Sequence[Insertion]) -> InsertionKey:
    return make_key(x.block for x in insertions)


def units_for_key(key: InsertionKey, insertions: Sequence[Insertion]) -> List[Unit]:
    """Distributable units of a barred term; a block restricts to zero wherever any factor does."""
    zero = {x.label: x.zero_on for x in insertions}
    units = []
    for b in key:
        z = frozenset()
        for g in b.classes:
            z = z | zero.get(g, frozenset())
        units.append(Unit(b, z))
    return units


@dataclass
class StringReduction:
    side: str
    status: str  # "zero", "reduced" or "unchanged"
    insertions: List[Insertion]
    note: str = ""


def apply_string_equation(side: str, insertions: Sequence[Insertion]) -> StringReduction:
    """PT: a ``tau_0(1)`` kills the invariant. GW: one ``tau_0(1)`` is removed."""
    if side not in ("GW", "PT"):
        raise ValueError("side must be GW or PT")
    idx = next((i for i, x in enumerate(insertions) if x.is_unit), None)
    if idx is None:
        return StringReduction(side, "unchanged", list(insertions))
    if side == "PT":
        return StringReduction(side, "zero", list(insertions), "tau_0(1) present: the PT series is zero")
    rest = list(insertions[:idx]) + list(insertions[idx + 1:])
    return StringReduction(side, "reduced", rest, "tau_0(1) removed: reducible to fewer insertions")
