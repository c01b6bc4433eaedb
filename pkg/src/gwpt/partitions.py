"""Integer, set and cohomology-weighted partitions.

Weighted partitions index the boundary conditions along a divisor: each
part is a tangency multiplicity decorated by an element of a fixed
self-dual basis of the divisor's cohomology.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Iterator, List, Optional, Sequence, Tuple

IntPartition = Tuple[int, ...]
SetPartition = Tuple[Tuple[int, ...], ...]


def _partitions(n: int, largest: int) -> Iterator[IntPartition]:
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def enumerate_partitions(d: int) -> List[IntPartition]:
    """Partitions of ``d`` as weakly decreasing tuples, reverse-lexicographic."""
    if d < 0:
        raise ValueError("partition size must be non-negative")
    return list(_partitions(d, d))


def enumerate_set_partitions(n: int) -> List[SetPartition]:
    """Set partitions of {1..n}; blocks sorted, ordered by smallest element."""
    if n < 0:
        raise ValueError("set size must be non-negative")
    out: List[SetPartition] = []

    # restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[:i])
    def rec(i, labels, top):
        if i == n:
            blocks: List[List[int]] = [[] for _ in range(top + 1)]
            for j, b in enumerate(labels):
                blocks[b].append(j + 1)
            out.append(tuple(tuple(b) for b in blocks if b))
            return
        for b in range(top + 2):
            labels.append(b)
            rec(i + 1, labels, max(top, b))
            labels.pop()

    if n == 0:
        return [()]
    rec(0, [], -1)
    return out


def partition_size(a: Sequence[int]) -> int:
    return sum(a)


def partition_length(a: Sequence[int]) -> int:
    return len(a)


def canonical_partition(parts: Sequence[int]) -> IntPartition:
    parts = tuple(sorted((int(x) for x in parts), reverse=True))
    if any(x < 1 for x in parts):
        raise ValueError(f"partition parts must be positive: {parts}")
    return parts


class CohBasis:
    """Self-dual basis of the even cohomology of a divisor.

    ``pairing[j][l]`` is the Poincaré pairing of basis elements j and l;
    ``duality[j]`` is the index of the dual element.
    """

    def __init__(self, labels: Sequence[str], degrees: Sequence[int],
                 pairing: Sequence[Sequence], duality: Sequence[int]):
        n = len(labels)
        self.labels = tuple(str(x) for x in labels)
        self.degrees = tuple(int(d) for d in degrees)
        self.pairing = tuple(tuple(Fraction(x) for x in row) for row in pairing)
        self.duality = tuple(int(j) for j in duality)
        problems = self.problems()
        if problems:
            raise ValueError("invalid cohomology basis: " + "; ".join(problems))
        self._index = {label: i for i, label in enumerate(self.labels)}
        if len(self._index) != n:
            raise ValueError("basis labels must be distinct")

    def problems(self) -> List[str]:
        n = len(self.labels)
        out = []
        if n == 0:
            out.append("basis is empty")
        if len(self.degrees) != n or len(self.duality) != n:
            out.append("labels, degrees and duality must have equal length")
            return out
        if len(self.pairing) != n or any(len(r) != n for r in self.pairing):
            out.append(f"pairing must be a {n}x{n} matrix")
            return out
        for j, d in enumerate(self.degrees):
            if d < 0 or d % 2:
                out.append(f"basis element {self.labels[j]} has odd or negative degree {d}; odd classes are not supported")
        for j, k in enumerate(self.duality):
            if not 0 <= k < n:
                out.append(f"duality index {k} out of range")
                continue
            if self.duality[k] != j:
                out.append(f"duality is not an involution at {self.labels[j]}")
            for l in range(n):
                v = self.pairing[j][l]
                if l == k and v == 0:
                    out.append(f"pairing of {self.labels[j]} with its dual vanishes")
                if l != k and v != 0:
                    out.append(f"basis is not self-dual: {self.labels[j]} pairs with {self.labels[l]}")
        return out

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        if isinstance(label, int):
            if not 0 <= label < len(self):
                raise IndexError(f"basis index {label} out of range")
            return label
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown basis label {label!r}") from None

    def dual(self, j: int) -> int:
        return self.duality[j]

    def dual_pairing(self, j: int) -> Fraction:
        return self.pairing[j][self.duality[j]]

    def __eq__(self, other):
        if not isinstance(other, CohBasis):
            return NotImplemented
        return (self.labels, self.degrees, self.pairing, self.duality) == (
            other.labels, other.degrees, other.pairing, other.duality)

    def __hash__(self):
        return hash((self.labels, self.degrees, self.pairing, self.duality))

    def __repr__(self):
        return f"CohBasis({list(self.labels)})"


@dataclass(frozen=True, order=True)
class WeightedPartition:
    """Multiset of (part, basis index) pairs in canonical order."""

    pairs: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple((int(a), int(j)) for a, j in self.pairs)
        if any(a < 1 for a, _ in pairs):
            raise ValueError(f"weighted partition parts must be positive: {pairs}")
        if any(j < 0 for _, j in pairs):
            raise ValueError("basis indices must be non-negative")
        object.__setattr__(self, "pairs", tuple(sorted(pairs, key=lambda p: (-p[0], p[1]))))

    @classmethod
    def of(cls, *pairs: Tuple[int, int]) -> "WeightedPartition":
        return cls(tuple(pairs))

    @property
    def size(self) -> int:
        return sum(a for a, _ in self.pairs)

    @property
    def length(self) -> int:
        return len(self.pairs)

    @property
    def parts(self) -> IntPartition:
        return tuple(a for a, _ in self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def label(self, basis: Optional[CohBasis] = None) -> str:
        if not self.pairs:
            return "()"
        name = (lambda j: basis.labels[j]) if basis is not None else str
        return "(" + ",".join(f"{a}:{name(j)}" for a, j in self.pairs) + ")"

    def __str__(self):
        return self.label()


EMPTY = WeightedPartition()


def aut_order(eta: WeightedPartition) -> int:
    """|Aut(eta)|: product of factorials of the multiplicities of equal pairs."""
    out = 1
    for m in Counter(eta.pairs).values():
        out *= math.factorial(m)
    return out


def z_factor(eta: WeightedPartition) -> int:
    return aut_order(eta) * math.prod(a for a, _ in eta.pairs)


def _check_indices(eta: WeightedPartition, basis: CohBasis):
    for _, j in eta.pairs:
        if j >= len(basis):
            raise ValueError(f"basis index {j} out of range for a basis of size {len(basis)}")


def dual_partition(eta: WeightedPartition, basis: CohBasis) -> WeightedPartition:
    _check_indices(eta, basis)
    return WeightedPartition(tuple((a, basis.dual(j)) for a, j in eta.pairs))


def nakajima_pairing(eta: WeightedPartition, nu: WeightedPartition, basis: CohBasis) -> Fraction:
    """Pairing of Nakajima basis vectors indexed by ``eta`` and ``nu``.

    Nonzero only when ``nu`` is the dual of ``eta``. For bases whose dual
    pairs do not pair to 1, the value is scaled by the product of those
    pairings over the parts of ``eta``.
    """
    if eta.size != nu.size:
        raise ValueError(f"size mismatch: |eta| = {eta.size}, |nu| = {nu.size}")
    _check_indices(nu, basis)
    if nu != dual_partition(eta, basis):
        return Fraction(0)
    value = Fraction((-1) ** (eta.size - eta.length), z_factor(eta))
    for _, j in eta.pairs:
        value *= basis.dual_pairing(j)
    return value


def enumerate_weighted_partitions(d: int, basis: CohBasis) -> List[WeightedPartition]:
    """All weighted partitions of size ``d`` over ``basis``, each once, sorted."""
    if d < 0:
        raise ValueError("size must be non-negative")
    n = len(basis)
    out = set()
    for parts in enumerate_partitions(d):
        groups = Counter(parts)
        choices = [
            [tuple((a, j) for j in combo) for combo in combinations_with_replacement(range(n), m)]
            for a, m in sorted(groups.items(), reverse=True)
        ]
        for pick in product(*choices):
            out.add(WeightedPartition(tuple(p for group in pick for p in group)))
    return sorted(out, key=lambda e: (tuple(-a for a in e.parts), e.pairs))
