"""Series graded by effective curve classes (Novikov rings).

Effective cones are free monoids ``N^r`` with a strictly positive degree
functional, so only finitely many classes sit below any degree bound.
Classes are plain tuples of ints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .series import INF, TruncatedSeries

Class = Tuple[int, ...]


@dataclass(frozen=True)
class CurveClassLattice:
    rank: int
    degree_weights: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "degree_weights", tuple(int(w) for w in self.degree_weights))
        if self.rank < 1:
            raise ValueError("lattice rank must be positive")
        if len(self.degree_weights) != self.rank:
            raise ValueError(f"expected {self.rank} degree weights, got {len(self.degree_weights)}")
        if any(w < 1 for w in self.degree_weights):
            raise ValueError("degree weights must be positive integers")

    def zero(self) -> Class:
        return (0,) * self.rank

    def degree(self, c: Sequence[int]) -> int:
        self.check(c)
        return sum(w * x for w, x in zip(self.degree_weights, c))

    def check(self, c: Sequence[int]) -> None:
        if len(c) != self.rank:
            raise ValueError(f"class {tuple(c)} has wrong rank for a rank-{self.rank} lattice")

    def is_effective(self, c: Sequence[int]) -> bool:
        return len(c) == self.rank and all(x >= 0 for x in c)

    def classes_up_to(self, bound: int) -> List[Class]:
        """All effective classes of degree <= bound, sorted by (degree, coords)."""
        out: List[Class] = []

        def rec(i, prefix, remaining):
            if i == self.rank:
                out.append(tuple(prefix))
                return
            w = self.degree_weights[i]
            for x in range(remaining // w + 1):
                prefix.append(x)
                rec(i + 1, prefix, remaining - w * x)
                prefix.pop()

        if bound >= 0:
            rec(0, [], bound)
        out.sort(key=lambda c: (self.degree(c), c))
        return out


def add_classes(a: Sequence[int], b: Sequence[int]) -> Class:
    return tuple(x + y for x, y in zip(a, b))


def sub_classes(a: Sequence[int], b: Sequence[int]) -> Class:
    return tuple(x - y for x, y in zip(a, b))


def _rank_q(rows: Sequence[Sequence[int]]) -> int:
    m = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def solve_rational(matrix: Sequence[Sequence[int]], rhs: Sequence[int]) -> Optional[List[Fraction]]:
    """Unique solution of ``matrix @ x = rhs`` over Q, or None if inconsistent."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    aug = [[Fraction(x) for x in r] + [Fraction(b)] for r, b in zip(matrix, rhs)]
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        p = aug[r][c]
        aug[r] = [x / p for x in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    if any(aug[i][-1] for i in range(r, rows)):
        return None
    if len(pivots) < cols:
        raise ValueError("linear system is underdetermined")
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        x[c] = aug[i][-1]
    return x


@dataclass(frozen=True)
class LatticeMap:
    """Integer matrix between class lattices (rows index target coordinates).

    ``kind`` is ``"pushforward"`` or ``"gysin"``; a gysin map also stores
    the pairing functionals on the target whose common kernel is its image.
    """

    source: CurveClassLattice
    target: CurveClassLattice
    matrix: Tuple[Tuple[int, ...], ...]
    kind: str = "pushforward"
    pairings: Tuple[Tuple[int, ...], ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(int(x) for x in r) for r in self.matrix))
        object.__setattr__(self, "pairings", tuple(tuple(int(x) for x in r) for r in self.pairings))
        if len(self.matrix) != self.target.rank or any(len(r) != self.source.rank for r in self.matrix):
            raise ValueError(
                f"map {self.name or ''} matrix must be {self.target.rank}x{self.source.rank}"
            )
        if self.kind not in ("pushforward", "gysin", "inclusion"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if any(len(r) != self.target.rank for r in self.pairings):
            raise ValueError("pairing functionals must live on the target lattice")

    def __call__(self, c: Sequence[int]) -> Class:
        return self.apply(c)

    def apply(self, c: Sequence[int]) -> Class:
        self.source.check(c)
        return tuple(sum(a * x for a, x in zip(row, c)) for row in self.matrix)

    def column(self, i: int) -> Class:
        return tuple(row[i] for row in self.matrix)

    def rank(self) -> int:
        return _rank_q(self.matrix)

    def is_injective(self) -> bool:
        return self.rank() == self.source.rank

    def is_surjective(self) -> bool:
        return self.rank() == self.target.rank

    def kills_generator(self) -> bool:
        return any(not any(self.column(i)) for i in range(self.source.rank))

    def problems(self) -> List[str]:
        out = []
        if self.kind == "pushforward" and not self.is_surjective():
            out.append(f"pushforward {self.name} is not surjective")
        if self.kind in ("gysin", "inclusion") and not self.is_injective():
            out.append(f"{self.kind} map {self.name} is not injective")
        if self.kind == "gysin":
            for i in range(self.source.rank):
                col = self.column(i)
                for p in self.pairings:
                    if sum(a * b for a, b in zip(p, col)):
                        out.append(f"gysin {self.name}: generator {i} pairs nontrivially with {p}")
            if self.pairings:
                kernel_dim = self.target.rank - _rank_q(self.pairings)
                if kernel_dim != self.rank():
                    out.append(
                        f"gysin {self.name}: image has rank {self.rank()} but the pairing kernel has rank {kernel_dim}"
                    )
        return out

    def preimage(self, c: Sequence[int]) -> Optional[Class]:
        """Integral preimage under an injective map, or None."""
        self.target.check(c)
        try:
            x = solve_rational(self.matrix, c)
        except ValueError:
            raise ValueError(f"map {self.name} is not injective; preimage is not unique")
        if x is None or any(v.denominator != 1 for v in x):
            return None
        return tuple(int(v) for v in x)

    def compose(self, other: "LatticeMap", kind: str = "pushforward") -> "LatticeMap":
        """``self ∘ other``."""
        if other.target != self.source:
            raise ValueError("maps do not compose")
        m = tuple(
            tuple(sum(self.matrix[i][k] * other.matrix[k][j] for k in range(self.source.rank))
                  for j in range(other.source.rank))
            for i in range(self.target.rank)
        )
        return LatticeMap(other.source, self.target, m, kind)


def gysin_preimage(c: Sequence[int], f: LatticeMap) -> Optional[Class]:
    """The unique effective class mapping to ``c`` under an injective gysin map.

    None when ``c`` pairs nontrivially with one of the stored functionals
    (so it is outside the image) or its preimage is not integral and effective.
    """
    if f.kind != "gysin":
        raise ValueError("gysin_preimage needs a gysin map")
    f.target.check(c)
    for p in f.pairings:
        if sum(a * b for a, b in zip(p, c)):
            return None
    pre = f.preimage(c)
    if pre is None or not f.source.is_effective(pre):
        return None
    return pre


class GradedSeries:
    """Finite assignment ``class -> TruncatedSeries`` below a degree bound.

    Classes missing from ``entries`` are exact zeros. ``degree_bound`` is
    None when the listed entries are the complete (finite) support.
    """

    __slots__ = ("lattice", "degree_bound", "variable", "entries")

    def __init__(self, lattice: CurveClassLattice, entries: Mapping[Sequence[int], TruncatedSeries],
                 degree_bound: Optional[int], variable: Optional[str] = None):
        clean: Dict[Class, TruncatedSeries] = {}
        for c, s in entries.items():
            c = tuple(int(x) for x in c)
            if not lattice.is_effective(c):
                raise ValueError(f"class {c} is not effective in the lattice")
            if degree_bound is not None and lattice.degree(c) > degree_bound:
                continue
            if variable is None:
                variable = s.variable
            elif s.variable != variable:
                raise ValueError("entries of a graded series must share one variable")
            clean[c] = s
        if variable is None:
            raise ValueError("cannot infer the variable of an empty graded series")
        self.lattice = lattice
        self.degree_bound = degree_bound
        self.variable = variable
        self.entries = dict(sorted(clean.items(), key=lambda kv: (lattice.degree(kv[0]), kv[0])))

    @classmethod
    def one(cls, lattice: CurveClassLattice, variable: str, degree_bound: Optional[int] = None) -> "GradedSeries":
        return cls(lattice, {lattice.zero(): TruncatedSeries.one(variable)}, degree_bound, variable)

    def __getitem__(self, c: Sequence[int]) -> TruncatedSeries:
        c = tuple(c)
        if c in self.entries:
            return self.entries[c]
        if self.degree_bound is not None and self.lattice.degree(c) > self.degree_bound:
            raise KeyError(f"class {c} lies beyond the degree bound {self.degree_bound}")
        return TruncatedSeries.zero(self.variable)

    def _check(self, other: "GradedSeries"):
        if self.lattice != other.lattice:
            raise ValueError("graded series live on different lattices")
        if self.variable != other.variable:
            raise ValueError(f"variable mismatch: {self.variable} vs {other.variable}")

    def __eq__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return (
            self.lattice == other.lattice
            and self.degree_bound == other.degree_bound
            and self.variable == other.variable
            and {c: s for c, s in self.entries.items() if not (s.is_zero() and s.is_exact)}
            == {c: s for c, s in other.entries.items() if not (s.is_zero() and s.is_exact)}
        )

    def agrees_with(self, other: "GradedSeries", order=None) -> bool:
        """Entrywise agreement on the common degree window and series orders."""
        self._check(other)
        keys = set(self.entries) | set(other.entries)
        bound = _min_bound(self.degree_bound, other.degree_bound)
        for c in keys:
            if bound is not None and self.lattice.degree(c) > bound:
                continue
            if not self[c].agrees_with(other[c], order):
                return False
        return True

    def __add__(self, other: "GradedSeries") -> "GradedSeries":
        self._check(other)
        bound = _min_bound(self.degree_bound, other.degree_bound)
        out = dict(self.entries)
        for c, s in other.entries.items():
            out[c] = out[c] + s if c in out else s
        return GradedSeries(self.lattice, out, bound, self.variable)

    def __mul__(self, other: "GradedSeries") -> "GradedSeries":
        return gmul(self, other)

    def truncate_degree(self, bound: int) -> "GradedSeries":
        return GradedSeries(self.lattice, self.entries, _min_bound(self.degree_bound, bound), self.variable)

    def map_series(self, f) -> "GradedSeries":
        out = {c: f(s) for c, s in self.entries.items()}
        variable = next(iter(out.values())).variable if out else self.variable
        return GradedSeries(self.lattice, out, self.degree_bound, variable)

    def __repr__(self):
        body = ", ".join(f"{c}: {s}" for c, s in self.entries.items())
        return f"GradedSeries(bound={self.degree_bound}, {{{body}}})"


def _min_bound(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def gmul(a: GradedSeries, b: GradedSeries) -> GradedSeries:
    """Convolution product over class splittings."""
    a._check(b)
    lat = a.lattice
    bound = _min_bound(a.degree_bound, b.degree_bound)
    out: Dict[Class, TruncatedSeries] = {}
    for ca, sa in a.entries.items():
        for cb, sb in b.entries.items():
            c = add_classes(ca, cb)
            if bound is not None and lat.degree(c) > bound:
                continue
            p = sa * sb
            out[c] = out[c] + p if c in out else p
    return GradedSeries(lat, out, bound, a.variable)


def ginvert(a: GradedSeries, degree_bound: Optional[int] = None, order=None) -> GradedSeries:
    """Two-sided inverse up to the degree bound.

    The inverse of a unit with infinite support needs a finite bound;
    ``degree_bound`` supplies one when ``a`` carries none.
    """
    lat = a.lattice
    zero = lat.zero()
    if zero not in a.entries or a.entries[zero].is_zero():
        raise ZeroDivisionError("degree-0 entry is missing or zero; series is not a unit")
    bound = _min_bound(a.degree_bound, degree_bound)
    rest = {c: s for c, s in a.entries.items() if c != zero}
    if bound is None:
        if rest:
            raise ValueError("inverting a non-constant graded series needs a degree bound")
        bound_classes = [zero]
    else:
        bound_classes = lat.classes_up_to(bound)
    b0 = a.entries[zero].invert(order)
    out: Dict[Class, TruncatedSeries] = {zero: b0}
    for c in bound_classes:
        if c == zero:
            continue
        acc = None
        for ca, sa in rest.items():
            d = sub_classes(c, ca)
            if any(x < 0 for x in d):
                continue
            bd = out.get(d)
            if bd is None:
                continue
            term = sa * bd
            acc = term if acc is None else acc + term
        if acc is not None:
            out[c] = -(b0 * acc)
    return GradedSeries(lat, out, bound, a.variable)


def pushforward_classes(a: GradedSeries, f: LatticeMap, target_bound: Optional[int] = None,
                        support_is_complete: bool = False) -> GradedSeries:
    """Sum entries along the fibers of ``f``.

    If ``f`` kills no effective generator, fibers are finite and the
    largest target degree whose whole fiber lies inside ``a``'s window is
    computed. Otherwise the fibers are unbounded and the caller must vouch
    (``support_is_complete``) that ``a`` has no entries outside its window
    over the target classes up to ``target_bound``.
    """
    if f.source != a.lattice:
        raise ValueError("map source does not match the series lattice")
    tgt = f.target
    images = [f.column(i) for i in range(a.lattice.rank)]
    for im in images:
        if any(x < 0 for x in im):
            raise ValueError("pushforward must send effective generators to effective classes")
    if a.degree_bound is None:
        bound = target_bound
    elif f.kills_generator():
        if not support_is_complete:
            raise ValueError(
                "pushforward has unbounded fibers below the degree bound; "
                "the finiteness contract needs support_is_complete=True"
            )
        bound = target_bound if target_bound is not None else a.degree_bound
    else:
        # deg_src(s) <= ratio * deg_tgt(f s) with ratio = max_i w_i / deg_tgt(f e_i)
        ratio = max(Fraction(w, tgt.degree(im)) for w, im in zip(a.lattice.degree_weights, images))
        safe = int(Fraction(a.degree_bound) / ratio)
        bound = safe if target_bound is None else min(safe, target_bound)
    out: Dict[Class, TruncatedSeries] = {}
    for c, s in a.entries.items():
        t = f.apply(c)
        if bound is not None and tgt.degree(t) > bound:
            continue
        out[t] = out[t] + s if t in out else s
    return GradedSeries(tgt, out, bound, a.variable)
