"""Degeneration-formula assembly for a simple degeneration.

A scenario describes ``M ~> M_0 u_D (M_1 u ... u M_k)``: one curve-class
lattice per component, the lattice maps into the total space, first Chern
class and divisor pairing functionals, a self-dual basis per divisor, and
tables of relative partition functions. The engine enumerates the index
set of the degeneration formula and sums the weighted products.

Relative invariants are input data. A lookup the sum needs but the table
lacks raises :class:`MissingTableEntry`; nothing is silently zero except
terms that vanish by a stated rule (dimension filter, empty curve with
insertions, zero restriction of an insertion).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .graded import Class, CurveClassLattice, LatticeMap, add_classes, sub_classes
from .partitions import (
    EMPTY,
    CohBasis,
    WeightedPartition,
    dual_partition,
    enumerate_weighted_partitions,
    z_factor,
)
from .series import I, INF, TruncatedSeries

NO_CHERN = (0, 0, 0)


class Block(NamedTuple):
    """One descendent factor ``tau_[alpha_hat](c^chern * prod classes)``.

    A plain insertion ``tau_k(gamma)`` is ``Block((k + 1,), (0, 0, 0), (gamma,))``.
    """

    alpha_hat: Tuple[int, ...]
    chern: Tuple[int, int, int]
    classes: Tuple[str, ...]

    @classmethod
    def plain(cls, k: int, label: str) -> "Block":
        return cls((k + 1,), NO_CHERN, (label,))

    def is_plain(self) -> bool:
        return len(self.alpha_hat) == 1 and self.chern == NO_CHERN and len(self.classes) == 1

    def __str__(self):
        if self.is_plain():
            return f"tau_{self.alpha_hat[0] - 1}({self.classes[0]})"
        factors = [f"c{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(self.chern) if e]
        factors += list(self.classes)
        hat = ",".join(str(a) for a in self.alpha_hat)
        return f"tau_[{hat}]({'*'.join(factors)})"


InsertionKey = Tuple[Block, ...]


def make_key(blocks: Iterable[Block]) -> InsertionKey:
    return tuple(sorted(blocks))


def key_str(key: InsertionKey) -> str:
    return " ".join(str(b) for b in key) if key else "1"


def parse_block(text) -> Block:
    """Parse ``tau_k(g)`` or ``tau_[a,b](c1^2*g*h)``, or a dict with alpha/chern/classes."""
    if isinstance(text, Mapping):
        return Block(tuple(int(a) for a in text["alpha"]), tuple(int(c) for c in text.get("chern", NO_CHERN)),
                     tuple(str(c) for c in text["classes"]))
    s = str(text).strip()
    if not s.startswith("tau_") or not s.endswith(")") or "(" not in s:
        raise ValueError(f"cannot parse insertion {text!r}")
    head, body = s[4:-1].split("(", 1)
    factors = [f for f in body.split("*") if f]
    chern = [0, 0, 0]
    classes = []
    for f in factors:
        if len(f) >= 2 and f[0] == "c" and f[1] in "123" and (len(f) == 2 or f[2] == "^"):
            chern[int(f[1]) - 1] += int(f[3:]) if len(f) > 2 else 1
        else:
            classes.append(f)
    if not classes:
        raise ValueError(f"insertion {text!r} names no cohomology class")
    if head.startswith("["):
        alpha = tuple(int(a) for a in head.strip("[]").split(","))
    else:
        alpha = (int(head) + 1,)
    if any(a < 1 for a in alpha):
        raise ValueError(f"bad descendent order in {text!r}")
    return Block(tuple(sorted(alpha, reverse=True)), tuple(chern), tuple(sorted(classes)))


@dataclass(frozen=True)
class Insertion:
    """Descendent insertion ``tau_k(gamma)`` of an even class on the total space.

    ``zero_on`` lists the components to which the class restricts to zero.
    """

    order: int
    label: str
    degree: int
    zero_on: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "zero_on", frozenset(self.zero_on))
        if self.order < 0:
            raise ValueError("descendent order must be non-negative")
        if self.degree % 2:
            raise ValueError(f"class {self.label} has odd degree {self.degree}; odd classes are not supported")
        if self.degree < 0:
            raise ValueError(f"class {self.label} has negative degree")
        if self.degree == 0 and self.order != 0:
            raise ValueError(f"degree-0 class {self.label} only allowed with descendent order 0")

    @property
    def block(self) -> Block:
        return Block.plain(self.order, self.label)

    @property
    def is_unit(self) -> bool:
        return self.order == 0 and self.degree == 0

    def __str__(self):
        return str(self.block)


@dataclass(frozen=True)
class Unit:
    """A distributable factor of an insertion product with its zero-restriction flags."""

    block: Block
    zero_on: FrozenSet[str] = frozenset()


def units_of(insertions: Sequence[Insertion]) -> List[Unit]:
    return [Unit(x.block, x.zero_on) for x in insertions]


class MissingTableEntry(KeyError):
    def __init__(self, side: str, component: str, cls: Class, key: InsertionKey, boundary):
        self.side, self.component, self.cls, self.key, self.boundary = side, component, cls, key, boundary
        super().__init__(self.describe())

    def describe(self) -> str:
        b = "|".join(str(e) for e in self.boundary)
        return (f"missing {self.side} table entry: component={self.component} class={list(self.cls)} "
                f"insertions=[{key_str(self.key)}] boundary={b}")

    def __str__(self):
        return self.describe()


TableKey = Tuple[str, Class, InsertionKey, Tuple[WeightedPartition, ...]]


class RelativeInvariantTable:
    """Relative partition functions keyed by (component, class, insertions, boundary)."""

    def __init__(self, side: str, entries: Optional[Mapping[TableKey, TruncatedSeries]] = None):
        if side not in ("GW", "PT"):
            raise ValueError(f"table side must be GW or PT, got {side!r}")
        self.side = side
        self.variable = "u" if side == "GW" else "q"
        self.entries: Dict[TableKey, TruncatedSeries] = {}
        for k, v in (entries or {}).items():
            self.set(*k, v)

    @staticmethod
    def make_key(component, cls, key, boundary) -> TableKey:
        return (str(component), tuple(int(x) for x in cls), make_key(key), tuple(boundary))

    def set(self, component, cls, key, boundary, series: TruncatedSeries):
        if series.variable != self.variable:
            raise ValueError(f"{self.side} table entries must be series in {self.variable}")
        self.entries[self.make_key(component, cls, key, boundary)] = series

    def get(self, component, cls, key, boundary) -> TruncatedSeries:
        k = self.make_key(component, cls, key, boundary)
        try:
            return self.entries[k]
        except KeyError:
            raise MissingTableEntry(self.side, k[0], k[1], k[2], k[3]) from None

    def has(self, component, cls, key, boundary) -> bool:
        return self.make_key(component, cls, key, boundary) in self.entries

    def copy(self) -> "RelativeInvariantTable":
        return RelativeInvariantTable(self.side, dict(self.entries))

    def __len__(self):
        return len(self.entries)


@dataclass
class Component:
    """A component of the special fiber with its map to the total space."""

    name: str
    lattice: CurveClassLattice
    c1: Tuple[int, ...]
    to_total: LatticeMap
    dimension_filter: bool = False

    def c(self, cls: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(self.c1, cls))


@dataclass
class Side:
    """``M_j`` for j >= 1, glued to ``M_0`` along the divisor ``D_j``."""

    component: Component
    divisor: str
    basis: CohBasis
    central_pairing: Tuple[int, ...]
    side_pairing: Tuple[int, ...]

    @property
    def name(self) -> str:
        return self.component.name


def _dot(row: Sequence[int], cls: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(row, cls))


@dataclass
class DegenerationScenario:
    name: str
    fiber_lattice: CurveClassLattice
    fiber_c1: Tuple[int, ...]
    total_lattice: CurveClassLattice
    iota: LatticeMap
    central: Component
    sides: List[Side]
    tables: Dict[str, RelativeInvariantTable] = field(default_factory=dict)
    u_order: int = 10
    q_order: int = 20

    @property
    def k(self) -> int:
        return len(self.sides)

    def components(self) -> List[Component]:
        return [self.central] + [s.component for s in self.sides]

    def total_degree(self, w: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(self.total_lattice.degree_weights, w))

    def problems(self) -> List[str]:
        out = []
        names = [c.name for c in self.components()]
        if len(set(names)) != len(names):
            out.append(f"component names must be distinct: {names}")
        if self.iota.source != self.fiber_lattice or self.iota.target != self.total_lattice:
            out.append("iota must map the fiber lattice to the total lattice")
        if len(self.fiber_c1) != self.fiber_lattice.rank:
            out.append("fiber c1 functional has the wrong length")
        if not self.iota.is_injective():
            out.append("iota must be injective on curve classes")
        for comp in self.components():
            if len(comp.c1) != comp.lattice.rank:
                out.append(f"component {comp.name}: c1 functional has the wrong length")
            if comp.to_total.source != comp.lattice or comp.to_total.target != self.total_lattice:
                out.append(f"component {comp.name}: map does not go from its lattice to the total lattice")
                continue
            for i in range(comp.lattice.rank):
                if self.total_degree(comp.to_total.column(i)) < 1:
                    out.append(
                        f"component {comp.name}: generator {i} has non-positive total degree; "
                        "splitting enumeration would not be finite"
                    )
        for s in self.sides:
            if len(s.central_pairing) != self.central.lattice.rank:
                out.append(f"divisor {s.divisor}: central pairing has the wrong length")
            if len(s.side_pairing) != s.component.lattice.rank:
                out.append(f"divisor {s.divisor}: side pairing has the wrong length")
        for side, table in self.tables.items():
            for comp in self.components():
                boundary = (EMPTY,) * (self.k if comp is self.central else 1)
                zero = comp.lattice.zero()
                if not table.has(comp.name, zero, (), boundary):
                    out.append(
                        f"{side} table lacks the class-0 unit entry for {comp.name} "
                        "(the empty curve contributes 1 as a convention)"
                    )
                elif table.get(comp.name, zero, (), boundary) != TruncatedSeries.one(table.variable):
                    out.append(f"{side} table: class-0 entry for {comp.name} must equal 1")
            for (cname, cls, key, boundary) in table.entries:
                comp = next((c for c in self.components() if c.name == cname), None)
                if comp is None:
                    out.append(f"{side} table names unknown component {cname}")
                    continue
                if not comp.lattice.is_effective(cls):
                    out.append(f"{side} table: class {list(cls)} is not effective on {cname}")
                    continue
                if comp is self.central:
                    if len(boundary) != self.k:
                        out.append(f"{side} table: {cname} entries need {self.k} boundary partitions")
                        continue
                    for s, eta in zip(self.sides, boundary):
                        if eta.size != _dot(s.central_pairing, cls):
                            out.append(
                                f"{side} table: boundary {eta} along {s.divisor} does not match "
                                f"class {list(cls)} (pairing {_dot(s.central_pairing, cls)})"
                            )
                else:
                    s = next(s for s in self.sides if s.component is comp)
                    if len(boundary) != 1 or boundary[0].size != _dot(s.side_pairing, cls):
                        out.append(f"{side} table: boundary {boundary} on {cname} does not match class {list(cls)}")
        return out


# ---------------------------------------------------------------------------
# index set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Splitting:
    classes: Tuple[Class, ...]
    boundary_sizes: Tuple[int, ...]


def gw_dimension_ok(c: int, eta: WeightedPartition, basis: CohBasis) -> bool:
    """Relative GW virtual dimension equals the degree of the boundary condition ``eta^vee``."""
    dual = dual_partition(eta, basis)
    return c + eta.length - eta.size == sum(basis.degrees[j] // 2 for _, j in dual.pairs)


def pt_dimension_ok(c: int, eta: WeightedPartition, basis: CohBasis) -> bool:
    """Relative PT virtual dimension equals the degree of the Nakajima class of ``eta^vee``."""
    dual = dual_partition(eta, basis)
    return c == sum(a - 1 + basis.degrees[j] // 2 for a, j in dual.pairs)


def dimension_ok(side: str, c: int, eta: WeightedPartition, basis: CohBasis) -> bool:
    return (gw_dimension_ok if side == "GW" else pt_dimension_ok)(c, eta, basis)


def _classes_with_total_degree(comp: Component, s: DegenerationScenario, bound: int) -> List[Class]:
    weights = tuple(s.total_degree(comp.to_total.column(i)) for i in range(comp.lattice.rank))
    return CurveClassLattice(comp.lattice.rank, weights).classes_up_to(bound)


def _filter_applies(side: Side, units: Sequence[Unit]) -> bool:
    # the filter is stated for components that carry no insertions
    return side.component.dimension_filter and all(side.name in u.zero_on for u in units)


def enumerate_splittings(s: DegenerationScenario, beta: Sequence[int], side: str = "GW",
                         units: Sequence[Unit] = ()) -> Tuple[List[Splitting], List[dict]]:
    """All splittings of ``beta`` (a total-space class) allowed by the matching and adjunction constraints.

    Returns the surviving splittings and a log with one record per
    candidate, each accepted or rejected with the reason.
    """
    beta = tuple(beta)
    s.total_lattice.check(beta)
    problems = [p for p in s.problems() if "non-positive total degree" in p]
    if problems:
        raise ValueError("; ".join(problems))
    total = s.total_degree(beta)
    log: List[dict] = []
    out: List[Splitting] = []
    if total < 0:
        return out, log
    fiber_class = s.iota.preimage(beta)
    side_lists = [_classes_with_total_degree(sd.component, s, total) for sd in s.sides]
    central_injective = s.central.to_total.is_injective()
    central_pool = None if central_injective else _classes_with_total_degree(s.central, s, total)
    for side_classes in itertools.product(*side_lists):
        rest = beta
        deg = 0
        for sd, bj in zip(s.sides, side_classes):
            img = sd.component.to_total.apply(bj)
            rest = sub_classes(rest, img)
            deg += s.total_degree(img)
        if deg > total:
            continue
        if central_injective:
            b0 = s.central.to_total.preimage(rest)
            candidates = [b0] if b0 is not None and s.central.lattice.is_effective(b0) else []
        else:
            candidates = [b for b in central_pool
                          if s.total_degree(s.central.to_total.apply(b)) == total - deg
                          and s.central.to_total.apply(b) == rest]
        for b0 in candidates:
            classes = (b0,) + tuple(side_classes)
            rec = {"classes": [list(c) for c in classes]}
            # matching: beta_0 . D_j = beta_j . D_j
            sizes = []
            bad = None
            for sd, bj in zip(s.sides, side_classes):
                left, right = _dot(sd.central_pairing, b0), _dot(sd.side_pairing, bj)
                if left != right or left < 0:
                    bad = f"matching: beta_0.{sd.divisor} = {left} but beta_j.{sd.divisor} = {right}"
                    break
                sizes.append(left)
            if bad:
                log.append({**rec, "status": "rejected", "reason": bad})
                continue
            # adjunction: c^M = c^{M_0} + sum (c^{M_j} - 2 beta_j . D_j)
            if fiber_class is not None:
                cm = _dot(s.fiber_c1, fiber_class)
                rhs = s.central.c(b0) + sum(sd.component.c(bj) - 2 * n for sd, bj, n in zip(s.sides, side_classes, sizes))
                if cm != rhs:
                    log.append({**rec, "status": "rejected", "reason": f"adjunction: c^M = {cm} but components give {rhs}"})
                    continue
            else:
                rec["note"] = "class not in the image of the fiber; adjunction check skipped"
            # dimension filter: some boundary partition must have the right dimension
            for sd, bj, n in zip(s.sides, side_classes, sizes):
                if not _filter_applies(sd, units):
                    continue
                c = sd.component.c(bj)
                if not any(dimension_ok(side, c, eta, sd.basis) for eta in enumerate_weighted_partitions(n, sd.basis)):
                    bad = (f"dimension: no boundary partition of size {n} on {sd.name} "
                           f"matches virtual dimension with c = {c}")
                    break
            if bad:
                log.append({**rec, "status": "rejected", "reason": bad})
                continue
            log.append({**rec, "status": "accepted", "boundary_sizes": sizes})
            out.append(Splitting(classes, tuple(sizes)))
    order = lambda c: tuple(x for cls in c for x in cls)
    out.sort(key=lambda sp: order(sp.classes))
    log.sort(key=lambda r: tuple(x for cls in r["classes"] for x in cls))
    return out, log


def distribute_insertions(r: int, k: int, zero_flags: Sequence[Sequence[bool]] = None,
                          classes_zero: Sequence[bool] = None) -> List[Tuple[int, ...]]:
    """Assignments of r insertions to components 0..k, as a tuple of component indices.

    ``zero_flags[i][j]`` marks insertion i as restricting to zero on
    component j; such placements are removed unless ``classes_zero[j]``
    says that component receives no curve class.
    """
    out = []
    for assign in itertools.product(range(k + 1), repeat=r):
        ok = True
        for i, j in enumerate(assign):
            if zero_flags is not None and zero_flags[i][j]:
                if classes_zero is None or not classes_zero[j]:
                    ok = False
                    break
        if ok:
            out.append(assign)
    return out


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


def boundary_weight(side: str, eta: WeightedPartition) -> TruncatedSeries:
    """``z(eta) u^{2 l(eta)}`` for GW, ``(-1)^{|eta| - l(eta)} z(eta) q^{-|eta|}`` for PT."""
    z = z_factor(eta)
    if side == "GW":
        return TruncatedSeries.monomial("u", 2 * eta.length, z)
    return TruncatedSeries.monomial("q", -eta.size, (-1) ** (eta.size - eta.length) * z)


@dataclass
class AssemblyTerm:
    classes: Tuple[Class, ...]
    assignment: Tuple[int, ...]
    boundary: Tuple[WeightedPartition, ...]
    value: TruncatedSeries


def _lookup(table: RelativeInvariantTable, comp: Component, cls: Class, blocks: List[Block], boundary):
    if not any(cls) and blocks:
        # an empty curve carries no marked points
        return None
    return table.get(comp.name, cls, make_key(blocks), boundary)


def assembly_terms(s: DegenerationScenario, beta: Sequence[int], side: str,
                   units: Sequence[Unit] = ()) -> Tuple[List[AssemblyTerm], List[dict]]:
    """Every nonzero term of the degeneration formula for ``beta``, with the splitting log."""
    if side not in s.tables:
        raise ValueError(f"scenario has no {side} table")
    table = s.tables[side]
    splittings, log = enumerate_splittings(s, beta, side, units)
    comps = s.components()
    flags = [[comps[j].name in u.zero_on for j in range(len(comps))] for u in units]
    terms: List[AssemblyTerm] = []
    for sp in splittings:
        assignments = distribute_insertions(len(units), s.k, flags, [not any(c) for c in sp.classes])
        eta_lists = [enumerate_weighted_partitions(n, sd.basis) for sd, n in zip(s.sides, sp.boundary_sizes)]
        for assign in assignments:
            blocks = [[] for _ in comps]
            for u, j in zip(units, assign):
                blocks[j].append(u.block)
            if any(not any(c) and b for c, b in zip(sp.classes, blocks)):
                continue
            for etas in itertools.product(*eta_lists):
                skip = False
                for sd, bj, eta, bl in zip(s.sides, sp.classes[1:], etas, blocks[1:]):
                    if sd.component.dimension_filter and not bl and not dimension_ok(side, sd.component.c(bj), eta, sd.basis):
                        skip = True
                        break
                if skip:
                    continue
                value = _lookup(table, s.central, sp.classes[0], blocks[0], tuple(etas))
                if value is None:
                    continue
                for sd, bj, eta, bl in zip(s.sides, sp.classes[1:], etas, blocks[1:]):
                    factor = _lookup(table, sd.component, bj, bl, (dual_partition(eta, sd.basis),))
                    if factor is None:
                        value = None
                        break
                    value = value * boundary_weight(side, eta) * factor
                if value is None:
                    continue
                terms.append(AssemblyTerm(sp.classes, assign, tuple(etas), value))
    return terms, log


def _assemble(s: DegenerationScenario, beta, side: str, units, order) -> TruncatedSeries:
    var = "u" if side == "GW" else "q"
    terms, _ = assembly_terms(s, beta, side, units)
    total = TruncatedSeries.zero(var)
    for t in terms:
        total = total + t.value
    return total.truncate(order)


def assemble_absolute_gw(s: DegenerationScenario, beta: Sequence[int], units: Sequence[Unit] = (),
                         u_order=None) -> TruncatedSeries:
    """Right-hand side of the GW degeneration formula at total-space class ``beta``."""
    return _assemble(s, beta, "GW", units, s.u_order if u_order is None else u_order)


def assemble_absolute_pt(s: DegenerationScenario, beta: Sequence[int], units: Sequence[Unit] = (),
                         q_order=None) -> TruncatedSeries:
    """Right-hand side of the PT degeneration formula at total-space class ``beta``."""
    return _assemble(s, beta, "PT", units, s.q_order if q_order is None else q_order)
