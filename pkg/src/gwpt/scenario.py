"""Scenario documents: JSON in, validated engine objects out.

A document has sections ``orders``, ``classes``, ``lattices``, ``maps``,
``bases``, ``degenerations``, ``tables``, ``local_tables`` and
optionally ``transition``, ``ktilde`` and ``checks``. Tables are one
list per side; each degeneration receives the entries for its own
components, so the blow-up entries are shared between the two
degenerations of a transition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from .degeneration import (
    Block,
    Component,
    DegenerationScenario,
    Insertion,
    RelativeInvariantTable,
    Side,
    make_key,
    parse_block,
)
from .graded import CurveClassLattice, LatticeMap
from .ktilde import KtildeTable
from .partitions import CohBasis, WeightedPartition
from .series import GaussianRational, RationalFunction, TruncatedSeries, series_from_records, series_to_records
from .transition import ConifoldTransition, Exceptional, _local

FORMAT = "gwpt-scenario/1"


class ScenarioError(ValueError):
    """A document that fails validation; ``problems`` lists each issue with its location."""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class Scenario:
    name: str
    document: dict
    orders: Dict[str, int]
    classes: Dict[str, Insertion]
    lattices: Dict[str, CurveClassLattice]
    maps: Dict[str, LatticeMap]
    bases: Dict[str, CohBasis]
    degenerations: Dict[str, DegenerationScenario]
    transition: Optional[ConifoldTransition] = None
    ktilde: Optional[KtildeTable] = None
    checks: List[dict] = field(default_factory=list)

    def insertion(self, text: str) -> Insertion:
        """``tau_k(label)`` resolved against the class registry."""
        b = parse_block(text)
        if not b.is_plain():
            raise ValueError(f"{text!r}: scenario insertions must be plain descendents tau_k(class)")
        label = b.classes[0]
        if label not in self.classes:
            raise ValueError(f"{text!r}: unknown class {label!r}")
        proto = self.classes[label]
        return Insertion(b.alpha_hat[0] - 1, label, proto.degree, proto.zero_on)

    def insertions(self, texts) -> List[Insertion]:
        return [self.insertion(t) for t in texts or []]


# ----------------------------------------------------------------------
# series encoding
# ----------------------------------------------------------------------


def _coeff(x) -> GaussianRational:
    if isinstance(x, (list, tuple)):
        return GaussianRational(Fraction(str(x[0])), Fraction(str(x[1])))
    return GaussianRational(Fraction(str(x)))


def _poly(d) -> Dict[int, GaussianRational]:
    return {int(k): _coeff(v) for k, v in d.items()}


def decode_series(obj: dict, variable: str) -> TruncatedSeries:
    """``{"records": [...], "order": o}`` or ``{"rational": {...}, "order": o}``."""
    order = obj.get("order")
    if "rational" in obj:
        r = obj["rational"]
        f = RationalFunction(_poly(r["numerator"]), _poly(r.get("denominator", {"0": 1})), int(r.get("shift", 0)))
        if variable != "q":
            raise ValueError("rational table entries are q-series")
        if order is None:
            raise ValueError("rational table entries need a truncation order")
        return f.expand(Fraction(str(order)))
    return series_from_records(obj.get("records", []), order, variable)


def encode_series(s: TruncatedSeries) -> dict:
    recs, order = series_to_records(s)
    return {"records": recs, "order": order}


def encode_rational(f: RationalFunction, order) -> dict:
    def enc(p):
        return {str(k): [str(v.re), str(v.im)] for k, v in sorted(p.items())}
    return {"rational": {"numerator": enc(f.numerator), "denominator": enc(f.denominator), "shift": f.shift},
            "order": str(order)}


# ----------------------------------------------------------------------
# loading
# ----------------------------------------------------------------------


def read_document(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_scenario(source, overrides: Optional[Dict[str, int]] = None) -> Scenario:
    """Build a :class:`Scenario` from a path or a parsed document; raises :class:`ScenarioError`."""
    doc = read_document(source) if isinstance(source, (str, Path)) else source
    loader = _Loader(doc, overrides or {})
    sc = loader.build()
    if loader.problems:
        raise ScenarioError(loader.problems)
    return sc


def validate_scenario(source) -> List[str]:
    """Every problem in the document, each prefixed with its location; empty when valid."""
    try:
        load_scenario(source)
    except ScenarioError as e:
        return e.problems
    return []


class _Loader:
    def __init__(self, doc: dict, overrides: Dict[str, int]):
        self.doc = doc
        self.overrides = {k: v for k, v in overrides.items() if v is not None}
        self.problems: List[str] = []

    def err(self, where: str, msg: str):
        self.problems.append(f"{where}: {msg}")

    def build(self) -> Scenario:
        doc = self.doc
        if not isinstance(doc, dict):
            raise ScenarioError(["document: top level must be an object"])
        if doc.get("format", FORMAT) != FORMAT:
            self.err("format", f"unsupported format {doc.get('format')!r}")
        orders = {"u": 10, "q": 20, "degree": 4}
        orders.update({k: int(v) for k, v in doc.get("orders", {}).items()})
        orders.update(self.overrides)
        classes = self._classes()
        lattices = self._lattices()
        maps = self._maps(lattices)
        bases = self._bases()
        if self.problems:
            raise ScenarioError(self.problems)
        degs = self._degenerations(lattices, maps, bases, orders)
        if self.problems:
            raise ScenarioError(self.problems)
        self._tables(degs, classes, orders)
        ktilde = self._ktilde()
        sc = Scenario(doc.get("name", "unnamed"), doc, orders, classes, lattices, maps, bases, degs,
                      ktilde=ktilde, checks=list(doc.get("checks", [])))
        if "transition" in doc:
            sc.transition = self._transition(sc)
        for name, d in degs.items():
            for p in d.problems():
                self.err(f"degenerations.{name}", p)
        if sc.transition is not None:
            for p in sc.transition.problems():
                self.err("transition", p)
        if ktilde is not None:
            from .ktilde import validate_Ktilde

            for v in validate_Ktilde(ktilde)[1]:
                self.err("ktilde", v)
        for i, chk in enumerate(sc.checks):
            if not isinstance(chk, dict) or "type" not in chk:
                self.err(f"checks[{i}]", "each check needs a type")
        return sc

    def _classes(self) -> Dict[str, Insertion]:
        out = {}
        for label, spec in self.doc.get("classes", {}).items():
            where = f"classes.{label}"
            try:
                out[label] = Insertion(0, label, int(spec["degree"]), frozenset(spec.get("zero_on", [])))
            except (KeyError, ValueError) as e:
                self.err(where, str(e))
        if "1" not in out:
            out["1"] = Insertion(0, "1", 0)
        return out

    def _lattices(self) -> Dict[str, CurveClassLattice]:
        out = {}
        for name, spec in self.doc.get("lattices", {}).items():
            try:
                w = spec["weights"]
                out[name] = CurveClassLattice(len(w), tuple(w))
            except (KeyError, ValueError, TypeError) as e:
                self.err(f"lattices.{name}", str(e))
        return out

    def _maps(self, lattices) -> Dict[str, LatticeMap]:
        out = {}
        for name, spec in self.doc.get("maps", {}).items():
            where = f"maps.{name}"
            try:
                src, tgt = lattices[spec["source"]], lattices[spec["target"]]
                out[name] = LatticeMap(src, tgt, spec["matrix"], spec.get("kind", "pushforward"),
                                       spec.get("pairings", ()), name)
            except KeyError as e:
                self.err(where, f"unknown lattice {e}")
            except (ValueError, TypeError) as e:
                self.err(where, str(e))
        for name, m in out.items():
            for p in m.problems():
                self.err(f"maps.{name}", p)
        return out

    def _bases(self) -> Dict[str, CohBasis]:
        out = {}
        for name, spec in self.doc.get("bases", {}).items():
            try:
                out[name] = CohBasis(spec["labels"], spec["degrees"], spec["pairing"], spec["duality"])
            except (KeyError, ValueError, TypeError) as e:
                self.err(f"bases.{name}", str(e))
        return out

    def _component(self, spec, lattices, maps, where) -> Optional[Component]:
        try:
            lat = lattices[spec["lattice"]]
            m = maps[spec["map"]]
        except KeyError as e:
            self.err(where, f"unknown lattice or map {e}")
            return None
        return Component(spec["name"], lat, tuple(spec["c1"]), m, bool(spec.get("dimension_filter", False)))

    def _degenerations(self, lattices, maps, bases, orders) -> Dict[str, DegenerationScenario]:
        out = {}
        for name, spec in self.doc.get("degenerations", {}).items():
            where = f"degenerations.{name}"
            try:
                central = self._component(spec["central"], lattices, maps, where + ".central")
                sides = []
                for j, sd in enumerate(spec.get("sides", [])):
                    comp = self._component(sd, lattices, maps, f"{where}.sides[{j}]")
                    if sd["basis"] not in bases:
                        self.err(f"{where}.sides[{j}]", f"unknown basis {sd['basis']!r}")
                        continue
                    if comp is not None:
                        sides.append(Side(comp, sd["divisor"], bases[sd["basis"]],
                                          tuple(sd["central_pairing"]), tuple(sd["side_pairing"])))
                if central is None:
                    continue
                out[name] = DegenerationScenario(
                    name, lattices[spec["fiber"]], tuple(spec["fiber_c1"]), lattices[spec["total"]],
                    maps[spec["iota"]], central, sides, {}, orders["u"], orders["q"],
                )
            except KeyError as e:
                self.err(where, f"missing or unknown field {e}")
        return out

    def _boundary(self, comp_name, raw, degs, where):
        """Resolve ``[[part, label], ...]`` lists against the divisor bases of ``comp_name``."""
        bases_for = None
        for d in degs.values():
            if d.central.name == comp_name:
                bases_for = [s.basis for s in d.sides]
                break
            for s in d.sides:
                if s.name == comp_name:
                    bases_for = [s.basis]
                    break
            if bases_for is not None:
                break
        if bases_for is None:
            self.err(where, f"unknown component {comp_name!r}")
            return None
        raw = raw if raw is not None else [[] for _ in bases_for]
        if len(raw) != len(bases_for):
            self.err(where, f"component {comp_name} needs {len(bases_for)} boundary partitions, got {len(raw)}")
            return None
        out = []
        for basis, eta in zip(bases_for, raw):
            try:
                out.append(WeightedPartition(tuple((int(a), basis.index(j)) for a, j in eta)))
            except (KeyError, IndexError, ValueError) as e:
                self.err(where, str(e))
                return None
        return tuple(out)

    def _tables(self, degs, classes, orders):
        owner = {}
        for d in degs.values():
            for c in d.components():
                owner.setdefault(c.name, []).append(d)
        sides = [k for k in ("GW", "PT") if k in self.doc.get("tables", {})]
        if self.doc.get("local_tables"):
            sides = ["GW", "PT"]
        for d in degs.values():
            d.tables = {k: RelativeInvariantTable(k) for k in sides}
        for side, rows in self.doc.get("tables", {}).items():
            if side not in ("GW", "PT"):
                self.err(f"tables.{side}", "sides are GW and PT")
                continue
            if side not in sides:
                continue
            var = "u" if side == "GW" else "q"
            for i, row in enumerate(rows):
                where = f"tables.{side}[{i}]"
                comp = row.get("component")
                if comp not in owner:
                    self.err(where, f"unknown component {comp!r}")
                    continue
                try:
                    blocks = [parse_block(x) for x in row.get("insertions", [])]
                    for b in blocks:
                        for g in b.classes:
                            if g not in classes:
                                raise ValueError(f"unknown class {g!r}")
                    series = decode_series(row["series"], var)
                except (KeyError, ValueError) as e:
                    self.err(where, str(e))
                    continue
                boundary = self._boundary(comp, row.get("boundary"), degs, where)
                if boundary is None:
                    continue
                for d in owner[comp]:
                    d.tables[side].set(comp, tuple(row["class"]), blocks, boundary, series)
        for i, spec in enumerate(self.doc.get("local_tables", [])):
            self._local_table(spec, degs, owner, orders, f"local_tables[{i}]")

    def _local_table(self, spec, degs, owner, orders, where):
        """Local-curve series ``Z_m`` at classes ``m * generator``, empty boundary, no insertions."""
        comp = spec.get("component")
        if comp not in owner:
            self.err(where, f"unknown component {comp!r}")
            return
        gen = tuple(spec["generator"])
        u_work = int(spec.get("u_order", orders["u"] + 4 * orders["degree"] + 12))
        q_work = int(spec.get("q_order", orders["q"]))
        for d in owner[comp]:
            boundary = self._boundary(comp, None, degs, where)
            for m in range(1, int(spec["max_multiple"]) + 1):
                cls = tuple(m * x for x in gen)
                d.tables["PT"].set(comp, cls, (), boundary, _local("PT", m, q_work))
                d.tables["GW"].set(comp, cls, (), boundary, _local("GW", m, u_work))

    def _ktilde(self) -> Optional[KtildeTable]:
        spec = self.doc.get("ktilde")
        if spec is None:
            return None
        try:
            K = KtildeTable(default_diagonal=bool(spec.get("default_diagonal", True)),
                            chern_substitution=spec.get("chern_substitution", "log"))
            for i, e in enumerate(spec.get("entries", [])):
                poly = {tuple(t["chern"]): decode_series(t["series"], "u") for t in e["terms"]}
                K.set(e["alpha"], e["alpha_hat"], poly)
            return K
        except (KeyError, ValueError) as e:
            self.err("ktilde", str(e))
            return None

    def _transition(self, sc: Scenario) -> Optional[ConifoldTransition]:
        spec = self.doc["transition"]
        try:
            L, M = sc.lattices, sc.maps
            ex = [Exceptional(tuple(e["class"]), e["component"], tuple(e["curve_class"]))
                  for e in spec["exceptional"]]
            return ConifoldTransition(
                L[spec["Y"]], L[spec["X"]], L[spec["Ytilde"]], M[spec["psi"]], M[spec["phi"]],
                tuple(spec["c1"]["X"]), tuple(spec["c1"]["Y"]), tuple(spec["c1"]["Ytilde"]), ex,
                sc.degenerations[spec["degenerations"]["X"]], sc.degenerations[spec["degenerations"]["Y"]],
                sc.ktilde or KtildeTable(), sc.orders["u"], sc.orders["q"], sc.orders["degree"],
            )
        except KeyError as e:
            self.err("transition", f"missing or unknown field {e}")
            return None


def canonical_json(obj: Any) -> str:
    """Stable serialization: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def boundary_labels(boundary, bases) -> List[List[list]]:
    return [[[a, basis.labels[j]] for a, j in eta.pairs] for eta, basis in zip(boundary, bases)]


def table_rows(table: RelativeInvariantTable, bases_of) -> List[dict]:
    """Table entries as document rows, sorted by key."""
    rows = []
    for (comp, cls, key, boundary), s in table.entries.items():
        rows.append({
            "component": comp,
            "class": list(cls),
            "insertions": [str(b) for b in key],
            "boundary": boundary_labels(boundary, bases_of(comp)),
            "series": encode_series(s),
        })
    rows.sort(key=lambda r: (r["component"], r["class"], r["insertions"], json.dumps(r["boundary"])))
    return rows
