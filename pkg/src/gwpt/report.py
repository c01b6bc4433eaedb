"""Deterministic run reports.

Every declared check becomes one record with its inputs, both sides'
coefficients and a verdict. A comparison with no coefficients on either
side is ``vacuous``, which does not count as passing.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from .degeneration import enumerate_splittings
from .ktilde import apply_string_equation, validate_Ktilde
from .local_models import verify_local_correspondence
from .scenario import Scenario, canonical_json
from .transition import (
    CheckResult,
    check_exceptional_correspondence,
    check_key_equality,
    check_ratio,
    run_main_theorem,
    simplify_conifold_X,
    simplify_conifold_Y,
)


@dataclass
class RunReport:
    scenario: str
    digest: str
    orders: Dict[str, int]
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        verdicts = {c.verdict for c in self.checks}
        if "fail" in verdicts:
            return "fail"
        if "vacuous" in verdicts or not self.checks:
            return "vacuous"
        return "pass"

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "digest": self.digest,
            "orders": self.orders,
            "verdict": self.verdict,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def summary_lines(self) -> List[str]:
        out = []
        for c in self.checks:
            args = ", ".join(f"{k}={v}" for k, v in sorted(c.inputs.items()))
            out.append(f"{c.verdict.upper():8s} {c.name} [{args}]")
        out.append(f"overall: {self.verdict}")
        return out


def document_digest(doc: dict) -> str:
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


def _need_transition(sc: Scenario):
    if sc.transition is None:
        raise ValueError("this check needs a transition section")
    return sc.transition


def _local(sc: Scenario, chk: dict) -> CheckResult:
    d = int(chk["degree"])
    r = verify_local_correspondence(d, sc.orders["u"])
    verdict = "pass" if r.passed else ("vacuous" if not r.rows and r.rational is not None else "fail")
    info = r.to_dict()
    rows = info.pop("rows")
    return CheckResult("local-correspondence", {"degree": d, "u_order": sc.orders["u"]}, verdict, rows, info)


def _ktilde(sc: Scenario, chk: dict) -> CheckResult:
    if sc.ktilde is None:
        return CheckResult("validate-ktilde", {}, "vacuous", [], {"note": "scenario has no matrix data"})
    ok, violations = validate_Ktilde(sc.ktilde)
    return CheckResult("validate-ktilde", {"entries": len(sc.ktilde.entries)}, "pass" if ok else "fail", [],
                       {"violations": violations})


def splitting_filter_check(sc: Scenario, name: str, degree_bound: Optional[int] = None) -> CheckResult:
    """Every surviving splitting of a fiber class has empty boundary conditions."""
    d = sc.degenerations[name]
    bound = sc.orders["degree"] if degree_bound is None else degree_bound
    rows, ok = [], True
    for beta in d.fiber_lattice.classes_up_to(bound):
        if not any(beta):
            continue
        target = d.iota.apply(beta)
        for side in ("GW", "PT"):
            survivors, log = enumerate_splittings(d, target, side)
            trivial = all(not any(sp.boundary_sizes) for sp in survivors)
            ok = ok and trivial and bool(survivors)
            rows.append({
                "class": list(beta), "side": side, "match": trivial,
                "accepted": [[list(c) for c in sp.classes] for sp in survivors],
                "rejected": sorted({r["reason"].split(":")[0] for r in log if r["status"] == "rejected"}),
            })
    return CheckResult("splitting-filter", {"degeneration": name, "degree_bound": bound}, _v(ok, rows), rows)


def _v(ok, rows):
    return "fail" if not ok else ("pass" if rows else "vacuous")


def _filter(sc: Scenario, chk: dict) -> CheckResult:
    return splitting_filter_check(sc, chk["degeneration"], chk.get("degree_bound"))


def _string(sc: Scenario, chk: dict) -> CheckResult:
    ins = sc.insertions(chk["insertions"])
    pt, gw = apply_string_equation("PT", ins), apply_string_equation("GW", ins)
    has_unit = any(x.is_unit for x in ins)
    if has_unit:
        ok = pt.status == "zero" and gw.status == "reduced" and len(gw.insertions) == len(ins) - 1
    else:
        ok = pt.status == gw.status == "unchanged"
    rows = [{"side": "PT", "status": pt.status, "note": pt.note, "match": ok},
            {"side": "GW", "status": gw.status, "insertions": [str(x) for x in gw.insertions], "note": gw.note,
             "match": ok}]
    return CheckResult("string-equation", {"insertions": list(chk["insertions"])}, _v(ok, rows), rows)


def _exceptional(sc: Scenario, chk: dict) -> CheckResult:
    return check_exceptional_correspondence(_need_transition(sc), chk.get("degree_bound"))


def _ratio(sc: Scenario, chk: dict) -> CheckResult:
    return check_ratio(_need_transition(sc), chk.get("side", "PT"), sc.insertions(chk.get("insertions")),
                       chk.get("degree_bound"))


def _cx(sc: Scenario, chk: dict) -> CheckResult:
    return simplify_conifold_X(_need_transition(sc), chk["class"], sc.insertions(chk.get("insertions")),
                               chk.get("side", "PT"))


def _cy(sc: Scenario, chk: dict) -> CheckResult:
    return simplify_conifold_Y(_need_transition(sc), chk["class"], sc.insertions(chk.get("insertions")),
                               chk.get("side", "PT"))


def _key(sc: Scenario, chk: dict) -> CheckResult:
    return check_key_equality(_need_transition(sc), chk["class"], sc.insertions(chk.get("insertions")))


def _main(sc: Scenario, chk: dict) -> CheckResult:
    return run_main_theorem(_need_transition(sc), chk["class"], sc.insertions(chk.get("insertions")))


CHECKS: Dict[str, Callable[[Scenario, dict], CheckResult]] = {
    "local-correspondence": _local,
    "validate-ktilde": _ktilde,
    "splitting-filter": _filter,
    "string-equation": _string,
    "exceptional-series": _exceptional,
    "ratio": _ratio,
    "conifold-X": _cx,
    "conifold-Y": _cy,
    "key-equality": _key,
    "main-theorem": _main,
}


def run_check(sc: Scenario, chk: dict) -> CheckResult:
    kind = chk.get("type")
    if kind not in CHECKS:
        raise ValueError(f"unknown check type {kind!r}; known: {', '.join(sorted(CHECKS))}")
    return CHECKS[kind](sc, chk)


def run_all(sc: Scenario, only: Optional[Sequence[str]] = None) -> RunReport:
    """Run the declared checks in declaration order, optionally restricted to some check types."""
    report = RunReport(sc.name, document_digest(sc.document), dict(sc.orders))
    for chk in sc.checks:
        if only and chk.get("type") not in only:
            continue
        report.checks.append(run_check(sc, chk))
    return report
