"""Closed-form series for the local (-1,-1) curve.

The PT side is read off the product formula, the GW side from the
multiple-cover formula and the exponential formula. The two are coded
independently so that their agreement under ``-q = e^{iu}`` is a real
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Dict, List, Optional

from .series import (
    GaussianRational,
    RationalFunction,
    TruncatedSeries,
    check_q_inverse_symmetry,
    reconstruct_auto,
)


@dataclass(frozen=True)
class LocalCurveSeries:
    side: str
    degree: int
    series: TruncatedSeries

    def __post_init__(self):
        if self.side not in ("GW", "PT"):
            raise ValueError(f"side must be GW or PT, got {self.side!r}")
        if self.degree < 1:
            raise ValueError("degree must be positive")


def default_q_order(d: int) -> int:
    """Enough q-coefficients for Padé to pin down the degree-d series with room to spare."""
    return 8 * d * d + 12


def pt_local_curve(d: int, q_order: int) -> TruncatedSeries:
    """Coefficient of ``v^d`` in ``prod_{n>=1} (1 - (-q)^n v)^n`` below ``q^q_order``."""
    if d < 1:
        raise ValueError("degree must be positive")
    q_order = int(q_order)
    # poly[k] = {q exponent: coefficient} for the coefficient of v^k
    poly: List[Dict[int, int]] = [{0: 1}] + [{} for _ in range(d)]
    for n in range(1, q_order):
        sign = -1 if n % 2 else 1
        # (1 - x v)^n with x = sign * q^n
        factor = [
            {n * j: comb(n, j) * (-sign) ** j} if j <= n else {}
            for j in range(d + 1)
        ]
        new: List[Dict[int, int]] = [{} for _ in range(d + 1)]
        for i, pi in enumerate(poly):
            if not pi:
                continue
            for j in range(d + 1 - i):
                fj = factor[j]
                if not fj:
                    continue
                (ej, cj), = fj.items()
                target = new[i + j]
                for e, c in pi.items():
                    if e + ej < q_order:
                        target[e + ej] = target.get(e + ej, 0) + c * cj
        poly = [{e: c for e, c in p.items() if c} for p in new]
    return TruncatedSeries("q", poly[d], q_order)


def _two_sin_half(d: int, order: int) -> TruncatedSeries:
    """``2 sin(d u / 2)`` below ``u^order``."""
    terms = {}
    k = 0
    while 2 * k + 1 < order:
        terms[2 * k + 1] = Fraction((-1) ** k * 2 * d ** (2 * k + 1), 2 ** (2 * k + 1) * factorial(2 * k + 1))
        k += 1
    return TruncatedSeries("u", terms, order)


def gw_connected_multiple_cover(d: int, u_order: int) -> TruncatedSeries:
    """``1 / (d * (2 sin(d u / 2))^2)`` below ``u^u_order``."""
    if d < 1:
        raise ValueError("degree must be positive")
    s = _two_sin_half(d, u_order + 3)
    return (s * s).invert().scale(Fraction(1, d)).truncate(u_order)


def gw_disconnected_local(d: int, u_order: int) -> TruncatedSeries:
    """Coefficient of ``v^d`` in ``exp(sum_e F_e v^e)``, with F_e the connected series."""
    if d < 1:
        raise ValueError("degree must be positive")
    work = u_order + 2 * d
    F = {e: gw_connected_multiple_cover(e, work) for e in range(1, d + 1)}
    # k Z_k = sum_{e=1}^k e F_e Z_{k-e}
    Z = [TruncatedSeries.one("u")]
    for k in range(1, d + 1):
        acc = None
        for e in range(1, k + 1):
            term = F[e].scale(e) * Z[k - e]
            acc = term if acc is None else acc + term
        Z.append(acc.scale(Fraction(1, k)))
    return Z[d].truncate(u_order)


@dataclass
class LocalCorrespondenceReport:
    degree: int
    u_order: int
    q_order: int
    passed: bool
    rational: Optional[RationalFunction]
    symmetric: Optional[bool]
    rows: List[dict] = field(default_factory=list)
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "u_order": self.u_order,
            "q_order": self.q_order,
            "passed": self.passed,
            "rational_function": None if self.rational is None else str(self.rational),
            "q_inverse_symmetric": self.symmetric,
            "message": self.message,
            "rows": self.rows,
        }


def compare_rows(lhs: TruncatedSeries, rhs: TruncatedSeries, order, lhs_name="lhs", rhs_name="rhs"):
    """Per-exponent comparison of two series below ``order``."""
    lo = min(lhs.valuation, rhs.valuation)
    rows = []
    e = Fraction(lo) if lo != float("inf") else None
    if e is None:
        return rows
    # half-integer steps cover every possible exponent
    step = Fraction(1, 2) if not (lhs.has_integer_exponents() and rhs.has_integer_exponents()) else Fraction(1)
    if step == 1:
        e = Fraction(int(e))
    if order == float("inf"):
        # exact on both sides: nothing beyond the last stored term
        order = max(list(lhs.terms) + list(rhs.terms)) + 1
    while e < order:
        a, b = lhs.coefficient(e), rhs.coefficient(e)
        if a or b:
            rows.append({"exponent": str(e), lhs_name: str(a), rhs_name: str(b), "match": a == b})
        e += step
    return rows


def verify_local_correspondence(d: int, u_order: int, pt_series: Optional[TruncatedSeries] = None,
                                q_order: Optional[int] = None) -> LocalCorrespondenceReport:
    """Check the local degree-d PT series against the GW series under ``q = -e^{iu}``."""
    if d < 1:
        raise ValueError("degree must be positive")
    if pt_series is None:
        q_order = default_q_order(d) if q_order is None else q_order
        pt_series = pt_local_curve(d, q_order)
    else:
        q_order = pt_series.order
    f = reconstruct_auto(pt_series)
    if f is None:
        return LocalCorrespondenceReport(
            d, u_order, q_order, False, None, None,
            message="PT series did not reconstruct to a rational function at this order",
        )
    pt_u = f.substitute(u_order)
    gw_u = gw_disconnected_local(d, u_order)
    rows = compare_rows(pt_u, gw_u, u_order, "pt", "gw")
    passed = bool(rows) and all(r["match"] for r in rows)
    return LocalCorrespondenceReport(
        d, u_order, q_order, passed, f, check_q_inverse_symmetry(f), rows,
        message="" if passed else "coefficient mismatch" if rows else "no coefficients compared",
    )
