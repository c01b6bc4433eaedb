"""The eight acceptance criteria, one test each.

Each test records a PASS/FAIL line that the conftest hook prints in the
terminal summary, then asserts.
"""

import copy
import itertools
import random
from collections import Counter
from fractions import Fraction
from math import factorial, prod

import pytest

from conftest import ACCEPTANCE
from gwpt.degeneration import Insertion, Unit, assemble_absolute_pt, enumerate_splittings, parse_block
from gwpt.fixtures import TOY_INSERTIONS, conifold_toy, synthetic, synthetic_document
from gwpt.graded import gmul
from gwpt.ktilde import KtildeTable, apply_string_equation, bar_transform, leading_key
from gwpt.local_models import pt_local_curve, verify_local_correspondence
from gwpt.partitions import (
    CohBasis,
    WeightedPartition,
    aut_order,
    dual_partition,
    enumerate_weighted_partitions,
    nakajima_pairing,
)
from gwpt.scenario import canonical_json, encode_series
from gwpt.series import (
    I,
    RationalFunction,
    TruncatedSeries,
    check_q_inverse_symmetry,
    rational_reconstruct,
    series_from_records,
)
from gwpt.transition import compute_exceptional_series, compute_ratio, op_series, run_main_theorem, tilde_series


def record(n, text, checks):
    failed = [name for name, ok in checks if not ok]
    ACCEPTANCE[n] = (not failed, text + (f"  (failed: {', '.join(failed[:5])})" if failed else ""))
    print(f"criterion {n}: {'PASS' if not failed else 'FAIL'}  {text}")
    assert not failed, failed


@pytest.fixture(scope="module")
def toy():
    return conifold_toy()


# ---------------------------------------------------------------- 1

def test_criterion_1_local_correspondence():
    checks = []
    for d in (1, 2, 3):
        r = verify_local_correspondence(d, 12)
        checks.append((f"d={d}", r.passed and len(r.rows) > 0))
    record(1, "local GW/PT correspondence for d = 1, 2, 3 at u-order 12", checks)


# ---------------------------------------------------------------- 2

def test_criterion_2_rationality_and_symmetry():
    f = rational_reconstruct(pt_local_curve(1, 12), 1, 2)
    want = RationalFunction({1: 1}, {0: 1, 1: 2, 2: 1})
    record(2, "pt_local_curve(1) reconstructs to q/(1+q)^2 and is q <-> 1/q symmetric",
           [("reconstruct", f == want), ("symmetric", f is not None and check_q_inverse_symmetry(f))])


# ---------------------------------------------------------------- 3

def brute_aut(pairs):
    return sum(all(pairs[p[i]] == pairs[i] for i in range(len(pairs)))
               for p in itertools.permutations(range(len(pairs))))


def test_criterion_3_nakajima_orthogonality():
    basis = CohBasis(["a", "b"], [2, 2], [[0, 1], [1, 0]], [1, 0])
    checks = []
    for d in range(1, 5):
        etas = enumerate_weighted_partitions(d, basis)
        for eta, nu in itertools.product(etas, etas):
            z = prod(a for a, _ in eta.pairs) * brute_aut(list(eta.pairs))
            want = Fraction((-1) ** (d - eta.length), z) if nu == dual_partition(eta, basis) else 0
            checks.append((f"<{eta},{nu}>", nakajima_pairing(eta, nu, basis) == want))
    rng = random.Random(3)
    for length in range(7):
        for _ in range(20):
            pairs = [(rng.randint(1, 3), rng.randint(0, 1)) for _ in range(length)]
            eta = WeightedPartition(tuple(pairs))
            checks.append((f"aut{pairs}", aut_order(eta) == brute_aut(list(eta.pairs))))
    record(3, "Nakajima pairing orthogonality for |eta| <= 4; Aut order matches brute force for l <= 6", checks)


# ---------------------------------------------------------------- 4

def brute_weighted(n, labels):
    """Multisets of (part, label index) with parts summing to n."""
    atoms = [(a, j) for a in range(1, n + 1) for j in range(len(labels))]
    out = set()
    for length in range(n + 1):
        for combo in itertools.combinations_with_replacement(atoms, length):
            if sum(a for a, _ in combo) == n:
                out.add(tuple(sorted(combo)))
    return sorted(out)


def brute_synthetic_pt(doc, beta, with_insertion):
    """Independent triple sum read straight off the document rows."""
    rows = {}
    for r in doc["tables"]["PT"]:
        eta = tuple(sorted((a, ["1", "pt"].index(l)) for a, l in r["boundary"][0]))
        s = r["series"]
        rows[(r["component"], tuple(r["class"]), tuple(r["insertions"]), eta)] = series_from_records(
            s["records"], s["order"], "q")
    total = TruncatedSeries.zero("q")
    key = ("tau_0(P)",)
    for x0, y0, x1, y1 in itertools.product(range(beta + 1), repeat=4):
        if x0 + y0 + x1 + y1 != beta or x0 != x1:
            continue
        placements = [((), ())] if not with_insertion else [(key, ()), ((), key)]
        for k0, k1 in placements:
            if (k0 and (x0, y0) == (0, 0)) or (k1 and (x1, y1) == (0, 0)):
                continue
            for eta in brute_weighted(x0, ["1", "pt"]):
                dual = tuple(sorted((a, 1 - j) for a, j in eta))
                z = prod(a for a, _ in eta) * prod(factorial(c) for c in Counter(eta).values())
                sign = (-1) ** (x0 - len(eta))
                weight = TruncatedSeries.monomial("q", -x0, sign * z)
                total = total + rows[("M0", (x0, y0), k0, eta)] * weight * rows[("M1", (x1, y1), k1, dual)]
    return total


def test_criterion_4_degeneration_round_trip(toy):
    checks = []
    t = conifold_toy(0, q_order=8, degree_bound=3).transition
    for side in ("PT", "GW"):
        num = op_series(t, side, degree_bound=3)
        ratio = compute_ratio(num, t, side)
        back = gmul(ratio, compute_exceptional_series(t, side, 3))
        enc = lambda g: canonical_json({str(list(c)): encode_series(g[c]) for c in t.Y.classes_up_to(3)})
        if side == "PT":
            checks.append(("round trip PT (byte-exact)", enc(back) == enc(num)))
        else:
            # the u^-2 poles of the local GW series contract truncation orders, so compare on the window
            checks.append(("round trip GW (determined window)", back.agrees_with(num)))
        checks.append((f"ratio is blow-up series {side}", ratio.agrees_with(tilde_series(t, side, degree_bound=3))))
    doc = synthetic_document(0, degree_bound=3, q_order=8)
    s = synthetic().degenerations["S"]
    P = Unit(parse_block("tau_0(P)"))
    for beta in (1, 2, 3):
        for with_insertion in (False, True):
            engine = assemble_absolute_pt(s, (beta,), [P] if with_insertion else [], float("inf"))
            brute = brute_synthetic_pt(doc, beta, with_insertion)
            checks.append((f"synthetic beta={beta} P={with_insertion}", engine == brute and not brute.is_zero()))
    record(4, "PT ratio/gmul round trip is byte-exact (GW agrees on its window); synthetic PT assembly equals brute-force triple sum", checks)


# ---------------------------------------------------------------- 5

def test_criterion_5_quadric_filter(toy):
    t = toy.transition
    checks = []
    for a in range(0, 5):
        target = t.deg_X.iota.apply((a,))
        for side in ("GW", "PT"):
            out, log = enumerate_splittings(t.deg_X, target, side)
            trivial = all(not any(any(c) for c in sp.classes[1:]) and not any(sp.boundary_sizes) for sp in out)
            accepted = [r for r in log if r["status"] == "accepted"]
            rejected_ok = all("dimension" in r["reason"] or "matching" in r["reason"]
                              for r in log if r["status"] == "rejected")
            checks.append((f"beta={a} {side}", trivial and len(accepted) == a + 1 == len(out) and rejected_ok))
    record(5, "quadric dimension filter leaves only trivial splittings for X classes of degree <= 4", checks)


# ---------------------------------------------------------------- 6

def bump(t, side, component, cls, key=(), exponent=None, delta=1):
    for d in (t.deg_X, t.deg_Y):
        table = d.tables[side]
        for k, v in list(table.entries.items()):
            if k[0] == component and k[1] == tuple(cls) and k[2] == tuple(key):
                e = v.valuation if exponent is None else exponent
                table.entries[k] = v + TruncatedSeries.monomial(v.variable, e, delta, v.order)


def test_criterion_6_main_theorem_toy(toy):
    t = toy.transition
    checks = []
    for a in range(1, 5):
        for name, texts in TOY_INSERTIONS.items():
            r = run_main_theorem(t, (a,), toy.insertions(texts), 10)
            checks.append((f"a={a} {name}", r.passed and r.details["rationality"]["reconstructed"]))
    desc = (parse_block("tau_1(H)"),)
    H1 = toy.insertions(["tau_1(H)"])
    # (description, perturbation, insertion list of the run that must now fail)
    perturbations = [
        ("PT blow-up low", lambda u: bump(u, "PT", "Ytilde", (2, 1, 1), (), exponent=2), []),
        ("PT blow-up high", lambda u: bump(u, "PT", "Ytilde", (2, 1, 1), (), exponent=37), []),
        ("PT blow-up descendent", lambda u: bump(u, "PT", "Ytilde", (2, 1, 1), desc, exponent=20), H1),
        ("GW blow-up lead", lambda u: bump(u, "GW", "Ytilde", (2, 1, 1), desc), H1),
        ("GW blow-up barred", lambda u: bump(u, "GW", "Ytilde", (2, 1, 1), (parse_block("tau_[1](c1*H)"),)), H1),
        ("GW blow-up plain", lambda u: bump(u, "GW", "Ytilde", (2, 2, 0), ()), []),
        ("local PT", lambda u: bump(u, "PT", "Etilde1", (1, 0), exponent=5), H1),
        ("local GW", lambda u: bump(u, "GW", "Etilde1", (1, 0), exponent=0), []),
        ("quadric unit", lambda u: bump(u, "PT", "Q1", (0,), exponent=0), H1),
    ]
    for name, perturb, run_with in perturbations:
        u = copy.deepcopy(t)
        perturb(u)
        checks.append((f"perturbed {name}", not run_main_theorem(u, (2,), run_with, 10).passed))
    u = copy.deepcopy(t)
    entry = u.ktilde.entry((2,), (1,))
    u.ktilde = KtildeTable({((2,), (1,)): {m: s + TruncatedSeries.monomial("u", 0, Fraction(1, 7)) for m, s in entry.items()}})
    checks.append(("perturbed kappa", not run_main_theorem(u, (2,), H1, 10).passed))
    record(6, "main theorem passes on the conifold toy for degree 1..4, all insertion lists; "
              "every single perturbation flips it", checks)


# ---------------------------------------------------------------- 7

def test_criterion_7_bar_transform(toy):
    K = toy.transition.ktilde
    checks = []
    for n in range(1, 5):
        xs = [Insertion(0, f"g{i}", 2) for i in range(n)]
        checks.append((f"identity l={n}", bar_transform(xs, K) == {leading_key(xs): TruncatedSeries.one("u")}))
    rng = random.Random(7)
    for _ in range(40):
        alpha = []
        while True:
            a = rng.randint(1, 5)
            if sum(alpha) + a > 5:
                break
            alpha.append(a)
        if not alpha:
            continue
        xs = [Insertion(a - 1, f"g{i}", 2) for i, a in enumerate(alpha)]
        coeff = bar_transform(xs, K)[leading_key(xs)]
        e = len(alpha) - sum(alpha)
        checks.append((f"alpha={alpha}", coeff.valuation == e and coeff.coefficient(e) == I ** e))
    record(7, "bar transform is the identity for alpha = (1^l), l <= 4; diagonal leads with (iu)^(l-|alpha|)", checks)


# ---------------------------------------------------------------- 8

def test_criterion_8_string_equations(toy):
    one = Insertion(0, "1", 0)
    g = toy.insertion("tau_0(H)")
    pt = apply_string_equation("PT", [one, g])
    gw = apply_string_equation("GW", [one, g])
    t = toy.transition
    r = run_main_theorem(t, (1,), [one, g], 10)
    record(8, "PT with tau_0(1) is zero; GW drops one tau_0(1)", [
        ("PT zero", pt.status == "zero"),
        ("GW reduced", gw.status == "reduced" and gw.insertions == [g]),
        ("PT single", apply_string_equation("PT", [one]).status == "zero"),
        ("main theorem after reduction", r.passed and "string_equation" in r.details),
    ])
