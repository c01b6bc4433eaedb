"""Scenario documents used by the acceptance suite and shipped as examples.

``conifold_toy_document`` builds a one-node conifold transition on
rank-2/rank-1 lattices. Blow-up PT entries are random rational functions;
the matching GW entries are solved from them so that the relative
correspondence holds at every blow-up class by construction. The
exceptional components carry the local-curve series.

``synthetic_document`` is a small generic degeneration with random PT
tables and nonempty boundary conditions, used for brute-force
comparison of the assembly.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .degeneration import InsertionKey, key_str
from .ktilde import KtildeTable, bar_transform, leading_key
from .partitions import EMPTY
from .scenario import Scenario, encode_rational, encode_series, load_scenario
from .series import I, GaussianRational, RationalFunction, TruncatedSeries, exp_linear, neg_iu_power

DENOMINATORS = (
    {0: 1, 1: 2, 2: 1},              # (1+q)^2
    {0: 1, 2: 1},                    # 1+q^2
    {0: 1, 1: 2, 2: 2, 3: 2, 4: 1},  # (1+q)^2 (1+q^2)
)

TOY_INSERTIONS = {
    "none": [],
    "point-like": ["tau_0(H)"],
    "descendent": ["tau_1(H)"],
    "pair": ["tau_0(H)", "tau_0(H)"],
}

KAPPA = Fraction(1, 2)

E_BASIS = {
    "labels": ["1", "h1", "h2", "pt"],
    "degrees": [0, 2, 2, 4],
    "pairing": [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
    "duality": [3, 2, 1, 0],
}

UNIT = {"records": [[0, 1, "1", "0"]], "order": None}


def _rng(*parts) -> random.Random:
    return random.Random("|".join(str(p) for p in parts))


def random_rational(rng: random.Random) -> RationalFunction:
    coeffs = [rng.randint(-3, 3) for _ in range(3)]
    if coeffs[0] == 0:
        coeffs[0] = rng.choice([-2, -1, 1, 2])
    num = {1 + i: c for i, c in enumerate(coeffs) if c}
    return RationalFunction(num, rng.choice(DENOMINATORS))


def random_u_series(rng: random.Random, low: int, order: int) -> TruncatedSeries:
    terms = {}
    for e in range(low, order):
        re = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        im = Fraction(rng.randint(-2, 2), rng.randint(1, 3)) if rng.random() < 0.3 else 0
        terms[e] = GaussianRational(re, im)
    return TruncatedSeries("u", terms, order)


def toy_ktilde(kappa=KAPPA) -> KtildeTable:
    return KtildeTable({((2,), (1,)): {(1, 0, 0): TruncatedSeries.one("u").scale(kappa)}})


def phi_class(a: int, b: int):
    return [a, a - b, b]


def conifold_toy_document(seed: int = 0, u_order: int = 10, q_order: int = 40, degree_bound: int = 4,
                          insertion_lists: Optional[Dict[str, List[str]]] = None) -> dict:
    """The resolved-conifold toy as a scenario document."""
    lists = TOY_INSERTIONS if insertion_lists is None else insertion_lists
    K = toy_ktilde()
    doc = {
        "format": "gwpt-scenario/1",
        "name": "conifold-toy",
        "orders": {"u": u_order, "q": q_order, "degree": degree_bound},
        "classes": {"H": {"degree": 2, "zero_on": ["Etilde1", "Q1"]}},
        "lattices": {
            "Y": {"weights": [1, 1]},
            "X": {"weights": [1]},
            "Ytilde": {"weights": [1, 1, 1]},
            "W_X": {"weights": [1, 1]},
            "W_Y": {"weights": [3, 1, 1]},
            "Q1": {"weights": [1]},
            "Etilde1": {"weights": [1, 1]},
        },
        "maps": {
            "psi": {"source": "Y", "target": "X", "kind": "pushforward", "matrix": [[1, 0]]},
            "phi": {"source": "Y", "target": "Ytilde", "kind": "gysin", "matrix": [[1, 0], [1, -1], [0, 1]],
                    "pairings": [[1, -1, -1]]},
            "iota_X": {"source": "X", "target": "W_X", "kind": "inclusion", "matrix": [[1], [1]]},
            "iota0_X": {"source": "Ytilde", "target": "W_X", "kind": "pushforward",
                        "matrix": [[1, 0, 0], [0, 1, 1]]},
            "iota1_X": {"source": "Q1", "target": "W_X", "kind": "inclusion", "matrix": [[0], [1]]},
            "iota_Y": {"source": "Y", "target": "W_Y", "kind": "inclusion", "matrix": [[1, 0], [0, 1], [0, 0]]},
            "iota0_Y": {"source": "Ytilde", "target": "W_Y", "kind": "inclusion",
                        "matrix": [[1, 0, 0], [0, 0, 1], [-1, 1, 1]]},
            "iota1_Y": {"source": "Etilde1", "target": "W_Y", "kind": "inclusion",
                        "matrix": [[0, 0], [1, 0], [0, 1]]},
        },
        "bases": {"E": E_BASIS},
        "degenerations": {
            "X": {
                "fiber": "X", "fiber_c1": [2], "total": "W_X", "iota": "iota_X",
                "central": {"name": "Ytilde", "lattice": "Ytilde", "c1": [1, 1, 1], "map": "iota0_X"},
                "sides": [{"name": "Q1", "lattice": "Q1", "c1": [3], "map": "iota1_X", "dimension_filter": True,
                           "divisor": "E1", "basis": "E", "central_pairing": [1, -1, -1], "side_pairing": [1]}],
            },
            "Y": {
                "fiber": "Y", "fiber_c1": [2, 0], "total": "W_Y", "iota": "iota_Y",
                "central": {"name": "Ytilde", "lattice": "Ytilde", "c1": [1, 1, 1], "map": "iota0_Y"},
                "sides": [{"name": "Etilde1", "lattice": "Etilde1", "c1": [0, 3], "map": "iota1_Y",
                           "dimension_filter": True, "divisor": "E1", "basis": "E",
                           "central_pairing": [1, -1, -1], "side_pairing": [0, 1]}],
            },
        },
        "transition": {
            "Y": "Y", "X": "X", "Ytilde": "Ytilde", "psi": "psi", "phi": "phi",
            "c1": {"X": [2], "Y": [2, 0], "Ytilde": [1, 1, 1]},
            "exceptional": [{"class": [0, 1], "component": "Etilde1", "curve_class": [1, 0]}],
            "degenerations": {"X": "X", "Y": "Y"},
        },
        "ktilde": {
            "chern_substitution": "log",
            "default_diagonal": True,
            "entries": [{"alpha": [2], "alpha_hat": [1],
                         "terms": [{"chern": [1, 0, 0], "series": {"records": [[0, 1, str(KAPPA), "0"]],
                                                                     "order": None}}]}],
        },
        "local_tables": [{"component": "Etilde1", "generator": [1, 0], "max_multiple": degree_bound}],
    }
    pt_rows, gw_rows = [], []
    for comp, cls, bnd in (("Q1", [0], [[]]), ("Etilde1", [0, 0], [[]]), ("Ytilde", [0, 0, 0], [[]])):
        for rows in (pt_rows, gw_rows):
            rows.append({"component": comp, "class": cls, "insertions": [], "boundary": bnd, "series": UNIT})
    for a in range(1, degree_bound + 1):
        for b in range(a + 1):
            cls = phi_class(a, b)
            pt, gw = _blowup_entries(seed, cls, 2 * a, lists, K, u_order, q_order)
            pt_rows += pt
            gw_rows += gw
    doc["tables"] = {"PT": pt_rows, "GW": gw_rows}
    doc["checks"] = _toy_checks(degree_bound, lists)
    return doc


def _parse_list(texts):
    from .degeneration import Insertion, parse_block

    out = []
    for t in texts:
        b = parse_block(t)
        label = b.classes[0]
        degree = 0 if label == "1" else 2
        out.append(Insertion(b.alpha_hat[0] - 1, label, degree, frozenset() if label == "1" else {"Q1", "Etilde1"}))
    return out


def _blowup_entries(seed, cls, c, lists, K, u_order, q_order):
    """PT and GW rows at one blow-up class, with the correspondence holding by construction."""
    pt_rows, gw_rows = [], []
    gw: Dict[InsertionKey, TruncatedSeries] = {}
    need: Dict[InsertionKey, int] = {}
    work = u_order + 8
    plans = []
    for name, texts in sorted(lists.items()):
        ins = _parse_list(texts)
        lead = leading_key(ins)
        if any(p[1] == lead for p in plans):
            continue
        bar = bar_transform(ins, K)
        for key, coeff in bar.items():
            need[key] = max(need.get(key, -10 ** 6), u_order - c - int(coeff.valuation))
        plans.append((ins, lead, bar))
    for ins, lead, bar in plans:
        for key in bar:
            if key != lead and key not in gw:
                low = -c - 2
                gw[key] = random_u_series(_rng(seed, "GW", cls, key_str(key)), low, need[key])
    for ins, lead, bar in plans:
        f = random_rational(_rng(seed, "PT", cls, key_str(lead)))
        pt_rows.append(_row(cls, lead, encode_rational(f, q_order)))
        target = neg_iu_power(-c) * f.substitute(work) * exp_linear(I, Fraction(-c, 2), work)
        rest = target
        for key, coeff in bar.items():
            if key != lead:
                rest = rest - coeff * gw[key]
        gw[lead] = (rest / bar[lead]).truncate(need[lead])
    for key, s in sorted(gw.items()):
        gw_rows.append(_row(cls, key, encode_series(s.truncate(need[key]))))
    return pt_rows, gw_rows


def _row(cls, key, series):
    return {"component": "Ytilde", "class": list(cls), "insertions": [str(b) for b in key],
            "boundary": [[]], "series": series}


def _toy_checks(degree_bound, lists):
    checks: List[dict] = [{"type": "local-correspondence", "degree": d} for d in (1, 2, 3)]
    checks.append({"type": "validate-ktilde"})
    checks.append({"type": "splitting-filter", "degeneration": "X"})
    checks.append({"type": "splitting-filter", "degeneration": "Y"})
    checks.append({"type": "exceptional-series"})
    for side in ("PT", "GW"):
        checks.append({"type": "ratio", "side": side})
    for a in range(1, degree_bound + 1):
        for side in ("PT", "GW"):
            checks.append({"type": "conifold-X", "class": [a], "side": side})
    for cls in ([1, 0], [0, 1], [1, 1], [2, 1], [1, 2]):
        for side in ("PT", "GW"):
            checks.append({"type": "conifold-Y", "class": cls, "side": side})
    checks.append({"type": "key-equality", "class": [1, 1, 0], "insertions": []})
    checks.append({"type": "key-equality", "class": [2, 1, 1], "insertions": ["tau_1(H)"]})
    checks.append({"type": "string-equation", "insertions": ["tau_0(1)", "tau_0(H)"]})
    for a in range(1, degree_bound + 1):
        for name in sorted(lists):
            checks.append({"type": "main-theorem", "class": [a], "insertions": list(lists[name])})
    return checks


def conifold_toy(seed: int = 0, **kw) -> Scenario:
    return load_scenario(conifold_toy_document(seed, **kw))


# ----------------------------------------------------------------------
# generic degeneration with boundary conditions
# ----------------------------------------------------------------------

CURVE_BASIS = {"labels": ["1", "pt"], "degrees": [0, 2], "pairing": [[0, 1], [1, 0]], "duality": [1, 0]}


def random_q_series(rng: random.Random, order: int) -> TruncatedSeries:
    low = rng.randint(-1, 1)
    terms = {e: Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for e in range(low, order)}
    return TruncatedSeries("q", terms, order)


def synthetic_document(seed: int = 0, degree_bound: int = 3, q_order: int = 8) -> dict:
    """``M ~> M_0 u_D M_1`` over rank-2 component lattices mapping to a rank-1 total lattice.

    Generators ``a, b`` of ``M_0`` and ``c, e`` of ``M_1`` all have total degree 1;
    ``a`` and ``c`` meet the divisor once, ``b`` and ``e`` miss it.
    """
    doc = {
        "format": "gwpt-scenario/1",
        "name": "synthetic-degeneration",
        "orders": {"u": 6, "q": q_order, "degree": degree_bound},
        "classes": {"P": {"degree": 2}},
        "lattices": {"M": {"weights": [1]}, "W": {"weights": [1]}, "M0": {"weights": [1, 1]},
                     "M1": {"weights": [1, 1]}},
        "maps": {
            "iota": {"source": "M", "target": "W", "kind": "inclusion", "matrix": [[1]]},
            "iota0": {"source": "M0", "target": "W", "kind": "pushforward", "matrix": [[1, 1]]},
            "iota1": {"source": "M1", "target": "W", "kind": "pushforward", "matrix": [[1, 1]]},
        },
        "bases": {"D": CURVE_BASIS},
        "degenerations": {
            "S": {
                "fiber": "M", "fiber_c1": [1], "total": "W", "iota": "iota",
                "central": {"name": "M0", "lattice": "M0", "c1": [2, 1], "map": "iota0"},
                "sides": [{"name": "M1", "lattice": "M1", "c1": [2, 1], "map": "iota1", "divisor": "D",
                           "basis": "D", "central_pairing": [1, 0], "side_pairing": [1, 0]}],
            }
        },
    }
    rows = []
    labels = CURVE_BASIS["labels"]
    for comp in ("M0", "M1"):
        for x in range(degree_bound + 1):
            for y in range(degree_bound + 1 - x):
                keys = [[]] if (x, y) == (0, 0) else [[], ["tau_0(P)"]]
                for key in keys:
                    for eta in _labelled_partitions(x, labels):
                        if (x, y) == (0, 0):
                            series = UNIT
                        else:
                            rng = _rng(seed, comp, x, y, key, eta)
                            series = encode_series(random_q_series(rng, q_order))
                        rows.append({"component": comp, "class": [x, y], "insertions": key,
                                     "boundary": [eta], "series": series})
    doc["tables"] = {"PT": rows}
    return doc


def _labelled_partitions(n: int, labels: Sequence[str]) -> List[list]:
    from .partitions import enumerate_partitions, WeightedPartition
    import itertools

    seen = set()
    out = []
    for parts in enumerate_partitions(n):
        for idx in itertools.product(range(len(labels)), repeat=len(parts)):
            w = WeightedPartition(tuple(zip(parts, idx)))
            if w not in seen:
                seen.add(w)
                out.append([[a, labels[j]] for a, j in w.pairs])
    return out


def synthetic(seed: int = 0, **kw) -> Scenario:
    return load_scenario(synthetic_document(seed, **kw))
