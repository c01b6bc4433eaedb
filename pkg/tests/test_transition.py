import copy

import pytest

from gwpt.degeneration import Insertion, assemble_absolute_pt
from gwpt.fixtures import conifold_toy
from gwpt.graded import GradedSeries, pushforward_classes
from gwpt.ktilde import KtildeTable
from gwpt.local_models import pt_local_curve
from gwpt.series import TruncatedSeries
from gwpt.transition import (
    assemble_Y,
    check_exceptional_correspondence,
    check_key_equality,
    check_ratio,
    compute_exceptional_series,
    compute_ratio,
    op_series,
    run_main_theorem,
    simplify_conifold_X,
    simplify_conifold_Y,
    tilde_series,
)


@pytest.fixture(scope="module")
def toy():
    return conifold_toy()


@pytest.fixture
def t(toy):
    return copy.deepcopy(toy.transition)


def H(toy, k=0):
    return toy.insertion(f"tau_{k}(H)")


def bump(t, side, component, cls, key=(), exponent=None, delta=1, both=True):
    """Add ``delta`` to one coefficient of a stored entry (in every degeneration holding it)."""
    degs = (t.deg_X, t.deg_Y) if both else (t.deg_X,)
    hit = False
    for d in degs:
        table = d.tables[side]
        for k, v in list(table.entries.items()):
            if k[0] == component and k[1] == tuple(cls) and k[2] == tuple(key):
                e = v.valuation if exponent is None else exponent
                table.entries[k] = v + TruncatedSeries.monomial(v.variable, e, delta, v.order)
                hit = True
    assert hit


# ---------------------------------------------------------------- exceptional series and ratio

def test_exceptional_series_small_bounds(t):
    assert compute_exceptional_series(t, "PT", 0) == GradedSeries.one(t.Y, "q", 0)
    exc = compute_exceptional_series(t, "PT", 2)
    assert exc[(0, 0)] == TruncatedSeries.one("q")
    assert exc[(0, 1)] == pt_local_curve(1, t.q_order)
    assert exc[(0, 2)] == pt_local_curve(2, t.q_order)
    assert exc[(1, 0)].is_zero()


def test_exceptional_series_correspondence(t):
    assert check_exceptional_correspondence(t, 3).passed


def test_ratio_of_exceptional_series_is_one(t):
    exc = compute_exceptional_series(t, "PT", 3)
    assert compute_ratio(exc, t, "PT").agrees_with(GradedSeries.one(t.Y, "q", 3))


@pytest.mark.parametrize("side", ["PT", "GW"])
def test_ratio_recovers_blowup_series(t, side):
    assert check_ratio(t, side, degree_bound=3).passed


def test_tampered_numerator_flagged(t):
    num = op_series(t, "PT", degree_bound=3)
    good = compute_ratio(num, t, "PT")
    entries = dict(num.entries)
    entries[(1, 1)] = entries[(1, 1)] + TruncatedSeries.monomial("q", 4, 1, entries[(1, 1)].order)
    bad = compute_ratio(GradedSeries(t.Y, entries, 3, "q"), t, "PT")
    assert good.agrees_with(tilde_series(t, "PT", degree_bound=3))
    assert not bad.agrees_with(tilde_series(t, "PT", degree_bound=3))


def test_pushforward_of_blowup_series_matches_X_assembly(t):
    # every Y class over degree <= 4 in X has a <= 4, so degree <= 8 in Y
    entries = {b: t.tilde_entry("PT", t.tilde_class(b), ()) for b in t.Y.classes_up_to(8)
               if b[0] <= 4 and t.tilde_class(b) is not None}
    ts = GradedSeries(t.Y, entries, 8, "q")
    pushed = pushforward_classes(ts, t.psi, target_bound=4, support_is_complete=True)
    for a in range(1, 5):
        direct = assemble_absolute_pt(t.deg_X, t.deg_X.iota.apply((a,)), (), t.q_order)
        assert pushed[(a,)].truncate(t.q_order) == direct


# ---------------------------------------------------------------- reductions

def test_conifold_Y_exceptional_class_is_local_series(t):
    r = simplify_conifold_Y(t, (0, 1), (), "PT")
    assert r.passed
    assert r.details["terms"] == [{"beta_Y_prime": [0, 0], "m": [1]}]
    assert assemble_Y(t, (0, 1), (), "PT") == pt_local_curve(1, t.q_order)


@pytest.mark.parametrize("beta", [(1, 0), (1, 1), (2, 1), (2, 2), (0, 2)])
def test_conifold_Y_terms_match_brute_force(t, beta):
    r = simplify_conifold_Y(t, beta, (), "PT")
    assert r.passed
    brute = []
    for m in range(sum(beta) + 1):
        rest = (beta[0], beta[1] - m)
        image = t.phi.apply(rest) if rest[1] >= 0 else None
        if image is not None and min(image) >= 0:
            brute.append({"beta_Y_prime": list(rest), "m": [m]})
    assert sorted(r.details["terms"], key=str) == sorted(brute, key=str)
    value = TruncatedSeries.zero("q")
    for term in brute:
        bt = t.phi.apply(term["beta_Y_prime"])
        value = value + t.tilde_entry("PT", bt, ()) * t.local_series("PT", term["m"][0])
    assert assemble_Y(t, beta, (), "PT").truncate(value.order) == value.truncate(assemble_Y(t, beta, (), "PT").order)


def test_conifold_Y_rejects_nonzero_restriction(t):
    g = Insertion(0, "G", 2)
    with pytest.raises(ValueError, match="restrict to zero"):
        simplify_conifold_Y(t, (1, 0), [g], "PT")


@pytest.mark.parametrize("a", [1, 2, 3, 4])
def test_conifold_X_only_trivial_splittings(t, a):
    for side in ("PT", "GW"):
        r = simplify_conifold_X(t, (a,), (), side)
        assert r.passed
        assert r.details["nontrivial_survivors"] == []
        assert len(r.details["fiber"]) == a + 1


def test_conifold_X_zero_class_fiber(t):
    r = simplify_conifold_X(t, (0,), [], "PT")
    assert r.details["fiber"] == [{"beta_Y": [0, 0], "phi_beta_Y": [0, 0, 0]}]


def test_prefactor_constant_on_fibers(t):
    for a in range(5):
        for by, bt in t.fiber_classes((a,)):
            assert t.c_Ytilde(bt) == t.c_X((a,)) == t.c_Y(by)


# ---------------------------------------------------------------- key equality and main theorem

def test_key_equality_class_zero(t):
    r = check_key_equality(t, (0, 0, 0))
    assert r.passed
    assert [(row["lhs"], row["rhs"]) for row in r.rows] == [("1", "1")]


def test_key_equality_with_descendent(toy, t):
    r = check_key_equality(t, (1, 1, 0), [H(toy, 1)])
    assert r.passed
    assert r.details["c"] == 2


def test_key_equality_perturbed_gw_fails(toy, t):
    bump(t, "GW", "Ytilde", (1, 1, 0), both=False)
    assert not check_key_equality(t, (1, 1, 0)).passed


@pytest.mark.parametrize("a", [1, 2])
def test_main_theorem_passes(toy, t, a):
    r = run_main_theorem(t, (a,), [H(toy, 1)])
    assert r.passed
    assert r.details["rationality"]["reconstructed"]
    assert r.details["prefactor_constant_on_fiber"]


def test_main_theorem_flags_local_perturbation(toy, t):
    bump(t, "PT", "Etilde1", (1, 0), exponent=3)
    assert not run_main_theorem(t, (1,), []).passed


def test_main_theorem_flags_kappa_perturbation(toy, t):
    k = t.ktilde
    entry = k.entry((2,), (1,))
    t.ktilde = KtildeTable({((2,), (1,)): {m: s + TruncatedSeries.one("u") for m, s in entry.items()}},
                           k.default_diagonal, k.chern_substitution)
    assert not run_main_theorem(t, (1,), [H(toy, 1)]).passed


def test_main_theorem_reports_validation(toy, t):
    t.c1_Ytilde = (1, 1, 2)
    r = run_main_theorem(t, (1,), [])
    assert r.verdict == "fail"
    assert r.details["validation"]
