from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gwpt.graded import (
    CurveClassLattice,
    GradedSeries,
    LatticeMap,
    ginvert,
    gmul,
    gysin_preimage,
    pushforward_classes,
)
from gwpt.local_models import pt_local_curve
from gwpt.series import TruncatedSeries

R1 = CurveClassLattice(1, (1,))
R2 = CurveClassLattice(2, (1, 1))


def qs(terms, order=float("inf")):
    return TruncatedSeries("q", terms, order)


def test_classes_up_to_count():
    # brute force over a box
    lat = CurveClassLattice(2, (1, 2))
    brute = sorted((a, b) for a in range(6) for b in range(6) if a + 2 * b <= 5)
    assert sorted(lat.classes_up_to(5)) == brute


def test_lattice_rejects_nonpositive_weight():
    with pytest.raises(ValueError):
        CurveClassLattice(1, (0,))


def test_gmul_examples():
    a = qs({1: 1})
    x = GradedSeries(R1, {(0,): qs({0: 1}), (1,): a}, 3)
    y = GradedSeries(R1, {(0,): qs({0: 1}), (1,): -a}, 3)
    assert gmul(x, y) == GradedSeries(R1, {(0,): qs({0: 1}), (2,): -(a * a)}, 3)
    one = GradedSeries.one(R1, "q", 3)
    assert gmul(x, one) == x


def test_ginvert_examples():
    x = GradedSeries(R1, {(0,): qs({0: 1}), (1,): qs({1: 1})}, 2)
    assert ginvert(x) == GradedSeries(R1, {(0,): qs({0: 1}), (1,): qs({1: -1}), (2,): qs({2: 1})}, 2)
    one = GradedSeries.one(R1, "q", 2)
    assert ginvert(one) == one


def test_ginvert_local_exceptional_series():
    exc = GradedSeries(R1, {(0,): qs({0: 1}), **{(m,): pt_local_curve(m, 12) for m in (1, 2, 3)}}, 3)
    prod = gmul(exc, ginvert(exc))
    assert prod.agrees_with(GradedSeries.one(R1, "q", 3))


def test_ginvert_needs_unit():
    with pytest.raises(ZeroDivisionError):
        ginvert(GradedSeries(R1, {(1,): qs({0: 1})}, 2))


def test_pushforward_examples():
    f = LatticeMap(R2, R1, ((1, 0),))
    a = GradedSeries(R2, {(1, 0): qs({0: 1}), (1, 2): qs({1: 1})}, 3)
    out = pushforward_classes(a, f, target_bound=1, support_is_complete=True)
    assert out[(1,)] == qs({0: 1, 1: 1})
    ident = LatticeMap(R2, R2, ((1, 0), (0, 1)))
    assert pushforward_classes(a, ident) == a


def test_pushforward_refuses_unbounded_fibers():
    f = LatticeMap(R2, R1, ((1, 0),))
    a = GradedSeries(R2, {(1, 0): qs({0: 1})}, 3)
    with pytest.raises(ValueError):
        pushforward_classes(a, f)


def test_gysin_preimage_examples():
    Yt = CurveClassLattice(3, (1, 1, 1))
    phi = LatticeMap(R2, Yt, ((1, 0), (1, -1), (0, 1)), "gysin", ((1, -1, -1),))
    assert phi.problems() == []
    assert gysin_preimage((2, 1, 1), phi) == (2, 1)
    assert gysin_preimage((1, 1, 1), phi) is None
    assert gysin_preimage((0, 0, 0), phi) == (0, 0)
    # in the image, but the preimage (1, -1) is not effective
    assert gysin_preimage((1, 2, -1), phi) is None


def test_gysin_problems_detected():
    Yt = CurveClassLattice(3, (1, 1, 1))
    bad = LatticeMap(R2, Yt, ((1, 0), (1, 0), (0, 1)), "gysin", ((1, -1, -1),))
    assert any("pairs nontrivially" in p for p in bad.problems())


# ---------------------------------------------------------------- properties

coef = st.fractions(min_value=-3, max_value=3, max_denominator=3)


@st.composite
def graded(draw, unit=False):
    entries = {}
    for c in R2.classes_up_to(2):
        if c == (0, 0) and unit:
            entries[c] = qs({0: 1 + abs(draw(coef))}, 6)
            continue
        if draw(st.booleans()):
            entries[c] = qs({i: draw(coef) for i in range(3)}, 6)
    if not entries:
        entries[(0, 0)] = qs({0: 1}, 6)
    return GradedSeries(R2, entries, 2, "q")


@settings(max_examples=40, deadline=None)
@given(graded(), graded(), graded())
def test_gmul_commutative_associative(a, b, c):
    assert gmul(a, b) == gmul(b, a)
    assert gmul(gmul(a, b), c) == gmul(a, gmul(b, c))


@settings(max_examples=40, deadline=None)
@given(graded(unit=True))
def test_ginvert_round_trip(a):
    assert gmul(a, ginvert(a)).agrees_with(GradedSeries.one(R2, "q", 2))


@settings(max_examples=30, deadline=None)
@given(graded(), graded())
def test_pushforward_ring_map(a, b):
    f = LatticeMap(R2, R1, ((1, 1),))
    lhs = pushforward_classes(gmul(a, b), f)
    rhs = gmul(pushforward_classes(a, f), pushforward_classes(b, f))
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 6), st.integers(0, 6))
def test_gysin_preimage_inverts_apply(x, y):
    Yt = CurveClassLattice(3, (1, 1, 1))
    phi = LatticeMap(R2, Yt, ((1, 0), (1, -1), (0, 1)), "gysin", ((1, -1, -1),))
    assert gysin_preimage(phi.apply((x, y)), phi) == (x, y)
