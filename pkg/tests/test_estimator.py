from fractions import Fraction

import pytest

from subsetminer.catalog import default_catalog, make_catalog
from subsetminer.estimator import (
    ArityProfile,
    BudgetExceeded,
    enumerate_space,
    log10_int,
    overlap_profile,
    reduction_factor,
    redundancy,
    space_size,
)


def test_depth_zero():
    est = space_size(ArityProfile(3, 4, 2), 0)
    assert est.per_level == () and est.cumulative == 0
    assert enumerate_space(ArityProfile(3, 4, 2), 0).per_level == ()


def test_unary_chain():
    assert space_size(ArityProfile(1, 0, 1), 3).per_level == (1, 1, 1)


def test_unary_binary_depth_two():
    est = space_size(ArityProfile(1, 1, 1), 2)
    assert est.per_level == (2, 10)
    assert est.cumulative == 12
    assert est.cumulative_by_level() == [2, 12]
    assert enumerate_space(ArityProfile(1, 1, 1), 2) == est


def test_enumerate_two_inputs():
    assert enumerate_space(ArityProfile(2, 0, 2), 1).cumulative == 4


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_enumerate_matches_formula(depth):
    p = ArityProfile(1, 1, 1)
    assert enumerate_space(p, depth) == space_size(p, depth)


def test_higher_arity():
    p = ArityProfile(0, 0, 2, ((3, 1),))
    assert enumerate_space(p, 2) == space_size(p, 2)
    assert space_size(p, 1).per_level == (8,)


def test_budget_refusal():
    with pytest.raises(BudgetExceeded):
        enumerate_space(ArityProfile(2, 2, 3), 3, budget=1000)


def test_profile_from_catalog():
    cat = make_catalog([("a", 1), ("b", 2), ("c", 2), ("d", 3), ("e", 0)])
    assert ArityProfile.from_catalog(cat) == ArityProfile(1, 3, 1)
    assert ArityProfile.from_catalog(cat, clamp=False) == ArityProfile(1, 2, 1, ((3, 1),))
    full = ArityProfile.from_catalog(default_catalog())
    assert full.unary_count > 0 and full.binary_count > 0


def test_reduction():
    r = reduction_factor(ArityProfile(0, 200), ArityProfile(0, 10), 1000, 5)
    assert r.log10 > 6
    r1 = reduction_factor(ArityProfile(0, 200), ArityProfile(0, 10), 1, 1)
    assert r1.ratio == Fraction(200, 10)
    with pytest.raises(ZeroDivisionError):
        reduction_factor(ArityProfile(0, 2), ArityProfile(0, 0), 1, 2)
    with pytest.raises(ValueError):
        reduction_factor(ArityProfile(0, 2), ArityProfile(0, 1), 0, 2)


def test_overlap_split_rounds_binary_up():
    assert overlap_profile(3, ArityProfile(5, 5)) == ArityProfile(1, 2)
    assert overlap_profile(2, ArityProfile(0, 10)) == ArityProfile(0, 2)
    with pytest.raises(ValueError):
        overlap_profile(11, ArityProfile(0, 10))


def test_redundancy():
    r = redundancy(2, ArityProfile(0, 10), 5)
    assert r[0] == Fraction(2, 10)
    assert all(a > b for a, b in zip(r, r[1:]))
    assert redundancy(10, ArityProfile(0, 10), 3) == [1, 1, 1]


def test_log10_int_large():
    assert log10_int(10**2000) == pytest.approx(2000)
    assert log10_int(1000) == pytest.approx(3)
