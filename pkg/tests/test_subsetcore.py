import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import proper_subset_filter
from subsetminer.subsetcore import (
    SubsetFamily,
    amplify,
    covers,
    dedupe,
    family,
    filter_by_size,
    remove_proper_subsets,
)

LETTERS = list("abcdefghijklmno")
families = st.lists(
    st.frozensets(st.sampled_from(LETTERS[:8]), min_size=1, max_size=5), max_size=30
).map(lambda xs: family(xs))


def test_covers():
    assert covers(family([{"a", "b", "c"}]), {"a", "c"})
    assert not covers(family([{"a", "b"}, {"b", "c"}]), {"a", "c"})
    assert covers(family([{"a", "c"}]), {"a", "c"})


def test_dedupe():
    assert dedupe(family([{"a"}, {"a"}, {"b"}])).subsets == [("a",), ("b",)]
    fam = family([{"a"}, {"b", "c"}])
    assert dedupe(fam).subsets == fam.subsets


def test_dedupe_controlled_duplication():
    rng = random.Random(0)
    uniques = set()
    while len(uniques) < 250:
        uniques.add(tuple(sorted(rng.sample(LETTERS, rng.randint(1, 8)))))
    records = [s for s in sorted(uniques) for _ in range(4)]
    rng.shuffle(records)
    assert len(records) == 1000
    assert len(dedupe(family(records))) == 250


def test_remove_proper_subsets_examples():
    assert remove_proper_subsets(family([{"a"}, {"a", "b"}])).subsets == [("a", "b")]
    anti = family([{"a", "b"}, {"b", "c"}, {"c", "a"}])
    assert remove_proper_subsets(anti).subsets == anti.subsets


def test_remove_proper_subsets_oracle():
    rng = random.Random(12)
    subsets = [tuple(rng.sample(LETTERS[:12], rng.randint(1, 6))) for _ in range(200)]
    fam = dedupe(family(subsets))
    assert remove_proper_subsets(fam).subsets == proper_subset_filter(fam.subsets)


@settings(max_examples=200, deadline=None)
@given(families)
def test_remove_proper_subsets_properties(fam):
    once = remove_proper_subsets(fam)
    assert remove_proper_subsets(once).subsets == once.subsets
    for s in fam.subsets:
        assert covers(once, s)
    sets = [set(s) for s in once.subsets]
    assert not any(a < b for a in sets for b in sets)


def test_amplify_examples():
    fam = family([{"a", "b"}, {"c", "d"}])
    assert amplify(fam, 0, 10, 1).subsets == fam.subsets
    out = amplify(fam, 0.5, 10, 1)
    assert out.subsets == fam.subsets + [("a", "b", "c", "d")]
    big = family([set("abcdefgh"), set("ijklmnop")])
    assert amplify(big, 0.5, 10, 1, max_part=8).subsets == big.subsets
    with pytest.raises(ValueError):
        amplify(fam, -0.1, 10, 1)


@settings(max_examples=100, deadline=None)
@given(families, st.integers(0, 2**31), st.integers(2, 8))
def test_amplify_properties(fam, seed, cap):
    out = amplify(fam, 0.5, cap, seed)
    assert out.subsets[: len(dedupe(fam))] == dedupe(fam).subsets
    added = out.subsets[len(dedupe(fam)) :]
    assert len(set(out.subsets)) == len(out.subsets)
    assert all(len(s) <= cap for s in added)
    assert amplify(fam, 0.5, cap, seed).subsets == out.subsets


def test_filter_by_size():
    fam = family([{"a"}, {"a", "b", "c"}])
    assert filter_by_size(fam, 3).subsets == fam.subsets
    out = filter_by_size(fam, 2)
    assert out.subsets == [("a",)]
    assert out.meta.size_limit == 2
    with pytest.raises(ValueError):
        filter_by_size(fam, 0)


def test_filter_synthetic_shape():
    from subsetminer.synth import SynthConfig, synth_units

    units = synth_units(SynthConfig(units=5000, seed=3))
    kept = len(filter_by_size(family([u.instructions for u in units]), 10))
    assert 0.85 <= kept / len(units) <= 0.95


def test_family_json_round_trip():
    fam = family([{"b", "a"}, {"c"}], source="x", size_limit=4)
    again = SubsetFamily.loads(fam.dumps())
    assert sorted(again.subsets) == sorted(fam.subsets)
    assert again.meta == fam.meta
    assert fam.dumps() == SubsetFamily.loads(fam.dumps()).dumps()
