import json
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from gapslab import engine
from gapslab.errors import (BudgetExceeded, NotPrime, ProductOverflow, SegmentMiss,
                            ValidationError)
from gapslab.tuples import (KTuple, enumerate_admissible, is_admissible, min_diameter,
                            nu_mod_p, poly_value, smooth_coprime)

import oracles

offset_sets = st.sets(st.integers(0, 60), min_size=1, max_size=6).map(sorted)


def test_ktuple_sorts_and_measures():
    H = KTuple((6, 0, 2))
    assert H.offsets == (0, 2, 6) and H.k == 3 and H.diameter == 6
    assert str(H) == "0,2,6"


@pytest.mark.parametrize("bad", [(), (0, 0, 2), (-1, 2)])
def test_ktuple_rejects(bad):
    with pytest.raises(ValidationError):
        KTuple(bad)


def test_duplicate_message_names_distinctness():
    with pytest.raises(ValidationError, match="distinct"):
        KTuple.parse("0,0,2")


def test_parse_and_json_roundtrip():
    H = KTuple.parse("0, 2,6")
    assert H == KTuple.from_json(H.to_json())
    assert json.loads(H.to_json()) == [0, 2, 6]
    with pytest.raises(ValidationError):
        KTuple.parse("0,x")


@pytest.mark.parametrize("H, p, nu", [((0, 2, 4), 3, 3), ((0, 2, 6), 3, 2), ((0, 2), 101, 2)])
def test_nu_examples(H, p, nu):
    assert nu_mod_p(H, p) == nu


def test_nu_requires_prime():
    with pytest.raises(NotPrime):
        nu_mod_p((0, 2), 9)


@pytest.mark.parametrize("H, ok", [((0, 2, 4), False), ((0, 2, 6), True), ((0,), True),
                                   ((0, 1), False), ((0, 4, 6, 10, 12, 16), True)])
def test_admissible_examples(H, ok):
    assert is_admissible(H) is ok


def test_poly_value_examples():
    assert poly_value((0, 2), 15) == 255
    assert poly_value((0,), 7) == 7
    assert poly_value((0, 2, 6), 5) == 385
    with pytest.raises(ProductOverflow):
        poly_value((0, 1, 2, 3), 2**32)
    with pytest.raises(ValidationError):
        poly_value((0,), 0)


def test_enumeration_examples():
    assert list(enumerate_admissible(6, 3)) == []
    assert list(enumerate_admissible(2, 2)) == []
    assert [H.offsets for H in enumerate_admissible(8, 3)] == [
        (1, 3, 7), (1, 5, 7), (2, 4, 8), (2, 6, 8)]


def test_enumeration_budget():
    with pytest.raises(BudgetExceeded):
        list(enumerate_admissible(40, 4, cap=1000))


def test_min_diameter_values():
    assert [min_diameter(k) for k in range(2, 9)] == [2, 6, 8, 12, 16, 20, 26]
    with pytest.raises(ValidationError):
        min_diameter(9)


def test_min_diameter_small_k_brute():
    for k in (2, 3, 4, 5):
        best = min(c[-1] for c in combinations(range(0, 13), k)
                   if c[0] == 0 and oracles.admissible_brute(c))
        assert best == min_diameter(k)


def test_smooth_coprime_examples():
    seg = engine.build_segment(0, 64)
    assert smooth_coprime((0, 2), 11, 3, seg) is True
    assert smooth_coprime((0, 2), 15, 3, seg) is False
    assert smooth_coprime((0,), 2, 2, seg) is False
    with pytest.raises(SegmentMiss):
        smooth_coprime((0, 2), 62, 3, seg)


@given(st.integers(1, 5000), st.integers(2, 40), offset_sets)
def test_smooth_coprime_matches_trial_division(n, z, H):
    seg = engine.build_segment(n, H[-1] + 1)
    want = all(all((n + h) % p for p in oracles.prime_list(z)) for h in H)
    assert smooth_coprime(H, n, z, seg) is want


@given(offset_sets, st.integers(0, 500))
def test_admissibility_translation_invariant(H, c):
    assert is_admissible(H) == is_admissible([h + c for h in H])
    assert is_admissible(H) == oracles.admissible_brute(H)


@given(offset_sets, st.sampled_from(oracles.prime_list(200)))
def test_nu_versus_differences(H, p):
    k = len(H)
    divides_diff = any((b - a) % p == 0 for a, b in combinations(H, 2))
    assert (nu_mod_p(H, p) == k) == (not divides_diff)
    assert 1 <= nu_mod_p(H, p) <= min(k, p)
    if p > H[-1] - H[0]:
        assert nu_mod_p(H, p) == k


@pytest.mark.parametrize("h", range(1, 21))
def test_enumeration_matches_filter(h):
    for k in range(1, min(h, 5) + 1):
        got = [H.offsets for H in enumerate_admissible(h, k)]
        assert got == oracles.admissible_subsets(h, k)
