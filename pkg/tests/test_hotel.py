import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from probe.bisimulation import equivalent
from probe.hotel import (
    LIMIT, bernoulli_reference, complement_product, format_hotel_table, generate_hotel_spec,
    hotel_light_probability, hotel_table, limit_estimate, semantic_probability,
)
from probe.lang.parser import parse_spec
from probe.lang.printer import pretty_print
from probe.semantics import explore


def brute_force(n):
    """Enumerate every draw vector and count those with a guest in their own group."""
    hits = sum(any(j == i for i, j in enumerate(draw)) for draw in itertools.product(range(n), repeat=n))
    return Fraction(hits, n ** n)


def test_limit_constant():
    assert LIMIT == pytest.approx(0.632120558829, abs=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
def test_formula_matches_enumeration(n):
    assert hotel_light_probability(n) == brute_force(n)


def test_known_values():
    assert hotel_light_probability(1) == 1
    assert hotel_light_probability(2) == Fraction(3, 4)
    assert abs(hotel_light_probability(10 ** 6) - 0.632120558829) <= 1e-6


def test_float_path_accurate():
    for n in (65, 1000, 10 ** 5):
        exact = float(hotel_light_probability(n, exact=True)) if n <= 1000 else None
        approx = hotel_light_probability(n)
        assert isinstance(approx, float)
        if exact is not None:
            assert approx == pytest.approx(exact, abs=1e-15)


def test_rejects_bad_n():
    for bad in (0, -1, 2.5, True):
        with pytest.raises(ValueError):
            hotel_light_probability(bad)


def test_monotone_and_bounded():
    exact = [hotel_light_probability(n) for n in range(1, 40)]
    assert all(a > b for a, b in zip(exact, exact[1:]))
    floats = [hotel_light_probability(n, exact=False) for n in range(1, 10 ** 4 + 1)]
    assert all(a > b for a, b in zip(floats, floats[1:]))
    assert min(floats) > LIMIT


def test_complement_product():
    assert complement_product([Fraction(1, 2), Fraction(1, 2)]) == Fraction(3, 4)
    assert complement_product([]) == 0
    for n in range(1, 12):
        assert complement_product([Fraction(1, n)] * n) == hotel_light_probability(n)
    assert complement_product([0.5, 0.5]) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        complement_product([Fraction(3, 2)])


@given(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=10), max_size=6))
def test_complement_product_brute_force(ps):
    miss = Fraction(1)
    for p in ps:
        miss *= 1 - p
    assert complement_product(ps) == 1 - miss


def test_generated_spec_round_trips():
    for n in (1, 2, 5):
        spec = generate_hotel_spec(n)
        assert parse_spec(pretty_print(spec)) == spec


def test_one_group_always_lights():
    plts = explore(generate_hotel_spec(1))
    [(nd, p)] = plts.prob_states[plts.initial].items()
    assert p == 1 and [l for l, _ in plts.nd_states[nd].transitions] == ["a"]


@pytest.mark.parametrize("n", range(1, 6))
def test_semantic_probability(n):
    assert semantic_probability(n) == hotel_light_probability(n)


def test_n4_semantic_value():
    assert semantic_probability(4) == Fraction(175, 256)


def test_bernoulli_one():
    plts = explore(bernoulli_reference(1))
    [(nd, p)] = plts.prob_states[plts.initial].items()
    assert p == 1 and plts.nd_states[nd].transitions


@pytest.mark.parametrize("n", range(1, 6))
def test_bisimilar_to_bernoulli(n):
    v = equivalent(explore(generate_hotel_spec(n)), explore(bernoulli_reference(hotel_light_probability(n))))
    assert v.equivalent


def test_not_bisimilar_to_wrong_bias():
    assert not equivalent(explore(generate_hotel_spec(3)), explore(bernoulli_reference(Fraction(3, 4))))


def test_limit_estimate():
    est = limit_estimate([10, 100, 1000])
    assert abs(est.limit - LIMIT) <= 1e-4
    # oracle: the sequence itself far out
    assert abs(est.limit - hotel_light_probability(10 ** 8)) <= 1e-4
    small = limit_estimate([1, 2, 3])
    assert small.estimates[:2] == [1.0, 0.75]
    assert small.estimates[2] == pytest.approx(19 / 27)


@pytest.mark.parametrize("ns, msg", [([5, 5, 5], "strictly ascending"), ([1, 2], "three points"),
                                     ([3, 2, 1], "strictly ascending")])
def test_limit_estimate_errors(ns, msg):
    with pytest.raises(ValueError, match=msg):
        limit_estimate(ns)


def test_table():
    rows = hotel_table([1, 2, 4, 10 ** 6])
    assert rows[1][1] == Fraction(3, 4)
    assert rows[-1][1] is None and rows[-1][3] <= 1e-6
    text = format_hotel_table(rows)
    assert text.splitlines()[0].split() == ["n", "p_exact", "p_float", "|p-(1-1/e)|"]
    assert "175/256" in text and "(float)" in text
    csv = format_hotel_table(rows, csv=True).splitlines()
    assert csv[0] == "n,p_exact,p_float,abs_err" and csv[2].startswith("2,3/4,0.75,")
    assert math.isclose(float(csv[-1].split(",")[2]), 0.6321207428, abs_tol=1e-9)
