import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from hamperm.errors import InputError
from hamperm.probability import (
    binomial_cdf,
    binomial_pmf,
    hoeffding_tail,
    hypergeometric_pmf,
    intersection_counts,
    mc_3cycle,
    mc_intersection,
    mc_two_admissible,
    occupancy_all_occupied,
    occupancy_pi,
    p_admissible_3cycle,
    p_at_least_two,
    p_proper_intersection,
    poisson_occupancy_tv_bound,
    power_sum,
    two_move_counts,
    two_move_total,
)


def test_closed_form_values():
    assert p_admissible_3cycle(5) == Fraction(1, 3)
    assert p_proper_intersection(5) == Fraction(2, 9)
    assert abs(float(p_admissible_3cycle(10**6)) - 0.5) < 1e-5
    assert abs(float(p_proper_intersection(10**6)) - 1 / 3) < 1e-5


@pytest.mark.parametrize("fn", [p_admissible_3cycle, p_proper_intersection])
def test_small_n_rejected(fn):
    with pytest.raises(InputError):
        fn(3)


def test_ratio_is_two_thirds():
    for n in range(4, 300):
        a, b = p_admissible_3cycle(n), p_proper_intersection(n)
        assert 0 < b < a < 1
        assert b / a == Fraction(2, 3)


def test_three_cycle_matches_its_sample_space():
    for n in range(4, 20):
        space = list(oracles.three_cycle_space(n))
        assert Fraction(sum(ok for *_, ok in space), len(space)) == p_admissible_3cycle(n)


def test_intersection_counts_match_enumeration():
    for n in range(4, 13):
        ok, bad = intersection_counts(n)
        assert (ok, bad) == oracles.intersection_space(n)
        assert Fraction(ok, ok + bad) == p_proper_intersection(n)


def test_two_move_total_small():
    assert two_move_total(5) == 81


def test_two_move_counts_match_sextuple_loop():
    for n in range(8, 17):
        c = two_move_counts(n)
        assert (c.total, c.count_cases_1_2, c.count_case_4) == oracles.two_move_failures(n)


def test_two_move_counts_are_bounded():
    for n in range(8, 201):
        c = two_move_counts(n)
        assert 0 <= c.count_cases_1_2 and 0 <= c.count_case_4
        assert c.count_cases_1_2 + c.count_case_4 <= c.total


def test_two_move_limit():
    assert abs(float(p_at_least_two(10**6)) - 143 / 180) < 1e-3
    assert p_at_least_two(20) >= Fraction(7, 10)
    with pytest.raises(InputError):
        two_move_counts(7)


def test_hoeffding():
    assert hoeffding_tail(100, 0.5, 0.2) == pytest.approx(math.exp(-1))
    assert hoeffding_tail(100, 0.5, 1e-9) == pytest.approx(1.0)
    assert binomial_cdf(100, Fraction(1, 2), 40) <= hoeffding_tail(100, 0.5, 0.2)
    assert binomial_cdf(100, Fraction(1, 2), 40) == oracles.binomial_cdf_exact(100, Fraction(1, 2), 40)
    with pytest.raises(InputError):
        hoeffding_tail(100, 0.5, 1.5)
    with pytest.raises(InputError):
        hoeffding_tail(100, 0.5, 0.2, side="middle")


@pytest.mark.parametrize("a, p", [(50, Fraction(1, 3)), (200, Fraction(1, 2)), (400, Fraction(1, 10))])
def test_exact_tails_respect_hoeffding(a, p):
    for alpha in (0.1, 0.3, 0.6):
        k = math.floor((1 - alpha) * a * p)
        assert binomial_cdf(a, p, k) <= hoeffding_tail(a, float(p), alpha)
        upper = 1 - binomial_cdf(a, p, math.ceil((1 + alpha) * a * p) - 1)
        assert upper <= hoeffding_tail(a, float(p), alpha, side="upper")


def test_hypergeometric_close_to_binomial():
    big = 10**4
    for x in (1, 2):
        h = hypergeometric_pmf(big, big // 10, 20, x)
        b = binomial_pmf(20, Fraction(1, 10), x)
        assert abs(h - b) / b < Fraction(5, 100)


def test_occupancy_examples():
    assert occupancy_all_occupied(7, 1) == 1
    assert occupancy_all_occupied(2, 2) == Fraction(1, 2)
    assert occupancy_all_occupied(3, 3) == Fraction(2, 9)


def test_occupancy_matches_surjections():
    for n in range(1, 7):
        for r in range(0, 13):
            count = oracles.surjections_by_enumeration(r, n) if n**r <= 10**6 else oracles.surjections_by_stirling(r, n)
            assert occupancy_all_occupied(r, n) == Fraction(count, n**r)


def test_stirling_oracle_agrees_with_enumeration():
    for n in range(1, 5):
        for r in range(0, 8):
            assert oracles.surjections_by_enumeration(r, n) == oracles.surjections_by_stirling(r, n)


def test_occupancy_monotone():
    for n in (1, 2, 5, 17, 50):
        values = [occupancy_all_occupied(r, n) for r in range(0, 3 * n)]
        assert all(0 <= v <= 1 for v in values)
        assert values == sorted(values)


def test_tv_bound_sanity():
    b = poisson_occupancy_tv_bound(200, 10, 0)
    assert 0 < b < 1
    assert occupancy_pi(200, 10, 0) * 10 == 10 * Fraction(9, 10) ** 200
    with pytest.raises(InputError, match="inapplicable"):
        poisson_occupancy_tv_bound(10, 100, 3)


def test_tv_bound_holds_against_simulation():
    n, r, m, trials = 4, 40, 0, 10**6
    rng = np.random.default_rng(11)
    counts = rng.multinomial(r, [1 / n] * n, size=trials)
    w = np.count_nonzero(counts <= m, axis=1)
    emp = np.bincount(w, minlength=n + 1) / trials
    lam = float(n * occupancy_pi(r, n, m))
    pois = np.array([math.exp(-lam) * lam**k / math.factorial(k) for k in range(n + 1)])
    tv = 0.5 * (np.abs(emp - pois).sum() + (1 - pois.sum()))
    assert tv <= poisson_occupancy_tv_bound(r, n, m)


def test_power_sums():
    assert power_sum(2, 3) == 14
    assert power_sum(5, 4) == 1300
    assert power_sum(1, 1) == 1
    for k in range(1, 6):
        for n in (1, 2, 9, 100):
            assert power_sum(k, n) == oracles.power_sum_loop(k, n)
    with pytest.raises(InputError):
        power_sum(6, 3)


# simulations -------------------------------------------------------------------


def test_mc_3cycle_small():
    assert abs(mc_3cycle(5, 10**6, seed=1) - 1 / 3) < 0.01


@pytest.mark.parametrize("n", [20, 50, 100])
def test_mc_estimates(n):
    assert abs(mc_3cycle(n, 10**6, seed=n) - float(p_admissible_3cycle(n))) < 0.01
    assert abs(mc_intersection(n, 10**6, seed=n) - float(p_proper_intersection(n))) < 0.01


def test_mc_two_admissible():
    assert abs(mc_two_admissible(100, 10**6, seed=3) - float(p_at_least_two(100))) < 0.02
    assert mc_two_admissible(20, 10**6, seed=4) >= 0.7 - 0.03


def test_mc_determinism():
    assert mc_3cycle(30, 5000, seed=9) == mc_3cycle(30, 5000, seed=9)
    assert mc_intersection(30, 5000, seed=9, workers=3) == mc_intersection(30, 5000, seed=9, workers=3)
    assert mc_two_admissible(30, 5000, seed=9, workers=2) == mc_two_admissible(30, 5000, seed=9, workers=2)
