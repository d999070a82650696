"""Experiment kernels against the pure enumeration route at small x."""

from fractions import Fraction

import pytest

from densediv.arithmetic import factorize, is_prime, largest_prime_factor
from densediv.errors import CapacityError
from densediv.experiments import (
    count_B,
    floor_pow,
    iroot,
    landau_scan,
    nondense_scan,
    omega_phi_profile,
    phi_prime_gap_scan,
    phi_ratio_small,
    recount_pure,
    reverify_witnesses,
    scan_density,
    scan_full_range_density,
    shifted_prime_scan,
    theta_profile,
)

X_SMALL = 2000


def assert_matches_pure(res):
    assert (res.total, res.hits) == recount_pure(res.experiment_id, res.x, res.parameters)
    assert reverify_witnesses(res) == []


def test_iroot_exact():
    for t in list(range(0, 200)) + [10**12, 10**12 + 1, 2**62, 3**40]:
        for b in (1, 2, 3, 5, 7):
            r = iroot(t, b)
            assert r**b <= t < (r + 1) ** b, (t, b)


def test_floor_pow_exact():
    assert floor_pow(10**6, Fraction(1, 2)) == 1000
    assert floor_pow(10**6 - 1, Fraction(1, 2)) == 999
    assert floor_pow(10**6, Fraction(1, 3)) == 100
    assert floor_pow(2, Fraction(1, 2)) == 1
    assert floor_pow(10**8, Fraction(1, 3)) == 464
    assert floor_pow(27, Fraction(2, 3)) == 9
    with pytest.raises(ValueError):
        floor_pow(10, Fraction(-1, 2))


def test_scan_density_global_matches_pure():
    for target in ("phi", "lambda", "both"):
        res = scan_density(X_SMALL, 2, None, target)
        assert_matches_pure(res)


def test_scan_density_small_example():
    res = scan_density(10, 2, None, "phi")
    assert (res.total, res.hits) == (10, 10)
    res = scan_density(10, 2, None, "lambda")
    assert (res.total, res.hits) == (10, 10)


def test_scan_density_interval_matches_pure():
    res = scan_density(X_SMALL, Fraction(3, 2), (2, Fraction(1, 2)), "phi")
    assert res.parameters["T"] == 44
    assert_matches_pure(res)
    res = scan_density(X_SMALL, 2, (1, Fraction(1, 3)), "both")
    assert_matches_pure(res)


def test_scan_density_validation():
    with pytest.raises(ValueError):
        scan_density(100, Fraction(1, 2))
    with pytest.raises(ValueError):
        scan_density(0, 2)
    with pytest.raises(ValueError):
        scan_density(100, 2, (0, Fraction(1, 2)))
    with pytest.raises(ValueError):
        scan_density(100, 2, (1, Fraction(3, 2)))
    with pytest.raises(ValueError):
        scan_density(100, 2, None, "mu")


def test_capacity_guards():
    with pytest.raises(CapacityError):
        scan_density(2**32, 2)
    with pytest.raises(CapacityError):
        scan_density(1000, Fraction(2**62, 3))


def test_full_range_matches_pure():
    for h in (1, 2, 3):
        res = scan_full_range_density(X_SMALL, h)
        assert_matches_pure(res)


def test_full_range_h1_equals_global_two_dense():
    # for y in [m/2, m) the value itself witnesses the window, so the
    # restriction to [1, m/2) is no restriction at all
    full = scan_full_range_density(3000, 1)
    other = scan_density(3000, 2, None, "both")
    assert full.hits == other.hits


def test_count_b_matches_pure():
    res = count_B(X_SMALL, 10, 20)
    assert_matches_pure(res)
    res = count_B(X_SMALL, 0, 1)
    assert res.hits == X_SMALL  # 1 divides every phi value


def test_count_b_example():
    assert count_B(10, 2, 4).hits == 5
    with pytest.raises(ValueError):
        count_B(10, 4, 4)
    with pytest.raises(ValueError):
        count_B(10, -1, 4)


def test_nondense_matches_pure():
    res = nondense_scan(X_SMALL, Fraction(1, 4))
    assert res.parameters["u"] == floor_pow(X_SMALL, Fraction(1, 4))
    assert_matches_pure(res)


def test_phi_prime_gap_matches_pure():
    res = phi_prime_gap_scan(10**4, Fraction(1, 20), Fraction(1, 4))
    assert_matches_pure(res)
    assert res.parameters["window_lo"] == floor_pow(10**4, Fraction(1, 20))


def test_phi_prime_gap_window_warning():
    with pytest.warns(UserWarning):
        phi_prime_gap_scan(1000, Fraction(1, 2), Fraction(1, 4))
    with pytest.warns(UserWarning):
        phi_prime_gap_scan(1000, Fraction(1, 20), Fraction(9, 10))


def test_shifted_prime_matches_pure():
    res = shifted_prime_scan(X_SMALL, 2, 4)
    assert_matches_pure(res)


def test_shifted_prime_example():
    res = shifted_prime_scan(20, 2, 4)
    assert (res.total, res.hits) == (8, 5)
    # (0, 1] excludes nothing: every p-1 has no factor there
    res = shifted_prime_scan(50, 0, 1)
    assert res.hits == res.total


def test_landau_matches_pure():
    for d in (1, 2, 3, 4):
        res = landau_scan(X_SMALL, d)
        assert_matches_pure(res)


def test_landau_example():
    assert landau_scan(16, 2).hits == 5  # 1, 2, 4, 8, 16
    assert landau_scan(100, 1).hits == 1  # only n = 1 has no prime factor


def test_phi_ratio_matches_pure():
    res = phi_ratio_small(X_SMALL, Fraction(1, 2))
    assert_matches_pure(res)
    assert phi_ratio_small(10, Fraction(1, 2)).hits == 5
    with pytest.raises(ValueError):
        phi_ratio_small(10, Fraction(3, 2))


def test_theta_profile_matches_brute():
    grid = [Fraction(1, 2), Fraction(3, 5), Fraction(7, 10)]
    prof = theta_profile(500, grid)
    want_primes = sum(1 for p in range(2, 501) if is_prime(p))
    assert prof.prime_count == want_primes
    for c, q in prof.grid:
        brute = 0
        for p in range(3, 501):
            if is_prime(p):
                t = largest_prime_factor(p - 1)
                if t ** c.denominator > p ** c.numerator:
                    brute += 1
        assert q == brute, c


def test_theta_profile_monotone_and_sorted():
    prof = theta_profile(2000, [Fraction(7, 10), Fraction(1, 2), Fraction(3, 5)])
    cs = [c for c, _ in prof.grid]
    assert cs == sorted(cs)
    qs = [q for _, q in prof.grid]
    assert qs == sorted(qs, reverse=True)


def test_omega_profile_matches_brute():
    from densediv.arithmetic import euler_phi

    prof = omega_phi_profile(500)
    oms = sorted(
        factorize(euler_phi(factorize(n))).big_omega if n > 1 else 0
        for n in range(1, 501)
    )
    assert prof.count == 500
    assert prof.omega_mean == pytest.approx(sum(oms) / 500, abs=1e-12)
    assert prof.omega_median == oms[(500 + 1) // 2 - 1]
    for k, d in zip(range(1, 10), prof.omega_deciles):
        rank = max(1, (k * 500 + 9) // 10)
        assert d == oms[rank - 1], k


def test_witnesses_are_ascending_and_consistent():
    res = scan_density(5000, 2, None, "phi")
    ns = [w.n for w in res.witnesses]
    assert ns == sorted(ns)
    assert len(ns) <= 64
    hits = [w for w in res.witnesses if w.hit]
    misses = [w for w in res.witnesses if not w.hit]
    assert hits and misses


def test_determinism_across_workers_and_segmenting():
    a = scan_density(60000, 2, None, "both", segment_length=1 << 14, workers=1)
    b = scan_density(60000, 2, None, "both", segment_length=1 << 14, workers=3)
    c = scan_density(60000, 2, None, "both", segment_length=1 << 12, workers=2)
    assert a.key() == b.key() == c.key()


def test_cache_reuse_gives_identical_results(tmp_path):
    a = count_B(30000, 5, 10, segment_length=1 << 13, cache_dir=str(tmp_path))
    b = count_B(30000, 5, 10, segment_length=1 << 13, cache_dir=str(tmp_path))
    assert a.key() == b.key()


def test_fraction_formatting():
    res = scan_density(10, 2, None, "phi")
    assert res.fraction == 1
    assert res.fraction_decimal == "1.000000000000"
    res2 = landau_scan(16, 2)
    assert res2.fraction == Fraction(5, 16)
    assert res2.fraction_decimal == "0.312500000000"
