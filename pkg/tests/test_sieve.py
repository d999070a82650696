"""Segmented sieve against exact arithmetic, plus cache integrity."""

import math
import os
import random

import numpy as np
import pytest

from densediv.arithmetic import carmichael, euler_phi, factorize, is_prime
from densediv.errors import CacheIntegrityError
from densediv.sieve import (
    SieveConfig,
    build_segment,
    build_spf_table,
    cache_read,
    cache_write,
    iterate_segments,
    primes_in,
    shifted_prime_factor_table,
)


def exact_row(n):
    f = factorize(n)
    spf = f.factors[0][0] if f.factors else 0
    return euler_phi(f), carmichael(f), spf


def test_segment_matches_exact_arithmetic_low():
    seg = build_segment(1, 10001)
    for n in range(1, 10001):
        phi, lam, spf = exact_row(n)
        i = n - 1
        assert (seg.phi[i], seg.lam[i], seg.spf[i]) == (phi, lam, spf), n


def test_segment_matches_exact_arithmetic_high():
    lo = 10**6
    seg = build_segment(lo, lo + 2000)
    for n in range(lo, lo + 2000):
        phi, lam, spf = exact_row(n)
        i = n - lo
        assert (seg.phi[i], seg.lam[i], seg.spf[i]) == (phi, lam, spf), n


def test_segment_bounds_validation():
    with pytest.raises(ValueError):
        build_segment(0, 10)
    with pytest.raises(ValueError):
        build_segment(5, 5)


def test_segments_concatenate_to_whole_range():
    whole = build_segment(1, 50000)
    cfg = SieveConfig(limit=50000, segment_length=8192)
    parts = []
    iterate_segments(cfg, parts.append)
    assert [p.lo for p in parts] == sorted(p.lo for p in parts)
    phi = np.concatenate([p.phi for p in parts])
    lam = np.concatenate([p.lam for p in parts])
    spf = np.concatenate([p.spf for p in parts])
    assert np.array_equal(phi, whole.phi)
    assert np.array_equal(lam, whole.lam)
    assert np.array_equal(spf, whole.spf)


def test_worker_pool_produces_identical_segments():
    cfg1 = SieveConfig(limit=200000, segment_length=1 << 14, worker_count=1)
    cfg2 = SieveConfig(limit=200000, segment_length=1 << 14, worker_count=3)
    rows1, rows2 = {}, {}
    iterate_segments(cfg1, lambda s: rows1.__setitem__(s.lo, s))
    summary = iterate_segments(cfg2, lambda s: rows2.__setitem__(s.lo, s), in_order=False)
    assert summary.segment_count == len(rows1) == len(rows2)
    for lo, seg in rows1.items():
        other = rows2[lo]
        assert np.array_equal(seg.phi, other.phi)
        assert np.array_equal(seg.lam, other.lam)
        assert np.array_equal(seg.spf, other.spf)


def test_in_order_delivery_with_workers():
    cfg = SieveConfig(limit=100000, segment_length=1 << 13, worker_count=3)
    los = []
    iterate_segments(cfg, lambda s: los.append(s.lo), in_order=True)
    assert los == sorted(los)


def test_primes_in_matches_is_prime():
    got = list(primes_in(1, 20000))
    want = [n for n in range(1, 20000) if is_prime(n)]
    assert got == want
    window = list(primes_in(10**6, 10**6 + 100))
    assert window == [n for n in range(10**6, 10**6 + 100) if is_prime(n)]
    assert list(primes_in(1, 10)) == [2, 3, 5, 7]
    assert list(primes_in(90, 97)) == []


def test_prime_count_two_routes_and_chebyshev_band():
    pi5 = sum(1 for _ in primes_in(1, 10**5))
    assert pi5 == sum(1 for n in range(10**5) if is_prime(n)) == 9592
    pi6 = sum(1 for _ in primes_in(1, 10**6))
    x = 10**6
    assert x / math.log(x) < pi6 < 1.3 * x / math.log(x)


def test_spf_table_matches_factorize():
    spf = build_spf_table(10001)
    assert spf[0] == 0 and spf[1] == 0
    for n in range(2, 10001):
        assert spf[n] == factorize(n).factors[0][0], n


def test_shifted_prime_records_match_factorize():
    for rec in shifted_prime_factor_table(3000):
        assert is_prime(rec.p)
        if rec.p == 2:
            assert rec.pplus == 0 and rec.factors == ()
            continue
        f = factorize(rec.p - 1)
        assert rec.factors == tuple(p for p, _ in f.factors)
        assert rec.pplus == f.factors[-1][0]


def test_config_validation():
    with pytest.raises(ValueError):
        SieveConfig(limit=1)
    with pytest.raises(ValueError):
        SieveConfig(limit=100, segment_length=4)
    with pytest.raises(ValueError):
        SieveConfig(limit=100, worker_count=0)


# --- cache ------------------------------------------------------------------


def test_cache_roundtrip(tmp_path):
    seg = build_segment(977, 2100)
    path = cache_write(seg, str(tmp_path))
    assert os.path.exists(path)
    back = cache_read(977, 2100, str(tmp_path))
    assert back.lo == seg.lo and back.hi == seg.hi
    assert np.array_equal(back.spf, seg.spf)
    assert np.array_equal(back.phi, seg.phi)
    assert np.array_equal(back.lam, seg.lam)


def test_cache_missing(tmp_path):
    assert cache_read(1, 100, str(tmp_path), missing_ok=True) is None
    with pytest.raises(FileNotFoundError):
        cache_read(1, 100, str(tmp_path))


def test_cache_detects_any_byte_flip(tmp_path):
    seg = build_segment(1, 600)
    path = cache_write(seg, str(tmp_path))
    blob = open(path, "rb").read()
    rng = random.Random(5)
    for _ in range(25):
        pos = rng.randrange(len(blob))
        corrupted = bytearray(blob)
        corrupted[pos] ^= 1 << rng.randrange(8)
        with open(path, "wb") as fh:
            fh.write(corrupted)
        with pytest.raises(CacheIntegrityError):
            cache_read(1, 600, str(tmp_path))
    with open(path, "wb") as fh:
        fh.write(blob)
    assert cache_read(1, 600, str(tmp_path)) is not None


def test_cache_detects_truncation_and_extension(tmp_path):
    seg = build_segment(1, 600)
    path = cache_write(seg, str(tmp_path))
    blob = open(path, "rb").read()
    for bad in (blob[:-1], blob + b"\0"):
        with open(path, "wb") as fh:
            fh.write(bad)
        with pytest.raises(CacheIntegrityError):
            cache_read(1, 600, str(tmp_path))


def test_cache_bounds_must_match_request(tmp_path):
    seg = build_segment(1, 600)
    path = cache_write(seg, str(tmp_path))
    os.rename(path, os.path.join(str(tmp_path), "seg-2-601.tdsv"))
    with pytest.raises(CacheIntegrityError):
        cache_read(2, 601, str(tmp_path))


def test_iterate_segments_uses_cache(tmp_path):
    cfg = SieveConfig(limit=40000, segment_length=8192, cache_dir=str(tmp_path))
    first = iterate_segments(cfg, None)
    assert first.built == first.segment_count and first.from_cache == 0
    rows = []
    second = iterate_segments(cfg, rows.append)
    assert second.from_cache == second.segment_count and second.built == 0
    whole = build_segment(1, 40000)
    phi = np.concatenate([p.phi for p in rows])
    assert np.array_equal(phi, whole.phi)


def test_iterate_segments_surfaces_corruption(tmp_path):
    cfg = SieveConfig(limit=40000, segment_length=8192, cache_dir=str(tmp_path))
    iterate_segments(cfg, None)
    victim = sorted(os.listdir(tmp_path))[2]
    full = os.path.join(str(tmp_path), victim)
    blob = bytearray(open(full, "rb").read())
    blob[100] ^= 0xFF
    with open(full, "wb") as fh:
        fh.write(blob)
    with pytest.raises(CacheIntegrityError) as exc:
        iterate_segments(cfg, None)
    assert "seg" in str(exc.value.path)


def test_spf_roundtrip_prime_above_32_bits(tmp_path):
    # a prime segment entry whose spf does not fit in the u32 cache field
    lo = 2**33 + 5
    seg = build_segment(lo, lo + 64)
    assert seg.spf.max() > 2**32
    cache_write(seg, str(tmp_path))
    back = cache_read(lo, lo + 64, str(tmp_path))
    assert np.array_equal(back.spf, seg.spf)
    assert np.array_equal(back.phi, seg.phi)
