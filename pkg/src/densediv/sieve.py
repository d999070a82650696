"""Segmented sieves for phi, lambda and smallest prime factors, plus caching.

The segment builder computes, for every n in [lo, hi), the smallest prime
factor, Euler phi and Carmichael lambda in one pass over the base primes.
Segments are independent, so they can be built by worker threads (the
kernels release the GIL) and optionally persisted to a binary cache.
"""

from __future__ import annotations

import math
import os
import struct
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from hashlib import blake2b
from typing import Callable, Iterator, Optional

import numpy as np

from . import _kernels
from .errors import CacheIntegrityError, CapacityError

#: hard cap on sieve limits; keeps every int64 product in the kernels safe.
LIMIT_MAX = 1 << 48
#: spf tables use uint32 entries, so tables stop here.
SPF_TABLE_MAX = 1 << 32

DEFAULT_SEGMENT_LENGTH = 1 << 22

CACHE_MAGIC = b"TDSV"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")
_CHECKSUM_BYTES = 8


@dataclass(frozen=True)
class SieveConfig:
    """Parameters of a segmented sieve run over [1, limit)."""

    limit: int
    segment_length: int = DEFAULT_SEGMENT_LENGTH
    worker_count: int = 1
    cache_dir: Optional[str] = None

    def __post_init__(self):
        if self.limit < 2:
            raise ValueError(f"limit must be >= 2, got {self.limit}")
        if self.limit > LIMIT_MAX:
            raise CapacityError(f"limit {self.limit} exceeds engine cap {LIMIT_MAX}")
        if self.segment_length < 16:
            raise ValueError(f"segment_length must be >= 16, got {self.segment_length}")
        if self.worker_count < 1:
            raise ValueError(f"worker_count must be >= 1, got {self.worker_count}")

    def segment_bounds(self) -> list[tuple[int, int]]:
        out = []
        lo = 1
        while lo < self.limit:
            hi = min(lo + self.segment_length, self.limit)
            out.append((lo, hi))
            lo = hi
        return out


@dataclass
class SieveSegment:
    """Arrays for n in [lo, hi): spf[i], phi[i], lam[i] describe n = lo + i.

    spf is 0 for n = 1 and the smallest prime factor otherwise (n itself
    when n is prime).
    """

    lo: int
    hi: int
    spf: np.ndarray
    phi: np.ndarray
    lam: np.ndarray

    def __len__(self):
        return self.hi - self.lo


@dataclass
class SieveSummary:
    limit: int
    segment_length: int
    segment_count: int
    built: int
    from_cache: int
    elapsed_ms: float


def base_primes_for(limit: int) -> np.ndarray:
    """Primes up to sqrt(limit - 1), as an int64 array."""
    top = math.isqrt(max(limit - 1, 1))
    if top < 2:
        return np.empty(0, dtype=np.int64)
    sieve = np.ones(top + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(top) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def build_segment(lo: int, hi: int, base_primes: Optional[np.ndarray] = None) -> SieveSegment:
    """Sieve one segment [lo, hi) with 1 <= lo < hi <= LIMIT_MAX."""
    if not 1 <= lo < hi:
        raise ValueError(f"need 1 <= lo < hi, got [{lo}, {hi})")
    if hi > LIMIT_MAX:
        raise CapacityError(f"hi {hi} exceeds engine cap {LIMIT_MAX}")
    if base_primes is None:
        base_primes = base_primes_for(hi)
    n = hi - lo
    spf = np.empty(n, dtype=np.int64)
    rem = np.empty(n, dtype=np.int64)
    phi = np.empty(n, dtype=np.int64)
    lam = np.empty(n, dtype=np.int64)
    _kernels.sieve_segment_kernel(lo, base_primes, spf, rem, phi, lam)
    return SieveSegment(lo, hi, spf, phi, lam)


def iterate_segments(
    config: SieveConfig,
    consumer: Optional[Callable[[SieveSegment], None]] = None,
    in_order: bool = True,
    progress: Optional[Callable[[int, int], None]] = None,
) -> SieveSummary:
    """Build (or load) every segment of ``config`` and hand each to ``consumer``.

    With worker_count > 1 segments are built concurrently; in_order=True
    delivers them to the consumer in ascending order anyway.  Cache files,
    when config.cache_dir is set, are read before building and written after;
    a corrupt file raises CacheIntegrityError and nothing is silently
    rebuilt.
    """
    t0 = time.perf_counter()
    bounds = config.segment_bounds()
    base = base_primes_for(config.limit)
    built = 0
    from_cache = 0
    count_lock = threading.Lock()

    def produce(lo_hi):
        nonlocal built, from_cache
        lo, hi = lo_hi
        if config.cache_dir is not None:
            seg = cache_read(lo, hi, config.cache_dir, missing_ok=True)
            if seg is not None:
                with count_lock:
                    from_cache += 1
                return seg
        seg = build_segment(lo, hi, base)
        with count_lock:
            built += 1
        if config.cache_dir is not None:
            cache_write(seg, config.cache_dir)
        return seg

    done = 0
    if config.worker_count == 1:
        for lo_hi in bounds:
            seg = produce(lo_hi)
            if consumer is not None:
                consumer(seg)
            done += 1
            if progress is not None:
                progress(done, len(bounds))
    else:
        window = config.worker_count + 2
        with ThreadPoolExecutor(max_workers=config.worker_count) as pool:
            if in_order:
                pending = [pool.submit(produce, b) for b in bounds[:window]]
                next_submit = window
                for i in range(len(bounds)):
                    seg = pending[i].result()
                    if next_submit < len(bounds):
                        pending.append(pool.submit(produce, bounds[next_submit]))
                        next_submit += 1
                    if consumer is not None:
                        consumer(seg)
                    done += 1
                    if progress is not None:
                        progress(done, len(bounds))
            else:
                def job(b):
                    seg = produce(b)
                    if consumer is not None:
                        consumer(seg)
                    return None
                for _ in pool.map(job, bounds):
                    done += 1
                    if progress is not None:
                        progress(done, len(bounds))

    elapsed = (time.perf_counter() - t0) * 1000.0
    return SieveSummary(
        limit=config.limit,
        segment_length=config.segment_length,
        segment_count=len(bounds),
        built=built,
        from_cache=from_cache,
        elapsed_ms=elapsed,
    )


def primes_in(lo: int, hi: int, chunk: int = DEFAULT_SEGMENT_LENGTH) -> Iterator[int]:
    """Ascending primes in [lo, hi)."""
    if hi > LIMIT_MAX:
        raise CapacityError(f"hi {hi} exceeds engine cap {LIMIT_MAX}")
    lo = max(lo, 2)
    if lo >= hi:
        return
    base = base_primes_for(hi)
    cur = lo
    while cur < hi:
        top = min(cur + chunk, hi)
        flags = np.empty(top - cur, dtype=np.uint8)
        _kernels.mark_primes_kernel(cur, base, flags)
        for idx in np.nonzero(flags)[0]:
            yield int(cur + idx)
        cur = top


def build_spf_table(limit: int) -> np.ndarray:
    """uint32 smallest-prime-factor table over [0, limit)."""
    if limit > SPF_TABLE_MAX:
        raise CapacityError(f"spf table limited to {SPF_TABLE_MAX} entries, got {limit}")
    if limit < 2:
        limit = 2
    spf = np.empty(limit, dtype=np.uint32)
    _kernels.spf_table_kernel(spf)
    return spf


@dataclass(frozen=True)
class ShiftedPrimeRecord:
    """A prime p with the distinct factors of p - 1 and its P+(p-1)."""

    p: int
    pplus: int
    factors: tuple[int, ...]


def shifted_prime_factor_table(
    limit: int, chunk: int = DEFAULT_SEGMENT_LENGTH, spf: Optional[np.ndarray] = None
) -> Iterator[ShiftedPrimeRecord]:
    """Stream (p, P+(p-1), factors of p-1) for every prime p < limit."""
    if limit > SPF_TABLE_MAX:
        raise CapacityError(f"shifted prime table needs spf table, limit {limit} too big")
    if spf is None:
        spf = build_spf_table(limit)
    for p_arr, pplus, flat, offs in _shifted_prime_chunks(limit, chunk, spf):
        for j in range(len(p_arr)):
            yield ShiftedPrimeRecord(
                int(p_arr[j]),
                int(pplus[j]),
                tuple(int(q) for q in flat[offs[j] : offs[j + 1]]),
            )


def _shifted_prime_chunks(limit: int, chunk: int, spf: np.ndarray):
    """Per-chunk arrays (primes, pplus, flat factors, offsets) below limit."""
    base = base_primes_for(limit)
    cur = 2
    while cur < limit:
        top = min(cur + chunk, limit)
        flags = np.empty(top - cur, dtype=np.uint8)
        _kernels.mark_primes_kernel(cur, base, flags)
        p_arr = (np.nonzero(flags)[0] + cur).astype(np.int64)
        pplus = np.empty(len(p_arr), dtype=np.int64)
        flat = np.empty(16 * len(p_arr) + 1, dtype=np.int64)
        offs = np.empty(len(p_arr) + 1, dtype=np.int64)
        _kernels.pplus_of_shifted(p_arr, spf, pplus, flat, offs)
        yield p_arr, pplus, flat, offs
        cur = top


# --- cache ------------------------------------------------------------------


def _cache_path(lo: int, hi: int, cache_dir: str) -> str:
    return os.path.join(cache_dir, f"seg-{lo}-{hi}.tdsv")


def _encode_spf(seg: SieveSegment) -> np.ndarray:
    # spf < 2**32 whenever n is composite (a composite below 2**64 has a
    # factor below 2**32), so a too-big spf can only be a prime n; store 0
    # and recover spf = n on read.
    spf32 = np.where(seg.spf < SPF_TABLE_MAX, seg.spf, 0).astype(np.uint32)
    return spf32


def cache_write(seg: SieveSegment, cache_dir: str) -> str:
    """Persist a segment; atomic via temp file + rename. Returns the path."""
    os.makedirs(cache_dir, exist_ok=True)
    path = _cache_path(seg.lo, seg.hi, cache_dir)
    header = _HEADER.pack(CACHE_MAGIC, CACHE_VERSION, seg.lo, seg.hi)
    body = (
        _encode_spf(seg).tobytes()
        + seg.phi.astype("<u8").tobytes()
        + seg.lam.astype("<u8").tobytes()
    )
    digest = blake2b(header + body, digest_size=_CHECKSUM_BYTES).digest()
    tmp = path + f".tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(body)
        fh.write(digest)
    os.replace(tmp, path)
    return path


def cache_read(
    lo: int, hi: int, cache_dir: str, missing_ok: bool = False
) -> Optional[SieveSegment]:
    """Load a segment from cache; raises CacheIntegrityError on corruption."""
    path = _cache_path(lo, hi, cache_dir)
    if not os.path.exists(path):
        if missing_ok:
            return None
        raise FileNotFoundError(path)
    with open(path, "rb") as fh:
        blob = fh.read()
    n = hi - lo
    expected = _HEADER.size + n * (4 + 8 + 8) + _CHECKSUM_BYTES
    if len(blob) != expected:
        raise CacheIntegrityError(
            f"segment [{lo}, {hi}): file is {len(blob)} bytes, expected {expected}",
            path=path,
        )
    payload, digest = blob[:-_CHECKSUM_BYTES], blob[-_CHECKSUM_BYTES:]
    if blake2b(payload, digest_size=_CHECKSUM_BYTES).digest() != digest:
        raise CacheIntegrityError(f"segment [{lo}, {hi}): checksum mismatch", path=path)
    magic, version, f_lo, f_hi = _HEADER.unpack_from(payload)
    if magic != CACHE_MAGIC:
        raise CacheIntegrityError(f"segment [{lo}, {hi}): bad magic {magic!r}", path=path)
    if version != CACHE_VERSION:
        raise CacheIntegrityError(
            f"segment [{lo}, {hi}): unsupported version {version}", path=path
        )
    if (f_lo, f_hi) != (lo, hi):
        raise CacheIntegrityError(
            f"segment [{lo}, {hi}): header says [{f_lo}, {f_hi})", path=path
        )
    off = _HEADER.size
    spf32 = np.frombuffer(payload, dtype="<u4", count=n, offset=off).astype(np.int64)
    off += 4 * n
    phi = np.frombuffer(payload, dtype="<u8", count=n, offset=off).astype(np.int64)
    off += 8 * n
    lam = np.frombuffer(payload, dtype="<u8", count=n, offset=off).astype(np.int64)
    ns = np.arange(lo, hi, dtype=np.int64)
    spf = np.where((spf32 == 0) & (ns >= 2), ns, spf32)
    return SieveSegment(lo, hi, spf, phi, lam)
