"""Desk-scale counting experiments over phi and lambda values.

Every experiment streams sieve segments through a compiled scan kernel and
returns a ScanResult: exact integer counts, a capped list of witnesses, and
the parameters that produced them.  Each one also has a pure-Python route
(factor, enumerate divisors, decide exactly) used three ways: to re-verify
witnesses, to cross-check whole runs at small x, and to redo a segment in
the unlikely event a kernel scratch buffer overflows.  The two routes share
no divisor-walking code, so they check each other.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

from . import _kernels
from .arithmetic import carmichael, euler_phi, factorize, is_prime
from .density import Interval, closed, divisor_in, is_dense_in, max_divisor_ratio
from .errors import CapacityError
from .sieve import (
    DEFAULT_SEGMENT_LENGTH,
    SPF_TABLE_MAX,
    SieveConfig,
    _shifted_prime_chunks,
    base_primes_for,
    build_spf_table,
    iterate_segments,
)

WITNESS_CAP = _kernels.WITNESS_BUF

#: product guard: kernels form u_num * value and value * u_den in int64.
_PRODUCT_GUARD = 1 << 62

_TARGET_CODES = {"phi": 0, "lambda": 1, "both": 2}


def iroot(t: int, b: int) -> int:
    """floor(t ** (1/b)) for integers t >= 0, b >= 1, exactly."""
    if t < 0 or b < 1:
        raise ValueError("iroot needs t >= 0 and b >= 1")
    if t == 0:
        return 0
    if b == 1:
        return t
    r = 1 << ((t.bit_length() + b - 1) // b)
    while True:
        nr = ((b - 1) * r + t // r ** (b - 1)) // b
        if nr >= r:
            break
        r = nr
    while r**b > t:
        r -= 1
    while (r + 1) ** b <= t:
        r += 1
    return r


def floor_pow(x: int, c: Fraction) -> int:
    """floor(x ** c) for a positive rational exponent, exactly."""
    c = Fraction(c)
    if x < 0 or c <= 0:
        raise ValueError("floor_pow needs x >= 0 and c > 0")
    return iroot(x**c.numerator, c.denominator)


def format_fraction_decimal(hits: int, total: int, digits: int = 12) -> str:
    """hits/total as a fixed-point decimal string, round half up."""
    if total == 0:
        return "0." + "0" * digits
    scaled = (hits * 10**digits * 2 + total) // (2 * total)
    whole, frac = divmod(scaled, 10**digits)
    return f"{whole}.{frac:0{digits}d}"


@dataclass(frozen=True)
class Witness:
    n: int
    hit: bool


@dataclass
class ScanResult:
    """Outcome of one counting experiment: hits among a totality of candidates."""

    experiment_id: str
    x: int
    parameters: dict
    total: int
    hits: int
    witnesses: tuple[Witness, ...]
    elapsed_ms: float

    @property
    def fraction(self) -> Fraction:
        if self.total == 0:
            return Fraction(0)
        return Fraction(self.hits, self.total)

    @property
    def fraction_decimal(self) -> str:
        return format_fraction_decimal(self.hits, self.total)

    def key(self):
        """Everything except elapsed_ms, for determinism comparisons."""
        return (
            self.experiment_id,
            self.x,
            tuple(sorted(self.parameters.items(), key=lambda kv: kv[0])),
            self.total,
            self.hits,
            self.witnesses,
        )


@dataclass
class ThetaProfile:
    """Counts of primes p <= x with P+(p-1) > p^c, per grid point c."""

    x: int
    prime_count: int
    grid: tuple[tuple[Fraction, int], ...]
    elapsed_ms: float = 0.0


@dataclass
class OmegaProfile:
    """Summary statistics of Omega(phi(n)) and its ratio to log log n."""

    x: int
    count: int
    omega_mean: float
    omega_median: float
    omega_deciles: tuple[float, ...]
    ratio_count: int
    ratio_mean: float
    ratio_median: float
    ratio_deciles: tuple[float, ...]
    reference_half_loglog_sq: float
    elapsed_ms: float = 0.0


# --- runner machinery -------------------------------------------------------


@dataclass
class _Partial:
    lo: int
    hi: int
    hits: int
    hit_wits: list = field(default_factory=list)
    miss_wits: list = field(default_factory=list)
    redo: bool = False


def _pure_partial(lo: int, hi: int, pure_fn: Callable[[int], bool]) -> _Partial:
    pr = _Partial(lo, hi, 0)
    for n in range(lo, hi):
        if pure_fn(n):
            pr.hits += 1
            if len(pr.hit_wits) < WITNESS_CAP:
                pr.hit_wits.append(n)
        elif len(pr.miss_wits) < WITNESS_CAP:
            pr.miss_wits.append(n)
    return pr


def _merge_partials(partials: list[_Partial], pure_fn) -> tuple[int, tuple[Witness, ...]]:
    partials.sort(key=lambda pr: pr.lo)
    hits = 0
    hw: list[int] = []
    mw: list[int] = []
    for pr in partials:
        if pr.redo:
            pr = _pure_partial(pr.lo, pr.hi, pure_fn)
        hits += pr.hits
        for n in pr.hit_wits:
            if len(hw) < WITNESS_CAP:
                hw.append(n)
        for n in pr.miss_wits:
            if len(mw) < WITNESS_CAP:
                mw.append(n)
    wits = sorted(
        [Witness(n, True) for n in hw] + [Witness(n, False) for n in mw],
        key=lambda w: w.n,
    )
    return hits, tuple(wits)


def _run_value_scan(
    x: int,
    kernel_call,
    pure_fn,
    *,
    segment_length: Optional[int],
    workers: int,
    cache_dir: Optional[str],
    progress=None,
) -> tuple[int, tuple[Witness, ...]]:
    """Drive a per-n kernel over phi/lambda segments for n in [1, x]."""
    if x + 1 > SPF_TABLE_MAX:
        raise CapacityError(f"experiments need an spf table; x={x} exceeds {SPF_TABLE_MAX - 1}")
    gspf = build_spf_table(x + 1)
    cfg = SieveConfig(
        limit=x + 1,
        segment_length=segment_length or DEFAULT_SEGMENT_LENGTH,
        worker_count=workers,
        cache_dir=cache_dir,
    )
    partials: list[_Partial] = []

    def consume(seg):
        hitbuf = np.empty(WITNESS_CAP, dtype=np.int64)
        missbuf = np.empty(WITNESS_CAP, dtype=np.int64)
        hits, nh, nm, overflow = kernel_call(seg, gspf, hitbuf, missbuf)
        if overflow:
            partials.append(_Partial(seg.lo, seg.hi, 0, [], [], True))
        else:
            partials.append(
                _Partial(seg.lo, seg.hi, int(hits), hitbuf[:nh].tolist(), missbuf[:nm].tolist())
            )

    iterate_segments(cfg, consume, in_order=False, progress=progress)
    return _merge_partials(partials, pure_fn)


def _scan_scratch():
    pbuf = np.empty(_kernels.PRIME_BUF, dtype=np.int64)
    ebuf = np.empty(_kernels.PRIME_BUF, dtype=np.int64)
    dbuf = np.empty(_kernels.DIVISOR_BUF, dtype=np.int64)
    return pbuf, ebuf, dbuf


def _check_product_guard(x: int, *rationals: Fraction) -> None:
    worst = max((max(abs(q.numerator), q.denominator) for q in rationals), default=1)
    if worst * (x + 1) >= _PRODUCT_GUARD:
        raise CapacityError(f"u numerator/denominator too large for x={x} (int64 guard)")


def _parse_target(target: str) -> int:
    if target not in _TARGET_CODES:
        raise ValueError(f"target must be one of {sorted(_TARGET_CODES)}, got {target!r}")
    return _TARGET_CODES[target]


def _target_values(n: int, target: str) -> tuple[int, ...]:
    f = factorize(n)
    if target == "phi":
        return (euler_phi(f),)
    if target == "lambda":
        return (carmichael(f),)
    return (euler_phi(f), carmichael(f))


# --- pure predicates (enumeration route, no chain logic) --------------------


def _pure_dense(v: int, u: Fraction) -> bool:
    return max_divisor_ratio(factorize(v)) <= u


def _pure_dense_on(v: int, u: Fraction, h: int, t: int) -> bool:
    if t < h:
        return True
    return is_dense_in(factorize(v), u, closed(h, t))


def _pure_full_range(v: int, h: int) -> bool:
    if v <= h * (h + 1):
        return True
    iv = Interval(Fraction(h), Fraction(v, h + 1), True, False)
    return is_dense_in(factorize(v), 1 + Fraction(1, h), iv)


def pure_hit(experiment_id: str, params: dict, n: int) -> bool:
    """Exact per-candidate predicate, sharing no scan code with the kernels.

    For prime-indexed experiments (shifted_prime_scan) n must be prime.
    """
    if experiment_id == "scan_density":
        u = Fraction(params["u"])
        vals = _target_values(n, params["target"])
        if params["mode"] == "global":
            return all(_pure_dense(v, u) for v in vals)
        return all(_pure_dense_on(v, u, params["h"], params["T"]) for v in vals)
    if experiment_id == "full_range_density":
        h = params["h"]
        return all(_pure_full_range(v, h) for v in _target_values(n, "both"))
    if experiment_id == "count_B":
        v = euler_phi(factorize(n))
        return divisor_in(factorize(v), params["y"], params["z"]) is not None
    if experiment_id == "nondense_scan":
        u = Fraction(params["u"])
        return all(not _pure_dense(v, u) for v in _target_values(n, "both"))
    if experiment_id == "phi_prime_gap":
        v = euler_phi(factorize(n))
        lo, hi = params["window_lo"], params["window_hi"]
        return not any(lo < p <= hi for p, _ in factorize(v).factors)
    if experiment_id == "shifted_prime_scan":
        lo, hi = params["a"], params["b"]
        return not any(lo < p <= hi for p, _ in factorize(n - 1).factors)
    if experiment_id == "landau_scan":
        d = params["D"]
        return not any(q % d == 1 % d for q, _ in factorize(n).factors)
    if experiment_id == "phi_ratio_small":
        eps = Fraction(params["eps"])
        return euler_phi(factorize(n)) * eps.denominator <= eps.numerator * n
    raise ValueError(f"unknown experiment {experiment_id!r}")


def recount_pure(experiment_id: str, x: int, params: dict) -> tuple[int, int]:
    """Recompute (total, hits) with the pure route; meant for small x."""
    if experiment_id == "shifted_prime_scan":
        total = hits = 0
        for p in range(2, x + 1):
            if is_prime(p):
                total += 1
                if pure_hit(experiment_id, params, p):
                    hits += 1
        return total, hits
    hits = 0
    for n in range(1, x + 1):
        if pure_hit(experiment_id, params, n):
            hits += 1
    return x, hits


def reverify_witnesses(result: ScanResult) -> list[Witness]:
    """Witnesses whose recorded hit flag disagrees with the pure route."""
    bad = []
    for w in result.witnesses:
        if pure_hit(result.experiment_id, result.parameters, w.n) != w.hit:
            bad.append(w)
    return bad


# --- experiments ------------------------------------------------------------


def scan_density(
    x: int,
    u,
    interval: Optional[tuple] = None,
    target: str = "both",
    *,
    segment_length: Optional[int] = None,
    workers: int = 1,
    cache_dir: Optional[str] = None,
    progress=None,
) -> ScanResult:
    """Count n <= x whose phi/lambda value(s) are u-dense.

    ``interval=None`` asks for full u-density; ``interval=(h, c)`` restricts
    the requirement to y in [h, floor(x**c)].
    """
    t0 = time.perf_counter()
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    u = Fraction(u)
    if u < 1:
        raise ValueError(f"u must be >= 1, got {u}")
    code = _parse_target(target)
    _check_product_guard(x, u)
    un, ud = u.numerator, u.denominator

    if interval is None:
        params = {"mode": "global", "target": target, "u": u}

        def kernel_call(seg, gspf, hitbuf, missbuf):
            return _kernels.scan_density_global(
                seg.lo, seg.phi, seg.lam, gspf, un, ud, code, hitbuf, 0, missbuf, 0
            )

    else:
        h, c = interval
        h = int(h)
        if h < 1:
            raise ValueError(f"interval start h must be >= 1, got {h}")
        c = Fraction(c)
        if not 0 < c < 1:
            raise ValueError(f"interval exponent c must be in (0, 1), got {c}")
        t_end = floor_pow(x, c)
        params = {"mode": "interval", "target": target, "u": u, "h": h, "c": c, "T": t_end}

        def kernel_call(seg, gspf, hitbuf, missbuf):
            pbuf, ebuf, dbuf = _scan_scratch()
            return _kernels.scan_density_interval(
                seg.lo, seg.phi, seg.lam, gspf, h, t_end, un, ud, code,
                pbuf, ebuf, dbuf, hitbuf, 0, missbuf, 0,
            )

    pure_fn = lambda n: pure_hit("scan_density", params, n)
    hits, wits = _run_value_scan(
        x, kernel_call, pure_fn,
        segment_length=segment_length, workers=workers, cache_dir=cache_dir,
        progress=progress,
    )
    return ScanResult(
        "scan_density", x, params, x, hits, wits,
        (time.perf_counter() - t0) * 1000.0,
    )


def scan_full_range_density(
    x: int,
    h: int,
    *,
    segment_length: Optional[int] = None,
    workers: int = 1,
    cache_dir: Optional[str] = None,
    progress=None,
) -> ScanResult:
    """Count n <= x with phi(n) and lambda(n) (1+1/h)-dense on [h, value/(h+1))."""
    t0 = time.perf_counter()
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    _check_product_guard(x, Fraction(h + 1, h))
    params = {"h": h}

    def kernel_call(seg, gspf, hitbuf, missbuf):
        pbuf, ebuf, dbuf = _scan_scratch()
        return _kernels.scan_full_range(
            seg.lo, seg.phi, seg.lam, gspf, h, pbuf, ebuf, dbuf, hitbuf, 0, missbuf, 0
        )

    pure_fn = lambda n: pure_hit("full_range_density", params, n)
    hits, wits = _run_value_scan(
        x, kernel_call, pure_fn,
        segment_length=segment_length, workers=workers, cache_dir=cache_dir,
        progress=progress,
    )
    return ScanResult(
        "full_range_density", x, params, x, hits, wits,
        (time.perf_counter() - t0) * 1000.0,
    )


def count_B(
    x: int,
    y: int,
    z: int,
    *,
    segment_length: Optional[int] = None,
    workers: int = 1,
    cache_dir: Optional[str] = None,
    progress=None,
) -> ScanResult:
    """B(x, y, z): count n <= x such that phi(n) has a divisor in (y, z]."""
    t0 = time.perf_counter()
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    if not 0 <= y < z:
        raise ValueError(f"need 0 <= y < z, got y={y}, z={z}")
    params = {"y": y, "z": z}

    def kernel_call(seg, gspf, hitbuf, missbuf):
        pbuf, ebuf, dbuf = _scan_scratch()
        return _kernels.scan_divisor_window(
            seg.lo, seg.phi, gspf, y, z, pbuf, ebuf, dbuf, hitbuf, 0, missbuf, 0
        )

    pure_fn = lambda n: pure_hit("count_B", params, n)
    hits, wits = _run_value_scan(
        x, kernel_call, pure_fn,
        segment_length=segment_length, workers=workers, cache_dir=cache_dir,
        progress=progress,
    )
    return ScanResult(
        "count_B", x, params, x, hits, wits, (time.perf_counter() - t0) * 1000.0
    )


def nondense_scan(
    x: int,
    c,
    *,
    segment_length: Optional[int] = None,
    workers: int = 1,
    cache_dir: Optional[str] = None,
    progress=None,
) -> ScanResult:
    """Count n <= x where neither phi(n) nor lambda(n) is floor(x^c)-dense."""
    t0 = time.perf_counter()
    if x < 2:
        raise ValueError(f"x must be >= 2, got {x}")
    c = Fraction(c)
    if not 0 < c < 1:
        raise ValueError(f"c must be in (0, 1), got {c}")
    u = floor_pow(x, c)
    _check_product_guard(x, Fraction(u))
    params = {"c": c, "u": u}

    def kernel_call(seg, gspf, hitbuf, missbuf):
        return _kernels.scan_nondense(
            seg.lo, seg.phi, seg.lam, gspf, u, hitbuf, 0, missbuf, 0
        )

    pure_fn = lambda n: pure_hit("nondense_scan", params, n)
    hits, wits = _run_value_scan(
        x, kernel_call, pure_fn,
        segment_length=segment_length, workers=workers, cache_dir=cache_dir,
        progress=progress,
    )
    return ScanResult(
        "nondense_scan", x, params, x, hits, wits, (time.perf_counter() - t0) * 1000.0
    )


def phi_prime_gap_scan(
    x: int,
    g,
    eps,
    *,
    segment_length: Optional[int] = None,
    workers: int = 1,
    cache_dir: Optional[str] = None,
    progress=None,
) -> ScanResult:
    """Count n <= x whose phi(n) has no prime factor in (x^g, x^(g(1+eps))].

    The supporting estimate holds for roughly 1/log x <= g <= 1/10 and
    1/(g log x) <= eps <= 1/4; outside that window the scan still runs but
    a warning is emitted.
    """
    t0 = time.perf_counter()
    if x < 3:
        raise ValueError(f"x must be >= 3, got {x}")
    g = Fraction(g)
    eps = Fraction(eps)
    if g <= 0 or eps <= 0:
        raise ValueError("g and eps must be positive")
    logx = math.log(x)
    if not (1.0 / logx <= float(g) <= 0.1):
        warnings.warn(f"g={g} outside the supported window [1/log x, 1/10]", stacklevel=2)
    if not (1.0 / (float(g) * logx) <= float(eps) <= 0.25):
        warnings.warn(
            f"eps={eps} outside the supported window [1/(g log x), 1/4]", stacklevel=2
        )
    window_lo = floor_pow(x, g)
    window_hi = floor_pow(x, g * (1 + eps))
    reference = float(g) ** (float(eps) / 2.0) * math.log(1.0 / float(g)) * x
    params = {
        "g": g,
        "eps": eps,
        "window_lo": window_lo,
        "window_hi": window_hi,
        "reference_bound": reference,
    }

    def kernel_call(seg, gspf, hitbuf, missbuf):
        return _kernels.scan_factor_window_absent(
            seg.lo, seg.phi, gspf, window_lo, window_hi, hitbuf, 0, missbuf, 0
        )

    pure_fn = lambda n: pure_hit("phi_prime_gap", params, n)
    hits, wits = _run_value_scan(
        x, kernel_call, pure_fn,
        segment_length=segment_length, workers=workers, cache_dir=cache_dir,
        progress=progress,
    )
    return ScanResult(
        "phi_prime_gap", x, params, x, hits, wits, (time.perf_counter() - t0) * 1000.0
    )


def shifted_prime_scan(
    w: int,
    a: int,
    b: int,
    *,
    chunk: Optional[int] = None,
    progress=None,
) -> ScanResult:
    """Count primes p <= w such that p - 1 has no prime factor in (a, b]."""
    t0 = time.perf_counter()
    if w < 2:
        raise ValueError(f"w must be >= 2, got {w}")
    if not 0 <= a < b:
        raise ValueError(f"need 0 <= a < b, got a={a}, b={b}")
    if w + 1 > SPF_TABLE_MAX:
        raise CapacityError(f"w={w} exceeds spf table cap {SPF_TABLE_MAX - 1}")
    params = {"a": a, "b": b, "w_over_log_w": w / math.log(w)}
    gspf = build_spf_table(w + 1)
    base = base_primes_for(w + 1)
    total = 0
    hits = 0
    hw: list[int] = []
    mw: list[int] = []
    cur = 2
    step = chunk or DEFAULT_SEGMENT_LENGTH
    chunks = ((w - 1) + step - 1) // step
    done = 0
    while cur < w + 1:
        top = min(cur + step, w + 1)
        flags = np.empty(top - cur, dtype=np.uint8)
        _kernels.mark_primes_kernel(cur, base, flags)
        p_arr = (np.nonzero(flags)[0] + cur).astype(np.int64)
        total += len(p_arr)
        hitbuf = np.empty(WITNESS_CAP, dtype=np.int64)
        missbuf = np.empty(WITNESS_CAP, dtype=np.int64)
        h, nh, nm, _ = _kernels.scan_shifted_primes(p_arr, gspf, a, b, hitbuf, 0, missbuf, 0)
        hits += int(h)
        for n in hitbuf[:nh].tolist():
            if len(hw) < WITNESS_CAP:
                hw.append(n)
        for n in missbuf[:nm].tolist():
            if len(mw) < WITNESS_CAP:
                mw.append(n)
        cur = top
        done += 1
        if progress is not None:
            progress(done, chunks)
    wits = sorted(
        [Witness(n, True) for n in hw] + [Witness(n, False) for n in mw],
        key=lambda wit: wit.n,
    )
    return ScanResult(
        "shifted_prime_scan", w, params, total, hits, tuple(wits),
        (time.perf_counter() - t0) * 1000.0,
    )


def theta_profile(
    x: int,
    grid: Iterable,
    *,
    chunk: Optional[int] = None,
    progress=None,
) -> ThetaProfile:
    """For each c in grid, count primes p <= x with P+(p-1) > p^c.

    Comparisons are exact: t > p^(a/b) is decided as t^b > p^a in integers,
    with a bit-length prefilter so most primes never form the big powers.
    """
    t0 = time.perf_counter()
    if x < 2:
        raise ValueError(f"x must be >= 2, got {x}")
    if x + 1 > SPF_TABLE_MAX:
        raise CapacityError(f"x={x} exceeds spf table cap {SPF_TABLE_MAX - 1}")
    cs = sorted(set(Fraction(c) for c in grid))
    if not cs:
        raise ValueError("grid must contain at least one exponent")
    for c in cs:
        if not 0 < c < 1:
            raise ValueError(f"grid exponents must be in (0, 1), got {c}")
    gspf = build_spf_table(x + 1)
    # hist[k] = number of primes satisfying exactly the first k grid points
    hist = [0] * (len(cs) + 1)
    prime_count = 0
    done = 0
    step = chunk or DEFAULT_SEGMENT_LENGTH
    chunks = (x - 1 + step - 1) // step
    for p_arr, pplus, _flat, _offs in _shifted_prime_chunks(x + 1, step, gspf):
        prime_count += len(p_arr)
        for j in range(len(p_arr)):
            p = int(p_arr[j])
            t = int(pplus[j])
            # monotone in c: find how many leading grid points qualify
            lo, hi = 0, len(cs)
            while lo < hi:
                mid = (lo + hi) // 2
                if _exceeds_power(t, p, cs[mid]):
                    lo = mid + 1
                else:
                    hi = mid
            hist[lo] += 1
        done += 1
        if progress is not None:
            progress(done, chunks)
    counts = []
    running = prime_count
    for k, c in enumerate(cs):
        running -= hist[k]
        counts.append((c, running))
    return ThetaProfile(x, prime_count, tuple(counts), (time.perf_counter() - t0) * 1000.0)


def _exceeds_power(t: int, p: int, c: Fraction) -> bool:
    """Exact test t > p**c for integers t >= 0, p >= 2 and 0 < c < 1."""
    if t <= 0:
        return False
    a, b = c.numerator, c.denominator
    bl_t, bl_p = t.bit_length(), p.bit_length()
    # t^b >= 2^((bl_t-1)b) and p^a < 2^(bl_p a)
    if (bl_t - 1) * b >= bl_p * a:
        return True
    # t^b < 2^(bl_t b) and p^a >= 2^((bl_p-1)a)
    if bl_t * b <= (bl_p - 1) * a:
        return False
    return t**b > p**a


def omega_phi_profile(
    x: int,
    *,
    segment_length: Optional[int] = None,
    workers: int = 1,
    cache_dir: Optional[str] = None,
    progress=None,
) -> OmegaProfile:
    """Distribution of Omega(phi(n)) for n <= x, with ratios to log log n.

    Medians and deciles are order statistics taken with the "lower" rule
    (the ranked element itself, no interpolation), so all reported values
    occur in the data.  Ratios are taken over 3 <= n <= x where log log n
    is positive.
    """
    t0 = time.perf_counter()
    if x < 3:
        raise ValueError(f"x must be >= 3, got {x}")
    if x + 1 > SPF_TABLE_MAX:
        raise CapacityError(f"x={x} exceeds spf table cap {SPF_TABLE_MAX - 1}")
    gspf = build_spf_table(x + 1)
    om = np.zeros(x + 1, dtype=np.uint8)
    cfg = SieveConfig(
        limit=x + 1,
        segment_length=segment_length or DEFAULT_SEGMENT_LENGTH,
        worker_count=workers,
        cache_dir=cache_dir,
    )

    def consume(seg):
        out = np.empty(len(seg), dtype=np.uint8)
        _kernels.omega_of_values(seg.phi, gspf, out)
        om[seg.lo : seg.hi] = out

    iterate_segments(cfg, consume, in_order=False, progress=progress)
    del gspf

    vals = om[1:]
    count = x
    hist = np.bincount(vals, minlength=64).astype(np.int64)
    omega_mean = float(np.dot(hist, np.arange(len(hist), dtype=np.int64)) / count)
    cum = np.cumsum(hist)

    def rank_value(r: int) -> float:
        # value of the r-th smallest (1-based)
        return float(int(np.searchsorted(cum, r)))

    omega_median = rank_value((count + 1) // 2)
    omega_deciles = tuple(rank_value(max(1, (k * count + 9) // 10)) for k in range(1, 10))

    ratio_count = x - 2
    ratios = np.empty(ratio_count, dtype=np.float32)
    pos = 0
    block = 1 << 22
    for start in range(3, x + 1, block):
        stop = min(start + block, x + 1)
        ns = np.arange(start, stop, dtype=np.float64)
        ll = np.log(np.log(ns))
        ratios[pos : pos + (stop - start)] = om[start:stop].astype(np.float64) / ll
        pos += stop - start
    ratio_mean = float(np.mean(ratios, dtype=np.float64))
    qs = np.quantile(ratios, [k / 10 for k in range(1, 10)] + [0.5], method="lower")
    ratio_deciles = tuple(float(v) for v in qs[:9])
    ratio_median = float(qs[9])
    ref = 0.5 * math.log(math.log(x)) ** 2
    return OmegaProfile(
        x, count, omega_mean, omega_median, omega_deciles,
        ratio_count, ratio_mean, ratio_median, ratio_deciles,
        ref, (time.perf_counter() - t0) * 1000.0,
    )


def landau_scan(
    x: int,
    d: int,
    *,
    chunk: Optional[int] = None,
    progress=None,
) -> ScanResult:
    """Count n <= x having no prime factor q with q = 1 (mod d).

    The expected decay is x (log x)^(-1/phi(d)) up to a constant.
    """
    t0 = time.perf_counter()
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    if d < 1:
        raise ValueError(f"D must be >= 1, got {d}")
    if x + 1 > SPF_TABLE_MAX:
        raise CapacityError(f"x={x} exceeds spf table cap {SPF_TABLE_MAX - 1}")
    phi_d = euler_phi(factorize(d))
    params = {"D": d, "phi_D": phi_d, "decay_exponent": Fraction(1, phi_d)}
    gspf = build_spf_table(x + 1)
    r = 1 % d
    hits = 0
    hw: list[int] = []
    mw: list[int] = []
    cur = 1
    step = chunk or DEFAULT_SEGMENT_LENGTH
    chunks = (x + step - 1) // step
    done = 0
    while cur < x + 1:
        top = min(cur + step, x + 1)
        hitbuf = np.empty(WITNESS_CAP, dtype=np.int64)
        missbuf = np.empty(WITNESS_CAP, dtype=np.int64)
        h, nh, nm, _ = _kernels.scan_landau(cur, top, gspf, d, r, hitbuf, 0, missbuf, 0)
        hits += int(h)
        for n in hitbuf[:nh].tolist():
            if len(hw) < WITNESS_CAP:
                hw.append(n)
        for n in missbuf[:nm].tolist():
            if len(mw) < WITNESS_CAP:
                mw.append(n)
        cur = top
        done += 1
        if progress is not None:
            progress(done, chunks)
    wits = sorted(
        [Witness(n, True) for n in hw] + [Witness(n, False) for n in mw],
        key=lambda wit: wit.n,
    )
    return ScanResult(
        "landau_scan", x, params, x, hits, tuple(wits),
        (time.perf_counter() - t0) * 1000.0,
    )


def phi_ratio_small(
    x: int,
    eps,
    *,
    segment_length: Optional[int] = None,
    workers: int = 1,
    cache_dir: Optional[str] = None,
    progress=None,
) -> ScanResult:
    """Count n <= x with phi(n) <= eps * n."""
    t0 = time.perf_counter()
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    _check_product_guard(x, eps)
    params = {"eps": eps}
    en, ed = eps.numerator, eps.denominator

    def kernel_call(seg, gspf, hitbuf, missbuf):
        return _kernels.scan_phi_ratio(seg.lo, seg.phi, en, ed, hitbuf, 0, missbuf, 0)

    pure_fn = lambda n: pure_hit("phi_ratio_small", params, n)
    hits, wits = _run_value_scan(
        x, kernel_call, pure_fn,
        segment_length=segment_length, workers=workers, cache_dir=cache_dir,
        progress=progress,
    )
    return ScanResult(
        "phi_ratio_small", x, params, x, hits, wits,
        (time.perf_counter() - t0) * 1000.0,
    )
