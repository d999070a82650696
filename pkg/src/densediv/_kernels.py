"""Compiled kernels for bulk sieving and per-value scans.

Everything here runs under numba's nopython mode with int64 arithmetic.
Callers are responsible for keeping values small enough that the products
formed inside (u_num * value, divisor * u_den, ...) stay below 2**63; the
public modules enforce those caps and fall back to exact Python paths when
a buffer limit is hit (signalled by the overflow flag, never silently).

Convention for factor scans: ``gspf`` is a uint32 table of smallest prime
factors covering every value that can appear, with gspf[0] = gspf[1] = 0
and gspf[p] = p for primes.
"""

import numpy as np
from numba import njit

#: divisor scratch size; values below 2**32 have fewer divisors than this.
DIVISOR_BUF = 8192
#: at most 15 distinct primes fit in a value below 2**63.
PRIME_BUF = 16
#: per-kind witness cap carried through merges.
WITNESS_BUF = 32


@njit(cache=True, nogil=True)
def _gcd64(a, b):
    while b:
        a, b = b, a % b
    return a


# --- sieving ----------------------------------------------------------------


@njit(cache=True, nogil=True)
def sieve_segment_kernel(lo, base_primes, spf, rem, phi, lam):
    """Fill spf/phi/lam for n in [lo, lo + len). Requires lo >= 1."""
    n = spf.shape[0]
    for i in range(n):
        spf[i] = 0
        rem[i] = lo + i
        phi[i] = 1
        lam[i] = 1
    for bi in range(base_primes.shape[0]):
        bp = base_primes[bi]
        start = ((lo + bp - 1) // bp) * bp
        if start < bp:
            start = bp
        j = start - lo
        while j < n:
            v = rem[j]
            pe = 1
            while v % bp == 0:
                v //= bp
                pe *= bp
            rem[j] = v
            phi[j] *= pe - pe // bp
            lc = pe - pe // bp
            if bp == 2 and pe >= 8:
                lc = pe // 4
            g = _gcd64(lam[j], lc)
            lam[j] = (lam[j] // g) * lc
            if spf[j] == 0:
                spf[j] = bp
            j += bp
    for i in range(n):
        v = rem[i]
        if v > 1:
            # leftover prime above the base bound, exponent 1
            phi[i] *= v - 1
            g = _gcd64(lam[i], v - 1)
            lam[i] = (lam[i] // g) * (v - 1)
            if spf[i] == 0:
                spf[i] = v


@njit(cache=True, nogil=True)
def mark_primes_kernel(lo, base_primes, flags):
    """flags[i] = 1 iff lo + i is prime. Requires base primes to sqrt."""
    n = flags.shape[0]
    for i in range(n):
        flags[i] = 1
    for v in range(lo, min(lo + n, 2)):
        flags[v - lo] = 0
    for bi in range(base_primes.shape[0]):
        bp = base_primes[bi]
        start = ((lo + bp - 1) // bp) * bp
        if start < bp * bp:
            start = bp * bp
        j = start - lo
        while j < n:
            flags[j] = 0
            j += bp


@njit(cache=True, nogil=True)
def spf_table_kernel(spf):
    """Smallest-prime-factor table over [0, len); spf[p] = p at primes."""
    limit = spf.shape[0]
    for i in range(limit):
        spf[i] = 0
    i = 2
    while i * i < limit:
        if spf[i] == 0:
            j = i * i
            while j < limit:
                if spf[j] == 0:
                    spf[j] = i
                j += i
        i += 1
    for i in range(2, limit):
        if spf[i] == 0:
            spf[i] = i


# --- per-value predicates ---------------------------------------------------


@njit(cache=True, nogil=True)
def chain_dense(v, un, ud, gspf):
    """u-density of v via the ascending prime chain criterion."""
    if v <= 1:
        return True
    prefix = np.int64(1)
    while v > 1:
        if un * prefix >= ud * v:
            # every remaining prime is <= the remaining cofactor, so all
            # later chain inequalities hold automatically
            return True
        p = np.int64(gspf[v])
        if p * ud > un * prefix:
            return False
        while v % p == 0:
            v //= p
            prefix *= p
    return True


@njit(cache=True, nogil=True)
def _factor_into(v, gspf, pbuf, ebuf):
    k = 0
    while v > 1:
        p = np.int64(gspf[v])
        e = 0
        while v % p == 0:
            v //= p
            e += 1
        pbuf[k] = p
        ebuf[k] = e
        k += 1
    return k


@njit(cache=True, nogil=True)
def _divisors_upto(v, capn, capd, gspf, pbuf, ebuf, dbuf):
    """Divisors d of v with d * capd <= capn, unsorted; -1 on buffer overflow."""
    k = _factor_into(v, gspf, pbuf, ebuf)
    cnt = 1
    dbuf[0] = 1
    for i in range(k):
        p = pbuf[i]
        block = cnt
        for j in range(block):
            val = dbuf[j]
            for _ in range(ebuf[i]):
                val *= p
                if val * capd > capn:
                    break
                if cnt >= dbuf.shape[0]:
                    return -1
                dbuf[cnt] = val
                cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def dense_in_closed_interval(v, h, t, un, ud, gspf, pbuf, ebuf, dbuf):
    """Is v u-dense on [h, t]?  Returns 1/0, or -1 on buffer overflow.

    Only divisors <= u*t matter: a divisor gap whose successor exceeds u*t
    can never satisfy successor <= u*y for y <= t, and the check collapses
    to "the last such divisor already sits above t".
    """
    if t < h:
        return 1
    cnt = _divisors_upto(v, un * t, ud, gspf, pbuf, ebuf, dbuf)
    if cnt < 0:
        return -1
    d = np.sort(dbuf[:cnt])
    for i in range(cnt - 1):
        a = d[i] if d[i] > h else h
        if a < d[i + 1] and a <= t:
            if d[i + 1] * ud > un * a:
                return 0
    a = d[cnt - 1] if d[cnt - 1] > h else h
    if a <= t:
        return 0
    return 1


@njit(cache=True, nogil=True)
def full_range_dense(v, h, gspf, pbuf, ebuf, dbuf):
    """Is v (1+1/h)-dense on [h, v/(h+1))?  1/0, -1 on overflow.

    The right end is exclusive and rational; a gap [d_i, d_{i+1}) meets the
    range iff max(d_i, h) * (h+1) < v, and the tail beyond the largest
    divisor (v itself) never does.
    """
    if v <= h * (h + 1):
        return 1
    cnt = _divisors_upto(v, v, 1, gspf, pbuf, ebuf, dbuf)
    if cnt < 0:
        return -1
    d = np.sort(dbuf[:cnt])
    for i in range(cnt - 1):
        a = d[i] if d[i] > h else h
        if a < d[i + 1] and a * (h + 1) < v:
            if d[i + 1] * h > (h + 1) * a:
                return 0
    return 1


@njit(cache=True, nogil=True)
def has_divisor_in(v, y, z, gspf, pbuf, ebuf, dbuf):
    """Does v have a divisor in (y, z]?  1/0, -1 on overflow."""
    if z <= y:
        return 0
    if y < 1:
        return 1
    k = _factor_into(v, gspf, pbuf, ebuf)
    cnt = 1
    dbuf[0] = 1
    for i in range(k):
        p = pbuf[i]
        block = cnt
        for j in range(block):
            val = dbuf[j]
            for _ in range(ebuf[i]):
                val *= p
                if val > z:
                    break
                if val > y:
                    return 1
                if cnt >= dbuf.shape[0]:
                    return -1
                dbuf[cnt] = val
                cnt += 1
    return 0


@njit(cache=True, nogil=True)
def has_prime_factor_in(v, a, b, gspf):
    """Does v have a prime factor in (a, b]?"""
    while v > 1:
        p = np.int64(gspf[v])
        if p > a and p <= b:
            return True
        while v % p == 0:
            v //= p
    return False


@njit(cache=True, nogil=True)
def has_prime_factor_1mod(v, d, r, gspf):
    """Does v have a prime factor q with q % d == r?"""
    while v > 1:
        p = np.int64(gspf[v])
        if p % d == r:
            return True
        while v % p == 0:
            v //= p
    return False


# --- segment scans ----------------------------------------------------------
# All scans return (hits, nhit, nmiss, overflow) where hits counts matches in
# the segment, nhit/nmiss are the updated witness fills, and overflow != 0
# means a divisor buffer overflowed somewhere and the caller must redo the
# whole segment on the exact path.


@njit(cache=True, nogil=True)
def scan_density_global(lo, phi, lam, gspf, un, ud, target, hitbuf, nhit, missbuf, nmiss):
    hits = 0
    for i in range(phi.shape[0]):
        ok = True
        if target != 1:
            ok = chain_dense(phi[i], un, ud, gspf)
        if ok and target != 0:
            ok = chain_dense(lam[i], un, ud, gspf)
        if ok:
            hits += 1
            if nhit < hitbuf.shape[0]:
                hitbuf[nhit] = lo + i
                nhit += 1
        elif nmiss < missbuf.shape[0]:
            missbuf[nmiss] = lo + i
            nmiss += 1
    return hits, nhit, nmiss, 0


@njit(cache=True, nogil=True)
def scan_density_interval(
    lo, phi, lam, gspf, h, t, un, ud, target,
    pbuf, ebuf, dbuf, hitbuf, nhit, missbuf, nmiss,
):
    hits = 0
    for i in range(phi.shape[0]):
        verdict = np.int64(1)
        if target != 1:
            verdict = dense_in_closed_interval(phi[i], h, t, un, ud, gspf, pbuf, ebuf, dbuf)
        if verdict == 1 and target != 0:
            verdict = dense_in_closed_interval(lam[i], h, t, un, ud, gspf, pbuf, ebuf, dbuf)
        if verdict < 0:
            return hits, nhit, nmiss, 1
        if verdict == 1:
            hits += 1
            if nhit < hitbuf.shape[0]:
                hitbuf[nhit] = lo + i
                nhit += 1
        elif nmiss < missbuf.shape[0]:
            missbuf[nmiss] = lo + i
            nmiss += 1
    return hits, nhit, nmiss, 0


@njit(cache=True, nogil=True)
def scan_full_range(lo, phi, lam, gspf, h, pbuf, ebuf, dbuf, hitbuf, nhit, missbuf, nmiss):
    hits = 0
    for i in range(phi.shape[0]):
        verdict = full_range_dense(phi[i], h, gspf, pbuf, ebuf, dbuf)
        if verdict == 1:
            verdict = full_range_dense(lam[i], h, gspf, pbuf, ebuf, dbuf)
        if verdict < 0:
            return hits, nhit, nmiss, 1
        if verdict == 1:
            hits += 1
            if nhit < hitbuf.shape[0]:
                hitbuf[nhit] = lo + i
                nhit += 1
        elif nmiss < missbuf.shape[0]:
            missbuf[nmiss] = lo + i
            nmiss += 1
    return hits, nhit, nmiss, 0


@njit(cache=True, nogil=True)
def scan_divisor_window(lo, phi, gspf, y, z, pbuf, ebuf, dbuf, hitbuf, nhit, missbuf, nmiss):
    hits = 0
    for i in range(phi.shape[0]):
        verdict = has_divisor_in(phi[i], y, z, gspf, pbuf, ebuf, dbuf)
        if verdict < 0:
            return hits, nhit, nmiss, 1
        if verdict == 1:
            hits += 1
            if nhit < hitbuf.shape[0]:
                hitbuf[nhit] = lo + i
                nhit += 1
        elif nmiss < missbuf.shape[0]:
            missbuf[nmiss] = lo + i
            nmiss += 1
    return hits, nhit, nmiss, 0


@njit(cache=True, nogil=True)
def scan_nondense(lo, phi, lam, gspf, u, hitbuf, nhit, missbuf, nmiss):
    hits = 0
    for i in range(phi.shape[0]):
        bad = (not chain_dense(phi[i], u, 1, gspf)) and (not chain_dense(lam[i], u, 1, gspf))
        if bad:
            hits += 1
            if nhit < hitbuf.shape[0]:
                hitbuf[nhit] = lo + i
                nhit += 1
        elif nmiss < missbuf.shape[0]:
            missbuf[nmiss] = lo + i
            nmiss += 1
    return hits, nhit, nmiss, 0


@njit(cache=True, nogil=True)
def scan_factor_window_absent(lo, phi, gspf, a, b, hitbuf, nhit, missbuf, nmiss):
    hits = 0
    for i in range(phi.shape[0]):
        if not has_prime_factor_in(phi[i], a, b, gspf):
            hits += 1
            if nhit < hitbuf.shape[0]:
                hitbuf[nhit] = lo + i
                nhit += 1
        elif nmiss < missbuf.shape[0]:
            missbuf[nmiss] = lo + i
            nmiss += 1
    return hits, nhit, nmiss, 0


@njit(cache=True, nogil=True)
def scan_landau(lo, hi, gspf, d, r, hitbuf, nhit, missbuf, nmiss):
    hits = 0
    for v in range(lo, hi):
        if not has_prime_factor_1mod(v, d, r, gspf):
            hits += 1
            if nhit < hitbuf.shape[0]:
                hitbuf[nhit] = v
                nhit += 1
        elif nmiss < missbuf.shape[0]:
            missbuf[nmiss] = v
            nmiss += 1
    return hits, nhit, nmiss, 0


@njit(cache=True, nogil=True)
def scan_phi_ratio(lo, phi, en, ed, hitbuf, nhit, missbuf, nmiss):
    hits = 0
    for i in range(phi.shape[0]):
        if phi[i] * ed <= en * (lo + i):
            hits += 1
            if nhit < hitbuf.shape[0]:
                hitbuf[nhit] = lo + i
                nhit += 1
        elif nmiss < missbuf.shape[0]:
            missbuf[nmiss] = lo + i
            nmiss += 1
    return hits, nhit, nmiss, 0


@njit(cache=True, nogil=True)
def scan_shifted_primes(primes, gspf, a, b, hitbuf, nhit, missbuf, nmiss):
    hits = 0
    for j in range(primes.shape[0]):
        if not has_prime_factor_in(primes[j] - 1, a, b, gspf):
            hits += 1
            if nhit < hitbuf.shape[0]:
                hitbuf[nhit] = primes[j]
                nhit += 1
        elif nmiss < missbuf.shape[0]:
            missbuf[nmiss] = primes[j]
            nmiss += 1
    return hits, nhit, nmiss, 0


@njit(cache=True, nogil=True)
def omega_of_values(values, gspf, out):
    """out[i] = Omega(values[i]) with multiplicity."""
    for i in range(values.shape[0]):
        v = values[i]
        c = 0
        while v > 1:
            p = np.int64(gspf[v])
            while v % p == 0:
                v //= p
                c += 1
        out[i] = c


@njit(cache=True, nogil=True)
def pplus_of_shifted(primes, gspf, pplus, flat, offs):
    """Distinct prime factors of p-1 for each prime p; returns flat length.

    flat stores the factor lists back to back; offs[j]..offs[j+1] delimits
    prime j.  pplus[j] is the largest factor (0 for p = 2).
    """
    pos = 0
    for j in range(primes.shape[0]):
        offs[j] = pos
        v = primes[j] - 1
        mx = np.int64(0)
        while v > 1:
            p = np.int64(gspf[v])
            flat[pos] = p
            pos += 1
            if p > mx:
                mx = p
            while v % p == 0:
                v //= p
        pplus[j] = mx
    offs[primes.shape[0]] = pos
    return pos
