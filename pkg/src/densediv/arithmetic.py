"""Exact arithmetic on single integers: factoring, totients, divisors, orders.

Everything here works with Python integers only, so results are exact at any
size the algorithms can reach.  Bulk computations over ranges live in
:mod:`densediv.sieve`; this module is the ground truth they are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CapacityError

#: factorize() refuses inputs above this bound (Pollard rho with these
#: witnesses is only vetted below 2**64).
FACTOR_LIMIT = 1 << 64

#: divisors() refuses to materialize more than this many divisors.
DIVISOR_CAP = 1 << 20

# Deterministic Miller-Rabin witness set, sufficient for all n < 3.3 * 10**24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL_BOUND = 1 << 16
_small_primes: list[int] = []


def _ensure_small_primes() -> None:
    if _small_primes:
        return
    sieve = bytearray([1]) * _TRIAL_BOUND
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(_TRIAL_BOUND) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytes(len(sieve[p * p :: p]))
    _small_primes.extend(i for i in range(_TRIAL_BOUND) if sieve[i])


def is_prime(n: int) -> bool:
    """Deterministic primality test for 0 <= n < 2**64."""
    if n < 0:
        raise ValueError("is_prime expects a nonnegative integer")
    if n >= FACTOR_LIMIT:
        raise CapacityError(f"is_prime supports n < 2**64, got {n}")
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    # Brent's cycle variant; n must be odd, composite, and not a prime power
    # of a small prime (trial division has already run).
    if n % 2 == 0:
        return 2
    for c in range(1, 50):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise CapacityError(f"pollard rho failed to split {n}")


@dataclass(frozen=True)
class Factorization:
    """An integer together with its prime factorization.

    ``factors`` is a tuple of (prime, exponent) pairs with primes strictly
    ascending and exponents >= 1.  The constructor checks shape and that the
    product matches ``value``; it does not re-prove primality of the parts
    (that is what :meth:`validate` is for).
    """

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.value < 1:
            raise ValueError(f"value must be >= 1, got {self.value}")
        prod = 1
        prev = 1
        for p, e in self.factors:
            if p <= prev:
                raise ValueError("factors must have strictly ascending primes")
            if e < 1:
                raise ValueError("exponents must be >= 1")
            prev = p
            prod *= p**e
        if prod != self.value:
            raise ValueError(f"factor product {prod} != value {self.value}")

    def validate(self) -> None:
        """Full check: every base is prime (raises ValueError if not)."""
        for p, _ in self.factors:
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")

    @property
    def omega(self) -> int:
        """Number of distinct prime factors."""
        return len(self.factors)

    @property
    def big_omega(self) -> int:
        """Number of prime factors counted with multiplicity."""
        return sum(e for _, e in self.factors)

    def primes_ascending(self) -> tuple[int, ...]:
        """All prime factors with multiplicity, ascending (q_1 <= ... <= q_r)."""
        out = []
        for p, e in self.factors:
            out.extend([p] * e)
        return tuple(out)


def factorize(n: int) -> Factorization:
    """Factor n >= 1 into prime powers.  Exact for all n < 2**64."""
    if n < 1:
        raise ValueError(f"factorize expects n >= 1, got {n}")
    if n >= FACTOR_LIMIT:
        raise CapacityError(f"factorize supports n < 2**64, got {n}")
    _ensure_small_primes()
    factors = {}
    m = n
    for p in _small_primes:
        if p * p > m:
            break
        while m % p == 0:
            factors[p] = factors.get(p, 0) + 1
            m //= p
    if m > 1:
        stack = [m]
        while stack:
            v = stack.pop()
            if v == 1:
                continue
            if is_prime(v):
                factors[v] = factors.get(v, 0) + 1
                continue
            r = math.isqrt(v)
            if r * r == v:
                stack.extend((r, r))
                continue
            d = _pollard_rho(v)
            stack.extend((d, v // d))
    return Factorization(n, tuple(sorted(factors.items())))


def euler_phi(f: Factorization) -> int:
    """Euler's totient from a factorization."""
    out = 1
    for p, e in f.factors:
        out *= p ** (e - 1) * (p - 1)
    return out


def _lambda_prime_power(p: int, e: int) -> int:
    # lambda(2) = 1, lambda(4) = 2, lambda(2^e) = 2^(e-2) for e >= 3;
    # odd prime powers use phi directly.
    if p == 2 and e >= 3:
        return 1 << (e - 2)
    return p ** (e - 1) * (p - 1)


def carmichael(f: Factorization) -> int:
    """Carmichael's function (exponent of the unit group mod f.value)."""
    out = 1
    for p, e in f.factors:
        out = math.lcm(out, _lambda_prime_power(p, e))
    return out


def divisors(f: Factorization, cap: int = DIVISOR_CAP) -> tuple[int, ...]:
    """All divisors of f.value, ascending.

    Raises CapacityError if there are more than ``cap`` of them; the bound is
    checked from the exponents before any list is built.
    """
    count = 1
    for _, e in f.factors:
        count *= e + 1
    if count > cap:
        raise CapacityError(f"{f.value} has {count} divisors, cap is {cap}")
    divs = [1]
    for p, e in f.factors:
        block = len(divs)
        pe = 1
        for _ in range(e):
            pe *= p
            divs.extend(d * pe for d in divs[:block])
    divs.sort()
    return tuple(divs)


def largest_prime_factor(n: int) -> int:
    """P+(n): the largest prime factor of n, with P+(1) = 0."""
    if n < 1:
        raise ValueError(f"largest_prime_factor expects n >= 1, got {n}")
    if n == 1:
        return 0
    return factorize(n).factors[-1][0]


def multiplicative_order(a: int, n: int) -> int:
    """Order of a in (Z/nZ)*; requires gcd(a, n) == 1 and n >= 1."""
    if n < 1:
        raise ValueError(f"modulus must be >= 1, got {n}")
    if math.gcd(a, n) != 1:
        raise ValueError(f"{a} is not a unit mod {n}")
    if n == 1:
        return 1
    t = carmichael(factorize(n))
    # Strip unnecessary prime factors from the exponent bound.
    for p, e in factorize(t).factors:
        for _ in range(e):
            if pow(a, t // p, n) == 1:
                t //= p
            else:
                break
    return t
