"""Dense-divisor predicates and certificates, decided exactly.

An integer m is u-dense when every interval (y, uy] with 1 <= y < m contains
a divisor of m; equivalently, consecutive divisors of m never jump by more
than a factor u.  The interval-restricted variant only requires the divisor
for y inside a given range.  All decisions here use integer and rational
arithmetic, never floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .arithmetic import Factorization, divisors, factorize
from .errors import CertificateError

RationalLike = Union[int, Fraction]


def _as_fraction(q: RationalLike, what: str) -> Fraction:
    if isinstance(q, bool) or not isinstance(q, (int, Fraction)):
        raise TypeError(f"{what} must be an int or Fraction, got {type(q).__name__}")
    return Fraction(q)


def _check_u(u: RationalLike) -> Fraction:
    uf = _as_fraction(u, "u")
    if uf < 1:
        raise ValueError(f"density parameter u must be >= 1, got {uf}")
    return uf


@dataclass(frozen=True)
class Interval:
    """A nonempty-or-degenerate rational interval with endpoints >= 1.

    Endpoint openness is tracked explicitly; [a, b], [a, b), (a, b] and
    (a, b) are all representable.  lo <= hi is required at construction;
    the interval may still be empty when an endpoint is open.
    """

    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", _as_fraction(self.lo, "lo"))
        object.__setattr__(self, "hi", _as_fraction(self.hi, "hi"))
        if self.lo < 1:
            raise ValueError(f"interval endpoints must be >= 1, got lo={self.lo}")
        if self.lo > self.hi:
            raise ValueError(f"empty construction: lo={self.lo} > hi={self.hi}")

    def is_empty(self) -> bool:
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def contains(self, q: RationalLike) -> bool:
        q = _as_fraction(q, "q")
        if q < self.lo or (q == self.lo and not self.lo_closed):
            return False
        if q > self.hi or (q == self.hi and not self.hi_closed):
            return False
        return True

    def infimum(self) -> Fraction:
        return self.lo

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo}, {self.hi}{right}"


def closed(lo: RationalLike, hi: RationalLike) -> Interval:
    """Shorthand for the closed interval [lo, hi]."""
    return Interval(_as_fraction(lo, "lo"), _as_fraction(hi, "hi"))


def max_divisor_ratio(f: Factorization) -> Fraction:
    """Largest ratio between consecutive divisors (1 for m = 1).

    m is u-dense exactly when this ratio is <= u.
    """
    divs = divisors(f)
    if len(divs) == 1:
        return Fraction(1)
    best = Fraction(1)
    for a, b in zip(divs, divs[1:]):
        r = Fraction(b, a)
        if r > best:
            best = r
    return best


def is_dense(f: Factorization, u: RationalLike) -> bool:
    """Is f.value u-dense (every (y, uy] with 1 <= y < m holds a divisor)?

    Decided by the chain criterion: with the prime factors q_1 <= ... <= q_r
    of m listed with multiplicity, m is u-dense iff
    q_j <= u * q_1 ... q_{j-1} for every j.  Cost O(r), no divisor list.
    """
    uf = _check_u(u)
    un, ud = uf.numerator, uf.denominator
    prefix = 1
    for q in f.primes_ascending():
        if q * ud > un * prefix:
            return False
        prefix *= q
    return True


def is_dense_in(f: Factorization, u: RationalLike, interval: Interval) -> bool:
    """Is f.value u-dense inside ``interval``?

    True iff every y in the interval has a divisor of f.value in (y, uy].
    An empty interval qualifies vacuously.  Divisor gaps [d_i, d_{i+1})
    meeting the interval are checked at their infimum, where the condition
    d_{i+1} <= u * y is tightest.
    """
    uf = _check_u(u)
    if interval.is_empty():
        return True
    un, ud = uf.numerator, uf.denominator
    divs = divisors(f)
    lo_n, lo_d = interval.lo.numerator, interval.lo.denominator
    hi_n, hi_d = interval.hi.numerator, interval.hi.denominator

    def below_hi(num: int, den: int) -> bool:
        # is num/den inside the interval's upper constraint?
        lhs, rhs = num * hi_d, hi_n * den
        return lhs <= rhs if interval.hi_closed else lhs < rhs

    for d, d_next in zip(divs, divs[1:]):
        # infimum of interval ∩ [d, d_next): a = max(lo, d)
        if interval.lo > d:
            a_n, a_d = lo_n, lo_d
        else:
            a_n, a_d = d, 1
        # gap meets the interval iff a < d_next and a satisfies the hi bound
        if a_n >= d_next * a_d:
            continue
        if not below_hi(a_n, a_d):
            continue
        # need d_next <= u * a; fails at the infimum => fails at some point
        # of the intersection (openness at a does not matter: if the strict
        # inequality d_next > u*a holds, it holds on a neighbourhood).
        if d_next * ud * a_d > un * a_n:
            return False
    # tail [d_t, infinity): no further divisor, so any interval point >= d_t
    # at or above the last divisor breaks the predicate.
    d_t = divs[-1]
    a_n, a_d = (lo_n, lo_d) if interval.lo > d_t else (d_t, 1)
    if below_hi(a_n, a_d):
        return False
    return True


def divisor_in(f: Factorization, y: RationalLike, z: RationalLike) -> Optional[int]:
    """Smallest divisor of f.value in (y, z], or None.

    Pruned depth-first search over exponent vectors; subtrees whose entire
    value range lies outside (y, z] are skipped, so the divisor list is
    never materialized.
    """
    y = _as_fraction(y, "y")
    z = _as_fraction(z, "z")
    if z <= y:
        return None
    primes = [p for p, _ in f.factors]
    exps = [e for _, e in f.factors]
    k = len(primes)
    # suffix_max[i] = max product available from primes i..k-1
    suffix_max = [1] * (k + 1)
    for i in range(k - 1, -1, -1):
        suffix_max[i] = suffix_max[i + 1] * primes[i] ** exps[i]
    best: Optional[int] = None

    def walk(i: int, cur: int) -> None:
        nonlocal best
        if best is not None and cur >= best:
            return
        if cur * suffix_max[i] <= y:
            return  # whole subtree is too small
        if i == k:
            if cur > y:  # cur <= z was enforced on the way down
                best = cur
            return
        val = cur
        for _ in range(exps[i] + 1):
            walk(i + 1, val)
            val *= primes[i]
            if val > z:
                break

    walk(0, 1)
    return best


# --- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class DensityCertificate:
    """A checkable witness that a target is (1+1/h)-dense on [h, y * prod(chain)].

    ``base`` is a divisor of the target that is (1+1/h)-dense on [h, y];
    ``chain`` extends it multiplicatively: each m_j must satisfy
    m_j * h <= y * m_1 ... m_{j-1}, which telescopes the dense range up to
    y * m_1 ... m_k.
    """

    base: int
    h: int
    y: int
    chain: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.base < 1 or self.h < 1 or self.y < 1:
            raise CertificateError("base, h and y must all be >= 1")
        if any(m < 1 for m in self.chain):
            raise CertificateError("chain entries must be >= 1")

    @property
    def u(self) -> Fraction:
        return 1 + Fraction(1, self.h)

    @property
    def chain_product(self) -> int:
        out = 1
        for m in self.chain:
            out *= m
        return out

    @property
    def certified_value(self) -> int:
        return self.base * self.chain_product

    def certified_interval(self) -> Interval:
        """The range [h, y * prod(chain)] this certificate claims density on."""
        return closed(self.h, self.y * self.chain_product)


def extend_certificate(cert: DensityCertificate, m_next: int) -> DensityCertificate:
    """Append m_next to the chain, checking the growth condition exactly.

    Requires m_next * h <= y * (current chain product); raises
    CertificateError otherwise.
    """
    if m_next < 1:
        raise CertificateError(f"chain entry must be >= 1, got {m_next}")
    if m_next * cert.h > cert.y * cert.chain_product:
        raise CertificateError(
            f"chain growth violated: {m_next} * {cert.h} > "
            f"{cert.y} * {cert.chain_product}"
        )
    return DensityCertificate(cert.base, cert.h, cert.y, cert.chain + (m_next,))


def certificate_failure(cert: DensityCertificate, target: Factorization) -> Optional[str]:
    """Why ``cert`` fails to certify ``target``, or None if it verifies.

    Checks, in order: y >= h, the chain growth conditions, divisibility of
    the certified value into the target, and base density on [h, y].
    """
    if cert.y < cert.h:
        return f"y={cert.y} is below h={cert.h}"
    prefix = 1
    for j, m in enumerate(cert.chain):
        if m * cert.h > cert.y * prefix:
            return (
                f"chain entry {j} breaks growth: "
                f"{m} * {cert.h} > {cert.y} * {prefix}"
            )
        prefix *= m
    if target.value % cert.certified_value != 0:
        return f"{cert.certified_value} does not divide {target.value}"
    if not is_dense_in(factorize(cert.base), cert.u, closed(cert.h, cert.y)):
        return f"base {cert.base} is not {cert.u}-dense on [{cert.h}, {cert.y}]"
    return None


def verify_certificate(cert: DensityCertificate, target: Factorization) -> bool:
    """Does ``cert`` prove target (1+1/h)-dense on its certified interval?

    Sound: a True answer implies is_dense_in(target, 1+1/h, cert interval).
    """
    return certificate_failure(cert, target) is None


def find_certificate(
    target: Factorization, h: int = 1, seed_bound: int = 64
) -> Optional[DensityCertificate]:
    """Greedy search for a density certificate for ``target``.

    Picks the largest divisor d <= seed_bound that is (1+1/h)-dense on
    [h, d-1] as the base (a base can never be dense up to itself: y = d has
    no divisor in (y, uy]), then folds in the remaining prime factors,
    smallest first, whenever the growth condition allows.  Returns None when
    no certificate with a nondegenerate range (certified range end > h)
    exists under this strategy; in particular target value 1 has none.
    """
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    if seed_bound < 1:
        raise ValueError(f"seed_bound must be >= 1, got {seed_bound}")
    u = 1 + Fraction(1, h)
    best_seed = None
    for d in divisors(target):
        if d > seed_bound:
            break
        if d <= h:
            continue
        if is_dense_in(factorize(d), u, closed(h, d - 1)):
            best_seed = d
    if best_seed is None:
        return None
    cert = DensityCertificate(best_seed, h, best_seed - 1)
    remaining = factorize(target.value // best_seed).primes_ascending()
    for q in remaining:
        if q * cert.h <= cert.y * cert.chain_product:
            cert = extend_certificate(cert, q)
    if cert.y * cert.chain_product <= cert.h:
        return None
    return cert
