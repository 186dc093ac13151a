"""Prime sieving and prime-sum tail bounds."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=8)
def _sieve(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    out = np.nonzero(flags)[0].astype(np.int64)
    out.setflags(write=False)
    return out


def primes_up_to(n: int) -> np.ndarray:
    """Sorted primes ``p <= n`` as a read-only int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    return _sieve(int(n))


def primes_in(lo: float, hi: float) -> np.ndarray:
    """Primes in the half-open interval ``(lo, hi]``."""
    ps = primes_up_to(int(math.floor(hi)))
    return ps[ps > lo]


def prime_factors(n: int) -> dict[int, int]:
    """Trial-division factorisation, ``{p: e}``."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
    return small + large[::-1]


def euler_phi(n: int) -> int:
    out = n
    for p in prime_factors(n):
        out -= out // p
    return out


def prime_power_tail(P: float, sigma: float, power: int = 1) -> float:
    """Upper bound for ``sum_{p > P} p^(-power*sigma)``.

    Partial summation with pi(x) <= 1.25506 x / log x (valid for x > 1)
    gives ``1.25506 * s * P^(1-s) / ((s-1) log P)`` for ``s = power*sigma > 1``.
    """
    s = power * sigma
    if s <= 1:
        return math.inf
    P = max(P, 2.0)
    return 1.25506 * s * P ** (1.0 - s) / ((s - 1.0) * math.log(P))
