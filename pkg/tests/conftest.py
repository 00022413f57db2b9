"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library's own sieve machinery:
trial division, direct divisor enumeration, and a plain boolean prime
sieve, so cross-checks are meaningful.
"""

import numpy as np
import pytest

from multlab import sieve


def trial_factorize(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def bool_prime_sieve(limit: int) -> np.ndarray:
    """Plain boolean sieve, independent of the library implementation."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    d = 2
    while d * d <= limit:
        if flags[d]:
            flags[d * d :: d] = False
        d += 1
    return flags


def divisor_counts(limit: int) -> np.ndarray:
    """d(n) for all n <= limit by direct harmonic striking."""
    counts = np.zeros(limit + 1, dtype=np.int64)
    for i in range(1, limit + 1):
        counts[i::i] += 1
    return counts


def totient(n: int) -> int:
    val = 1
    for p, e in trial_factorize(n):
        val *= (p - 1) * p ** (e - 1)
    return val


def big_omega(n: int) -> int:
    return sum(e for _, e in trial_factorize(n))


@pytest.fixture(scope="session")
def table4():
    return sieve.build_spf(10**4)


@pytest.fixture(scope="session")
def table5():
    return sieve.build_spf(10**5)
