"""Exact summatory series of rule-defined functions in one sieve pass.

Computes, at every requested checkpoint x, the partial sums

* ``M(x) = sum_{n<=x} f(n)``,
* ``K(x) = sum_{n<=x} f(n) log n``,
* ``sum_{n<=x} f(n)/n``,

plus prime sums ``sum_{p<=y} f(p)/p`` and ``sum_{p<=t} f(p) log p / p``,
the truncated Euler product ``prod_{p<=x} sum_{p^nu<=x} f(p^nu)/p^nu`` and
the smallest Euler-factor modulus.

Accumulation is compensated: pairwise sums inside blocks of 2**16 terms,
Kahan carry across blocks, so results are deterministic and accurate to a
few ulps even over 10**9 terms.  Checkpoints are resolved at integer
boundaries with ties included (``n <= x``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rules, sieve
from .errors import NumericDomainError

__all__ = [
    "MeanValueSeries",
    "PrimeSumSeries",
    "mean_value_series",
    "prime_sums",
    "euler_product_truncated",
    "min_euler_factor",
    "euler_factors",
]

_BLOCK = 1 << 16


class _Kahan:
    """Compensated accumulator; works for float and complex alike."""

    __slots__ = ("total", "carry")

    def __init__(self):
        self.total = 0.0 + 0.0j
        self.carry = 0.0 + 0.0j

    def add(self, v):
        y = v - self.carry
        t = self.total + y
        self.carry = (t - self.total) - y
        self.total = t


def _checkpoint_list(checkpoints) -> list[int]:
    cps = [int(math.floor(c)) for c in checkpoints]
    if not cps:
        raise ValueError("at least one checkpoint is required")
    if any(c < 1 for c in cps):
        raise ValueError("checkpoints must be >= 1")
    if any(b < a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be ascending")
    return cps


@dataclass(frozen=True)
class MeanValueSeries:
    """Summatory values at ascending checkpoints (all complex arrays)."""

    checkpoints: np.ndarray
    m_values: np.ndarray
    k_values: np.ndarray
    log_sums: np.ndarray


@dataclass(frozen=True)
class PrimeSumSeries:
    checkpoints: np.ndarray
    z_values: np.ndarray
    z1_values: np.ndarray


def mean_value_series(rule: rules.PrimePowerRule, checkpoints,
                      table: sieve.SpfTable) -> MeanValueSeries:
    """Exact partial sums of f, f log, and f/n at each checkpoint."""
    cps = _checkpoint_list(checkpoints)
    if cps[-1] > table.limit:
        raise ValueError(f"checkpoint {cps[-1]} beyond table limit {table.limit}")
    vals = rules.values_up_to(rule, table)
    finite = np.isfinite(vals[1 : cps[-1] + 1])
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0]) + 1
        raise NumericDomainError(f"|f(n)| left the floating range at n={bad}")

    acc_m, acc_k, acc_l = _Kahan(), _Kahan(), _Kahan()
    out_m, out_k, out_l = [], [], []
    pos = 1
    for c in cps:
        while pos <= c:
            hi = min(pos + _BLOCK, c + 1)
            v = vals[pos:hi]
            n = np.arange(pos, hi, dtype=np.float64)
            acc_m.add(v.sum())
            acc_k.add((v * np.log(n)).sum())
            acc_l.add((v / n).sum())
            pos = hi
        out_m.append(acc_m.total)
        out_k.append(acc_k.total)
        out_l.append(acc_l.total)
    return MeanValueSeries(
        checkpoints=np.asarray(cps, dtype=np.int64),
        m_values=np.asarray(out_m, dtype=np.complex128),
        k_values=np.asarray(out_k, dtype=np.complex128),
        log_sums=np.asarray(out_l, dtype=np.complex128),
    )


def _prefix_at(values: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    """Compensated prefix sums ``sum(values[:cut])`` for ascending cuts."""
    acc = _Kahan()
    out = np.empty(len(cuts), dtype=np.complex128)
    prev = 0
    for i, cut in enumerate(cuts):
        pos = prev
        while pos < cut:
            hi = min(pos + _BLOCK, cut)
            acc.add(values[pos:hi].sum())
            pos = hi
        prev = cut
        out[i] = acc.total
    return out


def prime_sums(rule: rules.PrimePowerRule, checkpoints,
               primes: np.ndarray | None = None) -> PrimeSumSeries:
    """Partial prime sums ``sum_{p<=y} f(p)/p`` and ``sum f(p) log p / p``."""
    cps = _checkpoint_list(checkpoints)
    if primes is None:
        primes = sieve.primes_up_to(cps[-1])
    else:
        primes = primes[primes <= cps[-1]]
    v = rule.values_on_primes(primes)
    pf = primes.astype(np.float64)
    cuts = np.searchsorted(primes, cps, side="right")
    z = _prefix_at(v / pf, cuts)
    z1 = _prefix_at(v * np.log(pf) / pf, cuts)
    return PrimeSumSeries(checkpoints=np.asarray(cps, dtype=np.int64),
                          z_values=z, z1_values=z1)


def euler_factors(rule: rules.PrimePowerRule, x: int,
                  primes: np.ndarray | None = None):
    """Per-prime truncated Euler factors ``sum_{p^nu<=x} f(p^nu)/p^nu``
    for all p <= x, aligned with the returned prime array."""
    if not rule.multiplicative:
        raise ValueError("Euler factors require a multiplicative rule")
    x = int(x)
    if x < 2:
        raise ValueError(f"x must be >= 2, got {x}")
    if primes is None:
        primes = sieve.primes_up_to(x)
    else:
        primes = primes[primes <= x]
    v1 = rule.values_on_primes(primes)
    factors = 1.0 + v1 / primes.astype(np.float64)
    root = math.isqrt(x)
    small = primes[primes <= root]
    for i, p in enumerate(small):
        p = int(p)
        q, nu = p * p, 2
        extra = 0.0 + 0.0j
        while q <= x:
            extra += rule.value(p, nu) / q
            q *= p
            nu += 1
        factors[i] = factors[i] + (extra.real if factors.dtype == np.float64 else extra)
    if not np.all(np.isfinite(factors)):
        bad = primes[int(np.flatnonzero(~np.isfinite(factors))[0])]
        raise NumericDomainError(f"Euler factor non-finite at p={int(bad)}")
    return primes, factors


def euler_product_truncated(rule: rules.PrimePowerRule, x: int,
                            primes: np.ndarray | None = None) -> complex:
    """Truncated Euler product ``prod_{p<=x} sum_{p^nu<=x} f(p^nu)/p^nu``.

    All prime powers beyond x are cut, consistent with every summatory
    quantity here being a finite truncation (the untruncated product is out
    of scope by design).
    """
    _, factors = euler_factors(rule, x, primes)
    return complex(np.prod(factors.astype(np.complex128)))


def min_euler_factor(rule: rules.PrimePowerRule, x: int,
                     primes: np.ndarray | None = None) -> float:
    """Smallest modulus of a truncated Euler factor over p <= x."""
    _, factors = euler_factors(rule, x, primes)
    return float(np.min(np.abs(factors)))
