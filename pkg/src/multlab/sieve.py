"""Prime tables and factorization of every integer up to a limit.

The central object is the smallest-prime-factor table (:class:`SpfTable`),
built by a linear sieve, from which the prime-power factorization of any
``n <= limit`` is recovered in ``O(log n)`` divisions.  On top of it the
module offers

* streaming enumeration of ``(n, factorization)`` over ``[1, limit]`` in
  segments (:func:`stream_factorizations`),
* bulk array evaluation of multiplicative / additive functions given their
  values on prime powers (:func:`multiplicative_values`,
  :func:`additive_values`), used by the heavier numeric passes,
* a segment-sieved ascending prime list (:func:`primes_up_to`) that does not
  need a full table, and
* prime-factor counting arrays restricted to a prime subset
  (:func:`prime_factor_counts`).

Memory bounds: the table stores one ``uint32`` per integer, so ``10**8``
costs ~400 MB and is the practical ceiling for a full table
(:data:`SPF_TABLE_MAX`).  ``primes_up_to`` works in segments of
:data:`DEFAULT_SEGMENT` integers and is comfortable up to ``10**9``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from numba import njit

from .errors import ResourceLimitError

__all__ = [
    "DEFAULT_SEGMENT",
    "SPF_TABLE_MAX",
    "Factorization",
    "SegmentPlan",
    "SpfTable",
    "build_spf",
    "factorize",
    "primes_up_to",
    "stream_factorizations",
    "prime_factor_counts",
    "multiplicative_values",
    "additive_values",
]

#: Integers per streaming segment; segments tile [1, limit] without overlap.
DEFAULT_SEGMENT = 1 << 22

#: Largest limit for which a full smallest-prime-factor table is allowed
#: (4 bytes per entry; 10**8 -> ~400 MB).  Streaming operations go further.
SPF_TABLE_MAX = 200_000_000

#: A prime-power factorization: ordered list of (p, nu), strictly
#: increasing in p, with nu >= 1.  The empty list encodes n = 1.
Factorization = list[tuple[int, int]]


@njit(cache=True)
def _fill_spf_linear(spf, primes):
    """Linear sieve: each composite is struck once by its smallest prime."""
    limit = spf.shape[0] - 1
    count = 0
    for i in range(2, limit + 1):
        if spf[i] == 0:
            spf[i] = i
            primes[count] = i
            count += 1
        si = np.int64(spf[i])
        for j in range(count):
            p = np.int64(primes[j])
            if p > si:
                break
            ip = i * p
            if ip > limit:
                break
            spf[ip] = p
    return count


@dataclass(frozen=True)
class SpfTable:
    """Smallest-prime-factor table over ``[2, limit]``.

    Attributes
    ----------
    limit : int
        Inclusive upper bound covered by the table.
    spf : np.ndarray
        ``uint32`` array with ``spf[n]`` = smallest prime factor of ``n``
        for ``2 <= n <= limit`` (``spf[0] = spf[1] = 0``).
    primes : np.ndarray
        Ascending ``int64`` array of all primes ``<= limit``.
    """

    limit: int
    spf: np.ndarray
    primes: np.ndarray
    _rank: dict = field(default_factory=dict, repr=False, compare=False)

    def prime_rank(self) -> np.ndarray:
        """uint32 array mapping each prime p <= limit to its index in `primes`."""
        if "rank" not in self._rank:
            rank = np.zeros(self.limit + 1, dtype=np.uint32)
            rank[self.primes] = np.arange(len(self.primes), dtype=np.uint32)
            self._rank["rank"] = rank
        return self._rank["rank"]

    def factorize(self, n: int) -> Factorization:
        return factorize(n, self)


def build_spf(limit: int) -> SpfTable:
    """Build the smallest-prime-factor table for ``[2, limit]``.

    Parameters
    ----------
    limit : int
        Inclusive bound, ``2 <= limit <= SPF_TABLE_MAX``.

    Raises
    ------
    ValueError
        If ``limit < 2``.
    ResourceLimitError
        If ``limit`` exceeds :data:`SPF_TABLE_MAX`.
    """
    if limit < 2:
        raise ValueError(f"spf table limit must be >= 2, got {limit}")
    if limit > SPF_TABLE_MAX:
        raise ResourceLimitError(
            f"full spf table capped at {SPF_TABLE_MAX} (4 bytes/entry); "
            f"use primes_up_to / streaming for limit={limit}"
        )
    spf = np.zeros(limit + 1, dtype=np.uint32)
    # pi(x) < 1.26 x / log x for x >= 17
    cap = max(16, int(1.3 * limit / math.log(limit)) + 16)
    primes = np.zeros(cap, dtype=np.int64)
    count = _fill_spf_linear(spf, primes)
    return SpfTable(limit=limit, spf=spf, primes=primes[:count].copy())


def factorize(n: int, table: SpfTable) -> Factorization:
    """Prime-power factorization of ``n`` via the table, ascending in p.

    ``n = 1`` yields the empty list.  Raises ``ValueError`` outside
    ``[1, table.limit]``.
    """
    if n < 1 or n > table.limit:
        raise ValueError(f"n={n} outside factorizable range [1, {table.limit}]")
    out: Factorization = []
    spf = table.spf
    while n > 1:
        p = int(spf[n])
        nu = 0
        while n % p == 0:
            n //= p
            nu += 1
        out.append((p, nu))
    return out


def _dense_primes(limit: int) -> np.ndarray:
    """Plain boolean sieve, used for base primes and small limits."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def primes_up_to(limit: int, segment: int = DEFAULT_SEGMENT) -> np.ndarray:
    """All primes ``<= limit`` in ascending order, as an ``int64`` array.

    Uses a dense sieve below one segment length and a segmented sieve above,
    so memory stays ``O(segment + pi(limit))``.
    """
    if limit < 0:
        raise ValueError(f"limit must be >= 0, got {limit}")
    if limit <= segment:
        return _dense_primes(limit)
    base = _dense_primes(math.isqrt(limit))
    parts = [base[base <= limit]]
    lo = int(base[-1]) + 1
    while lo <= limit:
        hi = min(lo + segment, limit + 1)
        flags = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            start = (-lo) % p
            first = lo + start
            if first == p:  # p itself sits in this segment; keep it
                start += p
            flags[start::p] = False
        parts.append(np.flatnonzero(flags).astype(np.int64) + lo)
        lo = hi
    return np.concatenate(parts)


@dataclass(frozen=True)
class SegmentPlan:
    """Tiling of ``[1, limit]`` into half-open slices of ``segment_length``."""

    limit: int
    segment_length: int = DEFAULT_SEGMENT

    def __post_init__(self):
        if self.limit < 1:
            raise ValueError(f"plan limit must be >= 1, got {self.limit}")
        if self.segment_length < 1:
            raise ValueError("segment_length must be >= 1")

    def bounds(self) -> Iterable[tuple[int, int]]:
        lo = 1
        while lo <= self.limit:
            hi = min(lo + self.segment_length, self.limit + 1)
            yield lo, hi
            lo = hi


def stream_factorizations(
    limit: int,
    visitor: Callable[[int, Factorization], None],
    plan: SegmentPlan | None = None,
) -> None:
    """Invoke ``visitor(n, factorization)`` once per ``n`` in ``[1, limit]``.

    Visits ascend within each segment and segments ascend, so the overall
    order is ``1, 2, ..., limit``.  Exceptions raised by the visitor abort
    the stream and propagate.  This is the reference fold; the bulk numeric
    passes use :func:`multiplicative_values` / :func:`additive_values`.
    """
    if plan is None:
        plan = SegmentPlan(limit=limit)
    elif plan.limit != limit:
        raise ValueError("plan.limit disagrees with limit")
    base = _dense_primes(math.isqrt(limit))
    for lo, hi in plan.bounds():
        rem = np.arange(lo, hi, dtype=np.int64)
        width = hi - lo
        facs: list[Factorization] = [[] for _ in range(width)]
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            for i in range((-lo) % p, width, p):
                v = int(rem[i])
                nu = 0
                while v % p == 0:
                    v //= p
                    nu += 1
                if nu:
                    rem[i] = v
                    facs[i].append((p, nu))
        for i in range(width):
            v = int(rem[i])
            if v > 1:
                facs[i].append((v, 1))
            visitor(lo + i, facs[i])


def prime_factor_counts(
    limit: int,
    primes: np.ndarray,
    mode: str = "Omega",
    threads: int = 1,
) -> np.ndarray:
    """Array ``c`` with ``c[n]`` = number of prime factors of ``n`` drawn
    from ``primes``, for every ``n <= limit``.

    ``mode="Omega"`` counts with multiplicity, ``mode="omega"`` without.
    Strikes ``counts[p**k :: p**k] += 1`` per prime power, so the cost is
    ``limit * sum(1/p)`` plus one slice per prime.  Counts fit ``uint8``
    (``Omega(n) <= log2(n) < 64``).  ``threads`` > 1 splits the prime list
    and merges per-thread count arrays by addition (exact, order-free).
    """
    if mode not in ("Omega", "omega"):
        raise ValueError(f"mode must be 'Omega' or 'omega', got {mode!r}")
    if threads > 1 and len(primes) >= 1024:
        from concurrent.futures import ThreadPoolExecutor

        chunks = np.array_split(primes, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(lambda ch: prime_factor_counts(limit, ch, mode), chunks)
            )
        total = parts[0]
        for part in parts[1:]:
            total += part
        return total
    counts = np.zeros(limit + 1, dtype=np.uint8)
    for p in primes:
        p = int(p)
        if p > limit:
            break
        counts[p::p] += 1
        if mode == "Omega":
            q = p * p
            while q <= limit:
                counts[q::q] += 1
                q *= p
    return counts


# ---------------------------------------------------------------------------
# Bulk evaluation kernels.
#
# Both kernels walk n = 2..limit once, maintaining for each n the exponent of
# its smallest prime factor and the complementary "p-free" part, so the value
# at n is one table lookup plus one multiply / add against an already
# computed smaller index.  Prime-power values with nu >= 2 (there are only
# ~pi(sqrt(limit)) * log(limit) of them) are found by binary search in a
# sorted key table.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _mult_kernel(spf, rank, v1, pp_keys, pp_vals, out):
    limit = spf.shape[0] - 1
    expo = np.zeros(limit + 1, dtype=np.uint8)
    pfree = np.zeros(limit + 1, dtype=np.uint32)
    out[0] = 0
    out[1] = 1
    for n in range(2, limit + 1):
        p = np.int64(spf[n])
        q = n // p
        if q % p != 0:
            expo[n] = 1
            pfree[n] = np.uint32(q)
            out[n] = out[q] * v1[rank[p]]
        else:
            e = expo[q] + 1
            expo[n] = e
            pfree[n] = pfree[q]
            key = p
            for _ in range(e - 1):
                key *= p
            lo, hi = 0, pp_keys.shape[0]
            while lo < hi:
                mid = (lo + hi) >> 1
                if pp_keys[mid] < key:
                    lo = mid + 1
                else:
                    hi = mid
            out[n] = out[np.int64(pfree[n])] * pp_vals[lo]


@njit(cache=True, nogil=True)
def _add_kernel(spf, rank, v1, pp_keys, pp_vals, out):
    limit = spf.shape[0] - 1
    expo = np.zeros(limit + 1, dtype=np.uint8)
    pfree = np.zeros(limit + 1, dtype=np.uint32)
    out[0] = 0
    out[1] = 0
    for n in range(2, limit + 1):
        p = np.int64(spf[n])
        q = n // p
        if q % p != 0:
            expo[n] = 1
            pfree[n] = np.uint32(q)
            out[n] = out[q] + v1[rank[p]]
        else:
            e = expo[q] + 1
            expo[n] = e
            pfree[n] = pfree[q]
            key = p
            for _ in range(e - 1):
                key *= p
            lo, hi = 0, pp_keys.shape[0]
            while lo < hi:
                mid = (lo + hi) >> 1
                if pp_keys[mid] < key:
                    lo = mid + 1
                else:
                    hi = mid
            out[n] = out[np.int64(pfree[n])] + pp_vals[lo]


def _run_kernel(kernel, table: SpfTable, v1, pp_keys, pp_vals, dtype):
    out = np.empty(table.limit + 1, dtype=dtype)
    kernel(
        table.spf,
        table.prime_rank(),
        np.ascontiguousarray(v1, dtype=dtype),
        pp_keys,
        np.ascontiguousarray(pp_vals, dtype=dtype),
        out,
    )
    return out


def multiplicative_values(table, v1, pp_keys, pp_vals, dtype=np.complex128):
    """Values of the multiplicative function with prime values ``v1`` (indexed
    like ``table.primes``) and higher prime-power values ``pp_vals`` at the
    sorted keys ``pp_keys = p**nu (nu >= 2)``, for every ``n <= limit``.

    ``out[1] = 1``; ``out[0]`` is a padding zero.
    """
    return _run_kernel(_mult_kernel, table, v1, pp_keys, pp_vals, dtype)


def additive_values(table, v1, pp_keys, pp_vals, dtype=np.float64):
    """Additive analogue of :func:`multiplicative_values` (``out[1] = 0``)."""
    return _run_kernel(_add_kernel, table, v1, pp_keys, pp_vals, dtype)
