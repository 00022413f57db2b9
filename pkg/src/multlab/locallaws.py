"""Distribution of restricted prime-factor counts Omega(n; E) / omega(n; E).

One streaming pass produces the exact histogram ``N_m = #{n <= x :
count(n; E) = m}``; on top of it the module evaluates the two Poisson-type
predictions

* crude:   ``x e^{-E(x)} E(x)^m / m!``,
* refined: ``S(x; r, E) * E(x)^m / (m! e^m)`` at ``r = m / E(x)``,

where ``S(x; z, E) = sum_{n<=x} z^{count(n;E)}`` is computed exactly (the
generating sum, evaluated either through the histogram or independently by
the multiplicative sieve kernel).  Predictions are formed in log space so
``E^m / m!`` never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import meanvalues, primesets, rules, sieve
from .errors import DegenerateInputError, NumericDomainError

__all__ = [
    "prime_reciprocal_sum",
    "factor_count_histogram",
    "generating_sum",
    "generating_sum_from_counts",
    "geometric_euler_product",
    "theta_window",
    "LocalLawReport",
    "local_law_report",
]


def prime_reciprocal_sum(prime_set: primesets.PrimeSet, x: int,
                         primes: np.ndarray | None = None) -> float:
    """Exact ``sum_{p <= x, p in E} 1/p``."""
    if x < 2:
        return 0.0
    if primes is None:
        primes = sieve.primes_up_to(int(x))
    else:
        primes = primes[primes <= x]
    mask = prime_set.mask(primes)
    return float(np.sum(1.0 / primes[mask].astype(np.float64)))


def _members(prime_set: primesets.PrimeSet, x: int,
             primes: np.ndarray | None) -> np.ndarray:
    if primes is None:
        primes = sieve.primes_up_to(int(x))
    else:
        primes = primes[primes <= x]
    return primes[prime_set.mask(primes)]


def factor_count_histogram(prime_set: primesets.PrimeSet, x: int,
                           mode: str = "Omega",
                           primes: np.ndarray | None = None,
                           threads: int = 1) -> np.ndarray:
    """Histogram ``N_m`` of the number of prime factors of n <= x inside E.

    ``mode="Omega"`` counts with multiplicity, ``"omega"`` without.  The
    returned int64 array satisfies ``sum(N) = x`` and ``N[0]`` counts n = 1
    plus the integers free of E-primes.
    """
    x = int(x)
    members = _members(prime_set, x, primes)
    counts = sieve.prime_factor_counts(x, members, mode=mode, threads=threads)
    return np.bincount(counts[1 : x + 1]).astype(np.int64)


def generating_sum(prime_set: primesets.PrimeSet, z: complex, x: int,
                   mode: str = "Omega",
                   table: sieve.SpfTable | None = None) -> complex:
    """Exact ``sum_{n<=x} z^{count(n; E)}`` by streaming the multiplicative
    rule ``z^count`` over [1, x] (independent of the histogram route).

    ``0^0 = 1``: the term at n = 1 (and any n free of E-primes) is 1 when
    z = 0.  |z| > 2 is admitted but guarded against overflow.
    """
    x = int(x)
    if table is None or table.limit < x:
        table = sieve.build_spf(x)
    rule = rules.z_pow_omega_E(z, prime_set, mode=mode)
    series = meanvalues.mean_value_series(rule, [x], table)
    val = complex(series.m_values[0])
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise NumericDomainError(f"generating sum overflowed at |z|={abs(z):g}, x={x}")
    return val


def generating_sum_from_counts(hist: np.ndarray, z: complex) -> complex:
    """``sum_m N_m z^m`` from a histogram (the polynomial route)."""
    return complex(np.polynomial.polynomial.polyval(complex(z), hist.astype(np.complex128)))


def geometric_euler_product(prime_set: primesets.PrimeSet, z: complex, x: int,
                            primes: np.ndarray | None = None) -> complex:
    """Truncated product ``prod_{p in E, p <= x} (1 - z/p)^{-1}``.

    The untruncated product continues over all of E; the cut at x is
    reported by :func:`geometric_euler_tail_factor` rather than hidden.
    """
    members = _members(prime_set, int(x), primes)
    if len(members) == 0:
        return 1.0 + 0.0j
    factors = 1.0 - complex(z) / members.astype(np.float64)
    pole = np.abs(factors) < 1e-12
    if pole.any():
        p = int(members[int(np.flatnonzero(pole)[0])])
        raise DegenerateInputError(f"pole of the geometric factor at z = p = {p}")
    return complex(1.0 / np.prod(factors))


def geometric_euler_tail_factor(prime_set: primesets.PrimeSet, z: complex,
                                x: int, primes: np.ndarray | None = None) -> float:
    """Magnitude of the last included factor minus one: a cheap upper
    indicator for the truncation error of the geometric product."""
    members = _members(prime_set, int(x), primes)
    if len(members) == 0:
        return 0.0
    p = float(members[-1])
    return abs(1.0 / (1.0 - complex(z) / p) - 1.0)


def theta_window(e_of_x: float) -> float:
    """Angular window ``sqrt(log E(x) / E(x))`` used for sweeps of the
    generating sum on circles (meaningful once E(x) > 1)."""
    if e_of_x <= 1.0:
        return math.pi
    return math.sqrt(math.log(e_of_x) / e_of_x)


@dataclass(frozen=True)
class LocalLawReport:
    """Histogram against Poisson-type predictions on one prime set."""

    x: int
    mode: str
    kappa: float
    e_of_x: float
    counts: np.ndarray          # N_m, m = 0..m_max
    crude: np.ndarray           # x e^-E E^m / m!
    refined: np.ndarray         # S(x; m/E) E^m / (m! e^m), NaN outside window
    s_at_r: np.ndarray          # S(x; m/E(x), E), NaN outside window
    in_window: np.ndarray       # kappa E <= m <= (2-kappa) E
    ratio_crude: np.ndarray
    ratio_refined: np.ndarray

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(len(self.counts))

    def as_rows(self) -> list[dict]:
        rows = []
        for m in self.m_values:
            rows.append({
                "m": int(m),
                "N_m": int(self.counts[m]),
                "crude": float(self.crude[m]),
                "refined": float(self.refined[m]),
                "ratio_crude": float(self.ratio_crude[m]),
                "ratio_refined": float(self.ratio_refined[m]),
                "in_sarkozy_range": bool(self.in_window[m]),
            })
        return rows


def local_law_report(prime_set: primesets.PrimeSet, x: int, kappa: float,
                     mode: str = "Omega",
                     primes: np.ndarray | None = None,
                     threads: int = 1) -> LocalLawReport:
    """Exact histogram with crude and refined predictions.

    The refined prediction normalizes by the exact generating sum at the
    real radius ``r = m/E(x)`` (evaluated from the histogram polynomial,
    which the sieve pass makes exact), so the quality of the ``m!``-term is
    isolated from the quality of any asymptotic for S.  Outside the window
    ``[kappa E, (2-kappa) E]`` the refined columns are NaN: the prediction
    is only claimed there.
    """
    if not 0 < kappa < 1:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    x = int(x)
    if primes is None:
        primes = sieve.primes_up_to(x)
    e_x = prime_reciprocal_sum(prime_set, x, primes)
    if e_x <= 0:
        raise DegenerateInputError("E(x) must be positive for a local-law report")
    hist = factor_count_histogram(prime_set, x, mode=mode, primes=primes,
                                  threads=threads)
    m_max = max(len(hist) - 1, int(math.ceil(3.0 * e_x)) + 20)
    counts = np.zeros(m_max + 1, dtype=np.int64)
    counts[: len(hist)] = hist

    m = np.arange(m_max + 1, dtype=np.float64)
    log_e = math.log(e_x)
    log_fact = np.array([math.lgamma(k + 1.0) for k in m])
    crude = np.exp(math.log(x) - e_x + m * log_e - log_fact)

    lo, hi = kappa * e_x, (2.0 - kappa) * e_x
    in_window = (m >= lo) & (m <= hi)
    refined = np.full(m_max + 1, np.nan)
    s_at_r = np.full(m_max + 1, np.nan)
    for k in np.flatnonzero(in_window):
        r = k / e_x
        s = generating_sum_from_counts(counts, r).real
        s_at_r[k] = s
        refined[k] = s * math.exp(k * log_e - log_fact[k] - k)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_crude = counts / crude
        ratio_refined = counts / refined
    return LocalLawReport(x=x, mode=mode, kappa=kappa, e_of_x=e_x,
                          counts=counts, crude=crude, refined=refined,
                          s_at_r=s_at_r, in_window=in_window,
                          ratio_crude=ratio_crude, ratio_refined=ratio_refined)
