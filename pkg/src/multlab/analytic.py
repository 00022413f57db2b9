"""Upper-bound and main-term machinery for mean values.

Contents:

* prime Dirichlet sums on vertical lines and the segment-weighted sup norm
  of ``exp`` of them (:func:`prime_dirichlet_sum`, :func:`segment_sup_norm`),
* the resulting mean-value upper bound assembled from an alpha-integral,
  a ``1/sqrt(T)`` term and a ``log log x / T`` tail (:func:`halasz_upper_bound`),
* the twisted-distance minimum over ``|tau| <= T`` and the decay bound
  ``M(x;r) ((1+m) e^{-m} + 1/sqrt(T))`` (:func:`min_twisted_distance`,
  :func:`halasz_decay_bound`),
* the Wirsing-type main term ``e^{-gamma rho} x / (Gamma(rho) log x)`` times
  the truncated Euler product (:func:`wirsing_main_term`) and the
  comparison main term ``M(x;r) * prod(factor ratios)``
  (:func:`comparison_prediction`),
* exact hypothesis diagnostics for the main-term theorems
  (:func:`hypothesis_diagnostics`),
* the pretentious distance, Gallagher's mean-value inequality for Dirichlet
  polynomials, and the needed special functions.

Suprema over continuous tau ranges are replaced by documented grids with
local refinement; every grid is configurable through
:class:`LineSampleGrid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import meanvalues, rules, sieve
from .errors import DegenerateInputError

__all__ = [
    "EULER_GAMMA",
    "LineSampleGrid",
    "HalaszReport",
    "HypothesisParams",
    "HypothesisReport",
    "prime_dirichlet_sum",
    "segment_sup_norm",
    "halasz_upper_bound",
    "min_twisted_distance",
    "halasz_decay_bound",
    "wirsing_main_term",
    "comparison_prediction",
    "hypothesis_diagnostics",
    "pretentious_distance_sq",
    "gallagher_inequality_check",
    "gamma_real",
    "euler_gamma",
]

#: Euler's constant, stored to 1e-15.
EULER_GAMMA = 0.5772156649015328606

_CHUNK_BUDGET = 4_000_000  # complex exps per tau-chunk in the grid scans


def gamma_real(rho: float) -> float:
    """Gamma function on the positive reals (>= 1e-12 relative accuracy)."""
    if rho <= 0:
        raise ValueError(f"gamma_real needs rho > 0, got {rho}")
    return math.gamma(rho)


def euler_gamma() -> float:
    return EULER_GAMMA


@dataclass(frozen=True)
class LineSampleGrid:
    """Sampling policy for sup norms over vertical unit segments.

    ``tau_step`` is the grid step on a unit segment (must be <= 1/8); near
    tau = 0, where the prime sums vary fastest, the step is additionally
    capped at ``1 / (zero_step_factor * log x)``.
    """

    tau_step: float = 1.0 / 64.0
    zero_step_factor: float = 8.0

    def __post_init__(self):
        if not 0 < self.tau_step <= 0.125:
            raise ValueError(f"tau_step must lie in (0, 1/8], got {self.tau_step}")
        if self.zero_step_factor <= 0:
            raise ValueError("zero_step_factor must be positive")

    def segment_taus(self, k: int, x: float) -> np.ndarray:
        step = self.tau_step
        if k == 0:
            step = min(step, 1.0 / (self.zero_step_factor * math.log(x)))
        n = max(2, int(math.ceil(1.0 / step)) + 1)
        return k + np.linspace(-0.5, 0.5, n)


def _dirichlet_grid(logp: np.ndarray, coeffs: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """``sum_p coeffs_p e^{-i tau log p}`` for every tau, chunked."""
    out = np.empty(len(taus), dtype=np.complex128)
    chunk = max(1, _CHUNK_BUDGET // max(1, len(logp)))
    for i in range(0, len(taus), chunk):
        t = taus[i : i + chunk]
        out[i : i + chunk] = np.exp(-1j * t[:, None] * logp[None, :]) @ coeffs
    return out


def prime_dirichlet_sum(rule: rules.PrimePowerRule, s: complex, x: int,
                        primes: np.ndarray | None = None) -> complex:
    """Exact finite sum ``sum_{p<=x} f(p) / p^s``."""
    if primes is None:
        primes = sieve.primes_up_to(int(x))
    else:
        primes = primes[primes <= x]
    v = rule.values_on_primes(primes).astype(np.complex128)
    pf = primes.astype(np.float64)
    return complex(np.sum(v * np.exp(-s * np.log(pf))))


def segment_sup_norm(rule: rules.PrimePowerRule, alpha: float, T: float, x: int,
                     grid: LineSampleGrid | None = None,
                     primes: np.ndarray | None = None,
                     prime_vals: np.ndarray | None = None) -> float:
    """Weighted sup norm of ``|exp(prime Dirichlet sum)|`` on unit segments.

    Returns ``sqrt( sum_{|k|<=T} (k^2+1)^{-1} * sup_seg |e^{v(1+alpha+ik+itau')}|^2 )``
    with the supremum over ``|tau'| <= 1/2`` taken on the documented grid.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    grid = grid or LineSampleGrid()
    if primes is None:
        primes = sieve.primes_up_to(int(x))
    if prime_vals is None:
        prime_vals = rule.values_on_primes(primes).astype(np.complex128)
    logp = np.log(primes.astype(np.float64))
    coeffs = prime_vals * np.exp(-(1.0 + alpha) * logp)
    total = 0.0
    for k in range(-int(math.floor(T)), int(math.floor(T)) + 1):
        taus = grid.segment_taus(k, x)
        re_v = _dirichlet_grid(logp, coeffs, taus).real
        total += math.exp(2.0 * float(re_v.max())) / (k * k + 1)
    return math.sqrt(total)


@dataclass(frozen=True)
class HalaszReport:
    """Assembled upper bound for |M(x; f)| and its three constituents."""

    integral_term: float
    sqrtT_term: float
    tail_term: float
    rhs: float
    drop_tail: bool
    x: int
    T: float
    alpha_nodes: np.ndarray = field(repr=False)
    h_values: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "integral_term": self.integral_term,
            "sqrtT_term": self.sqrtT_term,
            "tail_term": self.tail_term,
            "rhs": self.rhs,
            "drop_tail": self.drop_tail,
            "x": self.x,
            "T": self.T,
        }


def _check_majorant(f, r, primes, f_vals=None, r_vals=None, tol=1e-9):
    fv = f.values_on_primes(primes) if f_vals is None else f_vals
    rv = r.values_on_primes(primes) if r_vals is None else r_vals
    bad = np.abs(fv) > np.real(rv) + tol
    if bad.any():
        p = int(primes[int(np.flatnonzero(bad)[0])])
        raise ValueError(f"|f(p)| <= r(p) violated at p={p}")
    return fv, np.real(rv)


def halasz_upper_bound(f: rules.PrimePowerRule, r: rules.PrimePowerRule, x: int,
                       T: float | None = None, drop_tail: bool = False,
                       grid: LineSampleGrid | None = None,
                       primes: np.ndarray | None = None) -> HalaszReport:
    """Mean-value upper bound ``(x/log x) * (alpha-integral + e^Z/sqrt(T)
    + e^Z log log x / T)``.

    The alpha-integral runs over geometric nodes from ``1/log x`` to 1 (ratio
    ``2^{1/8}``), trapezoid rule in ``log alpha``; the slowly varying
    integrand makes this quadrature exact for constants.  ``drop_tail``
    omits the last term (legitimate when the prime sums of r keep growing
    between y and x at every scale).  ``T`` defaults to ``log x``.
    """
    x = int(x)
    if x < 3:
        raise ValueError(f"x must be >= 3, got {x}")
    if T is None:
        T = math.log(x)
    T = max(float(T), 1.0)
    grid = grid or LineSampleGrid()
    if primes is None:
        primes = sieve.primes_up_to(x)
    fv, rv = _check_majorant(f, r, primes)
    logx = math.log(x)
    z_r = float(np.sum(rv / primes.astype(np.float64)))

    lo = math.log(1.0 / logx)
    n_nodes = max(2, int(math.ceil(-lo / (math.log(2.0) / 8.0))) + 1)
    log_alphas = np.linspace(lo, 0.0, n_nodes)
    alphas = np.exp(log_alphas)
    h_vals = np.array([
        segment_sup_norm(f, float(a), T, x, grid, primes, prime_vals=fv.astype(np.complex128))
        for a in alphas
    ])
    integral = float(np.trapezoid(h_vals, log_alphas))
    sqrt_term = math.exp(z_r) / math.sqrt(T)
    tail_term = math.exp(z_r) * math.log(logx) / T
    rhs = (x / logx) * (integral + sqrt_term + (0.0 if drop_tail else tail_term))
    return HalaszReport(integral_term=integral, sqrtT_term=sqrt_term,
                        tail_term=tail_term, rhs=rhs, drop_tail=drop_tail,
                        x=x, T=T, alpha_nodes=alphas, h_values=h_vals)


def min_twisted_distance(f: rules.PrimePowerRule, r: rules.PrimePowerRule, x: int,
                         T: float, tau_step: float | None = None,
                         refine_rounds: int = 3,
                         primes: np.ndarray | None = None) -> tuple[float, float]:
    """Minimum over ``|tau| <= T`` of ``sum_{p<=x} (r(p) - Re f(p) p^{-i tau})/p``.

    Grid search with step ``1/log x`` (default), then ``refine_rounds``
    local refinements shrinking the step 8x around the running argmin.
    Returns ``(value, argmin tau)``; the value is clamped at 0, which is
    exact whenever ``|f| <= r``.
    """
    x = int(x)
    if primes is None:
        primes = sieve.primes_up_to(x)
    fv, rv = _check_majorant(f, r, primes)
    pf = primes.astype(np.float64)
    logp = np.log(pf)
    coeffs = fv.astype(np.complex128) / pf
    z_r = float(np.sum(rv / pf))

    step = tau_step if tau_step is not None else 1.0 / math.log(x)
    n = max(3, int(math.ceil(2 * T / step)) + 1)
    n += 1 - n % 2  # odd count keeps tau = 0 on the symmetric grid
    taus = np.linspace(-T, T, n)
    best_tau, best_re = _grid_max(logp, coeffs, taus)
    for _ in range(refine_rounds):
        lo = max(-T, best_tau - step)
        hi = min(T, best_tau + step)
        step /= 8.0
        n = max(3, int(math.ceil((hi - lo) / step)) + 1)
        taus = np.linspace(lo, hi, n)
        tau, re = _grid_max(logp, coeffs, taus)
        if re > best_re:
            best_tau, best_re = tau, re
    return max(0.0, z_r - best_re), float(best_tau)


def _grid_max(logp, coeffs, taus):
    re_v = _dirichlet_grid(logp, coeffs, taus).real
    i = int(np.argmax(re_v))
    return float(taus[i]), float(re_v[i])


def halasz_decay_bound(f: rules.PrimePowerRule, r: rules.PrimePowerRule, x: int,
                       T: float, table: sieve.SpfTable,
                       m_value: float | None = None,
                       m_r: float | None = None) -> float:
    """Decay bound ``M(x;r) * ((1 + m) e^{-m} + 1/sqrt(T))`` with
    ``m = min_twisted_distance(f, r, x, T)``.

    ``m_value`` and ``m_r`` allow reusing precomputed pieces; ``M(x;r)`` is
    the exact sieve sum otherwise.
    """
    if m_value is None:
        m_value, _ = min_twisted_distance(f, r, x, T)
    if m_r is None:
        series = meanvalues.mean_value_series(r, [x], table)
        m_r = float(series.m_values[0].real)
    return m_r * ((1.0 + m_value) * math.exp(-m_value) + 1.0 / math.sqrt(T))


def wirsing_main_term(f: rules.PrimePowerRule, rho: float, x: int,
                      primes: np.ndarray | None = None) -> complex:
    """Main term ``e^{-gamma rho} x / (Gamma(rho) log x)`` times the
    truncated Euler product of f."""
    if rho <= 0:
        raise ValueError(f"rho must be positive (Gamma pole), got {rho}")
    x = int(x)
    if x < 3:
        raise ValueError(f"x must be >= 3, got {x}")
    product = meanvalues.euler_product_truncated(f, x, primes)
    scale = math.exp(-EULER_GAMMA * rho) * x / (gamma_real(rho) * math.log(x))
    return scale * product


def comparison_prediction(f: rules.PrimePowerRule, r: rules.PrimePowerRule,
                          x: int, table: sieve.SpfTable,
                          primes: np.ndarray | None = None) -> complex:
    """Comparison main term ``M(x;r) * prod_p (f-factor / r-factor)`` with
    both Euler factors truncated at ``p^nu <= x``."""
    ps, f_factors = meanvalues.euler_factors(f, x, primes)
    _, r_factors = meanvalues.euler_factors(r, x, ps)
    tiny = np.abs(r_factors) < 1e-14
    if tiny.any():
        p = int(ps[int(np.flatnonzero(tiny)[0])])
        raise DegenerateInputError(f"Euler factor of r vanishes at p={p}")
    ratio = complex(np.prod(f_factors.astype(np.complex128) / r_factors))
    series = meanvalues.mean_value_series(r, [x], table)
    return complex(series.m_values[0]) * ratio


# ---------------------------------------------------------------------------
# Hypothesis diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisParams:
    """Parameter block of the effective main-term theorems.

    Constraints checked: ``0 < a <= 1/2``, ``a <= b < 1``, ``A >= 2b``,
    ``2b <= rho <= A``, ``1/sqrt(log x) < eps <= 1/2``, and
    ``0 < delta1 <= (2/3) * beta * b``.
    """

    a: float
    b: float
    A: float
    B: float
    rho: float
    eps: float
    delta1: float

    def validated(self, x: int) -> "HypothesisParams":
        if not 0 < self.a <= 0.5:
            raise ValueError(f"constraint violated: a in (0, 1/2], got a={self.a}")
        if not self.a <= self.b < 1:
            raise ValueError(f"constraint violated: b in [a, 1), got b={self.b}")
        if self.A < 2 * self.b:
            raise ValueError(f"constraint violated: A >= 2b, got A={self.A}, b={self.b}")
        if not 2 * self.b <= self.rho <= self.A:
            raise ValueError(
                f"constraint violated: rho in [2b, A], got rho={self.rho}")
        if not 1.0 / math.sqrt(math.log(x)) < self.eps <= 0.5:
            raise ValueError(
                f"constraint violated: eps in (1/sqrt(log x), 1/2], got eps={self.eps}")
        beta = self.beta()
        if not 0 < self.delta1 <= (2.0 / 3.0) * beta * self.b + 1e-15:
            raise ValueError(
                f"constraint violated: delta1 in (0, 2/3*beta*b], got delta1={self.delta1}")
        return self

    def p_angle(self) -> float:
        return math.pi * self.rho / self.A

    def beta(self) -> float:
        p = self.p_angle()
        return 1.0 - math.sin(p) / p if p != 0 else 0.0

    def h_exponent(self) -> float:
        return (1.0 - self.b) / (min(1.0, self.rho) - self.b)

    def beta0(self) -> float:
        q = 2.0 * math.pi * self.b / self.A
        return 1.0 - math.sin(q) / q if q != 0 else 0.0

    def delta0(self) -> float:
        return self.b * self.beta0() / 3.0


@dataclass(frozen=True)
class HypothesisReport:
    """Exact prime-sum diagnostics against the hypothesis envelopes.

    Ratios compare each left-hand sum with its stated envelope; the short-
    interval statistic is a lower bound, so its *minimum* ratio is reported
    (>= 1 means the hypothesis holds on the whole window).
    """

    closeness_sum: float            # sum (r - Re f)/p vs (beta b / 2) log(1/eps)
    max_ratio_weighted_closeness: float   # sum (r-Re f)^h log p / p vs eps^(d1 h) log y
    max_ratio_slope_deviation: float      # |sum (r - rho) log p / p| vs eps log y
    max_ratio_closeness_tail: float       # sum (r-Re f)^h / p vs eps^(d1 h)
    min_ratio_short_interval: float       # sum_{y<p<=y^(1+e1)} r log p / p vs 4 b e1 log y
    params: dict


def hypothesis_diagnostics(f: rules.PrimePowerRule, r: rules.PrimePowerRule,
                           x: int, params: HypothesisParams,
                           y_grid: np.ndarray | None = None,
                           primes: np.ndarray | None = None) -> HypothesisReport:
    """Evaluate every hypothesis sum exactly and report envelope ratios.

    The default y-grid is geometric in the exponent: ``x^eps, x^{2 eps},
    x^{4 eps}, ..., x``.
    """
    x = int(x)
    params = params.validated(x)
    if primes is None:
        primes = sieve.primes_up_to(x)
    fv = f.values_on_primes(primes)
    rv = np.real(r.values_on_primes(primes)).astype(np.float64)
    pf = primes.astype(np.float64)
    logp = np.log(pf)
    d = np.maximum(rv - np.real(fv), 0.0)

    h = params.h_exponent()
    eps = params.eps
    logx = math.log(x)
    x_eps = math.exp(eps * logx)
    if y_grid is None:
        exps = [eps]
        while exps[-1] < 1.0:
            exps.append(min(1.0, exps[-1] * 2.0))
        y_grid = np.exp(np.array(exps) * logx)
    y_grid = np.asarray(y_grid, dtype=np.float64)

    w_f = 1.0 if f.real_valued else 0.5

    cs = float(np.sum(d / pf))

    cum_dh_logp = np.cumsum(np.power(d, h) * logp / pf)
    cum_dh = np.cumsum(np.power(d, h) / pf)
    cum_slope = np.cumsum((rv - params.rho) * logp / pf)
    cum_r_logp = np.cumsum(rv * logp / pf)
    start = np.searchsorted(primes, x_eps, side="right")
    base_dh_logp = cum_dh_logp[start - 1] if start > 0 else 0.0
    base_dh = cum_dh[start - 1] if start > 0 else 0.0

    def at(cum, y):
        i = np.searchsorted(primes, y, side="right")
        return cum[i - 1] if i > 0 else 0.0

    ratio_16, ratio_17, ratio_19 = 0.0, 0.0, 0.0
    envelope_16 = eps ** (params.delta1 * h)
    for y in y_grid:
        if y < x_eps or y > x * (1 + 1e-12):
            continue
        logy = math.log(y)
        lhs16 = at(cum_dh_logp, y) - base_dh_logp
        ratio_16 = max(ratio_16, lhs16 / (envelope_16 * logy))
        lhs17 = abs(at(cum_slope, y))
        ratio_17 = max(ratio_17, lhs17 / (eps * logy))
        lhs19 = at(cum_dh, y) - base_dh
        ratio_19 = max(ratio_19, lhs19 / envelope_16)

    eps1 = math.sqrt(eps)
    y_lo = math.exp(1.0 / eps1)
    y_hi = x ** (1.0 / (1.0 + eps1))
    min_ratio = math.inf
    if y_lo <= y_hi:
        window = [y for y in y_grid if y_lo <= y <= y_hi]
        for endpoint in (y_lo, y_hi):
            window.append(endpoint)
        for y in sorted(set(window)):
            logy = math.log(y)
            lhs = at(cum_r_logp, y ** (1.0 + eps1)) - at(cum_r_logp, y)
            min_ratio = min(min_ratio, lhs / (4.0 * params.b * eps1 * logy))
    return HypothesisReport(
        closeness_sum=cs,
        max_ratio_weighted_closeness=ratio_16,
        max_ratio_slope_deviation=ratio_17,
        max_ratio_closeness_tail=ratio_19,
        min_ratio_short_interval=min_ratio,
        params={
            "a": params.a, "b": params.b, "A": params.A, "B": params.B,
            "rho": params.rho, "eps": params.eps, "delta1": params.delta1,
            "h": h, "beta": params.beta(), "beta0": params.beta0(),
            "delta0": params.delta0(), "p_angle": params.p_angle(),
            "w_f": w_f, "delta": w_f * params.delta1,
            "closeness_envelope": 0.5 * params.beta() * params.b * math.log(1.0 / eps),
        },
    )


# ---------------------------------------------------------------------------
# Pretentious distance and Gallagher's inequality
# ---------------------------------------------------------------------------


def pretentious_distance_sq(f: rules.PrimePowerRule, g: rules.PrimePowerRule,
                            x: int, primes: np.ndarray | None = None) -> float:
    """Squared pretentious distance ``sum_{p<=x} (1 - Re f(p) conj(g(p)))/p``.

    Both rules must sit in the closed unit disk on primes up to x.
    """
    if primes is None:
        primes = sieve.primes_up_to(int(x))
    else:
        primes = primes[primes <= x]
    fv = f.values_on_primes(primes).astype(np.complex128)
    gv = g.values_on_primes(primes).astype(np.complex128)
    for name, v in ((f.name, fv), (g.name, gv)):
        if np.any(np.abs(v) > 1.0 + 1e-9):
            raise ValueError(f"rule {name} leaves the unit disk on primes <= {x}")
    val = float(np.sum((1.0 - np.real(fv * np.conj(gv))) / primes.astype(np.float64)))
    return max(0.0, val)


def gallagher_inequality_check(lambdas, coeffs, T: float,
                               quadrature_step: float | None = None) -> tuple[float, float]:
    """Quadratic-norm check ``int_{-T}^{T} |sum a_n e(lambda_n t)|^2 dt``
    against ``T sum |a_n|^2 #\\{m : |lambda_m - lambda_n| <= 1/T\\}``.

    The integral uses composite Simpson with step at most
    ``1/(32 max(1, max |lambda|))`` (finer than the documented 1/(8 max)
    requirement, so a 2x refinement stays within fractions of a percent);
    ``e(x) = exp(2 pi i x)``.
    """
    lam = np.asarray(lambdas, dtype=np.float64)
    a = np.asarray(coeffs, dtype=np.complex128)
    if lam.ndim != 1 or lam.shape != a.shape:
        raise ValueError("lambdas and coeffs must be 1-d and equally long")
    n = len(lam)
    if n == 0 or n > 10_000:
        raise ValueError(f"need 1 <= N <= 10000 points, got {n}")
    if len(np.unique(lam)) != n:
        raise ValueError("frequencies must be distinct")
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")

    order = np.argsort(lam)
    lam_sorted = lam[order]
    lo_idx = np.searchsorted(lam_sorted, lam - 1.0 / T, side="left")
    hi_idx = np.searchsorted(lam_sorted, lam + 1.0 / T, side="right")
    neighbor_counts = hi_idx - lo_idx
    rhs = float(T * np.sum(np.abs(a) ** 2 * neighbor_counts))

    lam_max = max(1.0, float(np.max(np.abs(lam))))
    step = quadrature_step if quadrature_step is not None else 1.0 / (32.0 * lam_max)
    panels = int(math.ceil(2.0 * T / step))
    panels += panels % 2  # Simpson needs an even panel count
    ts = np.linspace(-T, T, panels + 1)
    values = np.empty(len(ts))
    chunk = max(1, _CHUNK_BUDGET // n)
    for i in range(0, len(ts), chunk):
        t = ts[i : i + chunk]
        s = np.exp(2j * np.pi * t[:, None] * lam[None, :]) @ a
        values[i : i + chunk] = np.abs(s) ** 2
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    lhs = float((ts[1] - ts[0]) / 3.0 * np.dot(w, values))
    return lhs, rhs
