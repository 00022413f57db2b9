"""Experiment configs, dispatch, and report serialization.

This is the boundary layer the HTTP service and the CLI both call: a
validated :class:`ExperimentConfig` goes in, a :class:`RunResult` with a
JSON-able report, optional CSV text, and a run manifest comes out.
Sieve tables are cached process-wide so a resident service pays the build
cost once per size class.
"""

from __future__ import annotations

import csv
import io
import math
import threading
import time
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from . import __version__, analytic, distributions, locallaws, meanvalues
from . import primesets, rules, sieve
from .hashing import uniform01

__all__ = ["ExperimentConfig", "RunResult", "run_experiment", "registry_catalog",
           "EXPERIMENT_KINDS"]

EXPERIMENT_KINDS = ("mean-value", "halasz", "wirsing", "comparison", "local-law",
                    "clt", "omega-phi", "tk", "gallagher", "hypotheses")


class ExperimentConfig(BaseModel):
    """Declarative description of one laboratory run.

    ``functions`` maps role names (f, r, h, lambda, theta) to registry
    specs such as ``tau_rho{rho=0.5}``.  Unknown fields are rejected so
    config typos fail loudly.
    """

    model_config = ConfigDict(extra="forbid")

    experiment: Literal[
        "mean-value", "halasz", "wirsing", "comparison", "local-law",
        "clt", "omega-phi", "tk", "gallagher", "hypotheses"]
    x: int = Field(default=100, ge=2)
    functions: dict[str, str] = Field(default_factory=dict)
    checkpoints: Optional[list[int]] = None
    T: Optional[float] = None
    kappa: float = 0.3
    eps: Optional[float] = None
    rho: Optional[float] = None
    drop_tail: bool = False
    prime_set: str = "all"
    mode: Literal["Omega", "omega"] = "Omega"
    # hypothesis-diagnostics parameter block
    a: Optional[float] = None
    b: Optional[float] = None
    A: Optional[float] = None
    B: Optional[float] = None
    delta1: Optional[float] = None
    # seeded Dirichlet-polynomial instance
    n_points: int = Field(default=50, ge=1, le=10_000)
    lambda_range: float = 8.0
    tau_step: float = 1.0 / 64.0
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    output_name: Optional[str] = None
    format: Literal["csv", "json"] = "csv"


@dataclass
class RunResult:
    report: dict
    csv_text: Optional[str]
    manifest: dict


class _TableCache:
    """Largest-wins cache of the smallest-prime-factor table and prime lists."""

    def __init__(self):
        self._lock = threading.Lock()
        self._table: sieve.SpfTable | None = None
        self._primes: np.ndarray | None = None
        self._counts_limit = -1
        self._counts: np.ndarray | None = None

    def table(self, limit: int) -> sieve.SpfTable:
        with self._lock:
            if self._table is None or self._table.limit < limit:
                self._table = sieve.build_spf(limit)
            return self._table

    def primes(self, limit: int) -> np.ndarray:
        with self._lock:
            if self._primes is None or self._primes[-1] < limit:
                self._primes = sieve.primes_up_to(limit)
            return self._primes[self._primes <= limit]

    def factor_counts(self, limit: int) -> np.ndarray:
        table = self.table(limit)
        with self._lock:
            if self._counts_limit < limit:
                self._counts = sieve.prime_factor_counts(
                    table.limit, table.primes, "Omega")
                self._counts_limit = table.limit
            return self._counts


CACHE = _TableCache()


def registry_catalog() -> dict:
    catalog = rules.registry_catalog()
    catalog["experiments"] = list(EXPERIMENT_KINDS)
    return catalog


def _rule(cfg: ExperimentConfig, role: str, table: sieve.SpfTable | None = None):
    spec = cfg.functions.get(role)
    if spec is None:
        raise ValueError(f"experiment {cfg.experiment!r} needs a function for role {role!r}")
    ctx = rules.RuleContext(table=table)
    return rules.parse_rule(spec, ctx)


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _z_grid_rows(cdf, transform):
    """CSV rows (z, F_x, Phi, gap) on a fixed grid z = -4 .. 4 step 0.05."""
    zs = np.round(np.arange(-4.0, 4.0001, 0.05), 10)
    values = transform(zs)
    f_x = cdf.query(values)
    phi = distributions.standard_normal_cdf(zs)
    return [[float(z), float(f), float(p), float(f - p)]
            for z, f, p in zip(zs, f_x, phi)]


# ---------------------------------------------------------------------------
# Experiment bodies
# ---------------------------------------------------------------------------


def _run_mean_value(cfg: ExperimentConfig) -> RunResult:
    cps = cfg.checkpoints or [cfg.x]
    table = CACHE.table(max(cps))
    f = _rule(cfg, "f", table)
    series = meanvalues.mean_value_series(f, cps, table)
    rows = []
    for i, c in enumerate(series.checkpoints):
        m, k, ls = series.m_values[i], series.k_values[i], series.log_sums[i]
        rows.append([int(c), float(m.real), float(m.imag), float(k.real),
                     float(k.imag), float(ls.real), float(ls.imag)])
    header = ["x", "re_M", "im_M", "re_K", "im_K", "re_logsum", "im_logsum"]
    report = {"schema": "multlab/mean-value/v1", "function": f.name,
              "rows": [dict(zip(header, r)) for r in rows]}
    return RunResult(report, _csv_text(header, rows), {})


def _run_halasz(cfg: ExperimentConfig) -> RunResult:
    f = _rule(cfg, "f")
    r = _rule(cfg, "r")
    grid = analytic.LineSampleGrid(tau_step=cfg.tau_step)
    rep = analytic.halasz_upper_bound(f, r, cfg.x, T=cfg.T,
                                      drop_tail=cfg.drop_tail, grid=grid)
    report = {"schema": "multlab/halasz/v1", "f": f.name, "r": r.name,
              **rep.as_dict()}
    header = ["x", "T", "integral_term", "sqrtT_term", "tail_term", "rhs", "drop_tail"]
    row = [rep.x, float(rep.T), rep.integral_term, rep.sqrtT_term,
           rep.tail_term, rep.rhs, rep.drop_tail]
    return RunResult(report, _csv_text(header, [row]), {})


def _run_wirsing(cfg: ExperimentConfig) -> RunResult:
    if cfg.rho is None:
        raise ValueError("wirsing experiment needs rho")
    table = CACHE.table(cfg.x)
    f = _rule(cfg, "f", table)
    primes = table.primes[table.primes <= cfg.x]
    main = analytic.wirsing_main_term(f, cfg.rho, cfg.x, primes=primes)
    series = meanvalues.mean_value_series(f, [cfg.x], table)
    m = complex(series.m_values[0])
    gap = abs(m / main - 1.0) if main != 0 else math.inf
    report = {"schema": "multlab/wirsing/v1", "f": f.name, "x": cfg.x,
              "rho": cfg.rho, "re_main": main.real, "im_main": main.imag,
              "re_M": m.real, "im_M": m.imag, "relative_gap": gap}
    header = ["x", "rho", "re_main", "im_main", "re_M", "im_M", "relative_gap"]
    row = [cfg.x, cfg.rho, main.real, main.imag, m.real, m.imag, gap]
    return RunResult(report, _csv_text(header, [row]), {})


def _run_comparison(cfg: ExperimentConfig) -> RunResult:
    table = CACHE.table(cfg.x)
    f = _rule(cfg, "f", table)
    r = _rule(cfg, "r", table)
    primes = table.primes[table.primes <= cfg.x]
    pred = analytic.comparison_prediction(f, r, cfg.x, table, primes=primes)
    series = meanvalues.mean_value_series(f, [cfg.x], table)
    m = complex(series.m_values[0])
    report = {"schema": "multlab/comparison/v1", "f": f.name, "r": r.name,
              "x": cfg.x, "re_prediction": pred.real, "im_prediction": pred.imag,
              "re_M": m.real, "im_M": m.imag,
              "abs_gap": abs(m - pred)}
    header = ["x", "re_prediction", "im_prediction", "re_M", "im_M", "abs_gap"]
    row = [cfg.x, pred.real, pred.imag, m.real, m.imag, abs(m - pred)]
    return RunResult(report, _csv_text(header, [row]), {})


def _run_local_law(cfg: ExperimentConfig) -> RunResult:
    prime_set = primesets.parse_prime_set(cfg.prime_set)
    primes = CACHE.primes(cfg.x)
    rep = locallaws.local_law_report(prime_set, cfg.x, cfg.kappa, mode=cfg.mode,
                                     primes=primes, threads=cfg.threads)
    rows = rep.as_rows()
    header = ["m", "N_m", "crude", "refined", "ratio_crude", "ratio_refined",
              "in_sarkozy_range"]
    csv_rows = [[r["m"], r["N_m"], r["crude"], r["refined"], r["ratio_crude"],
                 r["ratio_refined"], r["in_sarkozy_range"]] for r in rows]
    report = {"schema": "multlab/local-law/v1", "prime_set": prime_set.name,
              "x": rep.x, "mode": rep.mode, "kappa": rep.kappa,
              "e_of_x": rep.e_of_x, "rows": rows}
    return RunResult(report, _csv_text(header, csv_rows), {})


def _run_clt(cfg: ExperimentConfig) -> RunResult:
    table = CACHE.table(cfg.x)
    h = _rule(cfg, "h", table)
    r = _rule(cfg, "r", table)
    cdf = distributions.weighted_cdf(h, r, cfg.x, table)
    rep = distributions.gaussian_comparison(h, r, cfg.x, table, cdf=cdf,
                                            primes=table.primes)
    rows = _z_grid_rows(cdf, lambda zs: rep.E_h + zs * rep.D_h)
    report = {"schema": "multlab/clt/v1", "h": h.name, "r": r.name,
              **rep.as_dict()}
    return RunResult(report, _csv_text(["z", "F_x", "Phi", "gap"], rows), {})


def _run_omega_phi(cfg: ExperimentConfig) -> RunResult:
    table = CACHE.table(cfg.x)
    r = _rule(cfg, "r", table)
    counts = CACHE.factor_counts(cfg.x)
    rho = cfg.rho if cfg.rho is not None else 1.0
    rep = distributions.omega_phi_report(r, cfg.x, table, rho=rho, counts=counts)
    h = rules.omega_phi(table, counts)
    cdf = distributions.weighted_cdf(h, r, cfg.x, table)
    big_l = math.log(math.log(cfg.x))
    center, scale = 0.5 * rho * big_l**2, rho * big_l**1.5 / math.sqrt(3.0)
    rows = _z_grid_rows(cdf, lambda zs: center + zs * scale)
    report = {"schema": "multlab/omega-phi/v1", "r": r.name, "rho": rho,
              **rep.as_dict()}
    return RunResult(report, _csv_text(["z", "F_x", "Phi", "gap"], rows), {})


def _run_tk(cfg: ExperimentConfig) -> RunResult:
    table = CACHE.table(cfg.x)
    lam = _rule(cfg, "lambda", table)
    theta = _rule(cfg, "theta", table)
    rep = distributions.turan_kubilius(lam, theta, cfg.x, table)
    report = {"schema": "multlab/tk/v1", "lambda": lam.name, "theta": theta.name,
              "x": cfg.x, **rep.as_dict()}
    header = ["x", "center_re", "center_im", "spread", "lhs",
              "weight_harmonic_sum", "ratio"]
    row = [cfg.x, rep.center.real, rep.center.imag, rep.spread, rep.lhs,
           rep.weight_harmonic_sum, rep.ratio]
    return RunResult(report, _csv_text(header, [row]), {})


def gallagher_instance(seed: int, n_points: int, lambda_range: float):
    """Deterministic frequencies and coefficients for one seeded instance."""
    idx = np.arange(n_points, dtype=np.int64)
    lam = np.unique((uniform01(seed, idx, salt=0x6A11) * 2.0 - 1.0) * lambda_range)
    k = np.arange(len(lam), dtype=np.int64)
    a = ((uniform01(seed, k, salt=0x6A12) * 2.0 - 1.0)
         + 1j * (uniform01(seed, k, salt=0x6A13) * 2.0 - 1.0))
    return lam, a


def _run_gallagher(cfg: ExperimentConfig) -> RunResult:
    T = cfg.T if cfg.T is not None else 1.0
    lam, a = gallagher_instance(cfg.seed, cfg.n_points, cfg.lambda_range)
    lhs, rhs = analytic.gallagher_inequality_check(lam, a, T)
    report = {"schema": "multlab/gallagher/v1", "seed": cfg.seed,
              "n_points": len(lam), "T": T, "lhs": lhs, "rhs": rhs,
              "ratio": lhs / rhs if rhs > 0 else math.inf}
    header = ["seed", "n_points", "T", "lhs", "rhs", "ratio"]
    row = [cfg.seed, len(lam), float(T), lhs, rhs, report["ratio"]]
    return RunResult(report, _csv_text(header, [row]), {})


def _run_hypotheses(cfg: ExperimentConfig) -> RunResult:
    f = _rule(cfg, "f")
    r = _rule(cfg, "r")
    needed = {"a": cfg.a, "b": cfg.b, "A": cfg.A, "B": cfg.B,
              "rho": cfg.rho, "eps": cfg.eps, "delta1": cfg.delta1}
    missing = [k for k, v in needed.items() if v is None]
    if missing:
        raise ValueError(f"hypotheses experiment needs parameters {missing}")
    params = analytic.HypothesisParams(a=cfg.a, b=cfg.b, A=cfg.A, B=cfg.B,
                                       rho=cfg.rho, eps=cfg.eps,
                                       delta1=cfg.delta1)
    rep = analytic.hypothesis_diagnostics(f, r, cfg.x, params)
    report = {"schema": "multlab/hypotheses/v1", "f": f.name, "r": r.name,
              "x": cfg.x,
              "closeness_sum": rep.closeness_sum,
              "max_ratio_weighted_closeness": rep.max_ratio_weighted_closeness,
              "max_ratio_slope_deviation": rep.max_ratio_slope_deviation,
              "max_ratio_closeness_tail": rep.max_ratio_closeness_tail,
              "min_ratio_short_interval": rep.min_ratio_short_interval,
              "params": rep.params}
    header = ["x", "closeness_sum", "max_ratio_weighted_closeness",
              "max_ratio_slope_deviation", "max_ratio_closeness_tail",
              "min_ratio_short_interval"]
    row = [cfg.x, rep.closeness_sum, rep.max_ratio_weighted_closeness,
           rep.max_ratio_slope_deviation, rep.max_ratio_closeness_tail,
           rep.min_ratio_short_interval]
    return RunResult(report, _csv_text(header, [row]), {})


_DISPATCH = {
    "mean-value": _run_mean_value,
    "halasz": _run_halasz,
    "wirsing": _run_wirsing,
    "comparison": _run_comparison,
    "local-law": _run_local_law,
    "clt": _run_clt,
    "omega-phi": _run_omega_phi,
    "tk": _run_tk,
    "gallagher": _run_gallagher,
    "hypotheses": _run_hypotheses,
}


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Dispatch a validated config; attaches the run manifest."""
    start = time.perf_counter()
    result = _DISPATCH[cfg.experiment](cfg)
    wall = time.perf_counter() - start
    sieve_limit = CACHE._table.limit if CACHE._table is not None else 0
    result.manifest = {
        "schema": "multlab/manifest/v1",
        "tool": "multlab",
        "version": __version__,
        "config": cfg.model_dump(),
        "wall_time_s": wall,
        "sieve_limit": sieve_limit,
        "threads": cfg.threads,
    }
    return result
