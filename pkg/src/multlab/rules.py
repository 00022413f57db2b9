"""Multiplicative and additive functions defined by prime-power rules.

A function is represented by its values on prime powers only
(:class:`PrimePowerRule`); the value at a general ``n`` is the product
(multiplicative) or sum (additive) over the prime-power factorization.
The module also provides the two constructions used to reduce a general
multiplicative function to an exponentially multiplicative one:
:func:`exp_companion` (``g(p^nu) = f(p)^nu / nu!``) and its convolution
complement :func:`convolution_factor` with ``f = g * h`` and ``h(p) = 0``.

Rules are immutable; evaluation is pure.  The registry at the bottom maps
the builtin names usable from experiment configs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import primesets, sieve
from .errors import NumericDomainError

__all__ = [
    "EXPONENT_CAP",
    "PrimePowerRule",
    "ClassParams",
    "ClassReport",
    "evaluate",
    "values_up_to",
    "class_membership",
    "exp_companion",
    "convolution_factor",
    "dirichlet_convolve_eval",
    "truncated",
    "RuleContext",
    "parse_rule",
    "registry_catalog",
]

#: Prime-power exponents above this are rejected (p^nu <= 10**12 keeps nu < 40).
EXPONENT_CAP = 63


@dataclass(frozen=True)
class PrimePowerRule:
    """A multiplicative or additive function given by (p, nu) -> value.

    ``value_fn`` must be deterministic.  ``prime_values_fn``, if present,
    vectorizes ``value_fn(p, 1)`` over an int64 array of primes and is what
    the bulk sieve passes call.  ``real_valued`` selects float64 storage in
    those passes.
    """

    kind: str  # "multiplicative" | "additive"
    name: str
    value_fn: Callable[[int, int], complex]
    prime_values_fn: Callable[[np.ndarray], np.ndarray] | None = None
    real_valued: bool = False

    def __post_init__(self):
        if self.kind not in ("multiplicative", "additive"):
            raise ValueError(f"rule kind must be multiplicative or additive, got {self.kind!r}")

    @property
    def multiplicative(self) -> bool:
        return self.kind == "multiplicative"

    def value(self, p: int, nu: int):
        if nu < 1:
            raise ValueError(f"prime-power exponent must be >= 1, got {nu}")
        if nu > EXPONENT_CAP:
            raise ValueError(f"exponent {nu} exceeds cap {EXPONENT_CAP}")
        return self.value_fn(p, nu)

    def values_on_primes(self, primes: np.ndarray) -> np.ndarray:
        dtype = np.float64 if self.real_valued else np.complex128
        if self.prime_values_fn is not None:
            return np.asarray(self.prime_values_fn(primes), dtype=dtype)
        out = np.empty(len(primes), dtype=dtype)
        for i, p in enumerate(primes):
            v = self.value_fn(int(p), 1)
            out[i] = v.real if self.real_valued and isinstance(v, complex) else v
        return out

    def prime_power_table(self, limit: int):
        """Sorted (keys, values) over p^nu <= limit with nu >= 2."""
        keys: list[int] = []
        vals: list[complex] = []
        for p in sieve_small_primes(math.isqrt(limit)):
            q, nu = p * p, 2
            while q <= limit:
                keys.append(q)
                vals.append(self.value_fn(p, nu))
                q *= p
                nu += 1
        if not keys:  # never dereferenced below limit 4; keep kernels total
            keys, vals = [0], [0.0]
        order = np.argsort(keys)
        dtype = np.float64 if self.real_valued else np.complex128
        k = np.asarray(keys, dtype=np.int64)[order]
        v = np.asarray(vals, dtype=dtype)[order]
        return k, v


def sieve_small_primes(limit: int) -> list[int]:
    return [int(p) for p in sieve.primes_up_to(max(limit, 0))]


def evaluate(rule: PrimePowerRule, factorization: sieve.Factorization):
    """Value of the rule-defined function at the factored integer.

    Empty factorization (n = 1) yields 1 for multiplicative rules and 0 for
    additive ones.  Non-finite rule values raise :class:`NumericDomainError`.
    """
    if rule.multiplicative:
        acc = 1.0 + 0.0j if not rule.real_valued else 1.0
        for p, nu in factorization:
            acc = acc * rule.value(p, nu)
    else:
        acc = 0.0 + 0.0j if not rule.real_valued else 0.0
        for p, nu in factorization:
            acc = acc + rule.value(p, nu)
    if not np.isfinite(complex(acc).real) or not np.isfinite(complex(acc).imag):
        raise NumericDomainError(f"rule {rule.name} produced non-finite value at {factorization}")
    return acc


def values_up_to(rule: PrimePowerRule, table: sieve.SpfTable, dtype=None) -> np.ndarray:
    """Array of rule values at every n <= table.limit (index 0 is padding)."""
    if dtype is None:
        dtype = np.float64 if rule.real_valued else np.complex128
    v1 = rule.values_on_primes(table.primes)
    ppk, ppv = rule.prime_power_table(table.limit)
    if rule.multiplicative:
        return sieve.multiplicative_values(table, v1, ppk, ppv, dtype=dtype)
    return sieve.additive_values(table, v1, ppk, ppv, dtype=dtype)


# ---------------------------------------------------------------------------
# Class membership
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassParams:
    """Bounds defining the admissible class: |f(p)| <= A on primes <= x and
    a prime-power tail sum bounded by B."""

    A: float
    B: float
    x: float

    def __post_init__(self):
        if self.A <= 0 or self.B <= 0:
            raise ValueError("class bounds A and B must be positive")
        if self.x < 2:
            raise ValueError(f"class parameter x must be >= 2, got {self.x}")


@dataclass(frozen=True)
class ClassReport:
    max_prime_value: float
    prime_power_sum: float
    belongs: bool


def class_membership(rule: PrimePowerRule, params: ClassParams,
                     primes: np.ndarray | None = None) -> ClassReport:
    """Exact class statistics: max |f(p)| over p <= x and
    ``sum |f(p^nu)| log(p^nu) / p^nu`` over p^nu <= x, nu >= 2."""
    if not rule.multiplicative:
        raise ValueError("class membership is defined for multiplicative rules")
    x = int(params.x)
    if primes is None:
        primes = sieve.primes_up_to(x)
    else:
        primes = primes[primes <= x]
    vals = rule.values_on_primes(primes)
    max_prime = float(np.max(np.abs(vals))) if len(vals) else 0.0
    tail = 0.0
    for p in sieve_small_primes(math.isqrt(x)):
        q, nu = p * p, 2
        while q <= x:
            tail += abs(rule.value(p, nu)) * math.log(q) / q
            q *= p
            nu += 1
    return ClassReport(max_prime_value=max_prime, prime_power_sum=tail,
                       belongs=(max_prime <= params.A and tail <= params.B))


# ---------------------------------------------------------------------------
# Exponential companion and convolution complement
# ---------------------------------------------------------------------------


def exp_companion(rule: PrimePowerRule, x: float, tail_rho: float | None = None) -> PrimePowerRule:
    """Exponentially multiplicative companion g of a multiplicative rule.

    ``g(p^nu) = f(p)^nu / nu!`` for p <= x.  Beyond x, g vanishes by default;
    with ``tail_rho`` supplied it continues as ``tail_rho^nu / nu!``.
    """
    if not rule.multiplicative:
        raise ValueError("exp_companion needs a multiplicative rule")

    def value(p, nu, _f=rule.value_fn, _x=x, _t=tail_rho):
        if p <= _x:
            return _f(p, 1) ** nu / math.factorial(nu)
        if _t is None:
            return 0.0
        return _t ** nu / math.factorial(nu)

    def prime_values(ps, _r=rule, _x=x, _t=tail_rho):
        w = _r.values_on_primes(ps)
        tail = 0.0 if _t is None else _t
        return np.where(ps <= _x, w, tail)

    return PrimePowerRule(
        kind="multiplicative",
        name=f"exp_companion({rule.name})",
        value_fn=value,
        prime_values_fn=prime_values,
        real_valued=rule.real_valued and (tail_rho is None or np.isrealobj(tail_rho)),
    )


def convolution_factor(rule: PrimePowerRule, x: float) -> PrimePowerRule:
    """Complement h with f = exp_companion(f) * h (Dirichlet convolution).

    ``h(p^nu) = sum_{j+k=nu} (-1)^j f(p)^j f(p^k) / j!``; in particular
    ``h(p) = 0`` for every prime and ``h(p^nu) = 0`` for p > x.
    """
    if not rule.multiplicative:
        raise ValueError("convolution_factor needs a multiplicative rule")

    def value(p, nu, _f=rule.value_fn, _x=x):
        if p > _x:
            return 0.0
        if nu == 1:
            return 0.0
        fp = _f(p, 1)
        acc = 0.0
        for k in range(nu + 1):
            j = nu - k
            fk = 1.0 if k == 0 else _f(p, k)
            acc = acc + (-1) ** j * fp ** j * fk / math.factorial(j)
        return acc

    return PrimePowerRule(
        kind="multiplicative",
        name=f"convolution_factor({rule.name})",
        value_fn=value,
        prime_values_fn=lambda ps: np.zeros(len(ps)),
        real_valued=rule.real_valued,
    )


def dirichlet_convolve_eval(f: PrimePowerRule, g: PrimePowerRule,
                            factorization: sieve.Factorization):
    """(f * g)(n) computed prime power by prime power:
    ``prod_p sum_{j+k=nu_p} f(p^j) g(p^k)`` with value 1 at exponent 0."""
    if not (f.multiplicative and g.multiplicative):
        raise ValueError("Dirichlet convolution is defined for multiplicative rules")
    acc = 1.0 + 0.0j
    for p, nu in factorization:
        term = 0.0 + 0.0j
        for j in range(nu + 1):
            fj = 1.0 if j == 0 else f.value(p, j)
            gk = 1.0 if j == nu else g.value(p, nu - j)
            term += fj * gk
        acc *= term
    if not (np.isfinite(acc.real) and np.isfinite(acc.imag)):
        raise NumericDomainError("convolution produced non-finite value")
    return acc


def truncated(rule: PrimePowerRule, x: float) -> PrimePowerRule:
    """Wrapper setting the rule to zero on prime powers p^nu > x.

    The convention for f(p^nu) beyond the range boundary is left to
    experiment configs; this wrapper realizes the vanishing choice.
    """
    def value(p, nu, _f=rule.value_fn, _x=x):
        return _f(p, nu) if p ** nu <= _x else 0.0

    def prime_values(ps, _r=rule, _x=x):
        w = _r.values_on_primes(ps)
        return np.where(ps <= _x, w, 0.0)

    return PrimePowerRule(kind=rule.kind, name=f"truncated({rule.name},{x:g})",
                          value_fn=value, prime_values_fn=prime_values,
                          real_valued=rule.real_valued)


# ---------------------------------------------------------------------------
# Builtins
# ---------------------------------------------------------------------------


def one() -> PrimePowerRule:
    return PrimePowerRule("multiplicative", "one", lambda p, nu: 1.0,
                          lambda ps: np.ones(len(ps)), real_valued=True)


def delta() -> PrimePowerRule:
    """Convolution unit: 1 at n = 1, zero on every prime power."""
    return PrimePowerRule("multiplicative", "delta", lambda p, nu: 0.0,
                          lambda ps: np.zeros(len(ps)), real_valued=True)


def zero_additive() -> PrimePowerRule:
    return PrimePowerRule("additive", "zero", lambda p, nu: 0.0,
                          lambda ps: np.zeros(len(ps)), real_valued=True)


def moebius() -> PrimePowerRule:
    return PrimePowerRule("multiplicative", "moebius",
                          lambda p, nu: -1.0 if nu == 1 else 0.0,
                          lambda ps: -np.ones(len(ps)), real_valued=True)


def tau_rho(rho: float) -> PrimePowerRule:
    """Divisor-power coefficients: value C(rho+nu-1, nu) = prod_{j<nu}(rho+j)/nu!.

    At rho = 2 this is the divisor-count function.
    """
    def value(p, nu, _r=float(rho)):
        num = 1.0
        for j in range(nu):
            num *= _r + j
        return num / math.factorial(nu)

    return PrimePowerRule("multiplicative", f"tau_rho(rho={rho:g})", value,
                          lambda ps: np.full(len(ps), float(rho)), real_valued=True)


def z_pow_omega_E(z: complex, prime_set: primesets.PrimeSet | None = None,
                  mode: str = "Omega") -> PrimePowerRule:
    """z raised to the number of prime factors inside E; 1 on primes outside.

    ``mode="Omega"`` counts with multiplicity (value z^nu on p in E),
    ``mode="omega"`` without (value z for every nu).
    """
    if mode not in ("Omega", "omega"):
        raise ValueError(f"mode must be 'Omega' or 'omega', got {mode!r}")
    E = prime_set if prime_set is not None else primesets.all_primes()
    z = complex(z)
    real = z.imag == 0.0
    zr = z.real if real else z

    def value(p, nu, _z=zr, _E=E, _mode=mode):
        if not _E.contains(p):
            return 1.0
        return _z ** nu if _mode == "Omega" else _z

    def prime_values(ps, _z=zr, _E=E):
        mask = _E.mask(ps)
        base = np.ones(len(ps), dtype=np.float64 if real else np.complex128)
        base[mask] = _z
        return base

    tag = "Omega" if mode == "Omega" else "omega"
    return PrimePowerRule("multiplicative", f"z_pow_{tag}_E(z={z:g},E={E.name})",
                          value, prime_values, real_valued=real)


def r_pow_omega(r: float) -> PrimePowerRule:
    """r^Omega(n): completely multiplicative in the prime-power exponent."""
    return z_pow_omega_E(complex(r), primesets.all_primes(), mode="Omega")


def omega_additive() -> PrimePowerRule:
    return PrimePowerRule("additive", "omega", lambda p, nu: 1.0,
                          lambda ps: np.ones(len(ps)), real_valued=True)


def big_omega_additive() -> PrimePowerRule:
    return PrimePowerRule("additive", "Omega", lambda p, nu: float(nu),
                          lambda ps: np.ones(len(ps)), real_valued=True)


def omega_phi(table: sieve.SpfTable,
              factor_counts: np.ndarray | None = None) -> PrimePowerRule:
    """Additive rule counting prime factors of the totient:
    value(p, nu) = (nu - 1) + Omega(p - 1).

    Needs a table covering p - 1 for every prime used.  ``factor_counts``
    may pass a precomputed Omega array over [0, table.limit].
    """
    counts = factor_counts

    def omega_of(m: int) -> int:
        if counts is not None and m <= table.limit:
            return int(counts[m])
        return sum(nu for _, nu in factorize_cached(m))

    def factorize_cached(m):
        return sieve.factorize(m, table)

    def value(p, nu):
        return float(nu - 1 + omega_of(p - 1))

    def prime_values(ps):
        if counts is not None:
            return counts[ps - 1].astype(np.float64)
        return np.array([float(omega_of(int(p) - 1)) for p in ps])

    return PrimePowerRule("additive", "omega_phi", value, prime_values,
                          real_valued=True)


def archimedean_twist(tau0: float) -> PrimePowerRule:
    """Completely multiplicative unimodular twist f(p^nu) = p^{i tau0 nu}."""
    def value(p, nu, _t=float(tau0)):
        return complex(math.cos(_t * nu * math.log(p)), math.sin(_t * nu * math.log(p)))

    def prime_values(ps, _t=float(tau0)):
        return np.exp(1j * _t * np.log(ps.astype(np.float64)))

    return PrimePowerRule("multiplicative", f"archimedean_twist(tau0={tau0:g})",
                          value, prime_values, real_valued=False)


def random_unimodular(seed: int) -> PrimePowerRule:
    """Seeded completely multiplicative family f(p^nu) = e^{2 pi i nu theta_p}
    with theta_p a pure hash of (seed, p)."""
    from .hashing import uniform01

    def value(p, nu, _s=int(seed)):
        theta = uniform01(_s, p, salt=0xA11)
        return complex(math.cos(2 * math.pi * nu * theta),
                       math.sin(2 * math.pi * nu * theta))

    def prime_values(ps, _s=int(seed)):
        theta = uniform01(_s, ps, salt=0xA11)
        return np.exp(2j * np.pi * theta)

    return PrimePowerRule("multiplicative", f"random_unimodular(seed={seed})",
                          value, prime_values, real_valued=False)


def random_multiplicative(seed: int) -> PrimePowerRule:
    """Seeded family with independent hashed values on every prime power:
    |value| <= 1, radius and phase both (seed, p, nu)-hashed."""
    from .hashing import uniform01

    def value(p, nu, _s=int(seed)):
        key = (p << 8) | min(nu, 255)
        radius = uniform01(_s, key, salt=0xB01)
        theta = uniform01(_s, key, salt=0xB02)
        return radius * complex(math.cos(2 * math.pi * theta),
                                math.sin(2 * math.pi * theta))

    def prime_values(ps, _s=int(seed)):
        keys = (ps.astype(np.int64) << 8) | 1
        radius = uniform01(_s, keys, salt=0xB01)
        theta = uniform01(_s, keys, salt=0xB02)
        return radius * np.exp(2j * np.pi * theta)

    return PrimePowerRule("multiplicative", f"random_multiplicative(seed={seed})",
                          value, prime_values, real_valued=False)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


@dataclass
class RuleContext:
    """Resolution context for registry lookups: sieve table for rules that
    factor shifted primes, and named prime sets from the config."""

    table: sieve.SpfTable | None = None
    prime_sets: dict[str, primesets.PrimeSet] | None = None
    _cache: dict = field(default_factory=dict)

    def factor_counts(self) -> np.ndarray:
        if self.table is None:
            raise ValueError("rule requires a sieve table in context")
        if "Omega" not in self._cache:
            self._cache["Omega"] = sieve.prime_factor_counts(
                self.table.limit, self.table.primes, "Omega")
        return self._cache["Omega"]


def _build_omega_phi(ctx: RuleContext):
    if ctx is None or ctx.table is None:
        raise ValueError("rule 'omega_phi' requires a sieve table covering p-1")
    return omega_phi(ctx.table, ctx.factor_counts())


_REGISTRY: dict[str, dict] = {
    "one": {"factory": lambda params, ctx: one(), "params": [], "kind": "multiplicative"},
    "delta": {"factory": lambda params, ctx: delta(), "params": [], "kind": "multiplicative"},
    "zero": {"factory": lambda params, ctx: zero_additive(), "params": [], "kind": "additive"},
    "moebius": {"factory": lambda params, ctx: moebius(), "params": [], "kind": "multiplicative"},
    "tau_rho": {"factory": lambda params, ctx: tau_rho(params["rho"]),
                "params": ["rho"], "kind": "multiplicative"},
    "z_pow_omega_E": {
        "factory": lambda params, ctx: z_pow_omega_E(
            params["z"],
            primesets.parse_prime_set(str(params.get("E", "all")),
                                      ctx.prime_sets if ctx else None),
            str(params.get("mode", "Omega"))),
        "params": ["z", "E?", "mode?"], "kind": "multiplicative"},
    "r_pow_omega": {"factory": lambda params, ctx: r_pow_omega(params["r"]),
                    "params": ["r"], "kind": "multiplicative"},
    "omega": {"factory": lambda params, ctx: omega_additive(), "params": [], "kind": "additive"},
    "Omega": {"factory": lambda params, ctx: big_omega_additive(), "params": [], "kind": "additive"},
    "omega_phi": {"factory": lambda params, ctx: _build_omega_phi(ctx),
                  "params": [], "kind": "additive"},
    "archimedean_twist": {"factory": lambda params, ctx: archimedean_twist(params["tau0"]),
                          "params": ["tau0"], "kind": "multiplicative"},
    "random_unimodular": {"factory": lambda params, ctx: random_unimodular(int(params.get("seed", 0))),
                          "params": ["seed?"], "kind": "multiplicative"},
    "random_multiplicative": {"factory": lambda params, ctx: random_multiplicative(int(params.get("seed", 0))),
                              "params": ["seed?"], "kind": "multiplicative"},
}


def _parse_scalar(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return complex(text.replace("i", "j"))
    except ValueError:
        return text


_SPEC_RE = re.compile(r"^(\w+)(?:\{(.*)\})?$")


def parse_rule(spec: str, ctx: RuleContext | None = None) -> PrimePowerRule:
    """Build a rule from a registry spec string like ``tau_rho{rho=0.5}``."""
    m = _SPEC_RE.match(spec.strip())
    if not m:
        raise ValueError(f"malformed rule spec {spec!r}")
    name, body = m.group(1), m.group(2)
    if name not in _REGISTRY:
        raise ValueError(f"unknown rule {name!r}; known: {sorted(_REGISTRY)}")
    params: dict = {}
    if body:
        for tok in body.split(","):
            if not tok.strip():
                continue
            if "=" not in tok:
                raise ValueError(f"malformed rule parameter {tok!r} in {spec!r}")
            k, v = tok.split("=", 1)
            params[k.strip()] = _parse_scalar(v)
    entry = _REGISTRY[name]
    required = [p for p in entry["params"] if not p.endswith("?")]
    missing = [p for p in required if p not in params]
    if missing:
        raise ValueError(f"rule {name!r} missing parameters {missing}")
    return entry["factory"](params, ctx)


def registry_catalog() -> dict:
    """Stable catalog of builtin rule names and prime-set forms."""
    rules = [{"name": name, "kind": entry["kind"], "params": entry["params"]}
             for name, entry in sorted(_REGISTRY.items())]
    return {"rules": rules, "prime_sets": primesets.PRIME_SET_FORMS}
