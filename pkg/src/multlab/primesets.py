"""Prime subsets E used in restricted factor counts Omega(n; E).

A :class:`PrimeSet` is a deterministic membership predicate over primes.
Builtin families: all primes, a residue class mod q, a seeded random set of
density theta, and an explicit finite list.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .hashing import uniform01

__all__ = ["PrimeSet", "all_primes", "residue_class", "random_density",
           "explicit", "parse_prime_set", "PRIME_SET_FORMS"]


@dataclass(frozen=True)
class PrimeSet:
    """Membership predicate over primes, evaluated in bulk via :meth:`mask`."""

    name: str
    kind: str  # "all" | "mod" | "random" | "list"
    params: tuple = ()

    def mask(self, primes: np.ndarray) -> np.ndarray:
        """Boolean membership array aligned with the given prime array."""
        if self.kind == "all":
            return np.ones(len(primes), dtype=bool)
        if self.kind == "mod":
            q, a = self.params
            return (primes % q) == a
        if self.kind == "random":
            theta, seed = self.params
            return uniform01(seed, primes, salt=0xE5E7) < theta
        if self.kind == "list":
            members = np.asarray(self.params, dtype=np.int64)
            return np.isin(primes, members)
        raise ValueError(f"unknown prime-set kind {self.kind!r}")

    def contains(self, p: int) -> bool:
        return bool(self.mask(np.asarray([p], dtype=np.int64))[0])


def all_primes() -> PrimeSet:
    return PrimeSet(name="all", kind="all")


def residue_class(q: int, a: int) -> PrimeSet:
    if q < 1 or not (0 <= a < q):
        raise ValueError(f"residue class needs q >= 1 and 0 <= a < q, got q={q}, a={a}")
    return PrimeSet(name=f"mod{q}_{a}", kind="mod", params=(q, a))


def random_density(theta: float, seed: int) -> PrimeSet:
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {theta}")
    return PrimeSet(name=f"random(theta={theta},seed={seed})", kind="random",
                    params=(float(theta), int(seed)))


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def explicit(members) -> PrimeSet:
    members = sorted(set(int(m) for m in members))
    for m in members:
        if not _is_prime(m):
            raise ValueError(f"explicit prime set contains non-prime {m}")
    return PrimeSet(name="list{" + ",".join(map(str, members)) + "}",
                    kind="list", params=tuple(members))


PRIME_SET_FORMS = [
    "all",
    "mod{q=Q,a=A}  (shorthand: modQ_A)",
    "random{theta=T,seed=S}",
    "list{p1,p2,...}",
]

_MOD_SHORTHAND = re.compile(r"^mod(\d+)_(\d+)$")


def parse_prime_set(spec: str, named: dict[str, PrimeSet] | None = None) -> PrimeSet:
    """Resolve a prime-set spec string.

    Accepts a name from ``named``, ``all``, ``modQ_A``, ``mod{q=..,a=..}``,
    ``random{theta=..,seed=..}`` or ``list{2,3,5}``.
    """
    spec = spec.strip()
    if named and spec in named:
        return named[spec]
    if spec == "all":
        return all_primes()
    m = _MOD_SHORTHAND.match(spec)
    if m:
        return residue_class(int(m.group(1)), int(m.group(2)))
    m = re.match(r"^(\w+)\{(.*)\}$", spec)
    if not m:
        raise ValueError(f"unknown prime set {spec!r}; forms: {PRIME_SET_FORMS}")
    head, body = m.group(1), m.group(2)
    if head == "list":
        items = [tok for tok in body.split(",") if tok.strip()]
        return explicit(int(tok) for tok in items)
    kv = {}
    for tok in body.split(","):
        if not tok.strip():
            continue
        if "=" not in tok:
            raise ValueError(f"malformed prime-set parameter {tok!r} in {spec!r}")
        k, v = tok.split("=", 1)
        kv[k.strip()] = v.strip()
    if head == "mod":
        return residue_class(int(kv["q"]), int(kv["a"]))
    if head == "random":
        return random_density(float(kv["theta"]), int(kv.get("seed", 0)))
    raise ValueError(f"unknown prime set {spec!r}; forms: {PRIME_SET_FORMS}")
