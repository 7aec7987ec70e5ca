"""Split an arbitrary normalized H into F - G with weak-DR guarantees.

With ``snap`` (the default) the scale factor and the concave-cardinality
coefficient are rounded to dyadic values in the safe direction.  When H
takes dyadic values of moderate size this makes every intermediate sum
exact, so F(S) - G(S) reproduces H(S) bit for bit.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .core import Decomposition, Subset, ValueOracle, _require_exhaustive
from .errors import ConfigError
from .zoo.constructions import ConcaveCardinality

SCALE_GRID = 2.0 ** -24


def violation_eps(oracle: ValueOracle, alpha: float, strict: bool = False, witness: bool = False):
    """min over i, A subset-of B in V-i of H(i|A) - alpha H(i|B)  (d <= 14).

    ``strict`` restricts to proper subsets A of B.
    """
    _require_exhaustive(oracle, 14)
    value, i, a, b = kernels.violation_scan(oracle.table(), oracle.d, float(alpha), strict)
    if witness:
        return value, (i, Subset(a, oracle.d), Subset(b, oracle.d))
    return value


@dataclass
class DecompositionSpec:
    alpha: float
    beta: float
    eps_H_lower: float
    witness: object                 # ConcaveCardinality, or the string "cardinality"
    eps_gprime: float
    scale: float
    Vminus: Subset
    correction: dict = field(default_factory=dict)
    H: Optional[ValueOracle] = field(default=None, repr=False)

    def gprime(self, mask) -> float:
        if isinstance(self.witness, ConcaveCardinality):
            return self.witness.value(mask)
        return float(bin(mask).count("1"))

    def shift(self, mask) -> float:
        """scale G'(S) minus the corrections of S cap V-minus; this is G(S)."""
        out = self.scale * self.gprime(mask)
        for i, c in self.correction.items():
            if mask >> i & 1:
                out -= c
        return out


def _snap_a(beta, d):
    """Largest-magnitude negative power of two a with |a|(d-1) <= 1 - beta."""
    limit = (1 - beta) / (d - 1)
    return -2.0 ** math.floor(math.log2(limit))


def decompose(oracle: ValueOracle, alpha: float, beta: float, eps_H_lower: Optional[float] = None,
              snap: bool = True):
    """Returns (F, G, spec) with F - G = H.

    The witness G' is |S| when alpha < 1 and the concave-cardinality
    function otherwise.  eps_H_lower defaults to the exhaustive violation.
    """
    if not (0 < alpha <= 1 and 0 < beta <= 1):
        raise ConfigError("alpha and beta must lie in (0, 1]")
    if alpha * beta >= 1:
        raise ConfigError("need alpha * beta < 1")
    d = oracle.d
    if eps_H_lower is None:
        eps_H_lower = min(0.0, violation_eps(oracle, alpha))
    elif eps_H_lower > 0:
        raise ConfigError("eps_H_lower is a lower bound on a violation and must be <= 0")
    if alpha < 1:
        witness, eps_g = "cardinality", 1.0 - alpha
    else:
        if d < 2:
            raise ConfigError("the concave witness needs d >= 2")
        witness = ConcaveCardinality(d, beta, _snap_a(beta, d) if snap else None)
        eps_g = witness.eps_gprime
    if snap:
        eps_H_lower = math.floor(eps_H_lower / SCALE_GRID) * SCALE_GRID
    scale = abs(eps_H_lower) / eps_g

    spec = DecompositionSpec(alpha, beta, eps_H_lower, witness, eps_g, scale, Subset(0, d), {}, oracle)
    full = (1 << d) - 1
    hV = oracle.evaluate(full)
    gV = spec.gprime(full)
    vminus = 0
    for i in range(d):
        rest = full ^ (1 << i)
        marg = (hV - oracle.evaluate(rest)) + scale * (gV - spec.gprime(rest))
        if marg < 0:
            spec.correction[i] = marg
            vminus |= 1 << i
    spec.Vminus = Subset(vminus, d)

    def f(mask):
        return oracle.evaluate(mask) + spec.shift(mask)

    F = ValueOracle(f, d, name=f"F({oracle.name})")
    G = ValueOracle(spec.shift, d, name=f"G({oracle.name})")
    return F, G, spec


def as_decomposition(F, G, spec: DecompositionSpec) -> Decomposition:
    return Decomposition(F, G, spec.alpha, spec.beta)


def decomposition_bound(spec: DecompositionSpec, S_star, eps: float, H_star: Optional[float] = None) -> float:
    """H(S*)/alpha + (1/alpha - beta)(scale G'(S*) - corrections on S*) + eps."""
    mask = S_star.mask if isinstance(S_star, Subset) else int(S_star)
    if H_star is None:
        H_star = spec.H.evaluate(mask)
    return H_star / spec.alpha + (1 / spec.alpha - spec.beta) * spec.shift(mask) + eps


def random_set_function(d, seed=0, grid=2.0 ** -16, scale=4.0):
    """Normalized random table on a dyadic grid (values in [-scale, scale])."""
    rng = np.random.default_rng(seed)
    vals = np.round(rng.uniform(-scale, scale, 1 << d) / grid) * grid
    vals[0] = 0.0
    return vals
