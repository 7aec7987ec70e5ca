"""Concave-cardinality witness, the tight instance for PGM, and the hidden-partition hardness instance."""

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import Decomposition, Subset, ValueOracle, as_mask


def _popcount(mask):
    return bin(mask).count("1")


@dataclass(frozen=True)
class ConcaveCardinality:
    """G'(S) = g(|S|) with g(x) = a x^2 / 2 + (1 - a/2) x.

    ``a`` defaults to (beta_target - 1)/(d - 1), which makes G' exactly
    (1, beta_target)-weakly DR-modular.  Any a in [(beta_target-1)/(d-1), 0)
    also works and gives a larger true beta.
    """

    d: int
    beta_target: float
    a: float = None

    def __post_init__(self):
        if not 0 < self.beta_target < 1:
            raise ValueError("beta_target must lie in (0, 1)")
        if self.a is None:
            object.__setattr__(self, "a", (self.beta_target - 1) / (self.d - 1) if self.d > 1 else 0.0)

    def g(self, x):
        return 0.5 * self.a * x * x + (1 - 0.5 * self.a) * x

    def value(self, S) -> float:
        return float(self.g(_popcount(as_mask(S))))

    @property
    def eps_gprime(self) -> float:
        """Strict submodularity gap min G'(i|A) - G'(i|B), A a proper subset of B."""
        return -self.a

    @property
    def beta(self) -> float:
        return 1 + self.a * (self.d - 1)

    def oracle(self) -> ValueOracle:
        g = self.g(np.arange(self.d + 1, dtype=float))
        return ValueOracle(self.value, self.d, chain_fn=lambda perm: g.copy(), name="concave-card")


def gprime_value(inst: ConcaveCardinality, S) -> float:
    return inst.value(S)


@dataclass(frozen=True)
class TightnessInstance:
    d: int
    alpha: float
    beta: float
    bad_element: int = 0

    def __post_init__(self):
        if not (0 < self.alpha <= 1 and 0 < self.beta <= 1):
            raise ValueError("alpha, beta must lie in (0, 1]")
        if not 0 <= self.bad_element < self.d:
            raise ValueError("bad element outside the ground set")

    @property
    def _top(self):
        return self.d / self.beta - 1

    def values(self, S):
        mask = as_mask(S)
        k = _popcount(mask)
        if mask >> self.bad_element & 1:
            v = k + self._top
            return v, v, 0.0
        return self.alpha * k, k / self.beta, self.h_slope * k + 0.0  # no -0.0 at the empty set

    @property
    def h_slope(self):
        return self.alpha - 1 / self.beta

    def F(self, S):
        return self.values(S)[0]

    def G(self, S):
        return self.values(S)[1]

    def H(self, S):
        """Closed form of F - G; off the bad element it is (alpha - 1/beta)|S|."""
        return self.values(S)[2]

    def optimum(self):
        """(V minus bad, (alpha - 1/beta)(d - 1))."""
        full = (1 << self.d) - 1
        return Subset(full & ~(1 << self.bad_element), self.d), self.h_slope * (self.d - 1)

    def adversarial_start(self):
        s = np.full(self.d, 0.5)
        s[self.bad_element] = 1.0
        return s

    def oracle(self) -> ValueOracle:
        return ValueOracle(self.H, self.d, name="tight")

    def decomposition(self) -> Decomposition:
        return Decomposition(ValueOracle(self.F, self.d, name="tight-F"),
                             ValueOracle(self.G, self.d, name="tight-G"),
                             self.alpha, self.beta)


def tightness_values(inst: TightnessInstance, S):
    return inst.values(S)


@dataclass
class HardnessInstance:
    """H(S) = 0 when |S cap C| and |S cap D| differ by at most eps d, else 2 alpha delta/(2 - d).

    The partition (C, D) is drawn from ``seed`` and only reachable through
    values.  Comparisons use eps*d + 1e-9 so that eps = 1/6 at d = 12 gives
    the threshold 2 rather than 1.9999999999999998.
    """

    d: int
    eps: float = None
    alpha: float = 0.5
    delta: float = 1.0
    seed: int = 0
    _C: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.d <= 2 or self.d % 2:
            raise ValueError("d must be an even integer > 2")
        if self.eps is None:
            self.eps = max(1.0 / self.d, 0.25)
        if not (1.0 / self.d - 1e-12 <= self.eps < 0.5):
            raise ValueError("eps must lie in [1/d, 1/2)")
        if not 0 < self.alpha <= 1 or not self.delta > 0:
            raise ValueError("need alpha in (0, 1] and delta > 0")
        rng = np.random.default_rng(self.seed)
        C = rng.choice(self.d, size=self.d // 2, replace=False)
        self._C = int(sum(1 << int(i) for i in C))

    @property
    def threshold(self):
        return self.eps * self.d + 1e-9

    @property
    def low_value(self):
        return 2 * self.alpha * self.delta / (2 - self.d)

    def imbalance(self, S):
        mask = as_mask(S)
        return _popcount(mask & self._C) - _popcount(mask & ~self._C)

    def value(self, S) -> float:
        return 0.0 if abs(self.imbalance(S)) <= self.threshold else self.low_value

    def oracle(self) -> ValueOracle:
        return ValueOracle(self.value, self.d, name="hardness")

    def reveal_partition(self):
        """(C, D); test and audit use only."""
        full = (1 << self.d) - 1
        return Subset(self._C, self.d), Subset(full ^ self._C, self.d)

    def unbalanced_probability(self) -> float:
        """Exact P(|k - l| > eps d) for S uniform over all subsets."""
        h = self.d // 2
        p = 0.0
        for k in range(h + 1):
            for l in range(h + 1):
                if abs(k - l) > self.threshold:
                    p += math.comb(h, k) * math.comb(h, l)
        return p / 2 ** self.d

    def chernoff_bound(self) -> float:
        return 2 * math.exp(-self.eps ** 2 * self.d / 4)


def hardness_value(inst: HardnessInstance, S) -> float:
    return inst.value(S)
