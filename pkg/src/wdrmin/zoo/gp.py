"""Gaussian-process variance reduction as a set function."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from ..core import Decomposition, ValueOracle, as_mask
from ..errors import NotPositiveDefiniteError
from ..numerics import chain_gains, chol_factor, eigen_extremes, symmetric


@dataclass
class GpInstance:
    K: np.ndarray
    sigma2: float
    item_cost: str = "linear"          # or "concave_per_group"
    lam: float = 1.0
    groups: Optional[list] = None      # lists of element indices
    exponent: float = 0.5
    _M: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.K = symmetric(self.K)
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")
        if self.item_cost not in ("linear", "concave_per_group"):
            raise ValueError(f"unknown item cost {self.item_cost!r}")
        if self.item_cost == "concave_per_group":
            if not self.groups:
                raise ValueError("concave_per_group needs groups")
            if not 0 < self.exponent <= 1:
                raise ValueError("exponent must lie in (0, 1]")
        chol_factor(self.K)            # raises NotPositiveDefiniteError
        self._M = self.K + self.sigma2 * np.eye(self.d)

    @property
    def d(self):
        return self.K.shape[0]

    def variance_reduction(self, S) -> float:
        """trace(K_{V,S} (K_S + sigma2 I)^{-1} K_{S,V})."""
        mask = as_mask(S)
        cols = [i for i in range(self.d) if mask >> i & 1]
        if not cols:
            return 0.0
        L = chol_factor(self._M[np.ix_(cols, cols)])
        Z = solve_triangular(L, self.K[cols, :], lower=True)
        return float(np.sum(Z * Z))

    def variance_chain(self, perm) -> np.ndarray:
        return chain_gains(self._M, self.K, perm)

    def vr_oracle(self) -> ValueOracle:
        return ValueOracle(self.variance_reduction, self.d, chain_fn=self.variance_chain, name="var-red")

    def column_selection_value(self, S) -> float:
        """sum_i [l_i(0) - min_{supp z in S} l_i(z)], l_i(z) = |K^.5 e_i - K^.5 z|^2 + sigma2 |z|^2.

        Independent path for cross-checking: explicit square root from a
        symmetric eigendecomposition and a stacked least-squares solve.
        """
        mask = as_mask(S)
        cols = [i for i in range(self.d) if mask >> i & 1]
        if not cols:
            return 0.0
        w, U = np.linalg.eigh(self.K)
        root = (U * np.sqrt(np.clip(w, 0, None))) @ U.T
        B = np.vstack([root[:, cols], np.sqrt(self.sigma2) * np.eye(len(cols))])
        total = 0.0
        for i in range(self.d):
            target = np.concatenate([root[:, i], np.zeros(len(cols))])
            z = np.linalg.lstsq(B, target, rcond=None)[0]
            r = target - B @ z
            total += root[:, i] @ root[:, i] - r @ r
        return float(total)

    def cost(self, S) -> float:
        mask = as_mask(S)
        if self.item_cost == "linear":
            return self.lam * bin(mask).count("1")
        return self.lam * sum(sum(mask >> i & 1 for i in g) ** self.exponent for g in self.groups)

    def cost_oracle(self) -> ValueOracle:
        return ValueOracle(self.cost, self.d, name=self.item_cost)

    def beta_formula(self) -> float:
        lo, hi = eigen_extremes(self.K)
        if lo <= 0:
            raise NotPositiveDefiniteError("kernel has a non-positive eigenvalue", pivot=-1)
        return lo * lo / (hi * (lo + self.sigma2))

    def oracle(self) -> ValueOracle:
        F, G = self.cost_oracle(), self.vr_oracle()
        return ValueOracle(lambda m: F.evaluate(m) - G.evaluate(m), self.d, name="gp-selection")

    def decomposition(self) -> Decomposition:
        return Decomposition(self.cost_oracle(), self.vr_oracle(), 1.0, self.beta_formula())


def variance_reduction_value(inst: GpInstance, S) -> float:
    return inst.variance_reduction(S)


def variance_reduction_beta(inst: GpInstance) -> float:
    return inst.beta_formula()


def random_kernel(d, seed=0, lengthscale=1.0, jitter=1e-3, dim=2):
    """Squared-exponential kernel on random points, plus jitter for conditioning."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 2, size=(d, dim))
    D2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    return np.exp(-D2 / (2 * lengthscale ** 2)) + jitter * np.eye(d)
