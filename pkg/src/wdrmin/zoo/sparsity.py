"""Sparse least squares: the support function G^l, structured regularizers, and data generation."""

from dataclasses import dataclass, field

import numpy as np

from ..core import Decomposition, Subset, ValueOracle, as_mask, dr_parameters_from_table
from ..errors import NotPositiveDefiniteError, SingularSystemError
from ..numerics import chain_gains, chol_factor
from scipy.linalg import solve_triangular

REGULARIZERS = ("range", "modified_range", "expensive_feature", "modular")


def _members(mask, d):
    return np.array([i for i in range(d) if mask >> i & 1], dtype=np.int64)


@dataclass
class RegressionInstance:
    """l(x) = |y - A x|^2 / 2 + sigma2 |x|^2 / 2, objective lam F(S) - G^l(S).

    ``rank_policy`` decides what happens when sigma2 = 0 and A_S loses
    column rank: "error" raises SingularSystemError, "pinv" uses the
    minimum-norm least-squares fit (dependent columns add nothing).
    """

    A: np.ndarray
    y: np.ndarray
    sigma2: float = 0.0
    lam: float = 1.0
    regularizer: str = "range"
    params: dict = field(default_factory=dict)
    rank_policy: str = "error"

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.A.ndim != 2 or self.A.shape[0] != self.y.shape[0]:
            raise ValueError("A must be n x d with n = len(y)")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")
        if self.regularizer not in REGULARIZERS:
            raise ValueError(f"unknown regularizer {self.regularizer!r}")
        if self.rank_policy not in ("error", "pinv"):
            raise ValueError("rank_policy is 'error' or 'pinv'")
        self.b = self.A.T @ self.y
        self.M = self.A.T @ self.A + self.sigma2 * np.eye(self.d)
        if self.regularizer == "expensive_feature":
            p = self.params
            if not 0 <= 2 * p["a"] < p["b"]:
                raise ValueError("expensive-feature costs need 0 <= 2a < b")
            self._b1 = sum(1 << i for i in p["B1"])
            self._b2 = sum(1 << i for i in p["B2"])

    @property
    def d(self):
        return self.A.shape[1]

    # -- G^l -----------------------------------------------------------
    def ridge(self, S, v=None):
        """Ridge / least-squares coefficients on the columns in S (length d)."""
        cols = _members(as_mask(S), self.d)
        v = self.y if v is None else np.asarray(v, dtype=float)
        x = np.zeros(self.d)
        if cols.size == 0:
            return x
        As = self.A[:, cols]
        if self.sigma2 > 0:
            x[cols] = np.linalg.solve(As.T @ As + self.sigma2 * np.eye(cols.size), As.T @ v)
        else:
            x[cols] = np.linalg.lstsq(As, v, rcond=None)[0]
        return x

    def gl_value(self, S, mode="direct") -> float:
        mask = as_mask(S)
        if mode == "chain":
            perm = np.concatenate([_members(mask, self.d), _members(((1 << self.d) - 1) ^ mask, self.d)])
            return float(self.gl_chain(perm)[bin(mask).count("1")])
        cols = _members(mask, self.d)
        if cols.size == 0:
            return 0.0
        try:
            L = chol_factor(self.M[np.ix_(cols, cols)])
        except NotPositiveDefiniteError as exc:
            if self.sigma2 > 0 or self.rank_policy == "error":
                raise SingularSystemError(f"A_S is rank deficient on {Subset(mask, self.d)}") from exc
            x = np.linalg.lstsq(self.A[:, cols], self.y, rcond=None)[0]
            r = self.y - self.A[:, cols] @ x
            return float(0.5 * (self.y @ self.y - r @ r))
        z = solve_triangular(L, self.b[cols], lower=True)
        return float(0.5 * (z @ z))

    def gl_chain(self, perm) -> np.ndarray:
        skip = self.sigma2 == 0 and self.rank_policy == "pinv"
        try:
            return 0.5 * chain_gains(self.M, self.b[:, None], perm, skip_dependent=skip)
        except NotPositiveDefiniteError as exc:
            raise SingularSystemError(str(exc)) from exc

    def gl_chain_direct(self, perm) -> np.ndarray:
        """Same values as gl_chain, refactorizing every prefix from scratch."""
        out = np.zeros(self.d + 1)
        mask = 0
        for k, j in enumerate(perm):
            mask |= 1 << int(j)
            out[k + 1] = self.gl_value(mask)
        return out

    def gl_oracle(self) -> ValueOracle:
        return ValueOracle(self.gl_value, self.d, chain_fn=self.gl_chain, name="G^l")

    # -- regularizers --------------------------------------------------
    def regularizer_raw(self, S) -> float:
        mask = as_mask(S)
        if mask == 0:
            return 0.0
        kind = self.regularizer
        if kind == "modular":
            w = np.asarray(self.params["w"], dtype=float)
            return float(w[_members(mask, self.d)].sum())
        if kind == "expensive_feature":
            p = self.params
            hit1, hit2 = bool(mask & self._b1), bool(mask & self._b2)
            extra = p["b"] if hit1 and hit2 else (p["a"] if hit1 or hit2 else 0.0)
            return float(bin(mask).count("1") + extra)
        hi = mask.bit_length() - 1
        lo = (mask & -mask).bit_length() - 1
        r = hi - lo + 1
        return float(r if kind == "range" else self.d - 1 + r)

    def regularizer_value(self, S) -> float:
        return self.lam * self.regularizer_raw(S)

    def regularizer_chain(self, perm) -> np.ndarray:
        perm = np.asarray(perm, dtype=np.int64)
        kind = self.regularizer
        if kind == "modular":
            raw = np.cumsum(np.asarray(self.params["w"], dtype=float)[perm])
        elif kind == "expensive_feature":
            p = self.params
            in1 = np.logical_or.accumulate([(self._b1 >> int(j)) & 1 == 1 for j in perm])
            in2 = np.logical_or.accumulate([(self._b2 >> int(j)) & 1 == 1 for j in perm])
            extra = np.where(in1 & in2, p["b"], np.where(in1 | in2, p["a"], 0.0))
            raw = np.arange(1, self.d + 1) + extra
        else:
            raw = (np.maximum.accumulate(perm) - np.minimum.accumulate(perm) + 1).astype(float)
            if kind == "modified_range":
                raw = raw + (self.d - 1)
        return self.lam * np.concatenate([[0.0], raw])

    def regularizer_oracle(self) -> ValueOracle:
        return ValueOracle(self.regularizer_value, self.d, chain_fn=self.regularizer_chain,
                           name=self.regularizer)

    def regularizer_alpha(self) -> float:
        """Weak DR-submodularity ratio of the regularizer."""
        if self.regularizer == "range":
            return 1.0 / (self.d - 1) if self.d > 1 else 1.0
        if self.regularizer == "expensive_feature":
            a, b = self.params["a"], self.params["b"]
            return (1 + a) / (1 + b - a)
        return 1.0

    # -- objective -----------------------------------------------------
    def objective(self, S) -> float:
        return self.regularizer_value(S) - self.gl_value(S)

    def oracle(self) -> ValueOracle:
        def chain(perm):
            return self.regularizer_chain(perm) - self.gl_chain(perm)

        return ValueOracle(self.objective, self.d, chain_fn=chain, name="sparse-ls")

    def decomposition(self, beta=None) -> Decomposition:
        """lam F - G^l; beta of G^l is found exhaustively for d <= 16 unless given."""
        if beta is None:
            if self.d > 16:
                beta = float("nan")
            else:
                G = self.gl_oracle()
                beta = dr_parameters_from_table(G.table(), self.d).beta
        return Decomposition(self.regularizer_oracle(), self.gl_oracle(), self.regularizer_alpha(), beta)

    # -- marginal identity ----------------------------------------------
    def marginal_identity(self, i, S):
        """Both sides of G(i|S) = [x^{S+i}(y)]_i^2 phi(S, i).

        phi(S, i) = |R^S(a_i)|^2/2 + sigma2 |x^S(a_i)|^2/2 + sigma2/2, where
        x^S(v) are ridge coefficients on S and R^S(v) the residual.
        """
        mask = as_mask(S)
        if mask >> i & 1:
            raise ValueError("i must be outside S")
        lhs = self.gl_value(mask | (1 << i)) - self.gl_value(mask)
        a_i = self.A[:, i]
        xs = self.ridge(mask, a_i)
        res = a_i - self.A @ xs
        phi = 0.5 * res @ res + 0.5 * self.sigma2 * (xs @ xs) + 0.5 * self.sigma2
        coef = self.ridge(mask | (1 << i))[i]
        return float(lhs), float(coef * coef * phi)


def gl_value(inst: RegressionInstance, S) -> float:
    return inst.gl_value(S)


def regularizer_value(inst: RegressionInstance, S) -> float:
    return inst.regularizer_value(S)


def generate_regression(d, n, k, noise_sigma=0.01, seed=0, **kwargs):
    """Gaussian design with unit-norm columns and a run of k ones at a random offset.

    Returns (instance, x_true).  Extra keyword arguments go to RegressionInstance.
    """
    if not 1 <= k <= d or n < 1:
        raise ValueError("need 1 <= k <= d and n >= 1")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d))
    A /= np.linalg.norm(A, axis=0)
    x = np.zeros(d)
    start = int(rng.integers(0, d - k + 1))
    x[start:start + k] = 1.0
    y = A @ x + noise_sigma * rng.standard_normal(n)
    return RegressionInstance(A, y, **kwargs), x


def interval_masks(d):
    """The empty set and every interval {i, ..., j}: 1 + d(d+1)/2 masks."""
    out = [0]
    for i in range(d):
        for j in range(i, d):
            out.append(((1 << (j + 1)) - 1) ^ ((1 << i) - 1))
    return out


def best_interval(oracle: ValueOracle):
    """Minimise over the empty set and all intervals (first minimiser in listing order)."""
    best = None
    for m in interval_masks(oracle.d):
        v = oracle.evaluate(m)
        if best is None or v < best[1]:
            best = (m, v)
    return Subset(best[0], oracle.d), best[1]


def support_error(S, x_true) -> int:
    truth = {i for i, v in enumerate(x_true) if v != 0}
    return len(truth.symmetric_difference(set(S)))


def estimation_error(inst: RegressionInstance, S, x_true) -> float:
    x = inst.ridge(S)
    return float(np.linalg.norm(x - x_true) / np.linalg.norm(x_true))
