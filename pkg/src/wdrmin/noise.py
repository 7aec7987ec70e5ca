"""Noisy value oracles, the mean-of-m estimator, and approximate-oracle budgets.

Noise is drawn from a counter-based stream: query number n of an oracle
reads a fixed window of a Philox stream keyed by the seed, so the value
of xi for query n depends only on (seed, n).  Each query owns BLOCK
counter steps (8 uint64 words), i.e. four Box-Muller pairs, which covers
rejection truncation except in pathological settings; those fall back to a
second Philox stream keyed by (seed, n).
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import ValueOracle, as_mask
from .errors import ConfigError, StochasticOracleError
from . import pgm

BLOCK = 2                      # Philox counter steps per query
WORDS = 4 * BLOCK              # uint64 words per query
_TWO53 = float(2 ** 53)


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "multiplicative"        # or "additive"
    distribution: str = "gaussian"      # or "uniform"
    mu: float = 1.0
    sigma: float = 0.1
    lo: float = 0.0
    hi: float = 1.0
    omega: Optional[float] = None
    seed: int = 0
    consistent: bool = False

    def __post_init__(self):
        if self.kind not in ("multiplicative", "additive"):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if self.distribution not in ("gaussian", "uniform"):
            raise ConfigError(f"unknown distribution {self.distribution!r}")
        if self.distribution == "gaussian":
            if self.sigma < 0:
                raise ConfigError("sigma must be >= 0")
            if self.kind == "multiplicative" and not self.mu > 0:
                raise ConfigError("multiplicative gaussian noise needs mu > 0")
        elif self.hi < self.lo:
            raise ConfigError("uniform noise needs lo <= hi")
        if self.omega is not None and self.omega < 0:
            raise ConfigError("omega must be >= 0")

    @property
    def bound(self) -> float:
        """Truncation bound omega (|xi| <= omega)."""
        if self.omega is not None:
            return float(self.omega)
        if self.distribution == "gaussian":
            return abs(self.mu) + 6.0 * self.sigma
        return max(abs(self.lo), abs(self.hi))

    @property
    def mean(self) -> float:
        """E[xi] ignoring the (negligible at mu + 6 sigma) truncation shift."""
        if self.distribution == "gaussian":
            return self.mu
        return 0.5 * (self.lo + self.hi)

    def is_degenerate(self) -> bool:
        if self.distribution == "gaussian":
            return self.sigma == 0.0
        return self.lo == self.hi


def _uniforms(words):
    return (words >> np.uint64(11)).astype(np.float64) / _TWO53


def _candidates(spec, words):
    """Map raw words (count, WORDS) to candidate xi values of the same shape."""
    u = _uniforms(words)
    if spec.distribution == "uniform":
        return spec.lo + (spec.hi - spec.lo) * u
    u1 = 1.0 - u[:, 0::2]          # (0, 1]
    u2 = u[:, 1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty_like(u)
    z[:, 0::2] = r * np.cos(2.0 * np.pi * u2)
    z[:, 1::2] = r * np.sin(2.0 * np.pi * u2)
    return spec.mu + spec.sigma * z


def draw_xi(spec: NoiseSpec, start: int, count: int, stream: int = 0) -> np.ndarray:
    """xi for queries start .. start+count-1 of the given stream."""
    if count == 0:
        return np.zeros(0)
    gen = np.random.Philox(key=[spec.seed, stream], counter=start * BLOCK)
    words = gen.random_raw(count * WORDS).reshape(count, WORDS)
    cand = _candidates(spec, words)
    omega = spec.bound
    ok = np.abs(cand) <= omega
    first = np.argmax(ok, axis=1)
    xi = cand[np.arange(count), first]
    for r in np.nonzero(~ok.any(axis=1))[0]:
        xi[r] = _fallback(spec, start + int(r), stream, omega)
    return xi


def _fallback(spec, n, stream, omega, max_rounds=10000):
    gen = np.random.Philox(key=[spec.seed, stream + 1 + n])
    for _ in range(max_rounds):
        cand = _candidates(spec, gen.random_raw(WORDS).reshape(1, WORDS))[0]
        hit = np.nonzero(np.abs(cand) <= omega)[0]
        if hit.size:
            return float(cand[hit[0]])
    raise ConfigError(f"truncation bound {omega} rejects essentially every draw")


class NoisyOracle(ValueOracle):
    """H~(S) = xi H(S) or H(S) + xi, xi drawn fresh per query."""

    def __init__(self, base: ValueOracle, spec: NoiseSpec):
        if not base.deterministic:
            raise StochasticOracleError("the base oracle must be deterministic")
        super().__init__(base.fn, base.d, deterministic=False, seed=spec.seed,
                         name=f"noisy({base.name})")
        self.base = base
        self.spec = spec
        self._memo = {}

    def _apply(self, values, xi):
        if self.spec.kind == "multiplicative":
            return values * xi
        return values + xi

    def _xi(self, masks, reps):
        """xi for len(masks)*reps consecutive queries, shape (len(masks), reps)."""
        n = len(masks) * reps
        if self.spec.consistent:
            out = np.empty((len(masks), reps))
            for r, m in enumerate(masks):
                if m not in self._memo:
                    self._memo[m] = float(draw_xi(self.spec, m, 1, stream=1)[0])
                out[r] = self._memo[m]
        else:
            out = draw_xi(self.spec, self.call_count, n).reshape(len(masks), reps)
        self.call_count += n
        return out

    def evaluate(self, S) -> float:
        mask = as_mask(S)
        h = self.base.evaluate(mask)
        return float(self._apply(h, self._xi([mask], 1)[0, 0]))

    __call__ = evaluate

    def chain(self, perm) -> np.ndarray:
        perm = np.asarray(perm, dtype=np.int64)
        vals = self.base.chain(perm)
        masks = [int(m) for m in np.concatenate([[0], np.cumsum(np.left_shift(1, perm))])]
        return self._apply(vals, self._xi(masks, 1)[:, 0])

    def sample_mean(self, masks, values, m):
        """Mean of m fresh queries at each mask (queries run mask-major)."""
        xi = self._xi(masks, m).mean(axis=1)
        return self._apply(np.asarray(values, dtype=float), xi)


def wrap_noisy(oracle: ValueOracle, spec: NoiseSpec) -> NoisyOracle:
    return NoisyOracle(oracle, spec)


def mean_estimator(noisy: NoisyOracle, m: int) -> ValueOracle:
    """Average of m noisy queries per evaluation; charges m calls to ``noisy``.

    The mean is taken over xi and then applied, which equals the mean of the
    m noisy values up to rounding and keeps zero-noise runs bitwise exact.
    """
    if int(m) != m or m < 1:
        raise ConfigError("m must be a positive integer")
    m = int(m)
    if m == 1:
        return noisy
    base = noisy.base

    def fn(mask):
        return float(noisy.sample_mean([mask], [base.evaluate(mask)], m)[0])

    def chain(perm):
        vals = base.chain(perm)
        masks = [int(x) for x in np.concatenate([[0], np.cumsum(np.left_shift(1, perm))])]
        return noisy.sample_mean(masks, vals, m)

    est = ValueOracle(fn, noisy.d, deterministic=False, seed=noisy.seed,
                      chain_fn=chain, name=f"mean{m}({noisy.name})")
    est.inner = noisy
    return est


def _ceil(x):
    """Ceiling that ignores round-off of a few ulps above an integer."""
    return int(math.ceil(x - 1e-9 * max(1.0, abs(x))))


@dataclass(frozen=True)
class ApproxOracleBudget:
    eps_prime: float
    delta_prime: float
    d: int
    L: float
    eps: float
    delta: float
    T: int
    m: Optional[int] = None
    omega: Optional[float] = None
    H_max: Optional[float] = None


def plan_budget(eps_prime, delta_prime, d, L, spec: Optional[NoiseSpec] = None,
                H_max: Optional[float] = None) -> ApproxOracleBudget:
    if not (0 < eps_prime < 1 and 0 < delta_prime < 1):
        raise ValueError("eps_prime and delta_prime must lie in (0, 1)")
    if d < 1 or not L > 0:
        raise ValueError("need d >= 1 and L > 0")
    eps = eps_prime / (8 * d)
    delta = delta_prime * eps_prime ** 2 / (32 * d ** 2)
    T = _ceil(16 * d * L ** 2 / eps_prime ** 2)
    m = omega = None
    if spec is not None and H_max is not None:
        omega = spec.bound
        if not math.isfinite(omega):
            raise ValueError("unbounded noise: pass m explicitly")
        m = max(1, _ceil((omega * H_max / eps) ** 2 * math.log(1 / delta)))
    return ApproxOracleBudget(eps_prime, delta_prime, d, float(L), eps, delta, T, m, omega, H_max)


def samples_needed(omega, H_max, eps, delta) -> int:
    """m = ceil((omega H_max / eps)^2 ln(1/delta))."""
    return max(1, _ceil((omega * H_max / eps) ** 2 * math.log(1 / delta)))


def minimize_noisy(base: ValueOracle, spec: NoiseSpec, budget: Optional[ApproxOracleBudget] = None,
                   *, m: Optional[int] = None, T: Optional[int] = None,
                   config: Optional[pgm.PgmConfig] = None) -> pgm.PgmResult:
    """PGM against the m-sample mean of a noisy oracle.

    The solver, including the final rounding, only sees noisy values.  The
    true value of the returned set is evaluated afterwards and stored in
    ``diagnostics['true_value']``.
    """
    m = m if m is not None else (budget.m if budget is not None else None)
    T = T if T is not None else (budget.T if budget is not None else None)
    if m is None or T is None:
        raise ConfigError("need m and T, either explicitly or from a budget")
    config = replace(config or pgm.PgmConfig(), T=T)
    if budget is not None and config.L in (None, "estimate"):
        config = replace(config, L=budget.L)
    noisy = wrap_noisy(base, spec)
    est = mean_estimator(noisy, m)
    res = pgm.minimize(est, config)
    res.oracle_calls = noisy.call_count
    res.diagnostics["true_value"] = base.evaluate(res.rounded_set)
    res.diagnostics["m"] = m
    return res
