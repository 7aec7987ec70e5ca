"""Ground sets, bitmask subsets, counted value oracles and exhaustive checks."""

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from . import kernels
from .errors import (
    DegenerateError,
    DimensionError,
    ElementPresentError,
    NotMonotoneError,
    StochasticOracleError,
)

MAX_BITMASK_D = 64


@dataclass(frozen=True)
class GroundSet:
    d: int

    def __post_init__(self):
        if not 1 <= self.d <= MAX_BITMASK_D:
            raise DimensionError(f"d must be in [1, {MAX_BITMASK_D}], got {self.d}")

    @property
    def full_mask(self) -> int:
        return (1 << self.d) - 1

    def empty(self) -> "Subset":
        return Subset(0, self.d)

    def full(self) -> "Subset":
        return Subset(self.full_mask, self.d)

    def subset(self, elements: Iterable[int]) -> "Subset":
        return Subset.from_indices(elements, self.d)


@dataclass(frozen=True, order=True)
class Subset:
    """Immutable subset of {0..d-1} stored as a bitmask."""

    mask: int
    d: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.d:
            raise ValueError(f"mask {self.mask:#x} has bits outside 0..{self.d - 1}")

    @classmethod
    def from_indices(cls, elements: Iterable[int], d: int) -> "Subset":
        mask = 0
        for e in elements:
            if not 0 <= e < d:
                raise ValueError(f"element {e} outside ground set of size {d}")
            mask |= 1 << e
        return cls(mask, d)

    @property
    def cardinality(self) -> int:
        return bin(self.mask).count("1")

    def __len__(self):
        return self.cardinality

    def __contains__(self, i):
        return bool(self.mask >> i & 1)

    def __iter__(self):
        m, i = self.mask, 0
        while m:
            if m & 1:
                yield i
            m >>= 1
            i += 1

    def indices(self) -> tuple:
        return tuple(self)

    def add(self, i: int) -> "Subset":
        return Subset(self.mask | (1 << i), self.d)

    def remove(self, i: int) -> "Subset":
        return Subset(self.mask & ~(1 << i), self.d)

    def complement(self) -> "Subset":
        return Subset(((1 << self.d) - 1) ^ self.mask, self.d)

    def union(self, other: "Subset") -> "Subset":
        return Subset(self.mask | other.mask, self.d)

    def intersection(self, other: "Subset") -> "Subset":
        return Subset(self.mask & other.mask, self.d)

    def indicator(self) -> np.ndarray:
        return np.array([(self.mask >> i) & 1 for i in range(self.d)], dtype=float)

    def __repr__(self):
        return f"Subset({{{', '.join(map(str, self))}}}, d={self.d})"


def as_mask(S) -> int:
    return S.mask if isinstance(S, Subset) else int(S)


class ValueOracle:
    """Counted evaluator S -> H(S) over bitmask subsets.

    ``fn`` takes an int mask.  ``chain_fn`` optionally evaluates all prefix
    sets of a permutation at once (returns d+1 values); it is charged d+1
    calls, the same as evaluating the prefixes one by one.
    """

    def __init__(
        self,
        fn: Callable[[int], float],
        d: int,
        *,
        deterministic: bool = True,
        seed: Optional[int] = None,
        chain_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        name: str = "",
    ):
        if not 1 <= d <= MAX_BITMASK_D:
            raise DimensionError(f"d must be in [1, {MAX_BITMASK_D}], got {d}")
        if not deterministic and seed is None:
            raise ValueError("stochastic oracles need a seed")
        self.fn = fn
        self.d = d
        self.deterministic = deterministic
        self.seed = seed
        self.chain_fn = chain_fn
        self.name = name
        self.call_count = 0

    @property
    def ground(self) -> GroundSet:
        return GroundSet(self.d)

    def evaluate(self, S) -> float:
        self.call_count += 1
        return float(self.fn(as_mask(S)))

    __call__ = evaluate

    def chain(self, perm) -> np.ndarray:
        """Values on the prefix chain of ``perm``: H(S_0), ..., H(S_d)."""
        perm = np.asarray(perm, dtype=np.int64)
        if self.chain_fn is not None:
            self.call_count += self.d + 1
            return np.asarray(self.chain_fn(perm), dtype=float)
        out = np.empty(self.d + 1)
        mask = 0
        out[0] = self.evaluate(0)
        for k, j in enumerate(perm):
            mask |= 1 << int(j)
            out[k + 1] = self.evaluate(mask)
        return out

    def table(self) -> np.ndarray:
        """All 2^d values indexed by mask (exactly 2^d calls)."""
        return np.array([self.evaluate(m) for m in range(1 << self.d)])

    def __repr__(self):
        kind = "deterministic" if self.deterministic else f"stochastic(seed={self.seed})"
        return f"ValueOracle({self.name or 'anonymous'}, d={self.d}, {kind}, calls={self.call_count})"


def modular_oracle(w, name="modular") -> ValueOracle:
    w = np.asarray(w, dtype=float)
    d = len(w)

    def fn(mask):
        return float(sum(w[i] for i in range(d) if mask >> i & 1))

    def chain(perm):
        return np.concatenate([[0.0], np.cumsum(w[perm])])

    return ValueOracle(fn, d, chain_fn=chain, name=name)


def table_oracle(values, name="table") -> ValueOracle:
    """Oracle backed by a precomputed 2^d table."""
    values = np.asarray(values, dtype=float)
    d = int(values.shape[0]).bit_length() - 1
    if values.shape[0] != 1 << d:
        raise ValueError("table length must be a power of two")

    def chain(perm):
        masks = np.concatenate([[0], np.cumsum(np.left_shift(1, perm))])
        return values[masks]

    return ValueOracle(lambda m: values[m], d, chain_fn=chain, name=name)


def complement_oracle(oracle: ValueOracle) -> ValueOracle:
    """S -> H(V minus S).

    The prefixes of perm map to the suffixes of perm, i.e. the prefixes of
    the reversed permutation read backwards, so chains stay one chain call.
    """
    full = (1 << oracle.d) - 1

    def fn(mask):
        return oracle.evaluate(full ^ mask)

    def chain(perm):
        return oracle.chain(np.asarray(perm)[::-1])[::-1].copy()

    wrapped = ValueOracle(
        fn, oracle.d, deterministic=oracle.deterministic, seed=oracle.seed,
        name=f"complement({oracle.name})", chain_fn=chain,
    )
    return wrapped


@dataclass
class Decomposition:
    """H = F - G with F alpha-weakly DR-submodular and G beta-weakly DR-supermodular."""

    F: ValueOracle
    G: ValueOracle
    alpha: float
    beta: float

    def lipschitz(self) -> float:
        """F(V) + G(V), a bound on ||kappa||_2 for the greedy vectors of F - G."""
        full = (1 << self.F.d) - 1
        return self.F.evaluate(full) + self.G.evaluate(full)

    def difference(self, name="F-G") -> ValueOracle:
        F, G = self.F, self.G

        def fn(mask):
            return F.evaluate(mask) - G.evaluate(mask)

        def chain(perm):
            return F.chain(perm) - G.chain(perm)

        return ValueOracle(fn, F.d, chain_fn=chain, name=name)


def marginal_gain(oracle: ValueOracle, i: int, A) -> float:
    mask = as_mask(A)
    if mask >> i & 1:
        raise ElementPresentError(f"element {i} already in the set")
    return oracle.evaluate(mask | (1 << i)) - oracle.evaluate(mask)


def _require_exhaustive(oracle, limit, hard_limit=None, allow_large=False):
    if not oracle.deterministic:
        raise StochasticOracleError("exhaustive routines need a deterministic oracle")
    cap = hard_limit if (allow_large and hard_limit) else limit
    if oracle.d > cap:
        raise DimensionError(f"d={oracle.d} exceeds exhaustive limit {cap}")


def brute_force_min(oracle: ValueOracle, allow_large: bool = False):
    """Exhaustive minimiser over all 2^d subsets.

    Ties go to the smallest cardinality, then the smallest mask.  d <= 20,
    or d <= 25 with ``allow_large``.
    """
    _require_exhaustive(oracle, 20, 25, allow_large)
    table = oracle.table()
    mask, value = kernels.table_argmin(table, oracle.d)
    return Subset(mask, oracle.d), value


@dataclass(frozen=True)
class DrParameters:
    """Exhaustive weak-DR parameters with the pairs that attain them.

    Witnesses are (i, A, B) with A a subset of B and i outside B.  A ratio
    of nan means no pair had a positive denominator.
    """

    alpha: float
    beta: float
    witness_alpha: Optional[tuple]
    witness_beta: Optional[tuple]
    direction: str = "non_decreasing"
    zero_denominator_pairs: int = 0


def _witness(d, i, a, b):
    if i < 0:
        return None
    return (i, Subset(a, d), Subset(b, d))


def check_monotone(table, d, direction="non_decreasing", tol=0.0):
    """Raise NotMonotoneError unless every single-element marginal has the right sign."""
    lo, li, la, hi, hi_i, ha = kernels.marginal_extremes(table, d)
    if direction == "non_decreasing" and lo < -tol:
        raise NotMonotoneError(
            f"F({li} | {Subset(la, d)}) = {lo} < 0", li, Subset(la, d), lo)
    if direction == "non_increasing" and hi > tol:
        raise NotMonotoneError(
            f"F({hi_i} | {Subset(ha, d)}) = {hi} > 0", hi_i, Subset(ha, d), hi)
    return lo, hi


def dr_parameters_from_table(table, d, direction="non_decreasing", rel_tol=1e-12):
    """Weak-DR (alpha, beta) of a tabulated monotone function.

    Marginals with |F(i|A)| <= rel_tol * max(1, max|F|) are treated as 0.
    """
    if direction not in ("non_decreasing", "non_increasing"):
        raise ValueError(f"unknown direction {direction!r}")
    table = np.asarray(table, dtype=float)
    tol = rel_tol * max(1.0, float(np.max(np.abs(table))))
    check_monotone(table, d, direction, tol)
    ni = direction == "non_increasing"
    a, ai, aa, ab, apos = kernels.ratio_scan(table, d, False, ni, tol)
    b, bi, ba, bb, bpos = kernels.ratio_scan(table, d, True, ni, tol)
    if ai < 0 and bi < 0:
        raise DegenerateError("every marginal is zero")
    npairs = d * 3 ** (d - 1)
    return DrParameters(
        alpha=a, beta=b,
        witness_alpha=_witness(d, ai, aa, ab),
        witness_beta=_witness(d, bi, ba, bb),
        direction=direction,
        zero_denominator_pairs=npairs - apos,
    )


def estimate_dr_parameters(oracle: ValueOracle, monotone_direction="non_decreasing",
                           rel_tol=1e-12) -> DrParameters:
    """Exhaustive weak-DR parameters (d <= 16).

    For a non-decreasing F, alpha is the smallest F(i|A)/F(i|B) and beta the
    smallest F(i|B)/F(i|A) over A subset-of B, i not in B; pairs with a zero
    denominator are skipped.  For non-increasing F the extrema are maxima.
    """
    _require_exhaustive(oracle, 16)
    return dr_parameters_from_table(oracle.table(), oracle.d, monotone_direction, rel_tol)


def ratio_at(table, witness, beta=False, nonincreasing=False):
    """Recompute the ratio a witness triple attains."""
    i, A, B = witness
    bit = 1 << i
    mA = table[A.mask | bit] - table[A.mask]
    mB = table[B.mask | bit] - table[B.mask]
    if nonincreasing:
        mA, mB = -mA, -mB
    return mB / mA if beta else mA / mB
