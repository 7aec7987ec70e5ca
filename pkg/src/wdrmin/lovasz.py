"""Lovasz extension, greedy (Edmonds) subgradients and superlevel-set rounding."""

import warnings
from dataclasses import dataclass

import numpy as np

from .core import Subset, ValueOracle
from .errors import NotNormalizedError

BOX_TOL = 1e-12
NORMALIZATION_TOL = 1e-9


def fractional_point(s) -> np.ndarray:
    """Validate a point of the unit box, clamping round-off within 1e-12."""
    s = np.array(s, dtype=float)
    if s.ndim != 1:
        raise ValueError("fractional point must be a vector")
    if np.any(s < -BOX_TOL) or np.any(s > 1 + BOX_TOL) or not np.all(np.isfinite(s)):
        raise ValueError("fractional point outside [0, 1]^d")
    return np.clip(s, 0.0, 1.0)


@dataclass(frozen=True)
class Ordering:
    perm: np.ndarray

    @property
    def d(self):
        return len(self.perm)

    def prefix_masks(self) -> np.ndarray:
        """Masks of S_0 = {} , S_1, ..., S_d = V."""
        return np.concatenate([[0], np.cumsum(np.left_shift(1, self.perm.astype(np.int64)))])

    def prefix_sets(self):
        return [Subset(int(m), self.d) for m in self.prefix_masks()]


@dataclass(frozen=True)
class GreedyVector:
    kappa: np.ndarray
    ordering: Ordering
    chain_values: np.ndarray

    def on(self, S) -> float:
        """kappa(S) = sum of kappa over the elements of S."""
        return float(sum(self.kappa[i] for i in S))


def order_coordinates(s) -> Ordering:
    """Decreasing order of the coordinates; ties by ascending index."""
    s = np.asarray(s, dtype=float)
    return Ordering(np.argsort(-s, kind="stable").astype(np.int64))


def _check_normalized(h0, strict):
    if abs(h0) > NORMALIZATION_TOL:
        if strict:
            raise NotNormalizedError(f"H(empty) = {h0}, expected 0")
        warnings.warn(f"H(empty) = {h0}; values are shifted so that H(empty) = 0",
                      RuntimeWarning, stacklevel=3)


def greedy_subgradient(oracle: ValueOracle, s) -> GreedyVector:
    """Chain marginals along the decreasing order of s (d+1 oracle calls)."""
    order = order_coordinates(s)
    values = oracle.chain(order.perm)
    kappa = np.empty(oracle.d)
    kappa[order.perm] = np.diff(values)
    return GreedyVector(kappa, order, values)


def lovasz_value(oracle: ValueOracle, s, strict: bool = False) -> float:
    """h_L(s) = kappa . s with kappa the greedy vector at s.

    The chain includes H(empty); a nonzero value triggers a warning (or
    NotNormalizedError with ``strict``) and the extension of H - H(empty)
    is returned, which is what kappa . s computes anyway.
    """
    s = fractional_point(s)
    g = greedy_subgradient(oracle, s)
    _check_normalized(g.chain_values[0], strict)
    return float(g.kappa @ s)


def lovasz_from_chain(s, perm, values) -> float:
    """Threshold form: sum_k (s_jk - s_jk+1) H(S_k) + s_jd H(V), shifted by H(empty)."""
    sv = np.asarray(s, dtype=float)[perm]
    h = np.asarray(values, dtype=float) - values[0]
    gaps = np.append(sv[:-1] - sv[1:], sv[-1])
    return float(gaps @ h[1:])


def round_by_superlevel(oracle: ValueOracle, s):
    """Best superlevel set of s: argmin over the d+1 chain sets (smallest k on ties)."""
    order = order_coordinates(s)
    values = oracle.chain(order.perm)
    k = int(np.argmin(values))
    masks = order.prefix_masks()
    return Subset(int(masks[k]), oracle.d), float(values[k])
