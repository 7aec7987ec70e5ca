import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from wdrmin.core import Subset, modular_oracle, table_oracle
from wdrmin.errors import NotNormalizedError
from wdrmin.lovasz import (
    fractional_point,
    greedy_subgradient,
    lovasz_from_chain,
    lovasz_value,
    order_coordinates,
    round_by_superlevel,
)
from wdrmin.zoo import path_graph, random_graph

unit = st.floats(0, 1, allow_nan=False)


def test_order_is_stable_with_ascending_ties():
    np.testing.assert_array_equal(order_coordinates([0.5, 0.9, 0.5, 0.9]).perm, [1, 3, 0, 2])


def test_fractional_point_clamps_roundoff_only():
    np.testing.assert_array_equal(fractional_point([1 + 1e-13, -1e-13]), [1.0, 0.0])
    with pytest.raises(ValueError):
        fractional_point([1.01, 0.0])
    with pytest.raises(ValueError):
        fractional_point([np.nan])


def test_path_graph_kappa():
    # d=3 path with unit weights, s = (0.2, 0.9, 0.5): order 1, 2, 0
    H = path_graph(3).oracle()
    g = greedy_subgradient(H, [0.2, 0.9, 0.5])
    np.testing.assert_array_equal(g.ordering.perm, [1, 2, 0])
    np.testing.assert_array_equal(g.chain_values, [0, 2, 1, 0])
    np.testing.assert_array_equal(g.kappa, [-1, 2, -1])
    assert H.call_count == 4


def test_modular_extension_is_linear():
    H = modular_oracle([1.0, -2.0, 3.0])
    assert lovasz_value(H, [0.5, 0.25, 1.0]) == pytest.approx(0.5 - 0.5 + 3)


@given(st.integers(0, 255))
def test_vertex_values(mask):
    H = random_graph(8, seed=11, unary_scale=1.5).oracle()
    S = Subset(mask, 8)
    assert lovasz_value(H, S.indicator()) == pytest.approx(H(S), rel=1e-12, abs=1e-12)


@given(arrays(float, 6, elements=unit))
def test_threshold_form_matches_kappa(s):
    H = random_graph(6, seed=2, unary_scale=1.0).oracle()
    g = greedy_subgradient(H, s)
    assert float(g.kappa @ s) == pytest.approx(lovasz_from_chain(s, g.ordering.perm, g.chain_values), abs=1e-12)


@given(arrays(float, 5, elements=unit), arrays(float, 5, elements=unit))
def test_convex_for_cuts(a, b):
    H = random_graph(5, seed=4).oracle()
    mid = 0.5 * (a + b)
    assert lovasz_value(H, mid) <= 0.5 * (lovasz_value(H, a) + lovasz_value(H, b)) + 1e-12


def test_positive_homogeneity():
    H = random_graph(6, seed=8, unary_scale=1.0).oracle()
    s = np.linspace(0.1, 0.6, 6)
    assert lovasz_value(H, 0.5 * s) == pytest.approx(0.5 * lovasz_value(H, s))


def test_not_normalized_warns_then_shifts():
    vals = np.array([1.0, 2.0, 4.0, 3.0])
    H = table_oracle(vals)
    with pytest.warns(RuntimeWarning):
        v = lovasz_value(H, [1.0, 1.0])
    assert v == 2.0
    with pytest.raises(NotNormalizedError):
        lovasz_value(H, [1.0, 0.0], strict=True)


def test_normalized_is_silent():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lovasz_value(modular_oracle([1, 2]), [0.3, 0.3])


def test_rounding_returns_best_prefix_with_smallest_k():
    H = path_graph(3).oracle()
    S, v = round_by_superlevel(H, [0.2, 0.9, 0.5])
    assert S.mask == 0 and v == 0   # empty and V tie at 0
    S, v = round_by_superlevel(modular_oracle([-1, 2, -3]), [0.9, 0.1, 0.8])
    assert set(S) == {0, 2} and v == -4


def test_kappa_on_subset():
    g = greedy_subgradient(modular_oracle([1, 2, 4]), [0.1, 0.2, 0.3])
    assert g.on(Subset.from_indices([0, 2], 3)) == 5
