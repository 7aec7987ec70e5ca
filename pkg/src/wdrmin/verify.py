"""Self-check suite: exhaustive invariants on small instances, reported as pass/fail entries."""

import time

import numpy as np

from . import decomp, kernels, pgm
from .core import (
    Subset,
    brute_force_min,
    dr_parameters_from_table,
    ratio_at,
    table_oracle,
)
from .lovasz import greedy_subgradient, lovasz_from_chain, lovasz_value
from .numerics import chain_gains, chol_factor
from .zoo import constructions, cuts
from .zoo.sparsity import RegressionInstance

LEVELS = {"fast": 8, "full": 12}


def _bits(d):
    idx = np.arange(1 << d)
    return ((idx[:, None] >> np.arange(d)) & 1).astype(float)


def _instances(dmax, seed=0):
    """(name, H oracle, decomposition or None) for the zoo at ground-set size dmax."""
    out = []
    cut = cuts.random_graph(dmax, 0.5, seed=seed, unary_scale=1.0)
    out.append(("cut", cut.oracle(), cut.decomposition()))
    t = constructions.TightnessInstance(dmax, 0.5, 0.5)
    out.append(("tightness", t.oracle(), t.decomposition()))
    out.append(("concave", constructions.ConcaveCardinality(dmax, 0.5).oracle(), None))
    d_even = dmax - dmax % 2
    out.append(("hardness", constructions.HardnessInstance(d_even, seed=seed).oracle(), None))
    vals = decomp.random_set_function(min(dmax, 8), seed=seed)
    H = table_oracle(vals)
    F, G, spec = decomp.decompose(H, 1.0, 0.5)
    out.append(("decomposed", H, decomp.as_decomposition(F, G, spec)))
    return out


def _check_vertex(dmax, rng):
    for name, H, _ in _instances(dmax):
        d = H.d
        masks = range(1 << d) if d <= 10 else rng.integers(0, 1 << d, 256)
        for m in masks:
            S = Subset(int(m), d)
            lv, hv = lovasz_value(H, S.indicator()), H.evaluate(S)
            if abs(lv - hv) > 1e-9 * max(1.0, abs(hv)):
                return False, f"{name}: h_L(1_S) = {lv} but H(S) = {hv}", S
    return True, "", None


def _check_threshold(dmax, rng):
    for name, H, _ in _instances(dmax):
        for _ in range(50):
            s = rng.random(H.d)
            g = greedy_subgradient(H, s)
            a, b = float(g.kappa @ s), lovasz_from_chain(s, g.ordering.perm, g.chain_values)
            if abs(a - b) > 1e-9 * max(1.0, abs(a)):
                return False, f"{name}: kappa.s = {a} vs threshold sum {b}", s
    return True, "", None


def _check_set_bound(dmax, rng, kappa_hook=None):
    decs = [(n, H, dec) for n, H, dec in _instances(dmax) if dec is not None]
    for (a, b) in [(0.25, 0.5), (1.0, 0.25), (0.5, 1.0)]:
        t = constructions.TightnessInstance(min(dmax, 6), a, b)
        decs.append((f"tightness{a},{b}", t.oracle(), t.decomposition()))
    for name, H, dec in decs:
        d = H.d
        rhs = dec.F.table() / dec.alpha - dec.beta * dec.G.table()
        bits = _bits(d)
        for _ in range(20):
            kappa = greedy_subgradient(H, rng.random(d)).kappa
            if kappa_hook is not None:
                kappa = kappa_hook(kappa)
            lhs = bits @ kappa
            gap = lhs - rhs - 1e-9
            k = int(np.argmax(gap))
            if gap[k] > 0:
                return False, f"{name}: kappa(A) = {lhs[k]} > {rhs[k]}", Subset(k, d)
    return True, "", None


def _check_witness(dmax, rng):
    tables = [
        ("cut+modular", cuts.random_graph(dmax, 0.5, seed=1).decomposition().F.table(), dmax),
        ("concave", constructions.ConcaveCardinality(dmax, 0.5).oracle().table(), dmax),
        ("range", RegressionInstance(np.eye(dmax), np.ones(dmax)).regularizer_oracle().table(), dmax),
    ]
    for name, table, d in tables:
        p = dr_parameters_from_table(table, d)
        for beta, r, w in ((False, p.alpha, p.witness_alpha), (True, p.beta, p.witness_beta)):
            if w is not None and ratio_at(table, w, beta) != r:
                return False, f"{name}: witness gives {ratio_at(table, w, beta)}, reported {r}", w
    return True, "", None


def _check_tightness(dmax, rng):
    grid = [0.25, 0.5, 1.0]
    for a in grid:
        for b in grid:
            if a * b >= 1:
                continue
            for d in range(4, min(dmax, 8) + 1):
                t = constructions.TightnessInstance(d, a, b)
                res = pgm.minimize(t.oracle(), pgm.PgmConfig(T=20, s1=t.adversarial_start()))
                _, opt = brute_force_min(t.oracle())
                if res.rounded_value != 0.0 or opt != (a - 1 / b) * (d - 1) or np.any(res.trajectory[:, 1]):
                    return False, f"alpha={a}, beta={b}, d={d}: value {res.rounded_value}, optimum {opt}", (a, b, d)
    return True, "", None


def _check_roundtrip(dmax, rng):
    d = min(dmax, 8)
    for seed in range(5):
        vals = decomp.random_set_function(d, seed=seed)
        for a, b in ((1.0, 0.5), (0.5, 0.5)):
            F, G, spec = decomp.decompose(table_oracle(vals), a, b)
            tf, tg = F.table(), G.table()
            if not np.array_equal(tf - tg, vals):
                return False, f"seed {seed}: F - G differs from H", seed
            pf = dr_parameters_from_table(tf, d)
            pg = dr_parameters_from_table(tg, d)
            if pf.alpha < a - 1e-12 or pg.alpha < a - 1e-12 or pg.beta < b - 1e-12:
                return False, f"seed {seed}: parameters {pf.alpha}, {pg.alpha}, {pg.beta}", seed
    return True, "", None


def _check_chain(dmax, rng):
    for trial in range(10):
        n = dmax
        X = rng.standard_normal((n + 3, n))
        M = X.T @ X + 0.1 * np.eye(n)
        B = rng.standard_normal((n, 2))
        perm = rng.permutation(n)
        gains = chain_gains(M, B, perm)
        for k in range(1, n + 1):
            idx = perm[:k]
            L = chol_factor(M[np.ix_(idx, idx)])
            z = np.linalg.solve(L, B[idx])
            ref = float(np.sum(z * z))
            if abs(gains[k] - ref) > 1e-10 * max(1.0, abs(ref)):
                return False, f"trial {trial}, prefix {k}: {gains[k]} vs {ref}", k
    return True, "", None


def _check_backends(dmax, rng):
    if kernels.compiled is None:
        return True, "compiled backend absent; skipped", None
    for d in range(1, dmax + 1):
        t = rng.standard_normal(1 << d)
        t[0] = 0
        for fn, args in (("ratio_scan", (t, d, False, False, 0.0)), ("violation_scan", (t, d, 0.5, True)),
                         ("marginal_extremes", (t, d)), ("table_argmin", (t, d))):
            a = getattr(kernels.compiled, fn)(*args)
            b = getattr(kernels.python, fn)(*args)
            if repr(a) != repr(b):
                return False, f"{fn} at d={d}: {a} vs {b}", d
    return True, "", None


CHECKS = [
    ("lovasz.vertex", _check_vertex),
    ("lovasz.threshold", _check_threshold),
    ("subgradient.bound", _check_set_bound),
    ("core.witnesses", _check_witness),
    ("tightness.identities", _check_tightness),
    ("decomp.roundtrip", _check_roundtrip),
    ("numerics.chain", _check_chain),
    ("kernels.backends", _check_backends),
]


def verify_suite(level="fast", kappa_hook=None, seed=0):
    """One entry per invariant: {check, passed, detail, counterexample, seconds}.

    ``kappa_hook`` transforms every greedy vector in the per-set bound check; it
    exists so that a deliberately broken subgradient can be shown to fail.
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {sorted(LEVELS)}")
    dmax = LEVELS[level]
    report = []
    for name, fn in CHECKS:
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        if name == "subgradient.bound":
            ok, detail, witness = fn(dmax, rng, kappa_hook)
        else:
            ok, detail, witness = fn(dmax, rng)
        report.append({"check": name, "passed": bool(ok), "detail": detail,
                       "counterexample": None if witness is None else repr(witness),
                       "seconds": time.perf_counter() - t0})
    return report
