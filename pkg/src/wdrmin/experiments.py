"""Desk-scale experiment sweeps with deterministic CSV output."""

import csv
import io
import math
import time

import numpy as np

from . import noise, pgm
from .core import brute_force_min
from .errors import ConfigError
from .instances import build_instance
from .zoo import constructions
from .zoo.sparsity import best_interval, estimation_error, generate_regression, support_error

SCHEMA = 1
CSV_VERSION = "wdrmin-results-v1"
COLUMNS = [
    "experiment", "method", "sweep", "sweep_value", "seed", "rep", "best_value", "optimum", "gap",
    "support_error", "estimation_error", "alpha_T", "beta_T", "oracle_calls", "audit", "wall_time",
]
EXPERIMENTS = ("noisy_mincut", "noisy_clustering", "structured_sparsity", "tightness_demo",
               "hardness_demo", "verify")
DEFAULT_LAMBDAS = list(np.logspace(-4, 1, 10))


def _row(**kw):
    row = {c: "" for c in COLUMNS}
    row.update(kw)
    return row


def _pgm_config(cfg, **over):
    solver = dict(cfg.get("solver", {}))
    solver.update(over)
    known = {"T", "step_rule", "L", "R", "s1", "step_scale"}
    bad = set(solver) - known
    if bad:
        raise ConfigError(f"unknown solver fields: {sorted(bad)}")
    conf = pgm.PgmConfig(**solver)
    conf.validate()
    return conf


def _T(cfg, default):
    """Iteration count: top-level T, then solver.T, then the experiment default."""
    return int(cfg.get("T", cfg.get("solver", {}).get("T", default)))


def _audit(value, optimum):
    if optimum is None or (isinstance(optimum, float) and math.isnan(optimum)):
        return "skipped"
    return "ok" if value >= optimum - 1e-9 * max(1.0, abs(optimum)) else "below-optimum"


def _noisy(cfg, name, base_dir):
    default = {"type": "layered"} if name == "noisy_mincut" else {"type": "two_moons", "n_points": 16}
    inst = build_instance(cfg.get("instance") or default, base_dir)
    if inst.d > 20:
        raise ConfigError("noisy experiments audit against brute force; keep d <= 20")
    _, opt = brute_force_min(inst.oracle)
    m_values = cfg.get("m_values", [1, 10, 100])
    if not m_values:
        raise ConfigError("m_values must be non-empty")
    sigma = float(cfg.get("noise_sigma", 0.1))
    reps = int(cfg.get("repetitions", 20))
    seed0 = int(cfg.get("seed", 0))
    conf = _pgm_config(cfg, T=_T(cfg, 400))
    rows = []
    for m in m_values:
        for rep in range(reps):
            seed = seed0 + rep
            spec = noise.NoiseSpec("multiplicative", "gaussian", 1.0, sigma, seed=seed)
            t0 = time.perf_counter()
            res = noise.minimize_noisy(inst.oracle, spec, m=int(m), T=conf.T, config=conf)
            tv = res.diagnostics["true_value"]
            rows.append(_row(experiment=name, method=f"pgm-{conf.step_rule}", sweep="m", sweep_value=int(m),
                             seed=seed, rep=rep, best_value=tv, optimum=opt, gap=tv - opt,
                             oracle_calls=res.oracle_calls, audit=_audit(tv, opt),
                             wall_time=time.perf_counter() - t0))
    return rows


def _sparsity(cfg, name):
    d = int(cfg.get("d", 40))
    k = int(cfg.get("k", 6))
    n_values = cfg.get("n_values", [20, 80])
    lams = cfg.get("lambdas", DEFAULT_LAMBDAS)
    regs = cfg.get("regularizers", ["modified_range"])
    if not n_values or not lams or not regs:
        raise ConfigError("sweep grids must be non-empty")
    reps = int(cfg.get("repetitions", 5))
    seed0 = int(cfg.get("seed", 0))
    conf = _pgm_config(cfg, T=_T(cfg, 1000))
    rows = []
    for reg in regs:
        method = {"modified_range": "PGM-ModRange", "range": "PGM-Range"}.get(reg, f"PGM-{reg}")
        for n in n_values:
            for lam in lams:
                for rep in range(reps):
                    seed = seed0 + rep
                    inst, x = generate_regression(d, int(n), k, float(cfg.get("noise_sigma", 0.01)), seed,
                                                  lam=float(lam), regularizer=reg, rank_policy="pinv")
                    H = inst.oracle()
                    S_opt, opt = best_interval(inst.oracle())
                    dec = inst.decomposition(beta=1.0)
                    t0 = time.perf_counter()
                    res = pgm.minimize(H, conf, decomposition=dec, S_star=S_opt)
                    rows.append(_row(
                        experiment=name, method=method, sweep=f"n={int(n)};lambda", sweep_value=float(lam),
                        seed=seed, rep=rep, best_value=res.rounded_value, optimum=opt,
                        gap=res.rounded_value - opt, support_error=support_error(res.rounded_set, x),
                        estimation_error=estimation_error(inst, res.rounded_set, x),
                        alpha_T=res.alpha_T, beta_T=res.beta_T, oracle_calls=res.oracle_calls,
                        audit="interval-opt" if reg == "modified_range" else "skipped",
                        wall_time=time.perf_counter() - t0))
    return rows


def _tightness(cfg, name):
    d = int(cfg.get("d", 5))
    alpha, beta = float(cfg.get("alpha", 0.5)), float(cfg.get("beta", 0.5))
    inst = constructions.TightnessInstance(d, alpha, beta)
    conf = _pgm_config(cfg, T=_T(cfg, 100), s1=inst.adversarial_start())
    t0 = time.perf_counter()
    res = pgm.minimize(inst.oracle(), conf)
    _, opt = brute_force_min(inst.oracle())
    return [_row(experiment=name, method="pgm-adversarial", sweep="d", sweep_value=d, seed=cfg.get("seed", 0),
                 rep=0, best_value=res.rounded_value, optimum=opt, gap=res.rounded_value - opt,
                 oracle_calls=res.oracle_calls, audit=_audit(res.rounded_value, opt),
                 wall_time=time.perf_counter() - t0)]


def _hardness(cfg, name):
    d = int(cfg.get("d", 12))
    reps = int(cfg.get("repetitions", 5))
    seed0 = int(cfg.get("seed", 0))
    conf = _pgm_config(cfg, T=_T(cfg, 200))
    rows = []
    for rep in range(reps):
        inst = constructions.HardnessInstance(d, cfg.get("eps"), float(cfg.get("alpha", 0.5)),
                                              float(cfg.get("delta", 1.0)), seed0 + rep)
        t0 = time.perf_counter()
        res = pgm.minimize(inst.oracle(), conf)
        opt = inst.low_value
        rows.append(_row(experiment=name, method="pgm", sweep="eps", sweep_value=inst.eps, seed=seed0 + rep,
                         rep=rep, best_value=res.rounded_value, optimum=opt, gap=res.rounded_value - opt,
                         oracle_calls=res.oracle_calls, audit=_audit(res.rounded_value, opt),
                         wall_time=time.perf_counter() - t0))
    return rows


def _verify(cfg, name):
    from .verify import verify_suite
    rows = []
    for i, entry in enumerate(verify_suite(cfg.get("level", "fast"))):
        rows.append(_row(experiment=name, method=entry["check"], sweep="level",
                         sweep_value=cfg.get("level", "fast"), seed=0, rep=i,
                         audit="ok" if entry["passed"] else "FAIL", wall_time=entry["seconds"]))
    return rows


def run_experiment(cfg: dict, base_dir: str = "."):
    """Rows for every (sweep point, repetition) plus averaged rows, in sorted order."""
    if cfg.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError(f"unsupported config schema {cfg.get('schema')!r}")
    name = cfg.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    if name in ("noisy_mincut", "noisy_clustering"):
        rows = _noisy(cfg, name, base_dir)
    elif name == "structured_sparsity":
        rows = _sparsity(cfg, name)
    elif name == "tightness_demo":
        rows = _tightness(cfg, name)
    elif name == "hardness_demo":
        rows = _hardness(cfg, name)
    else:
        rows = _verify(cfg, name)
    return _with_means(rows)


def _with_means(rows):
    numeric = ["best_value", "optimum", "gap", "support_error", "estimation_error", "alpha_T", "beta_T",
               "oracle_calls"]
    groups = {}
    for r in rows:
        groups.setdefault((r["experiment"], r["method"], r["sweep"], r["sweep_value"]), []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k[:3]) + (_sortable(k[3]),)):
        members = sorted(groups[key], key=lambda r: r["rep"])
        out.extend(members)
        if len(members) > 1:
            mean = _row(experiment=key[0], method=key[1], sweep=key[2], sweep_value=key[3], seed="",
                        rep="mean", audit="")
            for c in numeric:
                vals = [float(r[c]) for r in members if r[c] != "" and r[c] is not None]
                vals = [v for v in vals if not math.isnan(v)]
                mean[c] = float(np.mean(vals)) if vals else ""
            mean["wall_time"] = float(sum(r["wall_time"] for r in members if r["wall_time"] != ""))
            out.append(mean)
    return out


def _sortable(v):
    return (0, float(v), "") if isinstance(v, (int, float)) else (1, 0.0, str(v))


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def rows_to_csv(rows, include_wall_time=True) -> str:
    cols = COLUMNS if include_wall_time else [c for c in COLUMNS if c != "wall_time"]
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def write_csv(rows, path, include_wall_time=True):
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows, include_wall_time))
