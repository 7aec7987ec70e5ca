"""Build oracles from JSON-style instance descriptions."""

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Decomposition, ValueOracle, modular_oracle, table_oracle
from .errors import ConfigError
from .zoo import constructions, cuts, gp, sparsity


@dataclass
class Instance:
    oracle: ValueOracle
    decomposition: Optional[Decomposition] = None
    source: object = None
    extras: dict = field(default_factory=dict)

    @property
    def d(self):
        return self.oracle.d


def _need(spec, *keys):
    missing = [k for k in keys if k not in spec]
    if missing:
        raise ConfigError(f"instance {spec.get('type')!r} is missing {', '.join(missing)}")


def build_instance(spec: dict, base_dir: str = ".", seed: Optional[int] = None) -> Instance:
    """``spec['type']`` picks the family; ``seed`` overrides any seed field."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("instance must be an object with a 'type' field")
    kind = spec["type"]
    s = dict(spec)
    if seed is not None and "seed" in s:
        s["seed"] = seed
    if kind == "modular":
        _need(s, "w")
        return Instance(modular_oracle(s["w"]))
    if kind == "table":
        _need(s, "values")
        return Instance(table_oracle(s["values"]))
    if kind == "cut":
        _need(s, "d", "edges")
        inst = cuts.CutInstance(int(s["d"]), [tuple(e) for e in s["edges"]], s.get("source_caps"),
                                s.get("sink_caps"), bool(s.get("directed", False)))
        return Instance(inst.oracle(), inst.decomposition(), inst)
    if kind == "dimacs":
        _need(s, "path")
        path = s["path"] if os.path.isabs(s["path"]) else os.path.join(base_dir, s["path"])
        if not os.path.exists(path):
            raise ConfigError(f"DIMACS file not found: {path}")
        inst = cuts.read_dimacs(path)
        return Instance(inst.oracle(), inst.decomposition(), inst,
                        {"offset": inst.offset, "arcs": inst.n_arcs})
    if kind == "layered":
        inst = cuts.layered_graph(int(s.get("frame_side", 2)), int(s.get("frames", 3)), int(s.get("seed", 0)))
        return Instance(inst.oracle(), inst.decomposition(), inst)
    if kind == "two_moons":
        inst = cuts.two_moons(int(s.get("n_points", 24)), int(s.get("n_labeled", 4)),
                              float(s.get("noise", 0.1)), seed=int(s.get("seed", 0)))
        return Instance(inst.oracle(), inst.decomposition(), inst)
    if kind == "tightness":
        _need(s, "d", "alpha", "beta")
        inst = constructions.TightnessInstance(int(s["d"]), float(s["alpha"]), float(s["beta"]),
                                               int(s.get("bad_element", 0)))
        return Instance(inst.oracle(), inst.decomposition(), inst)
    if kind == "hardness":
        _need(s, "d")
        inst = constructions.HardnessInstance(int(s["d"]), s.get("eps"), float(s.get("alpha", 0.5)),
                                              float(s.get("delta", 1.0)), int(s.get("seed", 0)))
        return Instance(inst.oracle(), None, inst)
    if kind == "concave_cardinality":
        _need(s, "d", "beta")
        inst = constructions.ConcaveCardinality(int(s["d"]), float(s["beta"]))
        return Instance(inst.oracle(), None, inst)
    if kind == "regression":
        _need(s, "d", "n", "k")
        inst, x = sparsity.generate_regression(
            int(s["d"]), int(s["n"]), int(s["k"]), float(s.get("noise_sigma", 0.01)), int(s.get("seed", 0)),
            sigma2=float(s.get("sigma2", 0.0)), lam=float(s.get("lam", 1.0)),
            regularizer=s.get("regularizer", "modified_range"), rank_policy=s.get("rank_policy", "pinv"))
        dec = inst.decomposition(beta=float("nan") if inst.d > 16 else None)
        return Instance(inst.oracle(), dec, inst, {"x_true": x})
    if kind == "gp":
        _need(s, "d")
        K = gp.random_kernel(int(s["d"]), int(s.get("seed", 0)), float(s.get("lengthscale", 1.0)))
        inst = gp.GpInstance(K, float(s.get("sigma2", 0.1)), lam=float(s.get("lam", 0.5)))
        return Instance(inst.oracle(), inst.decomposition(), inst)
    raise ConfigError(f"unknown instance type {kind!r}")
