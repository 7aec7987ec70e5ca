"""wdrmin command line: minimize, experiment, verify, decompose, params.

Exit codes: 0 success, 1 solver error, 2 configuration or input error.
"""

import argparse
import json
import logging
import os
import sys

from . import decomp, experiments, pgm
from .core import brute_force_min, estimate_dr_parameters
from .errors import ConfigError, DimacsParseError, WdrError
from .instances import build_instance
from .verify import verify_suite
from .zoo.cuts import read_dimacs  # noqa: F401  (re-exported for scripting)
from .zoo.sparsity import generate_regression  # noqa: F401

log = logging.getLogger("wdrmin")

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("schema", experiments.SCHEMA) != experiments.SCHEMA:
        raise ConfigError(f"unsupported schema {cfg.get('schema')!r}")
    return cfg


def _instance_from(args, cfg):
    base = os.path.dirname(os.path.abspath(args.config))
    if "instance" not in cfg:
        raise ConfigError("config needs an 'instance' object")
    return build_instance(cfg["instance"], base, seed=args.seed)


def _dump(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True, default=str)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_minimize(args):
    cfg = load_config(args.config)
    inst = _instance_from(args, cfg)
    conf = experiments._pgm_config(cfg)
    if cfg.get("nonincreasing"):
        res = pgm.minimize_nonincreasing(inst.oracle, conf)
    else:
        res = pgm.minimize(inst.oracle, conf, decomposition=inst.decomposition)
    out = {
        "rounded_set": list(res.rounded_set), "rounded_value": res.rounded_value,
        "best_lovasz": res.best_lovasz, "oracle_calls": res.oracle_calls,
        "T": res.T, "L": res.L, "L_estimated": res.L_estimated,
    }
    if inst.d <= 16 and inst.oracle.deterministic and cfg.get("audit", True):
        _, opt = brute_force_min(inst.oracle)
        out["brute_force_optimum"] = opt
    if "offset" in inst.extras:
        out["cut_capacity"] = res.rounded_value + inst.extras["offset"]
    _dump(out, args.out)
    return EXIT_OK


def cmd_experiment(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    rows = experiments.run_experiment(cfg, os.path.dirname(os.path.abspath(args.config)))
    out = args.out or cfg.get("output")
    if out:
        experiments.write_csv(rows, out)
        log.info("wrote %d rows to %s", len(rows), out)
    else:
        sys.stdout.write(experiments.rows_to_csv(rows))
    bad = [r for r in rows if r["audit"] in ("below-optimum", "FAIL")]
    return EXIT_SOLVER if bad else EXIT_OK


def cmd_verify(args):
    report = verify_suite(args.level)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for e in report:
            mark = "PASS" if e["passed"] else "FAIL"
            extra = f"  {e['detail']}  witness={e['counterexample']}" if not e["passed"] else ""
            print(f"{mark}  {e['check']:<22} {e['seconds']:.2f}s{extra}")
    return EXIT_OK if all(e["passed"] for e in report) else EXIT_SOLVER


def cmd_decompose(args):
    cfg = load_config(args.config)
    inst = _instance_from(args, cfg)
    alpha, beta = float(cfg.get("alpha", 1.0)), float(cfg.get("beta", 0.5))
    F, G, spec = decomp.decompose(inst.oracle, alpha, beta, cfg.get("eps_H_lower"))
    _dump({
        "alpha": spec.alpha, "beta": spec.beta, "eps_H_lower": spec.eps_H_lower,
        "eps_gprime": spec.eps_gprime, "scale": spec.scale,
        "witness": "cardinality" if spec.witness == "cardinality" else f"concave(a={spec.witness.a})",
        "Vminus": list(spec.Vminus), "correction": {str(k): v for k, v in spec.correction.items()},
    }, args.out)
    return EXIT_OK


def cmd_params(args):
    cfg = load_config(args.config)
    inst = _instance_from(args, cfg)
    direction = cfg.get("direction", "non_decreasing")
    targets = {"H": inst.oracle}
    if inst.decomposition is not None:
        targets = {"F": inst.decomposition.F, "G": inst.decomposition.G}
    out = {}
    for key, oracle in targets.items():
        p = estimate_dr_parameters(oracle, direction)
        out[key] = {"alpha": p.alpha, "beta": p.beta,
                    "witness_alpha": repr(p.witness_alpha), "witness_beta": repr(p.witness_beta),
                    "zero_denominator_pairs": p.zero_denominator_pairs}
    _dump(out, args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="wdrmin", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("config", help="JSON configuration file")
        sp.add_argument("--seed", type=int, default=None, help="override the seed in the config")
        sp.add_argument("-o", "--out", default=None, help="output path (default: stdout)")

    common(sub.add_parser("minimize", help="run PGM on one instance"))
    common(sub.add_parser("experiment", help="run a sweep and write CSV"))
    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--level", choices=["fast", "full"], default="fast")
    v.add_argument("--json", action="store_true")
    common(sub.add_parser("decompose", help="split H into F - G (d <= 14)"))
    common(sub.add_parser("params", help="exhaustive weak-DR parameters (d <= 16)"))
    return p


COMMANDS = {"minimize": cmd_minimize, "experiment": cmd_experiment, "verify": cmd_verify,
            "decompose": cmd_decompose, "params": cmd_params}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DimacsParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WdrError as exc:
        # most solver errors are also ValueErrors, so this must come first
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
