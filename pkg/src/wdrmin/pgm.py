"""Projected subgradient descent on the Lovasz extension, plus certificates."""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .core import Decomposition, Subset, ValueOracle, complement_oracle
from .errors import ConfigError, DegenerateError
from .lovasz import NORMALIZATION_TOL, fractional_point, greedy_subgradient, order_coordinates

STEP_RULES = ("fixed_theorem", "fixed_sqrt", "polyak")


def project_box(x) -> np.ndarray:
    return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


@dataclass
class PgmConfig:
    T: int = 1000
    step_rule: str = "fixed_theorem"
    L: Union[float, str, None] = "estimate"
    R: Optional[float] = None
    s1: Optional[np.ndarray] = None
    seed: int = 0
    step_scale: float = 1.0
    keep_orderings: bool = False

    def validate(self):
        if int(self.T) != self.T or self.T < 1:
            raise ConfigError(f"T must be a positive integer, got {self.T}")
        if self.step_rule not in STEP_RULES:
            raise ConfigError(f"unknown step rule {self.step_rule!r}")
        if self.L is not None and self.L != "estimate":
            if not float(self.L) > 0:
                raise ConfigError("L must be positive")
        if self.R is not None and not self.R > 0:
            raise ConfigError("R must be positive")
        if not self.step_scale > 0:
            raise ConfigError("step_scale must be positive")


@dataclass
class PgmResult:
    best_point: np.ndarray
    best_lovasz: float
    rounded_set: Subset
    rounded_value: float
    trajectory: np.ndarray  # rows (h_L(s^t), ||kappa^t||_2)
    oracle_calls: int
    alpha_T: Optional[float] = None
    beta_T: Optional[float] = None
    L: float = float("nan")
    L_estimated: bool = False
    R: float = float("nan")
    bound: Optional[float] = None
    orderings: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def T(self):
        return len(self.trajectory)


def _resolve_L(config, decomposition):
    if config.L not in (None, "estimate"):
        return float(config.L), False
    if decomposition is not None:
        L = decomposition.lipschitz()
        if L > 0:
            return L, False
    return 0.0, True


def minimize(oracle: ValueOracle, config: PgmConfig = None,
             decomposition: Optional[Decomposition] = None,
             S_star: Optional[Subset] = None) -> PgmResult:
    """Run T projected subgradient steps on h_L and round the best iterate.

    ``decomposition`` (F, G, alpha, beta) fixes L = F(V) + G(V) when the
    config leaves L to be estimated; together with ``S_star`` it also
    produces alpha_T, beta_T and the certified bound.
    """
    config = config or PgmConfig()
    config.validate()
    d = oracle.d
    T = int(config.T)
    R = float(config.R) if config.R is not None else 2.0 * math.sqrt(d)
    L, estimated = _resolve_L(config, decomposition)
    calls0 = oracle.call_count

    h0 = 0.0
    if oracle.deterministic:
        h0 = oracle.evaluate(0)
        if abs(h0) > NORMALIZATION_TOL:
            warnings.warn(f"H(empty) = {h0}; minimizing H - H(empty)", RuntimeWarning, stacklevel=2)
        else:
            h0 = 0.0

    s = fractional_point(np.full(d, 0.5) if config.s1 is None else config.s1)
    if s.shape != (d,):
        raise ConfigError(f"s1 has length {s.shape[0]}, expected {d}")

    traj = np.empty((T, 2))
    track = config.keep_orderings or (decomposition is not None and S_star is not None)
    perms = np.empty((T, d), dtype=np.int64) if track else None
    best_h, best_s = math.inf, s
    gamma0 = None
    for t in range(1, T + 1):
        g = greedy_subgradient(oracle, s)
        kappa = g.kappa
        h = float(kappa @ s)
        knorm = float(np.sqrt(kappa @ kappa))
        traj[t - 1] = (h, knorm)
        if perms is not None:
            perms[t - 1] = g.ordering.perm
        if h < best_h:
            best_h, best_s = h, s
        if estimated:
            L = max(L, knorm)
        if knorm == 0.0:
            continue
        if config.step_rule == "fixed_theorem":
            eta = config.step_scale * R / (L * math.sqrt(T))
        elif config.step_rule == "fixed_sqrt":
            eta = config.step_scale * (R / L) / math.sqrt(t)
        else:
            if gamma0 is None:
                gamma0 = 0.1 * abs(h) + 1e-3
            eta = config.step_scale * (h - best_h + gamma0 / math.sqrt(t)) / (knorm * knorm)
        s = project_box(s - eta * kappa)

    order = order_coordinates(best_s)
    chain = oracle.chain(order.perm)
    k = int(np.argmin(chain))
    rounded = Subset(int(order.prefix_masks()[k]), d)
    result = PgmResult(
        best_point=best_s, best_lovasz=best_h, rounded_set=rounded,
        rounded_value=float(chain[k] - h0), trajectory=traj,
        oracle_calls=oracle.call_count - calls0, L=L, L_estimated=estimated, R=R,
        orderings=perms, diagnostics={"final_point": s, "h_empty": h0},
    )
    if decomposition is not None and S_star is not None:
        _certify(result, decomposition, S_star, R, T)
        if not config.keep_orderings:
            result.orderings = None
    return result


def _certify(result, dec, S_star, R, T):
    full = (1 << dec.F.d) - 1
    F_opt = dec.F.evaluate(S_star)
    G_opt = dec.G.evaluate(S_star)
    L_cert = dec.F.evaluate(full) + dec.G.evaluate(full)
    result.bound = certificate_bound(F_opt, G_opt, dec.alpha, dec.beta, L_cert, R, T)
    try:
        a, b, diag = empirical_alpha_beta(dec.F, dec.G, result.orderings, S_star, details=True)
    except DegenerateError as exc:
        a, b, diag = float("nan"), float("nan"), {"degenerate": str(exc)}
    result.alpha_T, result.beta_T = a, b
    result.diagnostics.update(diag)


def minimize_nonincreasing(oracle: ValueOracle, config: PgmConfig = None) -> PgmResult:
    """Minimise a non-increasing H by running on S -> H(V minus S) and complementing."""
    wrapped = complement_oracle(oracle)
    res = minimize(wrapped, config)
    res.rounded_set = res.rounded_set.complement()
    res.rounded_value = res.rounded_value + res.diagnostics["h_empty"]
    res.best_point = 1.0 - res.best_point
    res.diagnostics["complemented"] = True
    return res


def certificate_bound(F_opt, G_opt, alpha, beta, L, R, T) -> float:
    """F(S*)/alpha - beta G(S*) + R L / sqrt(T)."""
    if not (0 < alpha <= 1 and 0 < beta <= 1):
        raise ValueError(f"alpha, beta must lie in (0, 1], got {alpha}, {beta}")
    if T < 1:
        raise ValueError("T must be >= 1")
    return F_opt / alpha - beta * G_opt + R * L / math.sqrt(T)


def empirical_alpha_beta(F: ValueOracle, G: ValueOracle, orderings, S_star, details=False):
    """Trajectory averages of F(S*)/kappa_F(S*) and kappa_G(S*)/G(S*).

    Terms whose denominator is zero are skipped; the skipped counts come
    back in the diagnostics dict when ``details`` is set.
    """
    orderings = np.atleast_2d(np.asarray(orderings, dtype=np.int64))
    members = np.array(list(S_star), dtype=np.int64)
    F_opt = F.evaluate(S_star)
    G_opt = G.evaluate(S_star)
    a_terms, b_terms = [], []
    skip_a = skip_b = 0
    tol_f = 1e-12 * max(1.0, abs(F_opt))
    for perm in orderings:
        kf = np.empty(F.d)
        kf[perm] = np.diff(F.chain(perm))
        kg = np.empty(G.d)
        kg[perm] = np.diff(G.chain(perm))
        kF = float(kf[members].sum()) if members.size else 0.0
        kG = float(kg[members].sum()) if members.size else 0.0
        if abs(kF) <= tol_f:
            skip_a += 1
        else:
            a_terms.append(F_opt / kF)
        if G_opt == 0.0:
            skip_b += 1
        else:
            b_terms.append(kG / G_opt)
    if not a_terms and not b_terms:
        raise DegenerateError("every alpha_T and beta_T term has a zero denominator")
    a = float(np.mean(a_terms)) if a_terms else float("nan")
    b = float(np.mean(b_terms)) if b_terms else float("nan")
    if details:
        return a, b, {"alpha_T_skipped": skip_a, "beta_T_skipped": skip_b}
    return a, b
