"""Steepest ascent over POVMs.

One round takes the gradient operators R_k at the current POVM, conjugates
each member with G_k = 1 + alpha (R_k - sum_l R_l Pi_l), and restores
completeness by conjugating with S^(-1/2), S = sum_k G_k^dagger Pi_k G_k.
The outer loop backtracks on alpha whenever the objective drops.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .ensemble import (
    Ensemble,
    JointDistribution,
    Povm,
    joint_probabilities,
    merge_equivalent,
    mutual_information,
    random_povm,
    perturb_ignorant,
)
from .errors import (
    AccInfoError,
    DimensionMismatch,
    NoProgress,
    ShapeMismatch,
    SingularMatrix,
    StepFailed,
)
from .linalg import herm, inv_sqrt, max_abs

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-12
RANK_TOL = 1e-10

Rule = Callable[[Ensemble, Povm, JointDistribution], np.ndarray]
Value = Callable[[Ensemble, Povm, JointDistribution], float]


@dataclass(frozen=True)
class GradientFunctional:
    """Objective to ascend, given by its operator gradient R_k.

    ``value`` defaults to sum_k tr(R_k Pi_k), which is exact for both built-in
    functionals.
    """

    kind: str
    rule: Optional[Rule] = None
    value: Optional[Value] = None


def _ai_rule(e: Ensemble, m: Povm, d: JointDistribution) -> np.ndarray:
    p_hat = np.maximum(d.p, PROB_FLOOR)
    col = d.col_marginals
    ratio = np.log(p_hat / np.outer(d.row_marginals, np.maximum(col, PROB_FLOOR)))
    ratio[:, col <= PROB_FLOOR] = 0.0
    return np.einsum("jk,jab->kab", ratio, e.states)


def _helstrom_rule(e: Ensemble, m: Povm, d: JointDistribution) -> np.ndarray:
    if m.K != e.J:
        raise ShapeMismatch(f"Helstrom functional needs K == J, got K={m.K}, J={e.J}")
    return e.states.copy()


ACCESSIBLE_INFORMATION = GradientFunctional(
    "accessible-information", _ai_rule, lambda e, m, d: mutual_information(d)
)
HELSTROM = GradientFunctional(
    "helstrom", _helstrom_rule, lambda e, m, d: float(np.trace(d.p))
)

FUNCTIONALS = {"ai": ACCESSIBLE_INFORMATION, "helstrom": HELSTROM}


def custom_functional(rule: Rule, value: Optional[Value] = None) -> GradientFunctional:
    return GradientFunctional("custom", rule, value)


def gradient_operators(e: Ensemble, m: Povm, f: GradientFunctional, d=None) -> np.ndarray:
    """R_k for every member, stacked as a (K, d, d) array."""
    if e.dim != m.dim:
        raise DimensionMismatch(f"ensemble dim {e.dim} != POVM dim {m.dim}")
    if d is None:
        d = joint_probabilities(e, m)
    rs = np.asarray(f.rule(e, m, d), dtype=complex)
    if rs.shape != m.members.shape:
        raise ShapeMismatch(f"gradient rule returned shape {rs.shape}, expected {m.members.shape}")
    return 0.5 * (rs + np.conj(np.transpose(rs, (0, 2, 1))))


def objective(e: Ensemble, m: Povm, f: GradientFunctional, d=None) -> float:
    if d is None:
        d = joint_probabilities(e, m)
    if f.value is not None:
        return float(f.value(e, m, d))
    rs = gradient_operators(e, m, f, d)
    return float(np.einsum("kab,kba->", rs, m.members).real)


def lagrange_operator(rs, m: Povm) -> np.ndarray:
    """Hermitian part of sum_k R_k Pi_k; its trace is the objective value."""
    rs = np.asarray(rs)
    if len(rs) != m.K:
        raise ShapeMismatch("one gradient operator per POVM member required")
    return herm(np.einsum("kab,kbc->ac", rs, m.members))


def stationarity_residual(m: Povm, rs) -> float:
    """max_{k,l} |Pi_l R_k Pi_k - Pi_l R_l Pi_k|, zero exactly at stationary POVMs."""
    rs = np.asarray(rs)
    pis = m.members
    if len(rs) != len(pis):
        raise ShapeMismatch("one gradient operator per POVM member required")
    # Pi_l (R_k - R_l) Pi_k for all pairs at once
    r_pi = rs @ pis                                   # R_k Pi_k
    a = np.einsum("lab,kbc->lkac", pis, r_pi)         # Pi_l R_k Pi_k
    b = np.einsum("lab,kbc->lkac", pis @ rs, pis)     # Pi_l R_l Pi_k
    return max_abs(a - b)


def ascent_gain(m: Povm, rs) -> float:
    """Slope dI/dalpha at alpha = 0 of one round.

    sum_{k,l} tr[(R_k - R_l) Pi_k (R_k - R_l) Pi_l]; never negative, and zero
    only at stationary POVMs.
    """
    rs = np.asarray(rs)
    pis = m.members
    if len(rs) != len(pis):
        raise ShapeMismatch("one gradient operator per POVM member required")
    total = 0.0
    for k in range(len(pis)):
        for l in range(len(pis)):
            dr = rs[k] - rs[l]
            total += np.trace(dr @ pis[k] @ dr @ pis[l]).real
    return float(total)


def tilde_members(m: Povm, rs, alpha: float) -> np.ndarray:
    """Unnormalized members G_k^dagger Pi_k G_k of one round."""
    rs = np.asarray(rs)
    lam = np.einsum("kab,kbc->ac", rs, m.members)    # not symmetrized
    g = np.eye(m.dim) + alpha * (rs - lam)
    return np.conj(np.transpose(g, (0, 2, 1))) @ m.members @ g


def iterate_round(m: Povm, e: Ensemble, f: GradientFunctional, alpha: float, rs=None) -> Povm:
    """One ascent round with step size ``alpha``."""
    if alpha == 0:
        return m
    if rs is None:
        rs = gradient_operators(e, m, f)
    tilde = tilde_members(m, rs, alpha)
    try:
        x = inv_sqrt(tilde.sum(axis=0))
    except SingularMatrix as exc:
        raise StepFailed(f"normalizer not invertible at alpha={alpha:g}") from exc
    new = x @ tilde @ x
    return Povm(0.5 * (new + np.conj(np.transpose(new, (0, 2, 1)))))


def davies_bound(e: Ensemble) -> int:
    """Upper bound on the number of POVM members ever needed.

    r^2 for r = rank of the total state, or r(r+1)/2 when every state is a real
    matrix in the computational basis.
    """
    w = np.linalg.eigvalsh(e.total)
    r = int(np.sum(w > RANK_TOL))
    if np.max(np.abs(e.states.imag)) <= 1e-12:
        return r * (r + 1) // 2
    return r * r


# --- optimization loop -------------------------------------------------------


@dataclass(frozen=True)
class IterationConfig:
    alpha0: Optional[float] = None       # None: 1 / (1 + max_k |R_k|_max) at the start
    alpha_grow: float = 1.1
    alpha_shrink: float = 0.5
    alpha_cap: Optional[float] = None    # None: 10 * alpha0
    tol_info: float = 1e-12
    tol_residual: float = 1e-8
    max_rounds: int = 20000
    k_strategy: str = "fixed"            # fixed | davies | grow | prune
    K: Optional[int] = None              # None: J (fixed/prune/grow) or Davies bound
    seed: int = 0
    restarts: int = 1
    window: int = 5
    max_halvings: int = 60
    merge_tol: float = 1e-8
    grow_tol: float = 1e-8

    def __post_init__(self):
        if self.tol_info <= 0 or self.tol_residual <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not 0 < self.alpha_shrink < 1 or self.alpha_grow < 1:
            raise ValueError("need 0 < alpha_shrink < 1 <= alpha_grow")
        if self.k_strategy not in ("fixed", "davies", "grow", "prune"):
            raise ValueError(f"unknown k_strategy {self.k_strategy!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class TraceRow:
    round: int
    alpha: float
    info: float
    residual: float
    K: int
    accepted: bool


@dataclass
class OptimizationResult:
    povm: Povm
    info_value: float
    residual: float
    converged: bool
    rounds_used: int
    trace: list[TraceRow] = field(default_factory=list)
    seed: int = 0

    @property
    def K(self) -> int:
        return self.povm.K


TRACE_HEADER = ["round", "alpha", "info_nats", "residual", "K", "accepted"]


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def write_trace(trace, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for row in trace:
        w.writerow([row.round, _g17(row.alpha), _g17(row.info), _g17(row.residual),
                    row.K, int(row.accepted)])


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        write_trace(trace, fh)


def _is_ignorant(rs: np.ndarray) -> bool:
    # all R_k equal: every G_k is the same and a round cannot move the POVM
    return max_abs(rs - rs[0]) <= 1e-12 * (1.0 + max_abs(rs))


def ascend(e: Ensemble, f: GradientFunctional, start: Povm, cfg: IterationConfig,
           round_offset: int = 0) -> OptimizationResult:
    """Backtracking steepest ascent at fixed K from ``start``."""
    m = start
    d = joint_probabilities(e, m)
    value = objective(e, m, f, d)
    rs = gradient_operators(e, m, f, d)
    residual = stationarity_residual(m, rs)

    alpha = cfg.alpha0 if cfg.alpha0 is not None else 1.0 / (1.0 + max_abs(rs))
    cap = cfg.alpha_cap if cfg.alpha_cap is not None else 10.0 * alpha

    trace: list[TraceRow] = []
    flat = 0            # consecutive accepted rounds with small relative change
    halvings = 0        # consecutive rejected rounds
    any_accepted = False
    converged = False
    rounds = 0

    while rounds < cfg.max_rounds:
        rounds += 1
        try:
            cand = iterate_round(m, e, f, alpha, rs)
            cd = joint_probabilities(e, cand)
            cand_value = objective(e, cand, f, cd)
            ok = np.isfinite(cand_value) and cand_value >= value
        except (AccInfoError, ValueError, np.linalg.LinAlgError):
            cand, cand_value, ok = None, float("nan"), False

        if not ok:
            trace.append(TraceRow(round_offset + rounds, alpha, cand_value, residual, m.K, False))
            halvings += 1
            alpha *= cfg.alpha_shrink
            if halvings > cfg.max_halvings or alpha < 1e-12:
                # stuck at round-off: the last accepted POVM is as good as it gets
                converged = residual <= cfg.tol_residual
                if not (any_accepted or converged):
                    raise NoProgress(f"step size underflowed to {alpha:.3e} without progress")
                break
            continue

        gain = cand_value - value
        m, d, value = cand, cd, cand_value
        rs = gradient_operators(e, m, f, d)
        residual = stationarity_residual(m, rs)
        trace.append(TraceRow(round_offset + rounds, alpha, value, residual, m.K, True))
        any_accepted = True
        halvings = 0
        alpha = min(alpha * cfg.alpha_grow, cap)

        flat = flat + 1 if gain <= cfg.tol_info * max(abs(value), 1e-300) else 0
        if flat >= cfg.window and residual <= cfg.tol_residual:
            converged = True
            break

    return OptimizationResult(m, value, residual, converged, rounds, trace, cfg.seed)


def _starting_povm(e: Ensemble, K: int, seed: int) -> Povm:
    return random_povm(e.dim, K, seed)


def _add_random_member(m: Povm, seed: int) -> Povm:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m.dim, m.dim)) + 1j * rng.standard_normal((m.dim, m.dim))
    extra = a.conj().T @ a
    extra /= np.trace(extra).real
    return Povm.normalized(np.concatenate([m.members, extra[None]]))


def _merged(e: Ensemble, f: GradientFunctional, res: OptimizationResult,
            cfg: IterationConfig) -> OptimizationResult:
    m = merge_equivalent(res.povm, joint_probabilities(e, res.povm), cfg.merge_tol)
    if m.K == res.povm.K:
        return res
    # merging perturbs the POVM at round-off level; polish from the merged point
    polished = ascend(e, f, m, cfg, round_offset=res.rounds_used)
    return replace(polished, rounds_used=res.rounds_used + polished.rounds_used,
                   trace=res.trace + polished.trace)


def _optimize_once(e: Ensemble, f: GradientFunctional, cfg: IterationConfig,
                   start: Optional[Povm]) -> OptimizationResult:
    strategy = cfg.k_strategy
    if start is None:
        if strategy == "davies":
            K = cfg.K or davies_bound(e)
        else:
            K = cfg.K or e.J
        start = _starting_povm(e, K, cfg.seed)
    rs0 = gradient_operators(e, start, f)
    if _is_ignorant(rs0):
        # ignorant POVMs are stationary; nudge off the fixpoint
        start = perturb_ignorant(start, 0.01, cfg.seed)

    res = ascend(e, f, start, cfg)
    if strategy == "fixed":
        return res
    if strategy in ("davies", "prune"):
        return _merged(e, f, res, cfg)

    # grow: add members until the extra one turns out to be redundant
    limit = davies_bound(e)
    step = 1
    while res.povm.K < limit:
        trial = _add_random_member(res.povm, cfg.seed + 7919 * step)
        bigger = ascend(e, f, trial, cfg, round_offset=res.rounds_used)
        bigger = replace(bigger, rounds_used=res.rounds_used + bigger.rounds_used,
                         trace=res.trace + bigger.trace)
        reduced = _merged(e, f, bigger, cfg)
        step += 1
        improved = bigger.info_value - res.info_value > cfg.grow_tol
        if not improved or reduced.povm.K <= res.povm.K:
            if reduced.info_value > res.info_value:
                res = reduced
            else:
                res = replace(res, rounds_used=reduced.rounds_used, trace=reduced.trace)
            break
        res = reduced
    return _merged(e, f, res, cfg)


def optimize(e: Ensemble, f: GradientFunctional = ACCESSIBLE_INFORMATION,
             cfg: IterationConfig = IterationConfig(), start: Optional[Povm] = None,
             max_workers: Optional[int] = None) -> OptimizationResult:
    """Maximize ``f`` over POVMs; with restarts, the best run is returned.

    Restart ``i`` uses seed ``cfg.seed + i``; ties go to the lowest seed.
    """
    if cfg.restarts == 1 or start is not None:
        return _optimize_once(e, f, cfg, start)
    cfgs = [replace(cfg, seed=cfg.seed + i, restarts=1) for i in range(cfg.restarts)]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(lambda c: _optimize_once(e, f, c, None), cfgs))
    return max(results, key=lambda r: r.info_value)
