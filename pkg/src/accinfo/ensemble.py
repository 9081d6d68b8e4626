"""Ensembles, POVMs, joint probability tables and the functionals on them."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NegativeProbability, ShapeMismatch
from .linalg import herm, inv_sqrt

PSD_TOL = 1e-10
NORM_TOL = 1e-10
# Ensembles whose total trace is off by more than NORM_TOL but at most this are
# rescaled with a warning; anything worse is rejected.
RESCALE_TOL = 1e-6
NEG_PROB_TOL = 1e-12
DROP_TRACE = 1e-12


def _stack(mats) -> np.ndarray:
    arr = np.array([herm(m) for m in mats], dtype=complex)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise DimensionMismatch("all operators must be square and of one common dimension")
    return arr


def _min_eig(mats: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(mats)[:, 0]


@dataclass(frozen=True)
class Ensemble:
    """Subnormalized states rho_j; tr rho_j is the prior of state j."""

    states: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        states = _stack(self.states)
        if states.shape[0] < 2:
            raise ShapeMismatch("an ensemble needs at least two states")
        bad = np.flatnonzero(_min_eig(states) < -PSD_TOL)
        if bad.size:
            raise ValueError(f"states {bad.tolist()} are not positive semidefinite")
        total = float(np.trace(states.sum(axis=0)).real)
        dev = abs(total - 1.0)
        if NORM_TOL < dev <= RESCALE_TOL:
            warnings.warn(f"ensemble trace {total!r} rescaled to 1", stacklevel=3)
            states = states / total
        elif dev > RESCALE_TOL:
            raise ValueError(f"ensemble trace is {total!r}, expected 1")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def J(self) -> int:
        return self.states.shape[0]

    @property
    def priors(self) -> np.ndarray:
        return np.trace(self.states, axis1=1, axis2=2).real

    @property
    def total(self) -> np.ndarray:
        return self.states.sum(axis=0)


@dataclass(frozen=True)
class Povm:
    """Positive operators Pi_k that sum to the identity."""

    members: np.ndarray

    def __post_init__(self):
        members = _stack(self.members)
        if members.shape[0] < 1:
            raise ShapeMismatch("a POVM needs at least one member")
        bad = np.flatnonzero(_min_eig(members) < -PSD_TOL)
        if bad.size:
            raise ValueError(f"POVM members {bad.tolist()} are not positive semidefinite")
        err = np.max(np.abs(members.sum(axis=0) - np.eye(members.shape[1])))
        if err > NORM_TOL:
            raise ValueError(f"POVM members do not sum to the identity (error {err:.3e})")
        members.setflags(write=False)
        object.__setattr__(self, "members", members)

    @property
    def dim(self) -> int:
        return self.members.shape[1]

    @property
    def K(self) -> int:
        return self.members.shape[0]

    @classmethod
    def normalized(cls, positives) -> "Povm":
        """Build a POVM from arbitrary positive operators by S^(-1/2) conjugation."""
        ops = _stack(positives)
        x = inv_sqrt(ops.sum(axis=0))
        return cls(x @ ops @ x)


@dataclass(frozen=True)
class JointDistribution:
    p: np.ndarray
    row_marginals: np.ndarray = field(init=False)
    col_marginals: np.ndarray = field(init=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2:
            raise ShapeMismatch("joint distribution must be a J x K table")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "row_marginals", p.sum(axis=1))
        object.__setattr__(self, "col_marginals", p.sum(axis=0))


def joint_probabilities(e: Ensemble, m: Povm) -> JointDistribution:
    """p_jk = tr(rho_j Pi_k)."""
    if e.dim != m.dim:
        raise DimensionMismatch(f"ensemble dim {e.dim} != POVM dim {m.dim}")
    # tr(A B) = sum_ab A_ab B_ba; both Hermitian so B_ba = conj(B_ab)
    p = np.einsum("jab,kab->jk", e.states, m.members.conj()).real
    if p.min(initial=0.0) < -NEG_PROB_TOL:
        raise NegativeProbability(f"joint probability {p.min():.3e} < 0")
    return JointDistribution(np.clip(p, 0.0, None))


def mutual_information(d: JointDistribution, base: str = "nat") -> float:
    """Mutual information between row and column labels.

    ``base`` is ``"nat"`` (natural log) or ``"bit"``.
    """
    p = d.p
    outer = np.outer(d.row_marginals, d.col_marginals)
    mask = p > 1e-300
    info = float(np.sum(p[mask] * np.log(p[mask] / outer[mask])))
    if base == "bit":
        return info / math.log(2)
    if base != "nat":
        raise ValueError(f"base must be 'nat' or 'bit', got {base!r}")
    return info


def success_rate(d: JointDistribution) -> float:
    """Sum of the diagonal p_jj: probability of guessing the state correctly."""
    J, K = d.p.shape
    if J != K:
        raise ShapeMismatch(f"success rate needs J == K, got {J} x {K}")
    return float(np.trace(d.p))


def random_povm(dim: int, K: int, seed: int) -> Povm:
    """Random POVM from K Gram matrices A^dagger A of complex Gaussian A."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((K, dim, dim)) + 1j * rng.standard_normal((K, dim, dim))
    return Povm.normalized(np.conj(np.transpose(a, (0, 2, 1))) @ a)


def ignorant_povm(dim: int, weights: Sequence[float]) -> Povm:
    w = np.asarray(weights, dtype=float)
    return Povm(w[:, None, None] / w.sum() * np.eye(dim))


def perturb_ignorant(m: Povm, fraction: float, seed: int) -> Povm:
    """Convex blend (1 - fraction) m + fraction * (random POVM of the same shape)."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    r = random_povm(m.dim, m.K, seed)
    return Povm((1.0 - fraction) * m.members + fraction * r.members)


def equivalence_groups(d: JointDistribution, tol: float = 1e-8) -> list[list[int]]:
    """Group outcomes whose probability columns are proportional.

    Columns k1, k2 are equivalent when every 2x2 cross product
    p[j,k1] p[j',k2] - p[j',k1] p[j,k2] is at most ``tol`` in modulus.
    """
    p = d.p
    groups: list[list[int]] = []
    for k in range(p.shape[1]):
        for g in groups:
            rep = g[0]
            cross = np.outer(p[:, rep], p[:, k]) - np.outer(p[:, k], p[:, rep])
            if np.max(np.abs(cross)) <= tol:
                g.append(k)
                break
        else:
            groups.append([k])
    return groups


def merge_equivalent(m: Povm, d: JointDistribution, tol: float = 1e-8) -> Povm:
    """Sum equivalent members, drop empty ones, and renormalize."""
    if d.p.shape[1] != m.K:
        raise ShapeMismatch("distribution does not belong to this POVM")
    merged = [m.members[g].sum(axis=0) for g in equivalence_groups(d, tol)]
    kept = [x for x in merged if np.trace(x).real > DROP_TRACE]
    return Povm.normalized(kept)


# --- JSON serialization ----------------------------------------------------


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(rows, dim: int) -> np.ndarray:
    a = np.array(rows, dtype=float)
    if a.shape != (dim, dim, 2):
        raise ValueError(f"matrix entries must form a {dim}x{dim} grid of [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def operators_to_json(key: str, mats: np.ndarray) -> dict:
    return {"dim": int(mats.shape[1]), key: [_matrix_to_json(m) for m in mats]}


def operators_from_json(obj: dict, key: str) -> np.ndarray:
    if not isinstance(obj, dict) or "dim" not in obj or key not in obj:
        raise ValueError(f"expected an object with 'dim' and '{key}'")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ValueError("'dim' must be a positive integer")
    return np.array([_matrix_from_json(m, dim) for m in obj[key]], dtype=complex)


def ensemble_to_json(e: Ensemble) -> dict:
    return operators_to_json("states", e.states)


def ensemble_from_json(obj: dict, label: Optional[str] = None) -> Ensemble:
    return Ensemble(operators_from_json(obj, "states"), label=label)


def povm_to_json(m: Povm) -> dict:
    return operators_to_json("members", m.members)


def povm_from_json(obj: dict) -> Povm:
    return Povm(operators_from_json(obj, "members"))


def load_ensemble(path) -> Ensemble:
    path = Path(path)
    with open(path) as fh:
        return ensemble_from_json(json.load(fh), label=path.stem)


def save_ensemble(e: Ensemble, path) -> None:
    with open(path, "w") as fh:
        json.dump(ensemble_to_json(e), fh)
        fh.write("\n")
