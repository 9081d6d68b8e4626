"""Built-in example ensembles and their closed-form reference results.

Two scenarios are provided:

* ``adhoc``: a pair of real rank-2 states on a qutrit.
* ``tomographic``: the six ancilla states an eavesdropper holds in the
  six-state (fully tomographic) qubit key distribution protocol when the
  distributed pairs are singlets with an admixture ``eps`` of white noise.

Qubits are numbered 1..4 as Alice, Bob, ancilla, ancilla; in matrices qubit 1
is the leftmost tensor factor. The singlet is (|01> - |10>)/sqrt(2) and
sigma_z|0> = |0>.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .ensemble import Ensemble, Povm
from .errors import RangeError, RangeWarning, ShapeMismatch
from .linalg import herm, partial_trace, pauli, tensor

AXES = ("x", "y", "z")
SEPARABLE_EPS = 2.0 / 3.0
SEPARABLE_NOTE = (
    "eps >= 2/3: the source state is separable, so Eve can blend it from "
    "product states and learn 1/3 bit without any measurement optimization"
)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps <= 1.0:
        raise RangeError(f"eps must lie in [0, 1], got {eps}")
    return eps


# --- ad-hoc qutrit pair -------------------------------------------------------


def adhoc_ensemble() -> Ensemble:
    rho1 = np.array([[0, 0, 0], [0, 5, 2], [0, 2, 10]]) / 30
    rho2 = np.array([[5, 2, 0], [2, 25, 0], [0, 0, 0]]) / 60
    return Ensemble(np.array([rho1, rho2]), label="adhoc")


def helstrom_projectors(e: Ensemble) -> Povm:
    """Projectors onto the nonnegative / negative eigenspaces of rho_1 - rho_2.

    Zero eigenvalues go to the first outcome.
    """
    if e.J != 2:
        raise ShapeMismatch(f"Helstrom projectors need exactly two states, got {e.J}")
    w, v = np.linalg.eigh(e.states[0] - e.states[1])
    pos = v[:, w >= -1e-12]
    p1 = pos @ pos.conj().T
    return Povm(np.array([p1, np.eye(e.dim) - p1]))


# --- tomographic key distribution ------------------------------------------


@dataclass(frozen=True)
class NoiseParameters:
    """Amplitudes of Eve's purification, chosen real with a, b >= 0."""

    epsilon: float
    a: float
    b: float
    eps_bar: float

    @classmethod
    def from_epsilon(cls, eps: float) -> "NoiseParameters":
        eps = _check_eps(eps)
        b = math.sqrt(eps)
        two_a_plus_b = math.sqrt(4.0 - 3.0 * eps)
        a = 0.5 * (two_a_plus_b - b)
        return cls(eps, a, b, math.sqrt(max(4.0 * eps - 3.0 * eps * eps, 0.0)))


def singlet() -> np.ndarray:
    return np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)


def source_state(eps: float) -> np.ndarray:
    """Singlet with an admixture ``eps`` of white noise on two qubits."""
    eps = _check_eps(eps)
    s = singlet()
    return herm((1.0 - eps) * np.outer(s, s.conj()) + eps / 4.0 * np.eye(4))


def _pair_state(pairs) -> np.ndarray:
    """Four-qubit product of singlets on the given (0-based) qubit pairs."""
    psi = np.zeros(16, dtype=complex)
    s = singlet().reshape(2, 2)
    (i, j), (k, l) = pairs
    for bits in np.ndindex(2, 2, 2, 2):
        idx = int("".join(map(str, bits)), 2)
        psi[idx] = s[bits[i], bits[j]] * s[bits[k], bits[l]]
    return psi


def psi_state(eps: float) -> np.ndarray:
    """Eve's purification a|psi_12 psi_34> + b|psi_13 psi_24> as a 16-vector."""
    p = NoiseParameters.from_epsilon(eps)
    return p.a * _pair_state(((0, 1), (2, 3))) + p.b * _pair_state(((0, 2), (1, 3)))


def _sigma_dot(n: int, q1: int, q2: int) -> np.ndarray:
    return sum(pauli(ax, q1, n) @ pauli(ax, q2, n) for ax in AXES)


def sextet_labels() -> list[str]:
    return [f"{ax}{sign}" for ax in AXES for sign in "+-"]


def tomographic_sextet(eps: float) -> Ensemble:
    """Eve's six subnormalized ancilla states, in the order x+, x-, y+, y-, z+, z-."""
    p = NoiseParameters.from_epsilon(eps)
    eye = np.eye(4)
    dot = _sigma_dot(2, 0, 1)
    c3 = 0.5 * (p.epsilon + p.eps_bar)
    c4 = 0.5 * (p.epsilon - p.eps_bar)
    states = []
    for ax in AXES:
        s3, s4 = pauli(ax, 0, 2), pauli(ax, 1, 2)
        for sign in (1.0, -1.0):
            states.append((eye - sign * c3 * s3 - sign * c4 * s4 - (1.0 - p.epsilon) * dot) / 24.0)
    return Ensemble(np.array(states), label=f"tomographic eps={p.epsilon:g}")


def conditional_ancilla_states(eps: float, sign_convention: int = +1) -> np.ndarray:
    """Ancilla states obtained from the purification by conditioning on Alice.

    Applies Alice's outcome operator (1 + s sigma_zeta)/6 on qubit 1 (s = +1 for
    the "+" outcome when ``sign_convention`` is +1) and traces out qubits 1, 2.
    """
    psi = psi_state(eps)
    big = np.outer(psi, psi.conj())
    out = []
    for ax in AXES:
        for s in (1.0, -1.0):
            alice = (np.eye(2) + sign_convention * s * pauli(ax, 0, 1)) / 6.0
            op = tensor(alice, np.eye(8))
            out.append(herm(partial_trace(op @ big, [2, 2, 2, 2], keep=[2, 3])))
    return np.array(out)


def analytic_eve_povm() -> Povm:
    """Eve's six-outcome rank-1 POVM on the ancilla; independent of eps."""
    eye = np.eye(4)
    dot = _sigma_dot(2, 0, 1)
    members = []
    for ax in AXES:
        s3, s4 = pauli(ax, 0, 2), pauli(ax, 1, 2)
        for sign in (1.0, -1.0):
            members.append(
                (eye - sign * math.sqrt(3) / 2 * (s3 - s4) - 1.5 * s3 @ s4 + 0.5 * dot) / 6.0
            )
    return Povm(np.array(members))


def alice_bob_joint(eps: float) -> np.ndarray:
    """6x6 table of Alice's and Bob's outcomes when both measure (1 +/- sigma)/6."""
    rho = source_state(eps)
    ops = [(np.eye(2) + s * pauli(ax, 0, 1)) / 6.0 for ax in AXES for s in (1.0, -1.0)]
    return np.array([[np.trace(rho @ tensor(a, b)).real for b in ops] for a in ops])


def _xlog2x(x: float) -> float:
    return 0.0 if x <= 0.0 else x * math.log2(x)


def i_alice_bob(eps: float) -> float:
    """Alice-Bob mutual information in bits."""
    eps = _check_eps(eps)
    return (_xlog2x(eps) + _xlog2x(2.0 - eps)) / 6.0


def eve_effective_epsilon(eps: float) -> float:
    p = NoiseParameters.from_epsilon(eps)
    return min(max(1.0 - math.sqrt(0.75) * p.eps_bar, 0.0), 1.0)


def i_alice_eve(eps: float) -> float:
    """Eve's accessible information in bits with the analytic six-outcome POVM.

    Only the optimum for eps < 2/3; a RangeWarning is issued beyond.
    """
    eps = _check_eps(eps)
    if eps >= SEPARABLE_EPS:
        warnings.warn(SEPARABLE_NOTE, RangeWarning, stacklevel=2)
    return i_alice_bob(eve_effective_epsilon(eps))


def critical_epsilon() -> float:
    return 1.0 / (2.5 + math.sqrt(3.0))


def locate_crossing(grid, xtol: float = 1e-12) -> float:
    """Find where I_AB = I_AE: bracket on ``grid``, then bisect the closed forms."""
    grid = np.asarray(sorted(grid), dtype=float)
    if grid.size < 2:
        raise ValueError("need at least two grid points")
    diff = [i_alice_bob(x) - i_alice_eve(x) for x in grid]
    for lo, hi, dlo, dhi in zip(grid[:-1], grid[1:], diff[:-1], diff[1:]):
        if dlo > 0 >= dhi:
            return bisect(lambda x: i_alice_bob(x) - i_alice_eve(x), lo, hi, xtol=xtol)
    raise ValueError("no sign change of I_AB - I_AE on the grid")


SCENARIOS = ("adhoc", "tomographic")
