"""Brute-force oracles, independent of the ascent iteration.

Run directly to regenerate the constants frozen in conftest.py.
"""

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation

from accinfo.scenarios import adhoc_ensemble


def mi_table(p):
    """Mutual information (nats) of a joint table by the textbook sum."""
    p = np.asarray(p, dtype=float)
    total = 0.0
    for j in range(p.shape[0]):
        for k in range(p.shape[1]):
            if p[j, k] > 0:
                total += p[j, k] * np.log(p[j, k] / (p[j].sum() * p[:, k].sum()))
    return total


def _rhos():
    return [s.real for s in adhoc_ensemble().states]


def best_von_neumann(starts=40, seed=0):
    rhos = _rhos()

    def neg(x):
        u = Rotation.from_rotvec(x).as_matrix()
        return -mi_table([[u[:, k] @ r @ u[:, k] for k in range(3)] for r in rhos])

    x0s = np.random.default_rng(seed).uniform(-3, 3, (starts, 3))
    opts = dict(xatol=1e-12, fatol=1e-16, maxiter=20000)
    return -min(minimize(neg, x0, method="Nelder-Mead", options=opts).fun for x0 in x0s)


def best_two_outcome(starts=40, seed=0):
    rhos = _rhos()

    def neg(x):
        th, ph = x
        v = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
        proj = np.outer(v, v)
        return -mi_table([[np.trace(r @ proj), np.trace(r @ (np.eye(3) - proj))] for r in rhos])

    x0s = np.random.default_rng(seed).uniform(0, 3.2, (starts, 2))
    opts = dict(xatol=1e-12, fatol=1e-16)
    return -min(minimize(neg, x0, method="Nelder-Mead", options=opts).fun for x0 in x0s)


if __name__ == "__main__":
    print(repr(best_von_neumann()), repr(best_two_outcome()))
