import numpy as np
import pytest

from accinfo.ensemble import Ensemble
from accinfo.scenarios import adhoc_ensemble

# Helstrom success rate and the AI of the Helstrom projectors (in bits) for
# the ad-hoc qutrit pair, as published.
HELSTROM_SR = 0.8408884524
HELSTROM_AI_BITS = 0.4480907546

# Accessible information of the ad-hoc pair, in nats. Frozen from an
# independent brute-force oracle (tests/oracles.py): Nelder-Mead over
# real orthonormal bases (K=3) and over rank-1/rank-2 projector splits (K=2),
# 40 multistarts each.
AI_OPT_NATS = 0.34630908576841
AI_K2_NATS = 0.32086450726550


@pytest.fixture(scope="session")
def adhoc():
    return adhoc_ensemble()


def random_ensemble(rng, dim, J, rank=None):
    rank = dim if rank is None else rank
    states = []
    for _ in range(J):
        a = rng.standard_normal((rank, dim)) + 1j * rng.standard_normal((rank, dim))
        states.append(a.conj().T @ a)
    states = np.array(states)
    return Ensemble(states / np.trace(states.sum(axis=0)).real)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS.values():
            terminalreporter.write_line(line)
