import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from accinfo.ensemble import (
    Ensemble,
    JointDistribution,
    Povm,
    ensemble_from_json,
    ensemble_to_json,
    equivalence_groups,
    ignorant_povm,
    joint_probabilities,
    merge_equivalent,
    mutual_information,
    perturb_ignorant,
    povm_from_json,
    povm_to_json,
    random_povm,
    success_rate,
)
from accinfo.errors import DimensionMismatch, NegativeProbability, ShapeMismatch
from accinfo.scenarios import helstrom_projectors

from conftest import HELSTROM_AI_BITS, HELSTROM_SR, random_ensemble
from oracles import mi_table

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def orthogonal_pair():
    return Ensemble(np.array([np.diag([0.5, 0.0]), np.diag([0.0, 0.5])]))


def test_ensemble_validation():
    with pytest.raises(ShapeMismatch):
        Ensemble(np.array([np.eye(2) / 2]))
    with pytest.raises(ValueError):
        Ensemble(np.array([np.diag([0.6, -0.1]), np.diag([0.0, 0.5])]))
    with pytest.raises(ValueError):
        Ensemble(np.array([np.eye(2) / 2, np.eye(2) / 2]))


def test_ensemble_small_drift_rescaled():
    states = np.array([np.diag([0.5, 0.0]), np.diag([0.0, 0.5 + 1e-8])])
    with pytest.warns(UserWarning, match="rescaled"):
        e = Ensemble(states)
    assert abs(np.trace(e.total) - 1) < 1e-15


def test_povm_validation():
    with pytest.raises(ValueError):
        Povm(np.array([np.eye(2) / 2, np.eye(2) / 3]))
    with pytest.raises(ValueError):
        Povm(np.array([np.diag([1.2, 0.5]), np.diag([-0.2, 0.5])]))


def test_ignorant_povm_factorizes(adhoc):
    c = [0.2, 0.5, 0.3]
    d = joint_probabilities(adhoc, ignorant_povm(3, c))
    assert np.allclose(d.p, np.outer(adhoc.priors, c), atol=1e-15)
    assert mutual_information(d) == pytest.approx(0.0, abs=1e-15)


def test_orthogonal_pair_perfect():
    e = orthogonal_pair()
    m = Povm(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
    d = joint_probabilities(e, m)
    assert np.allclose(d.p, np.diag([0.5, 0.5]))
    assert success_rate(d) == pytest.approx(1.0)
    assert mutual_information(d) == pytest.approx(math.log(2), abs=1e-15)
    assert mutual_information(d, "bit") == pytest.approx(1.0, abs=1e-15)


def test_helstrom_projectors_table_values(adhoc):
    d = joint_probabilities(adhoc, helstrom_projectors(adhoc))
    assert success_rate(d) == pytest.approx(HELSTROM_SR, abs=1e-9)
    # the published AI column is in bits and belongs to the Helstrom POVM
    assert mutual_information(d, "bit") == pytest.approx(HELSTROM_AI_BITS, abs=1e-9)


def test_dimension_and_sign_errors(adhoc):
    with pytest.raises(DimensionMismatch):
        joint_probabilities(adhoc, random_povm(2, 2, 0))
    with pytest.raises(ShapeMismatch):
        success_rate(JointDistribution(np.full((2, 3), 1 / 6)))
    bad = object.__new__(Povm)
    object.__setattr__(bad, "members", np.array([np.diag([1.0, 1.0, 1.0]), -1e-3 * np.eye(3)]))
    with pytest.raises(NegativeProbability):
        joint_probabilities(adhoc, bad)


def test_indistinguishable_states_half():
    rho = np.diag([0.3, 0.7])
    e = Ensemble(np.array([rho / 2, rho / 2]))
    for seed in range(5):
        assert success_rate(joint_probabilities(e, random_povm(2, 2, seed))) == pytest.approx(0.5, abs=1e-12)


@given(seeds, st.integers(1, 5), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_random_povm_complete_and_deterministic(seed, dim, K):
    m = random_povm(dim, K, seed)
    assert np.max(np.abs(m.members.sum(axis=0) - np.eye(dim))) <= 1e-10
    assert np.array_equal(m.members, random_povm(dim, K, seed).members)


def test_random_povm_single_member_is_identity():
    assert np.allclose(random_povm(4, 1, 11).members[0], np.eye(4), atol=1e-12)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_mutual_information_matches_textbook_sum(seed):
    rng = np.random.default_rng(seed)
    e = random_ensemble(rng, 3, 3)
    d = joint_probabilities(e, random_povm(3, 4, seed))
    nats = mutual_information(d)
    assert nats == pytest.approx(mi_table(d.p), abs=1e-14)
    assert nats >= 0
    assert mutual_information(d, "bit") == pytest.approx(nats / math.log(2), rel=1e-15)
    assert np.allclose(d.row_marginals, e.priors, atol=1e-12)


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_convexity_along_segments(seed):
    rng = np.random.default_rng(seed)
    e = random_ensemble(rng, 3, 3, rank=2)
    m1 = random_povm(3, 4, seed)
    m2 = random_povm(3, 4, seed + 1)
    i1 = mutual_information(joint_probabilities(e, m1))
    i2 = mutual_information(joint_probabilities(e, m2))
    for lam in np.linspace(0, 1, 11):
        m = Povm((1 - lam) * m1.members + lam * m2.members)
        i = mutual_information(joint_probabilities(e, m))
        assert i <= (1 - lam) * i1 + lam * i2 + 1e-10


def test_perturb_ignorant(adhoc):
    ign = ignorant_povm(3, [0.5, 0.5])
    assert np.allclose(perturb_ignorant(ign, 0.0, 4).members, ign.members)
    blended = perturb_ignorant(ign, 0.01, 4)
    assert np.max(np.abs(blended.members.sum(axis=0) - np.eye(3))) <= 1e-10
    assert mutual_information(joint_probabilities(adhoc, blended)) > 0


def test_merge_split_halves(adhoc):
    base = random_povm(3, 2, 5)
    split = Povm(np.array([base.members[0] / 2, base.members[0] / 2, base.members[1]]))
    d = joint_probabilities(adhoc, split)
    merged = merge_equivalent(split, d)
    assert merged.K == 2
    assert mutual_information(joint_probabilities(adhoc, merged)) == pytest.approx(
        mutual_information(d), abs=1e-10)


def test_merge_ignorant_collapses(adhoc):
    m = ignorant_povm(3, [0.1, 0.6, 0.3])
    merged = merge_equivalent(m, joint_probabilities(adhoc, m))
    assert merged.K == 1
    assert np.allclose(merged.members[0], np.eye(3))


def test_merge_keeps_distinct_members(adhoc):
    m = random_povm(3, 3, 8)
    d = joint_probabilities(adhoc, m)
    assert equivalence_groups(d) == [[0], [1], [2]]
    assert merge_equivalent(m, d).K == 3


def test_merge_drops_empty_member(adhoc):
    base = random_povm(3, 2, 9)
    m = Povm(np.array([base.members[0], base.members[1], np.zeros((3, 3))]))
    merged = merge_equivalent(m, joint_probabilities(adhoc, m))
    assert merged.K == 2


def test_json_round_trip(adhoc):
    text = json.dumps(ensemble_to_json(adhoc))
    back = ensemble_from_json(json.loads(text))
    assert np.max(np.abs(back.states - adhoc.states)) <= 1e-15
    obj = json.loads(text)
    assert obj["dim"] == 3 and len(obj["states"]) == 2
    assert obj["states"][0][1][2] == [2 / 30, 0.0]
    m = random_povm(3, 3, 1)
    assert np.array_equal(povm_from_json(json.loads(json.dumps(povm_to_json(m)))).members, m.members)


def test_json_rejects_bad_grid():
    with pytest.raises(ValueError):
        ensemble_from_json({"dim": 2, "states": [[[1, 0]], [[0, 0]]]})
    with pytest.raises(ValueError):
        ensemble_from_json({"states": []})
