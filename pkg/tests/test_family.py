import numpy as np
import pytest

import oracles
from conftest import random_family
from minmaxspec import (
    ClosureTooLarge,
    NilpotentError,
    RowChoiceFamily,
    apply,
    classify,
    enumerate_closure,
    extremal_matrix,
    growth_descriptors,
    minimal_partition,
    select_policy,
    single,
)
from minmaxspec.family import optimal_choices


def test_from_rows_deduplicates():
    F = RowChoiceFamily.from_rows([[[1, 0], [1, 0], [2, 0]], [[0, 1]]])
    assert F.choice_counts == (2, 1)
    assert RowChoiceFamily.from_rows([[[1, 0], [1, 0]], [[0, 1]]], dedup=False).closure_size == 2


@pytest.mark.parametrize("rows", [[[[1, -1]], [[0, 1]]], [[[1, 0, 0]], [[0, 1, 0]]], []])
def test_rejects_bad_rows(rows):
    with pytest.raises(ValueError):
        RowChoiceFamily.from_rows(rows)


def test_invalid_mode():
    with pytest.raises(ValueError):
        apply(single(np.eye(2)), np.ones(2), "median")


def test_closure_cap():
    F = RowChoiceFamily.from_rows([np.eye(6)[[i, (i + 1) % 6]] for i in range(6)])
    assert F.closure_size == 64
    with pytest.raises(ClosureTooLarge):
        enumerate_closure(F, cap=10)
    with pytest.raises(ClosureTooLarge):
        extremal_matrix(F, "min", "brute", cap=10)
    # auto falls back to the recursive strategy
    policy, _ = extremal_matrix(F, "min", "auto", cap=10)
    assert len(policy) == 6


def test_nilpotent_extremal():
    F = RowChoiceFamily.from_rows([[[0, 1], [1, 0]], [[0, 0]]])
    with pytest.raises(NilpotentError):
        extremal_matrix(F, "min")
    assert extremal_matrix(F, "max")[1].tolist() == [[1, 0], [0, 0]]


def test_select_policy_prefers_incumbent_on_ties():
    F = RowChoiceFamily.from_rows([[[1, 1], [2, 0], [0, 2]], [[0, 1]]])
    v = np.array([1.0, 1.0])
    assert optimal_choices(F, v) == [[0, 1, 2], [0]]
    assert select_policy(F, v) == (0, 0)
    assert select_policy(F, v, incumbent=(2, 0)) == (2, 0)
    assert select_policy(F, np.array([1.0, 2.0]), incumbent=(2, 0)) == (1, 0)


def test_closure_consistency():
    rng = np.random.default_rng(1)
    for _ in range(60):
        F = random_family(rng, max_choices=3)
        mats = [M for _, M in enumerate_closure(F)]
        assert len(mats) == F.closure_size
        for _ in range(3):
            v = rng.random(F.n)
            assert np.allclose(apply(F, v, "min"), np.min([M @ v for M in mats], axis=0))
            assert np.allclose(apply(F, v, "max"), np.max([M @ v for M in mats], axis=0))
            for mode in ("min", "max"):
                p = select_policy(F, v, mode)
                assert np.allclose(F.matrix(p) @ v, apply(F, v, mode))


def _check_extremal(F, mode, strategy):
    """The chosen matrix's descriptors bound every closure matrix's (oracle descriptors)."""
    policies, mats = zip(*oracles.closure(F.rows))
    descs, _ = oracles.closure_descriptors(mats)
    policy, B = extremal_matrix(F, mode, strategy)
    assert np.array_equal(B, F.matrix(policy))
    mine = descs[list(policies).index(tuple(policy))]
    for other in descs:
        assert all((a <= b) if mode == "min" else (a >= b) for a, b in zip(mine, other))


@pytest.mark.parametrize("strategy", ["brute", "recursive"])
def test_extremal_certificate(strategy):
    rng = np.random.default_rng(2)
    done = 0
    while done < 80:
        F = random_family(rng, max_n=5, max_choices=3)
        for mode in ("min", "max"):
            try:
                _check_extremal(F, mode, strategy)
            except NilpotentError:
                continue
            done += 1


def test_minimal_partition_is_invariant():
    """Every growth-minimal matrix has the same partition, radius and degree."""
    rng = np.random.default_rng(3)
    for _ in range(80):
        F = random_family(rng, max_n=5, max_choices=3)
        try:
            mp = minimal_partition(F)
        except NilpotentError:
            continue
        ref = [d.as_tuple() for d in growth_descriptors(F.matrix(mp.policy))]
        for _, M in enumerate_closure(F):
            if [d.as_tuple() for d in growth_descriptors(M)] == ref:
                cs = classify(M)
                assert cs.principal_partition == mp.partition
                assert cs.degree == mp.nu
                assert cs.spr == pytest.approx(mp.lam, rel=1e-9)
