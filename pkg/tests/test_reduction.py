import math

import numpy as np
import pytest

from assignment_solver import AssignmentProblem, brute_force_cluster, solve_assignment
from models import ContractViolationError, DomainError
from reduction import lift_assignment, reduce_costs, smoothed_reduce


def test_reduce_costs_breaks_ties_on_lowest_subchannel():
    rcm = reduce_costs([[[1.0, 3.0, 3.0], [2.0, 0.5, 2.0]]])
    np.testing.assert_array_equal(rcm.values, [[3.0, 2.0]])
    np.testing.assert_array_equal(rcm.argmax, [[1, 0]])


def test_reduce_costs_rejects_bad_blocks():
    with pytest.raises(DomainError):
        reduce_costs(np.ones((2, 2)))
    with pytest.raises(DomainError):
        reduce_costs(np.ones((2, 2, 0)))


def test_reduce_costs_is_monotone(rng):
    for _ in range(200):
        n, l, k = rng.integers(1, 6, size=3)
        costs = rng.uniform(0, 10, size=(n, l, k))
        raised = costs + rng.uniform(0, 2, size=costs.shape) * (rng.random(costs.shape) < 0.5)

        assert np.all(reduce_costs(raised).values >= reduce_costs(costs).values)


def test_smoothed_reduce_brackets_the_max(rng):
    for _ in range(100):
        n, l, k = rng.integers(1, 6, size=3)
        costs = rng.uniform(0, 20, size=(n, l, k))
        hard = reduce_costs(costs).values
        for beta in (1, 10, 100, 1000):
            gap = smoothed_reduce(costs, beta) - hard
            assert np.all(gap >= -1e-12)
            assert np.all(gap <= math.log(k) / beta + 1e-12)


def test_smoothed_reduce_stays_finite_for_large_weights():
    costs = np.full((1, 1, 3), 1e4)
    np.testing.assert_allclose(smoothed_reduce(costs, 1000.0), 1e4 + math.log(3) / 1000.0)


def test_smoothed_reduce_needs_positive_beta():
    with pytest.raises(DomainError):
        smoothed_reduce(np.ones((1, 1, 2)), 0.0)


def test_lift_assignment_follows_argmax():
    rcm = reduce_costs([[[1.0, 5.0], [4.0, 2.0]], [[3.0, 0.0], [1.0, 6.0]]])
    assert lift_assignment({0: 1, 1: 0}, rcm) == {0: (1, 0), 1: (0, 0)}
    assert lift_assignment({0: 0, 1: 1}, rcm) == {0: (0, 1), 1: (1, 1)}


def test_lift_assignment_rejects_shared_subframe():
    rcm = reduce_costs(np.ones((2, 2, 2)))
    with pytest.raises(ContractViolationError):
        lift_assignment({0: 1, 1: 1}, rcm)
    with pytest.raises(DomainError):
        lift_assignment({0: 2}, rcm)


def test_reduced_problem_keeps_the_cluster_optimum(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(1, 4))
        costs = rng.uniform(0, 10, size=(n, n, k))

        _, expected = brute_force_cluster(costs)
        rcm = reduce_costs(costs)
        result = solve_assignment(AssignmentProblem(rcm.values))
        lifted = lift_assignment(result.matching, rcm)
        achieved = sum(costs[i, l, c] for i, (l, c) in lifted.items())

        assert len(lifted) == n
        assert achieved == pytest.approx(expected, rel=1e-9)
