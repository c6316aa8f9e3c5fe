import numpy as np
import pytest

from assignment_solver import brute_force_cluster
from baselines import exhaustive_global, greedy, random_alloc
from grid import find_conflicts
from hierarchical_allocator import allocate
from models import BudgetExceededError, CostTensor, ResourceGrid, Scenario


@pytest.fixture
def greedy_trap():
    """One cluster where taking the best cell first costs the second vehicle dearly"""
    scenario = Scenario.from_rosters(ResourceGrid(subframes=2, subchannels=1), [[0, 1]])
    cost = CostTensor(values=np.array([[[5.0], [4.0]], [[4.0], [1.0]]]))
    return scenario, cost


def test_greedy_takes_best_cells_first(greedy_trap):
    scenario, cost = greedy_trap
    allocation = greedy(scenario, cost)
    assert dict(allocation.grants) == {0: (0, 0), 1: (1, 0)}
    assert allocation.objective(cost) == 6.0
    assert allocate(scenario, cost).allocation.objective(cost) == 8.0


def test_exhaustive_finds_the_optimum(greedy_trap):
    scenario, cost = greedy_trap
    allocation, objective = exhaustive_global(scenario, cost)
    assert objective == 8.0
    assert dict(allocation.grants) == {0: (1, 0), 1: (0, 0)}


def test_exhaustive_matches_brute_force_on_one_cluster(rng):
    for _ in range(100):
        subframes = int(rng.integers(2, 5))
        size = int(rng.integers(1, subframes + 1))
        grid = ResourceGrid(subframes=subframes, subchannels=int(rng.integers(1, 3)))
        scenario = Scenario.from_rosters(grid, [list(range(size))])
        cost = CostTensor(values=rng.uniform(0, 10, size=(size, grid.subframes, grid.subchannels)))

        _, expected = brute_force_cluster(cost.values)
        allocation, objective = exhaustive_global(scenario, cost)

        assert allocation.assigned_count == size
        assert objective == pytest.approx(expected, rel=1e-9)


def test_exhaustive_on_identical_clusters_matches_merged_brute_force(rng):
    for _ in range(50):
        subframes = int(rng.integers(1, 5))
        size = int(rng.integers(1, subframes + 1))
        grid = ResourceGrid(subframes=subframes, subchannels=int(rng.integers(1, 3)))
        scenario = Scenario.from_rosters(grid, [list(range(size)), list(range(size))])
        cost = CostTensor(values=rng.uniform(0, 10, size=(size, grid.subframes, grid.subchannels)))

        _, expected = brute_force_cluster(cost.values)
        allocation, objective = exhaustive_global(scenario, cost)

        assert allocation.assigned_count == size
        assert objective == pytest.approx(expected, rel=1e-9)


def test_exhaustive_grants_as_many_vehicles_as_possible():
    grid = ResourceGrid(subframes=2, subchannels=1)
    scenario = Scenario.from_rosters(grid, [[0, 1], [1, 2], [0, 2]])
    cost = CostTensor(values=np.array([[[3.0], [1.0]], [[1.0], [2.0]], [[0.5], [9.0]]]))

    allocation, objective = exhaustive_global(scenario, cost)

    assert allocation.assigned_count == 2
    assert dict(allocation.grants) == {0: (0, 0), 2: (1, 0)}
    assert objective == 12.0


def test_exhaustive_budget(two_cluster_scenario, rng, make_cost):
    with pytest.raises(BudgetExceededError):
        exhaustive_global(two_cluster_scenario, make_cost(rng, two_cluster_scenario), budget=10)


def test_random_allocation_is_seeded_and_feasible(rng, two_cluster_scenario, make_cost):
    cost = make_cost(rng, two_cluster_scenario)
    first = random_alloc(two_cluster_scenario, cost, seed=3)
    again = random_alloc(two_cluster_scenario, cost, seed=3)

    assert first == again
    assert first.unassigned <= {8}  # only the shared vehicle can find every subframe taken
    assert find_conflicts(first, two_cluster_scenario) == []


def test_random_allocation_draws_subframes_uniformly():
    scenario = Scenario.from_rosters(ResourceGrid(subframes=2, subchannels=1), [[0]])
    cost = CostTensor(values=np.ones((1, 2, 1)))

    first_subframe = [random_alloc(scenario, cost, seed=seed).grants[0][0] == 0 for seed in range(10_000)]

    assert np.mean(first_subframe) == pytest.approx(0.5, abs=0.02)


def test_greedy_is_optimal_when_best_cells_do_not_collide(rng, make_chain_scenario):
    for _ in range(100):
        scenario = make_chain_scenario(rng, max_vehicles=8)
        grid = scenario.grid
        values = rng.uniform(0, 1, size=(scenario.num_vehicles, grid.subframes, grid.subchannels))
        for vehicle in range(scenario.num_vehicles):
            # chain rosters are contiguous, so vehicle % L differs between cluster mates
            values[vehicle, vehicle % grid.subframes, rng.integers(grid.subchannels)] = 5 + rng.random()
        cost = CostTensor(values=values)

        allocation = greedy(scenario, cost)
        optimum, best = exhaustive_global(scenario, cost)

        assert dict(allocation.grants) == dict(optimum.grants)
        assert allocation.objective(cost) == pytest.approx(best, rel=1e-12)


def test_greedy_is_conflict_free_on_the_two_cluster_scenario(rng, two_cluster_scenario, make_cost):
    allocation = greedy(two_cluster_scenario, make_cost(rng, two_cluster_scenario))
    assert find_conflicts(allocation, two_cluster_scenario) == []


@pytest.mark.slow
def test_every_algorithm_is_conflict_free(rng, make_chain_scenario, make_cost):
    triples = 0
    for trial in range(2600):
        scenario = make_chain_scenario(rng, max_vehicles=24, max_subframes=10, max_clusters=4)
        cost = make_cost(rng, scenario)
        allocations = [
            allocate(scenario, cost).allocation,
            allocate(scenario, cost, ordering="index").allocation,
            greedy(scenario, cost),
            random_alloc(scenario, cost, seed=trial),
        ]
        if scenario.num_vehicles <= 6:
            allocations.append(exhaustive_global(scenario, cost)[0])
        for allocation in allocations:
            assert find_conflicts(allocation, scenario) == []
            triples += 1
    assert triples >= 10_000


@pytest.mark.slow
def test_proposed_is_near_optimal(rng, make_chain_scenario, make_cost):
    ratios = []
    for _ in range(500):
        scenario = make_chain_scenario(rng, max_vehicles=8)
        cost = make_cost(rng, scenario)
        proposed = allocate(scenario, cost).allocation
        optimum, best = exhaustive_global(scenario, cost)

        assert proposed.assigned_count <= optimum.assigned_count
        assert proposed.objective(cost) <= best * (1 + 1e-9)
        ratios.append(proposed.objective(cost) / best)

    assert np.mean(ratios) >= 0.95
