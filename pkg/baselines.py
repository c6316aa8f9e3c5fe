"""
Comparison algorithms: exhaustive search for the global optimum, a greedy
max-weight heuristic and a feasible random allocation.
"""

import logging

import numpy as np

from config import Config
from hierarchical_allocator import allocate
from models import Allocation, BudgetExceededError

# Configure logging
logger = logging.getLogger(__name__)


def _cluster_lists(scenario):
    membership = scenario.membership.astype(bool)
    return membership, [np.flatnonzero(membership[:, i]) for i in range(scenario.num_vehicles)]


def exhaustive_global(scenario, cost, budget=Config.EXHAUSTIVE_NODE_BUDGET):
    """Globally optimal conflict-free allocation by depth-first backtracking.

    Vehicles are branched in id order over their (subframe, subchannel) cells in
    lexicographic order, with "unassigned" as the last option. Solutions are ranked by
    (granted vehicles, total rate), so the result is the sum-rate optimum whenever every
    vehicle can be granted. The first optimum met, the lexicographically smallest grant
    vector, is returned. Branches are pruned with the sum of the remaining vehicles'
    row maxima. Returns (allocation, objective).
    """
    cost.check_matches(scenario)
    values = cost.values
    num_vehicles, num_subframes, num_subchannels = values.shape
    membership, clusters_of = _cluster_lists(scenario)
    used = np.zeros(membership.shape[0:1] + (num_subframes,), dtype=bool)

    row_max = values.reshape(num_vehicles, -1).max(axis=1)
    suffix = np.append(np.cumsum(row_max[::-1])[::-1], 0.0)

    # seed the bound just below the best heuristic so the optimum itself is still visited
    incumbents = [allocate(scenario, cost).allocation, greedy(scenario, cost)]
    seed_count, seed_value = max((a.assigned_count, a.objective(cost)) for a in incumbents)
    best_key = (seed_count, seed_value - 1e-9 * max(1.0, abs(seed_value)))
    best_choice = None
    choice = [None] * num_vehicles
    nodes = 0

    def search(depth, count, value):
        nonlocal nodes, best_key, best_choice
        nodes += 1
        if nodes > budget:
            raise BudgetExceededError(f"exhaustive search exceeded {budget} nodes", nodes)
        if depth == num_vehicles:
            if (count, value) > best_key:
                best_key = (count, value)
                best_choice = list(choice)
            return

        remaining = num_vehicles - depth - 1
        clusters = clusters_of[depth]
        blocked = used[clusters].any(axis=0)
        for l in range(num_subframes):
            if blocked[l]:
                continue
            used[clusters, l] = True
            for k in range(num_subchannels):
                rate = value + values[depth, l, k]
                if (count + 1 + remaining, rate + suffix[depth + 1]) <= best_key:
                    continue
                choice[depth] = (l, k)
                search(depth + 1, count + 1, rate)
            used[clusters, l] = False
        choice[depth] = None
        if (count + remaining, value + suffix[depth + 1]) > best_key:
            search(depth + 1, count, value)

    search(0, 0, 0.0)
    logger.debug(f"Exhaustive search over {num_vehicles} vehicles visited {nodes} nodes")

    if best_choice is None:
        # float round-off kept the search from beating its own seed
        allocation = max(incumbents, key=lambda a: (a.assigned_count, a.objective(cost)))
    else:
        grants = {i: cell for i, cell in enumerate(best_choice) if cell is not None}
        allocation = Allocation.from_grants(num_vehicles, grants)
    return allocation, allocation.objective(cost)


def greedy(scenario, cost):
    """Vehicles in descending order of their best cell each take the best cell still open to them"""
    cost.check_matches(scenario)
    num_vehicles, num_subframes, num_subchannels = cost.shape
    membership, clusters_of = _cluster_lists(scenario)
    used = np.zeros((membership.shape[0], num_subframes), dtype=bool)
    flat = cost.values.reshape(num_vehicles, -1)
    peaks = flat.max(axis=1)

    grants = {}
    for vehicle in sorted(range(num_vehicles), key=lambda i: (-peaks[i], i)):
        clusters = clusters_of[vehicle]
        blocked = np.repeat(used[clusters].any(axis=0), num_subchannels)
        if blocked.all():
            logger.debug(f"Greedy: no open subframe for vehicle {vehicle}")
            continue
        cell = int(np.argmax(np.where(blocked, -np.inf, flat[vehicle])))
        l, k = divmod(cell, num_subchannels)
        grants[vehicle] = (l, k)
        used[clusters, l] = True
    return Allocation.from_grants(num_vehicles, grants)


def random_alloc(scenario, cost, seed=None):
    """Vehicles in shuffled order each draw a uniform cell among subframes still open to them"""
    cost.check_matches(scenario)
    rng = np.random.default_rng(seed)
    num_vehicles, num_subframes, num_subchannels = cost.shape
    membership, clusters_of = _cluster_lists(scenario)
    used = np.zeros((membership.shape[0], num_subframes), dtype=bool)

    grants = {}
    for vehicle in rng.permutation(num_vehicles):
        vehicle = int(vehicle)
        clusters = clusters_of[vehicle]
        open_subframes = np.flatnonzero(~used[clusters].any(axis=0))
        if open_subframes.size == 0:
            continue
        pick = int(rng.integers(open_subframes.size * num_subchannels))
        l = int(open_subframes[pick // num_subchannels])
        grants[vehicle] = (l, pick % num_subchannels)
        used[clusters, l] = True
    return Allocation.from_grants(num_vehicles, grants)
