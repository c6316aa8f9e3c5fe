"""
Exact maximum-weight assignment of cluster vehicles (rows) to subframes (columns),
and an enumeration oracle for the unreduced per-cluster problem.
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from config import Config
from models import BudgetExceededError, DomainError, InfeasibleAssignmentError

# Configure logging
logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_ROWS = 8


@dataclass(frozen=True, eq=False)
class AssignmentProblem:
    """Maximize the sum of `weights[i, match[i]]` with one distinct allowed column per row"""
    weights: np.ndarray
    allowed: np.ndarray = None

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        if weights.ndim != 2 or weights.shape[0] < 1 or weights.shape[1] < 1:
            raise DomainError(f"weights must be a non-empty n x m matrix, got shape {weights.shape}")
        if self.allowed is None:
            allowed = np.ones(weights.shape, dtype=bool)
        else:
            allowed = np.array(self.allowed, dtype=bool)
            if allowed.shape != weights.shape:
                raise DomainError(f"allowed mask shape {allowed.shape} differs from weights {weights.shape}")
        if not np.all(np.isfinite(weights[allowed])):
            raise DomainError("allowed weights must be finite")
        weights.setflags(write=False)
        allowed.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "allowed", allowed)

    @property
    def shape(self):
        return self.weights.shape

    def infeasible_rows(self):
        """Rows without a single allowed column"""
        return np.flatnonzero(~self.allowed.any(axis=1))


@dataclass(frozen=True)
class AssignmentResult:
    matching: dict
    objective: float


def solve_assignment(problem):
    """Row-perfect maximum-weight matching by shortest augmenting paths with potentials.

    Works on cost = -weight; blocked cells are skipped rather than priced. Rows are
    inserted in index order and the column scan keeps the first minimum, so among
    equally good augmentations the lowest column index wins.
    """
    n, m = problem.shape
    empty_rows = problem.infeasible_rows()
    if empty_rows.size:
        raise InfeasibleAssignmentError(rows=empty_rows[:1])

    # 1-based rows and columns; column 0 is the virtual root of each search
    cost = np.full((n + 1, m + 1), np.inf)
    cost[1:, 1:] = np.where(problem.allowed, -problem.weights, np.inf)
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=int)  # p[j]: row matched to column j
    way = np.zeros(m + 1, dtype=int)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            reduced = cost[i0] - u[i0] - v
            improved = free & (reduced < minv)
            minv[improved] = reduced[improved]
            way[improved] = j0
            candidates = np.where(free, minv, np.inf)
            j1 = int(np.argmin(candidates))
            delta = candidates[j1]
            if not np.isfinite(delta):
                # the alternating tree from row i reaches no free allowed column
                tree_columns = np.flatnonzero(used[1:]) + 1
                raise InfeasibleAssignmentError(rows=p[used] - 1, columns=tree_columns - 1)
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        # flip the augmenting path back to the root
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    matching = {int(p[j]) - 1: j - 1 for j in range(1, m + 1) if p[j] > 0}
    matching = dict(sorted(matching.items()))
    objective = float(sum(problem.weights[i, j] for i, j in matching.items()))
    logger.debug(f"Solved {n}x{m} assignment, objective {objective:.6f}")
    return AssignmentResult(matching=matching, objective=objective)


def brute_force_cluster(costs, allowed_subframes=None, budget=Config.BRUTE_FORCE_BUDGET):
    """Optimum of the unreduced per-cluster problem by enumerating every feasible grant set.

    Enumerates injective subframe choices times every per-vehicle subchannel choice.
    Returns (grants row -> (subframe, subchannel), objective); the first optimum in
    lexicographic enumeration order is kept.
    """
    block = np.asarray(costs, dtype=float)
    if block.ndim != 3:
        raise DomainError(f"cluster cost block must be n x L x K, got shape {block.shape}")
    n, num_subframes, num_subchannels = block.shape
    if allowed_subframes is None:
        subframes = list(range(num_subframes))
    else:
        subframes = [int(l) for l in np.flatnonzero(np.asarray(allowed_subframes, dtype=bool))]

    count = math.perm(len(subframes), n) * num_subchannels ** n
    if n > BRUTE_FORCE_MAX_ROWS or count > budget:
        raise BudgetExceededError(
            f"brute force over n={n}, {len(subframes)} subframes, K={num_subchannels} needs {count} evaluations",
            count,
        )
    if n == 0:
        return {}, 0.0
    if count == 0:
        raise InfeasibleAssignmentError(rows=range(n), columns=subframes)

    rows = np.arange(n)
    best_value = -np.inf
    best = None
    for perm in itertools.permutations(subframes, n):
        # every subchannel combination for this subframe choice, in lexicographic order
        slices = block[rows, list(perm), :]
        totals = slices[0]
        for row in range(1, n):
            totals = np.add.outer(totals, slices[row])
        flat = int(np.argmax(totals))
        value = float(totals.flat[flat])
        if value > best_value:
            best_value = value
            choice = np.unravel_index(flat, totals.shape)
            best = {row: (perm[row], int(choice[row])) for row in range(n)}
    return best, best_value
