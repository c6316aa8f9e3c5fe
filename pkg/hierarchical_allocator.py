"""
Hierarchical allocation: clusters are solved one at a time, most constrained
first, each as a reduced vehicle/subframe assignment. Grants made for shared
vehicles are kept and their subframes are blocked for every later cluster
that contains a co-member.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from assignment_solver import AssignmentProblem, solve_assignment
from models import Allocation, DomainError, InfeasibleAssignmentError
from reduction import lift_assignment, reduce_costs

# Configure logging
logger = logging.getLogger(__name__)

ORDERINGS = ("constrainedness", "index")


@dataclass(frozen=True)
class ClusterOrder:
    """Cluster ids in processing order with their (load ratio, overlap degree) scores"""
    clusters: tuple
    scores: tuple


@dataclass(frozen=True)
class AllocationResult:
    allocation: Allocation
    cluster_objectives: dict = field(default_factory=dict)
    diagnostics: tuple = ()
    order: ClusterOrder = None


def overlap_degrees(scenario):
    """Number of members each cluster shares with at least one other cluster"""
    shared = scenario.membership.sum(axis=0) > 1
    return (scenario.membership.astype(bool) & shared).sum(axis=1).astype(int)


def constrainedness_order(scenario, ordering="constrainedness"):
    """Order clusters by load N_j / L, then overlap degree, both descending, then by id"""
    if ordering not in ORDERINGS:
        raise DomainError(f"unknown cluster ordering {ordering!r}, expected one of {ORDERINGS}")
    loads = scenario.cluster_sizes / scenario.grid.subframes
    overlaps = overlap_degrees(scenario)
    clusters = range(scenario.num_clusters)
    if ordering == "constrainedness":
        clusters = sorted(clusters, key=lambda j: (-loads[j], -overlaps[j], j))
    scores = tuple((float(loads[j]), int(overlaps[j])) for j in clusters)
    return ClusterOrder(clusters=tuple(clusters), scores=scores)


def allocate(scenario, cost, ordering="constrainedness"):
    """Allocate every cluster in constrainedness order, keeping earlier grants fixed.

    Vehicles that cannot be placed once their clusters' subframes are blocked are
    reported in `allocation.unassigned` and in the diagnostics.
    """
    cost.check_matches(scenario)
    order = constrainedness_order(scenario, ordering)
    membership = scenario.membership.astype(bool)
    used = np.zeros((scenario.num_clusters, scenario.grid.subframes), dtype=bool)
    grants = {}
    unassigned = set()
    diagnostics = []
    cluster_objectives = {}

    for j in order.clusters:
        free = [int(i) for i in scenario.members(j) if i not in grants and i not in unassigned]
        cluster_objectives[j] = 0.0
        if not free:
            continue

        # a subframe is open to a vehicle only if no cluster it belongs to already uses it
        allowed = np.array([~used[membership[:, i]].any(axis=0) for i in free])
        rcm = reduce_costs(cost.cluster_block(free))
        active = list(range(len(free)))
        result = None
        while active:
            try:
                result = solve_assignment(AssignmentProblem(rcm.values[active], allowed[active]))
                break
            except InfeasibleAssignmentError as e:
                deficient = [active[r] for r in e.rows]
                victim = min(deficient, key=lambda r: (rcm.values[r][allowed[r]].max(initial=-np.inf), -r))
                unassigned.add(free[victim])
                active.remove(victim)
                message = (
                    f"cluster {j}: vehicle {free[victim]} left unassigned, "
                    f"vehicles {[free[r] for r in deficient]} compete for {len(e.columns)} open subframe(s)"
                )
                logger.warning(message)
                diagnostics.append(message)

        if result is None:
            continue
        lifted = lift_assignment({active[r]: l for r, l in result.matching.items()}, rcm)
        for row, (l, k) in lifted.items():
            vehicle = free[row]
            grants[vehicle] = (l, k)
            used[membership[:, vehicle], l] = True
        cluster_objectives[j] = result.objective
        logger.debug(f"Cluster {j}: granted {len(lifted)} of {len(free)} free vehicles, rate {result.objective:.4f}")

    for vehicle in range(scenario.num_vehicles):
        if vehicle not in grants and vehicle not in unassigned:
            unassigned.add(vehicle)
            diagnostics.append(f"vehicle {vehicle} belongs to no cluster")

    allocation = Allocation(num_vehicles=scenario.num_vehicles, grants=grants, unassigned=frozenset(unassigned))
    return AllocationResult(
        allocation=allocation,
        cluster_objectives=cluster_objectives,
        diagnostics=tuple(diagnostics),
        order=order,
    )
