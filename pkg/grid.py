"""
Resource lattice helpers, scenario validation, conflict detection and the
scenario / allocation file formats.

Scenario document (JSON)::

    {"version": 1, "L": 4, "K": 2, "N": 5, "J": 2,
     "clusters": [[0, 1, 2], [2, 3, 4]],
     "subframe_duration_ms": 1.0, "subchannel_bandwidth_mhz": 1.26}

`clusters` holds one list of 0-based vehicle ids per cluster (the rows of U).
Allocation document (JSON)::

    {"version": 1, "N": 5, "grants": [[vehicle, subframe, subchannel], ...], "unassigned": [...]}
"""

import json
import logging
from collections import defaultdict

import numpy as np

from models import (
    Allocation,
    Conflict,
    DomainError,
    LoadError,
    ResourceGrid,
    Scenario,
    ScenarioViolation,
)

# Configure logging
logger = logging.getLogger(__name__)

SCENARIO_FORMAT_VERSION = 1


def resource_index(l, k, grid):
    """Flat 1-based resource label r = (l - 1) * K + k for 1-based subframe l and subchannel k"""
    if not 1 <= l <= grid.subframes:
        raise DomainError(f"subframe {l} outside 1..{grid.subframes}")
    if not 1 <= k <= grid.subchannels:
        raise DomainError(f"subchannel {k} outside 1..{grid.subchannels}")
    return (l - 1) * grid.subchannels + k


def resource_coords(r, grid):
    """Inverse of `resource_index`"""
    if not 1 <= r <= grid.size:
        raise DomainError(f"resource {r} outside 1..{grid.size}")
    l, k = divmod(r - 1, grid.subchannels)
    return l + 1, k + 1


def validate_scenario(scenario):
    """Return the first violated scenario invariant, or None when the scenario is schedulable"""
    membership = scenario.membership
    if not np.isin(membership, (0, 1)).all():
        j, i = np.argwhere(~np.isin(membership, (0, 1)))[0]
        return ScenarioViolation("non-binary membership", f"U[{j}, {i}] = {membership[j, i]}")

    orphans = np.flatnonzero(membership.sum(axis=0) == 0)
    if orphans.size:
        return ScenarioViolation("orphan vehicle", f"vehicle {orphans[0]} belongs to no cluster")

    sizes = scenario.cluster_sizes
    for j, size in enumerate(sizes):
        if size == 0:
            return ScenarioViolation("empty cluster", f"cluster {j} has no members")
        if size > scenario.grid.subframes:
            return ScenarioViolation(
                "cluster exceeds subframes",
                f"cluster {j} has {size} members but only {scenario.grid.subframes} subframes",
            )
    return None


def find_conflicts(allocation, scenario):
    """List every (cluster, subframe) shared by two or more granted cluster members"""
    if allocation.num_vehicles != scenario.num_vehicles:
        raise DomainError(
            f"allocation covers {allocation.num_vehicles} vehicles, scenario has {scenario.num_vehicles}"
        )
    grid = scenario.grid
    for vehicle, (l, k) in allocation.grants.items():
        if not (0 <= l < grid.subframes and 0 <= k < grid.subchannels):
            raise DomainError(f"vehicle {vehicle} granted ({l}, {k}) outside the {grid.subframes}x{grid.subchannels} grid")

    conflicts = []
    for j in range(scenario.num_clusters):
        by_subframe = defaultdict(set)
        for vehicle in scenario.members(j):
            grant = allocation.grants.get(int(vehicle))
            if grant is not None:
                by_subframe[grant[0]].add(int(vehicle))
        for l in sorted(by_subframe):
            if len(by_subframe[l]) > 1:
                conflicts.append(Conflict(cluster=j, subframe=l, vehicles=frozenset(by_subframe[l])))
    return conflicts


def scenario_to_dict(scenario):
    grid = scenario.grid
    return {
        "version": SCENARIO_FORMAT_VERSION,
        "L": grid.subframes,
        "K": grid.subchannels,
        "N": scenario.num_vehicles,
        "J": scenario.num_clusters,
        "clusters": scenario.rosters(),
        "subframe_duration_ms": grid.subframe_duration_ms,
        "subchannel_bandwidth_mhz": grid.subchannel_bandwidth_mhz,
    }


def scenario_from_dict(data):
    try:
        if int(data.get("version", SCENARIO_FORMAT_VERSION)) != SCENARIO_FORMAT_VERSION:
            raise LoadError(f"unsupported scenario version {data['version']}")
        grid = ResourceGrid(
            subframes=int(data["L"]),
            subchannels=int(data["K"]),
            subframe_duration_ms=float(data.get("subframe_duration_ms", ResourceGrid.subframe_duration_ms)),
            subchannel_bandwidth_mhz=float(data.get("subchannel_bandwidth_mhz", ResourceGrid.subchannel_bandwidth_mhz)),
        )
        clusters = [[int(v) for v in roster] for roster in data["clusters"]]
        num_vehicles = int(data["N"])
    except (KeyError, TypeError, ValueError) as e:
        raise LoadError(f"malformed scenario document: {e}") from e

    if "J" in data and int(data["J"]) != len(clusters):
        raise LoadError(f"scenario declares J={data['J']} but lists {len(clusters)} clusters")
    try:
        return Scenario.from_rosters(grid, clusters, num_vehicles=num_vehicles)
    except DomainError as e:
        raise LoadError(str(e)) from e


def save_scenario(scenario, path):
    with open(path, "w") as f:
        json.dump(scenario_to_dict(scenario), f, indent=2)
        f.write("\n")
    logger.debug(f"Saved scenario with {scenario.num_vehicles} vehicles to {path}")


def load_scenario(path):
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise LoadError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    except OSError as e:
        raise LoadError(f"{path}: {e}") from e
    return scenario_from_dict(data)


def save_allocation(allocation, path):
    with open(path, "w") as f:
        json.dump(allocation.to_dict(), f, indent=2)
        f.write("\n")


def load_allocation(path):
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise LoadError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    except OSError as e:
        raise LoadError(f"{path}: {e}") from e
    try:
        return Allocation.from_dict(data)
    except DomainError as e:
        raise LoadError(f"{path}: {e}") from e
