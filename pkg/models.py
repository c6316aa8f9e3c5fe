from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from config import Config


class AllocationError(Exception):
    """Base class for every error raised by the allocation library"""
    kind = "allocation"
    exit_code = 4


class DomainError(AllocationError, ValueError):
    """Argument outside the domain of an operation"""
    kind = "domain"


class ContractViolationError(AllocationError):
    """Caller broke an operation's precondition"""
    kind = "contract"


class InfeasibleAssignmentError(AllocationError):
    """No row-perfect matching exists; `rows` is a Hall-violating row set"""
    kind = "infeasible"
    exit_code = 5

    def __init__(self, rows, columns=()):
        self.rows = tuple(sorted(int(r) for r in rows))
        self.columns = tuple(sorted(int(c) for c in columns))
        super().__init__(
            f"rows {list(self.rows)} can reach only {len(self.columns)} allowed column(s) {list(self.columns)}"
        )


class BudgetExceededError(AllocationError):
    """An exact oracle was asked to enumerate beyond its budget"""
    kind = "budget"
    exit_code = 5

    def __init__(self, message, count):
        self.count = count
        super().__init__(message)


class ConfigError(AllocationError):
    kind = "config"
    exit_code = 3


class LoadError(AllocationError):
    """A scenario, tensor or allocation file could not be read"""
    kind = "load"


def _frozen(array, dtype):
    values = np.array(array, dtype=dtype)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class ResourceGrid:
    """L subframes by K subchannels making up one allocation period"""
    subframes: int = Config.DEFAULT_SUBFRAMES
    subchannels: int = Config.DEFAULT_SUBCHANNELS
    subframe_duration_ms: float = Config.SUBFRAME_DURATION_MS
    subchannel_bandwidth_mhz: float = Config.SUBCHANNEL_BANDWIDTH_MHZ

    def __post_init__(self):
        if int(self.subframes) < 1 or int(self.subchannels) < 1:
            raise DomainError(f"grid needs L >= 1 and K >= 1, got L={self.subframes} K={self.subchannels}")

    @property
    def size(self):
        return self.subframes * self.subchannels


@dataclass(frozen=True, eq=False)
class Scenario:
    """Vehicles, clusters and the J x N membership matrix U over a resource grid.

    Construction only checks shapes; the scheduling invariants are checked by
    `grid.validate_scenario`.
    """
    grid: ResourceGrid
    membership: np.ndarray

    def __post_init__(self):
        try:
            raw = np.array(self.membership, dtype=float)
        except (TypeError, ValueError) as e:
            raise DomainError(f"membership must be numeric: {e}") from e
        if np.isin(raw, (0, 1)).all():
            membership = _frozen(raw, np.int8)
        else:
            # kept as floats for validate_scenario to report
            membership = _frozen(raw, float)
        if membership.ndim != 2 or membership.shape[0] < 1 or membership.shape[1] < 1:
            raise DomainError(f"membership must be a non-empty J x N matrix, got shape {membership.shape}")
        object.__setattr__(self, "membership", membership)

    @classmethod
    def from_rosters(cls, grid, rosters, num_vehicles=None):
        """Build a scenario from per-cluster lists of vehicle ids"""
        if num_vehicles is None:
            num_vehicles = 1 + max((max(roster) for roster in rosters if len(roster)), default=-1)
        membership = np.zeros((len(rosters), num_vehicles), dtype=np.int8)
        for j, roster in enumerate(rosters):
            for vehicle in roster:
                if not 0 <= vehicle < num_vehicles:
                    raise DomainError(f"cluster {j} lists unknown vehicle {vehicle}")
                membership[j, vehicle] = 1
        return cls(grid=grid, membership=membership)

    @property
    def num_vehicles(self):
        return self.membership.shape[1]

    @property
    def num_clusters(self):
        return self.membership.shape[0]

    @property
    def cluster_sizes(self):
        return self.membership.sum(axis=1).astype(int)

    def members(self, cluster):
        return np.flatnonzero(self.membership[cluster])

    def clusters_of(self, vehicle):
        return np.flatnonzero(self.membership[:, vehicle])

    def rosters(self):
        return [self.members(j).tolist() for j in range(self.num_clusters)]

    def relabel(self, permutation):
        """Scenario with vehicle `permutation[i]` renamed to `i`"""
        return Scenario(grid=self.grid, membership=self.membership[:, list(permutation)])


@dataclass(frozen=True, eq=False)
class CostTensor:
    """Capacity weights c[i, l, k] in Mbit/s for every vehicle and resource"""
    values: np.ndarray
    bandwidth_mhz: float = Config.SUBCHANNEL_BANDWIDTH_MHZ

    def __post_init__(self):
        values = _frozen(self.values, float)
        if values.ndim != 3:
            raise DomainError(f"cost tensor must be N x L x K, got {values.ndim} dimension(s)")
        if not np.all(np.isfinite(values)):
            raise DomainError("cost tensor has non-finite entries")
        if np.any(values < 0):
            raise DomainError("cost tensor has negative entries")
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape

    def check_matches(self, scenario):
        expected = (scenario.num_vehicles, scenario.grid.subframes, scenario.grid.subchannels)
        if self.shape != expected:
            raise DomainError(f"cost tensor shape {self.shape} does not match scenario N x L x K = {expected}")

    def cluster_block(self, vehicles):
        return self.values[np.asarray(vehicles, dtype=int)]


@dataclass(frozen=True, eq=False)
class ReducedCostMatrix:
    """Per-subframe best rate d[i, l] with the subchannel that attains it"""
    values: np.ndarray
    argmax: np.ndarray

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class Allocation:
    """Grants vehicle -> (subframe, subchannel), 0-based; everything else is unassigned"""
    num_vehicles: int
    grants: Mapping[int, tuple] = field(default_factory=dict)
    unassigned: frozenset = frozenset()

    def __post_init__(self):
        grants = {int(i): (int(l), int(k)) for i, (l, k) in sorted(self.grants.items())}
        object.__setattr__(self, "grants", MappingProxyType(grants))
        object.__setattr__(self, "unassigned", frozenset(int(i) for i in self.unassigned))
        both = self.unassigned.intersection(grants)
        if both:
            raise DomainError(f"vehicles {sorted(both)} are both granted and unassigned")
        covered = len(grants) + len(self.unassigned)
        if covered != self.num_vehicles or any(not 0 <= i < self.num_vehicles for i in self.unassigned.union(grants)):
            raise DomainError(f"grants and unassigned do not partition vehicles 0..{self.num_vehicles - 1}")

    @classmethod
    def from_grants(cls, num_vehicles, grants):
        unassigned = set(range(num_vehicles)) - set(grants)
        return cls(num_vehicles=num_vehicles, grants=dict(grants), unassigned=frozenset(unassigned))

    @property
    def assigned_count(self):
        return len(self.grants)

    def rates(self, cost):
        """Granted rate per vehicle, in vehicle id order"""
        values = cost.values
        rates = {}
        for vehicle, (l, k) in self.grants.items():
            if not (0 <= vehicle < values.shape[0] and 0 <= l < values.shape[1] and 0 <= k < values.shape[2]):
                raise DomainError(f"grant {vehicle} -> ({l}, {k}) lies outside the cost tensor {values.shape}")
            rates[vehicle] = float(values[vehicle, l, k])
        return rates

    def objective(self, cost):
        return float(sum(self.rates(cost).values()))

    def to_dict(self):
        return {
            "version": 1,
            "N": self.num_vehicles,
            "grants": [[vehicle, l, k] for vehicle, (l, k) in self.grants.items()],
            "unassigned": sorted(self.unassigned),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            grants = {int(vehicle): (int(l), int(k)) for vehicle, l, k in data["grants"]}
            num_vehicles = int(data["N"])
            unassigned = frozenset(int(i) for i in data.get("unassigned", ()))
        except (KeyError, TypeError, ValueError) as e:
            raise LoadError(f"malformed allocation document: {e}") from e
        return cls(num_vehicles=num_vehicles, grants=grants, unassigned=unassigned)


@dataclass(frozen=True)
class ScenarioViolation:
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


@dataclass(frozen=True)
class Conflict:
    """Two or more members of `cluster` granted in the same `subframe`"""
    cluster: int
    subframe: int
    vehicles: frozenset

    def to_dict(self):
        return {"cluster": self.cluster, "subframe": self.subframe, "vehicles": sorted(self.vehicles)}

