import numpy as np
import pytest

from models import ConfigError, CostTensor, ResourceGrid, Scenario
from sim_harness import chain_rosters


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def two_cluster_scenario():
    """Cluster A holds vehicles 0..8, cluster B holds 8..11; vehicle 8 is shared"""
    grid = ResourceGrid(subframes=10, subchannels=2)
    return Scenario.from_rosters(grid, [list(range(0, 9)), list(range(8, 12))])


@pytest.fixture
def make_cost():
    def make(rng, scenario, low=0.5, high=10.0):
        shape = (scenario.num_vehicles, scenario.grid.subframes, scenario.grid.subchannels)
        return CostTensor(values=rng.uniform(low, high, size=shape))
    return make


@pytest.fixture
def make_chain_scenario():
    """Random chain-topology scenario with at most `max_vehicles` vehicles"""
    def make(rng, max_vehicles=8, max_subframes=5, max_subchannels=3, max_clusters=3, overlaps=(0.0, 0.2, 0.5)):
        while True:
            subframes = int(rng.integers(2, max_subframes + 1))
            subchannels = int(rng.integers(1, max_subchannels + 1))
            num_clusters = int(rng.integers(1, max_clusters + 1))
            sizes = tuple(int(s) for s in rng.integers(1, subframes + 1, size=num_clusters))
            overlap = float(rng.choice(overlaps))
            try:
                rosters = chain_rosters(sizes, overlap)
            except ConfigError:
                continue
            if 1 + max(max(roster) for roster in rosters) > max_vehicles:
                continue
            grid = ResourceGrid(subframes=subframes, subchannels=subchannels)
            return Scenario.from_rosters(grid, rosters)
    return make
