import math

import numpy as np
import pytest

from capacity_model import (
    ChannelConfig,
    capacity_from_sinr,
    load_cost_tensor,
    sample_cost_tensor,
    save_cost_tensor,
)
from models import ConfigError, CostTensor, DomainError, LoadError


def test_capacity_from_sinr_is_shannon_rate():
    assert capacity_from_sinr(0.0) == 0.0
    assert capacity_from_sinr(1.0, bandwidth_mhz=1.0) == pytest.approx(1.0)
    assert capacity_from_sinr(3.0, bandwidth_mhz=1.26) == pytest.approx(2.52)
    np.testing.assert_allclose(capacity_from_sinr(np.array([0.0, 1.0, 3.0]), 2.0), [0.0, 2.0, 4.0])


def test_capacity_from_sinr_is_increasing_and_linear_in_bandwidth():
    sinr = np.linspace(0.0, 1000.0, 257)
    rates = capacity_from_sinr(sinr, 1.26)

    assert np.all(np.diff(rates) > 0)
    np.testing.assert_allclose(capacity_from_sinr(sinr, 2.52), 2 * rates)
    np.testing.assert_allclose(capacity_from_sinr(sinr, 0.5), rates * 0.5 / 1.26)
    assert capacity_from_sinr(127.0, 1.26) == pytest.approx(8.82)


def test_capacity_from_sinr_rejects_bad_input():
    with pytest.raises(DomainError):
        capacity_from_sinr(-0.1)
    with pytest.raises(DomainError):
        capacity_from_sinr(1.0, bandwidth_mhz=0.0)


def test_sampled_tensor_is_reproducible(two_cluster_scenario):
    cfg = ChannelConfig(seed=7)
    first = sample_cost_tensor(two_cluster_scenario, cfg)
    second = sample_cost_tensor(two_cluster_scenario, cfg)
    other = sample_cost_tensor(two_cluster_scenario, cfg, seed=8)

    assert first.shape == (12, 10, 2)
    assert np.all(first.values >= 0)
    np.testing.assert_array_equal(first.values, second.values)
    assert not np.array_equal(first.values, other.values)


def test_full_frequency_correlation_makes_subchannels_identical(two_cluster_scenario):
    cost = sample_cost_tensor(two_cluster_scenario, ChannelConfig(frequency_correlation=1.0))
    np.testing.assert_allclose(cost.values, np.broadcast_to(cost.values[..., :1], cost.shape))


def test_zero_spread_gives_the_mean_rate(two_cluster_scenario):
    cfg = ChannelConfig(sinr_db_mean=10.0, sinr_db_stddev=0.0, bandwidth_mhz=1.0)
    cost = sample_cost_tensor(two_cluster_scenario, cfg)
    np.testing.assert_allclose(cost.values, math.log2(11.0))


@pytest.mark.parametrize("kwargs", [
    {"bandwidth_mhz": 0.0},
    {"sinr_db_stddev": -1.0},
    {"frequency_correlation": 1.5},
])
def test_channel_config_validation(kwargs):
    with pytest.raises(ConfigError):
        ChannelConfig(**kwargs)


def test_tensor_file_round_trip_is_exact(tmp_path, rng):
    tensor = CostTensor(values=rng.uniform(0, 10, size=(3, 4, 2)))
    path = tmp_path / "costs.txt"
    save_cost_tensor(tensor, path)

    loaded = load_cost_tensor(path)

    np.testing.assert_array_equal(loaded.values, tensor.values)
    assert path.read_text().splitlines()[0] == "3 4 2"


def test_tensor_file_allows_comments_and_blank_lines(tmp_path):
    path = tmp_path / "costs.txt"
    path.write_text("# two vehicles, one subframe\n1 2 2\n\n1.5 2.5\n# second subframe\n0 4\n")
    cost = load_cost_tensor(path)
    np.testing.assert_array_equal(cost.values, [[[1.5, 2.5], [0.0, 4.0]]])


@pytest.mark.parametrize("text, message", [
    ("", "empty"),
    ("1 2\n1\n", ":1: header"),
    ("1 1 2\n1 2\n3 4\n", "expected 1 rows"),
    ("1 2 2\n1 2\n3\n", ":3: row 1 has 1 column"),
    ("1 1 2\n1 x\n", ":2: row 0, column 1"),
    ("1 1 2\n1 -2\n", "must be finite"),
    ("1 1 1\nnan\n", "must be finite"),
])
def test_tensor_file_errors_name_the_line(tmp_path, text, message):
    path = tmp_path / "costs.txt"
    path.write_text(text)
    with pytest.raises(LoadError, match=message):
        load_cost_tensor(path)


def test_tensor_file_must_match_scenario(tmp_path, two_cluster_scenario):
    path = tmp_path / "costs.txt"
    save_cost_tensor(CostTensor(values=np.ones((12, 10, 3))), path)
    with pytest.raises(LoadError, match="does not match"):
        load_cost_tensor(path, two_cluster_scenario)


def test_missing_tensor_file(tmp_path):
    with pytest.raises(LoadError):
        load_cost_tensor(tmp_path / "missing.txt")
