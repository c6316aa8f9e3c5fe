"""
Capacity weights of the vehicle/resource bipartite graph.

Cost tensor file format (text)::

    N L K
    c[0,0,0] c[0,0,1] ... c[0,0,K-1]
    c[0,1,0] ...
    ...
    c[N-1,L-1,0] ... c[N-1,L-1,K-1]

The header holds three integers. It is followed by N*L rows of K whitespace separated
decimals, row `i*L + l` holding vehicle i in subframe l. Blank lines and lines starting
with `#` are ignored. Values are written with `repr`, so a save/load round trip is exact.
"""

import logging
from dataclasses import dataclass

import numpy as np

from config import Config
from models import ConfigError, CostTensor, DomainError, LoadError

# Configure logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChannelConfig:
    """Synthetic log-normal SINR generator settings"""
    bandwidth_mhz: float = Config.SUBCHANNEL_BANDWIDTH_MHZ
    sinr_db_mean: float = Config.SINR_DB_MEAN
    sinr_db_stddev: float = Config.SINR_DB_STDDEV
    frequency_correlation: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.bandwidth_mhz <= 0:
            raise ConfigError(f"bandwidth must be positive, got {self.bandwidth_mhz}")
        if self.sinr_db_stddev < 0:
            raise ConfigError(f"SINR stddev must be >= 0, got {self.sinr_db_stddev}")
        if not 0.0 <= self.frequency_correlation <= 1.0:
            raise ConfigError(f"frequency correlation must lie in [0, 1], got {self.frequency_correlation}")

    def to_dict(self):
        return {
            "bandwidth_mhz": self.bandwidth_mhz,
            "sinr_db_mean": self.sinr_db_mean,
            "sinr_db_stddev": self.sinr_db_stddev,
            "frequency_correlation": self.frequency_correlation,
            "seed": self.seed,
        }


def capacity_from_sinr(sinr, bandwidth_mhz=Config.SUBCHANNEL_BANDWIDTH_MHZ):
    """Shannon rate B log2(1 + SINR) in Mbit/s for a bandwidth in MHz"""
    if bandwidth_mhz <= 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth_mhz}")
    sinr = np.asarray(sinr, dtype=float)
    if np.any(sinr < 0) or np.any(np.isnan(sinr)):
        raise DomainError("SINR must be a non-negative linear ratio")
    rate = bandwidth_mhz * np.log2(1.0 + sinr)
    return float(rate) if rate.ndim == 0 else rate


def sample_sinr_db(shape, cfg, rng):
    """Normal SINR draws in dB with correlation `cfg.frequency_correlation` along the last axis"""
    rho = cfg.frequency_correlation
    common = rng.standard_normal(shape[:-1] + (1,))
    independent = rng.standard_normal(shape)
    z = np.sqrt(rho) * common + np.sqrt(1.0 - rho) * independent
    return cfg.sinr_db_mean + cfg.sinr_db_stddev * z


def sample_cost_tensor(scenario, cfg, seed=None):
    """Draw a cost tensor for `scenario`; `seed` (an int or SeedSequence) overrides `cfg.seed`"""
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    grid = scenario.grid
    shape = (scenario.num_vehicles, grid.subframes, grid.subchannels)
    sinr = 10.0 ** (sample_sinr_db(shape, cfg, rng) / 10.0)
    return CostTensor(values=capacity_from_sinr(sinr, cfg.bandwidth_mhz), bandwidth_mhz=cfg.bandwidth_mhz)


def save_cost_tensor(tensor, path):
    n, l, k = tensor.shape
    with open(path, "w") as f:
        f.write(f"{n} {l} {k}\n")
        for row in tensor.values.reshape(n * l, k):
            f.write(" ".join(repr(float(value)) for value in row))
            f.write("\n")
    logger.debug(f"Saved {n}x{l}x{k} cost tensor to {path}")


def load_cost_tensor(path, scenario=None, bandwidth_mhz=Config.SUBCHANNEL_BANDWIDTH_MHZ):
    """Read a cost tensor file, checking it against `scenario` when one is given"""
    try:
        with open(path) as f:
            lines = [(number, line.split()) for number, line in enumerate(f, start=1)]
    except OSError as e:
        raise LoadError(f"{path}: {e}") from e
    lines = [(number, fields) for number, fields in lines if fields and not fields[0].startswith("#")]
    if not lines:
        raise LoadError(f"{path}: empty cost tensor file")

    header_line, header = lines[0]
    try:
        n, l, k = (int(value) for value in header)
    except ValueError as e:
        raise LoadError(f"{path}:{header_line}: header must be three integers 'N L K', got {' '.join(header)}") from e
    if min(n, l, k) < 1:
        raise LoadError(f"{path}:{header_line}: header dimensions must be positive")
    if scenario is not None:
        expected = (scenario.num_vehicles, scenario.grid.subframes, scenario.grid.subchannels)
        if (n, l, k) != expected:
            raise LoadError(f"{path}:{header_line}: header {n} {l} {k} does not match scenario N L K {expected}")

    rows = lines[1:]
    if len(rows) != n * l:
        raise LoadError(f"{path}: expected {n * l} rows of values, found {len(rows)}")

    values = np.empty((n * l, k))
    for row, (number, fields) in enumerate(rows):
        if len(fields) != k:
            raise LoadError(f"{path}:{number}: row {row} has {len(fields)} column(s), expected {k}")
        for column, text in enumerate(fields):
            try:
                value = float(text)
            except ValueError as e:
                raise LoadError(f"{path}:{number}: row {row}, column {column}: cannot parse {text!r}") from e
            if not np.isfinite(value) or value < 0:
                raise LoadError(f"{path}:{number}: row {row}, column {column}: entry {text} must be finite and >= 0")
            values[row, column] = value

    logger.debug(f"Loaded {n}x{l}x{k} cost tensor from {path}")
    return CostTensor(values=values.reshape(n, l, k), bandwidth_mhz=bandwidth_mhz)
