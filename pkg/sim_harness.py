"""
Monte Carlo experiment harness.

Experiment config document (JSON, all keys optional except `version`)::

    {
      "version": 1,
      "L": 100, "K": 7,
      "cluster_sizes": [100],
      "overlap_fraction": 0.0,
      "channel": {"bandwidth_mhz": 1.26, "sinr_db_mean": 20.0, "sinr_db_stddev": 5.0,
                  "frequency_correlation": 0.0},
      "trials": 1000,
      "seed": 0,
      "algorithms": ["exhaustive", "proposed", "greedy", "random"],
      "sweep_sizes": [10, 20, 30],
      "cluster_ordering": "constrainedness",
      "exhaustive_budget": 2000000,
      "exhaustive_max_vehicles": 10,
      "workers": 1,
      "output_dir": "results"
    }

Clusters form a chain: cluster j shares ceil(overlap_fraction * min(N_{j-1}, N_j))
vehicles with cluster j-1. Trial t draws its channel from
SeedSequence(seed, spawn_key=(t, 0)) and its random baseline from spawn_key=(t, 1),
so trials are independent of execution order and sweep points are paired.
"""

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import metadata

import numpy as np

from baselines import exhaustive_global, greedy, random_alloc
from capacity_model import ChannelConfig, sample_cost_tensor
from config import Config
from hierarchical_allocator import ORDERINGS, allocate
from metrics import (
    ALGORITHMS,
    TRIAL_COLUMNS,
    aggregate_trials,
    paired_tests,
    summarize,
    trials_frame,
    worst_rate_curve,
    write_table,
)
from models import BudgetExceededError, ConfigError, DomainError, ResourceGrid, Scenario

# Configure logging
logger = logging.getLogger(__name__)

CONFIG_VERSION = 1
PACKAGE_NAME = "v2v-subchannel-allocator"
CHANNEL_STREAM = 0
RANDOM_STREAM = 1


def code_version():
    try:
        return metadata.version(PACKAGE_NAME)
    except metadata.PackageNotFoundError:
        return "0.1.0+source"


@dataclass(frozen=True)
class ExperimentConfig:
    subframes: int = Config.DEFAULT_SUBFRAMES
    subchannels: int = Config.DEFAULT_SUBCHANNELS
    cluster_sizes: tuple = (Config.DEFAULT_SUBFRAMES,)
    overlap_fraction: float = 0.0
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    trials: int = 1000
    seed: int = 0
    algorithms: tuple = ALGORITHMS
    sweep_sizes: tuple = ()
    cluster_ordering: str = "constrainedness"
    exhaustive_budget: int = Config.EXHAUSTIVE_NODE_BUDGET
    exhaustive_max_vehicles: int = Config.EXHAUSTIVE_MAX_VEHICLES
    workers: int = Config.WORKERS
    output_dir: str = Config.RESULTS_DIR
    version: int = CONFIG_VERSION

    def __post_init__(self):
        try:
            object.__setattr__(self, "cluster_sizes", tuple(int(s) for s in self.cluster_sizes))
            object.__setattr__(self, "sweep_sizes", tuple(int(s) for s in self.sweep_sizes))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"cluster and sweep sizes must be integers: {e}") from e
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {self.version}, expected {CONFIG_VERSION}")
        if self.subframes < 1 or self.subchannels < 1:
            raise ConfigError(f"grid needs L >= 1 and K >= 1, got L={self.subframes} K={self.subchannels}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 <= self.overlap_fraction <= 1.0:
            raise ConfigError(f"overlap fraction must lie in [0, 1], got {self.overlap_fraction}")
        if not self.cluster_sizes:
            raise ConfigError("at least one cluster size is required")
        for size in self.cluster_sizes + self.sweep_sizes:
            if not 1 <= size <= self.subframes:
                raise ConfigError(f"cluster size {size} outside 1..L={self.subframes}")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown or not self.algorithms:
            raise ConfigError(f"unknown algorithms {sorted(unknown)}, expected a subset of {list(ALGORITHMS)}")
        if self.cluster_ordering not in ORDERINGS:
            raise ConfigError(f"unknown cluster ordering {self.cluster_ordering!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        chain_rosters(self.cluster_sizes, self.overlap_fraction)
        for size in self.sweep_sizes:
            chain_rosters((size,) * len(self.cluster_sizes), self.overlap_fraction)

    @property
    def grid(self):
        return ResourceGrid(subframes=self.subframes, subchannels=self.subchannels,
                            subchannel_bandwidth_mhz=self.channel.bandwidth_mhz)

    def with_overrides(self, seed=None, trials=None, algorithms=None, output_dir=None):
        """Copy with the CLI overrides applied; None leaves a value unchanged"""
        changes = {"seed": seed, "trials": trials, "algorithms": algorithms, "output_dir": output_dir}
        return replace(self, **{key: value for key, value in changes.items() if value is not None})

    def to_dict(self):
        return {
            "version": self.version,
            "L": self.subframes,
            "K": self.subchannels,
            "cluster_sizes": list(self.cluster_sizes),
            "overlap_fraction": self.overlap_fraction,
            "channel": {key: value for key, value in self.channel.to_dict().items() if key != "seed"},
            "trials": self.trials,
            "seed": self.seed,
            "algorithms": list(self.algorithms),
            "sweep_sizes": list(self.sweep_sizes),
            "cluster_ordering": self.cluster_ordering,
            "exhaustive_budget": self.exhaustive_budget,
            "exhaustive_max_vehicles": self.exhaustive_max_vehicles,
            "workers": self.workers,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, data):
        if "version" not in data:
            raise ConfigError("experiment config needs a 'version' field")
        known = set(cls().to_dict())
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            channel = ChannelConfig(**data.get("channel", {}))
            values = {
                "version": int(data["version"]),
                "subframes": int(data.get("L", Config.DEFAULT_SUBFRAMES)),
                "subchannels": int(data.get("K", Config.DEFAULT_SUBCHANNELS)),
                "channel": channel,
            }
            # one fully loaded cluster unless told otherwise
            values["cluster_sizes"] = (values["subframes"],)
            for key in ("cluster_sizes", "sweep_sizes", "algorithms"):
                if key in data:
                    values[key] = tuple(data[key])
            for key in ("trials", "seed", "exhaustive_budget", "exhaustive_max_vehicles", "workers"):
                if key in data:
                    values[key] = int(data[key])
            if "overlap_fraction" in data:
                values["overlap_fraction"] = float(data["overlap_fraction"])
            for key in ("cluster_ordering", "output_dir"):
                if key in data:
                    values[key] = str(data[key])
            return cls(**values)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"malformed experiment config: {e}") from e

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
        except OSError as e:
            raise ConfigError(f"{path}: {e}") from e
        return cls.from_dict(data)


def trial_seed(master_seed, trial, stream):
    return np.random.SeedSequence(master_seed, spawn_key=(trial, stream))


def chain_rosters(sizes, overlap_fraction):
    """Rosters of a chain of clusters where neighbours share ceil(f * min size) vehicles"""
    # the epsilon keeps products like 0.1 * 30 from rounding up past an integer
    shares = [math.ceil(overlap_fraction * min(a, b) - 1e-9) for a, b in zip(sizes, sizes[1:])]
    for j, size in enumerate(sizes):
        left = shares[j - 1] if j > 0 else 0
        right = shares[j] if j < len(shares) else 0
        if left + right > size:
            raise ConfigError(
                f"cluster {j} of size {size} cannot share {left} vehicles with cluster {j - 1} "
                f"and {right} with cluster {j + 1}"
            )

    rosters = []
    next_vehicle = 0
    for j, size in enumerate(sizes):
        shared = rosters[-1][len(rosters[-1]) - shares[j - 1]:] if j > 0 else []
        fresh = list(range(next_vehicle, next_vehicle + size - len(shared)))
        next_vehicle += len(fresh)
        rosters.append(shared + fresh)
    return rosters


def generate_scenario(cfg, trial, cluster_sizes=None):
    """Chain-topology scenario and its channel draw for one trial.

    Neighbouring clusters share ceil(f * min(N_{j-1}, N_j)) vehicles rather than
    ceil(f * N_j), so the shared set always fits in the smaller cluster. The two
    counts agree whenever neighbouring clusters have equal sizes.
    """
    sizes = cfg.cluster_sizes if cluster_sizes is None else tuple(cluster_sizes)
    rosters = chain_rosters(sizes, cfg.overlap_fraction)
    scenario = Scenario.from_rosters(cfg.grid, rosters)
    cost = sample_cost_tensor(scenario, cfg.channel, seed=trial_seed(cfg.seed, trial, CHANNEL_STREAM))
    return scenario, cost


def solve_scenario(name, scenario, cost, seed=None, ordering="constrainedness",
                   budget=Config.EXHAUSTIVE_NODE_BUDGET):
    """Allocation and diagnostics of algorithm `name` on one scenario"""
    if name == "proposed":
        result = allocate(scenario, cost, ordering=ordering)
        return result.allocation, list(result.diagnostics)
    if name == "greedy":
        return greedy(scenario, cost), []
    if name == "random":
        return random_alloc(scenario, cost, seed=seed), []
    if name == "exhaustive":
        allocation, _ = exhaustive_global(scenario, cost, budget=budget)
        return allocation, []
    raise DomainError(f"unknown algorithm {name!r}, expected one of {list(ALGORITHMS)}")


def run_algorithm(name, scenario, cost, cfg, trial):
    """Allocation of one algorithm, or None when the exhaustive oracle is out of budget"""
    if name == "exhaustive" and scenario.num_vehicles > cfg.exhaustive_max_vehicles:
        return None
    try:
        allocation, _ = solve_scenario(
            name, scenario, cost,
            seed=trial_seed(cfg.seed, trial, RANDOM_STREAM),
            ordering=cfg.cluster_ordering,
            budget=cfg.exhaustive_budget,
        )
    except BudgetExceededError as e:
        logger.warning(f"Trial {trial}: skipping exhaustive search ({e})")
        return None
    return allocation


def run_trial(task):
    """Per-algorithm rate records of one trial; `task` is (cfg, trial, cluster_sizes)"""
    cfg, trial, sizes = task
    scenario, cost = generate_scenario(cfg, trial, sizes)
    records = []
    for name in cfg.algorithms:
        allocation = run_algorithm(name, scenario, cost, cfg, trial)
        if allocation is None:
            continue
        summary = summarize(allocation, cost)
        record = {"algo": name, "trial": trial, "N": scenario.num_vehicles}
        record.update(summary.to_dict())
        records.append(record)
    return records


def _execute(cfg, tasks):
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            batches = list(pool.map(run_trial, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))
    else:
        batches = [run_trial(task) for task in tasks]
    return trials_frame([record for batch in batches for record in batch])


def _warn_if_exhaustive_skipped(cfg, sizes_list):
    if "exhaustive" not in cfg.algorithms:
        return
    for sizes in sizes_list:
        fleet = len({v for roster in chain_rosters(sizes, cfg.overlap_fraction) for v in roster})
        if fleet > cfg.exhaustive_max_vehicles:
            logger.warning(
                f"Exhaustive search skipped for clusters {list(sizes)}: {fleet} vehicles exceed "
                f"the limit of {cfg.exhaustive_max_vehicles}"
            )


def write_manifest(cfg, output_dir, command, files):
    manifest = {
        "command": command,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "code_version": code_version(),
        "files": sorted(files),
    }
    path = os.path.join(output_dir, "manifest.json")
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


@dataclass
class ExperimentResult:
    trials: object
    summary: object
    paths: dict
    curve: object = None


def run_experiment(cfg, output_dir=None):
    """Run every trial of `cfg` and write trials.csv, summary.csv, paired_tests.csv and manifest.json"""
    output_dir = output_dir or cfg.output_dir
    os.makedirs(output_dir, exist_ok=True)
    _warn_if_exhaustive_skipped(cfg, [cfg.cluster_sizes])
    logger.info(f"Running {cfg.trials} trials of {list(cfg.algorithms)} on clusters {list(cfg.cluster_sizes)}")

    trials = _execute(cfg, [(cfg, trial, cfg.cluster_sizes) for trial in range(cfg.trials)])
    summary = aggregate_trials(trials)

    paths = {"trials": os.path.join(output_dir, "trials.csv"), "summary": os.path.join(output_dir, "summary.csv")}
    write_table(trials[TRIAL_COLUMNS], paths["trials"])
    write_table(summary, paths["summary"])
    paths["paired_tests"] = os.path.join(output_dir, "paired_tests.csv")
    write_table(paired_tests(trials), paths["paired_tests"])
    paths["manifest"] = write_manifest(cfg, output_dir, "run", [os.path.basename(p) for p in paths.values()])
    return ExperimentResult(trials=trials, summary=summary, paths=paths)


def run_sweep(cfg, output_dir=None):
    """Worst-rate versus fleet size: every cluster takes each size in `cfg.sweep_sizes` in turn"""
    if not cfg.sweep_sizes:
        raise ConfigError("sweep needs a non-empty 'sweep_sizes' list")
    output_dir = output_dir or cfg.output_dir
    os.makedirs(output_dir, exist_ok=True)
    num_clusters = len(cfg.cluster_sizes)
    sizes_list = [(size,) * num_clusters for size in cfg.sweep_sizes]
    _warn_if_exhaustive_skipped(cfg, sizes_list)
    logger.info(f"Sweeping {num_clusters} cluster(s) over sizes {list(cfg.sweep_sizes)}, {cfg.trials} trials each")

    tasks = [(cfg, trial, sizes) for sizes in sizes_list for trial in range(cfg.trials)]
    trials = _execute(cfg, tasks)
    summary = aggregate_trials(trials)
    curve = worst_rate_curve(trials)

    paths = {
        "trials": os.path.join(output_dir, "sweep_trials.csv"),
        "summary": os.path.join(output_dir, "sweep_summary.csv"),
        "curve": os.path.join(output_dir, "worst_rate_curve.csv"),
    }
    write_table(trials[TRIAL_COLUMNS], paths["trials"])
    write_table(summary, paths["summary"])
    write_table(curve, paths["curve"], index=True)
    paths["paired_tests"] = os.path.join(output_dir, "paired_tests.csv")
    write_table(paired_tests(trials), paths["paired_tests"])
    paths["manifest"] = write_manifest(cfg, output_dir, "sweep", [os.path.basename(p) for p in paths.values()])
    return ExperimentResult(trials=trials, summary=summary, paths=paths, curve=curve)
