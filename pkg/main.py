import functools
import json
import logging
import os
import sys

import click

from capacity_model import load_cost_tensor
from config import Config
from grid import find_conflicts, load_allocation, load_scenario, save_allocation, validate_scenario
from metrics import ALGORITHMS, summarize
from models import AllocationError, DomainError
from sim_harness import ExperimentConfig, run_experiment, run_sweep, solve_scenario

logger = logging.getLogger(__name__)

CHECK_FAILED = 1


def reports_errors(command):
    """Turn library errors into a one-line diagnostic and the error class's exit code"""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except AllocationError as e:
            click.echo(f"error[{e.kind}]: {e}", err=True)
            sys.exit(e.exit_code)
    return wrapper


def parse_algorithms(value):
    if value is None:
        return None
    algorithms = tuple(name.strip() for name in value.split(",") if name.strip())
    unknown = [name for name in algorithms if name not in ALGORITHMS]
    if unknown or not algorithms:
        raise click.BadParameter(f"expected a comma separated subset of {','.join(ALGORITHMS)}, got {value!r}")
    return algorithms


def experiment_options(command):
    command = click.option("--trials", type=click.IntRange(min=1), help="Override the number of trials.")(command)
    command = click.option("--out", "out", type=click.Path(file_okay=False), help="Output directory.")(command)
    command = click.option("--algos", help="Comma separated algorithms to run.")(command)
    command = click.option("--seed", type=click.IntRange(0, 2**64 - 1), help="Override the master seed.")(command)
    command = click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False),
                           help="Experiment config file (JSON).")(command)
    return command


def load_experiment(config_path, seed, algos, out, trials):
    cfg = ExperimentConfig.load(config_path)
    return cfg.with_overrides(seed=seed, trials=trials, algorithms=parse_algorithms(algos), output_dir=out)


@click.group()
@click.option("--log-level", default=Config.LOG_LEVEL, show_default=True, help="Logging level.")
def cli(log_level):
    """Subchannel allocation for clustered V2V sidelink broadcasting."""
    logging.basicConfig(level=log_level.upper(), format=Config.LOG_FORMAT)


@cli.command()
@experiment_options
@reports_errors
def run(config_path, seed, algos, out, trials):
    """Run the Monte Carlo experiment described by a config file."""
    cfg = load_experiment(config_path, seed, algos, out, trials)
    result = run_experiment(cfg)
    click.echo(result.summary.to_string(index=False))
    for name, path in result.paths.items():
        click.echo(f"{name}: {path}")


@cli.command()
@experiment_options
@reports_errors
def sweep(config_path, seed, algos, out, trials):
    """Mean worst-vehicle rate against fleet size."""
    cfg = load_experiment(config_path, seed, algos, out, trials)
    result = run_sweep(cfg)
    click.echo(result.curve.to_string())
    for name, path in result.paths.items():
        click.echo(f"{name}: {path}")


@cli.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--costs", "costs_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--algos", default="proposed", show_default=True, help="Comma separated algorithms to run.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True,
              help="Seed of the random baseline.")
@click.option("--out", "out", type=click.Path(file_okay=False), help="Write allocation_<algo>.json files here.")
@reports_errors
def solve(scenario_path, costs_path, algos, seed, out):
    """Allocate one scenario and cost tensor read from files."""
    scenario = load_scenario(scenario_path)
    violation = validate_scenario(scenario)
    if violation:
        raise DomainError(f"invalid scenario: {violation}")
    cost = load_cost_tensor(costs_path, scenario, bandwidth_mhz=scenario.grid.subchannel_bandwidth_mhz)
    if out:
        os.makedirs(out, exist_ok=True)

    for algorithm in parse_algorithms(algos):
        allocation, diagnostics = solve_scenario(
            algorithm, scenario, cost, seed=seed, budget=Config.EXHAUSTIVE_NODE_BUDGET
        )
        click.echo(json.dumps({
            "algorithm": algorithm,
            "objective": allocation.objective(cost),
            "summary": summarize(allocation, cost).to_json(),
            "allocation": allocation.to_dict(),
            "diagnostics": diagnostics,
        }))
        if out:
            save_allocation(allocation, os.path.join(out, f"allocation_{algorithm}.json"))


@cli.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--allocation", "allocation_path", type=click.Path(exists=True, dir_okay=False),
              help="Allocation file to check for conflicts.")
@reports_errors
def check(scenario_path, allocation_path):
    """Validate a scenario and, optionally, an allocation against it."""
    scenario = load_scenario(scenario_path)
    failed = False
    violation = validate_scenario(scenario)
    if violation:
        click.echo(f"scenario: {violation}")
        failed = True
    else:
        click.echo(f"scenario: ok ({scenario.num_vehicles} vehicles, {scenario.num_clusters} clusters)")

    if allocation_path:
        conflicts = find_conflicts(load_allocation(allocation_path), scenario)
        for conflict in conflicts:
            click.echo(f"conflict: cluster {conflict.cluster}, subframe {conflict.subframe}, "
                       f"vehicles {sorted(conflict.vehicles)}")
        if conflicts:
            failed = True
        else:
            click.echo("allocation: ok")
    if failed:
        sys.exit(CHECK_FAILED)


@cli.command()
@click.option("--host", default=Config.API_HOST, show_default=True)
@click.option("--port", default=Config.API_PORT, show_default=True, type=int)
def serve(host, port):
    """Run the allocation service."""
    from app import create_app
    logger.info("Starting allocation service")
    create_app().run(host=host, port=port, debug=Config.DEBUG)


def main():
    cli()


if __name__ == "__main__":
    main()
