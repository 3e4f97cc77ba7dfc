"""Command `sweep`: repeat a scenario over a grid of edge capacities or allocation ratios."""
from pathlib import Path

import click

from ..simulator import (
    CAPACITY_COLUMNS,
    DEFAULT_CAPACITY_RATIOS,
    DEFAULT_GAMMAS,
    GAMMA_COLUMNS,
    capacity_rows,
    gamma_rows,
    sweep_capacity,
    sweep_gamma,
)
from ._output import handle_errors, write_csv
from ._scenario import NumberList, resolve_scenario, scenario_options


def _grid(value):
    return ",".join(f"{v:g}" for v in value)


@click.command(short_help="Sweep edge capacity or allocation ratio")
@scenario_options
@click.option(
    "--capacity",
    "capacity_grid",
    type=NumberList(),
    help=f"Edge availability ratios, e.g. {_grid(DEFAULT_CAPACITY_RATIOS)}.",
)
@click.option(
    "--gamma",
    "gamma_grid",
    type=NumberList(),
    help=f"Allocation ratios, e.g. {_grid(DEFAULT_GAMMAS)}.",
)
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    default="out",
    show_default=True,
    help="Output directory.",
)
def sweep(
    scenario_path, profile_path, seed, policy, scales, steps, capacity_grid, gamma_grid, out
):
    """
    Repeat a scenario over a grid and write the aggregates.

    With --capacity every policy is run at each edge availability ratio and the rows go to
    sweep_capacity.csv. With --gamma the configurations are selected once and re-evaluated at
    each allocation ratio, the rows go to sweep_gamma.csv.

    Examples:

    \b
    hybridsr sweep --capacity 1.0,0.8,0.6,0.4
    hybridsr sweep --gamma 0,0.125,0.25,0.5,0.75,1
    """
    from ._rich import Progress, print_table

    if (capacity_grid is None) == (gamma_grid is None):
        raise click.UsageError("Exactly one of --capacity and --gamma is required.")

    with handle_errors():
        scenario = resolve_scenario(scenario_path, profile_path, seed, policy, scales, steps)
        if capacity_grid is not None:
            name, columns, grid = "sweep_capacity", CAPACITY_COLUMNS, capacity_grid
            step, to_rows = (lambda v: sweep_capacity(scenario, [v])), capacity_rows
        else:
            name, columns, grid = "sweep_gamma", GAMMA_COLUMNS, gamma_grid
            step, to_rows = (lambda v: sweep_gamma(scenario, [v])), gamma_rows

        results = []
        with Progress(transient=True) as progress:
            task = progress.add_task(name, total=len(grid))
            for value in grid:
                results.extend(step(value))
                progress.advance(task)

        rows = to_rows(results)
        write_csv(out / f"{name}.csv", columns, rows)
        print_table(name, columns, rows)
