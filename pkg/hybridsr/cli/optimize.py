"""Command `optimize`: select configurations for the requests of a scenario."""
from pathlib import Path

import click

from ..errors import NoFeasibleConfiguration
from ..optimizer import schedule
from ..simulator import SCHEDULE_COLUMNS, TRACE_COLUMNS, schedule_rows, trace_rows
from ._output import handle_errors, safe_filename, write_csv
from ._scenario import resolve_scenario, scenario_options


@click.command(short_help="Select configurations for a scenario")
@scenario_options
@click.option("--gamma", type=float, help="Allocation ratio override.")
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    default="out",
    show_default=True,
    help="Output directory.",
)
def optimize(scenario_path, profile_path, seed, policy, scales, steps, gamma, out):
    """
    Select configurations and write the schedule with annealing traces.

    Writes schedule.csv and, for the sa policy, traces/<request_id>.csv with one row per move.

    Examples:

    \b
    # the default ten-user scenario
    hybridsr optimize --out out/

    \b
    # exhaustive search as an oracle
    hybridsr optimize --scenario scenario.json --policy brute
    """
    from ._rich import print_table

    with handle_errors():
        scenario = resolve_scenario(
            scenario_path, profile_path, seed, policy, scales, steps, gamma
        )
        result = schedule(
            scenario.requests,
            scenario.gamma,
            scenario.effective_profile,
            scenario.sets,
            scenario.sa_params,
            scenario.policy,
        )
        rows = schedule_rows(result)
        write_csv(out / "schedule.csv", SCHEDULE_COLUMNS, rows)
        for request_id, trace in result.traces.items():
            write_csv(
                out / "traces" / f"{safe_filename(request_id)}.csv",
                TRACE_COLUMNS,
                trace_rows(trace),
            )
        print_table("schedule", SCHEDULE_COLUMNS, rows)
        if result.assignments and result.rejected == len(result.assignments):
            raise NoFeasibleConfiguration("No request could be scheduled.")
