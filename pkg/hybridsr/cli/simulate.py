"""Command `simulate`: run a scenario end to end."""
from pathlib import Path

import click

from ..errors import NoFeasibleConfiguration
from ..simulator import REPORT_COLUMNS, report_rows, run_scenario
from ._output import handle_errors, write_csv
from ._scenario import resolve_scenario, scenario_options


@click.command(short_help="Run a scenario")
@scenario_options
@click.option("--gamma", type=float, help="Allocation ratio override.")
@click.option(
    "--pixels/--no-pixels",
    "execute_pixels",
    default=None,
    help="Execute the pixel path on synthetic images. Taken from the scenario by default.",
)
@click.option(
    "--workers",
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="Number of threads evaluating the tasks.",
)
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    default="out",
    show_default=True,
    help="Output directory.",
)
def simulate(
    scenario_path, profile_path, seed, policy, scales, steps, gamma, execute_pixels, workers, out
):
    """
    Schedule the requests, evaluate every task and write report.csv.

    Examples:

    \b
    # the default ten-user scenario with the pixel path
    hybridsr simulate --pixels --out out/
    """
    import dataclasses

    from ._rich import print_pairs, print_table

    with handle_errors():
        scenario = resolve_scenario(
            scenario_path, profile_path, seed, policy, scales, steps, gamma
        )
        changes = {"workers": workers}
        if execute_pixels is not None:
            changes["execute_pixels"] = execute_pixels
        report = run_scenario(dataclasses.replace(scenario, **changes))
        rows = report_rows(report)
        write_csv(out / "report.csv", REPORT_COLUMNS, rows)
        print_table("report", REPORT_COLUMNS, rows)
        print_pairs(
            {
                "Total utility": f"{report.total_utility:.6f}",
                "Mean latency": f"{report.mean_latency:.3f} s",
                "P50 latency": f"{report.latency_percentile(50):.3f} s",
                "P95 latency": f"{report.latency_percentile(95):.3f} s",
                "Mean quality": f"{report.mean_quality:.4f}",
                "Rejected": report.rejected,
            }
        )
        if report.records and report.rejected == len(report.records):
            raise NoFeasibleConfiguration("No request could be served.")
