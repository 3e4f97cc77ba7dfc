"""HybridSR CLI."""
import click

from ._logging import configure_logging
from .calibrate import calibrate as calibrate_command
from .images import enhance as enhance_command
from .images import partition as partition_command
from .images import stitch_ as stitch_command
from .optimize import optimize as optimize_command
from .simulate import simulate as simulate_command
from .sweep import sweep as sweep_command


@click.group()
@click.option(
    "--verbose",
    "-v",
    count=True,
    help="Set the verbosity level: -v for debug logs.",
)
@click.option(
    "--quiet",
    "-q",
    count=True,
    help="Set the verbosity level: -q for warnings only, -qq to disable logging.",
)
@click.option(
    "--logger",
    default="console",
    show_default=True,
    help="Write logs to console or file, e.g. --logger=file:/var/log/hybridsr.log.",
)
def main(verbose, quiet, logger):
    """Execute the cli script for the hybrid SR simulator.

    Provides commands to schedule and simulate scenarios, sweep them and process images.
    """
    if verbose and quiet:
        raise click.UsageError("Options -v and -q are mutually exclusive.")
    configure_logging(logger, verbose - quiet)


main.add_command(optimize_command)
main.add_command(simulate_command)
main.add_command(sweep_command)
main.add_command(partition_command)
main.add_command(stitch_command)
main.add_command(enhance_command)
main.add_command(calibrate_command)

__all__ = ("main",)
