"""Command `calibrate`: fit the generation load curve to measured latencies."""
from pathlib import Path

import click

from ._output import atomic_write, handle_errors


@click.command(short_help="Fit a system profile to latency samples")
@click.argument("samples_path", type=click.Path(path_type=Path))
@click.option(
    "--profile",
    "profile_path",
    type=click.Path(path_type=Path),
    help="Base profile, the shipped calibrated profile if missing.",
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    default="out/profile.json",
    show_default=True,
    help="Output profile file.",
)
def calibrate(samples_path, profile_path, out):
    """
    Fit the generation load coefficient and resolution exponent.

    The samples CSV has the header steps,resolution,seconds with one row per measured
    generation. Seconds are converted to loads with the edge capacity of the base profile.
    Other fields of the base profile are copied to the output as is.

    Examples:

    \b
    hybridsr calibrate samples.csv --out profile.json
    hybridsr simulate --profile profile.json
    """
    import dataclasses
    import json

    from ..perf_models import default_profile, fit_profile, load_profile, load_samples
    from ._rich import print_pairs

    with handle_errors():
        base = load_profile(profile_path) if profile_path else default_profile()
        fit = fit_profile(load_samples(samples_path), base.edge_capacity)
        profile = dataclasses.replace(
            base, gen_load_coeff=fit.coeff, gen_res_exponent=fit.exponent
        )
        atomic_write(out, json.dumps(dataclasses.asdict(profile), indent=2) + "\n")
        print_pairs(
            {
                "Load coefficient": f"{fit.coeff:.6g}",
                "Resolution exponent": f"{fit.exponent:.6g}",
                "Residual norm": f"{fit.residual_norm:.3g}",
                "Profile": out,
            }
        )
