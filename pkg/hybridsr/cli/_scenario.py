"""Options shared by the scenario commands."""
import dataclasses
import functools
from pathlib import Path

import click

from ..domain import AllocationRatio, CandidateSets
from ..optimizer import Policy
from ..perf_models import load_profile
from ..simulator import DEFAULT_SEED, default_scenario, load_scenario


class NumberList(click.ParamType):
    """Comma separated list of numbers."""

    name = "list"

    def __init__(self, item_type=float):
        """Create new class instance.

        :param type item_type: Type of the list items.
        """
        self.item_type = item_type

    def convert(self, value, param, ctx):
        """Convert the value to a tuple of numbers."""
        if isinstance(value, tuple):
            return value
        try:
            rv = tuple(self.item_type(v) for v in value.split(",") if v.strip())
        except ValueError:
            self.fail(f"{value!r} is not a comma separated list of numbers.", param, ctx)
        if not rv:
            self.fail("the list is empty.", param, ctx)
        return rv


def scenario_options(f):
    """Add the options that select and override a scenario."""
    options = [
        click.option(
            "--scenario",
            "scenario_path",
            type=click.Path(path_type=Path),
            help="Path to a scenario JSON file. The default ten-user scenario if missing.",
        ),
        click.option(
            "--profile",
            "profile_path",
            type=click.Path(path_type=Path),
            help="Path to a system profile JSON file. The shipped calibrated profile if missing.",
        ),
        click.option(
            "--seed",
            type=click.IntRange(min=0),
            help=(
                "Seed of annealing and of generated requests. Explicit scenario requests "
                f"keep their prompt seeds. Defaults to {DEFAULT_SEED}."
            ),
        ),
        click.option(
            "--policy",
            type=click.Choice([p.value for p in Policy]),
            help="Configuration selection policy. Defaults to sa.",
        ),
        click.option("--scales", type=NumberList(int), help="Candidate SR scales, e.g. 1,2,4."),
        click.option(
            "--steps", type=NumberList(int), help="Candidate denoising steps, e.g. 10,20,30."
        ),
    ]
    return functools.reduce(lambda acc, option: option(acc), reversed(options), f)


def resolve_scenario(
    scenario_path=None,
    profile_path=None,
    seed=None,
    policy=None,
    scales=None,
    steps=None,
    gamma=None,
):
    """Load a scenario and apply the command line overrides.

    :param Path scenario_path: Path to a scenario file.
    :param Path profile_path: Path to a profile file.
    :param int seed: Seed override.
    :param str policy: Policy override.
    :param tuple[int] scales: Candidate scales override.
    :param tuple[int] steps: Candidate steps override.
    :param float gamma: Allocation ratio override.
    :return Scenario:
    """
    profile = load_profile(profile_path) if profile_path else None
    if scenario_path is None:
        scenario = default_scenario(DEFAULT_SEED if seed is None else seed, profile=profile)
    else:
        scenario = load_scenario(scenario_path, seed)
        if profile is not None:
            scenario = dataclasses.replace(scenario, profile=profile)

    changes = {}
    if policy is not None:
        changes["policy"] = Policy(policy)
    if gamma is not None:
        changes["gamma"] = AllocationRatio(gamma)
    if scales or steps:
        changes["sets"] = CandidateSets(
            scales=scales or scenario.sets.scales, steps=steps or scenario.sets.steps
        )
    return dataclasses.replace(scenario, **changes)
