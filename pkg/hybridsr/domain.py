"""Core value types: requests, configurations, candidate sets."""
import itertools
from dataclasses import dataclass

from .errors import IndivisibleResolution, InvalidCandidates, WeightOutOfRange


@dataclass(frozen=True)
class Request:
    """One user generation task."""

    # Opaque identifier of the task.
    id: str

    # Target resolution, pixels per side of a square image.
    target_resolution: int

    # Preference weight between image quality (0) and latency (1).
    lam: float

    # Seed that drives synthetic image generation, stands for the text prompt.
    prompt_seed: int = 0


@dataclass(frozen=True, order=True)
class Configuration:
    """Operational configuration selected for a request."""

    sr_scale: int
    denoise_steps: int


@dataclass(frozen=True)
class CandidateSets:
    """Finite candidate sets for SR scales and denoising steps."""

    scales: tuple[int, ...] = (1, 2, 4)
    steps: tuple[int, ...] = (10, 20, 30, 40, 50)

    def __post_init__(self):
        """Normalize the sets to tuples and check the invariants."""
        object.__setattr__(self, "scales", tuple(self.scales))
        object.__setattr__(self, "steps", tuple(self.steps))
        for name, values in (("scales", self.scales), ("steps", self.steps)):
            if not values:
                raise InvalidCandidates(f"Candidate {name} must not be empty.")
            if any(not isinstance(v, int) or isinstance(v, bool) or v <= 0 for v in values):
                raise InvalidCandidates(f"Candidate {name} must be positive integers: {values}.")
            if any(a >= b for a, b in zip(values, values[1:])):
                raise InvalidCandidates(
                    f"Candidate {name} must be strictly increasing without duplicates: {values}."
                )

    def restrict_scales(self, scales):
        """Build candidate sets with the same steps and the given scales.

        :param tuple[int] scales: New candidate scales.
        :return CandidateSets:
        """
        return CandidateSets(scales=tuple(scales), steps=self.steps)


@dataclass(frozen=True)
class AllocationRatio:
    """Fraction of grid patches routed to the diffusion-branch enhancer."""

    gamma: float

    def __post_init__(self):
        """Check the ratio bounds."""
        if not 0 <= self.gamma <= 1:
            raise WeightOutOfRange(f"Allocation ratio must be in [0, 1], got {self.gamma}.")

    def patch_count(self, grid_side):
        """Count foreground cells for a square grid, rounding half up.

        :param int grid_side: Number of cells per side.
        :return int:
        """
        cells = grid_side * grid_side
        return min(max(int(self.gamma * cells + 0.5), 0), cells)

    def __float__(self):
        """Get the ratio as a float."""
        return float(self.gamma)


def as_ratio(gamma):
    """Coerce a real number or a ratio to :class:`~AllocationRatio`.

    :param float|AllocationRatio gamma: The ratio.
    :return AllocationRatio:
    """
    return gamma if isinstance(gamma, AllocationRatio) else AllocationRatio(float(gamma))


def validate_request(raw, sets, grid_side):
    """Check a request against candidate sets and a partition grid.

    :param Request raw: The request to check.
    :param CandidateSets sets: Candidate scales and steps.
    :param int grid_side: Partition grid side.
    :raise WeightOutOfRange: Preference weight is outside [0, 1].
    :raise IndivisibleResolution: Patch boundaries would not be integral.
    :return Request: The same request.
    """
    if not 0 <= raw.lam <= 1:
        raise WeightOutOfRange(f"Request {raw.id!r}: lambda must be in [0, 1], got {raw.lam}.")
    if raw.target_resolution <= 0:
        raise IndivisibleResolution(
            f"Request {raw.id!r}: target resolution must be positive, got {raw.target_resolution}."
        )
    for scale in sets.scales:
        if raw.target_resolution % (scale * grid_side):
            raise IndivisibleResolution(
                f"Request {raw.id!r}: target resolution {raw.target_resolution} is not divisible "
                f"by scale {scale} times grid side {grid_side}."
            )
    return raw


def configuration_grid(sets):
    """Enumerate all configurations, scale-major and step-minor.

    :param CandidateSets sets: Candidate scales and steps.
    :return list[Configuration]:
    """
    return [Configuration(s, d) for s, d in itertools.product(sets.scales, sets.steps)]


def initial_resolution(target, scale):
    """Get the generation resolution for a target resolution and an SR scale.

    :param int target: Target resolution.
    :param int scale: SR scale.
    :raise IndivisibleResolution: The scale does not divide the target.
    :return int:
    """
    if scale <= 0 or target % scale:
        raise IndivisibleResolution(
            f"Target resolution {target} is not divisible by scale {scale}."
        )
    return target // scale
