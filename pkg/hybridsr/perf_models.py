"""Parametric latency and quality models driven by a calibratable system profile."""
import dataclasses
import functools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from marshmallow import fields, validate
from scipy import optimize

from .domain import as_ratio, initial_resolution
from .errors import DegenerateSamples, InputNotFound, ParseError
from .schemas import DocumentSchema

logger = logging.getLogger(__name__)

DEFAULT_PROFILE_PATH = Path(__file__).parent / "profiles" / "default.json"

# resolutions are normalized to a 1000x1000 image
_RESOLUTION_UNIT = 1000.0


@dataclass(frozen=True)
class SystemProfile:
    """Calibration constants of the load, data volume and quality functions."""

    # Computing capacities, GFLOP/s.
    edge_capacity: float
    device_capacity: float

    # Link bandwidth, Mbit/s.
    bandwidth: float

    # Generation load: gen_load_coeff * steps * (R / 1000) ** gen_res_exponent.
    gen_load_coeff: float
    gen_res_exponent: float

    # SR loads of the edge (diffusion) and the device (learning) branches.
    sr_edge_coeff: float
    sr_device_coeff: float
    sr_res_exponent: float

    # Effective coded bits per pixel of transmitted images.
    bits_per_pixel: float

    # Base quality curve.
    quality_step_rate: float
    quality_peak_resolution: float
    quality_res_width: float
    quality_max: float

    # Quality improvement of the diffusion branch.
    enhance_max_ratio: float
    enhance_exponent: float

    # Exponent of the allocation ratio in the edge SR load, 1 keeps the load linear.
    sr_edge_area_exponent: float = 1.0

    # Seconds of capacity covered by the per-round load budgets.
    budget_window: float = 1.0

    # Serve a unit SR scale by direct generation without an enhancement stage.
    unit_scale_bypass: bool = False

    @property
    def edge_budget(self):
        """Edge load budget C_max of one scheduling round, GFLOP."""
        return self.edge_capacity * self.budget_window

    @property
    def device_budget(self):
        """Device load budget C'_max of one scheduling round, GFLOP."""
        return self.device_capacity * self.budget_window


@dataclass(frozen=True)
class LatencyBreakdown:
    """Latency components of one task, seconds."""

    t_gen: float
    t_sr_edge: float
    t_sr_device: float
    t_tx_enhanced: float
    t_tx_raw: float
    t_enhance: float
    total: float

    @classmethod
    def compose(cls, t_gen, t_sr_edge, t_sr_device, t_tx_enhanced, t_tx_raw):
        """Build a breakdown where the slower of the two SR workflows governs enhancement.

        :param float t_gen: Generation latency.
        :param float t_sr_edge: Edge SR latency.
        :param float t_sr_device: Device SR latency.
        :param float t_tx_enhanced: Transmission of edge-enhanced patches.
        :param float t_tx_raw: Transmission of raw patches to the device.
        :return LatencyBreakdown:
        """
        t_enhance = max(t_sr_edge + t_tx_enhanced, t_sr_device + t_tx_raw)
        return cls(
            t_gen=t_gen,
            t_sr_edge=t_sr_edge,
            t_sr_device=t_sr_device,
            t_tx_enhanced=t_tx_enhanced,
            t_tx_raw=t_tx_raw,
            t_enhance=t_enhance,
            total=t_gen + t_enhance,
        )

    @classmethod
    def zero(cls):
        """Breakdown of a task that was not executed."""
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


_positive = validate.Range(min=0, min_inclusive=False)


class ProfileSchema(DocumentSchema):
    """System profile document."""

    edge_capacity = fields.Float(required=True, validate=_positive)
    device_capacity = fields.Float(required=True, validate=_positive)
    bandwidth = fields.Float(required=True, validate=_positive)
    gen_load_coeff = fields.Float(required=True, validate=_positive)
    gen_res_exponent = fields.Float(required=True, validate=_positive)
    sr_edge_coeff = fields.Float(required=True, validate=_positive)
    sr_device_coeff = fields.Float(required=True, validate=_positive)
    sr_res_exponent = fields.Float(required=True, validate=_positive)
    bits_per_pixel = fields.Float(required=True, validate=_positive)
    quality_step_rate = fields.Float(required=True, validate=_positive)
    quality_peak_resolution = fields.Float(required=True, validate=_positive)
    quality_res_width = fields.Float(required=True, validate=_positive)
    quality_max = fields.Float(
        required=True, validate=validate.Range(min=0, max=1, min_inclusive=False)
    )
    enhance_max_ratio = fields.Float(required=True, validate=validate.Range(min=1))
    enhance_exponent = fields.Float(required=True, validate=_positive)
    sr_edge_area_exponent = fields.Float(validate=_positive)
    budget_window = fields.Float(validate=_positive)
    unit_scale_bypass = fields.Boolean()

    def make_object(self, data):
        """Build the profile."""
        return SystemProfile(**data)


def _bypassed(config, profile):
    return profile.unit_scale_bypass and config.sr_scale == 1


def _normalized(resolution):
    return resolution / _RESOLUTION_UNIT


def load_gen(steps, resolution, profile):
    """Computation load of image generation, GFLOP.

    Linear in the number of denoising steps and a power law in the resolution.

    :param int steps: Denoising steps.
    :param int resolution: Generation resolution.
    :param SystemProfile profile: System profile.
    :return float:
    """
    return profile.gen_load_coeff * steps * _normalized(resolution) ** profile.gen_res_exponent


def load_sr_edge(resolution, gamma, profile):
    """Computation load of the diffusion SR branch on the edge, GFLOP.

    :param int resolution: Initial resolution.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :return float:
    """
    gamma = float(as_ratio(gamma))
    if gamma == 0:
        return 0.0
    return (
        profile.sr_edge_coeff
        * gamma**profile.sr_edge_area_exponent
        * _normalized(resolution) ** profile.sr_res_exponent
    )


def load_sr_device(resolution, gamma, profile):
    """Computation load of the learning SR branch on the user device, GFLOP.

    :param int resolution: Initial resolution.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :return float:
    """
    gamma = float(as_ratio(gamma))
    scale = _normalized(resolution) ** profile.sr_res_exponent
    return profile.sr_device_coeff * (1 - gamma) * scale


def latency_inference(steps, resolution, profile):
    """Generation latency on the edge, seconds."""
    return load_gen(steps, resolution, profile) / profile.edge_capacity


def latency_sr(resolution, gamma, profile):
    """Latencies of the edge and the device SR branches, seconds.

    :param int resolution: Initial resolution.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :return tuple[float, float]: (t_sr_edge, t_sr_device)
    """
    return (
        load_sr_edge(resolution, gamma, profile) / profile.edge_capacity,
        load_sr_device(resolution, gamma, profile) / profile.device_capacity,
    )


def data_volume(resolution, fraction, profile):
    """Transmitted data volume for a fraction of an image, Mbit.

    :param int resolution: Image resolution.
    :param float fraction: Fraction of the image area in [0, 1].
    :param SystemProfile profile: System profile.
    :return float:
    """
    return fraction * profile.bits_per_pixel * resolution * resolution / 1e6


def latency_transmission(target_resolution, resolution, gamma, profile):
    """Transmission latencies of the enhanced and the raw patches, seconds.

    Enhanced patches travel at the target resolution, raw patches at the initial one.

    :param int target_resolution: Target resolution.
    :param int resolution: Initial (generation) resolution.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :return tuple[float, float]: (t_tx_enhanced, t_tx_raw)
    """
    gamma = float(as_ratio(gamma))
    return (
        data_volume(target_resolution, gamma, profile) / profile.bandwidth,
        data_volume(resolution, 1 - gamma, profile) / profile.bandwidth,
    )


def latency_total(request, config, gamma, profile):
    """Full latency breakdown of a task.

    :param Request request: The task.
    :param Configuration config: Selected configuration.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :raise IndivisibleResolution: The scale does not divide the target resolution.
    :return LatencyBreakdown:
    """
    resolution = initial_resolution(request.target_resolution, config.sr_scale)
    t_gen = latency_inference(config.denoise_steps, resolution, profile)
    if _bypassed(config, profile):
        t_raw = data_volume(resolution, 1.0, profile) / profile.bandwidth
        return LatencyBreakdown.compose(t_gen, 0.0, 0.0, 0.0, t_raw)
    t_sr_edge, t_sr_device = latency_sr(resolution, gamma, profile)
    t_tx_enhanced, t_tx_raw = latency_transmission(
        request.target_resolution, resolution, gamma, profile
    )
    return LatencyBreakdown.compose(t_gen, t_sr_edge, t_sr_device, t_tx_enhanced, t_tx_raw)


def quality_base(steps, resolution, profile):
    """Base quality of a generated image in [0, quality_max].

    Saturating in the number of steps, log-gaussian in the resolution around its peak.

    :param int steps: Denoising steps.
    :param int resolution: Generation resolution.
    :param SystemProfile profile: System profile.
    :return float:
    """
    saturation = 1 - math.exp(-profile.quality_step_rate * steps)
    log_ratio = math.log(resolution / profile.quality_peak_resolution)
    penalty = math.exp(-(log_ratio**2) / (2 * profile.quality_res_width**2))
    return profile.quality_max * saturation * penalty


def quality_multiplier(gamma, profile):
    """Quality improvement ratio of the diffusion branch, 1 when no patch is routed to it."""
    gamma = float(as_ratio(gamma))
    return 1 + (profile.enhance_max_ratio - 1) * gamma**profile.enhance_exponent


def quality_final(request, config, gamma, profile):
    """Quality of the delivered image, capped at 1.

    :param Request request: The task.
    :param Configuration config: Selected configuration.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :return float:
    """
    resolution = initial_resolution(request.target_resolution, config.sr_scale)
    base = quality_base(config.denoise_steps, resolution, profile)
    if _bypassed(config, profile):
        return min(1.0, base)
    return min(1.0, base * quality_multiplier(gamma, profile))


def task_loads(request, config, gamma, profile):
    """Loads a task puts on the edge server and on the user device, GFLOP.

    :param Request request: The task.
    :param Configuration config: Selected configuration.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :return tuple[float, float]: (edge load, device load)
    """
    resolution = initial_resolution(request.target_resolution, config.sr_scale)
    edge = load_gen(config.denoise_steps, resolution, profile)
    if _bypassed(config, profile):
        return edge, 0.0
    return (
        edge + load_sr_edge(resolution, gamma, profile),
        load_sr_device(resolution, gamma, profile),
    )


def scale_edge_capacity(profile, ratio):
    """Get a profile with the edge capacity scaled by the availability ratio.

    :param SystemProfile profile: System profile.
    :param float ratio: Edge availability ratio in (0, 1].
    :return SystemProfile:
    """
    return dataclasses.replace(profile, edge_capacity=profile.edge_capacity * ratio)


def load_profile(path):
    """Load a system profile document.

    :param str|Path path: Path to the profile.
    :raise InputNotFound: The file is missing or unreadable.
    :raise ParseError: The document is invalid.
    :return SystemProfile:
    """
    profile = ProfileSchema().load_file(path)
    logger.debug("Loaded profile %s", path)
    return profile


@functools.lru_cache(maxsize=None)
def default_profile():
    """Get the shipped calibrated profile."""
    return load_profile(DEFAULT_PROFILE_PATH)


class FitResult(NamedTuple):
    """Estimated generation load curve."""

    coeff: float
    exponent: float
    residual_norm: float


SAMPLE_COLUMNS = ("steps", "resolution", "seconds")


def load_samples(path):
    """Load generation latency measurements.

    :param str|Path path: CSV file with the `steps,resolution,seconds` header.
    :raise InputNotFound: The file is missing or unreadable.
    :raise ParseError: The file has another header or non-numeric values.
    :return list[tuple[float, float, float]]:
    """
    try:
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=float, encoding="utf8")
    except OSError as exc:
        raise InputNotFound(f"Could not load samples {path}: {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"Malformed samples {path}: {exc}") from exc
    if data.dtype.names != SAMPLE_COLUMNS:
        raise ParseError(
            f"Samples {path} must have the header {','.join(SAMPLE_COLUMNS)}, "
            f"got {','.join(data.dtype.names or ())}."
        )
    data = np.atleast_1d(data)
    if any(np.isnan(data[name]).any() for name in SAMPLE_COLUMNS):
        raise ParseError(f"Samples {path} contain missing or non-numeric values.")
    return [tuple(float(v) for v in row) for row in data]


def fit_profile(samples, edge_capacity=None):
    """Fit the generation load curve to latency measurements.

    The fit is a least squares problem in log space:
    log(seconds * capacity / steps) = log(coeff) + exponent * log(resolution / 1000).

    :param list[tuple] samples: Measurements (steps, resolution, seconds).
    :param float edge_capacity: Capacity the samples were measured at, defaults to the shipped one.
    :raise DegenerateSamples: Less than 3 distinct resolutions or non-positive values.
    :return FitResult:
    """
    if edge_capacity is None:
        edge_capacity = default_profile().edge_capacity
    data = np.asarray(samples, dtype=float).reshape(-1, 3)
    steps, resolution, seconds = data.T
    if (data <= 0).any() or not np.isfinite(data).all():
        raise DegenerateSamples("Samples must contain positive finite values only.")
    if len(np.unique(resolution)) < 3:
        raise DegenerateSamples(
            f"At least 3 distinct resolutions are required, got {len(np.unique(resolution))}."
        )

    x = np.log(resolution / _RESOLUTION_UNIT)
    y = np.log(seconds * edge_capacity / steps)

    def residuals(p):
        return y - (p[0] + p[1] * x)

    def jacobian(p):
        return np.column_stack([-np.ones_like(x), -x])

    solution, _, info, message, ier = optimize.leastsq(
        residuals, np.array([0.0, 1.0]), Dfun=jacobian, full_output=True
    )
    if ier not in (1, 2, 3, 4):
        raise DegenerateSamples(f"Fit did not converge: {message}")
    result = FitResult(
        coeff=float(np.exp(solution[0])),
        exponent=float(solution[1]),
        residual_norm=float(np.linalg.norm(info["fvec"])),
    )
    logger.debug("Fitted generation load %s", result)
    return result
