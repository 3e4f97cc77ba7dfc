"""End-to-end scenario execution, ablation sweeps and report rows."""
import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from marshmallow import fields, validate

from .domain import (
    AllocationRatio,
    CandidateSets,
    Configuration,
    Request,
    as_ratio,
    initial_resolution,
    validate_request,
)
from .errors import DimensionMismatch, ParseError, SimError, WeightOutOfRange
from .imaging import DEFAULT_GRID_SIDE, DEFAULT_OVERLAP, hybrid_enhance
from .optimizer import Policy, SAParams, evaluate, schedule
from .perf_models import LatencyBreakdown, ProfileSchema, default_profile, scale_edge_capacity
from .schemas import DocumentSchema, attach_snippet

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42
DEFAULT_USERS = 10
DEFAULT_TARGETS = (768, 1024, 1536, 2048)
DEFAULT_LAMBDAS = (0.01, 0.02, 0.05)
DEFAULT_CAPACITY_RATIOS = (1.0, 0.8, 0.6, 0.4)
DEFAULT_GAMMAS = (0.0, 0.125, 0.25, 0.5, 0.75, 1.0)
BASELINES = (Policy.RANDOM, Policy.NOSR, Policy.ONETYPE)


@dataclass(frozen=True)
class Scenario:
    """A group of requests served by one edge server."""

    requests: tuple
    profile: object
    sets: CandidateSets = CandidateSets()
    gamma: AllocationRatio = AllocationRatio(0.25)
    policy: Policy = Policy.SA
    sa_params: SAParams = SAParams()
    # edge availability ratio
    capacity_scale: float = 1.0
    execute_pixels: bool = False
    grid_side: int = DEFAULT_GRID_SIDE
    overlap: int = DEFAULT_OVERLAP
    workers: int = 1

    def __post_init__(self):
        """Normalize the fields and validate the requests."""
        object.__setattr__(self, "requests", tuple(self.requests))
        object.__setattr__(self, "gamma", as_ratio(self.gamma))
        object.__setattr__(self, "policy", Policy(self.policy))
        if not 0 < self.capacity_scale <= 1:
            raise WeightOutOfRange(
                f"Capacity scale must be in (0, 1], got {self.capacity_scale}."
            )
        for request in self.requests:
            validate_request(request, self.sets, self.grid_side)

    @property
    def effective_profile(self):
        """Profile with the edge capacity scaled by the availability ratio."""
        return scale_edge_capacity(self.profile, self.capacity_scale)


@dataclass(frozen=True)
class TaskRecord:
    """Evaluated outcome of one request."""

    request_id: str
    lam: float
    config: Optional[Configuration]
    latency: LatencyBreakdown
    quality: float
    utility: float
    feasible: bool
    error: Optional[str] = None

    @classmethod
    def rejected(cls, request, error):
        """Record of a request that got no configuration.

        :param Request request: The request.
        :param Exception error: The reason.
        :return TaskRecord:
        """
        return cls(
            request.id, request.lam, None, LatencyBreakdown.zero(), 0.0, 0.0, False, str(error)
        )


@dataclass(frozen=True)
class ScenarioReport:
    """Task records and aggregates of a scenario run."""

    policy: Policy
    records: tuple
    schedule: object = None

    @property
    def _feasible(self):
        return [r for r in self.records if r.feasible]

    @property
    def total_utility(self):
        """Sum of the task utilities."""
        return sum(r.utility for r in self.records)

    @property
    def mean_utility(self):
        """Mean utility over all tasks, rejected ones count as 0."""
        return self.total_utility / len(self.records) if self.records else 0.0

    @property
    def mean_latency(self):
        """Mean total latency of the served tasks."""
        feasible = self._feasible
        return float(np.mean([r.latency.total for r in feasible])) if feasible else 0.0

    def latency_percentile(self, q):
        """Percentile of the total latency of the served tasks.

        :param float q: Percentile in [0, 100].
        :return float:
        """
        feasible = self._feasible
        if not feasible:
            return 0.0
        return float(np.percentile([r.latency.total for r in feasible], q))

    @property
    def mean_quality(self):
        """Mean quality of the served tasks."""
        feasible = self._feasible
        return float(np.mean([r.quality for r in feasible])) if feasible else 0.0

    @property
    def rejected(self):
        """Number of tasks that got no configuration."""
        return len(self.records) - len(self._feasible)


def synth_image(seed, resolution, *, channels=3, grid_side=None):
    """Generate a deterministic stand-in for a generated image.

    A smooth low-frequency background with a noise-textured square of half the image side.
    When `grid_side` is given the square is aligned to the cells of that grid.

    :param int seed: Image seed.
    :param int resolution: Image side.
    :param int channels: 1 or 3.
    :param int grid_side: Grid to align the textured square to.
    :return numpy.ndarray:
    """
    rng = np.random.default_rng(seed)
    coords = (np.arange(resolution) + 0.5) / resolution
    freq = rng.uniform(0.5, 1.5, size=2)
    phase = rng.uniform(0, 2 * np.pi, size=(2, channels))
    wave_y = np.cos(2 * np.pi * freq[0] * coords[:, None] + phase[0])
    wave_x = np.cos(2 * np.pi * freq[1] * coords[:, None] + phase[1])
    base = rng.uniform(0.3, 0.7, size=channels)
    image = base + 0.05 * wave_y[:, None, :] * wave_x[None, :, :]

    if grid_side:
        cell = resolution // grid_side
        cells = grid_side // 2
        side = cells * cell
        y0, x0 = rng.integers(0, grid_side - cells + 1, size=2) * cell
    else:
        side = resolution // 2
        y0, x0 = rng.integers(0, resolution - side + 1, size=2)
    image[y0 : y0 + side, x0 : x0 + side] = rng.uniform(  # noqa: E203
        0, 1, size=(side, side, channels)
    )
    return np.clip(image, 0, 1)


def run_task(
    request,
    config,
    gamma,
    profile,
    execute_pixels=False,
    *,
    grid_side=DEFAULT_GRID_SIDE,
    overlap=DEFAULT_OVERLAP,
):
    """Evaluate a configured task and optionally execute its pixel path.

    :param Request request: The task.
    :param Configuration config: Selected configuration.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :param bool execute_pixels: Generate a synthetic image and enhance it.
    :param int grid_side: Partition grid side of the pixel path.
    :param int overlap: Patch overlap of the pixel path, clamped to half of the cell side.
    :raise DimensionMismatch: The enhanced image has a wrong size.
    :return TaskRecord:
    """
    latency, quality, utility = evaluate(request, config, gamma, profile)
    if execute_pixels:
        resolution = initial_resolution(request.target_resolution, config.sr_scale)
        image = synth_image(request.prompt_seed, resolution, grid_side=grid_side)
        overlap = min(overlap, resolution // grid_side // 2)
        output = hybrid_enhance(image, grid_side, gamma, config.sr_scale, overlap)
        if output.shape[:2] != (request.target_resolution, request.target_resolution):
            raise DimensionMismatch(
                f"Request {request.id!r}: enhanced image is {output.shape[1]}x{output.shape[0]}, "
                f"expected {request.target_resolution}x{request.target_resolution}."
            )
        logger.debug("Executed pixel path of %r: %s", request.id, output.shape)
    return TaskRecord(request.id, request.lam, config, latency, quality, utility, True)


def run_scenario(scenario):
    """Schedule the requests of a scenario and evaluate every task.

    Errors of a single task are recorded in its record. Records keep the request order.

    :param Scenario scenario: The scenario.
    :return ScenarioReport:
    """
    profile = scenario.effective_profile
    result = schedule(
        scenario.requests,
        scenario.gamma,
        profile,
        scenario.sets,
        scenario.sa_params,
        scenario.policy,
    )

    def execute(assignment):
        if not assignment.feasible:
            return TaskRecord.rejected(assignment.request, assignment.error)
        try:
            return run_task(
                assignment.request,
                assignment.config,
                scenario.gamma,
                profile,
                scenario.execute_pixels,
                grid_side=scenario.grid_side,
                overlap=scenario.overlap,
            )
        except SimError as exc:
            logger.error("Task %r failed: %s", assignment.request.id, exc)
            return TaskRecord.rejected(assignment.request, exc)

    if scenario.workers > 1:
        with ThreadPoolExecutor(max_workers=scenario.workers) as executor:
            records = list(executor.map(execute, result.assignments))
    else:
        records = [execute(a) for a in result.assignments]

    report = ScenarioReport(scenario.policy, tuple(records), result)
    logger.info(
        "Scenario with %d requests, policy %s: total utility %.4f, mean latency %.2f s",
        len(records),
        scenario.policy.value,
        report.total_utility,
        report.mean_latency,
    )
    return report


@dataclass(frozen=True)
class CapacityRow:
    """Aggregates of one policy at one edge availability ratio."""

    ratio: float
    policy: Policy
    mean_utility: float
    mean_latency: float
    mean_quality: float
    rejected: int


def sweep_capacity(scenario, ratios=DEFAULT_CAPACITY_RATIOS, policies=None):
    """Re-run a scenario with the edge capacity scaled by each ratio, for every policy.

    :param Scenario scenario: The scenario.
    :param list[float] ratios: Edge availability ratios in (0, 1].
    :param list[Policy] policies: Policies, the scenario policy and the baselines by default.
    :return list[CapacityRow]:
    """
    if policies is None:
        policies = [scenario.policy] + [p for p in BASELINES if p != scenario.policy]
    rows = []
    for ratio in ratios:
        for policy in policies:
            variant = dataclasses.replace(
                scenario,
                capacity_scale=scenario.capacity_scale * ratio,
                policy=Policy(policy),
                execute_pixels=False,
            )
            report = run_scenario(variant)
            rows.append(
                CapacityRow(
                    ratio,
                    variant.policy,
                    report.mean_utility,
                    report.mean_latency,
                    report.mean_quality,
                    report.rejected,
                )
            )
    return rows


@dataclass(frozen=True)
class GammaRow:
    """Aggregates at one allocation ratio."""

    gamma: float
    mean_quality: float
    mean_t_sr_edge: float
    mean_t_enhance: float
    mean_utility: float


def sweep_gamma(scenario, gammas=DEFAULT_GAMMAS):
    """Re-evaluate the scheduled configurations at each allocation ratio.

    Configurations are selected once at the scenario ratio, so the rows isolate the effect of
    the ratio itself. Rejected requests are left out of the means.

    :param Scenario scenario: The scenario.
    :param list[float] gammas: Allocation ratios.
    :return list[GammaRow]:
    """
    profile = scenario.effective_profile
    result = schedule(
        scenario.requests,
        scenario.gamma,
        profile,
        scenario.sets,
        scenario.sa_params,
        scenario.policy,
    )
    served = [a for a in result.assignments if a.feasible]
    rows = []
    for gamma in gammas:
        records = [run_task(a.request, a.config, gamma, profile) for a in served]
        rows.append(
            GammaRow(
                float(as_ratio(gamma)),
                _mean(r.quality for r in records),
                _mean(r.latency.t_sr_edge for r in records),
                _mean(r.latency.t_enhance for r in records),
                _mean(r.utility for r in records),
            )
        )
    return rows


def default_requests(seed=DEFAULT_SEED, users=DEFAULT_USERS):
    """Build the default request mix.

    Target resolutions and preference weights are taken round-robin.

    :param int seed: Seed of the first synthetic image.
    :param int users: Number of requests.
    :return list[Request]:
    """
    return [
        Request(
            id=f"u{i + 1:02d}",
            target_resolution=DEFAULT_TARGETS[i % len(DEFAULT_TARGETS)],
            lam=DEFAULT_LAMBDAS[i % len(DEFAULT_LAMBDAS)],
            prompt_seed=seed + i,
        )
        for i in range(users)
    ]


def default_scenario(seed=DEFAULT_SEED, users=DEFAULT_USERS, profile=None):
    """Build the default scenario: ten users served with the shipped profile.

    :param int seed: Seed for synthetic images and annealing.
    :param int users: Number of requests.
    :param SystemProfile profile: System profile, the shipped one by default.
    :return Scenario:
    """
    return Scenario(
        requests=default_requests(seed, users),
        profile=profile or default_profile(),
        sa_params=SAParams(rng_seed=seed),
    )


REPORT_COLUMNS = (
    "request_id",
    "policy",
    "scale",
    "steps",
    "t_gen",
    "t_sr_edge",
    "t_sr_device",
    "t_tx_enhanced",
    "t_tx_raw",
    "t_enhance",
    "t_total",
    "quality",
    "utility",
    "feasible",
)
SCHEDULE_COLUMNS = (
    "request_id",
    "policy",
    "scale",
    "steps",
    "quality",
    "t_total",
    "utility",
    "feasible",
)
TRACE_COLUMNS = ("temp", "iter", "scale", "steps", "utility", "accepted", "reason")
CAPACITY_COLUMNS = ("ratio", "policy", "mean_utility", "mean_latency", "mean_quality", "rejected")
GAMMA_COLUMNS = ("gamma", "mean_quality", "mean_t_sr_edge", "mean_t_enhance", "mean_utility")


def _mean(values):
    values = list(values)
    return float(np.mean(values)) if values else 0.0


def _num(value):
    return "" if value is None else f"{value:.6f}"


def _flag(value):
    return "true" if value else "false"


def report_rows(report):
    """Rows of the task report.

    :param ScenarioReport report: The report.
    :return list[dict]:
    """
    rows = []
    for r in report.records:
        lat = r.latency
        rows.append(
            {
                "request_id": r.request_id,
                "policy": report.policy.value,
                "scale": r.config.sr_scale if r.config else "",
                "steps": r.config.denoise_steps if r.config else "",
                "t_gen": _num(lat.t_gen),
                "t_sr_edge": _num(lat.t_sr_edge),
                "t_sr_device": _num(lat.t_sr_device),
                "t_tx_enhanced": _num(lat.t_tx_enhanced),
                "t_tx_raw": _num(lat.t_tx_raw),
                "t_enhance": _num(lat.t_enhance),
                "t_total": _num(lat.total),
                "quality": _num(r.quality),
                "utility": _num(r.utility),
                "feasible": _flag(r.feasible),
            }
        )
    return rows


def schedule_rows(result):
    """Rows of a schedule.

    :param ScheduleResult result: The schedule.
    :return list[dict]:
    """
    return [
        {
            "request_id": a.request.id,
            "policy": result.policy.value,
            "scale": a.config.sr_scale if a.config else "",
            "steps": a.config.denoise_steps if a.config else "",
            "quality": _num(a.quality),
            "t_total": _num(a.latency.total),
            "utility": _num(a.utility),
            "feasible": _flag(a.feasible),
        }
        for a in result.assignments
    ]


def trace_rows(trace):
    """Rows of an annealing trace, one per move.

    :param SATrace trace: The trace.
    :return list[dict]:
    """
    return [
        {
            "temp": f"{row.temp:.6g}",
            "iter": row.iter,
            "scale": row.scale,
            "steps": row.steps,
            "utility": _num(row.utility),
            "accepted": _flag(row.accepted),
            "reason": row.reason,
        }
        for row in trace.rows
    ]


def capacity_rows(rows):
    """Rows of a capacity sweep."""
    return [
        {
            "ratio": f"{r.ratio:g}",
            "policy": r.policy.value,
            "mean_utility": _num(r.mean_utility),
            "mean_latency": _num(r.mean_latency),
            "mean_quality": _num(r.mean_quality),
            "rejected": r.rejected,
        }
        for r in rows
    ]


def gamma_rows(rows):
    """Rows of an allocation ratio sweep."""
    return [
        {
            "gamma": f"{r.gamma:g}",
            "mean_quality": _num(r.mean_quality),
            "mean_t_sr_edge": _num(r.mean_t_sr_edge),
            "mean_t_enhance": _num(r.mean_t_enhance),
            "mean_utility": _num(r.mean_utility),
        }
        for r in rows
    ]


class RequestSchema(DocumentSchema):
    """A request of a scenario document."""

    id = fields.String(required=True)
    target_resolution = fields.Integer(required=True, validate=validate.Range(min=1))
    lam = fields.Float(required=True, data_key="lambda")
    prompt_seed = fields.Integer(validate=validate.Range(min=0))

    def make_object(self, data):
        """Build the request."""
        return Request(**data)


class CandidatesSchema(DocumentSchema):
    """Candidate sets of a scenario document."""

    scales = fields.List(fields.Integer(), required=True)
    steps = fields.List(fields.Integer(), required=True)

    def make_object(self, data):
        """Build the candidate sets."""
        return CandidateSets(scales=tuple(data["scales"]), steps=tuple(data["steps"]))


class AnnealingSchema(DocumentSchema):
    """Annealing parameters of a scenario document."""

    initial_temperature = fields.Float()
    min_temperature = fields.Float()
    cooling = fields.Float()
    iters_per_temp = fields.Integer()
    latency_budget = fields.Float(validate=validate.Range(min=0))
    rng_seed = fields.Integer()


class ScenarioSchema(DocumentSchema):
    """Scenario document.

    Either `requests` or `users` may be given, the latter generates the default request mix.
    """

    requests = fields.List(fields.Nested(RequestSchema))
    users = fields.Integer(validate=validate.Range(min=0))
    seed = fields.Integer(validate=validate.Range(min=0))
    profile = fields.Nested(ProfileSchema)
    candidates = fields.Nested(CandidatesSchema)
    gamma = fields.Float(validate=validate.Range(min=0, max=1))
    policy = fields.Enum(Policy, by_value=True)
    annealing = fields.Nested(AnnealingSchema)
    capacity_scale = fields.Float(validate=validate.Range(min=0, max=1, min_inclusive=False))
    execute_pixels = fields.Boolean()
    grid_side = fields.Integer(validate=validate.Range(min=1))
    overlap = fields.Integer(validate=validate.Range(min=0))

    def __init__(self, *args, seed=None, **kwargs):
        """Create new class instance.

        :param int seed: Overrides the document seed of generated requests and annealing.
        """
        super().__init__(*args, **kwargs)
        self.seed_override = seed

    def make_object(self, data):
        """Build the scenario."""
        if "requests" in data and "users" in data:
            raise ParseError("Fields 'requests' and 'users' are mutually exclusive.")
        seed = data.pop("seed", DEFAULT_SEED)
        annealing = data.pop("annealing", {})
        if self.seed_override is not None:
            seed = self.seed_override
            annealing = {**annealing, "rng_seed": seed}
        if "requests" not in data:
            data["requests"] = default_requests(seed, data.pop("users", DEFAULT_USERS))
        sets = data.pop("candidates", CandidateSets())
        grid_side = data.get("grid_side", DEFAULT_GRID_SIDE)
        for request in data["requests"]:
            try:
                validate_request(request, sets, grid_side)
            except SimError as exc:
                attach_snippet(exc, request)
                raise
        return Scenario(
            profile=data.pop("profile", None) or default_profile(),
            sets=sets,
            sa_params=SAParams(**{"rng_seed": seed, **annealing}),
            **data,
        )


def load_scenario(path, seed=None):
    """Load a scenario document.

    :param str|Path path: Path to the document.
    :param int seed: Seed override for generated requests and annealing.
    :raise InputNotFound: The file is missing or unreadable.
    :raise ParseError: The document is invalid.
    :return Scenario:
    """
    scenario = ScenarioSchema(seed=seed).load_file(path)
    logger.debug("Loaded scenario %s with %d requests", path, len(scenario.requests))
    return scenario
