"""Configuration selection: utility, simulated annealing, exhaustive search and scheduling."""
import dataclasses
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .domain import Configuration, Request, configuration_grid
from .errors import NoFeasibleConfiguration, ParseError, SimError
from .perf_models import LatencyBreakdown, latency_total, quality_final, task_loads

logger = logging.getLogger(__name__)


class Policy(enum.Enum):
    """Configuration selection policy."""

    # simulated annealing
    SA = "sa"
    # exhaustive search, an oracle for annealing
    BRUTE = "brute"
    # uniform over admissible configurations
    RANDOM = "random"
    # direct generation at the target resolution
    NOSR = "nosr"
    # SR scale fixed to 2x, only the steps are tuned
    ONETYPE = "onetype"


@dataclass(frozen=True)
class SAParams:
    """Annealing schedule and per-request latency budget."""

    initial_temperature: float = 1.0
    min_temperature: float = 1e-3
    cooling: float = 0.9
    iters_per_temp: int = 20
    # L0, seconds
    latency_budget: float = math.inf
    rng_seed: int = 42

    def __post_init__(self):
        """Check the schedule parameters."""
        if not 0 < self.min_temperature < self.initial_temperature:
            raise ParseError(
                "Annealing temperatures must satisfy 0 < min_temperature < initial_temperature, "
                f"got {self.min_temperature} and {self.initial_temperature}."
            )
        if not 0 < self.cooling < 1:
            raise ParseError(f"Annealing cooling must be in (0, 1), got {self.cooling}.")
        if self.iters_per_temp < 1:
            raise ParseError(
                "Annealing iterations per temperature must be positive, "
                f"got {self.iters_per_temp}."
            )
        if self.rng_seed < 0:
            raise ParseError(f"Annealing seed must be unsigned, got {self.rng_seed}.")

    @property
    def outer_iterations(self):
        """Number of temperature levels until the minimal temperature is reached."""
        ratio = math.log(self.min_temperature / self.initial_temperature)
        return math.ceil(ratio / math.log(self.cooling))

    def temperatures(self):
        """Strictly decreasing temperature levels of the schedule.

        :return Iterator[float]:
        """
        for k in range(self.outer_iterations):
            yield self.initial_temperature * self.cooling**k


@dataclass(frozen=True)
class TraceRow:
    """One annealing move."""

    temp: float
    iter: int
    scale: int
    steps: int
    # None when the candidate was skipped before evaluation
    utility: Optional[float]
    accepted: bool
    # improved, metropolis, rejected, budget or capacity
    reason: str


@dataclass
class SATrace:
    """Moves of one annealing run."""

    rows: list = field(default_factory=list)
    # best accepted utility after each temperature level
    best_curve: list = field(default_factory=list)

    @property
    def accepted(self):
        """Number of accepted moves."""
        return sum(1 for r in self.rows if r.accepted)

    @property
    def rejected(self):
        """Number of moves that were not accepted for any reason."""
        return len(self.rows) - self.accepted

    def count(self, reason):
        """Count the moves with the reason.

        :param str reason: The reason.
        :return int:
        """
        return sum(1 for r in self.rows if r.reason == reason)


def utility(quality, latency, lam):
    """Per-request utility: quality minus weighted latency.

    :param float quality: Delivered quality.
    :param float latency: Total latency, seconds.
    :param float lam: Preference weight.
    :return float:
    """
    return quality - lam * latency


def evaluate(request, config, gamma, profile):
    """Evaluate latency, quality and utility of a configuration.

    :param Request request: The task.
    :param Configuration config: The configuration.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :return tuple[LatencyBreakdown, float, float]: (latency, quality, utility)
    """
    latency = latency_total(request, config, gamma, profile)
    quality = quality_final(request, config, gamma, profile)
    return latency, quality, utility(quality, latency.total, request.lam)


def acceptance_probability(delta, temperature):
    """Metropolis acceptance probability of a move changing utility by delta."""
    if delta > 0:
        return 1.0
    return math.exp(delta / temperature)


def metropolis_accept(delta, temperature, rng):
    """Decide whether to accept a move.

    Improvements are always accepted, worse moves with probability exp(delta / temperature).

    :param float delta: Utility change of the move.
    :param float temperature: Current temperature.
    :param numpy.random.Generator rng: Random generator.
    :return bool:
    """
    if delta > 0:
        return True
    return bool(rng.random() < acceptance_probability(delta, temperature))


def neighbor(config, sets, rng):
    """Move one coordinate of a configuration by one position in its candidate list.

    :param Configuration config: Current configuration.
    :param CandidateSets sets: Candidate sets.
    :param numpy.random.Generator rng: Random generator.
    :return Configuration: The same configuration only if no move exists.
    """
    si = sets.scales.index(config.sr_scale)
    di = sets.steps.index(config.denoise_steps)
    moves = []
    for d in (-1, 1):
        if 0 <= si + d < len(sets.scales):
            moves.append(Configuration(sets.scales[si + d], config.denoise_steps))
    for d in (-1, 1):
        if 0 <= di + d < len(sets.steps):
            moves.append(Configuration(config.sr_scale, sets.steps[di + d]))
    if not moves:
        return config
    return moves[rng.integers(len(moves))]


class _Evaluator:
    """Memoized evaluation of configurations for one request."""

    def __init__(self, request, gamma, profile, latency_budget, admissible):
        self.request = request
        self.gamma = gamma
        self.profile = profile
        self.latency_budget = latency_budget
        self.admissible = admissible
        self._cache = {}

    def __call__(self, config):
        if config not in self._cache:
            self._cache[config] = evaluate(self.request, config, self.gamma, self.profile)
        return self._cache[config]

    def skip_reason(self, config):
        """Get the reason to skip the configuration without utility evaluation, if any."""
        latency, _, _ = self(config)
        if latency.total > self.latency_budget:
            return "budget"
        if self.admissible is not None and not self.admissible(config):
            return "capacity"
        return None

    def feasible(self, grid):
        rv = [c for c in grid if self.skip_reason(c) is None]
        if not rv:
            raise NoFeasibleConfiguration(
                f"Request {self.request.id!r}: no configuration satisfies the latency budget "
                "and the residual capacity."
            )
        return rv


def anneal(request, gamma, profile, sets, params, admissible=None):
    """Select a configuration by simulated annealing.

    Starts from a uniformly drawn admissible configuration. Candidates over the latency budget
    or not admissible are skipped before evaluation. Returns the best accepted configuration.

    :param Request request: The task.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :param CandidateSets sets: Candidate sets.
    :param SAParams params: Annealing parameters.
    :param callable admissible: Optional capacity check of a configuration.
    :raise NoFeasibleConfiguration: No configuration satisfies the budget and the capacity.
    :return tuple[Configuration, SATrace]:
    """
    rng = np.random.default_rng(params.rng_seed)
    evaluator = _Evaluator(request, gamma, profile, params.latency_budget, admissible)
    feasible = evaluator.feasible(configuration_grid(sets))

    current = feasible[rng.integers(len(feasible))]
    current_utility = evaluator(current)[2]
    best, best_utility = current, current_utility
    trace = SATrace()

    for temp in params.temperatures():
        for it in range(params.iters_per_temp):
            candidate = neighbor(current, sets, rng)
            reason = evaluator.skip_reason(candidate)
            if reason:
                row = TraceRow(
                    temp, it, candidate.sr_scale, candidate.denoise_steps, None, False, reason
                )
                trace.rows.append(row)
                continue
            candidate_utility = evaluator(candidate)[2]
            delta = candidate_utility - current_utility
            if delta > 0:
                accepted, reason = True, "improved"
            elif metropolis_accept(delta, temp, rng):
                accepted, reason = True, "metropolis"
            else:
                accepted, reason = False, "rejected"
            trace.rows.append(
                TraceRow(
                    temp,
                    it,
                    candidate.sr_scale,
                    candidate.denoise_steps,
                    candidate_utility,
                    accepted,
                    reason,
                )
            )
            if accepted:
                current, current_utility = candidate, candidate_utility
                if current_utility > best_utility:
                    best, best_utility = current, current_utility
        trace.best_curve.append(best_utility)

    logger.debug(
        "Annealed %r: %s, utility %.6f, %d accepted, %d rejected",
        request.id,
        best,
        best_utility,
        trace.accepted,
        trace.rejected,
    )
    return best, trace


def brute_force(request, gamma, profile, sets, latency_budget=math.inf, admissible=None):
    """Select the configuration of maximal utility by exhaustive search.

    Ties are broken in favor of the first configuration in scale-major order.

    :param Request request: The task.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :param CandidateSets sets: Candidate sets.
    :param float latency_budget: Latency budget, seconds.
    :param callable admissible: Optional capacity check of a configuration.
    :raise NoFeasibleConfiguration: No configuration satisfies the budget and the capacity.
    :return Configuration:
    """
    evaluator = _Evaluator(request, gamma, profile, latency_budget, admissible)
    best, best_utility = None, -math.inf
    for config in evaluator.feasible(configuration_grid(sets)):
        u = evaluator(config)[2]
        if u > best_utility:
            best, best_utility = config, u
    return best


@dataclass(frozen=True)
class FeasibilityReport:
    """Aggregated loads against the edge and the device budgets, GFLOP."""

    edge_load: float
    device_load: float
    edge_budget: float
    device_budget: float

    @property
    def edge_ok(self):
        """Edge load fits the edge budget."""
        return self.edge_load <= self.edge_budget

    @property
    def device_ok(self):
        """Device load fits the device budget."""
        return self.device_load <= self.device_budget

    @property
    def feasible(self):
        """Both budgets are satisfied."""
        return self.edge_ok and self.device_ok


def check_feasibility(configs, requests, gamma, profile):
    """Check the aggregated loads of a schedule against the budgets.

    Requests without a configuration contribute no load.

    :param list[Configuration|None] configs: Per-request configurations.
    :param list[Request] requests: The requests.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :return FeasibilityReport:
    """
    edge = device = 0.0
    for request, config in zip(requests, configs):
        if config is None:
            continue
        e, d = task_loads(request, config, gamma, profile)
        edge += e
        device += d
    return FeasibilityReport(edge, device, profile.edge_budget, profile.device_budget)


@dataclass(frozen=True)
class Assignment:
    """Scheduling outcome of one request."""

    request: Request
    config: Optional[Configuration]
    latency: LatencyBreakdown
    quality: float
    utility: float
    error: Optional[SimError] = None
    trace: Optional[SATrace] = None

    @property
    def feasible(self):
        """A configuration was assigned."""
        return self.config is not None


@dataclass(frozen=True)
class ScheduleResult:
    """Configurations selected for a group of requests."""

    policy: Policy
    assignments: tuple
    feasibility: FeasibilityReport

    @property
    def configs(self):
        """Per-request configurations, None for rejected requests."""
        return [a.config for a in self.assignments]

    @property
    def utilities(self):
        """Per-request utilities, 0 for rejected requests."""
        return [a.utility for a in self.assignments]

    @property
    def aggregate_utility(self):
        """Sum of the per-request utilities."""
        return sum(self.utilities)

    @property
    def rejected(self):
        """Number of requests without a configuration."""
        return sum(1 for a in self.assignments if not a.feasible)

    @property
    def traces(self):
        """Annealing traces by request id."""
        return {a.request.id: a.trace for a in self.assignments if a.trace is not None}


_FIXED_SCALES = {
    Policy.NOSR: 1,
    Policy.ONETYPE: 2,
}


def _select(policy, request, gamma, profile, sets, params, admissible, seed):
    if policy == Policy.SA:
        return anneal(
            request, gamma, profile, sets, dataclasses.replace(params, rng_seed=seed), admissible
        )
    if policy == Policy.BRUTE:
        return brute_force(request, gamma, profile, sets, params.latency_budget, admissible), None
    if policy == Policy.RANDOM:
        evaluator = _Evaluator(request, gamma, profile, params.latency_budget, admissible)
        feasible = evaluator.feasible(configuration_grid(sets))
        return feasible[np.random.default_rng(seed).integers(len(feasible))], None
    if policy in _FIXED_SCALES:
        restricted = sets.restrict_scales((_FIXED_SCALES[policy],))
        budget = params.latency_budget
        return brute_force(request, gamma, profile, restricted, budget, admissible), None
    raise AssertionError(f"Unexpected policy {policy}.")  # pragma: no cover


def schedule(requests, gamma, profile, sets, params, policy=Policy.SA):
    """Select configurations for requests sharing the edge and device budgets.

    Requests are processed greedily in arrival order; each one may use only the capacity left
    by the previous ones. A request that does not fit is rejected, the rest are still scheduled.

    :param list[Request] requests: Validated requests.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param SystemProfile profile: System profile.
    :param CandidateSets sets: Candidate sets.
    :param SAParams params: Annealing parameters and the latency budget.
    :param Policy policy: Selection policy.
    :return ScheduleResult:
    """
    policy = Policy(policy)
    used_edge = used_device = 0.0
    assignments = []
    for index, request in enumerate(requests):

        def admissible(config, request=request, used_edge=used_edge, used_device=used_device):
            edge, device = task_loads(request, config, gamma, profile)
            return (
                used_edge + edge <= profile.edge_budget
                and used_device + device <= profile.device_budget
            )

        try:
            config, trace = _select(
                policy, request, gamma, profile, sets, params, admissible, params.rng_seed + index
            )
        except NoFeasibleConfiguration as exc:
            logger.warning("%s", exc)
            assignments.append(Assignment(request, None, LatencyBreakdown.zero(), 0.0, 0.0, exc))
            continue
        edge, device = task_loads(request, config, gamma, profile)
        used_edge += edge
        used_device += device
        latency, quality, u = evaluate(request, config, gamma, profile)
        assignments.append(Assignment(request, config, latency, quality, u, trace=trace))

    result = ScheduleResult(
        policy,
        tuple(assignments),
        check_feasibility([a.config for a in assignments], requests, gamma, profile),
    )
    logger.debug(
        "Scheduled %d requests with %s: utility %.6f, %d rejected",
        len(requests),
        policy.value,
        result.aggregate_utility,
        result.rejected,
    )
    return result
