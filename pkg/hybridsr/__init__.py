"""HybridSR simulates end-edge text-to-image generation with hybrid super-resolution."""

from .domain import AllocationRatio, CandidateSets, Configuration, Request
from .optimizer import Policy, SAParams, anneal, brute_force, schedule
from .perf_models import SystemProfile, default_profile, load_profile
from .simulator import Scenario, default_scenario, load_scenario, run_scenario

__all__ = (
    "AllocationRatio",
    "CandidateSets",
    "Configuration",
    "Policy",
    "Request",
    "SAParams",
    "Scenario",
    "SystemProfile",
    "anneal",
    "brute_force",
    "default_profile",
    "default_scenario",
    "load_profile",
    "load_scenario",
    "run_scenario",
    "schedule",
)
