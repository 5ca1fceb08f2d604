"""Shared test configuration: deterministic hypothesis profile."""

from hypothesis import HealthCheck, settings

# First calls pay numba JIT compile time; wall-clock deadlines would flake.
settings.register_profile(
    "circlaw",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("circlaw")
