"""Enumeration guards for the brute-force code paths.

``UA_GUARD_N`` overrides both guards at once; the defaults keep the n!
matching searches and the (2^(n-1))^n profile sweeps at desk scale.
"""
from __future__ import annotations

import os

DEFAULT_MATCHING_GUARD = 7
DEFAULT_SWEEP_GUARD = 4


def _env_guard() -> int | None:
    raw = os.environ.get("UA_GUARD_N")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"UA_GUARD_N must be an integer, got {raw!r}") from exc


def matching_guard() -> int:
    """Largest n for which n!-sized matching enumerations are allowed."""
    return _env_guard() or DEFAULT_MATCHING_GUARD


def sweep_guard() -> int:
    """Largest n for which full-domain manipulation sweeps are allowed."""
    return _env_guard() or DEFAULT_SWEEP_GUARD


class GuardExceeded(ValueError):
    """Raised when a brute-force operation is asked to exceed its guard."""


def check_guard(n: int, guard: int, what: str) -> None:
    if n > guard:
        raise GuardExceeded(
            f"{what} needs n <= {guard}, got n = {n}; "
            "raise UA_GUARD_N to override"
        )
