from __future__ import annotations

import os

DEFAULT_CAP = 5_000_000


class ResourceError(RuntimeError):
    """Raised when a computation would exceed the configured object cap."""

    def __init__(self, message: str, estimate: int | None = None, level: int | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.level = level


def default_cap() -> int:
    raw = os.environ.get("STIEFEL_LAB_CAP")
    if raw:
        return int(float(raw))
    return DEFAULT_CAP
