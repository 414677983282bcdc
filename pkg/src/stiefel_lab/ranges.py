"""The connectivity bound for symplectic Stiefel complexes and its inverse."""
from __future__ import annotations


def gamma_hat(q: int) -> int:
    """2^q + ceil((q+1)/2): the smallest r whose bound reaches q."""
    if q < 0:
        raise ValueError("q must be non-negative")
    return 2 ** q + (q + 2) // 2


def gamma_bound(r: int) -> int | None:
    """Largest q with gamma_hat(q) <= r, or None when no q qualifies."""
    best = None
    q = 0
    while gamma_hat(q) <= r:
        best = q
        q += 1
    return best
