"""Stability ranges from connectivity and transitivity parameters.

A family is described by gamma (connectivity bound), tau (transitivity bound)
and q0 (degrees where the restriction maps are known isomorphisms). All
arithmetic is on integers extended by +/- infinity.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from enum import Enum
from typing import Callable, Union

from .ranges import gamma_bound, gamma_hat


class _Infinity:
    __slots__ = ("sign",)

    def __init__(self, sign: int):
        self.sign = sign

    def _key(self, other):
        if isinstance(other, _Infinity):
            return other.sign * 2
        if isinstance(other, int):
            return 0
        return NotImplemented

    def __lt__(self, other):
        k = self._key(other)
        return k if k is NotImplemented else self.sign * 2 < k

    def __le__(self, other):
        k = self._key(other)
        return k if k is NotImplemented else self.sign * 2 <= k

    def __gt__(self, other):
        k = self._key(other)
        return k if k is NotImplemented else self.sign * 2 > k

    def __ge__(self, other):
        k = self._key(other)
        return k if k is NotImplemented else self.sign * 2 >= k

    def __eq__(self, other):
        return isinstance(other, _Infinity) and other.sign == self.sign

    def __hash__(self):
        return hash(("inf", self.sign))

    def __add__(self, other):
        if isinstance(other, _Infinity) and other.sign != self.sign:
            raise ArithmeticError("inf - inf")
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, _Infinity):
            return self + (-other)
        return self

    def __rsub__(self, other):
        return -self

    def __neg__(self):
        return NEG_INF if self.sign > 0 else INF

    def __repr__(self):
        return "inf" if self.sign > 0 else "-inf"


INF = _Infinity(1)
NEG_INF = _Infinity(-1)

ExtInt = Union[int, _Infinity]


def ext_json(x: ExtInt | None):
    if x is None:
        return None
    return repr(x) if isinstance(x, _Infinity) else int(x)


class Verdict(str, Enum):
    ISO = "iso"
    INJ = "inj"
    UNKNOWN = "unknown"


class ParameterRangeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StabilityParams:
    name: str
    gamma: Callable[[int], ExtInt]
    tau: Callable[[int], ExtInt]
    q0: int = 2
    R: int | None = None  # None: infinite family

    def __post_init__(self):
        if self.q0 < 1:
            raise ValueError("q0 must be at least 1")

    def _check(self, r: int) -> None:
        if self.R is not None and r > self.R:
            raise ParameterRangeError(f"{self.name}: parameters needed at r={r}, family ends at {self.R}")

    def g(self, r: int) -> ExtInt:
        self._check(r)
        return self.gamma(r)

    def t(self, r: int) -> ExtInt:
        self._check(r)
        return self.tau(r)


def _sp_gamma(r: int) -> ExtInt:
    g = gamma_bound(r)
    return NEG_INF if g is None else g


GL = StabilityParams("gl", gamma=lambda r: INF, tau=lambda r: r)
SLC = StabilityParams("slc", gamma=lambda r: INF, tau=lambda r: r)
SP = StabilityParams("sp", gamma=_sp_gamma, tau=lambda r: r - 1)


@lru_cache(maxsize=None)
def sl_truncated(m: int) -> StabilityParams:
    """GL_0, ..., GL_m followed by SL_{m+1}, whose transitivity is one lower."""
    def tau(r: int) -> int:
        return r if r <= m else m
    return StabilityParams(f"sl-trunc-{m}", gamma=lambda r: INF, tau=tau, R=m + 1)


def tilde_params(params: StabilityParams, q: int, r: int) -> tuple[ExtInt, ExtInt]:
    """Minima over j = q0+1..q of gamma(r+1-2(q-j)) - j and tau(r+1-2(q-j)) - j."""
    if q <= params.q0:
        raise ValueError("tilde parameters need q > q0")
    gs, ts = [], []
    for j in range(params.q0 + 1, q + 1):
        rr = r + 1 - 2 * (q - j)
        gs.append(params.g(rr) - j)
        ts.append(params.t(rr) - j)
    return min(gs), min(ts)


def classify(params: StabilityParams, q: int, r: int) -> Verdict:
    if params.R is not None and not 0 <= r <= params.R - 1:
        raise ParameterRangeError(f"r={r} outside the family range")
    if q <= params.q0:
        return Verdict.ISO
    gt, tt = tilde_params(params, q, r)
    if min(gt, tt - 1) >= 0:
        return Verdict.ISO
    if min(gt, tt) >= 0:
        return Verdict.INJ
    return Verdict.UNKNOWN


FAMILIES = ("gl", "sl", "slc", "sp")


def preset(family: str) -> StabilityParams:
    try:
        return {"gl": GL, "slc": SLC, "sp": SP}[family]
    except KeyError:
        raise ValueError(f"no single parameter set for family {family!r}") from None


def family_verdict(family: str, q: int, r: int, method: str = "classify") -> Verdict:
    """Verdict for H^q(G_{r+1}) -> H^q(G_r) in a named family.

    ``method`` is "classify" (closed criterion) or "pages" (grid simulation).
    SL is handled through truncated families: SL_{r+1} -> GL_r, SL_r -> GL_{r-1}
    and GL_r -> GL_{r-1} must all be isomorphisms.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if method == "classify":
        step = lambda params, qq, rr: classify(params, qq, rr)  # noqa: E731
    elif method == "pages":
        from .pages import infer_stability
        step = lambda params, qq, rr: infer_stability(params, qq, rr).verdict  # noqa: E731
    else:
        raise ValueError(f"unknown method {method!r}")
    if family != "sl":
        return step(preset(family), q, r)
    if q <= GL.q0:
        return Verdict.ISO
    if r < 1:
        return Verdict.UNKNOWN
    parts = [step(sl_truncated(r), q, r), step(sl_truncated(r - 1), q, r - 1), step(GL, q, r - 1)]
    return Verdict.ISO if all(v == Verdict.ISO for v in parts) else Verdict.UNKNOWN


def thresholds(family: str, q: int, method: str = "classify", r_max: int | None = None) -> dict:
    """Smallest r from which the verdict stays Iso (resp. at least Inj) up to r_max."""
    if r_max is None:
        r_max = max(4 * q + 8, gamma_hat(q) + 8)
    verdicts = [family_verdict(family, q, r, method) for r in range(r_max + 1)]

    def first_stable(ok) -> int | None:
        best = None
        for r in range(r_max, -1, -1):
            if not ok(verdicts[r]):
                break
            best = r
        return best

    return {
        "iso_threshold_r": first_stable(lambda v: v == Verdict.ISO),
        "inj_threshold_r": first_stable(lambda v: v in (Verdict.ISO, Verdict.INJ)),
        "scanned_to": r_max,
    }


def closed_form_ranges(family: str, q: int) -> dict:
    """Closed-form thresholds for each family, used as golden values."""
    if q < 2:
        raise ValueError("closed forms are stated for q >= 2")
    if family == "gl" or family == "slc":
        return {"family": family, "q": q, "iso_threshold_r": 2 * q - 3, "inj_at_r": 2 * q - 4}
    if family == "sl":
        return {"family": family, "q": q, "iso_threshold_r": max(2 * q - 2, q + 2), "inj_at_r": None}
    if family == "sp":
        t = gamma_hat(q) - 1
        return {"family": family, "q": q, "iso_threshold_r": t, "inj_at_r": None, "inj_threshold_r": t}
    raise ValueError(f"unknown family {family!r}")
