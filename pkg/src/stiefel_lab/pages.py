"""Symbolic simulation of the two spectral sequences behind the stability criterion.

The second sequence (filtered by the complex degree) has first page
E_1^{p,q} = H^q(G_{r+1}; functions on X_{p-1}-orbits); inside the transitivity
window p <= tau(r+1) each entry is identified with H^q_{r-p}, the cohomology of
the stabilizer. Differentials between transitive columns vanish out of even
columns and are restriction maps H^q(iota_{r-p-1}) out of odd columns. In row 0
a transitive column maps into the next column by the coboundary of constants,
which is injective out of odd columns.

The first sequence has rows 1..gamma(r+1) vanishing, so both converge to
H^q_{r+1} in degrees q <= gamma(r+1).

Entries carry tags only; a recursive table of verdicts for lower degrees
decides whether a restriction map is known to be injective or bijective.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass, field

from .stability import NEG_INF, ParameterRangeError, StabilityParams, Verdict


@dataclass(frozen=True)
class Entry:
    kind: str  # "iso" (identified with H^q_{rank}), "zero", "star"
    q: int | None = None
    rank: int | None = None

    def __str__(self) -> str:
        if self.kind == "iso":
            return f"H^{self.q}_{self.rank}"
        return "0" if self.kind == "zero" else "*"


ZERO = Entry("zero")
STAR = Entry("star")


@dataclass(frozen=True)
class Map:
    kind: str  # "zero", "restrict", "coeff" (coboundary of constants), "unknown"
    q: int | None = None
    rank: int | None = None  # restriction along G_rank -> G_{rank+1}

    def __str__(self) -> str:
        if self.kind == "restrict":
            return f"H^{self.q}(i_{self.rank})"
        return {"zero": "0", "coeff": "const", "unknown": "?"}[self.kind]


@dataclass
class SpectralPage:
    sequence: str
    page: int
    r: int
    entries: dict = field(default_factory=dict)  # (p, q) -> Entry
    maps: dict = field(default_factory=dict)  # (p, q) -> Map leaving (p, q)

    def entry(self, p: int, q: int) -> Entry:
        if p < 0 or q < 0:
            return ZERO
        return self.entries.get((p, q), STAR)

    def out_map(self, p: int, q: int) -> Map:
        return self.maps.get((p, q), Map("unknown"))

    def render(self) -> str:
        ps = sorted({p for p, _ in self.entries})
        qs = sorted({q for _, q in self.entries}, reverse=True)
        width = max((len(str(e)) for e in self.entries.values()), default=1) + 2
        lines = []
        for q in qs:
            lines.append(f"{q:>3} | " + "".join(str(self.entry(p, q)).ljust(width) for p in ps))
        lines.append("    +-" + "-" * width * len(ps))
        lines.append("      " + "".join(str(p).ljust(width) for p in ps))
        return "\n".join(lines)


def build_first_page(params: StabilityParams, r: int, q_cap: int, sequence: str = "II") -> SpectralPage:
    """First page for the pair (G_{r+1}, X_{r+1}), rows 0..q_cap, columns 0..q_cap+2."""
    page = SpectralPage(sequence, 1, r)
    cols = range(q_cap + 3)
    if sequence == "I":
        gam = params.g(r + 1)
        for p in cols:
            for q in range(q_cap + 1):
                page.entries[(p, q)] = ZERO if 1 <= q and q <= gam else STAR
        return page
    if sequence != "II":
        raise ValueError("sequence is 'I' or 'II'")
    top = params.t(r + 1)
    for p in cols:
        for q in range(q_cap + 1):
            page.entries[(p, q)] = Entry("iso", q, r - p) if p <= top else STAR
            if p + 1 <= top:
                page.maps[(p, q)] = Map("zero") if p % 2 == 0 else Map("restrict", q, r - p - 1)
            elif p <= top and q == 0:
                page.maps[(p, q)] = Map("coeff") if p % 2 == 1 else Map("zero")
            else:
                page.maps[(p, q)] = Map("unknown")
    return page


@dataclass
class Derivation:
    verdict: Verdict
    trace: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    page: SpectralPage | None = None


_TABLES: "weakref.WeakKeyDictionary[StabilityParams, dict]" = weakref.WeakKeyDictionary()


def _table(params: StabilityParams) -> dict:
    return _TABLES.setdefault(params, {})


def _label(q: int, r: int, m: Map) -> str | None:
    """Which of the named grid conditions a restriction map instance belongs to."""
    if m.kind == "coeff":
        return "(d)"
    if m.kind != "restrict":
        return None
    p = q - m.q
    if p % 2 == 1 and m.rank == r - p - 1:
        return "(a)"
    if p % 2 == 0 and m.rank == r - p:
        return "(b)"
    if p % 2 == 0 and m.rank == r - p - 2:
        return "(c)"
    return None


def infer_stability(params: StabilityParams, q: int, r: int) -> Derivation:
    """Decide H^q(G_{r+1}) -> H^q(G_r) by turning the symbolic pages."""
    memo = _table(params)
    key = (q, r)
    if key in memo:
        return memo[key]
    d = _infer(params, q, r)
    memo[key] = d
    return d


def _lookup(params: StabilityParams, q: int, r: int) -> Verdict:
    if q <= params.q0:
        return Verdict.ISO
    try:
        return infer_stability(params, q, r).verdict
    except ParameterRangeError:
        return Verdict.UNKNOWN


def _infer(params: StabilityParams, q: int, r: int) -> Derivation:
    if params.R is not None and r > params.R - 1:
        raise ParameterRangeError(f"r={r} outside the family range")
    if q <= params.q0:
        return Derivation(Verdict.ISO, [f"q={q} <= q0={params.q0}: initial condition"])
    trace: list[str] = []
    flags: list[str] = []
    gam = params.g(r + 1)
    if gam == NEG_INF or gam < q:
        trace.append(f"gamma(r+1)={gam!r} < q={q}: total cohomology not identified with H^q_(r+1)")
        return Derivation(Verdict.UNKNOWN, trace)
    trace.append(f"rows 1..{gam!r} of the first sequence vanish: total degree {q} is H^{q}_{r + 1}")
    page = build_first_page(params, r, q)

    def injective(m: Map) -> bool:
        if m.kind == "coeff":
            return True
        if m.kind == "restrict":
            return _lookup(params, m.q, m.rank) in (Verdict.ISO, Verdict.INJ)
        return False

    def surjective(m: Map) -> bool:
        return m.kind == "restrict" and _lookup(params, m.q, m.rank) == Verdict.ISO

    def second_page_zero(p: int, qq: int) -> bool:
        e = page.entry(p, qq)
        if e.kind == "zero":
            trace.append(f"E2({p},{qq}) = 0: already zero")
            return True
        out = page.out_map(p, qq)
        if injective(out):
            why = _label(q, r, out)
            trace.append(f"E2({p},{qq}) = 0: outgoing {out} injective {why or ''}".rstrip())
            if why is None:
                flags.append(f"({p},{qq}) used {out}")
            return True
        if p >= 1:
            inc = page.out_map(p - 1, qq)
            if surjective(inc):
                why = _label(q, r, inc)
                trace.append(f"E2({p},{qq}) = 0: incoming {inc} surjective {why or ''}".rstrip())
                if why is None:
                    flags.append(f"({p},{qq}) used {inc}")
                return True
        trace.append(f"E2({p},{qq}) not forced to vanish: entry {e}, in {page.out_map(p - 1, qq) if p else '-'}, out {out}")
        return False

    corner = page.entry(0, q)
    if corner.kind != "iso" or page.out_map(0, q).kind != "zero":
        trace.append(f"E2(0,{q}) not identified with H^{q}_{r}")
        return Derivation(Verdict.UNKNOWN, trace, flags, page)
    trace.append(f"E2(0,{q}) = H^{q}_{r} (zero differential out of column 0)")
    diagonal = all([second_page_zero(p, q - p) for p in range(1, q + 1)])
    if not diagonal:
        return Derivation(Verdict.UNKNOWN, trace, flags, page)
    targets = all([second_page_zero(s, q + 1 - s) for s in range(2, q + 2)])
    if targets:
        trace.append(f"every differential out of (0,{q}) lands in a zero: E_inf(0,{q}) = H^{q}_{r}")
        return Derivation(Verdict.ISO, trace, flags, page)
    trace.append(f"E_inf(0,{q}) only embeds in H^{q}_{r}")
    return Derivation(Verdict.INJ, trace, flags, page)
