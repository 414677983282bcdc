"""Descending chains, their signs, and symbolic expansion of the chaining homotopy.

A descending k-chain starts at {0..k} and drops one element per step. Each
chain indexes one term of the homotopy operator h^k; the term evaluates a
test function on the token tuple (T_{C_0}, ..., T_{C_n}, P_{i_0}, ...), where
T_A stands for the random point attached to the base points indexed by A and
P_i for the i-th base point itself.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import factorial
from typing import Callable, Iterable

from .errors import ResourceError

CHAIN_CAP = 8

T, P = 0, 1  # token kinds; tokens are (kind, value) with value a bitmask for T

SMALLEST, LARGEST = "smallest", "largest"
NEGATE, CLOSED = "negate", "closed"


def _elements(mask: int) -> list[int]:
    out, i = [], 0
    while mask >> i:
        if mask >> i & 1:
            out.append(i)
        i += 1
    return out


def _mask(elems: Iterable[int]) -> int:
    m = 0
    for e in elems:
        m |= 1 << e
    return m


@dataclass(frozen=True)
class DescendingChain:
    k: int
    components: tuple  # bitmasks, components[0] == full set

    def __post_init__(self):
        full = (1 << (self.k + 1)) - 1
        if not self.components or self.components[0] != full:
            raise ValueError("a chain starts at the full index set")
        for a, b in zip(self.components, self.components[1:]):
            if b & ~a or bin(a).count("1") - bin(b).count("1") != 1:
                raise ValueError("each step must drop exactly one element")

    @property
    def n(self) -> int:
        return len(self.components) - 1

    @property
    def maximal(self) -> bool:
        return self.components[-1] == 0

    @property
    def removed(self) -> tuple:
        """Elements dropped at each step."""
        return tuple((a & ~b).bit_length() - 1 for a, b in zip(self.components, self.components[1:]))

    def removal_positions(self, convention: str = SMALLEST) -> tuple:
        """Position of each dropped element inside the set it was dropped from."""
        out = []
        for a, e in zip(self.components, self.removed):
            elems = _elements(a)
            pos = elems.index(e)
            out.append(pos if convention == SMALLEST else len(elems) - 1 - pos)
        return tuple(out)

    def truncation(self) -> "DescendingChain":
        return DescendingChain(self.k, self.components[:-1])

    def final_component(self) -> tuple:
        return tuple(_elements(self.components[-1]))

    def __str__(self) -> str:
        parts = ["{" + ",".join(map(str, _elements(c))) + "}" for c in self.components]
        return "(" + " > ".join(parts) + ")"


def chain_count(k: int, n: int) -> int:
    return factorial(k + 1) // factorial(k + 1 - n)


def enumerate_chains(k: int, cap: int = CHAIN_CAP) -> list[DescendingChain]:
    """All descending k-chains, by length, then by the sequence of dropped elements."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > cap:
        raise ResourceError(f"chain enumeration capped at k={cap}", estimate=sum(
            chain_count(k, n) for n in range(k + 2)))
    full = (1 << (k + 1)) - 1
    layer = [(full,)]
    out = []
    for _ in range(k + 2):
        out.extend(DescendingChain(k, c) for c in layer)
        layer = [c + (c[-1] & ~(1 << e),) for c in layer for e in _elements(c[-1])]
    return out


def sign(chain: DescendingChain, convention: str = SMALLEST, maximal_rule: str = NEGATE) -> int:
    """(-1)^(n + sum of removal positions); maximal chains flip their truncation's sign.

    ``maximal_rule=CLOSED`` instead uses (-1)^(k+1+j) with {j} the last
    nonempty component; it is kept for comparison only.
    """
    if chain.maximal:
        if maximal_rule == CLOSED:
            j = _elements(chain.components[-2])[0]
            return (-1) ** (chain.k + 1 + j)
        return -sign(chain.truncation(), convention, maximal_rule)
    return (-1) ** (chain.n + sum(chain.removal_positions(convention)))


def formal_tuple(chain: DescendingChain, k: int | None = None) -> tuple:
    k = chain.k if k is None else k
    if k != chain.k:
        raise ValueError("chain degree mismatch")
    toks = [(T, c) for c in chain.components]
    toks += [(P, i) for i in chain.final_component()]
    return tuple(toks)


class SignedTermSum:
    """Formal Z-linear combination of token tuples."""

    def __init__(self, terms: Iterable | None = None):
        self._c: dict[tuple, int] = {}
        for tup, coeff in terms or ():
            self.add(tup, coeff)

    def add(self, tup: tuple, coeff: int) -> None:
        v = self._c.get(tup, 0) + coeff
        if v:
            self._c[tup] = v
        else:
            self._c.pop(tup, None)

    def __iadd__(self, other: "SignedTermSum") -> "SignedTermSum":
        for tup, c in other.items():
            self.add(tup, c)
        return self

    def scaled(self, s: int) -> "SignedTermSum":
        return SignedTermSum((t, s * c) for t, c in self._c.items())

    def items(self) -> list[tuple[tuple, int]]:
        return sorted(self._c.items())

    def __len__(self) -> int:
        return len(self._c)

    def __eq__(self, other) -> bool:
        return isinstance(other, SignedTermSum) and self._c == other._c

    def is_empty(self) -> bool:
        return not self._c

    def to_json(self) -> list:
        return [{"coeff": c, "tokens": [token_name(t) for t in tup]} for tup, c in self.items()]

    def pretty(self) -> str:
        lines = []
        for tup, c in self.items():
            sgn = "+" if c > 0 else "-"
            mult = f"{abs(c)} " if abs(c) != 1 else ""
            lines.append(f"{sgn} {mult}f({', '.join(token_name(t) for t in tup)})")
        return "\n".join(lines)


def token_name(tok: tuple) -> str:
    kind, val = tok
    if kind == P:
        return f"p_{val}"
    return "t_∅" if val == 0 else "t_{" + "".join(map(str, _elements(val))) + "}"


def parse_token(s: str) -> tuple:
    s = s.strip()
    if s in ("t_∅", "t_", "t"):
        return (T, 0)
    if s.startswith("p"):
        return (P, int(s.lstrip("p_")))
    if s.startswith("t"):
        digits = s[1:].strip("_{}")
        return (T, _mask(int(d) for d in digits))
    raise ValueError(f"bad token {s!r}")


def parse_terms(lines: Iterable[str]) -> SignedTermSum:
    """Parse lines like '- t012 t12 p1 p2' into a term sum."""
    out = SignedTermSum()
    for line in lines:
        sgn, *toks = line.split()
        out.add(tuple(parse_token(t) for t in toks), 1 if sgn == "+" else -1)
    return out


SignFn = Callable[[DescendingChain], int]


def expand_homotopy(k: int, sign_fn: SignFn = sign) -> SignedTermSum:
    out = SignedTermSum()
    for C in enumerate_chains(k):
        out.add(formal_tuple(C), sign_fn(C))
    return out


def _relabel(tup: tuple, i: int) -> tuple:
    """Push tokens of a face through the increasing map skipping i."""
    def up(e: int) -> int:
        return e if e < i else e + 1

    out = []
    for kind, val in tup:
        if kind == P:
            out.append((P, up(val)))
        else:
            out.append((T, _mask(up(e) for e in _elements(val))))
    return tuple(out)


def _delete(tup: tuple, j: int) -> tuple:
    return tup[:j] + tup[j + 1:]


def hd_terms(k: int, sign_fn: SignFn = sign) -> SignedTermSum:
    """h^k d^k f(p) as a term sum."""
    out = SignedTermSum()
    for C in enumerate_chains(k):
        s, tup = sign_fn(C), formal_tuple(C)
        for j in range(k + 2):
            out.add(_delete(tup, j), s * (-1) ** j)
    return out


def dh_terms(k: int, sign_fn: SignFn = sign) -> SignedTermSum:
    """d^{k-1} h^{k-1} f(p) as a term sum; for k = 0 this is f(t_∅)."""
    out = SignedTermSum()
    if k == 0:
        out.add(((T, 0),), 1)
        return out
    lower = expand_homotopy(k - 1, sign_fn)
    for i in range(k + 1):
        for tup, c in lower.items():
            out.add(_relabel(tup, i), (-1) ** i * c)
    return out


def expand_identity_residual(k: int, sign_fn: SignFn = sign) -> SignedTermSum:
    """h^k d^k f(p) + d^{k-1} h^{k-1} f(p) - f(p); empty when the identity holds."""
    out = hd_terms(k, sign_fn)
    out += dh_terms(k, sign_fn)
    out.add(tuple((P, i) for i in range(k + 1)), -1)
    return out


def face_subsum(k: int, i: int, sign_fn: SignFn = sign) -> tuple[SignedTermSum, SignedTermSum]:
    """Terms of h^k d^k with first step dropping i and j = 0, next to the matching face term."""
    drop = ((1 << (k + 1)) - 1) & ~(1 << i)
    left = SignedTermSum()
    for C in enumerate_chains(k):
        if C.n >= 1 and C.components[1] == drop:
            left.add(_delete(formal_tuple(C), 0), sign_fn(C))
    right = SignedTermSum()
    for tup, c in expand_homotopy(k - 1, sign_fn).items():
        right.add(_relabel(tup, i), (-1) ** (i + 1) * c)
    return left, right


# Reference expansions of h^0, h^1, h^2 in token notation.
REFERENCE_EXPANSIONS = {
    0: ["+ t0 p0", "- t0 t_"],
    1: ["+ t01 p0 p1", "- t01 t1 p1", "+ t01 t0 p0", "+ t01 t1 t_", "- t01 t0 t_"],
    2: [
        "+ t012 p0 p1 p2", "- t012 t12 p1 p2", "+ t012 t02 p0 p2", "- t012 t01 p0 p1",
        "+ t012 t12 t2 p2", "- t012 t12 t1 p1", "- t012 t02 t2 p2", "+ t012 t02 t0 p0",
        "+ t012 t01 t1 p1", "- t012 t01 t0 p0", "- t012 t12 t2 t_", "+ t012 t12 t1 t_",
        "+ t012 t02 t2 t_", "- t012 t02 t0 t_", "- t012 t01 t1 t_", "+ t012 t01 t0 t_",
    ],
}

# Reference case for the sign check: expected removal positions (1, 1), sign +1,
# and sign -1 once extended by the empty set.
WORKED_CHAIN = DescendingChain(2, (0b111, 0b101, 0b100))


def verify_sign_conventions(k_max: int) -> dict:
    """Score each (removal convention, maximal-chain rule) pair against the references."""
    report = {"k_max": k_max, "conventions": []}
    for conv in (SMALLEST, LARGEST):
        for rule in (NEGATE, CLOSED):
            fn = lambda C, conv=conv, rule=rule: sign(C, conv, rule)  # noqa: E731
            entry = {"removal": conv, "maximal_rule": rule, "display": {}, "residual_empty": {}}
            for k in range(min(k_max, 2) + 1):
                ref = parse_terms(REFERENCE_EXPANSIONS[k])
                got = expand_homotopy(k, fn)
                rows = []
                for tup, c in ref.items():
                    mine = dict(got.items()).get(tup, 0)
                    rows.append({"term": [token_name(t) for t in tup], "reference": c,
                                 "computed": mine, "agree": mine == c})
                entry["display"][k] = {"match": got == ref, "terms": rows}
            for k in range(k_max + 1):
                entry["residual_empty"][k] = expand_identity_residual(k, fn).is_empty()
            ext = DescendingChain(2, WORKED_CHAIN.components + (0,))
            entry["worked_example"] = {
                "positions": list(WORKED_CHAIN.removal_positions(conv)),
                "sign": fn(WORKED_CHAIN), "extension_sign": fn(ext),
                "reproduced": WORKED_CHAIN.removal_positions(conv) == (1, 1)
                and fn(WORKED_CHAIN) == 1 and fn(ext) == -1,
            }
            entry["passes_all"] = all(v["match"] for v in entry["display"].values()) and all(
                entry["residual_empty"].values())
            report["conventions"].append(entry)
    report["adopted"] = {"removal": SMALLEST, "maximal_rule": NEGATE}
    return report


def dumps(terms: SignedTermSum) -> str:
    return json.dumps(terms.to_json(), ensure_ascii=False)
