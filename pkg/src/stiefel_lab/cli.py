"""Command-line front end.

Every command writes one report (JSON by default) and signals the outcome
only through the exit code: 0 pass or derivation complete, 1 failure or an
unexpected Unknown, 2 resource or configuration error.

CSV layouts are fixed:

    homology      k,count,beta,coeff
    connectivity  r,max_dim,count_top,connectivity,gamma_bound,coeff
    range         family,q,iso_threshold_r,inj_threshold_r,closed_iso_r,agree
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import chains, montecarlo
from .complex import build_complex, homology_report, level_size
from .errors import ResourceError, default_cap
from .sparse_rank import DEFAULT_PRIMES
from .stability import (FAMILIES, ParameterRangeError, Verdict, closed_form_ranges, ext_json,
                        family_verdict, preset, thresholds, tilde_params)
from .symplectic import SymplecticSpace
from .field import PrimeField

SCHEMA = 1
EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class ConfigError(ValueError):
    pass


def _envelope(command: str, check: str, config: dict, verdict: str, result) -> dict:
    return {"schema": SCHEMA, "command": command, "check": check, "config": config,
            "seed": config.get("seed"), "verdict": verdict, "result": result}


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "out", "format", "threads"}  # results do not depend on the thread count
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _space(args) -> SymplecticSpace:
    if args.r is None or args.r < 1:
        raise ConfigError("--r must be a positive integer")
    try:
        return SymplecticSpace(PrimeField(args.p), args.r)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _largest_dim(p: int, r: int, cap: int) -> int:
    """Largest max_dim <= r-1 whose every level fits under the cap."""
    d = 0
    while d + 1 <= r - 1 and level_size(p, r, d + 1) <= cap:
        d += 1
    return d


def _table_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    return "\n".join([" ".join(cols)] + [" ".join(str(r[c]) for c in cols) for r in rows])


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# each command returns (report, exit code, csv rows or None, text)

def cmd_enumerate(args):
    space = _space(args)
    max_dim = args.max_dim if args.max_dim is not None else space.r - 1
    estimates = [level_size(space.p, space.r, k) for k in range(max(0, min(max_dim, space.r - 1)) + 1)]
    config = _config(args) | {"max_dim": max_dim, "cap": args.cap}
    check = "isotropic frame enumeration"
    try:
        cx = build_complex(space, max_dim, cap=args.cap)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    except ResourceError as exc:
        partial = {"levels": [{"k": k, "estimate": e, "within_cap": e <= args.cap}
                              for k, e in enumerate(estimates)],
                   "error": str(exc), "failed_level": exc.level}
        return _envelope("enumerate", check, config, "RESOURCE", partial), EXIT_ERROR, None, str(exc)
    counts = cx.counts()
    ok = counts == estimates
    rows = [{"k": k, "count": c, "expected": e} for k, (c, e) in enumerate(zip(counts, estimates))]
    report = _envelope("enumerate", check, config, "PASS" if ok else "FAIL", {"levels": rows})
    return report, EXIT_PASS if ok else EXIT_FAIL, rows, _table_text(rows)


def cmd_homology(args):
    space = _space(args)
    max_dim = args.max_dim if args.max_dim is not None else _largest_dim(space.p, space.r, args.cap)
    config = _config(args) | {"max_dim": max_dim, "cap": args.cap}
    check = "reduced homology of the isotropic frame complex"
    try:
        cx = build_complex(space, max_dim, cap=args.cap)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rep = homology_report(cx, DEFAULT_PRIMES)
    verdict = "PASS" if rep["consistent"] else "FAIL"
    rows = [{"k": k, "count": rep["counts"][k], "beta": b[k], "coeff": m}
            for m, b in rep["betti"].items() for k in range(len(b))]
    report = _envelope("homology", check, config, verdict, rep)
    text = _table_text(rows) + f"\nconnectivity: {rep['connectivity']}"
    return report, EXIT_PASS if rep["consistent"] else EXIT_FAIL, rows, text


def cmd_connectivity(args):
    """Exploratory scan of r = 1..r_max at the largest max_dim the cap allows."""
    rows, results = [], []
    for r in range(1, args.r_max + 1):
        space = SymplecticSpace(PrimeField(args.p), r)
        max_dim = _largest_dim(args.p, r, args.cap)
        rep = homology_report(build_complex(space, max_dim, cap=args.cap), DEFAULT_PRIMES[:1])
        results.append({"r": r, "max_dim": max_dim} | rep)
        rows.append({"r": r, "max_dim": max_dim, "count_top": rep["counts"][-1],
                     "connectivity": rep["connectivity"], "gamma_bound": rep["gamma_bound"],
                     "coeff": DEFAULT_PRIMES[0]})
    config = _config(args) | {"cap": args.cap}
    report = _envelope("connectivity", "exploratory connectivity scan", config, "DONE", results)
    return report, EXIT_PASS, rows, _table_text(rows)


def cmd_verify_homotopy(args):
    k = 6 if args.k is None else args.k
    if not 0 <= k <= chains.CHAIN_CAP:
        raise ConfigError(f"--k must lie in 0..{chains.CHAIN_CAP}")
    config = _config(args) | {"k": k}
    if args.check == "signs":
        rep = chains.verify_sign_conventions(k)
        adopted = next(e for e in rep["conventions"] if e["removal"] == rep["adopted"]["removal"]
                       and e["maximal_rule"] == rep["adopted"]["maximal_rule"])
        ok = adopted["passes_all"]
        text = "\n".join(f"{e['removal']}/{e['maximal_rule']}: {'pass' if e['passes_all'] else 'fail'}"
                         for e in rep["conventions"])
        report = _envelope("verify-homotopy", "sign convention adjudication", config,
                           "PASS" if ok else "FAIL", rep)
        return report, EXIT_PASS if ok else EXIT_FAIL, None, text
    residual = chains.expand_identity_residual(k)
    # raw terms before cancellation: h d over all chains and deleted slots,
    # d h over all faces, and the identity term
    n_top = len(chains.enumerate_chains(k))
    n_low = (k + 1) * len(chains.enumerate_chains(k - 1)) if k > 0 else 1
    expanded = n_top * (k + 2) + n_low + 1
    ok = residual.is_empty()
    result = {"k": k, "residual": residual.to_json(), "residual_empty": ok,
              "terms_expanded": expanded, "chains": n_top}
    report = _envelope("verify-homotopy", "symbolic homotopy identity", config,
                       "PASS" if ok else "FAIL", result)
    text = f"residual: {'empty' if ok else residual.pretty()}, terms expanded: {expanded}"
    return report, EXIT_PASS if ok else EXIT_FAIL, None, text


def _symmetry_function(slot: int, r: int):
    """Squared pairing of one slot with a fixed direction; not invariant under the swap."""
    d = montecarlo._fixed_directions(r, 1)[0]

    def f(X):
        return (X[:, slot] @ d) ** 2

    return f


def cmd_mc(args):
    if args.check is None:
        raise ConfigError("mc needs --check symmetry|homotopy|genericity")
    if args.k is None or args.r is None:
        raise ConfigError("mc needs --k and --r")
    k, r, N, seed = args.k, args.r, args.n, args.seed
    threads = args.threads
    config = _config(args)
    try:
        if args.check == "symmetry":
            if k < 1:
                raise ConfigError("symmetry needs k >= 1")
            perm = list(range(k + 1))
            a, b = (0, 1) if k == 1 else (1, 2)
            perm[a], perm[b] = perm[b], perm[a]
            rep = montecarlo.mc_symmetry_check(k, _symmetry_function(a, r), perm, N, seed, r,
                                               threads=threads)
            reports = [rep.to_json()]
            tag = "permutation symmetry of the product measure"
        elif args.check == "homotopy":
            rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])
            base = montecarlo.sample_mu(k, r, rng, 1)[0]
            reports = []
            for name, f in montecarlo.bounded_functions(k, r).items():
                rep = montecarlo.mc_homotopy_check(k, f, base, N, seed, coupling=args.coupling,
                                                   threads=threads)
                reports.append(rep.to_json() | {"function": name})
            tag = "homotopy identity on bounded test functions"
        elif args.check == "genericity":
            reports = [montecarlo.genericity_check(k, r, N, seed).to_json()]
            tag = "genericity of sampled chainings"
        else:
            raise ConfigError(f"unknown check {args.check!r}")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ok = all(x["verdict"] == "PASS" for x in reports)
    rows = [{"check": x["check"], "k": x["k"], "r": x["r"], "N": x["N"], "seed": x["seed"],
             "estimate": x["estimate"], "stderr": x["stderr"], "verdict": x["verdict"],
             "function": x.get("function", "")} for x in reports]
    report = _envelope("mc", tag, config, "PASS" if ok else "FAIL",
                       reports[0] if len(reports) == 1 else reports)
    return report, EXIT_PASS if ok else EXIT_FAIL, rows, _table_text(rows)


def cmd_range(args):
    family = args.family
    if family not in FAMILIES:
        raise ConfigError(f"--family must be one of {', '.join(FAMILIES)}")
    if args.q is None:
        raise ConfigError("range needs --q")
    q, method = args.q, args.method
    config = _config(args)
    if args.r is not None:
        try:
            verdict = family_verdict(family, q, args.r, method)
        except ParameterRangeError as exc:
            raise ConfigError(str(exc)) from None
        result = {"family": family, "q": q, "r": args.r, "verdict": verdict.value}
        if family != "sl" and q > preset(family).q0:
            gt, tt = tilde_params(preset(family), q, args.r)
            result |= {"gamma_tilde": ext_json(gt), "tau_tilde": ext_json(tt)}
        if method == "pages" and family != "sl":
            from .pages import infer_stability
            d = infer_stability(preset(family), q, args.r)
            result |= {"trace": d.trace, "flags": d.flags}
        golden = closed_form_ranges(family, q)["iso_threshold_r"] if q >= 2 else None
        expected_iso = golden is not None and args.r >= golden
        code = EXIT_FAIL if expected_iso and verdict != Verdict.ISO else EXIT_PASS
        report = _envelope("range", "stability verdict", config, verdict.value.upper(), result)
        return report, code, None, f"{family} q={q} r={args.r}: {verdict.value}"
    if q < 2:
        raise ConfigError("--q must be at least 2")
    got = thresholds(family, q, method)
    closed = closed_form_ranges(family, q)
    agree = got["iso_threshold_r"] == closed["iso_threshold_r"]
    if closed.get("inj_at_r") is not None:
        agree = agree and family_verdict(family, q, closed["inj_at_r"], method) == Verdict.INJ
    result = {"family": family, "q": q, "method": method} | got | {"closed_form": closed, "agree": agree}
    rows = [{"family": family, "q": q, "iso_threshold_r": got["iso_threshold_r"],
             "inj_threshold_r": got["inj_threshold_r"], "closed_iso_r": closed["iso_threshold_r"],
             "agree": agree}]
    report = _envelope("range", "stability range thresholds", config, "PASS" if agree else "FAIL", result)
    return report, EXIT_PASS if agree else EXIT_FAIL, rows, _table_text(rows)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cap", type=int, default=None,
                        help="object-count limit (default from STIEFEL_LAB_CAP or 5e6)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: available CPUs; 1 is bit-exact sequential)")

    parser = argparse.ArgumentParser(prog="stiefel-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    for name, func, help_ in (("enumerate", cmd_enumerate, "count simplices level by level"),
                              ("homology", cmd_homology, "reduced Betti numbers over two primes")):
        sp = add(name, func, help_)
        sp.add_argument("--p", type=int, default=2)
        sp.add_argument("--r", type=int, required=True)
        sp.add_argument("--max-dim", type=int)

    sp = add("connectivity", cmd_connectivity, "exploratory connectivity scan for r = 1..r-max")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--r-max", type=int, default=4)

    sp = add("verify-homotopy", cmd_verify_homotopy, "symbolic residual of the homotopy identity")
    sp.add_argument("--k", type=int)
    sp.add_argument("--check", choices=("identity", "signs"), default="identity")

    sp = add("mc", cmd_mc, "Monte Carlo checks")
    sp.add_argument("--check", choices=("symmetry", "homotopy", "genericity"))
    sp.add_argument("--k", type=int)
    sp.add_argument("--r", type=int)
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--coupling", choices=("crn", "independent"), default="independent")

    sp = add("range", cmd_range, "stability ranges for a group family")
    sp.add_argument("--family", choices=FAMILIES, required=True)
    sp.add_argument("--q", type=int)
    sp.add_argument("--r", type=int)
    sp.add_argument("--method", choices=("classify", "pages"), default="classify")
    return parser


def _render(report: dict, fmt: str, rows, text: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=False, ensure_ascii=False) + "\n"
    if fmt == "csv":
        if not rows:
            raise ConfigError("this command has no CSV layout")
        return _csv(rows)
    return text + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cap is None:
        args.cap = default_cap()
    if args.threads is None:
        args.threads = os.cpu_count() or 1
    started = time.perf_counter()
    try:
        report, code, rows, text = args.func(args)
        out = _render(report, args.format, rows, text)
    except ConfigError as exc:
        print(f"stiefel-lab: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ResourceError as exc:
        print(f"stiefel-lab: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    print(f"stiefel-lab: {args.command} finished in {time.perf_counter() - started:.2f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
