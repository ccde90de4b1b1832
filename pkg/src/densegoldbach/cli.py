"""Command-line entry point.

Every subcommand prints one JSON report (keys in a fixed order) except
``sweep`` without ``--out``, which prints CSV.  Exit codes: 0 ok, 1 a checked
invariant or bound failed, 2 a precondition or hypothesis was violated,
3 no representation was found outside the known sharpness families.

Random draws come from a single ``--seed`` fed to SplitMix64 (see
:mod:`densegoldbach.rng`).  ``local-verify`` consumes the stream as: for each
trial, for i = 1..4, for each unit u of Z_q in ascending order, one
``random()`` value f_i(u).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from .errors import (
    BoundViolation,
    GoldbachError,
    InternalContradiction,
    SpectralPrecisionError,
)
from .local import (
    LocalInstance,
    check_sumset_cover,
    check_theorem2,
    solve_theorem2_bruteforce,
    solve_theorem2_structured,
)
from .pipeline import PipelineConfig, run_pipeline
from .primes import (
    PrimeSubset,
    all_primes,
    lambda_weights,
    minus,
    parse_subset,
    residue_class_subset,
)
from .representation import RepresentationFinder
from .residue import ResidueFunction, factorize, units
from .rng import SplitMix64
from .spectral import (
    SpectralVector,
    bohr_set,
    large_spectrum,
    sumset_count_check,
    uniform_measure,
)

EXIT_OK, EXIT_INVARIANT, EXIT_PRECONDITION, EXIT_NOT_FOUND = 0, 1, 2, 3
SWEEP_COLUMNS = ("n", "found", "p1", "p2", "p3", "p4", "count_raw", "count_mollified", "discrepancy", "note")


class CommandError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _report(command: str, parameters: dict, results: dict, deviations=(), status: int = EXIT_OK) -> dict:
    return {
        "command": command,
        "parameters": parameters,
        "results": results,
        "deviations": list(deviations),
        "exit_status": status,
    }


def _emit(report: dict, out=None) -> int:
    out = out or sys.stdout
    out.write(json.dumps(report, indent=2, ensure_ascii=False) + "\n")
    return report["exit_status"]


def _int_list(text: str) -> list[int]:
    """'1,2,5-7' -> [1, 2, 5, 6, 7]."""
    out: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


# -- local-verify -------------------------------------------------------------


def cmd_local_verify(args) -> dict:
    q, trials, seed = args.q, args.trials, args.seed
    params = {"q": q, "trials": trials, "seed": seed, "structured": args.structured}
    if q < 1 or q % 2 == 0 or q % 3 == 0:
        raise CommandError(EXIT_PRECONDITION, f"q = {q} must be a positive integer with (q, 6) = 1")
    if trials < 0:
        raise CommandError(EXIT_PRECONDITION, "trials must be nonnegative")
    solver = solve_theorem2_structured if args.structured else solve_theorem2_bruteforce
    rng = SplitMix64(seed)
    us = units(q)
    passed = failed = 0
    failures = []
    for t in range(trials):
        fs = tuple(ResidueFunction(q, tuple(rng.random() for _ in us)) for _ in range(4))
        for n in range(q):
            inst = LocalInstance(q, fs, n)
            try:
                ok = check_theorem2(inst, solver(inst))
            except InternalContradiction:
                ok = False
            if ok:
                passed += 1
            else:
                failed += 1
                if len(failures) < 10:
                    failures.append({"trial": t, "n": n})
    results = {
        "solver": "structured" if args.structured else "bruteforce",
        "cases": passed + failed,
        "passed": passed,
        "failed": failed,
        "failures": failures,
    }
    return _report("local-verify", params, results, status=EXIT_INVARIANT if failed else EXIT_OK)


# -- represent ----------------------------------------------------------------


def _subsets(args, limit: int) -> list[PrimeSubset]:
    return [parse_subset(d, limit) for d in (args.P1, args.P2, args.P3, args.P4)]


def sharpness_family(subsets: Sequence[PrimeSubset], n: int) -> str | None:
    """Name the known obstruction that rules out every representation of n, if any."""
    upto = max(n, 2)
    if any(P.count(upto) == 0 for P in subsets):
        return "empty subset"
    if n % 3:
        return None
    one_mod_3 = residue_class_subset(upto, 3, [1])
    no_three = minus(all_primes(upto), [3])
    same = [P.same_members(one_mod_3, upto) for P in subsets]
    rest = [P.same_members(no_three, upto) for P in subsets]
    if sum(same) == 3 and any(r and not s for r, s in zip(rest, same)):
        return "three subsets of primes = 1 mod 3 with primes other than 3"
    return None


def _config(args) -> PipelineConfig:
    return PipelineConfig(
        kappa=args.kappa,
        w_override=args.w_override,
        delta=args.delta,
        epsilon=args.epsilon,
        clamp_policy="strict" if args.strict else "warn",
        strict=args.strict,
    )


def cmd_represent(args) -> dict:
    n = args.n
    mode = "direct" if args.direct else "pipeline"
    params = {
        "n": n,
        "P": [args.P1, args.P2, args.P3, args.P4],
        "mode": mode,
        "w_override": args.w_override,
        "delta": args.delta,
        "epsilon": args.epsilon,
        "kappa": args.kappa,
        "strict": args.strict,
    }
    if n % 2 or n < 0:
        raise CommandError(EXIT_PRECONDITION, f"n = {n} must be a nonnegative even integer")
    subsets = _subsets(args, max(n, 2))
    family = sharpness_family(subsets, n)
    deviations: list[str] = []
    results: dict = {"representation": None}
    if mode == "direct":
        finder = RepresentationFinder(subsets, n)
        rep = finder.find(n)
        results["representation"] = list(rep) if rep else None
        results["count"] = finder.count(n)
    else:
        st = run_pipeline(n, subsets, _config(args))
        report = st.to_report()
        rep = st.representation
        results["representation"] = report["representation"]
        results["pipeline"] = report
        deviations = report["deviations"]
    results["sharpness"] = rep is None and family is not None
    results["sharpness_family"] = family
    status = EXIT_OK if rep is not None or family is not None else EXIT_NOT_FOUND
    return _report("represent", params, results, deviations, status)


# -- sweep --------------------------------------------------------------------


def _threads() -> int:
    try:
        cap = int(os.environ.get("GOLDBACH_THREADS", "1"))
    except ValueError:
        cap = 1
    return max(1, cap)


def _sweep_row_pipeline(n: int, subsets, config) -> dict:
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row["n"] = n
    try:
        st = run_pipeline(n, subsets, config)
    except GoldbachError as exc:
        row["found"] = "false"
        row["note"] = f"{type(exc).__name__}: {exc}"
        return row
    rep = st.representation
    row["found"] = "true" if rep else "false"
    if rep:
        row.update(p1=rep[0], p2=rep[1], p3=rep[2], p4=rep[3])
    d = st.discrepancy
    row.update(count_raw=repr(d.count_raw), count_mollified=repr(d.count_mollified), discrepancy=repr(d.difference))
    if st.deviations:
        row["note"] = "; ".join(st.deviations)
    return row


def sweep_rows(n_start: int, n_end: int, step: int, subsets, pipeline: bool, config=None) -> list[dict]:
    ns = [n for n in range(n_start, n_end + 1, step) if n % 2 == 0 and n >= 0]
    if not ns:
        return []
    if not pipeline:
        finder = RepresentationFinder(subsets, ns[-1] if step > 0 else max(ns))
        rows = []
        for n in ns:
            row = dict.fromkeys(SWEEP_COLUMNS, "")
            rep = finder.find(n)
            row.update(n=n, found="true" if rep else "false", count_raw=finder.count(n))
            if rep:
                row.update(p1=rep[0], p2=rep[1], p3=rep[2], p4=rep[3])
            rows.append(row)
        return rows
    config = config or PipelineConfig()
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        # map preserves input order whatever the completion order
        return list(pool.map(lambda n: _sweep_row_pipeline(n, subsets, config), ns))


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args):
    params = {
        "n_start": args.n_start,
        "n_end": args.n_end,
        "step": args.step,
        "P": [args.P1, args.P2, args.P3, args.P4],
        "mode": "pipeline" if args.pipeline else "direct",
        "out": args.out,
    }
    if args.step < 1:
        raise CommandError(EXIT_PRECONDITION, "step must be positive")
    subsets = _subsets(args, max(args.n_end, args.n_start, 2))
    rows = sweep_rows(args.n_start, args.n_end, args.step, subsets, args.pipeline, _config(args))
    text = rows_to_csv(rows)
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return None
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CommandError(EXIT_INVARIANT, f"cannot write {args.out}: {exc}") from exc
    results = {"rows": len(rows), "found": sum(r["found"] == "true" for r in rows), "out": args.out}
    return _report("sweep", params, results)


# -- thin wrappers ------------------------------------------------------------


def cmd_spectrum(args) -> dict:
    params = {"input": args.input, "lambda_N": args.lambda_N, "W": args.W, "b": args.b, "delta": args.delta}
    if args.delta <= 0:
        raise CommandError(EXIT_PRECONDITION, "delta must be positive")
    if args.input is not None:
        text = sys.stdin.read() if args.input == "-" else open(args.input, encoding="utf-8").read()
        v = SpectralVector.from_columnar(text, args.N)
    elif args.lambda_N is not None:
        v = SpectralVector(lambda_weights(args.b, args.W, args.lambda_N))
    else:
        raise CommandError(EXIT_PRECONDITION, "give --input or --lambda-N")
    spec = large_spectrum(v, args.delta)
    results = {
        "N": v.N,
        "mass": v.total(),
        "R": list(spec.R),
        "size": spec.size,
        "ratio": spec.ratio,
    }
    return _report("spectrum", params, results)


def cmd_bohr(args) -> dict:
    R = _int_list(args.R)
    params = {"N": args.N, "R": R, "eps": args.eps}
    if args.N < 1 or args.eps <= 0:
        raise CommandError(EXIT_PRECONDITION, "need N >= 1 and eps > 0")
    B = bohr_set(R, args.eps, args.N)
    beta = uniform_measure(B)
    dev = max((abs(1 - beta.spectrum[r]) for r in B.R), default=0.0)
    bound = 16 * args.eps**2
    results = {
        "members": [int(x) for x in B.members],
        "size": B.size,
        "beta_tilde_max": float(dev),
        "beta_bound": bound,
        "bound_ok": bool(dev <= bound),
    }
    return _report("bohr", params, results, status=EXIT_OK if dev <= bound else EXIT_INVARIANT)


def cmd_lemma33(args) -> dict:
    sets = [_int_list(x) for x in args.X]
    thetas = [float(t) for t in args.theta.split(",")]
    params = {"N": args.N, "n": args.n, "theta": thetas, "X": sets}
    rep = sumset_count_check(sets, thetas, args.n, args.N)
    results = {"k": len(sets), "count": rep.count, "theta": rep.theta, "bound": rep.bound, "passed": rep.passed}
    return _report("lemma33-check", params, results, status=EXIT_OK if rep.passed else EXIT_INVARIANT)


def cmd_sumset_cover(args) -> dict:
    q = args.q
    sets = [_int_list(a) for a in (args.A1, args.A2, args.A3, args.A4)]
    params = {"q": q, "A": sets}
    if q < 1 or q % 2 == 0:
        raise CommandError(EXIT_PRECONDITION, f"q = {q} must be odd")
    if not factorize(q).squarefree:
        raise CommandError(EXIT_PRECONDITION, f"q = {q} must be squarefree")
    try:
        rep = check_sumset_cover(q, sets)
    except ValueError as exc:
        raise CommandError(EXIT_PRECONDITION, str(exc)) from exc
    results = {
        "sizes": list(rep.sizes),
        "phi": rep.phi,
        "hypotheses": rep.hypotheses,
        "cover": rep.cover,
        "sumset": list(rep.sumset),
        "witnesses": {str(k): list(v) for k, v in sorted(rep.witnesses.items())},
    }
    bad = rep.hypotheses and not rep.cover
    return _report("sumset-cover", params, results, status=EXIT_INVARIANT if bad else EXIT_OK)


# -- parser -------------------------------------------------------------------


def _subset_flags(p: argparse.ArgumentParser) -> None:
    for i in range(1, 5):
        p.add_argument(f"--P{i}", default="all", help="subset descriptor, e.g. 'mod 3: 1' or 'all minus(3)'")


def _pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--w-override", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--strict", action="store_true", help="raise on hypothesis failures instead of falling back")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="densegoldbach", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("local-verify", help="solve random local instances and re-check the contract")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--structured", action="store_true")
    p.set_defaults(func=cmd_local_verify)

    p = sub.add_parser("represent", help="find n = p1 + p2 + p3 + p4 with p_i in P_i")
    p.add_argument("--n", type=int, required=True)
    _subset_flags(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pipeline", action="store_true", help="transference pipeline (default)")
    g.add_argument("--direct", action="store_true", help="direct convolution finder")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_represent)

    p = sub.add_parser("sweep", help="representations for every even n in a range, as CSV")
    p.add_argument("--n-start", type=int, required=True)
    p.add_argument("--n-end", type=int, required=True)
    p.add_argument("--step", type=int, default=2)
    _subset_flags(p)
    p.add_argument("--pipeline", action="store_true", help="run the pipeline per row (default: direct finder)")
    _pipeline_flags(p)
    p.add_argument("--out", default=None, help="CSV path; '-' or omitted writes to stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="large spectrum of a vector")
    p.add_argument("--input", default=None, help="index,value file ('-' for stdin)")
    p.add_argument("--N", type=int, default=None, help="vector length for --input")
    p.add_argument("--lambda-N", type=int, default=None, help="use the log-weight vector of this length")
    p.add_argument("--W", type=int, default=1)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("bohr", help="Bohr set members and the beta~ check")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--R", required=True, help="comma list of frequencies")
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=cmd_bohr)

    p = sub.add_parser("lemma33-check", help="dense sumset count against theta^(2k-3) N^(k-1)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--theta", required=True, help="comma list, one per set")
    p.add_argument("--X", action="append", required=True, help="one set per flag, e.g. 0-31")
    p.set_defaults(func=cmd_lemma33)

    p = sub.add_parser("sumset-cover", help="does A1 + A2 + A3 + A4 cover Z_q")
    p.add_argument("--q", type=int, required=True)
    for i in range(1, 5):
        p.add_argument(f"--A{i}", required=True)
    p.set_defaults(func=cmd_sumset_cover)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        report = args.func(args)
    except CommandError as exc:
        return _fail(args.command, exc.code, str(exc))
    except (InternalContradiction, BoundViolation, SpectralPrecisionError) as exc:
        return _fail(args.command, EXIT_INVARIANT, f"{type(exc).__name__}: {exc}")
    except (GoldbachError, ValueError) as exc:
        return _fail(args.command, EXIT_PRECONDITION, f"{type(exc).__name__}: {exc}")
    if report is None:
        return EXIT_OK
    return _emit(report)


def _fail(command: str, code: int, message: str) -> int:
    return _emit(_report(command, {}, {"error": message}, status=code))


if __name__ == "__main__":
    sys.exit(main())
