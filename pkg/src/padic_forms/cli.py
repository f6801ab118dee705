"""Command line front end.

Subcommands:
  solve FORM            decide isotropy, print verdict JSON
  oracle FORM           complete decision by modular exhaustion
  witness verify F W    re-check a witness file against a form file
  lemma verify ID       run one contraction-lemma sweep
  lemma probe ID        ask whether one fewer variable would still work
  reproduce             run the full verification battery as a table
  gamma DEGREE VARS     sample random forms and tally verdicts

Form files are JSON ({"degree", "precision", "coeffs": [[a, b], ...]}) or
the plain syntax `d=6; K=10; 1, 1, w, 2+3w` where w is the quadratic
generator.  `-` reads stdin.

Exit codes: 0 isotropic (or: check passed), 1 anisotropic (or: check
failed), 2 inconclusive, 64 unreadable input or bad usage, 65 precision
too low for the requested analysis, 70 internal error.

Output JSON is deterministic byte for byte; timing fields are only added
under --verbose.  PADIC_FORMS_THREADS caps the worker threads used by
`reproduce`.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .artifacts import (
    agreement_experiment,
    gamma_experiment,
    named_form,
    verify_descent,
)
from .errors import (
    DegreeShapeError,
    OracleBudgetError,
    PadicFormsError,
    PrecisionMismatch,
)
from .forms import AdditiveForm, reduce_levels
from .oracle import decide_isotropy_exhaustive, primitive_zero_mod
from .solver import SolverConfig, decide_isotropy
from .sweeps import (
    SWEEP_LEMMAS,
    exhaustive_lemma_ids,
    minimality_probe,
    sampled_lemma_ids,
    sweep_lemma,
)
from .witness import Witness, verify_witness

EX_OK = 0
EX_ANISOTROPIC = 1
EX_FAIL = 1
EX_INCONCLUSIVE = 2
EX_PARSE = 64
EX_PRECISION = 65
EX_INTERNAL = 70

# fixed battery parameters; changing any of these changes the published
# numbers, so they live here rather than in flag defaults
GAMMA_RUNS = {6: (25, 1000, 42), 10: (16, 1000, 42)}
AGREEMENT_RUNS = {6: (500, 42), 10: (500, 42)}
SWEEP_SAMPLES = 100_000
SWEEP_SEED = 42

DESCENT_ROUNDS = {("G", 6): 1, ("F", 6): 1, ("H", 6): 3, ("I", 6): 6, ("H", 10): 5}
I6_FIRST_WINDOW = tuple(sorted((p, 2 * q) for p in range(4) for q in range(2)))


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exit code clashes with ours
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_PARSE)


def worker_count() -> int:
    env = os.environ.get("PADIC_FORMS_THREADS")
    if env:
        return max(1, int(env))
    return min(2, os.cpu_count() or 1)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def load_form(path: str, precision: int | None = None) -> AdditiveForm:
    text = _read(path)
    try:
        stripped = text.lstrip()
        if stripped.startswith("{"):
            doc = json.loads(text)
            if precision is not None:
                doc = dict(doc, precision=precision)
            return AdditiveForm.from_json(doc)
        f = AdditiveForm.from_text(text)
        if precision is not None and precision != f.K:
            f = AdditiveForm.from_pairs(
                f.d, [(c.a, c.b) for c in f.coeffs], precision
            )
        return f
    except (PrecisionMismatch, DegreeShapeError):
        raise
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot parse form file {path!r}: {exc}") from exc


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> int:
    f = load_form(args.form, args.precision)
    config = SolverConfig()
    if args.budget is not None:
        config.budget = args.budget
    res = decide_isotropy(f, config)
    _emit(res.to_json(include_timings=args.verbose), args.out)
    return {"ISOTROPIC": EX_OK, "ANISOTROPIC": EX_ANISOTROPIC}.get(
        res.verdict, EX_INCONCLUSIVE
    )


def cmd_oracle(args) -> int:
    f = load_form(args.form)
    if args.precision is not None:
        g = reduce_levels(f)
        zs = primitive_zero_mod(g, args.precision)
        doc = {
            "kind": "zeroSearch",
            "modulus": zs.M,
            "found": zs.found,
            "statesVisited": zs.states_visited,
        }
        if zs.found:
            doc["assignment"] = [[x.a, x.b] for x in zs.assignment]
            doc["anchor"] = zs.anchor
        _emit(doc, args.out)
        return EX_OK if zs.found else EX_ANISOTROPIC
    dec = decide_isotropy_exhaustive(f)
    doc = {"verdict": dec.verdict, "statesVisited": dec.states_visited}
    if dec.witness is not None:
        doc["witness"] = dec.witness.to_json()
    if dec.certificate is not None:
        doc["certificate"] = dec.certificate.to_json()
    _emit(doc, args.out)
    return EX_OK if dec.verdict == "ISOTROPIC" else EX_ANISOTROPIC


def cmd_witness(args) -> int:
    f = load_form(args.form)
    try:
        w = Witness.from_json(json.loads(_read(args.witness)))
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot parse witness file {args.witness!r}: {exc}") from exc
    ok = verify_witness(f, w)
    _emit({"valid": ok, "targetValuation": w.V, "primitive": w.primitive}, args.out)
    return EX_OK if ok else EX_FAIL


def cmd_lemma(args) -> int:
    if args.id not in SWEEP_LEMMAS:
        known = ", ".join(sorted(SWEEP_LEMMAS))
        print(f"unknown lemma {args.id!r}; known: {known}", file=sys.stderr)
        return EX_PARSE
    if args.action == "probe":
        rep = minimality_probe(args.id)
        _emit(rep.to_json(include_timings=args.verbose), args.out)
        return EX_OK
    report = sweep_lemma(
        args.id,
        mode=args.mode.upper() if args.mode else None,
        trials=args.trials,
        seed=args.seed,
    )
    _emit(report.to_json(include_timings=args.verbose), args.out)
    return EX_OK if not report.failures else EX_FAIL


def cmd_gamma(args) -> int:
    rep = gamma_experiment(args.d, args.s, args.trials, args.seed)
    doc = rep.to_json()
    if args.verbose:
        doc["elapsed"] = round(rep.elapsed, 3)
    _emit(doc, args.out)
    return EX_OK if not rep.refuting_examples else EX_FAIL


# ---------------------------------------------------------------------------
# reproduce battery


def _check_descent(name: str, d: int):
    res = verify_descent(named_form(name, d))
    want = DESCENT_ROUNDS[(name, d)]
    ok = res.status == "DESCENT" and len(res.certificate.rounds) == want
    detail = f"{name}(d={d}): {res.status}"
    if res.status == "DESCENT":
        nr = len(res.certificate.rounds)
        detail += f", {nr} round" + ("s" if nr != 1 else "")
        if (name, d) == ("I", 6):
            first = res.certificate.rounds[0].window_values
            ok = ok and first == I6_FIRST_WINDOW
            detail += ", first window frozen set" if ok else ", WRONG first window"
    return ok, detail


def _battery(d: int, trials_cap: int | None):
    """Ordered (name, thunk) pairs; each thunk returns (ok, detail)."""

    def scaled(n):
        return n if trials_cap is None else min(n, trials_cap)

    items = []

    def add(name, fn):
        items.append((name, fn))

    def g_obstruction():
        zs = primitive_zero_mod(named_form("G", d).form(), 2)
        return not zs.found, f"G(d={d}) mod 4: found={zs.found}"

    add("obstruction-G", g_obstruction)
    add("descent-H", lambda: _check_descent("H", d))
    if d == 6:
        add("descent-F", lambda: _check_descent("F", 6))
        add("descent-I", lambda: _check_descent("I", 6))

        def h_oracle():
            dec = decide_isotropy_exhaustive(named_form("H", 6).form())
            return dec.verdict == "ANISOTROPIC", f"H(d=6) exhaustive: {dec.verdict}"

        add("oracle-H", h_oracle)

    s, n, seed = GAMMA_RUNS[d]

    def threshold():
        rep = gamma_experiment(d, s, scaled(n), seed)
        ok = rep.isotropic == rep.trials and not rep.inconclusive
        return ok, (
            f"{rep.trials} samples at s={s}: {rep.isotropic} isotropic, "
            f"{rep.inconclusive} inconclusive"
        )

    add(f"threshold-s{s}", threshold)

    for lid in exhaustive_lemma_ids():
        if SWEEP_LEMMAS[lid].d != d:
            continue

        def sweep_ex(lid=lid):
            rep = sweep_lemma(lid, mode="EXHAUSTIVE")
            ok = not rep.failures
            return ok, f"{rep.total} configurations, {len(rep.failures)} failures"

        add(f"sweep-{lid}", sweep_ex)

    for lid in sampled_lemma_ids():
        if SWEEP_LEMMAS[lid].d != d:
            continue

        def sweep_s(lid=lid):
            rep = sweep_lemma(
                lid, mode="SAMPLED", trials=scaled(SWEEP_SAMPLES), seed=SWEEP_SEED
            )
            ok = not rep.failures
            return ok, f"{rep.total} samples, {len(rep.failures)} failures"

        add(f"sweep-{lid}", sweep_s)

    n, seed = AGREEMENT_RUNS[d]

    def agreement():
        rep = agreement_experiment(d, scaled(n), seed)
        return not rep.mismatches, (
            f"{rep.trials} forms: {rep.isotropic} isotropic, "
            f"{rep.anisotropic} anisotropic, {len(rep.mismatches)} mismatches"
        )

    add("agreement", agreement)
    return items


def run_battery(degrees, trials_cap=None, threads=None, stream=None):
    """Run every battery item, print one PASS/FAIL row each, return ok."""
    stream = stream or sys.stdout
    work = []
    for d in degrees:
        for name, fn in _battery(d, trials_cap):
            work.append((d, name, fn))
    threads = threads or worker_count()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn) for _, _, fn in work]
        all_ok = True
        for (d, name, _), fut in zip(work, futures):
            try:
                ok, detail = fut.result()
            except PadicFormsError as exc:
                ok, detail = False, f"error: {exc}"
            all_ok &= ok
            tag = "PASS" if ok else "FAIL"
            print(f"{tag}  d={d:<3} {name:<16} {detail}", file=stream)
    return all_ok


def cmd_reproduce(args) -> int:
    degrees = [args.d] if args.d else [6, 10]
    ok = run_battery(degrees, trials_cap=args.trials)
    return EX_OK if ok else EX_FAIL


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="padic-forms", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write result JSON here instead of stdout")
        sp.add_argument(
            "-v", "--verbose", action="store_true", help="include timing fields"
        )

    sp = sub.add_parser("solve", help="decide isotropy of a form file")
    sp.add_argument("form", help="form file, or - for stdin")
    sp.add_argument("--precision", type=int, help="override working precision K")
    sp.add_argument("--budget", type=int, help="contraction search node budget")
    common(sp)
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("oracle", help="complete decision by exhaustion")
    sp.add_argument("form")
    sp.add_argument(
        "--precision",
        type=int,
        help="only search for a primitive zero at this modulus exponent",
    )
    common(sp)
    sp.set_defaults(fn=cmd_oracle)

    sp = sub.add_parser("witness", help="witness file operations")
    sp.add_argument("action", choices=["verify"])
    sp.add_argument("form")
    sp.add_argument("witness")
    common(sp)
    sp.set_defaults(fn=cmd_witness)

    sp = sub.add_parser("lemma", help="verify one contraction lemma by sweep")
    sp.add_argument(
        "action",
        choices=["verify", "probe"],
        help="verify: run the sweep; probe: exhaust decremented counts",
    )
    sp.add_argument("id", help="lemma identifier, e.g. 007 or 541")
    sp.add_argument("--mode", choices=["exhaustive", "sampled"])
    sp.add_argument("--trials", type=int, default=SWEEP_SAMPLES)
    sp.add_argument("--seed", type=int, default=SWEEP_SEED)
    common(sp)
    sp.set_defaults(fn=cmd_lemma)

    sp = sub.add_parser("reproduce", help="run the verification battery")
    sp.add_argument("--d", type=int, choices=[6, 10], help="restrict to one degree")
    sp.add_argument(
        "--trials",
        type=int,
        help="cap sampling sizes for a quick pass (default: full scale)",
    )
    sp.set_defaults(fn=cmd_reproduce)

    sp = sub.add_parser("gamma", help="random-form verdict statistics")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=42)
    common(sp)
    sp.set_defaults(fn=cmd_gamma)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"padic-forms: {exc}", file=sys.stderr)
        return EX_PARSE
    except (ValueError, DegreeShapeError) as exc:
        print(f"padic-forms: {exc}", file=sys.stderr)
        return EX_PARSE
    except (PrecisionMismatch, OracleBudgetError) as exc:
        print(f"padic-forms: {exc}", file=sys.stderr)
        return EX_PRECISION
    except PadicFormsError as exc:
        print(f"padic-forms: internal error: {exc}", file=sys.stderr)
        return EX_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
