"""Command-line front end.

Exit codes: 0 success, 1 I/O or parse error, 2 invalid input (POVM
invariants, parameters, strategy/observable mismatch), 3 an oracle
contradicts the analytic value.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__, config
from .errors import LabelingError, ValidationError
from .linalg import matrix_from_json, vector_from_json
from .multishot import construct_perfectly_labelable
from .observables import observable_from_json, observable_to_json
from .report import analyze, input_digest, to_text

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_CONTRADICTION = 3

STRATEGIES = ("map-optimal", "sequential-3", "perfect-plan", "custom:<probes.json>")
CHECKS = ("alpha", "tester", "kron", "simple", "unambiguous")

# tolerances an oracle value may miss its analytic counterpart by
ALPHA_GAP = 1e-6
KRON_GAP = 1e-10
SIMPLE_GAP = 1e-12


class _IOFailure(Exception):
    pass


def _common(parser):
    s = argparse.SUPPRESS
    parser.add_argument("--tol", type=float, default=s, help=f"numeric tolerance (default {config.TOL:g})")
    parser.add_argument("--format", choices=("json", "text"), default=s, help="output format (default text)")
    parser.add_argument("--seed", type=int, default=s, help="64-bit unsigned seed (default 0)")
    parser.add_argument("-o", "--output", default=s, help="write the result here instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(prog="povm-labeler", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an observable file")
    p.add_argument("path")
    _common(p)

    p = sub.add_parser("analyze", help="full labeling report")
    p.add_argument("path")
    p.add_argument("--shots-max", type=int, default=5)
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo labeling experiment")
    p.add_argument("path")
    p.add_argument("--strategy", default="map-optimal", help=" | ".join(STRATEGIES))
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument(
        "--merge-equal-effects",
        action="store_true",
        help="count guesses that only swap equal effects as correct",
    )
    _common(p)

    p = sub.add_parser("oracle", help="brute-force cross-check of an analytic claim")
    p.add_argument("path")
    p.add_argument("--check", choices=CHECKS, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--shots", type=int, default=3, help="largest shot count for --check kron")
    _common(p)

    p = sub.add_parser("construct", help="write a perfectly labelable observable")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--residuals", help="JSON list of residual matrices")
    _common(p)
    return parser


def _read_json(path):
    try:
        with open(path, "rb") as f:
            data = f.read()
        return json.loads(data), data
    except (OSError, ValueError) as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from exc


def _load(path, tol):
    obj, data = _read_json(path)
    return observable_from_json(obj, tol=tol), data


def _emit(args, payload, text):
    out = json.dumps(payload, indent=2, sort_keys=False) if args.format == "json" else text
    if args.output:
        with open(args.output, "w") as f:
            f.write(out + "\n")
    else:
        print(out)


def _cmd_validate(args):
    obs, _ = _load(args.path, args.tol)
    payload = {"valid": True, "dim": obs.dim, "n": obs.n, "labels": list(obs.labels)}
    _emit(args, payload, f"valid observable: d={obs.dim} n={obs.n}")
    return EXIT_OK


def _cmd_analyze(args):
    obs, data = _load(args.path, args.tol)
    if not 1 <= args.shots_max <= config.MAX_SHOTS:
        raise ValidationError(f"--shots-max must be in [1, {config.MAX_SHOTS}]", invariant="shots")
    report = analyze(obs, shots_max=args.shots_max, digest=input_digest(data))
    _emit(args, report, to_text(report))
    return EXIT_OK


def _strategy(obs, name):
    from .simulator import (
        custom_strategy,
        map_optimal_strategy,
        perfect_plan_strategy,
        sequential_three_effect,
    )

    if name == "map-optimal":
        return map_optimal_strategy(obs)
    if name == "sequential-3":
        return sequential_three_effect(obs)
    if name == "perfect-plan":
        return perfect_plan_strategy(obs)
    if name.startswith("custom:"):
        obj, _ = _read_json(name[len("custom:"):])
        try:
            probes = [vector_from_json(v) for v in obj["probes"]]
            decision = obj.get("decision", "map")
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValidationError(f"malformed probes file: {exc}", invariant="probes-json") from exc
        return custom_strategy(probes, decision=decision)
    raise ValidationError(f"unknown strategy {name!r}; expected one of {STRATEGIES}", invariant="strategy")


def _cmd_simulate(args):
    from .simulator import run_labeling_experiment

    obs, _ = _load(args.path, args.tol)
    strategy = _strategy(obs, args.strategy)
    result = run_labeling_experiment(
        obs, strategy, args.trials, args.seed, workers=args.workers, merge_equal=args.merge_equal_effects
    )
    payload = result.to_json()
    text = (
        f"{result.strategy}: {result.successes}/{result.trials} successes, "
        f"estimate {result.estimate:.6f} +/- {result.standard_error:.6f} (seed {result.seed})"
    )
    _emit(args, payload, text)
    return EXIT_OK


def _cmd_oracle(args):
    from . import oracle
    from .single_shot import alpha

    obs, _ = _load(args.path, args.tol)
    check = args.check
    reports = []
    if check == "alpha":
        r = oracle.probe_search_alpha(obs, args.samples, args.seed)
        reports.append(r.to_json())
        bad = r.gap > oracle.BOUND_SLACK or r.gap < -ALPHA_GAP
    elif check == "tester":
        r = oracle.random_tester_bound(obs, args.samples, args.seed)
        reports.append(r.to_json())
        bad = r.gap > oracle.BOUND_SLACK
    elif check == "kron":
        bad = False
        for n in range(1, min(args.shots, 3) + 1):
            r = oracle.kron_norm_check(obs, n)
            reports.append(r.to_json())
            bad = bad or abs(r.gap) > KRON_GAP
    elif check == "simple":
        a, witness, _ = alpha(obs)
        value = oracle.exhaustive_simple_scheme(obs, [witness])
        expected = a / math.factorial(obs.n - 1)
        r = oracle.OracleReport("simple", expected, value, samples=1, seed=0)
        reports.append(r.to_json())
        bad = abs(r.gap) > SIMPLE_GAP
    else:
        u = oracle.unambiguous_feasibility_check(obs, seed=args.seed)
        reports.append({"target": "unambiguous", **u.to_json()})
        bad = u.feasible
    payload = {"check": check, "contradiction": bad, "reports": reports}
    lines = [f"check {check}: {'CONTRADICTION' if bad else 'consistent'}"]
    for r in reports:
        lines.append("  " + ", ".join(f"{k}={v}" for k, v in r.items()))
    _emit(args, payload, "\n".join(lines))
    return EXIT_CONTRADICTION if bad else EXIT_OK


def _cmd_construct(args):
    residuals = None
    if args.residuals:
        obj, _ = _read_json(args.residuals)
        items = obj["residuals"] if isinstance(obj, dict) else obj
        residuals = [matrix_from_json(m) for m in items]
    obs = construct_perfectly_labelable(args.n, args.d, residuals, tol=args.tol)
    payload = observable_to_json(obs)
    if args.output:
        with open(args.output, "w") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
        print(f"wrote {args.output}: d={obs.dim} n={obs.n}", file=sys.stderr)
    else:
        print(json.dumps(payload, indent=2))
    return EXIT_OK


COMMANDS = {
    "validate": _cmd_validate,
    "analyze": _cmd_analyze,
    "simulate": _cmd_simulate,
    "oracle": _cmd_oracle,
    "construct": _cmd_construct,
}


def _diagnose(args, code, exc):
    if isinstance(exc, ValidationError):
        diag = exc.to_dict()
    else:
        diag = {"invariant": None, "index": None, "defect": None, "message": str(exc)}
    diag["error"] = type(exc).__name__
    diag["exit_code"] = code
    if getattr(args, "format", "text") == "json":
        print(json.dumps(diag, default=_jsonable), file=sys.stderr)
    else:
        where = f" [{diag['invariant']}]" if diag["invariant"] else ""
        print(f"error{where}: {exc}", file=sys.stderr)
    return code


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    return str(x)


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.tol = getattr(args, "tol", config.TOL)
    args.format = getattr(args, "format", "text")
    args.seed = getattr(args, "seed", 0)
    args.output = getattr(args, "output", None)
    try:
        return COMMANDS[args.command](args)
    except _IOFailure as exc:
        return _diagnose(args, EXIT_IO, exc)
    except (LabelingError, ValueError) as exc:
        return _diagnose(args, EXIT_INVALID, exc)


if __name__ == "__main__":
    sys.exit(main())
