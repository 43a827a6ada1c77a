"""Command-line front end: ``minmaxspec {matrix,family,verify}``.

Every command prints a JSON report on standard output and a short summary on
standard error (``--quiet`` suppresses it).  State indices in reports are
0-based.  Exit codes: 0 ok, 1 verification failed, 2 parse error, 3 numeric
failure, 4 unsupported input (nilpotent extremal matrix), 5 closure larger
than ``--cap``.
"""
import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .classgraph import classify
from .dynamics import compare_growth, estimate_growth, iterate
from .errors import ClosureTooLarge, MinMaxError, NilpotentError, ParseError
from .family import MODES, RowChoiceFamily, extremal_matrix
from .io import load
from .minmax import (
    chain_residual,
    characterize,
    generalized_chain_min,
    positive_eigenvector_min,
)
from .perron import growth_descriptors, positive_eigenvector_single, rothblum_chain

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_NUMERIC, EXIT_UNSUPPORTED, EXIT_CAP = range(6)


class VerificationFailed(Exception):
    pass


def _vec(v):
    return [float(x) for x in np.asarray(v, dtype=float)]


def _desc(d):
    return [float(d.beta), int(d.k)]


def _structure(A, tol_spr):
    cs = classify(A, tol_spr)
    return cs, {
        "spr": float(cs.spr),
        "classes": [list(c) for c in cs.classes],
        "access": sorted([c, d] for c, d in cs.access),
        "class_spr": _vec(cs.class_spr),
        "is_basic": list(cs.is_basic),
        "is_final": list(cs.is_final),
        "depth": list(cs.depth),
        "degree": cs.degree,
        "principal_partition": [list(S) for S in cs.principal_partition],
    }


def _chain_json(chain, residual):
    return {
        "vectors": [_vec(v) for v in chain.vectors],
        "residual": float(residual),
        "sign_pattern_ok": bool(chain.sign_pattern_ok()),
    }


def cmd_matrix(parsed, args):
    A = parsed.matrix
    cs, report = _structure(A, args.tol_spr)
    report["descriptors"] = [_desc(d) for d in growth_descriptors(A, args.tol_spr)]
    if cs.spr == 0:
        report["chain"] = None
        report["notice"] = "matrix is nilpotent; no Perron chain"
    else:
        chain = rothblum_chain(A, args.tol_spr)
        report["chain"] = _chain_json(chain, chain.residual(lambda v: A @ v))
    pos = positive_eigenvector_single(A, args.tol_spr) if cs.spr > 0 else None
    report["positive_eigenvector"] = None if pos is None else _vec(pos[1])
    summary = [
        f"spr {cs.spr:.12g}, degree {cs.degree}, {len(cs.classes)} classes",
        "descriptors " + " ".join(f"({b:.6g},{k})" for b, k in report["descriptors"]),
    ]
    return report, summary


def _modes(args):
    return MODES if args.mode == "both" else (args.mode,)


def cmd_family(parsed, args):
    F = parsed.family
    report = {"closure_size": F.closure_size}
    summary = []
    for mode in _modes(args):
        policy, B = extremal_matrix(F, mode, args.strategy, args.cap, args.tol_spr)
        cs, struct = _structure(B, args.tol_spr)
        entry = {
            "policy": list(policy),
            "matrix": [_vec(r) for r in B],
            "lambda": struct["spr"],
            "degree": cs.degree,
            "principal_partition": struct["principal_partition"],
            "descriptors": [_desc(d) for d in growth_descriptors(B, args.tol_spr)],
        }
        if mode == "min":
            found = positive_eigenvector_min(F, args.strategy, args.cap, args.tol_spr)
            if found is None:
                entry["positive_eigenvector"] = None
                entry["absence_certificate"] = {
                    "basic_nonfinal_classes": [
                        list(cs.classes[c])
                        for c in cs.basic_classes
                        if not cs.is_final[c]
                    ],
                }
            else:
                entry["positive_eigenvector"] = {
                    "vector": _vec(found.vector),
                    "policy": list(found.policy),
                    "steps": found.steps,
                }
            chain = generalized_chain_min(F, args.strategy, args.cap, args.tol_spr,
                                          args.tol_residual)
            entry["chain"] = _chain_json(chain, chain_residual(F, chain.vectors, chain.lam))
            ch = characterize(F, args.strategy, args.cap, args.tol_spr)
            entry["characterize"] = {"a": ch.a, "b": ch.b, "c": ch.c, "d": ch.d,
                                     "consistent": ch.consistent}
        report[mode] = entry
        summary.append(
            f"{mode}: lambda {entry['lambda']:.12g}, degree {cs.degree}, policy {list(policy)}"
        )
    return report, summary


def _parse_expect(items, n):
    out = {}
    for item in items or ():
        try:
            head, value = item.split("=")
            mode, state = head.split(":")
            beta, k = value.split(",")
            key = (mode, int(state))
            out[key] = (float(beta), int(k))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad --expect {item!r}; use MODE:STATE=BETA,K")
        if mode not in MODES or not 0 <= key[1] < n:
            raise argparse.ArgumentTypeError(f"bad --expect {item!r}")
    return out


def _verify_family(F, args, expect=None):
    rows, ok = [], True
    for mode in _modes(args):
        _, B = extremal_matrix(F, mode, args.strategy, args.cap, args.tol_spr)
        predicted = growth_descriptors(B, args.tol_spr)
        trace = iterate(F, np.ones(F.n), args.steps, mode)
        for i, d in enumerate(predicted):
            pred = (expect or {}).get((mode, i), d.as_tuple())
            est = estimate_growth(trace, i)
            passed = compare_growth(pred, est, args.tol_beta)
            ok &= passed
            rows.append({
                "mode": mode,
                "state": i,
                "predicted": [float(pred[0]), int(pred[1])],
                "estimated": [float(est.beta), int(est.k)],
                "slope": float(est.diagnostics["slope"]),
                "low_confidence": bool(est.diagnostics["low_confidence"]),
                "pass": passed,
            })
    return rows, ok


def cmd_verify(parsed, args):
    expect = _parse_expect(args.expect, parsed.n)
    rows, ok = _verify_family(parsed.family, args, expect)
    report = {"verdicts": rows, "all_pass": ok}
    summary = [
        f"{r['mode']} state {r['state']}: predicted ({r['predicted'][0]:.6g},{r['predicted'][1]}) "
        f"estimated ({r['estimated'][0]:.6g},{r['estimated'][1]}) "
        + ("pass" if r["pass"] else "FAIL")
        for r in rows
    ]
    if not ok:
        raise VerificationFailed(report, summary)
    return report, summary


def random_family(rng, max_n=5, max_choices=2, max_entry=3):
    n = int(rng.integers(1, max_n + 1))
    rows = [
        rng.integers(0, max_entry + 1, size=(int(rng.integers(1, max_choices + 1)), n))
        for _ in range(n)
    ]
    return RowChoiceFamily.from_rows(rows)


def cmd_self_test(args):
    rng = np.random.default_rng(args.seed)
    instances, failures, skipped = [], 0, 0
    while len(instances) < args.self_test:
        F = random_family(rng)
        try:
            rows, ok = _verify_family(F, args)
        except NilpotentError:
            skipped += 1
            continue
        failures += not ok
        instances.append({"rows": [r.tolist() for r in F.rows], "all_pass": ok,
                          "verdicts": rows})
    report = {"seed": args.seed, "instances": instances, "skipped_nilpotent": skipped,
              "failures": failures, "all_pass": failures == 0}
    summary = [f"self-test: {len(instances)} families, {failures} failing, "
               f"{skipped} nilpotent skipped"]
    if failures:
        raise VerificationFailed(report, summary)
    return report, summary


def build_parser():
    parser = argparse.ArgumentParser(
        prog="minmaxspec",
        description="Spectral analysis of nonnegative matrices and min/max operators "
        "over row-choice families.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-spr", type=float, default=1e-9,
                        help="relative tolerance for equal spectral radii (default 1e-9)")
    common.add_argument("--tol-residual", type=float, default=1e-8,
                        help="residual tolerance for eigen-chains (default 1e-8)")
    common.add_argument("--quiet", action="store_true", help="no summary on stderr")
    common.add_argument("--timing", action="store_true",
                        help="add a wall-clock timing block to the report")
    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--mode", choices=("min", "max", "both"), default="both")
    fam.add_argument("--strategy", choices=("auto", "brute", "recursive"), default="auto")
    fam.add_argument("--cap", type=int, default=4096,
                     help="largest closure enumerated by brute force (default 4096)")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("matrix", parents=[common], help="analyse a single matrix")
    p.add_argument("path")
    p = sub.add_parser("family", parents=[common, fam], help="analyse a row-choice family")
    p.add_argument("path")
    p = sub.add_parser("verify", parents=[common, fam],
                       help="check growth predictions against the iteration oracle")
    p.add_argument("path", nargs="?")
    p.add_argument("--steps", type=int, default=4000)
    p.add_argument("--tol-beta", type=float, default=1e-2)
    p.add_argument("--expect", action="append", metavar="MODE:STATE=BETA,K",
                   help="override a predicted descriptor (repeatable)")
    p.add_argument("--self-test", type=int, metavar="COUNT",
                   help="verify COUNT random families instead of reading a file")
    p.add_argument("--seed", type=int, default=0, help="seed for --self-test")
    return parser


def _emit(report, summary, args, stdout, stderr):
    stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        for line in summary:
            stderr.write(line + "\n")


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify" and args.path is None and args.self_test is None:
        parser.error("verify needs a path or --self-test")
    started = time.perf_counter()
    base = {"command": args.command, "state_index_base": 0,
            "tolerances": {"spr": args.tol_spr, "residual": args.tol_residual}}
    if args.command == "verify":
        base["tolerances"].update(beta=args.tol_beta, steps=args.steps)
    code = EXIT_OK
    try:
        if args.command == "verify" and args.self_test is not None:
            body, summary = cmd_self_test(args)
        else:
            parsed = load(args.path)
            if args.command == "matrix" and parsed.kind != "matrix":
                raise ParseError("expected a 'matrix' file")
            base.update(input={"digest": parsed.digest, "kind": parsed.kind, "n": parsed.n})
            handler = {"matrix": cmd_matrix, "family": cmd_family, "verify": cmd_verify}
            body, summary = handler[args.command](parsed, args)
    except VerificationFailed as exc:
        body, summary = exc.args
        code = EXIT_VERIFY
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except ParseError as exc:
        stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except ClosureTooLarge as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_CAP
    except NilpotentError as exc:
        stderr.write(f"unsupported input: {exc} (only spectral radius > 0 is supported)\n")
        return EXIT_UNSUPPORTED
    except (MinMaxError, np.linalg.LinAlgError) as exc:
        stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC
    report = dict(base, result=body)
    if args.timing:
        report["timing"] = {"seconds": round(time.perf_counter() - started, 6)}
    _emit(report, summary, args, stdout, stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
