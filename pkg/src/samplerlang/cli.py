"""Command-line entry point: check, run, normalize, equiv, verify,
test-target, and the bundled examples suite.

Exit codes: 0 success, 1 verification/test failure, 2 usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .builtins import EvalError
from .config import Config
from .corpus import corpus_dir, load_corpus, proof_path
from .empirical import weak_convergence_test, k_equidistribution_test
from .interpreter import Interpreter
from .parser import ParseError, parse_measure, parse_program
from .pretty import pretty, pretty_type
from .rewrite import normalize, prove_equiv
from .streams import truncate
from .target import AxiomSet, DerivationChecker, derivation_from_json
from .typecheck import TypeCheckError, check_program


def _load_program(path: str):
    src = Path(path).read_text(encoding="utf-8")
    return parse_program(src, path)


def _config_from(args) -> Config:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = int(args.seed, 0) if isinstance(args.seed, str) else args.seed
    return Config.load(getattr(args, "config", None), overrides)


def cmd_check(args) -> int:
    prog = _load_program(args.file)
    try:
        result = check_program(prog)
    except TypeCheckError as err:
        print(f"{args.file}: type error: {err}", file=sys.stderr)
        return 1
    print(pretty_type(result.ty))
    if args.emit_derivation:
        Path(args.emit_derivation).write_text(
            json.dumps(result.derivation.to_json(), indent=2) + "\n"
        )
    return 0


def _flatten_value(v, out):
    if isinstance(v, tuple):
        for x in v:
            _flatten_value(x, out)
    elif isinstance(v, bool):
        out.append(1 if v else 0)
    else:
        out.append(v)


def cmd_run(args) -> int:
    prog = _load_program(args.file)
    check_program(prog)
    cfg = _config_from(args)
    interp = Interpreter(prog, cfg)
    n = args.samples
    if args.engine == "bigstep":
        result = interp.big_step(n)
    else:
        result = truncate(interp.stream(), n)
    from .runtime import WeightedList

    if not isinstance(result, WeightedList):
        print(result)
        return 0
    rows = []
    for i, (v, w) in enumerate(result.entries, start=1):
        flat: list = []
        _flatten_value(v, flat)
        rows.append((i, flat, w))
    width = max(len(flat) for _, flat, _ in rows)
    header = ["index"] + [f"value_{j}" for j in range(width)] + ["weight"]
    if width == 1:
        header = ["index", "value", "weight"]
    lines = [",".join(header)]
    for i, flat, w in rows:
        lines.append(",".join([str(i)] + [repr(x) for x in flat] + [repr(w)]))
    text = "\n".join(lines) + "\n"
    if args.dump:
        Path(args.dump).write_text(text)
        print(f"wrote {len(rows)} samples to {args.dump}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_normalize(args) -> int:
    prog = _load_program(args.file)
    check_program(prog)
    nf, steps = normalize(prog.body)
    print(pretty(nf))
    if args.trace:
        for step in steps:
            print(f"  {step.rule} at {list(step.path)}", file=sys.stderr)
    return 0


def cmd_equiv(args) -> int:
    prog_a = _load_program(args.left)
    prog_b = _load_program(args.right)
    check_program(prog_a)
    check_program(prog_b)
    proof = prove_equiv(prog_a.body, prog_b.body, depth=args.depth)
    if proof is None:
        print("inconclusive")
        return 1
    print(json.dumps(proof.to_json(), indent=2))
    return 0


def cmd_verify(args) -> int:
    axioms_prog = _load_program(args.axioms)
    if axioms_prog.body is not None:
        check_program(axioms_prog)
    axioms = AxiomSet.from_program(axioms_prog)
    data = json.loads(Path(args.proof).read_text(encoding="utf-8"))
    samplerish = {e.name for e in axioms_prog.externs}
    deriv = derivation_from_json(data.get("root", data), samplerish)
    checker = DerivationChecker(axioms)
    outcome = checker.check(deriv)
    for report in outcome.reports:
        print(f"  [{report.status}] {report.path} ({report.rule}) {report.note}")
    if outcome.accepted:
        subject = pretty(outcome.conclusion.subject)
        if len(subject) > 72:
            subject = subject[:72] + "..."
        target = data.get("root", data)["judgment"]["target"]
        print(f"accept: {subject} targets {target}")
        return 0
    print(f"reject: {outcome.failure}")
    return 1


def cmd_test_target(args) -> int:
    prog = _load_program(args.file)
    check_program(prog)
    cfg = _config_from(args)
    interp = Interpreter(prog, cfg)
    measure = parse_measure(args.measure, {e.name for e in prog.externs})
    tol = args.tol if args.tol is not None else cfg.tol_final
    ladder = [max(args.n // 100, 1), max(args.n // 10, 1), args.n]
    if args.K > 1:
        report = k_equidistribution_test(
            prog.body, measure, args.K, interp, n=args.n, tol=tol,
            settings=cfg.quad_settings(),
        )
    else:
        report = weak_convergence_test(
            interp.stream(),
            measure,
            ladder,
            tol_schedule=lambda m: max(tol, 3.0 / (m ** 0.5)),
            settings=cfg.quad_settings(),
        )
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_json(), indent=2) + "\n")
    worst = report.ladder[-1].worst() if report.ladder else float("nan")
    status = "pass" if report.passed else "fail"
    print(f"{status}: n={args.n} K={args.K} worst discrepancy {worst:.4g} vs tol {tol:g}")
    if not report.passed:
        print(f"  {report.reason}")
    return 0 if report.passed else 1


def cmd_examples(args) -> int:
    cfg = _config_from(args)
    directory = Path(args.dir) if args.dir else corpus_dir()
    rows = []
    failures = 0
    from .runtime import value_equal

    for item in load_corpus(directory):
        status = "ok"
        notes = [item.type_str]
        try:
            interp = Interpreter(item.program, cfg)
            for n in (1, 7):
                big = interp.big_step(n)
                stream = truncate(Interpreter(item.program, cfg).stream(), n)
                if not value_equal(big, stream):
                    raise AssertionError(f"engines disagree at N={n}")
            notes.append("adequacy@1,7")
            ppath = proof_path(item.name)
            if args.proofs and ppath.exists():
                axioms = AxiomSet.from_program(item.program)
                deriv = derivation_from_json(
                    json.loads(ppath.read_text()), {e.name for e in item.program.externs}
                )
                outcome = DerivationChecker(axioms).check(deriv)
                if not outcome.accepted:
                    raise AssertionError(f"proof rejected: {outcome.failure}")
                notes.append("proof")
        except Exception as err:  # pragma: no cover - failure path
            status = "FAIL"
            notes.append(str(err)[:80])
            failures += 1
        rows.append((item.name, status, "; ".join(notes)))
    width = max(len(name) for name, _, _ in rows)
    for name, status, note in rows:
        print(f"{name:<{width}}  {status:<4}  {note}")
    print(f"{len(rows) - failures}/{len(rows)} corpus programs passed")
    if args.report:
        payload = {
            "schema_version": 1,
            "seed": cfg.seed,
            "passed": len(rows) - failures,
            "total": len(rows),
            "items": [
                {"name": name, "status": status, "note": note}
                for name, status, note in rows
            ],
        }
        Path(args.report).write_text(json.dumps(payload, indent=2) + "\n")
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="samplerlang",
        description="Type-check, evaluate, rewrite, and verify stream samplers.",
    )
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--seed", help="seed override (also SAMPLERLANG_SEED)")
    parser.add_argument(
        "--print-config", action="store_true", help="print the resolved configuration"
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("check", help="type-check a program")
    p.add_argument("file")
    p.add_argument("--emit-derivation", metavar="OUT.json")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("run", help="evaluate a program to weighted samples")
    p.add_argument("file")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--engine", choices=("bigstep", "stream"), default="stream")
    p.add_argument("--seed", dest="seed")
    p.add_argument("--dump", metavar="OUT.csv")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("normalize", help="print the map/reweight normal form")
    p.add_argument("file")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("equiv", help="search for an equivalence proof")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--depth", type=int, default=8)
    p.set_defaults(fn=cmd_equiv)

    p = sub.add_parser("verify", help="check a targeting derivation")
    p.add_argument("proof")
    p.add_argument("--axioms", required=True, help=".smpl file declaring the axioms")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("test-target", help="empirical weak-convergence test")
    p.add_argument("file")
    p.add_argument("--measure", required=True)
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", dest="seed")
    p.add_argument("--report", metavar="OUT.json")
    p.set_defaults(fn=cmd_test_target)

    p = sub.add_parser("examples", help="run the bundled corpus")
    p.add_argument("--dir")
    p.add_argument("--proofs", action="store_true", default=True)
    p.add_argument("--no-proofs", dest="proofs", action="store_false")
    p.add_argument("--report", metavar="OUT.json")
    p.set_defaults(fn=cmd_examples)

    args = parser.parse_args(argv)
    if args.print_config:
        print(_config_from(args).dump())
        return 0
    if not getattr(args, "fn", None):
        parser.print_help()
        return 2
    try:
        return args.fn(args)
    except (ParseError, TypeCheckError, EvalError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
