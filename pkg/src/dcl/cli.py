"""Command-line surface: validation, migration, translation, harnesses.

Exit codes: 0 valid/success, 1 invalid/violation, 2 unknown (search bound
hit), 3 input error.  Output is deterministic JSON; randomness only enters
through an explicit --seed.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import Optional

from dcl.graphs import Graph, GraphError, GraphMorphism
from dcl.injlogic import InjTheory, bounded_entailment
from dcl.instances import Delta, TypedInstance, canonicalize_instance
from dcl.io import (
    FormatError,
    Workspace,
    dumps,
    formula_from_json,
    load,
    signature_to_json,
    sketch_to_json,
    to_json,
)
from dcl.graphs import canonicalize
from dcl.randgen import harness_signature, random_satax_triple
from dcl.satisfaction import (
    migrate_instance,
    pullback_delta,
    validate_instance,
    verify_sat_axiom,
)
from dcl.signature import (
    ConstraintSymbol,
    Lifting,
    Regular,
    Signature,
    lifting_to_regular,
    regular_to_lifting,
    verify_dependency_soundness,
)
from dcl.sketch import Sketch, close_sketch, translate_declaration, translate_sketch
from dcl.verdicts import Status

EXIT_VALID = 0
EXIT_INVALID = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 3

_STATUS_EXIT = {
    Status.VALID: EXIT_VALID,
    Status.INVALID: EXIT_INVALID,
    Status.UNKNOWN: EXIT_UNKNOWN,
}


def _print(data) -> None:
    if isinstance(data, str):
        sys.stdout.write(data)
    else:
        sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _expect(obj, cls, what: str):
    if not isinstance(obj, cls):
        raise FormatError(f"{what}: expected a {cls.__name__}, got {type(obj).__name__}")
    return obj


def cmd_check(args) -> int:
    sketch = _expect(load(args.sketch), Sketch, args.sketch)
    instance = _expect(load(args.instance), TypedInstance, args.instance)
    if args.close:
        sketch = close_sketch(sketch)
    report = validate_instance(
        sketch,
        instance,
        instance_name=args.instance,
        allow_unclosed=args.allow_unclosed,
        jobs=args.jobs,
    )
    _print(report.to_json())
    return _STATUS_EXIT[report.overall]


def cmd_migrate(args) -> int:
    f = _expect(load(args.map), GraphMorphism, args.map)
    payload = load(args.payload)
    if args.direction == "pull":
        if isinstance(payload, TypedInstance):
            out = migrate_instance(f, payload)
        elif isinstance(payload, Delta):
            out = pullback_delta(f, payload)
        else:
            raise FormatError("pull expects an instance or a delta payload")
    else:
        sketch = _expect(payload, Sketch, args.payload)
        out = translate_sketch(f, sketch)
    _print(dumps(out))
    return EXIT_VALID


def cmd_translate(args) -> int:
    sig = _expect(load(args.signature), Signature, args.signature)
    symbols = {}
    for name, symbol in sig.symbols.items():
        if args.to == "lifting" and isinstance(symbol.semantics, Regular):
            symbols[name] = ConstraintSymbol(
                name, symbol.arity, regular_to_lifting(symbol.arity, symbol.semantics)
            )
        elif args.to == "regular" and isinstance(symbol.semantics, Lifting):
            arity, spec = lifting_to_regular(symbol.semantics)
            symbols[name] = ConstraintSymbol(name, arity, spec)
        else:
            symbols[name] = symbol
    _print(dumps(Signature(symbols, sig.dependencies)))
    return EXIT_VALID


_FAULT_SWAP = {"[1]": "[0..1]", "[0..1]": "[1]", "[1..*]": "[1..4,6]", "[1..4,6]": "[1..*]"}


def _broken_translate(f, d):
    """Deliberately wrong covariant translation: swaps multiplicity labels."""
    from dcl.sketch import ConstraintDeclaration

    out = translate_declaration(f, d)
    swapped = _FAULT_SWAP.get(out.label)
    if swapped is None:
        return out
    return ConstraintDeclaration(out.id, swapped, out.binding)


def cmd_satax(args) -> int:
    rng = random.Random(args.seed)
    sig = harness_signature()
    translate = _broken_translate if args.fault_inject else translate_declaration
    passed = 0
    failures = []
    for i in range(args.trials):
        f, d, t = random_satax_triple(rng, sig, max_nodes=args.max_nodes)
        try:
            result = verify_sat_axiom(f, d, t, sig, translate=translate)
        except GraphError as exc:
            failures.append({"trial": i, "error": str(exc)})
            continue
        if result.passed:
            passed += 1
        else:
            failures.append(
                {
                    "trial": i,
                    "detail": result.detail,
                    "morphism": f.to_json(),
                    "declaration": {"id": d.id, "label": d.label},
                    "instance": t.to_json(),
                }
            )
    _print(
        {
            "trials": args.trials,
            "seed": args.seed,
            "passed": passed,
            "failed": len(failures),
            "failures": failures[:10],
        }
    )
    return EXIT_VALID if not failures else EXIT_INVALID


def cmd_infer(args) -> int:
    theory = _expect(load(args.theory), InjTheory, args.theory)
    goal_data = json.loads(open(args.goal).read())
    goal = formula_from_json(goal_data)
    result = bounded_entailment(
        theory, goal, max_depth=args.depth, size_bound=args.size
    )
    if result.derivable:
        _print({"status": "derivable", "proof": result.derivation.to_json()})
        return EXIT_VALID
    _print({"status": "unknown"})
    return EXIT_UNKNOWN


def cmd_canon(args) -> int:
    obj = load(args.path)
    if isinstance(obj, Graph):
        _print(dumps(canonicalize(obj).graph))
    elif isinstance(obj, TypedInstance):
        _print(dumps(canonicalize_instance(obj).instance))
    else:
        raise FormatError("canon expects a graph or an instance")
    return EXIT_VALID


def cmd_close(args) -> int:
    sketch = _expect(load(args.sketch), Sketch, args.sketch)
    _print(dumps(close_sketch(sketch)))
    return EXIT_VALID


def cmd_deps_check(args) -> int:
    sig = _expect(load(args.signature), Signature, args.signature)
    report = verify_dependency_soundness(sig, args.size)
    _print(report.to_json())
    return EXIT_VALID if report.ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcl", description="diagram constraint logic over finite graphs"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate an instance against a sketch")
    p.add_argument("sketch")
    p.add_argument("instance")
    p.add_argument("--close", action="store_true", help="close the sketch first")
    p.add_argument("--allow-unclosed", action="store_true")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("migrate", help="pull an instance/delta or push a sketch")
    p.add_argument("map")
    p.add_argument("payload")
    p.add_argument("--direction", choices=["pull", "push"], required=True)
    p.set_defaults(func=cmd_migrate)

    p = sub.add_parser("translate", help="convert regular/lifting constraint forms")
    p.add_argument("signature")
    p.add_argument("--to", choices=["lifting", "regular"], required=True)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("satax", help="randomized satisfaction-axiom harness")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-nodes", type=int, default=5)
    p.add_argument("--fault-inject", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_satax)

    p = sub.add_parser("infer", help="bounded injectivity-logic proof search")
    p.add_argument("theory")
    p.add_argument("goal")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--size", type=int, default=6)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("canon", help="canonical form of a graph or instance")
    p.add_argument("path")
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("close", help="dependency-close a sketch")
    p.add_argument("sketch")
    p.set_defaults(func=cmd_close)

    p = sub.add_parser("deps-check", help="verify signature dependency soundness")
    p.add_argument("signature")
    p.add_argument("--size", type=int, default=2)
    p.set_defaults(func=cmd_deps_check)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, GraphError, FileNotFoundError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
