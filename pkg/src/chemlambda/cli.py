"""Command line entry point: ``chemlambda <subcommand> ...``.

Exit status is 0 on success, 1 on a domain failure (no certificate, decode
undefined, normal form required but a limit hit), 2 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Tuple

from .canon import is_isomorphic
from .engine import Limits, Priority, Random, ReplayError, Scripted, ScriptError, Status, Trace, reduce, replay
from .knots import TangleError, count_curls, curl_is_bit, topological_combinator
from .lam import LambdaSyntaxError, alpha_eq, decode, encode, parse_lambda, reference_beta_reduce
from .molecule import MoleculeError, Molecule, parse_mol, serialize_mol, split_components, to_dot, validate
from .patterns import (NAMES, Behavior, BehaviorCertificate, GunError, NamedMolecule, UncertifiedError,
                       behavior_check, build_gun, check_multiplier, fixed_point_witness,
                       gg_runs_forever, named, run_gun, y_gun, y_reduction)


class UsageError(Exception):
    pass


class DomainFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# Input handling

_DIRECTIVE = re.compile(r"^\s*#\s*(exit|inputs)\s*:\s*(.*)$")


def _read_text(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    path = Path(source)
    if path.exists():
        return path.read_text(encoding="utf-8")
    if "\n" in source or " " in source:
        return source.replace(";", "\n")
    raise UsageError(f"no such file: {source}")


def _load(args) -> Tuple[Molecule, Optional[str], str]:
    """(molecule, lambda text or None, raw mol text) from the common input flags."""
    if getattr(args, "lambda_", None):
        return encode(parse_lambda(args.lambda_)), args.lambda_, ""
    if getattr(args, "named", None):
        nm = named(args.named)
        return nm.molecule, None, ""
    if not getattr(args, "input", None):
        raise UsageError("an input is required (file, inline mol text, --lambda or --named)")
    text = _read_text(args.input)
    return parse_mol(text), None, text


def _designated(args, m: Molecule, text: str) -> NamedMolecule:
    if getattr(args, "named", None):
        return named(args.named)
    exit_label, inputs = None, None
    for line in text.splitlines():
        match = _DIRECTIVE.match(line)
        if match:
            if match.group(1) == "exit":
                exit_label = match.group(2).strip()
            else:
                inputs = tuple(match.group(2).split())
    if args.exit:
        exit_label = args.exit
    if args.inputs is not None:
        inputs = tuple(args.inputs.split(",")) if args.inputs else ()
    outs = m.free_out()
    if exit_label is None:
        for guess in ("root", "out"):
            if guess in outs:
                exit_label = guess
                break
        else:
            if len(outs) != 1:
                raise UsageError("cannot tell which free exit is the exit arrow; use --exit")
            exit_label = outs[0]
    if inputs is None:
        inputs = tuple(m.free_in())
    name = Path(args.input).stem if args.input and Path(args.input).exists() else "input"
    try:
        return NamedMolecule(name, m, exit_label, inputs)
    except MoleculeError as exc:
        raise UsageError(str(exc)) from None


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_parse(args) -> int:
    if args.lambda_:
        print(parse_lambda(args.lambda_))
        return 0
    m, _, _ = _load(args)
    problems = validate(m)
    if problems:
        for p in problems:
            print(p, file=sys.stderr)
        return 1
    sys.stdout.write(serialize_mol(m) + ("\n" if serialize_mol(m) else ""))
    return 0


def cmd_encode(args) -> int:
    expr = args.lambda_ or args.input
    if not expr:
        raise UsageError("encode needs a lambda expression")
    opaque = dict(item.split("=", 1) for item in args.opaque) if args.opaque else None
    m = encode(parse_lambda(expr), opaque=opaque)
    _write(args.output, serialize_mol(m) + "\n")
    return 0


def cmd_decode(args) -> int:
    m, _, _ = _load(args)
    t = decode(m, strict=not args.lenient)
    if t is None:
        print("molecule does not decode to a lambda term", file=sys.stderr)
        return 1
    print(t)
    return 0


def _strategy(args):
    if args.strategy == "priority":
        return Priority()
    if args.strategy == "random":
        return Random(args.seed)
    if not args.script:
        raise UsageError("--strategy script needs --script PATH")
    moves = []
    for raw in Path(args.script).read_text(encoding="utf-8").splitlines():
        parts = raw.split("#", 1)[0].split()
        if not parts or parts[0] == "STATUS":
            continue
        if len(parts) == 3:
            moves.append((parts[0], parts[1], int(parts[2])))
        elif len(parts) == 6:
            moves.append(Trace.loads(raw).steps[0].site)
        else:
            raise UsageError(f"bad script line: {raw!r}")
    return Scripted(moves)


def cmd_reduce(args) -> int:
    m, lam_text, _ = _load(args)
    limits = Limits(args.max_steps, args.max_nodes)
    try:
        final, trace = reduce(m, _strategy(args), limits)
    except ScriptError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    if args.trace:
        Path(args.trace).write_text(trace.dumps(), encoding="utf-8")
    print(f"{trace.status.value} after {len(trace)} steps, {len(final.nodes)} nodes", file=sys.stderr)
    term = decode(final) if lam_text is not None else None
    if term is not None:
        print(term)
    else:
        text = serialize_mol(final)
        _write(args.output, text + ("\n" if text else ""))
    if args.require_normal_form and trace.status is not Status.NORMAL_FORM:
        return 1
    return 0


def cmd_replay(args) -> int:
    m, _, _ = _load(args)
    trace = Trace.loads(Path(args.trace).read_text(encoding="utf-8"))
    try:
        final = replay(m, trace)
    except ReplayError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    text = serialize_mol(final)
    _write(args.output, text + ("\n" if text else ""))
    return 0


def _print_certificate(cert: BehaviorCertificate) -> None:
    print(f"{cert.behavior.value} certificate for {cert.subject}: {len(cert)} moves")
    for i, name in enumerate(cert.move_names(), 1):
        print(f"  {i}. {name}")


def cmd_check(args) -> int:
    m, _, text = _load(args)
    nm = _designated(args, m, text)
    try:
        cert = behavior_check(nm, args.behavior, args.depth)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    if cert is None:
        print(f"no {args.behavior} certificate within depth {args.depth}", file=sys.stderr)
        return 1
    _print_certificate(cert)
    if args.trace:
        Path(args.trace).write_text(cert.replay()[1].dumps(), encoding="utf-8")
    return 0 if cert.verify() else 1


def cmd_gun(args) -> int:
    if args.named and args.named.upper() == "Y" or not (args.input or args.named):
        g = y_gun()
    else:
        m, _, text = _load(args)
        nm = _designated(args, m, text)
        try:
            g = build_gun(nm, Behavior(args.source))
        except UncertifiedError as exc:
            print(str(exc), file=sys.stderr)
            return 1
    try:
        residual, emitted = run_gun(g, args.cycles)
    except GunError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    same = is_isomorphic(residual, g.molecule, labeled=True)
    print(f"{g.name}: {args.cycles} cycles, residual isomorphic to start: {same}")
    for i, piece in enumerate(emitted, 1):
        print(f"emission {i}: " + "; ".join(serialize_mol(piece).splitlines()))
    return 0 if same else 1


def cmd_export(args) -> int:
    m, _, _ = _load(args)
    _write(args.dot, to_dot(m))
    return 0


# ---------------------------------------------------------------------------
# Demos


def demo_k_self_mult() -> bool:
    k = named("K")
    cert = check_multiplier(k, 12)
    if cert is None:
        print("K: no certificate")
        return False
    _print_certificate(cert)
    final, _ = cert.replay()
    parts = split_components(final)
    copies = [is_isomorphic(p, k.molecule) for p in parts]
    print(f"final molecule: {len(parts)} components, each a copy of K: {all(copies)}")
    return len(parts) == 2 and all(copies) and cert.verify()


def demo_y_reduction() -> bool:
    yr = y_reduction()
    print("Y A, A opaque: " + ", ".join(yr.trace.moves()))
    print(f"final molecule matches A(Y A): {yr.matches()}")
    print(f"moves touching A: {yr.moves_touching_opaque()}")
    return yr.matches() and yr.moves_touching_opaque() == 0


def demo_y_gun() -> bool:
    g = y_gun()
    residual, emitted = run_gun(g, 3)
    fo = [p.kind_count("FO") for p in emitted]
    same = is_isomorphic(residual, g.molecule, labeled=True)
    print(f"Y gun, 3 cycles: fanouts per emission {fo}, residual isomorphic to start: {same}")
    return same and fo == [1, 1, 1]


def demo_curl_bit() -> bool:
    cert = curl_is_bit("A")
    if cert is None:
        print("curl: no certificate")
        return False
    print("curl (convention A): " + ", ".join(cert.move_names()) + " gives the bit")
    return len(cert) == 1 and cert.move_names() == ["cocomm"] and cert.verify()


def demo_bckw() -> bool:
    ok = True
    for name, expr, expect in (("B", r"(\x y z.x (y z)) a b c", "a (b c)"),
                               ("C", r"(\x y z.x z y) a b c", "a c b"),
                               ("K", r"(\x y.x) a b", "a"),
                               ("W", r"(\x y.x y y) a b", "a b b")):
        t = parse_lambda(expr)
        final, trace = reduce(encode(t))
        got = decode(final)
        oracle, _ = reference_beta_reduce(t, 100)
        good = got is not None and alpha_eq(got, oracle) and alpha_eq(got, parse_lambda(expect))
        ok &= good
        print(f"{name} a b{' c' if name in 'BC' else ''} -> {got}  ({len(trace)} moves, oracle {oracle}) {'ok' if good else 'FAIL'}")
    return ok


def demo_fixpoint() -> bool:
    final, trace, target = fixed_point_witness()
    law = is_isomorphic(final, target, labeled=True)
    print("GG, F opaque: " + ", ".join(trace.moves()))
    print(f"F applied to a copy of GG: {law}")
    forever = gg_runs_forever(200)
    print(f"priority reduction with 200 steps allowed: {forever.status.value}")
    topo = topological_combinator("FIXPOINT")
    print(f"topological fixed point combinator: {count_curls(topo)} curls")
    return law and forever.status is Status.STEP_LIMIT and count_curls(topo) == 2


DEMOS: Dict[str, Callable[[], bool]] = {
    "k-self-mult": demo_k_self_mult,
    "y-reduction": demo_y_reduction,
    "y-gun": demo_y_gun,
    "curl-bit": demo_curl_bit,
    "bckw": demo_bckw,
    "fixpoint": demo_fixpoint,
}


def cmd_demo(args) -> int:
    return 0 if DEMOS[args.name]() else 1


# ---------------------------------------------------------------------------
# Argument parsing


def _input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", help="mol file, '-' for stdin, or inline mol text (';' separates lines)")
    p.add_argument("--lambda", dest="lambda_", metavar="EXPR", help="lambda expression instead of a molecule")
    p.add_argument("--named", metavar="NAME", help=f"named molecule: {', '.join(NAMES)}")


def _designation_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--exit", help="exit arrow label (default: root, out, or the only exit)")
    p.add_argument("--inputs", help="comma separated input labels (default: all free inputs)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chemlambda", description="chemlambda molecules and moves")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate and echo a molecule or lambda term")
    _input_flags(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("encode", help="lambda term to molecule")
    p.add_argument("input", nargs="?", help="lambda expression")
    p.add_argument("--lambda", dest="lambda_", metavar="EXPR")
    p.add_argument("--opaque", action="append", metavar="VAR=POLARITIES",
                   help="make a free variable an opaque node, e.g. F=o")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="molecule to lambda term")
    _input_flags(p)
    p.add_argument("--lenient", action="store_true", help="read shared subterms as copies")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("reduce", help="run a reduction strategy")
    _input_flags(p)
    p.add_argument("--strategy", choices=("priority", "random", "script"), default="priority")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--script", help="move list for --strategy script ('kind dir index' or trace lines)")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--max-nodes", type=int, default=100_000)
    p.add_argument("--trace", help="write the trace to this file")
    p.add_argument("--require-normal-form", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("replay", help="replay a trace file")
    _input_flags(p)
    p.add_argument("--trace", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("check", help="search for a behaviour certificate")
    _input_flags(p)
    _designation_flags(p)
    p.add_argument("--behavior", required=True, choices=("multiplier", "propagator", "distributor1", "distributor2"))
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--trace", help="write the certificate as a trace file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gun", help="fire a gun (Y by default)")
    _input_flags(p)
    _designation_flags(p)
    p.add_argument("--source", choices=("propagator", "distributor1"), default="propagator")
    p.add_argument("--cycles", type=int, default=3)
    p.set_defaults(func=cmd_gun)

    p = sub.add_parser("demo", help="run a demonstration")
    p.add_argument("name", choices=sorted(DEMOS))
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("export", help="export a molecule")
    _input_flags(p)
    p.add_argument("--dot", metavar="PATH", help="Graphviz output file ('-' for stdout)", default="-")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for flag in ("max_steps", "max_nodes", "cycles", "depth"):
        if getattr(args, flag, 0) is not None and getattr(args, flag, 0) < 0:
            parser.error(f"--{flag.replace('_', '-')} must be non-negative")
    if getattr(args, "dot", None) == "-":
        args.dot = None
    try:
        return args.func(args)
    except (UsageError, MoleculeError, LambdaSyntaxError, TangleError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
