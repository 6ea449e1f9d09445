"""Command-line front door.

Subcommands: `check` runs the multi-property verifier on an AIGER file,
`gen-counter` and `gen-random` write benchmark circuits, `bmc` searches
for a bounded counterexample, `oracle` brute-forces small systems.

Exit codes follow the report contract: 0 clean, 10 failures to debug,
20 budget exhausted, 2 usage, 3 unreadable input.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
import time
from dataclasses import dataclass

from .aiger import (
    AigerError,
    build_counter,
    emit_ascii,
    emit_binary,
    emit_witness,
    gen_counter,
    gen_random_circuit,
    parse_file,
)
from .circuit import Counterexample, PropertyKind, PropertySpec
from .clausedb import ClauseDbError
from .oracle import CheckMode, OracleError, bmc, brute_check, brute_debug_set
from .orchestrator import Mode, TaskOptions, VerificationTask, run
from .report import (
    EXIT_FAILURES,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_UNKNOWN,
    EXIT_USAGE,
    format_report,
)

_MODES = {"ja": Mode.JA, "joint": Mode.JOINT, "sep-global": Mode.SEPARATE_GLOBAL}


@dataclass(frozen=True)
class CliConfig:
    """Validated flag set for the `check` subcommand."""

    input_path: str
    mode: Mode
    options: TaskOptions
    etf_indices: tuple[int, ...]
    report_format: str
    witness_dir: str | None

    @staticmethod
    def from_args(args) -> "CliConfig":
        order = args.order
        if order == "given":
            order = None
        elif order != "easy-first":
            with open(order) as fh:
                order = [int(tok) for tok in fh.read().replace(",", " ").split()]
        reuse = args.reuse_clauses == "on"
        options = TaskOptions(
            reuse_clauses=reuse,
            clause_db=args.clause_db,
            lifting=args.lifting,
            per_prop_timeout_s=args.per_prop_timeout,
            total_timeout_s=args.total_timeout,
            order=order,
            certify=args.certify or reuse,  # re-used clauses demand certification
        )
        return CliConfig(
            input_path=args.input,
            mode=_MODES[args.mode],
            options=options,
            etf_indices=tuple(args.etf or ()),
            report_format=args.report,
            witness_dir=args.witness_dir,
        )


def _positive(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _index_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad index list {text!r}") from None


def parse_args(argv) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="japdr",
        description="multi-property hardware model checking with local proofs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="verify the properties of an AIGER file")
    check.add_argument("input", help="AIGER file, ASCII or binary")
    check.add_argument("--mode", choices=sorted(_MODES), default="ja")
    check.add_argument("--reuse-clauses", choices=["on", "off"], default="on")
    check.add_argument("--clause-db", metavar="PATH")
    check.add_argument("--lifting", choices=["ignore", "respect"], default="ignore")
    check.add_argument("--per-prop-timeout", type=_positive, metavar="SECONDS")
    check.add_argument("--total-timeout", type=_positive, metavar="SECONDS")
    check.add_argument(
        "--etf", type=_index_list, metavar="I,J,...",
        help="property indices expected to fail",
    )
    check.add_argument(
        "--order", default="given", metavar="given|PATH|easy-first",
        help="ETH check order: as given, an index file, or smallest cone first",
    )
    check.add_argument("--report", choices=["text", "json", "csv"], default="text")
    check.add_argument("--witness-dir", metavar="PATH")
    check.add_argument(
        "--certify", action="store_true",
        help="re-check every proof on fresh solvers (always on with re-use)",
    )

    genc = sub.add_parser("gen-counter", help="write a counter benchmark")
    genc.add_argument("--bits", type=int, required=True)
    genc.add_argument(
        "--thresholds", type=int, metavar="N",
        help="N threshold properties under a req=1 constraint instead of the default pair",
    )
    genc.add_argument("-o", "--output", required=True, metavar="PATH")

    genr = sub.add_parser("gen-random", help="write a random circuit")
    genr.add_argument("--seed", type=int, required=True)
    genr.add_argument("--latches", type=int, default=6)
    genr.add_argument("--inputs", type=int, default=3)
    genr.add_argument("--gates", type=int, default=14)
    genr.add_argument("--props", type=int, default=3)
    genr.add_argument("--mutate", action="store_true", help="plant a next-state bug")
    genr.add_argument("-o", "--output", required=True, metavar="PATH")

    bmcp = sub.add_parser("bmc", help="bounded counterexample search for one property")
    bmcp.add_argument("input")
    bmcp.add_argument("--prop", type=int, required=True, metavar="I")
    bmcp.add_argument("--depth", type=int, required=True, metavar="D")
    bmcp.add_argument(
        "--assume", type=_index_list, default=[], metavar="I,J,...",
        help="property indices assumed on non-final frames",
    )
    bmcp.add_argument("--timeout", type=_positive, metavar="SECONDS")
    bmcp.add_argument("--witness-dir", metavar="PATH")

    orc = sub.add_parser("oracle", help="explicit-state ground truth for small systems")
    orc.add_argument("input")
    orc.add_argument("--cap-bits", type=int, default=24)

    return parser.parse_args(argv)


def _load(path):
    try:
        return parse_file(path)
    except OSError as exc:
        print(f"japdr: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE) from None
    except AigerError as exc:
        print(f"japdr: {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE) from None


def _write_witnesses(directory, circuit, report) -> dict[int, str]:
    os.makedirs(directory, exist_ok=True)
    paths = {}
    for v in report.verdicts:
        if isinstance(v.evidence, Counterexample):
            data = emit_witness(v.property_index, v.evidence, "sat")
        elif v.status.value == "Unknown":
            data = emit_witness(v.property_index, None, "unknown")
        else:
            data = emit_witness(v.property_index, None, "unsat")
        path = os.path.join(directory, f"b{v.property_index}.wit")
        with open(path, "wb") as fh:
            fh.write(data)
        paths[v.property_index] = path
    return paths


def _cmd_check(args) -> int:
    try:
        config = CliConfig.from_args(args)
    except (OSError, ValueError) as exc:
        print(f"japdr: bad arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE
    circuit, props = _load(config.input_path)
    for i in config.etf_indices:
        if not 0 <= i < len(props):
            print(f"japdr: --etf index {i} out of range", file=sys.stderr)
            return EXIT_USAGE
        props[i] = PropertySpec(props[i].index, props[i].bad, PropertyKind.ETF)
    try:
        task = VerificationTask(circuit, tuple(props), config.mode, config.options)
    except ValueError as exc:
        print(f"japdr: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run(task)
    except ClauseDbError as exc:
        print(f"japdr: clause db: {exc}", file=sys.stderr)
        return EXIT_PARSE
    witnesses = None
    if config.witness_dir:
        witnesses = _write_witnesses(config.witness_dir, circuit, report)
    data, code = format_report(report, config.report_format, witnesses)
    sys.stdout.write(data.decode())
    return code


def _emit_for(path: str, circuit) -> bytes:
    # honor the AIGER naming convention: .aig binary, anything else ASCII
    if path.endswith(".aig"):
        return emit_binary(circuit)
    return emit_ascii(circuit)


def _cmd_gen_counter(args) -> int:
    if args.thresholds is not None:
        built = build_counter(args.bits, thresholds=args.thresholds)
        circuit = built.circuit
    else:
        circuit, _ = gen_counter(args.bits)
    with open(args.output, "wb") as fh:
        fh.write(_emit_for(args.output, circuit))
    return EXIT_OK


def _cmd_gen_random(args) -> int:
    rng = random.Random(args.seed)
    circuit, _ = gen_random_circuit(
        rng,
        num_inputs=args.inputs,
        num_latches=args.latches,
        num_gates=args.gates,
        num_props=args.props,
        mutate=args.mutate,
    )
    with open(args.output, "wb") as fh:
        fh.write(_emit_for(args.output, circuit))
    return EXIT_OK


def _cmd_bmc(args) -> int:
    circuit, props = _load(args.input)
    if not 0 <= args.prop < len(props):
        print(f"japdr: --prop {args.prop} out of range", file=sys.stderr)
        return EXIT_USAGE
    for i in args.assume:
        if not 0 <= i < len(props) or i == args.prop:
            print(f"japdr: --assume index {i} invalid", file=sys.stderr)
            return EXIT_USAGE
    target = props[args.prop]
    assumed = [props[i] for i in args.assume]
    t0 = time.monotonic()
    result = bmc(circuit, target, assumed, max_depth=args.depth, timeout_s=args.timeout)
    wall = time.monotonic() - t0
    if result.cex is not None:
        print(
            f"counterexample for P{args.prop} at depth {result.cex.depth} "
            f"({result.sat_calls} SAT calls, {wall:.2f}s)"
        )
        if args.witness_dir:
            os.makedirs(args.witness_dir, exist_ok=True)
            path = os.path.join(args.witness_dir, f"b{args.prop}.wit")
            with open(path, "wb") as fh:
                fh.write(emit_witness(args.prop, result.cex, "sat"))
            print(f"witness: {path}")
        return EXIT_OK
    state = "timed out" if result.timed_out else "no counterexample"
    print(
        f"{state} up to depth {result.explored_depth} "
        f"({result.sat_calls} SAT calls, {wall:.2f}s)"
    )
    return EXIT_UNKNOWN if result.timed_out else EXIT_OK


def _cmd_oracle(args) -> int:
    circuit, props = _load(args.input)
    try:
        debug = brute_debug_set(circuit, props, cap_bits=args.cap_bits)
        rows = []
        for i in range(len(props)):
            local = brute_check(circuit, props, i, CheckMode.LOCAL, cap_bits=args.cap_bits)
            global_ = brute_check(circuit, props, i, CheckMode.GLOBAL, cap_bits=args.cap_bits)
            rows.append((i, local, global_))
    except OracleError as exc:
        print(f"japdr: oracle: {exc}", file=sys.stderr)
        return EXIT_PARSE
    any_fail = False
    for i, local, global_ in rows:
        ltxt = "holds" if local.holds else f"fails (depth {local.cex.depth})"
        gtxt = "holds" if global_.holds else f"fails (depth {global_.cex.depth})"
        print(f"P{i}: local {ltxt}; global {gtxt}")
        any_fail = any_fail or not local.holds
    print("debugging set: {" + ", ".join(f"P{i}" for i in sorted(debug)) + "}")
    return EXIT_FAILURES if any_fail else EXIT_OK


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        handler = {
            "check": _cmd_check,
            "gen-counter": _cmd_gen_counter,
            "gen-random": _cmd_gen_random,
            "bmc": _cmd_bmc,
            "oracle": _cmd_oracle,
        }[args.command]
        return handler(args)
    except SystemExit as exc:  # argparse and loader shortcuts
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
