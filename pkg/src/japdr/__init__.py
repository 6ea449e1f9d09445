"""Multi-property safety checking for and-inverter circuits.

The package proves or refutes each safety property of a transition
system, either on its own or locally, assuming the other properties
hold on earlier frames. The local flavor never discharges its
assumptions: the properties failing even under them form the debugging
set, the place repair has to start.
"""

from .aiger import (
    AigerError,
    build_counter,
    circuit_fingerprint,
    emit_ascii,
    emit_witness,
    gen_counter,
    gen_random_circuit,
    parse,
    parse_file,
)
from .circuit import (
    AndGate,
    Circuit,
    CircuitBuilder,
    Counterexample,
    Latch,
    Literal,
    PropertyKind,
    PropertySpec,
    TraceFrame,
    replay_trace,
)
from .clausedb import ClauseDbError, ClauseRecord, filter_invariant, load, save
from .oracle import CheckMode, OracleError, bmc, brute_check, brute_debug_set, reachable
from .orchestrator import (
    Mode,
    RunReport,
    TaskOptions,
    Verdict,
    VerdictStatus,
    VerificationTask,
    handle_etf,
    run,
    run_ja,
    run_joint,
    run_separate_global,
)
from .pdr import PdrError, PdrOptions, PdrOutcome, PdrStats, PdrStatus, certify, check_property
from .report import REPORT_SCHEMA, exit_code, format_report, validate_report_json

__version__ = "0.1.0"

__all__ = [
    "AigerError",
    "AndGate",
    "CheckMode",
    "Circuit",
    "CircuitBuilder",
    "ClauseDbError",
    "ClauseRecord",
    "Counterexample",
    "Latch",
    "Literal",
    "Mode",
    "OracleError",
    "PdrError",
    "PdrOptions",
    "PdrOutcome",
    "PdrStats",
    "PdrStatus",
    "PropertyKind",
    "PropertySpec",
    "REPORT_SCHEMA",
    "RunReport",
    "TaskOptions",
    "TraceFrame",
    "Verdict",
    "VerdictStatus",
    "VerificationTask",
    "bmc",
    "brute_check",
    "brute_debug_set",
    "build_counter",
    "certify",
    "check_property",
    "circuit_fingerprint",
    "emit_ascii",
    "emit_witness",
    "exit_code",
    "filter_invariant",
    "format_report",
    "gen_counter",
    "gen_random_circuit",
    "handle_etf",
    "load",
    "parse",
    "parse_file",
    "reachable",
    "replay_trace",
    "run",
    "run_ja",
    "run_joint",
    "run_separate_global",
    "save",
    "validate_report_json",
]
