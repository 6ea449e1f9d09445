"""Multi-property verification runs.

Three modes over the same engine. JA mode proves each property locally,
assuming every other expected-to-hold property on non-final frames; the
properties that still fail form the debugging set, and if nothing fails
the local proofs jointly imply the global claim, so every verdict is
upgraded. Joint mode conjoins the outstanding properties into one
aggregate check and peels off whatever each counterexample refutes.
Separate-global mode checks each property alone with no assumptions,
the baseline the other two are measured against.

Expected-to-fail properties are handled after the main pass, always
assuming the full expected-to-hold set and never each other. A found
counterexample then demonstrates the failure without breaking any
expected behavior before its final frame; a proof instead is flagged,
the expectation was wrong.

Counterexamples produced under ignore-mode lifting may violate an
assumed property mid-trace. Every trace is replayed; a spurious one
triggers a single retry with respect-mode lifting, which cannot repeat
the artifact. Proofs built on seeded clauses are always re-certified on
fresh solvers, and a certificate rejection drops the seeds and re-runs,
so clause re-use can never manufacture a verdict.
"""

from __future__ import annotations

import enum
import os
import time
from dataclasses import dataclass, field

from .aiger import circuit_fingerprint
from .circuit import (
    AndGate,
    Circuit,
    Counterexample,
    Literal,
    PropertyKind,
    PropertySpec,
    cone_latches,
    eval_circuit,
    eval_literal,
    replay_trace,
)
from .clausedb import ClauseDbError, ClauseRecord, append, load, seeds_for_context
from .pdr import PdrError, PdrOptions, PdrStats, PdrStatus, certify, check_property


class Mode(enum.Enum):
    JA = "ja"
    JOINT = "joint"
    SEPARATE_GLOBAL = "separate-global"


class VerdictStatus(enum.Enum):
    HOLDS_LOCAL = "HoldsLocal"
    FAILS_LOCAL = "FailsLocal"
    HOLDS_GLOBAL = "HoldsGlobal"
    FAILS_GLOBAL = "FailsGlobal"
    ETF_CONFIRMED = "EtfConfirmed"
    ETF_HOLDS_LOCAL = "EtfHoldsLocal"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class TaskOptions:
    reuse_clauses: bool = False
    clause_db: str | None = None
    lifting: str = "ignore"  # starting mode; "respect" forecloses spurious cexs
    per_prop_timeout_s: float | None = None
    total_timeout_s: float | None = None
    order: object = None  # None (given order), "easy-first", or explicit indices
    certify: bool = True
    max_frames: int | None = None
    conflict_budget: int | None = None


@dataclass(frozen=True)
class VerificationTask:
    circuit: Circuit
    properties: tuple[PropertySpec, ...]
    mode: Mode
    options: TaskOptions = field(default_factory=TaskOptions)

    def __post_init__(self):
        object.__setattr__(self, "properties", tuple(self.properties))
        opts = self.options
        for name in ("per_prop_timeout_s", "total_timeout_s"):
            value = getattr(opts, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive")
        if opts.lifting not in ("ignore", "respect"):
            raise ValueError(f"unknown lifting mode {opts.lifting!r}")
        order = opts.order
        if order is not None and order != "easy-first":
            eth = {p.index for p in self.eth_properties}
            if sorted(order) != sorted(eth):
                raise ValueError(
                    f"order {list(order)} is not a permutation of {sorted(eth)}"
                )

    @property
    def eth_properties(self) -> tuple[PropertySpec, ...]:
        return tuple(p for p in self.properties if p.kind is PropertyKind.ETH)

    @property
    def etf_properties(self) -> tuple[PropertySpec, ...]:
        return tuple(p for p in self.properties if p.kind is PropertyKind.ETF)


@dataclass
class Verdict:
    property_index: int
    status: VerdictStatus
    evidence: object = None  # clause count on holds, Counterexample on fails
    wall_s: float = 0.0
    frames: int = 0
    sat_calls: int = 0
    certified: bool = False
    retried_respect: bool = False
    seeds_used: int = 0
    unexpected: bool = False


@dataclass(frozen=True)
class RunTotals:
    wall_s: float
    sat_calls: int
    clauses_learned: int


@dataclass(frozen=True)
class RunReport:
    task: VerificationTask
    verdicts: tuple[Verdict, ...]  # property-index order
    debugging_set: tuple[int, ...]
    conclusion: str
    totals: RunTotals


def ordered_eth(task: VerificationTask) -> list[PropertySpec]:
    """ETH properties in check order: given order, an explicit permutation,
    or smallest cone of influence first."""
    eth = list(task.eth_properties)
    order = task.options.order
    if order is None:
        return eth
    if order == "easy-first":
        return sorted(eth, key=lambda p: (len(cone_latches(task.circuit, p.bad)), p.index))
    by_index = {p.index: p for p in eth}
    return [by_index[i] for i in order]


class _SingleOutcome:
    __slots__ = ("kind", "cex", "invariant", "stats", "frames",
                 "certified", "retried", "wall_s")

    def __init__(self):
        self.kind = "unknown"
        self.cex = None
        self.invariant = None
        self.stats = PdrStats()
        self.frames = 0
        self.certified = False
        self.retried = False
        self.wall_s = 0.0


def _check_one(
    circuit: Circuit,
    target: PropertySpec,
    ctx,
    seeds,
    opts: TaskOptions,
    prop_deadline: float | None,
) -> _SingleOutcome:
    """One property, end to end: solve, replay, retry once on a spurious
    trace, certify proofs. The deadline bounds all of it together."""
    res = _SingleOutcome()
    t0 = time.monotonic()
    respect = opts.lifting == "respect"
    seeds = tuple(seeds)
    try:
        while True:
            remaining = None
            if prop_deadline is not None:
                remaining = prop_deadline - time.monotonic()
                if remaining <= 0:
                    return res
            out = check_property(
                circuit,
                target,
                ctx,
                seeds,
                PdrOptions(
                    respect_constraints=respect,
                    timeout_s=remaining,
                    conflict_budget=opts.conflict_budget,
                    max_frames=opts.max_frames,
                ),
            )
            res.stats.sat_calls += out.stats.sat_calls
            res.stats.clauses_learned += out.stats.clauses_learned
            res.frames = out.stats.frames_opened
            if out.status is PdrStatus.EXHAUSTED:
                return res
            if out.status is PdrStatus.FAILS:
                rep = replay_trace(circuit, out.cex, target, ctx)
                if not rep.valid:
                    raise PdrError(
                        f"engine returned an invalid trace for property {target.index}"
                    )
                if rep.spurious:
                    if respect:
                        raise PdrError(
                            "respect-mode lifting produced a spurious counterexample"
                        )
                    res.retried = True
                    respect = True
                    continue
                res.kind = "fails"
                res.cex = out.cex
                return res
            # HOLDS
            invariant = out.invariant
            if opts.certify or seeds:
                try:
                    ok = certify(
                        circuit, ctx, invariant, target,
                        stats=res.stats, deadline=prop_deadline,
                    )
                except PdrError:
                    return res  # budget ran out inside certification
                if not ok:
                    if seeds:
                        # seed set let an unsound proof through; drop it
                        seeds = ()
                        continue
                    raise PdrError(
                        f"certification rejected the proof of property {target.index}"
                    )
                res.certified = True
            res.kind = "holds"
            res.invariant = invariant
            return res
    finally:
        res.wall_s = time.monotonic() - t0


def _prop_deadline(opts: TaskOptions, total_deadline: float | None) -> float | None:
    now = time.monotonic()
    deadline = total_deadline
    if opts.per_prop_timeout_s is not None:
        local = now + opts.per_prop_timeout_s
        deadline = local if deadline is None else min(deadline, local)
    return deadline


def _verdict_from(
    prop: PropertySpec,
    res: _SingleOutcome,
    holds: VerdictStatus,
    fails: VerdictStatus,
    *,
    seeds_used: int = 0,
    unexpected_on_holds: bool = False,
) -> Verdict:
    if res.kind == "holds":
        status, evidence = holds, len(res.invariant)
    elif res.kind == "fails":
        status, evidence = fails, res.cex
    else:
        status, evidence = VerdictStatus.UNKNOWN, None
    return Verdict(
        property_index=prop.index,
        status=status,
        evidence=evidence,
        wall_s=res.wall_s,
        frames=res.frames,
        sat_calls=res.stats.sat_calls,
        certified=res.certified,
        retried_respect=res.retried,
        seeds_used=seeds_used,
        unexpected=unexpected_on_holds and res.kind == "holds",
    )


class _ClauseStore:
    """In-memory record pool plus the optional backing file.

    Records learned earlier in the run seed later properties; the file,
    when configured, is written through on every harvest so nothing is
    lost to an abort. A single writer serializes appends.
    """

    def __init__(self, task: VerificationTask):
        opts = task.options
        self.enabled = opts.reuse_clauses
        self.path = opts.clause_db if self.enabled else None
        self.fingerprint = circuit_fingerprint(task.circuit) if self.enabled else ""
        self.records: list[ClauseRecord] = []
        if self.path and os.path.exists(self.path):
            self.records.extend(load(self.path, self.fingerprint))

    def seeds(self, circuit, ctx, deadline, stats) -> tuple[tuple[int, ...], ...]:
        if not self.enabled or not self.records:
            return ()
        try:
            return seeds_for_context(
                self.records, circuit, self.fingerprint, ctx,
                deadline=deadline, stats=stats,
            )
        except ClauseDbError:
            return ()  # filtering budget ran out; a seedless check is always sound

    def harvest(self, prop: PropertySpec, ctx, invariant) -> None:
        if not self.enabled or not invariant:
            return
        context = tuple(sorted(p.index for p in ctx))
        new = [
            ClauseRecord(clause, prop.index, context, self.fingerprint)
            for clause in invariant
        ]
        self.records.extend(new)
        if self.path:
            append(new, self.path)


def _finish(task, verdicts_by_index, t0, conclusion_eth) -> RunReport:
    verdicts = tuple(verdicts_by_index[i] for i in sorted(verdicts_by_index))
    debugging = tuple(
        v.property_index for v in verdicts if v.status is VerdictStatus.FAILS_LOCAL
    )
    totals = RunTotals(
        wall_s=time.monotonic() - t0,
        sat_calls=sum(v.sat_calls for v in verdicts),
        clauses_learned=sum(
            v.evidence for v in verdicts if isinstance(v.evidence, int)
        ),
    )
    return RunReport(task, verdicts, debugging, conclusion_eth, totals)


def _conclusion(task, verdicts_by_index) -> str:
    eth = [verdicts_by_index[p.index] for p in task.eth_properties]
    counts = {}
    for v in verdicts_by_index.values():
        counts[v.status] = counts.get(v.status, 0) + 1
    if eth and all(v.status is VerdictStatus.HOLDS_GLOBAL for v in eth):
        head = "all expected-to-hold properties hold globally"
    elif any(v.status is VerdictStatus.UNKNOWN for v in eth):
        head = "incomplete: some properties ran out of budget"
    else:
        failing = sorted(
            v.property_index for v in eth
            if v.status in (VerdictStatus.FAILS_LOCAL, VerdictStatus.FAILS_GLOBAL)
        )
        if failing:
            head = "failing properties: " + ", ".join(f"P{i}" for i in failing)
        else:
            head = "no expected-to-hold properties"
    parts = [f"{n} {s.value}" for s, n in sorted(counts.items(), key=lambda kv: kv[0].value)]
    return head + " (" + ", ".join(parts) + ")"


def run_ja(task: VerificationTask) -> RunReport:
    """Local proofs under mutual assumption.

    Each expected-to-hold property is checked assuming all the others.
    The still-failing ones form the debugging set. When every local
    check succeeds the projected systems compose, so all verdicts
    become global.
    """
    if task.mode is not Mode.JA:
        raise ValueError("task mode is not JA")
    t0 = time.monotonic()
    total_deadline = (
        t0 + task.options.total_timeout_s if task.options.total_timeout_s else None
    )
    circuit = task.circuit
    eth = task.eth_properties
    store = _ClauseStore(task)
    verdicts: dict[int, Verdict] = {}
    for prop in ordered_eth(task):
        prop_deadline = _prop_deadline(task.options, total_deadline)
        ctx = tuple(p for p in eth if p.index != prop.index)
        pre = PdrStats()
        seeds = store.seeds(circuit, ctx, prop_deadline, pre)
        res = _check_one(circuit, prop, ctx, seeds, task.options, prop_deadline)
        res.stats.sat_calls += pre.sat_calls
        verdicts[prop.index] = _verdict_from(
            prop, res, VerdictStatus.HOLDS_LOCAL, VerdictStatus.FAILS_LOCAL,
            seeds_used=len(seeds),
        )
        store.harvest(prop, ctx, res.invariant)
    if eth and all(
        verdicts[p.index].status is VerdictStatus.HOLDS_LOCAL for p in eth
    ):
        for p in eth:
            verdicts[p.index].status = VerdictStatus.HOLDS_GLOBAL
    _run_etf(task, verdicts, store, total_deadline)
    return _finish(task, verdicts, t0, _conclusion(task, verdicts))


def run_separate_global(task: VerificationTask) -> RunReport:
    """Each property alone against the unrestricted system."""
    if task.mode is not Mode.SEPARATE_GLOBAL:
        raise ValueError("task mode is not SeparateGlobal")
    t0 = time.monotonic()
    total_deadline = (
        t0 + task.options.total_timeout_s if task.options.total_timeout_s else None
    )
    circuit = task.circuit
    store = _ClauseStore(task)
    verdicts: dict[int, Verdict] = {}
    for prop in ordered_eth(task):
        prop_deadline = _prop_deadline(task.options, total_deadline)
        # only globally valid records may seed a global check; a local
        # record's invariance was earned under assumptions absent here
        seeds = ()
        if store.enabled:
            seen = set()
            picked = []
            for rec in store.records:
                if (
                    rec.fingerprint == store.fingerprint
                    and rec.context == ()
                    and rec.clause not in seen
                ):
                    seen.add(rec.clause)
                    picked.append(rec.clause)
            seeds = tuple(picked)
        res = _check_one(circuit, prop, (), seeds, task.options, prop_deadline)
        verdicts[prop.index] = _verdict_from(
            prop, res, VerdictStatus.HOLDS_GLOBAL, VerdictStatus.FAILS_GLOBAL,
            seeds_used=len(seeds),
        )
        store.harvest(prop, (), res.invariant)
    _run_etf(task, verdicts, store, total_deadline)
    return _finish(task, verdicts, t0, _conclusion(task, verdicts))


def _split(total: int, ways: int) -> list[int]:
    """Integer shares that sum exactly to `total`."""
    base, extra = divmod(total, ways)
    return [base + (1 if i < extra else 0) for i in range(ways)]


def aggregate_bad(circuit: Circuit, props) -> tuple[Circuit, PropertySpec]:
    """Circuit extended with a gate tree for `any of these bads fires`.

    Latches, inputs, and existing gates are untouched, so traces carry
    over between the two circuits frame for frame.
    """
    props = list(props)
    if not props:
        raise ValueError("aggregate of no properties")
    ands = list(circuit.ands)
    nxt = circuit.num_vars
    acc = ~props[0].bad
    for p in props[1:]:
        ands.append(AndGate(nxt, acc, ~p.bad))
        acc = Literal(nxt)
        nxt += 1
    extended = Circuit(
        circuit.num_inputs, circuit.latches, tuple(ands),
        circuit.bads, circuit.constraints,
    )
    index = max((p.index for p in props), default=0) + 1
    return extended, PropertySpec(index, ~acc, PropertyKind.ETH)


def run_joint(task: VerificationTask) -> RunReport:
    """One aggregate check over the conjunction, repeated.

    Each counterexample refutes every property whose bad fires on its
    final frame; those leave the aggregate and the rest is re-checked,
    until a proof covers the survivors or the budget runs out.
    """
    if task.mode is not Mode.JOINT:
        raise ValueError("task mode is not Joint")
    t0 = time.monotonic()
    total_deadline = (
        t0 + task.options.total_timeout_s if task.options.total_timeout_s else None
    )
    circuit = task.circuit
    store = _ClauseStore(task)
    verdicts: dict[int, Verdict] = {}
    unsolved = list(ordered_eth(task))
    while unsolved:
        prop_deadline = _prop_deadline(task.options, total_deadline)
        if len(unsolved) == 1:
            check_circuit, agg = circuit, unsolved[0]
        else:
            check_circuit, agg = aggregate_bad(circuit, unsolved)
        res = _check_one(check_circuit, agg, (), (), task.options, prop_deadline)
        if res.kind == "unknown":
            calls = _split(res.stats.sat_calls, len(unsolved))
            for p, c in zip(unsolved, calls):
                verdicts[p.index] = Verdict(
                    p.index, VerdictStatus.UNKNOWN,
                    wall_s=res.wall_s / len(unsolved), frames=res.frames,
                    sat_calls=c,
                )
            break
        if res.kind == "holds":
            calls = _split(res.stats.sat_calls, len(unsolved))
            for p, c in zip(unsolved, calls):
                verdicts[p.index] = Verdict(
                    p.index, VerdictStatus.HOLDS_GLOBAL,
                    evidence=len(res.invariant),
                    wall_s=res.wall_s / len(unsolved), frames=res.frames,
                    sat_calls=c, certified=res.certified,
                )
            break
        final = res.cex.frames[-1]
        values = eval_circuit(circuit, final)
        confirmed = [p for p in unsolved if eval_literal(values, p.bad)]
        if not confirmed:
            raise PdrError("aggregate counterexample refutes no property")
        calls = _split(res.stats.sat_calls, len(confirmed))
        for p, c in zip(confirmed, calls):
            verdicts[p.index] = Verdict(
                p.index, VerdictStatus.FAILS_GLOBAL,
                evidence=Counterexample(res.cex.frames, p.index),
                wall_s=res.wall_s / len(confirmed), frames=res.frames,
                sat_calls=c,
            )
        unsolved = [p for p in unsolved if p not in confirmed]
    _run_etf(task, verdicts, store, total_deadline)
    return _finish(task, verdicts, t0, _conclusion(task, verdicts))


def _run_etf(task, verdicts, store: _ClauseStore, total_deadline) -> None:
    """Hunt counterexamples for the expected-to-fail properties.

    Every expected-to-hold property is assumed, whatever its own verdict
    came out as; other expected-to-fail properties are not. A proof here
    contradicts the expectation and is flagged rather than celebrated.
    """
    eth = task.eth_properties
    for prop in task.etf_properties:
        prop_deadline = _prop_deadline(task.options, total_deadline)
        pre = PdrStats()
        seeds = store.seeds(task.circuit, eth, prop_deadline, pre)
        res = _check_one(task.circuit, prop, eth, seeds, task.options, prop_deadline)
        res.stats.sat_calls += pre.sat_calls
        verdicts[prop.index] = _verdict_from(
            prop, res, VerdictStatus.ETF_HOLDS_LOCAL, VerdictStatus.ETF_CONFIRMED,
            seeds_used=len(seeds), unexpected_on_holds=True,
        )
        store.harvest(prop, eth, res.invariant)


def handle_etf(task: VerificationTask, eth_verdicts=()) -> tuple[Verdict, ...]:
    """Standalone expected-to-fail pass.

    `eth_verdicts` is accepted for callers that ran the main pass first;
    the assumptions do not depend on it, every expected-to-hold property
    is assumed regardless of how its own check went.
    """
    total_deadline = (
        time.monotonic() + task.options.total_timeout_s
        if task.options.total_timeout_s
        else None
    )
    verdicts: dict[int, Verdict] = {}
    _run_etf(task, verdicts, _ClauseStore(task), total_deadline)
    return tuple(verdicts[i] for i in sorted(verdicts))


def run(task: VerificationTask) -> RunReport:
    """Dispatch on the task's mode."""
    if task.mode is Mode.JA:
        return run_ja(task)
    if task.mode is Mode.JOINT:
        return run_joint(task)
    return run_separate_global(task)
