"""Core model: and-inverter circuits, properties, traces, and their semantics.

A circuit is a flat AIG over densely numbered variables: 0 is the constant,
then inputs, then latches, then AND gate outputs in topological order.
Property satisfaction is defined over *frames* (a latch valuation plus an
input valuation), because bad literals may read inputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


@dataclass(frozen=True, order=True)
class Literal:
    """A possibly negated variable. var 0 is the constant:
    Literal(0) is TRUE, Literal(0, negated=True) is FALSE."""

    var: int
    negated: bool = False

    def __invert__(self) -> "Literal":
        return Literal(self.var, not self.negated)

    def __repr__(self) -> str:
        return f"{'~' if self.negated else ''}v{self.var}"


TRUE = Literal(0)
FALSE = Literal(0, True)


@dataclass(frozen=True)
class Latch:
    """State element: next-state function as a literal, reset value 0 or 1."""

    var: int
    next: Literal
    init: int = 0


@dataclass(frozen=True)
class AndGate:
    out: int
    left: Literal
    right: Literal


class PropertyKind(enum.Enum):
    ETH = "eth"  # expected to hold
    ETF = "etf"  # expected to fail


@dataclass(frozen=True)
class PropertySpec:
    """One safety property: the bad literal is true on a violating frame."""

    index: int
    bad: Literal
    kind: PropertyKind = PropertyKind.ETH


@dataclass(frozen=True)
class TraceFrame:
    """One step of a trace: latch values plus the inputs applied there."""

    latch_values: tuple[int, ...]
    input_values: tuple[int, ...]


@dataclass(frozen=True)
class Counterexample:
    frames: tuple[TraceFrame, ...]
    violated_property: int

    def __post_init__(self):
        if not self.frames:
            raise ValueError("counterexample needs at least one frame")

    @property
    def depth(self) -> int:
        """Number of transitions (frames minus one)."""
        return len(self.frames) - 1


@dataclass(frozen=True)
class Circuit:
    """Immutable AIG with bad and constraint literals.

    Variables are dense: 1..num_inputs are inputs, the next block are
    latches, then AND outputs; gates only reference earlier variables.
    """

    num_inputs: int
    latches: tuple[Latch, ...]
    ands: tuple[AndGate, ...]
    bads: tuple[Literal, ...] = ()
    constraints: tuple[Literal, ...] = ()

    def __post_init__(self):
        n = 1 + self.num_inputs
        for pos, latch in enumerate(self.latches):
            if latch.var != n + pos:
                raise ValueError(f"latch {pos} must use var {n + pos}, got {latch.var}")
            if latch.init not in (0, 1):
                raise ValueError(f"latch {pos} init must be 0 or 1, got {latch.init!r}")
        n += len(self.latches)
        for pos, gate in enumerate(self.ands):
            if gate.out != n + pos:
                raise ValueError(f"gate {pos} must define var {n + pos}, got {gate.out}")
            for operand in (gate.left, gate.right):
                if not 0 <= operand.var < gate.out:
                    raise ValueError(f"gate {gate.out} reads later var {operand.var}")
        total = n + len(self.ands)
        for lit in (*self.bads, *self.constraints, *(l.next for l in self.latches)):
            if not 0 <= lit.var < total:
                raise ValueError(f"literal {lit} references undefined var")

    @property
    def num_latches(self) -> int:
        return len(self.latches)

    @property
    def num_vars(self) -> int:
        return 1 + self.num_inputs + len(self.latches) + len(self.ands)

    @property
    def input_vars(self) -> range:
        return range(1, 1 + self.num_inputs)

    @property
    def latch_vars(self) -> range:
        base = 1 + self.num_inputs
        return range(base, base + len(self.latches))

    def init_state(self) -> tuple[int, ...]:
        return tuple(l.init for l in self.latches)


def eval_literal(values, lit: Literal) -> int:
    return values[lit.var] ^ int(lit.negated)


def eval_circuit(circuit: Circuit, frame: TraceFrame) -> list[int]:
    """Evaluate every variable under one frame; index result by variable."""
    if len(frame.latch_values) != circuit.num_latches:
        raise ValueError(
            f"frame has {len(frame.latch_values)} latch values, circuit has {circuit.num_latches}"
        )
    if len(frame.input_values) != circuit.num_inputs:
        raise ValueError(
            f"frame has {len(frame.input_values)} input values, circuit has {circuit.num_inputs}"
        )
    values = [0] * circuit.num_vars
    values[0] = 1
    for var, bit in zip(circuit.input_vars, frame.input_values):
        values[var] = bit & 1
    for var, bit in zip(circuit.latch_vars, frame.latch_values):
        values[var] = bit & 1
    for gate in circuit.ands:
        values[gate.out] = eval_literal(values, gate.left) & eval_literal(values, gate.right)
    return values


def eval_transition(circuit: Circuit, frame: TraceFrame) -> tuple[int, ...]:
    """Next latch values reached from `frame`."""
    values = eval_circuit(circuit, frame)
    return tuple(eval_literal(values, l.next) for l in circuit.latches)


def property_violated(circuit: Circuit, frame: TraceFrame, prop: PropertySpec) -> bool:
    return bool(eval_literal(eval_circuit(circuit, frame), prop.bad))


def frame_satisfies(circuit: Circuit, frame: TraceFrame, props) -> bool:
    """True when no property in `props` is violated on the frame."""
    values = eval_circuit(circuit, frame)
    return all(not eval_literal(values, p.bad) for p in props)


def constraints_hold(circuit: Circuit, frame: TraceFrame) -> bool:
    values = eval_circuit(circuit, frame)
    return all(eval_literal(values, c) for c in circuit.constraints)


def is_valid_local_transition(
    circuit: Circuit, props, frame: TraceFrame, next_latches: tuple[int, ...]
) -> bool:
    """Transition relation projected onto `props`.

    A frame satisfying every property steps normally; a violating frame
    keeps only its self-loop (latches frozen, inputs unconstrained).
    """
    if frame_satisfies(circuit, frame, props):
        return eval_transition(circuit, frame) == tuple(next_latches)
    return tuple(frame.latch_values) == tuple(next_latches)


@dataclass(frozen=True)
class ReplayResult:
    """Outcome of simulating a counterexample against the circuit."""

    initialized: bool
    transitions_consistent: bool
    final_violates_target: bool
    violated_constraints: tuple[tuple[int, int], ...]  # (frame index, property index)
    circuit_constraints_ok: bool

    @property
    def valid(self) -> bool:
        return self.initialized and self.transitions_consistent and self.final_violates_target

    @property
    def spurious(self) -> bool:
        """Valid trace that breaks a constraint property before the final frame."""
        return self.valid and bool(self.violated_constraints)


def replay_trace(
    circuit: Circuit,
    cex: Counterexample,
    target: PropertySpec,
    constraint_props=(),
) -> ReplayResult:
    """Re-simulate a counterexample and report exactly what it establishes.

    Constraint properties and the AIGER constraint section are checked on
    every frame but the last; the final frame only needs to violate the
    target.
    """
    frames = cex.frames
    initialized = tuple(frames[0].latch_values) == circuit.init_state()
    transitions_ok = True
    for here, there in zip(frames, frames[1:]):
        if eval_transition(circuit, here) != tuple(there.latch_values):
            transitions_ok = False
            break
    final_bad = property_violated(circuit, frames[-1], target)
    broken = []
    c_ok = True
    for i, frame in enumerate(frames[:-1]):
        values = eval_circuit(circuit, frame)
        for prop in constraint_props:
            if eval_literal(values, prop.bad):
                broken.append((i, prop.index))
        if any(not eval_literal(values, c) for c in circuit.constraints):
            c_ok = False
    return ReplayResult(initialized, transitions_ok, final_bad, tuple(broken), c_ok)


def cone_latches(circuit: Circuit, lit: Literal) -> set[int]:
    """Latch positions whose values can influence `lit` across any number
    of steps (structural cone of influence, closed under next-state)."""
    gate_by_out = {g.out: g for g in circuit.ands}
    latch_pos = {l.var: i for i, l in enumerate(circuit.latches)}
    seen_vars: set[int] = set()
    found: set[int] = set()
    work = [lit.var]
    while work:
        var = work.pop()
        if var in seen_vars:
            continue
        seen_vars.add(var)
        if var in latch_pos:
            pos = latch_pos[var]
            if pos not in found:
                found.add(pos)
                work.append(circuit.latches[pos].next.var)
        elif var in gate_by_out:
            gate = gate_by_out[var]
            work.append(gate.left.var)
            work.append(gate.right.var)
    return found


class CircuitBuilder:
    """Mutable helper for constructing dense circuits gate by gate."""

    def __init__(self, num_inputs: int, num_latches: int, init=None):
        self.num_inputs = num_inputs
        self.num_latches = num_latches
        self._init = list(init) if init is not None else [0] * num_latches
        self._next: list[Literal | None] = [None] * num_latches
        self._gates: list[tuple[Literal, Literal]] = []
        self.bads: list[Literal] = []
        self.constraints: list[Literal] = []

    def input_lit(self, pos: int) -> Literal:
        if not 0 <= pos < self.num_inputs:
            raise IndexError(pos)
        return Literal(1 + pos)

    def latch_lit(self, pos: int) -> Literal:
        if not 0 <= pos < self.num_latches:
            raise IndexError(pos)
        return Literal(1 + self.num_inputs + pos)

    def and_(self, a: Literal, b: Literal) -> Literal:
        # constant folding keeps generated circuits small
        if a == FALSE or b == FALSE or a == ~b:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE or a == b:
            return a
        self._gates.append((a, b))
        return Literal(1 + self.num_inputs + self.num_latches + len(self._gates) - 1)

    def or_(self, a: Literal, b: Literal) -> Literal:
        return ~self.and_(~a, ~b)

    def xor(self, a: Literal, b: Literal) -> Literal:
        return self.or_(self.and_(a, ~b), self.and_(~a, b))

    def mux(self, sel: Literal, when_true: Literal, when_false: Literal) -> Literal:
        return self.or_(self.and_(sel, when_true), self.and_(~sel, when_false))

    def conj(self, lits) -> Literal:
        out = TRUE
        for lit in lits:
            out = self.and_(out, lit)
        return out

    def disj(self, lits) -> Literal:
        out = FALSE
        for lit in lits:
            out = self.or_(out, lit)
        return out

    def set_next(self, pos: int, lit: Literal) -> None:
        self._next[pos] = lit

    def build(self) -> Circuit:
        missing = [i for i, n in enumerate(self._next) if n is None]
        if missing:
            raise ValueError(f"latches without next-state function: {missing}")
        base = 1 + self.num_inputs
        latches = tuple(
            Latch(base + i, self._next[i], self._init[i]) for i in range(self.num_latches)
        )
        gate_base = base + self.num_latches
        ands = tuple(
            AndGate(gate_base + i, a, b) for i, (a, b) in enumerate(self._gates)
        )
        return Circuit(
            self.num_inputs,
            latches,
            ands,
            tuple(self.bads),
            tuple(self.constraints),
        )
