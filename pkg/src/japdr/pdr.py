"""Property-directed reachability over a constrained transition relation.

Frames F_0 .. F_K over-approximate the states reachable in as many steps
when every step is taken from a frame satisfying the constraint section
and all constraint properties (and the target itself). F_0 is the reset
state, handled as solver assumptions; later frames are clause sets in
delta encoding, each clause owned by the highest level it holds at plus
an extra level for clauses proven inductive outright.

Cubes and clauses over latches are tuples of packed ints: 2*pos says
"latch pos is 1", 2*pos+1 says "latch pos is 0". A clause is the
disjunction of its literals, a cube the conjunction.

Bad outputs may read primary inputs, so "the property holds in a state"
means no input valuation fires bad there; the final frame of a
counterexample is exempt from every constraint.
"""

from __future__ import annotations

import enum
import heapq
import time
from dataclasses import dataclass, field

from .circuit import (
    Circuit,
    Counterexample,
    PropertySpec,
    TraceFrame,
    constraints_hold,
    eval_transition,
    frame_satisfies,
    property_violated,
)
from .encode import StepEncoding
from .sat import Solver, Status, neg, pos


class PdrError(Exception):
    pass


# ----------------------------------------------------------- latch literals


def latch_literal(latch_pos: int, value: int) -> int:
    return 2 * latch_pos + (0 if value else 1)


def literal_latch(lit: int) -> int:
    return lit >> 1


def literal_value(lit: int) -> int:
    return 1 - (lit & 1)


def negate_lits(lits) -> tuple[int, ...]:
    """A cube's negation as a clause (and the other way round)."""
    return tuple(sorted(l ^ 1 for l in lits))


def cube_of_state(state) -> tuple[int, ...]:
    return tuple(latch_literal(i, v) for i, v in enumerate(state))


# ------------------------------------------------------------------- types


class PdrStatus(enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    EXHAUSTED = "exhausted"


@dataclass
class PdrStats:
    frames_opened: int = 0
    sat_calls: int = 0
    clauses_learned: int = 0


@dataclass
class PdrOptions:
    respect_constraints: bool = False  # lifting mode; cexs may need replay otherwise
    timeout_s: float | None = None
    conflict_budget: int | None = None
    max_frames: int | None = None


@dataclass
class PdrOutcome:
    status: PdrStatus
    stats: PdrStats
    invariant: tuple[tuple[int, ...], ...] | None = None  # on HOLDS
    cex: Counterexample | None = None  # on FAILS


@dataclass
class ProofObligation:
    cube: tuple[int, ...]
    level: int
    succ: "ProofObligation | None"  # toward the bad frame
    inputs: tuple[int, ...]
    seq: int = 0


class _Exhausted(Exception):
    pass


class _CexFound(Exception):
    def __init__(self, ob: ProofObligation):
        self.ob = ob


# ------------------------------------------------------------------ engine


class PdrEngine:
    """One property, one context, three solvers.

    The step solver carries the transition relation with the constraint
    section, every constraint property and the target forced clean on the
    present-state copy. The bad solver carries only the present-state
    copy with the target's bad output forced, for frame queries. The lift
    solver carries an unconstrained copy for unsat-core lifting.
    """

    def __init__(
        self,
        circuit: Circuit,
        target: PropertySpec,
        constraint_props=(),
        seed_clauses=(),
        options: PdrOptions | None = None,
    ):
        self.circuit = circuit
        self.target = target
        self.constraint_props = tuple(constraint_props)
        if any(p.index == target.index for p in self.constraint_props):
            raise ValueError("target cannot appear among its own constraints")
        self.options = options or PdrOptions()
        self.stats = PdrStats(frames_opened=1)
        self.init = circuit.init_state()
        self._nl = circuit.num_latches

        self._step = Solver()
        self._enc_step = StepEncoding(self._step, circuit)
        for constr in circuit.constraints:
            self._step.add_clause([self._enc_step.lit(constr)])
        for prop in (target, *self.constraint_props):
            self._step.add_clause([self._enc_step.lit(prop.bad) ^ 1])

        self._bad = Solver()
        self._enc_bad = StepEncoding(self._bad, circuit)
        self._bad.add_clause([self._enc_bad.lit(target.bad)])

        self._lift = Solver()
        self._enc_lift = StepEncoding(self._lift, circuit)

        # owned[j] for j >= 1; level 0 is the reset cube, never a clause set
        self._owned: list[list[tuple[int, ...]]] = [[], []]
        self._acts_step = [0, pos(self._step.new_var())]
        self._acts_bad = [0, pos(self._bad.new_var())]
        self._inf: list[tuple[int, ...]] = []
        self._act_inf_step = pos(self._step.new_var())
        self._act_inf_bad = pos(self._bad.new_var())
        self.frontier = 1

        for clause in seed_clauses:
            cl = tuple(sorted(clause))
            if not cl or any(l >= 2 * self._nl for l in cl):
                raise ValueError(f"seed clause out of range: {clause}")
            if not any(self._true_at_init(l) for l in cl):
                raise ValueError(f"seed clause violates the reset state: {clause}")
            self._store_clause(cl, None)

        self._obq: list[tuple[int, int, ProofObligation]] = []
        self._obseq = 0
        self._deadline: float | None = None
        self._fixpoint_level: int | None = None
        self._invariant: tuple[tuple[int, ...], ...] | None = None
        self._ran = False

    # ------------------------------------------------------------- plumbing

    def _true_at_init(self, lit: int) -> bool:
        return self.init[lit >> 1] == 1 - (lit & 1)

    def _cube_holds_init(self, cube) -> bool:
        """Whether the reset state lies inside the cube."""
        return all(self._true_at_init(l) for l in cube)

    def _store_clause(self, clause: tuple[int, ...], level: int | None) -> None:
        step_lits = [self._enc_step.latch_lit(l >> 1, 1 - (l & 1)) for l in clause]
        bad_lits = [self._enc_bad.latch_lit(l >> 1, 1 - (l & 1)) for l in clause]
        if level is None:
            self._inf.append(clause)
            step_act, bad_act = self._act_inf_step, self._act_inf_bad
        else:
            self._owned[level].append(clause)
            step_act, bad_act = self._acts_step[level], self._acts_bad[level]
        self._step.add_clause([step_act ^ 1, *step_lits])
        self._bad.add_clause([bad_act ^ 1, *bad_lits])

    def _open_level(self, level: int) -> None:
        while len(self._owned) <= level:
            self._owned.append([])
            self._acts_step.append(pos(self._step.new_var()))
            self._acts_bad.append(pos(self._bad.new_var()))

    def _frame_assumps(self, level: int | None, bad_side: bool) -> list[int]:
        acts = self._acts_bad if bad_side else self._acts_step
        inf_act = self._act_inf_bad if bad_side else self._act_inf_step
        enc = self._enc_bad if bad_side else self._enc_step
        if level is None:
            return [inf_act]
        if level == 0:
            return [enc.latch_lit(i, v) for i, v in enumerate(self.init)]
        return [acts[j] for j in range(level, self.frontier + 1)] + [inf_act]

    def _solve(self, solver: Solver, assumptions) -> "object":
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise _Exhausted
        limit = None
        if self.options.conflict_budget is not None:
            used = (
                self._step.n_conflicts
                + self._bad.n_conflicts
                + self._lift.n_conflicts
            )
            limit = self.options.conflict_budget - used
            if limit <= 0:
                raise _Exhausted
        result = solver.solve(assumptions, conflict_limit=limit, deadline=self._deadline)
        self.stats.sat_calls += 1
        if result.status is Status.UNKNOWN:
            raise _Exhausted
        return result

    def _temp_clause(self, solver: Solver, lits) -> int:
        act = pos(solver.new_var())
        solver.add_clause([act ^ 1, *lits])
        return act

    def _drop_temp(self, solver: Solver, act: int) -> None:
        solver.add_clause([act ^ 1])

    # -------------------------------------------------------------- queries

    def _consecution(self, cube, frame_level: int | None, exclude_cube: bool):
        """SAT query for a constrained step from F_frame_level into `cube`.

        Returns (result, pairs) where pairs maps each next-state
        assumption literal back to its cube literal for core extraction.
        With exclude_cube the query is restricted to predecessors outside
        the cube, which is what relative induction asks for.
        """
        enc = self._enc_step
        assumps = self._frame_assumps(frame_level, bad_side=False)
        act = None
        if exclude_cube:
            act = self._temp_clause(
                self._step,
                [enc.latch_lit(l >> 1, l & 1) for l in cube],
            )
            assumps.append(act)
        pairs = [(enc.next_lit(l >> 1) ^ (l & 1), l) for l in cube]
        assumps.extend(sl for sl, _ in pairs)
        try:
            result = self._solve(self._step, assumps)
        finally:
            if act is not None:
                self._drop_temp(self._step, act)
        return result, pairs

    def _core_cube(self, result, pairs, base_cube) -> tuple[int, ...]:
        """Cube literals the unsat core kept, patched to stay off reset."""
        kept = {cl for sl, cl in pairs if sl in result.core}
        if self._cube_holds_init(kept):
            for l in sorted(base_cube):
                if not self._true_at_init(l) and l not in kept:
                    kept.add(l)
                    break
            else:
                raise PdrError("cannot separate cube from the reset state")
        return tuple(sorted(kept))

    # -------------------------------------------------------------- lifting

    def _lift_core(self, state, inputs, goal_lits, strict_goal_lits=None):
        enc = self._enc_lift
        lat_pairs = [
            (enc.latch_lit(i, state[i]), latch_literal(i, state[i]))
            for i in range(self._nl)
        ]
        assumps = [enc.input_lit(j, inputs[j]) for j in range(self.circuit.num_inputs)]
        assumps.extend(sl for sl, _ in lat_pairs)

        def run(goal):
            act = self._temp_clause(self._lift, goal)
            try:
                result = self._solve(self._lift, [act, *assumps])
            finally:
                self._drop_temp(self._lift, act)
            if result.status is not Status.UNSAT:
                raise PdrError("lifting query was satisfiable; encoding is broken")
            return {cl for sl, cl in lat_pairs if sl in result.core}

        kept = run(goal_lits)
        if strict_goal_lits is not None:
            kept |= run(strict_goal_lits)
        return tuple(sorted(kept))

    def _lift_final(self, state, inputs) -> tuple[int, ...]:
        # every state of the cube fires bad under these inputs
        goal = [self._enc_lift.lit(self.target.bad) ^ 1]
        return self._lift_core(state, inputs, goal)

    def _lift_pred(self, state, inputs, succ_cube) -> tuple[int, ...]:
        # the constraint section binds in both lifting modes; only the
        # property constraints may be ignored
        enc = self._enc_lift
        goal = [(enc.next_lit(l >> 1) ^ (l & 1)) ^ 1 for l in succ_cube]
        for constr in self.circuit.constraints:
            goal.append(enc.lit(constr) ^ 1)
        strict = None
        if self.options.respect_constraints:
            strict = list(goal)
            for prop in (self.target, *self.constraint_props):
                strict.append(enc.lit(prop.bad))
        return self._lift_core(state, inputs, goal, strict)

    def lift(self, pred_frame: TraceFrame, succ_cube, respect_constraints=None):
        """Cube of predecessor states that all step into `succ_cube` under
        the frame's inputs; in respect mode the cube also stays clean of
        the constraint section and every property."""
        respect = (
            self.options.respect_constraints
            if respect_constraints is None
            else respect_constraints
        )
        succ_cube = tuple(sorted(succ_cube))
        nxt = eval_transition(self.circuit, pred_frame)
        for l in succ_cube:
            if nxt[l >> 1] != 1 - (l & 1):
                raise ValueError("frame does not step into the successor cube")
        if not constraints_hold(self.circuit, pred_frame):
            raise ValueError("predecessor frame breaks the constraint section")
        if respect and not frame_satisfies(
            self.circuit, pred_frame, (self.target, *self.constraint_props)
        ):
            raise ValueError("respect-mode lifting needs a clean predecessor frame")
        saved = self.options.respect_constraints
        self.options.respect_constraints = respect
        try:
            return self._lift_pred(
                pred_frame.latch_values, pred_frame.input_values, succ_cube
            )
        finally:
            self.options.respect_constraints = saved

    # ------------------------------------------------------- generalization

    def generalize(self, cube, level: int) -> tuple[int, ...]:
        """Drop literals while the negation stays inductive relative to
        F_{level-1}; at most one retry pass over the survivors."""
        if not 1 <= level <= self.frontier:
            raise ValueError(f"level {level} outside 1..{self.frontier}")
        cur = set(cube)
        if self._cube_holds_init(cur):
            raise ValueError("cube covers the reset state")
        act = self._step.activity

        def rank(lit):
            var = self._enc_step.latch_lit(lit >> 1, 1) >> 1
            return (act[var], lit)

        for _ in range(2):
            changed = False
            for lit in sorted(cur, key=rank):
                if lit not in cur or len(cur) == 1:
                    continue
                cand = tuple(sorted(cur - {lit}))
                if self._cube_holds_init(cand):
                    continue
                result, pairs = self._consecution(cand, level - 1, exclude_cube=True)
                if result.status is Status.UNSAT:
                    cur = set(self._core_cube(result, pairs, cand))
                    changed = True
            if not changed:
                break
        return tuple(sorted(cur))

    # ------------------------------------------------------- public helpers

    def relative_induction_check(self, clause, level: int | None):
        """(holds, support): support is the sub-clause the unsat core kept
        when the consecution side goes through, None otherwise."""
        if level is not None and not 0 <= level <= self.frontier:
            raise ValueError(f"level {level} outside 0..{self.frontier}")
        clause = tuple(sorted(clause))
        if not any(self._true_at_init(l) for l in clause):
            return False, None
        cube = negate_lits(clause)
        result, pairs = self._consecution(cube, level, exclude_cube=True)
        if result.status is Status.SAT:
            return False, None
        kept = self._core_cube(result, pairs, cube)
        return True, negate_lits(kept)

    def frame_clauses(self, level: int | None) -> tuple[tuple[int, ...], ...]:
        """Semantic clause set of a frame under the delta encoding."""
        if level is None:
            return tuple(self._inf)
        if not 1 <= level <= self.frontier:
            raise ValueError(f"level {level} outside 1..{self.frontier}")
        out = []
        for j in range(level, self.frontier + 1):
            out.extend(self._owned[j])
        out.extend(self._inf)
        return tuple(out)

    def extract_invariant(self) -> tuple[tuple[int, ...], ...]:
        if self._invariant is None:
            raise PdrError("no inductive fixpoint available")
        return self._invariant

    # ------------------------------------------------------------ main loop

    def run(self) -> PdrOutcome:
        if self._ran:
            raise PdrError("engine instances are single-use")
        self._ran = True
        if self.options.timeout_s is not None:
            self._deadline = time.monotonic() + self.options.timeout_s
        try:
            result = self._solve(
                self._bad, self._frame_assumps(0, bad_side=True)
            )
            if result.status is Status.SAT:
                frame = TraceFrame(self.init, self._enc_bad.read_inputs(result))
                cex = Counterexample((frame,), self.target.index)
                return PdrOutcome(PdrStatus.FAILS, self.stats, cex=cex)
            if self._induction_precheck():
                self._invariant = tuple(self._inf)
                self._fixpoint_level = 1
                return PdrOutcome(
                    PdrStatus.HOLDS, self.stats, invariant=self._invariant
                )
            while True:
                if (
                    self.options.max_frames is not None
                    and self.frontier > self.options.max_frames
                ):
                    raise _Exhausted
                result = self._solve(
                    self._bad, self._frame_assumps(self.frontier, bad_side=True)
                )
                if result.status is Status.SAT:
                    state = self._enc_bad.read_latches(result)
                    inputs = self._enc_bad.read_inputs(result)
                    cube = self._lift_final(state, inputs)
                    self._enqueue(ProofObligation(cube, self.frontier, None, inputs))
                    self._discharge()
                else:
                    self.frontier += 1
                    self._open_level(self.frontier)
                    self.stats.frames_opened = self.frontier
                    invariant = self._propagate_clauses()
                    if invariant is not None:
                        self._invariant = invariant
                        return PdrOutcome(
                            PdrStatus.HOLDS, self.stats, invariant=invariant
                        )
        except _Exhausted:
            return PdrOutcome(PdrStatus.EXHAUSTED, self.stats)
        except _CexFound as found:
            cex = self._reconstruct(found.ob)
            return PdrOutcome(PdrStatus.FAILS, self.stats, cex=cex)

    def _induction_precheck(self) -> bool:
        """One-shot induction of target plus the inductive-frame clauses;
        catches already-inductive properties without growing frames."""
        solver = Solver()
        enc = StepEncoding(solver, self.circuit)
        for constr in self.circuit.constraints:
            solver.add_clause([enc.lit(constr)])
        for prop in (self.target, *self.constraint_props):
            solver.add_clause([enc.lit(prop.bad) ^ 1])
        for clause in self._inf:
            solver.add_clause(
                [enc.latch_lit(l >> 1, 1 - (l & 1)) for l in clause]
            )
        enc_next = StepEncoding(
            solver,
            self.circuit,
            latch_lits=[enc.next_lit(i) for i in range(self._nl)],
            cone_roots=[self.target.bad],
        )
        result = self._solve(solver, [enc_next.lit(self.target.bad)])
        if result.status is not Status.UNSAT:
            return False
        for clause in self._inf:
            assumps = [
                enc.next_lit(l >> 1) ^ (1 - (l & 1)) for l in clause
            ]
            result = self._solve(solver, assumps)
            if result.status is not Status.UNSAT:
                return False
        return True

    def _enqueue(self, ob: ProofObligation) -> None:
        if self._cube_holds_init(ob.cube):
            raise _CexFound(ob)
        self._obseq += 1
        ob.seq = self._obseq
        heapq.heappush(self._obq, (ob.level, ob.seq, ob))

    def _is_blocked(self, cube, level: int) -> bool:
        cube_set = set(cube)
        for j in range(level, self.frontier + 1):
            for clause in self._owned[j]:
                if all((l ^ 1) in cube_set for l in clause):
                    return True
        for clause in self._inf:
            if all((l ^ 1) in cube_set for l in clause):
                return True
        return False

    def _discharge(self) -> None:
        while self._obq:
            level, seq, ob = heapq.heappop(self._obq)
            ob.level = level
            if self._is_blocked(ob.cube, level):
                if level < self.frontier:
                    heapq.heappush(self._obq, (level + 1, seq, ob))
                continue
            result, pairs = self._consecution(ob.cube, level - 1, exclude_cube=True)
            if result.status is Status.SAT:
                state = self._enc_step.read_latches(result)
                inputs = self._enc_step.read_inputs(result)
                pred_cube = self._lift_pred(state, inputs, ob.cube)
                self._enqueue(ProofObligation(pred_cube, level - 1, ob, inputs))
                heapq.heappush(self._obq, (level, seq, ob))
            else:
                kept = self._core_cube(result, pairs, ob.cube)
                gen = self.generalize(kept, level)
                top = level
                while top < self.frontier:
                    push, _ = self._consecution(gen, top, exclude_cube=True)
                    if push.status is not Status.UNSAT:
                        break
                    top += 1
                self._store_clause(negate_lits(gen), top)
                self.stats.clauses_learned += 1
                if level < self.frontier:
                    heapq.heappush(self._obq, (level + 1, seq, ob))

    def _propagate_clauses(self):
        """Push clauses outward after the frontier moves; a level left
        empty is a fixpoint and its outer union is the invariant."""
        for j in range(1, self.frontier):
            for clause in list(self._owned[j]):
                cube = negate_lits(clause)
                result, _ = self._consecution(cube, j, exclude_cube=False)
                if result.status is Status.UNSAT:
                    self._owned[j].remove(clause)
                    self._store_clause(clause, j + 1)
            if not self._owned[j]:
                self._fixpoint_level = j
                out = []
                for l in range(j + 1, self.frontier + 1):
                    out.extend(self._owned[l])
                out.extend(self._inf)
                return tuple(out)
        return None

    def _reconstruct(self, ob: ProofObligation) -> Counterexample:
        chain = [ob]
        while chain[-1].succ is not None:
            chain.append(chain[-1].succ)
        frames = []
        state = self.init
        for link in chain[:-1]:
            frame = TraceFrame(state, link.inputs)
            frames.append(frame)
            state = eval_transition(self.circuit, frame)
        frames.append(TraceFrame(state, chain[-1].inputs))
        return Counterexample(tuple(frames), self.target.index)


# -------------------------------------------------------------- module ops


def check_property(
    circuit: Circuit,
    target: PropertySpec,
    constraint_props=(),
    seed_clauses=(),
    options: PdrOptions | None = None,
) -> PdrOutcome:
    """Prove or refute one property under the given constraint context.

    An empty context is a global check; passing the other properties
    makes it a local one. Holds outcomes carry the strengthening clause
    set, Fails outcomes a counterexample whose final frame violates the
    target, Exhausted only ever reflects budget, never an answer.
    """
    return PdrEngine(circuit, target, constraint_props, seed_clauses, options).run()


def certify(
    circuit: Circuit,
    constraint_props,
    invariant_clauses,
    target: PropertySpec,
    *,
    stats: PdrStats | None = None,
    deadline: float | None = None,
) -> bool:
    """Independent inductiveness check of target plus strengthening,
    on solvers built from scratch so engine state cannot leak in.

    Checks: the reset state satisfies the strengthening and cannot fire
    bad; and from any constrained frame satisfying target and
    strengthening, the successor satisfies both again.
    """
    clauses = [tuple(sorted(c)) for c in invariant_clauses]
    init = circuit.init_state()
    for clause in clauses:
        if not any(init[l >> 1] == 1 - (l & 1) for l in clause):
            return False

    def run(solver, assumptions) -> bool:
        result = solver.solve(assumptions, deadline=deadline)
        if stats is not None:
            stats.sat_calls += 1
        if result.status is Status.UNKNOWN:
            raise PdrError("certification ran out of budget")
        return result.status is Status.UNSAT

    init_solver = Solver()
    enc_init = StepEncoding(init_solver, circuit, cone_roots=[target.bad])
    assumps = [
        enc_init.latch_lit(i, v)
        for i, v in enumerate(init)
        if circuit.latch_vars[i] in enc_init.varmap
    ]
    if not run(init_solver, [*assumps, enc_init.lit(target.bad)]):
        return False

    solver = Solver()
    enc = StepEncoding(solver, circuit)
    for constr in circuit.constraints:
        solver.add_clause([enc.lit(constr)])
    for prop in (target, *constraint_props):
        solver.add_clause([enc.lit(prop.bad) ^ 1])
    for clause in clauses:
        solver.add_clause([enc.latch_lit(l >> 1, 1 - (l & 1)) for l in clause])
    enc_next = StepEncoding(
        solver,
        circuit,
        latch_lits=[enc.next_lit(i) for i in range(circuit.num_latches)],
        cone_roots=[target.bad],
    )
    if not run(solver, [enc_next.lit(target.bad)]):
        return False
    for clause in clauses:
        assumps = [enc.next_lit(l >> 1) ^ (1 - (l & 1)) for l in clause]
        if not run(solver, assumps):
            return False
    return True
