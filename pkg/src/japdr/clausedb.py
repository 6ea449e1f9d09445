"""Persistent strengthening-clause store.

Clauses proven as part of an inductive invariant for one property are
worth trying on the next one, but each local proof runs under a
different constraint context, and the reachable sets of two contexts are
incomparable in general. Blind seeding could therefore manufacture false
proofs. Two guards make re-use sound: loaded clauses are filtered to
genuine invariants of the current context before seeding (records whose
context matches exactly skip the filter, their certification already
covers the context-constrained reachable set), and every Holds outcome
built on seeds is certified from scratch.

File format, line oriented text: one section per circuit, each opened by
the exact header `japdr-clausedb v1 <fingerprint> <num_latch_vars>`,
followed by one record per line:

    <context indices, comma separated, or -> <origin> <signed literals>

Signed literals are 1-based latch positions, negative for "latch is 0".
The store is append-only within a run; a single writer serializes
concurrent submissions.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

from .circuit import Circuit
from .encode import StepEncoding
from .sat import Solver, Status, pos

_HEADER = "japdr-clausedb v1"


class ClauseDbError(ValueError):
    pass


@dataclass(frozen=True)
class ClauseRecord:
    clause: tuple[int, ...]  # packed latch literals, sorted
    origin: int  # property whose proof produced the clause
    context: tuple[int, ...]  # property indices assumed during that proof
    fingerprint: str  # canonical ASCII emission hash of the circuit

    def __post_init__(self):
        object.__setattr__(self, "clause", tuple(sorted(self.clause)))
        object.__setattr__(self, "context", tuple(sorted(self.context)))
        if not self.clause:
            raise ClauseDbError("empty clause record")


def _signed(lit: int) -> str:
    v = (lit >> 1) + 1
    return str(v) if not lit & 1 else str(-v)


def _unsigned(token: str, num_latches: int, where: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ClauseDbError(f"{where}: malformed literal {token!r}") from None
    if value == 0 or abs(value) > num_latches:
        raise ClauseDbError(f"{where}: literal {token} out of range 1..{num_latches}")
    return 2 * (abs(value) - 1) + (0 if value > 0 else 1)


def save(records, path) -> None:
    """Write records grouped into one section per circuit; ordering is
    preserved so save/load/save is byte-stable."""
    groups: dict[str, list[ClauseRecord]] = {}
    for rec in records:
        groups.setdefault(rec.fingerprint, []).append(rec)
    lines = []
    for fingerprint, group in groups.items():
        width = max(max(l >> 1 for l in rec.clause) for rec in group) + 1
        lines.append(f"{_HEADER} {fingerprint} {width}")
        for rec in group:
            ctx = ",".join(str(i) for i in rec.context) if rec.context else "-"
            lits = " ".join(_signed(l) for l in rec.clause)
            lines.append(f"{ctx} {rec.origin} {lits}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))


def append(records, path) -> None:
    """Add records as a fresh section without touching earlier ones."""
    records = list(records)
    if not records:
        return
    groups: dict[str, list[ClauseRecord]] = {}
    for rec in records:
        groups.setdefault(rec.fingerprint, []).append(rec)
    lines = []
    for fingerprint, group in groups.items():
        width = max(max(l >> 1 for l in rec.clause) for rec in group) + 1
        lines.append(f"{_HEADER} {fingerprint} {width}")
        for rec in group:
            ctx = ",".join(str(i) for i in rec.context) if rec.context else "-"
            lits = " ".join(_signed(l) for l in rec.clause)
            lines.append(f"{ctx} {rec.origin} {lits}")
    with open(path, "a", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load(path, fingerprint: str) -> tuple[ClauseRecord, ...]:
    """Records for the given circuit; sections for other circuits are
    skipped with a warning, anything malformed is an error."""
    with open(path, "r", encoding="ascii") as fh:
        raw = fh.read()
    out: list[ClauseRecord] = []
    section_fp: str | None = None
    section_width = 0
    skipped: set[str] = set()
    for lineno, line in enumerate(raw.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("japdr-clausedb"):
            parts = line.split()
            if len(parts) != 4 or " ".join(parts[:2]) != _HEADER:
                raise ClauseDbError(f"line {lineno}: unsupported header {line!r}")
            section_fp = parts[2]
            try:
                section_width = int(parts[3])
            except ValueError:
                raise ClauseDbError(f"line {lineno}: bad latch count {parts[3]!r}") from None
            if section_fp != fingerprint and section_fp not in skipped:
                skipped.add(section_fp)
                warnings.warn(
                    f"clause store section for unknown circuit {section_fp[:12]} skipped",
                    stacklevel=2,
                )
            continue
        if section_fp is None:
            raise ClauseDbError(f"line {lineno}: record before any header")
        if section_fp != fingerprint:
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ClauseDbError(f"line {lineno}: truncated record {line!r}")
        where = f"line {lineno}"
        if parts[0] == "-":
            context: tuple[int, ...] = ()
        else:
            try:
                context = tuple(int(t) for t in parts[0].split(","))
            except ValueError:
                raise ClauseDbError(f"{where}: bad context {parts[0]!r}") from None
        try:
            origin = int(parts[1])
        except ValueError:
            raise ClauseDbError(f"{where}: bad origin {parts[1]!r}") from None
        clause = tuple(_unsigned(t, section_width, where) for t in parts[2:])
        out.append(ClauseRecord(clause, origin, context, section_fp))
    return tuple(out)


def filter_invariant(
    candidates,
    circuit: Circuit,
    constraint_props,
    *,
    deadline: float | None = None,
    stats=None,
) -> tuple[tuple[int, ...], ...]:
    """Greatest fixpoint of mutually inductive candidates.

    Repeatedly deletes any clause the reset state violates or whose
    consecution under the surviving set, the constraint section and the
    constraint properties fails, until stable. Every survivor holds on
    every state the constrained system can reach. Output order follows
    input order; duplicates collapse to their first occurrence.
    """
    seen = set()
    clauses: list[tuple[int, ...]] = []
    for cand in candidates:
        cl = tuple(sorted(cand))
        if cl and cl not in seen:
            seen.add(cl)
            clauses.append(cl)
    init = circuit.init_state()
    nl = circuit.num_latches
    for cl in clauses:
        if any(l >> 1 >= nl for l in cl):
            raise ClauseDbError(f"clause literal out of range: {cl}")
    alive = [
        any(init[l >> 1] == 1 - (l & 1) for l in cl) for cl in clauses
    ]
    if not any(alive):
        return ()

    solver = Solver()
    enc = StepEncoding(solver, circuit)
    for constr in circuit.constraints:
        solver.add_clause([enc.lit(constr)])
    for prop in constraint_props:
        solver.add_clause([enc.lit(prop.bad) ^ 1])
    acts = []
    for cl in clauses:
        act = pos(solver.new_var())
        solver.add_clause(
            [act ^ 1, *(enc.latch_lit(l >> 1, 1 - (l & 1)) for l in cl)]
        )
        acts.append(act)

    changed = True
    while changed:
        changed = False
        for i, cl in enumerate(clauses):
            if not alive[i]:
                continue
            if deadline is not None and time.monotonic() > deadline:
                raise ClauseDbError("invariance filtering ran out of budget")
            assumps = [acts[j] for j, a in enumerate(alive) if a]
            assumps.extend(
                enc.next_lit(l >> 1) ^ (1 - (l & 1)) for l in cl
            )
            result = solver.solve(assumps, deadline=deadline)
            if stats is not None:
                stats.sat_calls += 1
            if result.status is Status.UNKNOWN:
                raise ClauseDbError("invariance filtering ran out of budget")
            if result.status is Status.SAT:
                alive[i] = False
                changed = True
    return tuple(cl for i, cl in enumerate(clauses) if alive[i])


def seeds_for_context(
    records,
    circuit: Circuit,
    fingerprint: str,
    constraint_props,
    *,
    deadline: float | None = None,
    stats=None,
) -> tuple[tuple[int, ...], ...]:
    """Seed clauses for one local check.

    Records certified under exactly the same context skip filtering;
    everything else must re-earn invariance under the current one.
    """
    context = tuple(sorted(p.index for p in constraint_props))
    trusted: list[tuple[int, ...]] = []
    rest: list[tuple[int, ...]] = []
    for rec in records:
        if rec.fingerprint != fingerprint:
            continue
        if rec.context == context:
            trusted.append(rec.clause)
        else:
            rest.append(rec.clause)
    filtered = (
        filter_invariant(rest, circuit, constraint_props, deadline=deadline, stats=stats)
        if rest
        else ()
    )
    seen = set()
    out = []
    for cl in (*trusted, *filtered):
        if cl not in seen:
            seen.add(cl)
            out.append(cl)
    return tuple(out)
