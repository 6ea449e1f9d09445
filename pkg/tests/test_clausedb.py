import random
import time
import warnings

import pytest

from japdr.aiger import circuit_fingerprint, gen_counter, gen_random_circuit
from japdr.circuit import (
    Circuit,
    Latch,
    Literal,
    TraceFrame,
    constraints_hold,
    eval_transition,
    frame_satisfies,
)
from japdr.clausedb import (
    ClauseDbError,
    ClauseRecord,
    append,
    filter_invariant,
    load,
    save,
    seeds_for_context,
)
from japdr.pdr import PdrStats, PdrStatus, check_property

OTHER_FP = "deadbeef" * 8


def test_record_normalizes_on_construction():
    rec = ClauseRecord((5, 1, 4), 0, (2, 1), OTHER_FP)
    assert rec.clause == (1, 4, 5)
    assert rec.context == (1, 2)
    with pytest.raises(ValueError):
        ClauseRecord((), 0, (), OTHER_FP)


def test_save_load_roundtrip_is_byte_stable(tmp_path):
    c, _ = gen_counter(3)
    fp = circuit_fingerprint(c)
    recs = [
        ClauseRecord((0, 3), 1, (0,), fp),
        ClauseRecord((2,), 1, (), fp),
        ClauseRecord((5, 1, 4), 0, (1, 0), OTHER_FP),
    ]
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    save(recs, a)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        here = load(a, fp)
        assert len(caught) == 1  # the foreign section is announced once
    assert [r.clause for r in here] == [(0, 3), (2,)]
    assert here[0].context == (0,) and here[1].context == ()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        foreign = load(a, OTHER_FP)
        assert len(caught) == 1 and "skipped" in str(caught[0].message)
    assert [r.clause for r in foreign] == [(1, 4, 5)]
    save(here + foreign, b)
    assert a.read_bytes() == b.read_bytes()


def test_append_adds_a_section(tmp_path):
    c, _ = gen_counter(3)
    fp = circuit_fingerprint(c)
    path = tmp_path / "db.txt"
    save([ClauseRecord((2,), 1, (), fp)], path)
    append([ClauseRecord((2, 4), 0, (1,), fp)], path)
    recs = load(path, fp)
    assert [r.clause for r in recs] == [(2,), (2, 4)]
    assert recs[1].origin == 0


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("japdr-clausedb v2 aa 3\n- 0 1\n", "unsupported header"),
        ("japdr-clausedb v1 aa 3\n- 0 1 x\n", "malformed literal"),
        ("japdr-clausedb v1 aa 3\n- 0 9\n", "out of range"),
        ("japdr-clausedb v1 aa x\n- 0 1\n", "bad latch count"),
        ("- 0 1\n", "before any header"),
        ("japdr-clausedb v1 aa 3\n- 0\n", "truncated"),
        ("japdr-clausedb v1 aa 3\n1,q 0 1\n", "bad context"),
    ],
)
def test_parse_errors_name_the_problem(tmp_path, text, fragment):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ClauseDbError, match=fragment):
        load(path, "aa")


def test_filter_deletes_counter_non_invariants():
    # the free-running counter visits every value, so no stuck-at clause
    # survives, alone or conjoined
    c, props = gen_counter(3)
    assert filter_invariant([(2,), (0, 2, 4)], c, [props[0]]) == ()


def test_filter_keeps_real_invariants_and_counts_calls():
    # identity-update latches never leave reset, their stuck-at clauses hold
    latches_c = Circuit(
        num_inputs=1,
        latches=[Latch(2, Literal(2), 0), Latch(3, Literal(3), 1)],
        ands=[],
        bads=[],
        constraints=[],
    )
    stats = PdrStats()
    surv = filter_invariant([(1,), (2,)], latches_c, [], stats=stats)
    assert surv == ((1,), (2,))
    assert stats.sat_calls >= 2


def constrained_reachable(circ, ctx_props):
    init = circ.init_state()
    seen = {init}
    stack = [init]
    while stack:
        s = stack.pop()
        for x in range(1 << circ.num_inputs):
            frame = TraceFrame(s, tuple((x >> i) & 1 for i in range(circ.num_inputs)))
            if not constraints_hold(circ, frame):
                continue
            if not frame_satisfies(circ, frame, ctx_props):
                continue
            nxt = eval_transition(circ, frame)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def test_filter_survivors_hold_on_the_constrained_reach_set():
    """Harvest clauses from local proofs, refilter under rotated contexts,
    walk the constrained system and check every survivor on every state."""
    rng = random.Random(77)
    survivors_total = 0
    for _ in range(40):
        seed = rng.randrange(1 << 30)
        r = random.Random(seed)
        circ, cprops = gen_random_circuit(
            r,
            num_inputs=r.randint(1, 2),
            num_latches=r.randint(3, 6),
            num_gates=r.randint(4, 25),
            num_props=r.randint(2, 3),
            mutate=r.random() < 0.5,
        )
        if r.random() < 0.4:
            circ = Circuit(
                circ.num_inputs, circ.latches, circ.ands, circ.bads,
                (Literal(1 + r.randrange(circ.num_inputs)),),
            )
        for tgt in range(len(cprops)):
            ctx = [p for j, p in enumerate(cprops) if j != tgt]
            out = check_property(circ, cprops[tgt], ctx)
            if out.status is not PdrStatus.HOLDS or not out.invariant:
                continue
            for drop in range(len(ctx) + 1):
                if drop < len(ctx):
                    new_ctx = [p for j, p in enumerate(ctx) if j != drop]
                else:
                    new_ctx = list(cprops)
                surv = filter_invariant(out.invariant, circ, new_ctx)
                survivors_total += len(surv)
                for st in constrained_reachable(circ, new_ctx):
                    for cl in surv:
                        assert any(st[l >> 1] == 1 - (l & 1) for l in cl), (
                            seed, tgt, cl, st)
    assert survivors_total >= 50


def test_filter_deduplicates_preserving_first_position():
    c = Circuit(
        num_inputs=1,
        latches=[Latch(2, Literal(2), 0), Latch(3, Literal(3), 0)],
        ands=[],
        bads=[],
        constraints=[],
    )
    surv = filter_invariant([(1,), (3,), (1,)], c, [])
    assert surv == ((1,), (3,))


def test_seeds_trust_same_context_records_only():
    # same-context records skip refiltering (certification at store time
    # vouches for them); everything else must survive the filter
    c4, props4 = gen_counter(4)
    fp = circuit_fingerprint(c4)
    ctx = [props4[0]]
    rec_same = ClauseRecord((1,), 1, (0,), fp)  # false in general, trusted anyway
    rec_other = ClauseRecord((3,), 1, (), fp)  # refiltered against the counter, dies
    seeds = seeds_for_context([rec_same, rec_other], c4, fp, ctx)
    assert (1,) in seeds and (3,) not in seeds


def test_seeds_skip_foreign_fingerprints():
    c4, props4 = gen_counter(4)
    fp = circuit_fingerprint(c4)
    rec = ClauseRecord((1,), 1, (0,), OTHER_FP)
    assert seeds_for_context([rec], c4, fp, [props4[0]]) == ()


def test_filter_deadline_is_a_hard_error():
    # stopping the fixpoint early could hand back non-invariants, so the
    # filter refuses to answer at all
    c4, props4 = gen_counter(4)
    with pytest.raises(ClauseDbError, match="budget"):
        filter_invariant(
            [(1,), (3,)], c4, [props4[0]], deadline=time.monotonic() - 1
        )
