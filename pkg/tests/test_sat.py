import itertools
import random
import time

from japdr.sat import Solver, Status, lit_neg, lit_var, neg, pos


def brute_force(num_vars, clauses, assumptions=()):
    """All satisfying assignments as var->bool dicts; assumptions forced.

    Variables are 0-based to match Solver.new_var numbering."""
    forced = {lit_var(a): not (a & 1) for a in assumptions}
    models = []
    for bits in itertools.product([False, True], repeat=num_vars):
        assign = dict(enumerate(bits))
        if any(assign[v] != want for v, want in forced.items()):
            continue
        ok = True
        for clause in clauses:
            if not any(assign[lit_var(l)] != bool(l & 1) for l in clause):
                ok = False
                break
        if ok:
            models.append(assign)
    return models


def random_instance(rng, num_vars, num_clauses, width=3):
    clauses = []
    for _ in range(num_clauses):
        k = rng.randint(1, width)
        chosen = rng.sample(range(num_vars), min(k, num_vars))
        clauses.append([pos(v) if rng.random() < 0.5 else neg(v) for v in chosen])
    return clauses


def test_agrees_with_brute_force_on_random_cnf():
    rng = random.Random(2024)
    for trial in range(150):
        n = rng.randint(1, 8)
        clauses = random_instance(rng, n, rng.randint(1, 24))
        solver = Solver()
        for _ in range(n):
            solver.new_var()
        for clause in clauses:
            solver.add_clause(clause)
        result = solver.solve()
        models = brute_force(n, clauses)
        if models:
            assert result.status is Status.SAT, trial
            # returned model must actually satisfy every clause
            for clause in clauses:
                assert any(result.value(l) for l in clause), (trial, clause)
        else:
            assert result.status is Status.UNSAT, trial


def test_assumptions_and_cores():
    rng = random.Random(77)
    for trial in range(150):
        n = rng.randint(2, 7)
        clauses = random_instance(rng, n, rng.randint(2, 18))
        k = rng.randint(1, n)
        vars_ = rng.sample(range(n), k)
        assumptions = [pos(v) if rng.random() < 0.5 else neg(v) for v in vars_]
        solver = Solver()
        for _ in range(n):
            solver.new_var()
        for clause in clauses:
            solver.add_clause(clause)
        result = solver.solve(assumptions)
        models = brute_force(n, clauses, assumptions)
        if models:
            assert result.status is Status.SAT, trial
            for a in assumptions:
                assert result.value(a), trial
        else:
            assert result.status is Status.UNSAT, trial
            assert result.core is not None
            assert result.core <= set(assumptions), trial
            # the core alone must already be unsatisfiable
            assert not brute_force(n, clauses, sorted(result.core)), trial


def test_core_shrinks_below_full_assumption_set_sometimes():
    solver = Solver()
    a, b, c = (solver.new_var() for _ in range(3))
    solver.add_clause([neg(a)])
    result = solver.solve([pos(a), pos(b), pos(c)])
    assert result.status is Status.UNSAT
    assert result.core == {pos(a)}


def test_retractable_clauses():
    solver = Solver()
    x, y = solver.new_var(), solver.new_var()
    handle = solver.add_retractable([pos(x)])
    solver.add_clause([neg(x), pos(y)])
    result = solver.solve()
    assert result.status is Status.SAT and result.value(pos(x)) and result.value(pos(y))
    solver.retract(handle)
    result = solver.solve([neg(x)])
    assert result.status is Status.SAT and result.value(neg(x))


def test_retract_then_conflicting_clause_is_fine():
    solver = Solver()
    x = solver.new_var()
    h = solver.add_retractable([pos(x)])
    solver.retract(h)
    solver.add_clause([neg(x)])
    assert solver.solve().status is Status.SAT


def test_pigeonhole_unsat():
    # 4 pigeons, 3 holes; hard enough to exercise learning and restarts
    pigeons, holes = 4, 3
    solver = Solver()
    var = {}
    for p in range(pigeons):
        for h in range(holes):
            var[p, h] = solver.new_var()
    for p in range(pigeons):
        solver.add_clause([pos(var[p, h]) for h in range(holes)])
    for h in range(holes):
        for p1 in range(pigeons):
            for p2 in range(p1 + 1, pigeons):
                solver.add_clause([neg(var[p1, h]), neg(var[p2, h])])
    assert solver.solve().status is Status.UNSAT


def test_unit_and_empty_clause_handling():
    solver = Solver()
    x = solver.new_var()
    assert solver.add_clause([pos(x)])
    assert not solver.add_clause([neg(x)])  # store becomes unsat
    assert solver.solve().status is Status.UNSAT


def test_tautology_and_duplicate_literals():
    solver = Solver()
    x, y = solver.new_var(), solver.new_var()
    solver.add_clause([pos(x), neg(x)])  # dropped
    solver.add_clause([pos(y), pos(y)])  # collapses to unit
    result = solver.solve()
    assert result.status is Status.SAT and result.value(pos(y))


def test_conflict_limit_yields_unknown():
    rng = random.Random(5)
    solver = Solver()
    var = {}
    for p in range(7):
        for h in range(6):
            var[p, h] = solver.new_var()
    for p in range(7):
        solver.add_clause([pos(var[p, h]) for h in range(6)])
    for h in range(6):
        for p1 in range(7):
            for p2 in range(p1 + 1, 7):
                solver.add_clause([neg(var[p1, h]), neg(var[p2, h])])
    result = solver.solve(conflict_limit=5)
    assert result.status is Status.UNKNOWN


def test_deadline_yields_unknown():
    solver = Solver()
    var = {}
    for p in range(8):
        for h in range(7):
            var[p, h] = solver.new_var()
    for p in range(8):
        solver.add_clause([pos(var[p, h]) for h in range(7)])
    for h in range(7):
        for p1 in range(8):
            for p2 in range(p1 + 1, 8):
                solver.add_clause([neg(var[p1, h]), neg(var[p2, h])])
    result = solver.solve(deadline=time.monotonic() - 1)
    assert result.status is Status.UNKNOWN


def test_incremental_reuse_after_unsat_assumptions():
    solver = Solver()
    x, y = solver.new_var(), solver.new_var()
    solver.add_clause([pos(x), pos(y)])
    assert solver.solve([neg(x), neg(y)]).status is Status.UNSAT
    assert solver.solve([neg(x)]).status is Status.SAT
    assert solver.solve().status is Status.SAT


def test_luby_restart_sequence_prefix():
    from japdr.sat import _luby

    want = [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]
    assert [_luby(i) for i in range(1, 16)] == want


def test_write_dimacs_reflects_store(tmp_path):
    # units bypass the clause store, so only multi-literal clauses appear
    solver = Solver()
    x, y, z = solver.new_var(), solver.new_var(), solver.new_var()
    solver.add_clause([pos(x), neg(y)])
    solver.add_clause([pos(y), pos(z)])
    path = tmp_path / "out.cnf"
    with open(path, "w") as fh:
        solver.write_dimacs(fh)
    text = path.read_text().splitlines()
    assert text[0] == "p cnf 3 2"
    body = {tuple(map(int, line.split()[:-1])) for line in text[1:]}
    assert body == {(1, -2), (2, 3)}
