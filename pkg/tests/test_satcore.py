import random

import pytest

from seprat import cnf, satcore
from seprat.satcore import (BudgetExhausted, InstanceError, SatInstance,
                            Solver, add_clause_incremental, solve, to_dimacs)


def check_model(clauses, model):
    for cl in clauses:
        assert any(model[abs(l) - 1] == (l > 0) for l in cl), cl


class TestSolve:
    def test_contradictory_units(self):
        assert solve(SatInstance(1, [[1], [-1]])).status == "unsat"

    def test_unit_implied(self):
        res = solve(SatInstance(2, [[1, 2], [-1, 2]]))
        assert res.status == "sat"
        assert res.model[1] is True

    def test_empty_instance(self):
        res = solve(SatInstance(0, []))
        assert res.status == "sat" and res.model == []

    def test_empty_clause(self):
        assert solve(SatInstance(2, [[1, 2], []])).status == "unsat"

    def test_tautology_is_harmless(self):
        res = solve(SatInstance(2, [[1, -1, 2], [-2, 1]]))
        assert res.status == "sat"

    def test_duplicate_literals_in_clause(self):
        res = solve(SatInstance(2, [[1, 1, 2], [-1, -1]]))
        assert res.status == "sat"
        assert res.model == [False, True]

    def test_literal_out_of_range(self):
        with pytest.raises(InstanceError):
            SatInstance(2, [[3]])

    def test_pigeonhole_unsat(self):
        # 4 pigeons into 3 holes; exercises clause learning
        def var(p, h):
            return p * 3 + h + 1
        clauses = [[var(p, h) for h in range(3)] for p in range(4)]
        for h in range(3):
            for p1 in range(4):
                for p2 in range(p1 + 1, 4):
                    clauses.append([-var(p1, h), -var(p2, h)])
        assert solve(SatInstance(12, clauses)).status == "unsat"

    def test_agreement_with_brute_force(self):
        rng = random.Random(13)
        for _ in range(200):
            f = cnf.random_formula(rng, rng.randint(3, 8), rng.randint(1, 30))
            inst = SatInstance(f.var_count,
                               [list(c.to_ints()) for c in f.clauses])
            res = solve(inst)
            oracle = cnf.brute_force_sat(f)
            assert (res.status == "sat") == (oracle is not None)
            if res.status == "sat":
                check_model(inst.clauses, res.model)

    def test_determinism(self):
        rng = random.Random(3)
        f = cnf.random_formula(rng, 8, 25)
        inst = SatInstance(f.var_count, [list(c.to_ints()) for c in f.clauses])
        first = solve(inst)
        second = solve(SatInstance(f.var_count,
                                   [list(c.to_ints()) for c in f.clauses]))
        assert first.status == second.status
        assert first.model == second.model


class TestIncremental:
    def test_pinning_a_variable_flips_the_verdict(self):
        inst = SatInstance(3, [[3], [1, 2, 3]])
        assert solve(inst).status == "sat"
        narrowed = add_clause_incremental(inst, [-3])
        assert solve(narrowed).status == "unsat"
        assert len(inst.clauses) == 2  # original untouched

    def test_duplicate_clause_keeps_verdict(self):
        inst = SatInstance(2, [[1, 2], [-1, 2]])
        again = add_clause_incremental(inst, [1, 2])
        assert solve(again).status == solve(inst).status == "sat"

    def test_empty_clause_added(self):
        inst = SatInstance(2, [[1, 2]])
        assert solve(add_clause_incremental(inst, [])).status == "unsat"

    def test_out_of_range_literal(self):
        with pytest.raises(InstanceError):
            add_clause_incremental(SatInstance(2, []), [5])

    def test_solver_object_retains_state_between_calls(self):
        solver = Solver(SatInstance(3, [[1, 2, 3]]))
        assert solver.solve().status == "sat"
        solver.add_clause([-1])
        solver.add_clause([-2])
        assert solver.solve().status == "sat"
        solver.add_clause([-3])
        assert solver.solve().status == "unsat"
        solver.add_clause([1, 2, 3])  # anything after unsat stays unsat
        assert solver.solve().status == "unsat"


def test_budget_exhaustion_is_an_error_not_a_verdict():
    def var(p, h):
        return p * 4 + h + 1
    clauses = [[var(p, h) for h in range(4)] for p in range(5)]
    for h in range(4):
        for p1 in range(5):
            for p2 in range(p1 + 1, 5):
                clauses.append([-var(p1, h), -var(p2, h)])
    with pytest.raises(BudgetExhausted):
        solve(SatInstance(20, clauses), conflict_limit=3)


def test_dimacs_export_parses_with_the_cnf_reader():
    f = cnf.parse_dimacs("p cnf 3 2\n1 2 3 0\n-1 -2 3 0\n")
    inst = SatInstance(f.var_count, [list(c.to_ints()) for c in f.clauses])
    assert cnf.parse_dimacs(to_dimacs(inst)) == f


def test_dimacs_export_arbitrary_width():
    text = to_dimacs(SatInstance(3, [[1], [1, -2], [1, 2, 3]]))
    assert text.splitlines()[0] == "p cnf 3 3"
    assert text.splitlines()[2] == "1 -2 0"
