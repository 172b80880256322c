"""Constraint solver: accepted sets, conditioning modes, factoring embedding."""

import math

import numpy as np
import pytest

from hoamp.constraints import ConstraintSystem, feasible_set
from hoamp.dynamics import OscillatorParams
from hoamp.ensemble import init_uniform_factoring
from hoamp.errors import DomainTooLarge, InfeasibleSystem
from hoamp.factoring import FactoringConfig, run_factoring
from hoamp.solver import (AcceptedSet, MarkerBank, build_accepted_sets,
                          constraint_multipliers, run_solver, solver_iteration,
                          uniform_state)


def make_system(doc):
    return ConstraintSystem.from_json(doc)


EQ_FACTORING_35 = {
    "variables": [{"name": "m1", "bound": 6}, {"name": "m2", "bound": 12}],
    "constraints": [{"expr": "m1*m2", "relation": "=", "bound": 35}],
}
INEQ_SMALL = {
    "variables": [{"name": "x", "bound": 3}, {"name": "y", "bound": 3}],
    "constraints": [
        {"expr": "x + y", "relation": "<=", "bound": 3},
        {"expr": "x*y", "relation": ">=", "bound": 2},
    ],
}


def test_marker_bank_validation():
    bank = MarkerBank.uniform(3, alpha=2.5)
    assert bank.omegas == (0.0, 0.0, 0.0)
    assert bank.alpha_for(1, 5) == 2.5
    with pytest.raises(ValueError):
        MarkerBank(omegas=(0.0,), alpha_schedules=((2.0,), (2.0,)))
    with pytest.raises(ValueError):
        MarkerBank(omegas=(0.0,), alpha_schedules=((2.0, 1.0),))
    b2 = MarkerBank(omegas=(0.0,), alpha_schedules=(1.5,))   # scalar coerced
    assert b2.alpha_schedules == ((1.5,),)


def test_accepted_sets_enumerated():
    system = make_system(INEQ_SMALL)
    acc = build_accepted_sets(system)
    assert list(acc[0].values) == [0, 1, 2, 3]          # x+y <= 3, achievable
    assert list(acc[1].values) == [2, 3, 4, 6, 9]       # x*y >= 2 over [0,3]^2
    assert acc[0].contains(np.array([3, 4])).tolist() == [True, False]


def test_accepted_sets_range_mode():
    system = make_system({
        "variables": [{"name": "x", "bound": 20_000_000}],
        "constraints": [{"expr": "x", "relation": "<=", "bound": 10}],
    })
    acc = build_accepted_sets(system)
    assert acc[0].values is None
    assert (acc[0].lo, acc[0].hi) == (0, 10)


def test_accepted_sets_infeasible():
    with pytest.raises(InfeasibleSystem):
        build_accepted_sets(make_system({
            "variables": [{"name": "x", "bound": 3}],
            "constraints": [{"expr": "x^2", "relation": "=", "bound": 5}],
        }))
    with pytest.raises(InfeasibleSystem):
        build_accepted_sets(make_system({
            "variables": [{"name": "x", "bound": 20_000_000}],
            "constraints": [{"expr": "x", "relation": ">=", "bound": 1e9}],
        }))


def test_constraint_multipliers_satisfying_exactly_one():
    system = make_system(INEQ_SMALL)
    acc = build_accepted_sets(system)
    params = OscillatorParams(omega=(0.0,), couplings=(1.0,))
    vals = np.array([0, 1, 2, 3, 4, 6], dtype=np.int64)    # x+y values
    mult, ok = constraint_multipliers(vals, acc[0], params, 2.0, 1.234, "max", True)
    assert ok.tolist() == [True, True, True, True, False, False]
    assert all(mult[i] == 1.0 + 0.0j for i in range(4))     # exact
    assert all(abs(mult[i]) < 1.0 for i in (4, 5))


def test_constraint_multipliers_sum_clipped_bounded():
    system = make_system(INEQ_SMALL)
    acc = build_accepted_sets(system)
    params = OscillatorParams(omega=(0.0,), couplings=(1.0,))
    vals = np.array([0, 1, 5, 8], dtype=np.int64)
    mult, ok = constraint_multipliers(vals, acc[1], params, 2.0, 0.9, "sum-clipped",
                                      False)
    assert ok.tolist() == [False, False, False, False]
    assert np.all(mult <= 1.0) and np.all(mult > 0.0)


def test_uniform_state_box():
    st = uniform_state(make_system(INEQ_SMALL))
    assert st.n_entries == 16
    assert st.total_mass() == pytest.approx(1.0, abs=1e-14)
    assert tuple(st.tuples[0]) == (0, 0)
    assert tuple(st.tuples[-1]) == (3, 3)
    with pytest.raises(DomainTooLarge):
        uniform_state(make_system({
            "variables": [{"name": "x", "bound": 50_000_000}],
            "constraints": [{"expr": "x", "relation": "=", "bound": 3}],
        }))


def test_equality_mode_matches_factoring_bit_for_bit():
    seed = 7
    frep = run_factoring(FactoringConfig(N=35, seed=seed, L_max=6,
                                         stop_fidelity=1.0))
    srep = run_solver(make_system(EQ_FACTORING_35), seed=seed, L_max=6,
                      stop_mass=1.0, initial_state=init_uniform_factoring(35))
    assert len(frep.records) == len(srep.records)
    for fr, sr in zip(frep.records, srep.records):
        assert fr.t_l == sr.t_l
        assert fr.pr_E == sr.pr_E                  # bitwise, same code path
        assert fr.C_l == sr.C_l


def test_equality_mode_post_state_identical():
    from hoamp.dynamics import MarkerAmplitude
    from hoamp.ensemble import conditional_update
    system = make_system(EQ_FACTORING_35)
    bank = MarkerBank.uniform(1, alpha=2.0)
    st_f = init_uniform_factoring(35)
    st_s = init_uniform_factoring(35)
    out_f = conditional_update(st_f, OscillatorParams(), MarkerAmplitude(2.0),
                               35, 1.37)
    post_s, rec = solver_iteration(st_s, system, bank, 1, 1.37)
    assert rec.pr_E == out_f.probability
    np.testing.assert_array_equal(post_s.weights, out_f.post_state.weights)


def test_inequality_solutions_match_feasible_set():
    system = make_system(INEQ_SMALL)
    report = run_solver(system, seed=1, L_max=30)
    assert {t for t, _ in report.solutions} == feasible_set(system)
    assert report.solution_count == 2
    assert report.records[-1].solution_mass > 0.99
    assert report.sampled_tuple in feasible_set(system)


def test_three_constraint_system_converges():
    system = make_system({
        "variables": [{"name": "x", "bound": 7}, {"name": "y", "bound": 7}],
        "constraints": [
            {"expr": "x + y", "relation": "<=", "bound": 6},
            {"expr": "x*y", "relation": ">=", "bound": 5},
            {"expr": "x^2 + y", "relation": ">=", "bound": 7},
        ],
    })
    bank = MarkerBank.uniform(3, alpha=3.0)
    report = run_solver(system, bank=bank, seed=3, L_max=120, stop_mass=0.999)
    assert {t for t, _ in report.solutions} == feasible_set(system)
    assert report.records[-1].solution_mass >= 0.999
    masses = [r.solution_mass for r in report.records]
    assert masses[-1] > masses[0]


def test_sum_clipped_mode_equality_converges():
    system = make_system({
        "variables": [{"name": "x", "bound": 12}, {"name": "y", "bound": 12}],
        "constraints": [
            {"expr": "x*y", "relation": "=", "bound": 12},
            {"expr": "x + y", "relation": "<=", "bound": 8},
        ],
    })
    report = run_solver(system, mode="sum-clipped", seed=3, L_max=40,
                        stop_mass=0.999)
    assert {t for t, _ in report.solutions} == feasible_set(system)
    assert report.records[-1].solution_mass >= 0.999


def test_solver_reports_diagnostics():
    report = run_solver(make_system(INEQ_SMALL), seed=1, L_max=30)
    assert report.estimated_iterations >= 1
    assert report.config["mode"] == "max"
    assert report.config["system"]["variables"][0]["name"] == "x"


def test_pr_lambda_identity():
    report = run_solver(make_system(INEQ_SMALL), seed=5, L_max=10, stop_mass=1.0)
    c_prev = 1.0
    for rec in report.records:
        assert rec.pr_E == pytest.approx(rec.C_l / c_prev, rel=1e-12)
        c_prev = rec.C_l
