import dataclasses
import json

import numpy as np
import pytest
from scipy.optimize import linprog

from relayflow import (
    CommoditySpec,
    McfpInstance,
    Scenario,
    ScenarioConfig,
    build_instance,
    build_lp,
    default_commodities,
    flow_solution_to_dict,
    solve_mcfp,
    spawn_scenario,
    verify_solution,
    weight_preset,
)

E1 = np.exp(-1.0)
E4 = np.exp(-4.0)


def oracle_phi(inst):
    """Independent optimum: a from-scratch dense LP build solved by scipy.

    Variable order and constraint assembly are deliberately different
    from the production construction.
    """
    n = inst.num_agents
    num_k = inst.num_commodities
    pairs = [(i, j) for j in range(n) for i in range(n) if i != j]  # column-major on purpose
    var_r = {(i, j, k): idx for k in range(num_k) for idx, (i, j) in enumerate(pairs)}
    var_r = {}
    idx = 0
    for k in range(num_k):
        for (i, j) in pairs:
            var_r[(i, j, k)] = idx
            idx += 1
    var_a = {}
    for k, com in enumerate(inst.commodities):
        for i in com.sources:
            var_a[(k, i)] = idx
            idx += 1
    var_t = {}
    for k in range(num_k):
        var_t[k] = idx
        idx += 1
    nv = idx

    rows_ub = []
    rhs_ub = []
    for k, com in enumerate(inst.commodities):
        for i in com.sources:
            row = np.zeros(nv)
            row[var_t[k]] = 1.0
            row[var_a[(k, i)]] = -1.0
            rows_ub.append(row)
            rhs_ub.append(0.0)
            row = np.zeros(nv)
            row[var_a[(k, i)]] = 1.0
            for j in range(n):
                if j != i:
                    row[var_r[(i, j, k)]] -= 1.0
                    row[var_r[(j, i, k)]] += 1.0
            rows_ub.append(row)
            rhs_ub.append(0.0)
    for (i, j) in pairs:
        row = np.zeros(nv)
        for k in range(num_k):
            row[var_r[(i, j, k)]] = 1.0
        rows_ub.append(row)
        rhs_ub.append(inst.capacities[i, j])

    rows_eq = []
    for k in range(num_k):
        for i in inst.relay_set:
            row = np.zeros(nv)
            for j in range(n):
                if j != i:
                    row[var_r[(i, j, k)]] += 1.0
                    row[var_r[(j, i, k)]] -= 1.0
            rows_eq.append(row)

    cost = np.zeros(nv)
    for k in range(num_k):
        cost[var_t[k]] = -inst.weights[k]
    bounds = [(0.0, 1.0)] * len(var_r) + [(0.0, None)] * len(var_a) + [(None, None)] * num_k
    res = linprog(
        cost,
        A_ub=np.array(rows_ub),
        b_ub=np.array(rhs_ub),
        A_eq=np.array(rows_eq) if rows_eq else None,
        b_eq=np.zeros(len(rows_eq)) if rows_eq else None,
        bounds=bounds,
        method="highs",
    )
    assert res.status == 0, res.message
    return -res.fun


def test_build_instance_unit_distance(two_agents_unit):
    inst = build_instance(two_agents_unit, [1.0, 1.0])
    assert inst.capacities[0, 1] == pytest.approx(E1, rel=1e-12)
    assert inst.capacities[1, 0] == pytest.approx(E1, rel=1e-12)
    assert inst.capacities[0, 0] == 0.0


def test_build_instance_single_agent(model):
    scenario = Scenario(np.array([[0.0, 0.0]]), np.zeros((0, 2)), model, ())
    inst = build_instance(scenario, [])
    assert inst.capacities.shape == (1, 1)
    assert inst.capacities[0, 0] == 0.0


def test_build_instance_coincident_agents(model):
    scenario = Scenario(
        np.array([[0.5, 0.5], [0.5, 0.5]]), np.zeros((0, 2)), model, default_commodities(2)
    )
    inst = build_instance(scenario, [1.0, 1.0])
    assert inst.capacities[0, 1] == 1.0


def test_build_lp_dimensions(bridge_scenario):
    inst = build_instance(bridge_scenario, [1.0, 1.0])
    lp, index = build_lp(inst)
    assert lp.num_vars == 16  # r: 12, a: 2, t: 2
    assert len(index.pairs) == 6
    assert lp.num_ineq == 2 + 2 + 6  # epigraph, injection, capacity rows
    assert lp.num_eq == 2  # one conservation row per (commodity, relay)
    # capacity rows carry the rates in pair order
    for (i, j) in index.pairs:
        assert lp.b_ub[index.cap_row(i, j)] == inst.capacities[i, j]


def test_zero_weights_give_zero_objective(bridge_scenario):
    inst = build_instance(bridge_scenario, [0.0, 0.0])
    sol = solve_mcfp(inst)
    assert sol.phi == pytest.approx(0.0, abs=1e-9)
    assert np.max(np.abs(sol.mu)) <= 1e-6


def test_two_agents_unit_distance_optimum(two_agents_unit):
    inst = build_instance(two_agents_unit, [1.0, 1.0])
    sol = solve_mcfp(inst)
    assert sol.phi == pytest.approx(2 * E1, abs=1e-8)
    assert sol.a[0, 1] == pytest.approx(E1, abs=1e-7)
    assert sol.a[1, 0] == pytest.approx(E1, abs=1e-7)


def test_bridge_optimum(bridge_scenario):
    # direct edge plus the two-hop path through the midpoint relay
    inst = build_instance(bridge_scenario, [1.0, 1.0])
    sol = solve_mcfp(inst)
    assert sol.phi == pytest.approx(2 * (E1 + E4), abs=1e-8)


def test_single_commodity_bridge_matches_min_cut(model):
    scenario = Scenario(
        np.array([[0.0, 0.0], [2.0, 0.0]]),
        np.array([[1.0, 0.0]]),
        model,
        (CommoditySpec(sink=0, sources=(1,)),),
    )
    sol = solve_mcfp(build_instance(scenario, [1.0]))
    assert sol.phi == pytest.approx(E1 + E4, abs=1e-8)


def test_verify_passes_on_optimal(bridge_scenario):
    inst = build_instance(bridge_scenario, [1.0, 1.0])
    report = verify_solution(inst, solve_mcfp(inst))
    assert report.passed
    assert report.complementarity <= 1e-8


def test_verify_catches_hand_perturbed_flow(bridge_scenario):
    inst = build_instance(bridge_scenario, [1.0, 1.0])
    sol = solve_mcfp(inst)
    r_bad = sol.r.copy()
    r_bad[0, 1, 0] += 0.1
    bad = dataclasses.replace(sol, r=r_bad)
    report = verify_solution(inst, bad)
    assert not report.passed
    assert report.primal_residual >= 0.1 - 1e-6


def test_slack_edges_carry_no_price(model):
    # one-hot weights leave the edges serving other commodities unused
    scenario = Scenario(
        np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.4]]),
        np.zeros((0, 2)),
        model,
        default_commodities(3),
    )
    inst = build_instance(scenario, weight_preset("ap:0", 3))
    sol = solve_mcfp(inst)
    total = sol.r.sum(axis=2)
    slack = inst.capacities - total
    big_slack = slack >= 0.1
    np.fill_diagonal(big_slack, False)
    assert np.any(big_slack)
    assert np.max(sol.mu[big_slack]) <= 1e-6
    assert verify_solution(inst, sol).slack_mu_max <= 1e-6


def test_epigraph_matches_minimum_injection(model):
    scenario = spawn_scenario(ScenarioConfig(num_task=4, num_relay=1, rng_seed=3), model)
    weights = np.array([1.0, 0.5, 2.0, 1.0])
    sol = solve_mcfp(build_instance(scenario, weights))
    for k, com in enumerate(scenario.commodities):
        min_a = min(sol.a[k, i] for i in com.sources)
        assert sol.t[k] == pytest.approx(min_a, abs=1e-6)


def test_relay_conservation_and_capacity_respect(model):
    scenario = spawn_scenario(ScenarioConfig(num_task=5, num_relay=2, rng_seed=8), model)
    inst = build_instance(scenario, np.ones(5))
    sol = solve_mcfp(inst)
    out_flow = sol.r.sum(axis=1)
    in_flow = sol.r.sum(axis=0)
    for i in inst.relay_set:
        np.testing.assert_allclose(out_flow[i], in_flow[i], atol=1e-6)
    assert np.all(sol.r.sum(axis=2) <= inst.capacities + 1e-6)


def test_phi_monotone_in_capacity(model):
    rng = np.random.default_rng(17)
    for trial in range(4):
        scenario = spawn_scenario(
            ScenarioConfig(num_task=3, num_relay=1, rng_seed=30 + trial), model
        )
        inst = build_instance(scenario, np.ones(3))
        base = solve_mcfp(inst).phi
        c2 = inst.capacities.copy()
        i, j = rng.choice(inst.num_agents, size=2, replace=False)
        c2[i, j] = min(1.0, c2[i, j] + 0.05)
        c2[j, i] = c2[i, j]  # keep the matrix symmetric
        raised = solve_mcfp(inst.with_capacities(c2)).phi
        assert raised >= base - 1e-7


def _asym_instance(inst, c_new):
    """Bypass the symmetry validator for a directional capacity bump."""
    bumped = McfpInstance.__new__(McfpInstance)
    bumped.capacities = c_new
    bumped.commodities = inst.commodities
    bumped.weights = inst.weights
    bumped.relay_set = inst.relay_set
    return bumped


def test_duals_predict_capacity_sensitivity(two_agents_unit):
    # non-degenerate instance: each commodity saturates its single edge,
    # so the shadow price of that edge is the slope of the optimum
    inst = build_instance(two_agents_unit, [1.0, 1.0])
    sol = solve_mcfp(inst)
    h = 1e-4
    i, j = 1, 0
    assert sol.mu[i, j] > 0.01
    c_bump = inst.capacities.copy()
    c_bump[i, j] += h
    lifted = solve_mcfp(_asym_instance(inst, c_bump))
    predicted = sol.mu[i, j] * h
    actual = lifted.phi - sol.phi
    assert actual == pytest.approx(predicted, rel=0.1)


def test_oracle_equivalence_small_instances(model):
    # every instance with at most 4 agents checked against the
    # independently built scipy LP
    cases = []
    for seed in range(6):
        cases.append(spawn_scenario(ScenarioConfig(num_task=2, num_relay=seed % 3, rng_seed=seed), model))
    cases.append(
        Scenario(np.array([[0.0, 0.0], [1.0, 0.0]]), np.zeros((0, 2)), model, default_commodities(2))
    )
    cases.append(
        Scenario(np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([[1.0, 0.0]]), model, default_commodities(2))
    )
    cases.append(
        Scenario(
            np.array([[0.0, 0.0], [1.5, 0.5]]),
            np.array([[0.5, 0.1], [1.0, 0.4]]),
            model,
            (CommoditySpec(sink=0, sources=(1,)), CommoditySpec(sink=1, sources=(0,))),
        )
    )
    weight_choices = [None, "ap:0", "subset:1"]
    for idx, scenario in enumerate(cases):
        assert scenario.num_agents <= 4
        kind = weight_choices[idx % len(weight_choices)]
        weights = weight_preset(kind, 2) if kind else np.ones(2)
        inst = build_instance(scenario, weights)
        sol = solve_mcfp(inst)
        assert sol.phi == pytest.approx(oracle_phi(inst), abs=1e-5)


def test_every_solve_is_verified(model):
    for seed in range(3):
        scenario = spawn_scenario(ScenarioConfig(num_task=4, num_relay=2, rng_seed=50 + seed), model)
        for kind in ["adhoc", "ap:1", "subset:0,2"]:
            inst = build_instance(scenario, weight_preset(kind, 4))
            report = verify_solution(inst, solve_mcfp(inst))
            assert report.passed, (seed, kind, report)


def test_flow_solution_json_shape(bridge_scenario):
    inst = build_instance(bridge_scenario, [1.0, 1.0])
    sol = solve_mcfp(inst)
    doc = flow_solution_to_dict(sol)
    assert set(doc) == {"phi", "mu", "r", "a", "gap", "status"}
    assert doc["phi"] == pytest.approx(sol.phi)
    assert len(doc["mu"]) == 3 and len(doc["mu"][0]) == 3
    assert all(len(entry) == 4 for entry in doc["r"])
    assert all(len(entry) == 3 for entry in doc["a"])
    json.dumps(doc)  # must be serializable as is


def test_instance_validation():
    with pytest.raises(ValueError):
        McfpInstance(np.array([[0.0, 2.0], [2.0, 0.0]]), default_commodities(2), [1, 1], ())
    with pytest.raises(ValueError):
        McfpInstance(np.array([[0.0, 0.5], [0.4, 0.0]]), default_commodities(2), [1, 1], ())
    with pytest.raises(ValueError):
        McfpInstance(np.array([[0.1, 0.5], [0.5, 0.1]]), default_commodities(2), [1, 1], ())
