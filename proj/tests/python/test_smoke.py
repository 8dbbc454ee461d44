import json
import math

import numpy as np
import pytest
from scipy.optimize import linprog

import dpos


def two_tenant():
    market = dpos.MarketSetup([0.5], [1.9], [2.6])
    return dpos.Instance(market, [[0.6], [0.6]], [1.2, 1.5])


def test_closed_form_schedule():
    schedule = dpos.PricingSchedule(dpos.MarketSetup([1.0], [2.0], [1.0 + math.e]))
    assert schedule.threshold(0) == pytest.approx(0.5, abs=1e-12)
    assert schedule.competitive_ratio == pytest.approx(2.0, abs=1e-12)
    assert schedule.price(0, 0.25) == 2.0
    assert schedule.price(0, 1.0) == pytest.approx(1.0 + math.e, abs=1e-12)
    assert schedule.price(0, 1.5) == math.inf


def test_bad_market_raises():
    with pytest.raises(dpos.DposError):
        dpos.MarketSetup([2.0], [1.0], [3.0])


def test_generated_instance_round_trip():
    inst = dpos.generate_instance(tenants=20, resources=3, seed=4)
    assert inst.demands.shape == (20, 3)
    assert dpos.validate_instance(inst) == []
    assert dpos.Instance.from_json(inst.to_json()) == inst
    assert dpos.generate_instance(tenants=20, resources=3, seed=4) == inst


def test_session_accounting():
    inst = dpos.generate_instance(tenants=40, resources=2, seed=9)
    result = dpos.run_session(inst)
    payments = np.array(result["payments"])
    accepted = np.array(result["accepted"])
    assert np.all(payments[~accepted] == 0.0)
    assert result["revenue"] == pytest.approx(payments.sum())
    assert np.all(np.array(result["utilization"]) <= 1.0 + 1e-12)
    assert result["welfare"] == pytest.approx(dpos.social_welfare(inst, result["accepted"]))
    assert result["dual_objective"] >= dpos.offline_exact(inst)["objective"] - 1e-9
    assert dpos.validate_transcript(result["transcript"]) == []


def test_transcript_rejects_private_fields():
    result = dpos.run_session(two_tenant())
    first = json.loads(result["transcript"].splitlines()[0])
    first["valuation"] = 1.2
    problems = dpos.validate_transcript(json.dumps(first) + "\n")
    assert problems and problems[0][0] == 1


def test_oracle_matches_small_example():
    exact = dpos.offline_exact(two_tenant())
    assert exact["objective"] == pytest.approx(1.2)
    assert exact["decisions"] == [False, True]
    assert dpos.scpa_adapted(two_tenant())["welfare"] == pytest.approx(1.2)


@pytest.mark.parametrize("seed", range(10))
def test_lp_bound_matches_scipy(seed):
    inst = dpos.generate_instance(tenants=15, resources=3, seed=seed, demand_mean=0.15)
    demands = inst.demands
    profit = np.array(inst.valuations) - demands @ np.array(inst.market.cost_coeffs)
    keep = profit > 0
    if not keep.any():
        assert dpos.lp_upper_bound(inst) == 0.0
        return
    res = linprog(-profit[keep], A_ub=demands[keep].T, b_ub=np.ones(3), bounds=(0, 1), method="highs")
    assert res.success
    assert dpos.lp_upper_bound(inst) == pytest.approx(-res.fun, rel=1e-9, abs=1e-12)


def test_experiment_rows_and_summary():
    spec = {"algorithms": ["dpos", "ms", "oracle"], "config": {"tenants": 10, "resources": 2},
            "trials": 4, "seed": 3, "timing": False}
    rows = dpos.run_experiment(spec)
    assert len(rows) == 12
    assert {r["algo"] for r in rows} == {"dpos", "ms", "exact"}
    assert rows == dpos.run_experiment(json.dumps(spec))
    summary = dpos.summarize(rows).splitlines()
    assert len(summary) == 4
    with pytest.raises(dpos.DposError):
        dpos.run_experiment({"trials": 0})
