import math

import numpy as np
import pytest

from renyibounds.divergence import FiniteDistribution, relative_entropy_rate
from renyibounds.scheduling import (SchedulingInstance, balanced_envelope,
                                    convexity_probe_m, f0_of_alpha,
                                    priority_order, rs_duality_check,
                                    rs_objective, reference_bound,
                                    robust_rs_bound, tilted_rates,
                                    w_bruteforce, w_of_gamma)

LEFT = dict(arrival_rates=(1.0, 1.5, 1.8, 2.0, 2.0),
            service_rates=(8.0, 10.0, 12.0, 9.0, 14.0),
            costs=(0.3, 0.2, 0.2, 0.1, 0.2))
RIGHT = dict(arrival_rates=(0.5, 0.75, 0.9, 1.0, 1.0),
             service_rates=LEFT["service_rates"], costs=LEFT["costs"])


def _inst(base, beta, delta):
    return SchedulingInstance.with_delta(
        base["arrival_rates"], base["service_rates"], base["costs"],
        beta=beta, horizon=1.0, delta=delta)


def test_single_class_tilted_value():
    inst = SchedulingInstance((1.0,), (2.0,), (1.0,), beta=0.5)
    w, u = w_of_gamma(inst, 1.0)
    want = math.expm1(1.0) - 2.0 * (1.0 - math.exp(-1.0))
    assert abs(w - 0.45404071) < 1e-7
    assert abs(w - want) < 1e-12
    assert u[0] == 1.0


def test_greedy_matches_bruteforce():
    rng = np.random.default_rng(7)
    step = 0.02
    for _ in range(50):
        n = rng.integers(1, 5)
        inst = SchedulingInstance(
            tuple(rng.uniform(0.2, 3.0, n)), tuple(rng.uniform(1.0, 15.0, n)),
            tuple(rng.uniform(0.05, 1.0, n)), beta=1.0)
        gamma = rng.uniform(0.2, 4.0)
        w1, _ = w_of_gamma(inst, gamma)
        w2 = w_bruteforce(inst, gamma, step=step)
        _, mu_hat = tilted_rates(inst, gamma)
        assert w1 <= w2 + 1e-9
        assert w2 - w1 <= step * float(np.sum(mu_hat)) + 1e-9


def test_traffic_intensities_of_figure_instances():
    assert abs(_inst(LEFT, 1.0, 0.15).traffic_intensity - 0.7901) < 1e-3
    assert abs(_inst(RIGHT, 1.0, 0.15).traffic_intensity - 0.3950) < 1e-3


def test_bound_orderings_across_beta():
    for base in (LEFT, RIGHT):
        for beta in (0.3, 1.0, 3.0, 8.0):
            ref = reference_bound(_inst(base, beta, 0.15)).bound
            for delta in (0.15, 0.65):
                inst = _inst(base, beta, delta)
                q2 = robust_rs_bound(inst, family="Q2").bound
                q3 = robust_rs_bound(inst, family="Q3").bound
                assert ref <= q3 + 1e-8
                assert q3 <= q2 + 1e-8
            small = robust_rs_bound(_inst(base, beta, 0.15), family="Q2").bound
            large = robust_rs_bound(_inst(base, beta, 0.65), family="Q2").bound
            assert small <= large + 1e-8


def test_lighter_traffic_never_costs_more():
    for beta in (0.5, 2.0, 6.0):
        heavy = robust_rs_bound(_inst(LEFT, beta, 0.15), family="Q2").bound
        light = robust_rs_bound(_inst(RIGHT, beta, 0.15), family="Q2").bound
        assert light <= heavy + 1e-8


def test_objective_midpoint_convex_in_inverse_tilt():
    for base in (LEFT, RIGHT):
        inst = _inst(base, 1.0, 0.3)
        gts = np.linspace(0.02, 0.98 / inst.beta, 41)
        vals = [rs_objective(inst, 1.0 / gt) for gt in gts]
        for i in range(len(gts) - 2):
            mid = rs_objective(inst, 1.0 / (0.5 * (gts[i] + gts[i + 2])))
            assert mid <= 0.5 * (vals[i] + vals[i + 2]) + 1e-7


def test_bound_beats_any_probed_tilt():
    inst = _inst(LEFT, 1.0, 0.3)
    res = robust_rs_bound(inst, family="Q2")
    for gamma in np.linspace(inst.beta + 0.01, 40.0, 300):
        assert res.bound <= rs_objective(inst, gamma) * inst.horizon + 1e-7
    assert res.gamma_star > inst.beta
    assert res.priority == priority_order(inst, res.gamma_star)


def test_priority_order_follows_tilted_service_rates():
    inst = _inst(LEFT, 1.0, 0.15)
    order = priority_order(inst, 2.0)
    _, mu_hat = tilted_rates(inst, 2.0)
    ranked = sorted(range(5), key=lambda i: (-mu_hat[i], i))
    assert order == tuple(ranked)


def test_penalty_vanishes_without_envelopes():
    inst = SchedulingInstance(LEFT["arrival_rates"], LEFT["service_rates"],
                              LEFT["costs"], beta=1.0)
    assert f0_of_alpha(inst, 2.0, family="Q2") == 0.0
    assert f0_of_alpha(inst, 2.0, family="Q3") == 0.0


def test_duality_residual_small_and_one_sided():
    q = FiniteDistribution((0.5, 0.3, 0.2))
    g = (0.4, -0.2, 1.0)
    coarse = rs_duality_check(q, q, g, beta=1.0, gamma=3.0, grid_step=0.05)
    fine = rs_duality_check(q, q, g, beta=1.0, gamma=3.0, grid_step=0.01)
    assert coarse <= 1e-9
    assert fine <= 1e-9
    assert fine >= coarse - 1e-12  # refinement approaches the identity
    assert fine > -2e-3
    with pytest.raises(ValueError):
        rs_duality_check(q, q, g, beta=3.0, gamma=1.0)


def test_moment_scaling_map_is_convex():
    rng = np.random.default_rng(2)
    xs = rng.lognormal(0.0, 1.0, size=400)
    assert convexity_probe_m(np.linspace(0.1, 5.0, 60), xs) == 0


def test_balanced_envelope_equalizes_entropy_rate():
    for b in (1.2, 1.5, 2.0):
        a = balanced_envelope(b)
        assert 0.0 < a < 1.0
        assert abs(relative_entropy_rate(a) - relative_entropy_rate(b)) < 1e-12
    with pytest.raises(ValueError):
        balanced_envelope(4.0)  # ell(4) > 1, no balancing point
    with pytest.raises(ValueError):
        balanced_envelope(0.9)
