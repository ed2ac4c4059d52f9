import math

import numpy as np
import pytest

from renyibounds.optimize import (INF, ScalarObjective, fenchel_conjugate_2d,
                                  maximize_1d, minimize_1d)


def test_minimize_unconstrained_quadratic():
    res = minimize_1d(ScalarObjective(lambda x: (x - 2.0) ** 2, convexity="convex"))
    assert abs(res.arg - 2.0) < 1e-6
    assert res.value < 1e-12
    assert res.converged


def test_minimize_on_half_line():
    # minimum of x + 1/x on (0, inf) is 2 at x = 1
    res = minimize_1d(ScalarObjective(lambda x: x + 1.0 / x, lo=0.0))
    assert abs(res.arg - 1.0) < 1e-6
    assert abs(res.value - 2.0) < 1e-10


def test_minimize_on_bounded_interval():
    res = minimize_1d(ScalarObjective(lambda x: -math.log(x) - math.log(1 - x),
                                      lo=0.0, hi=1.0))
    assert abs(res.arg - 0.5) < 1e-6


def test_monotone_objective_reports_boundary():
    res = minimize_1d(ScalarObjective(lambda x: 1.0 / (1.0 + x), lo=0.0))
    assert res.boundary
    assert not res.converged
    assert res.value < 1e-8


def test_minimize_skips_infinite_plateau():
    def f(x):
        return INF if x < 1.0 else (x - 3.0) ** 2

    res = minimize_1d(ScalarObjective(f))
    assert abs(res.arg - 3.0) < 1e-6


def test_maximize_concave():
    res = maximize_1d(ScalarObjective(lambda x: -(x - 1.5) ** 2 + 4.0,
                                      convexity="concave"))
    assert abs(res.arg - 1.5) < 1e-6
    assert abs(res.value - 4.0) < 1e-10


def test_conjugate_of_quadratic():
    # f(lam) = |lam|^2 / 2 has conjugate |x|^2 / 2
    f = lambda lam: 0.5 * float(lam[0] ** 2 + lam[1] ** 2)
    for x in [(0.0, 0.0), (1.0, -2.0), (3.0, 0.5)]:
        want = 0.5 * (x[0] ** 2 + x[1] ** 2)
        got = fenchel_conjugate_2d(f, x)
        assert abs(got - want) < 1e-6


def test_conjugate_with_domain_boundary():
    # f(lam) = -log(1 - lam1) + lam2^2/2 on lam1 < 1;
    # conjugate in x1 (for x1 > 0) is x1 - 1 - log x1, plus x2^2/2
    def f(lam):
        if lam[0] >= 1.0:
            return INF
        return -math.log(1.0 - lam[0]) + 0.5 * lam[1] ** 2

    for x1 in (0.5, 1.0, 2.0):
        want = x1 - 1.0 - math.log(x1)
        got = fenchel_conjugate_2d(f, (x1, 0.0))
        assert abs(got - want) < 1e-5


def test_conjugate_unbounded_direction_is_inf():
    f = lambda lam: float(lam[0])  # linear: conjugate finite only at x = (1, 0)
    assert fenchel_conjugate_2d(f, (2.0, 0.0)) == INF
