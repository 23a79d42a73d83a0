from fractions import Fraction

import pytest

from projconf.affine import MetricField, WeylStructureField
from projconf.symkernel import Chart


def r2(chart):
    return sum((v * v for v in chart.vars()), chart.zero())


def round_sphere(chart):
    """Stereographic round metric 4 |dx|^2 / (1 + |x|^2)^2."""
    f = chart.const(4) / (r2(chart) + 1) ** 2
    return MetricField.diagonal(chart, [f] * chart.n)


def hyperbolic_ball(chart):
    """Poincare ball 4 |dx|^2 / (1 - |x|^2)^2."""
    f = chart.const(4) / (1 - r2(chart)) ** 2
    return MetricField.diagonal(chart, [f] * chart.n)


def klein_ball(chart):
    """Beltrami-Klein ball: dx^2/(1-|x|^2) + (x.dx)^2/(1-|x|^2)^2."""
    s = 1 - r2(chart)
    x = chart.vars()
    n = chart.n
    rows = [[(1 if i == j else 0) / s + x[i] * x[j] / (s * s) for j in range(n)] for i in range(n)]
    return MetricField(chart, rows)


def conformally_curved_metric(chart):
    """diag(1, 1 + x0^2, 1): not conformally flat in dimension 3."""
    x0 = chart.var("x0")
    return MetricField.diagonal(chart, [chart.one(), 1 + x0 * x0, chart.one()])


@pytest.fixture
def chart3():
    return Chart(3)


@pytest.fixture
def chart4():
    return Chart(4)


@pytest.fixture
def fiber_chart():
    return Chart.with_fiber()


def flat_weyl(chart):
    return WeylStructureField(MetricField.flat(chart))


HALF = Fraction(1, 2)
