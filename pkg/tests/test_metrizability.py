from fractions import Fraction

import pytest

from projconf.affine import MetricField, WeylStructureField, weyl_connection
from projconf.corpus import random_covector, random_sigma, random_weyl, rng_for
from projconf.metrizability import (
    MetrizabilityError,
    _Data,
    beltrami_check,
    identity_residuals,
    q_from_p,
    qp_pair,
    verify_cwqp_identity,
    verify_qp_identity,
    verify_w_trace_identity,
    w_trace,
    w_trace_rhs_alternative,
    weyl_metrizable_with,
)
from projconf.symkernel import Chart
from projconf.tensor import DOWN, ConnectionField, TensorField, covector

from conftest import HALF, hyperbolic_ball, klein_ball, round_sphere
from oracles import riemann_numeric


@pytest.fixture
def c():
    return Chart(3)


def _p(chart, entries):
    return TensorField.from_function(chart, (DOWN, DOWN), lambda i, j: chart.const(entries.get((i, j), 0)))


def test_q_from_p_examples(c):
    g = MetricField.flat(c)
    assert q_from_p(_p(c, {}), g).is_zero()
    assert q_from_p(g.g, g) == g.g * 2
    q = q_from_p(_p(c, {(0, 1): 1}), g)
    assert q == _p(c, {(0, 1): Fraction(5, 8), (1, 0): Fraction(-1, 8)})


def test_q_from_p_needs_n3():
    c2 = Chart(2)
    with pytest.raises(MetrizabilityError):
        q_from_p(_p(c2, {}), MetricField.flat(c2))


def test_flat_identities_vanish(c):
    w = WeylStructureField(MetricField.flat(c))
    assert verify_qp_identity(w).is_zero()
    assert verify_w_trace_identity(w).is_zero()
    c4 = Chart(4)
    assert verify_cwqp_identity(WeylStructureField(MetricField.flat(c4))).is_zero()


@pytest.mark.parametrize("signature", [1, -1])
def test_identities_random_n3(c, signature):
    rng = rng_for(100 + signature)
    for _ in range(3):
        res = identity_residuals(random_weyl(c, rng, signature))
        assert set(res) == {"qp", "w_trace"}
        assert all(r.is_zero() for r in res.values())


def test_identities_conformally_flat_n4():
    c4 = Chart(4)
    sigma = 1 + c4.var("x0") ** 2
    w = WeylStructureField(MetricField.flat(c4).scaled(sigma**2))
    d = _Data(w)
    assert not d.weyl.is_zero() and not d.p.is_zero() and not d.q.is_zero()
    assert verify_cwqp_identity(w, d).is_zero()
    assert verify_qp_identity(w, d).is_zero()
    assert verify_w_trace_identity(w, d).is_zero()


def test_cwqp_rejects_n3(c):
    with pytest.raises(MetrizabilityError):
        verify_cwqp_identity(WeylStructureField(MetricField.flat(c)))


def test_unit_weight_cwqp_and_alternative_w_trace_fail():
    c4 = Chart(4)
    w = random_weyl(c4, rng_for(77))
    d = _Data(w)
    assert verify_cwqp_identity(w, d).is_zero()
    assert not verify_cwqp_identity(w, d, weight=1).is_zero()
    assert not (w_trace(d.weyl, d.g) - w_trace_rhs_alternative(d.p, d.g)).is_zero()


def test_qp_identity_against_numeric_curvature(c):
    # Q from numerically differentiated curvature versus q_from_p of the exact P
    w = random_weyl(c, rng_for(5))
    conn = weyl_connection(w)
    pair = qp_pair(w)
    pt = (Fraction(1, 7), Fraction(-1, 3), Fraction(1, 2))
    R = riemann_numeric(conn, pt)
    ric = [[sum(R[i, j, i, l] for i in range(3)) for l in range(3)] for j in range(3)]
    for j in range(3):
        for l in range(3):
            q = -(ric[j][l] + ric[l][j]) / 4 - (ric[j][l] - ric[l][j]) / 8
            assert abs(float(pair.q[j, l].evaluate(pt)) - float(q)) < 1e-15
    assert q_from_p(pair.p, w.metric) == pair.q


def test_metrizable_flat(c):
    beta, f = weyl_metrizable_with(ConnectionField.flat(c), MetricField.flat(c))
    assert beta.is_zero() and f.is_zero()


def test_metrizable_recovers_beta(c):
    beta = covector(c, [Fraction(5, 2), 0, 0])
    rep = weyl_connection(WeylStructureField(MetricField.flat(c), beta))
    got, f = weyl_metrizable_with(rep, MetricField.flat(c))
    assert got == beta and f.is_zero()


def test_metrizable_klein(c):
    beta, f = weyl_metrizable_with(ConnectionField.flat(c), klein_ball(c))
    assert beta.is_zero()
    assert not f.is_zero()


def test_metrizable_round_trip_and_rescaling(c):
    rng = rng_for(21)
    for _ in range(3):
        w = random_weyl(c, rng)
        f0 = random_covector(c, rng)
        rep = weyl_connection(w).projective_change(f0)
        beta, f = weyl_metrizable_with(rep, w.metric)
        assert beta == w.beta and f == f0 * -1
        sigma = random_sigma(c, rng)
        w2 = w.rescaled(sigma)
        beta2, _ = weyl_metrizable_with(rep, w2.metric)
        assert beta2 == w2.beta


def test_not_metrizable(c):
    rep = ConnectionField.from_entries(c, {(0, 1, 1): c.var("x2")})
    assert weyl_metrizable_with(rep, MetricField.flat(c)) is None


def test_beltrami_model_spaces(c):
    for g, factor in [
        (MetricField.flat(c), 0),
        (round_sphere(c), -HALF),
        (hyperbolic_ball(c), HALF),
        (klein_ball(c), HALF),
    ]:
        v = beltrami_check(WeylStructureField(g))
        assert v.projective_weyl_zero and v.conformally_flat
        assert v.rho_pure_trace and v.rho_factor_constant
        assert v.rho_factor == c.const(factor)


def test_beltrami_n4_sphere():
    v = beltrami_check(WeylStructureField(round_sphere(Chart(4))))
    assert v.projective_weyl_zero and v.conformally_flat and v.rho_factor_constant


def test_beltrami_non_flat_case(c):
    g = MetricField.diagonal(c, [c.one(), 1 + c.var("x0") ** 2, 1 + c.var("x1") ** 2])
    v = beltrami_check(WeylStructureField(g))
    assert not v.projective_weyl_zero
    assert v.implication_holds


def test_beltrami_rescaled_gauge(c):
    # the projective Weyl tensor of (sigma^2 g_sphere, beta + dsigma/sigma) is that of the sphere
    w = WeylStructureField(round_sphere(c)).rescaled(c.var("x0") + 2)
    v = beltrami_check(w)
    assert v.projective_weyl_zero and v.conformally_flat and v.rho_pure_trace
    assert not v.rho_factor_constant


def test_beltrami_random_corpus_has_no_counterexample(c):
    rng = rng_for(31)
    for _ in range(4):
        assert beltrami_check(random_weyl(c, rng)).implication_holds
