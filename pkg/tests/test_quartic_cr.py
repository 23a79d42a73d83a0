from fractions import Fraction

import flint
import pytest

from projconf.affine import MetricField
from projconf.corpus import planted_quartic, random_connection, random_covector, rng_for
from projconf.projective import projective_weyl
from projconf.quartic_cr import (
    QuarticCoefficients,
    QuarticError,
    bracket,
    classify_quartic,
    contact_pairing,
    count_real_roots,
    membership_defect,
    paracr_frame,
    paracr_torsion_diagnostics,
    predicted_defect,
    printed_paracr_frame,
    sturm_sequence,
    transform_quartic,
    twistor_quartic_type,
)
from projconf.symkernel import Chart
from projconf.tensor import ConnectionField

from conftest import klein_ball, round_sphere
from oracles import quartic_partition_numeric


def test_classify_zero():
    assert classify_quartic([0, 0, 0, 0, 0]).label == "Zero"


def test_classify_type_n():
    rt = classify_quartic([1, 0, 0, 0, 0])
    assert rt.label == "TypeN"
    assert rt.as_dict()["root"] == "[0:1]"
    assert rt.as_dict()["multiplicity"] == 4


def test_classify_two_real_one_pair():
    rt = classify_quartic([1, 0, 0, 0, -1])
    assert rt.label == "Typed"
    assert [r.point for r in rt.real_roots] == ["[-1:1]", "[1:1]"]
    assert [r.multiplicity for r in rt.real_roots] == [1, 1]
    assert rt.complex_pairs == (1,)


def test_classify_root_at_infinity():
    # only the b^4 term: a single root [1:0] of multiplicity 4
    rt = classify_quartic([0, 0, 0, 0, 1])
    assert rt.label == "TypeN" and rt.as_dict()["root"] == "[1:0]"


def test_irrational_roots_reported_by_degree():
    # a^4 - 2 a^2 b^2 ... t^4 - 12 t^2 + 2: (C2 = -2) has four irrational real roots
    rt = classify_quartic([1, 0, -2, 0, Fraction(2)])
    assert rt.partition() == ((1, 1, 1, 1), ())
    assert all(r.point is None and r.degree == 4 for r in rt.real_roots)


def test_repeated_complex_pair():
    # (t^2 + 1)^2 = t^4 + 2 t^2 + 1
    rt = classify_quartic([1, 0, Fraction(1, 3), 0, 1])
    assert rt.partition() == ((), (2,))


def test_sturm_count():
    x = flint.fmpq_poly([0, 1])
    assert count_real_roots((x - 1) * (x + 2) * (x * x + 1)) == 2
    assert count_real_roots(x * x + 1) == 0
    assert len(sturm_sequence(x**3 - x)) == 4


def test_invariance_under_scaling_and_transformation():
    rng = rng_for(55)
    for _ in range(20):
        c = QuarticCoefficients.from_sequence(planted_quartic(rng))
        base = classify_quartic(c).partition()
        assert classify_quartic(c.scaled(Fraction(-7, 3))).partition() == base
        m = ((2, 1), (1, 1))
        assert classify_quartic(transform_quartic(c, m)).partition() == base


def test_bad_coefficient_count():
    with pytest.raises(QuarticError):
        classify_quartic([1, 2, 3])


def test_classifier_matches_numeric_oracle_on_planted():
    rng = rng_for(99)
    for _ in range(100):
        c = planted_quartic(rng)
        assert classify_quartic(c).partition() == quartic_partition_numeric(c)


def test_twistor_type():
    c = Chart(3)
    assert twistor_quartic_type(MetricField.flat(c)).kind == "Zero"
    assert twistor_quartic_type(round_sphere(c)).kind == "Zero"
    assert twistor_quartic_type(klein_ball(c)).kind == "Zero"
    g = MetricField.diagonal(c, [c.one(), 1 + c.var("x0") ** 2, 1 + c.var("x1") ** 2])
    t = twistor_quartic_type(g)
    assert t.kind == "TypeN" and t.root == "[0:1]" and t.multiplicity == 4
    assert not t.leading_coefficient.is_zero()
    assert t.as_dict()["cotton_component"] == list(t.component)
    rt = classify_quartic([t.leading_coefficient.evaluate((1, 2, 3)), 0, 0, 0, 0])
    assert rt.label == "TypeN"
    with pytest.raises(QuarticError):
        twistor_quartic_type(MetricField.flat(Chart(4)))


def _fiber(c):
    f = c.lifted()
    return f, f.var("p1"), f.var("p2")


def test_frame_of_flat_connection():
    c = Chart(3)
    f, p1, p2 = _fiber(c)
    v1, v2 = paracr_frame(ConnectionField.flat(c))
    assert v1 == (p1, f.one(), f.zero(), f.zero(), f.zero())
    assert v2 == (p2, f.zero(), f.one(), f.zero(), f.zero())


def test_frame_single_entry():
    c = Chart(3)
    f, p1, p2 = _fiber(c)
    v1, v2 = paracr_frame(ConnectionField.from_entries(c, {(0, 1, 1): c.one()}))
    assert v1 == (p1, f.one(), f.zero(), -f.one(), f.zero())
    assert v2 == (p2, f.zero(), f.one(), f.zero(), f.zero())


def test_contact_condition_random():
    c = Chart(3)
    rng = rng_for(60)
    f = c.lifted()
    for _ in range(5):
        conn = random_connection(c, rng)
        for v in paracr_frame(conn) + printed_paracr_frame(conn):
            assert contact_pairing(v, f).is_zero()


def test_bracket_in_span_for_flat_projective():
    c = Chart(3)
    f = c.lifted()
    rng = rng_for(61)
    for _ in range(3):
        conn = ConnectionField.flat(c).projective_change(random_covector(c, rng))
        v1, v2 = paracr_frame(conn)
        assert all(e.is_zero() for e in membership_defect(v1, v2, f))


def test_printed_frame_not_involutive_for_flat_projective():
    c = Chart(3)
    f = c.lifted()
    v1, v2 = printed_paracr_frame(levi_civita_sphere(c))
    assert not all(e.is_zero() for e in membership_defect(v1, v2, f))


def levi_civita_sphere(c):
    from projconf.affine import levi_civita

    return levi_civita(round_sphere(c))


def test_defect_equals_weyl_contraction():
    c = Chart(3)
    f = c.lifted()
    rng = rng_for(62)
    for _ in range(3):
        conn = random_connection(c, rng)
        v1, v2 = paracr_frame(conn)
        assert membership_defect(v1, v2, f) == predicted_defect(projective_weyl(conn), f)


def test_bracket_is_antisymmetric():
    c = Chart(3)
    f = c.lifted()
    v1, v2 = paracr_frame(random_connection(c, rng_for(63)))
    b12, b21 = bracket(v1, v2, f), bracket(v2, v1, f)
    assert all((x + y).is_zero() for x, y in zip(b12, b21))


def test_planted_example_report():
    c = Chart(3)
    conn = ConnectionField.from_entries(c, {(0, 1, 1): c.var("x2")})
    samples = [(0, 0, 1, 0, 0), (1, 2, 3, Fraction(1, 2), 1), (-1, 1, 0, 2, -3)]
    report = paracr_torsion_diagnostics(conn, samples)
    assert report.contact_ok and not report.bracket_in_span
    for row in report.rows:
        assert row.defect_values == [0, 1, 0]
        assert row.weyl_components == [-1, 0]
        assert row.covanish and row.prediction_matches


def test_flat_report():
    c = Chart(3)
    report = paracr_torsion_diagnostics(ConnectionField.flat(c), [(0, 0, 0, 0, 0), (1, 1, 1, 1, 1)])
    assert report.bracket_in_span
    assert all(r.defect_values == [0, 0, 0] and r.weyl_components == [0, 0] for r in report.rows)


def test_sample_shape_checked():
    with pytest.raises(QuarticError):
        paracr_torsion_diagnostics(ConnectionField.flat(Chart(3)), [(0, 0, 0)])
