from fractions import Fraction

import pytest

from projconf.affine import MetricField, levi_civita
from projconf.symkernel import Chart
from projconf.tensor import (
    DOWN,
    UP,
    ConnectionField,
    TensorError,
    TensorField,
    antisymmetrize,
    contract,
    covariant_derivative,
    covector,
    kronecker,
    lower_index,
    outer,
    raise_index,
    sym_antisym,
    symmetrize,
    vector,
)

from conftest import round_sphere


def test_kronecker_trace():
    c = Chart(3)
    t = contract(kronecker(c), 0, 1)
    assert t.rank == 0
    assert t[()] == c.const(3)


def test_contract_outer():
    c = Chart(3)
    u = vector(c, [1, 2, 3])
    w = covector(c, [1, 1, 1])
    assert contract(outer(u, w), 0, 1)[()] == c.const(6)


@pytest.mark.parametrize("eps", [1, -1])
def test_metric_times_inverse_is_identity(eps):
    c = Chart(3)
    g = MetricField.flat(c, eps)
    prod = contract(outer(g.inverse, g.g), 1, 2)
    assert prod == kronecker(c)


def test_contract_needs_metric_for_equal_variance():
    c = Chart(3)
    g = MetricField.flat(c)
    with pytest.raises(TensorError):
        contract(g.g, 0, 1)
    assert contract(g.g, 0, 1, metric=g)[()] == c.const(3)


def test_antisymmetric_part_of_symmetric_is_zero():
    c = Chart(3)
    x0, x1, _ = c.vars()
    a = TensorField.from_nested(c, (DOWN, DOWN), [[x0, x1, 1], [x1, 2, x0], [1, x0, 5]])
    assert antisymmetrize(a, (0, 1)).is_zero()
    assert symmetrize(a, (0, 1)) == a


def test_round_bracket_on_counter_tensor():
    c = Chart(2)
    a = TensorField(c, (DOWN, DOWN, DOWN), list(range(8)))
    s = sym_antisym(a, (0, 1), "round")
    for i, j, k in a.indices():
        assert s[i, j, k] == (a[i, j, k] + a[j, i, k]) * Fraction(1, 2)


def test_projectors_are_idempotent():
    c = Chart(3)
    a = TensorField(c, (DOWN,) * 3, [c.const(i * i - 3 * i) for i in range(27)])
    s = symmetrize(a, (0, 1, 2))
    assert symmetrize(s, (0, 1, 2)) == s
    alt = antisymmetrize(a, (0, 2))
    assert antisymmetrize(alt, (0, 2)) == alt
    assert symmetrize(alt, (0, 2)).is_zero()


def test_sym_antisym_rejects_bad_input():
    c = Chart(3)
    t = TensorField.zeros(c, (UP, DOWN))
    with pytest.raises(TensorError):
        sym_antisym(t, (0, 1), "round")
    with pytest.raises(TensorError):
        sym_antisym(TensorField.zeros(c, (DOWN, DOWN)), (0, 1), "curly")


def test_lower_then_raise_round_trip():
    c = Chart(3)
    g = round_sphere(c)
    x0, x1, x2 = c.vars()
    v = vector(c, [x1, x0 * x2, 1])
    assert raise_index(lower_index(v, 0, g), 0, g) == v


def test_transpose_and_arithmetic():
    c = Chart(3)
    x0 = c.var("x0")
    a = TensorField.from_function(c, (DOWN, DOWN), lambda i, j: x0 * (i - j))
    assert a.transpose((1, 0)) == -a
    assert (a + a - a * 2).is_zero()
    assert (a / 2) * 2 == a


def test_connection_must_be_torsion_free():
    c = Chart(3)
    bad = TensorField.zeros(c, (UP, DOWN, DOWN)).to_strings()
    bad[0][1][2] = "1"
    with pytest.raises(TensorError):
        ConnectionField(c, TensorField.from_nested(c, (UP, DOWN, DOWN), bad))


def test_from_entries_fills_symmetric_partner():
    c = Chart(3)
    conn = ConnectionField.from_entries(c, {(0, 1, 2): c.var("x1")})
    assert conn[0, 2, 1] == c.var("x1")


def test_projective_change():
    c = Chart(3)
    f = covector(c, [1, 0, 0])
    conn = ConnectionField.flat(c).projective_change(f)
    assert conn[0, 0, 0] == c.const(2)
    assert conn[1, 1, 0] == c.const(1)
    assert conn[1, 1, 1].is_zero()


def test_metric_is_parallel_for_levi_civita():
    c = Chart(3)
    g = round_sphere(c)
    assert covariant_derivative(g.g, levi_civita(g)).is_zero()


def test_covariant_derivative_of_vector_in_flat_space_is_gradient():
    c = Chart(3)
    x0, x1, x2 = c.vars()
    v = vector(c, [x0 * x1, x2, 0])
    dv = covariant_derivative(v, ConnectionField.flat(c))
    assert dv[0, 1] == x0
    assert dv[1, 2] == c.one()
    assert dv[2, 0].is_zero()


def test_to_strings_nesting():
    c = Chart(3)
    assert covector(c, [0, 0, 0]).to_strings() == ["0", "0", "0"]
    assert len(kronecker(c).to_strings()) == 3
    assert kronecker(c).to_strings()[1] == ["0", "1", "0"]
