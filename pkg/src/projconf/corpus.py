"""Seeded random inputs for property suites and the ``identities`` command."""

from __future__ import annotations

import random
from fractions import Fraction

import flint

from .affine import MetricField, WeylStructureField
from .symkernel import Chart
from .projective import thomas
from .tensor import DOWN, ConnectionField, TensorField


def rng_for(seed):
    return random.Random(int(seed))


def random_linear(chart, rng, bound=3):
    """a + sum b_i x_i with integer coefficients in [-bound, bound]."""
    e = chart.const(rng.randint(-bound, bound))
    for v in chart.base:
        c = rng.randint(-bound, bound)
        if c:
            e = e + chart.var(v) * c
    return e


def random_connection(chart, rng, bound=3):
    entries = {}
    n = chart.n
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                entries[i, j, k] = random_linear(chart, rng, bound)
    return ConnectionField.from_entries(chart, entries)


def random_covector(chart, rng, bound=3):
    return TensorField(chart, (DOWN,), [random_linear(chart, rng, bound) for _ in range(chart.n)])


def random_metric(chart, rng, signature=1, scale=Fraction(1, 5)):
    """Flat model diag(1, s, ..., s) plus a small symmetric linear perturbation."""
    n = chart.n
    rows = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            e = random_linear(chart, rng) * scale
            if i == j:
                e = e + (1 if i == 0 else signature)
            rows[i][j] = rows[j][i] = e
    return MetricField(chart, rows, signature)


def random_weyl(chart, rng, signature=1):
    return WeylStructureField(random_metric(chart, rng, signature), random_covector(chart, rng))


def random_sigma(chart, rng):
    """A rational conformal factor that is not identically zero: (2 + l1)/(3 + l2)."""
    return (random_linear(chart, rng, 1) + 2) / (random_linear(chart, rng, 1) + 3)


def random_quartic(rng, bound=10):
    """Random rational coefficients (C4..C0) with absolute value at most ``bound``."""
    out = []
    for _ in range(5):
        den = rng.randint(1, 4)
        out.append(Fraction(rng.randint(-bound * den, bound * den), den))
    return out


def planted_quartic(rng):
    """Quartic with a prescribed multiplicity pattern, built from rational linear and quadratic factors."""
    patterns = [(4,), (3, 1), (2, 2), (2, 1, 1), ("q2",), ("q", 2), ("q", 1, 1), ("q", "q"), (1, 1, 1, 1), ("inf", 3), ("inf", 1, "q")]
    pattern = rng.choice(patterns)
    poly = flint.fmpq_poly([1])
    roots = rng.sample(range(-5, 6), 4)
    k = 0
    for item in pattern:
        if item == "inf":
            continue
        if item in ("q", "q2"):
            a, b = rng.randint(-3, 3), rng.randint(1, 4)
            quad = flint.fmpq_poly([a * a + b, -2 * a, 1])  # (t - a)^2 + b, no real roots
            poly *= quad ** (2 if item == "q2" else 1)
        else:
            poly *= flint.fmpq_poly([-roots[k], 1]) ** item
            k += 1
    lam = Fraction(rng.choice([-3, -2, -1, 1, 2, 5]), rng.randint(1, 3))
    coeffs = [Fraction(int(poly[i].p), int(poly[i].q)) * lam for i in range(5)]
    weights = [1, 4, 6, 4, 1]
    # q(t) = sum w_k C_k t^(4-k)
    return [coeffs[4 - k] / weights[k] for k in range(5)]


def random_thomas_connection(chart, rng):
    """Random trace-free connection (entries of degree <= 1)."""
    return thomas(random_connection(chart, rng)).as_connection()


def identity_corpus(seed, count3, count4):
    """Random Weyl structures in dimensions 3 and 4 with stable names."""
    rng = rng_for(seed)
    items = []
    for n, count in ((3, count3), (4, count4)):
        chart = Chart(n)
        for k in range(count):
            items.append((f"n{n}-{k:02d}", random_weyl(chart, rng)))
    return items


def geodesic_pair(chart, rng, scale=Fraction(1, 8)):
    """A connection, a projectively equivalent one, and initial data (x0, v0).

    Coefficients are kept small (integers in [-2, 2] times ``scale``) so that
    both geodesics stay regular over unit time.
    """
    a = random_connection(chart, rng, 2)
    a = ConnectionField(chart, a.gamma * scale)
    f = random_covector(chart, rng, 2) * scale
    x0 = [Fraction(rng.randint(-2, 2), 10) for _ in range(chart.n)]
    v0 = [Fraction(rng.randint(-5, 5), 5) or Fraction(1) for _ in range(chart.n)]
    return a, a.projective_change(f), x0, v0
