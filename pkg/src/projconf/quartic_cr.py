"""Binary quartic root types, the twistor quartic of a conformal 3-structure,
and the para-CR frame of a projective 3-structure.

A quartic with coefficients (C4, C3, C2, C1, C0) is the binary form

    C4 a1^4 + 4 C3 a1^3 a2 + 6 C2 a1^2 a2^2 + 4 C1 a1 a2^3 + C0 a2^4

and its roots are points [a1:a2] of the real projective line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import flint

from .affine import MetricField, WeylStructureField
from .confweyl import cotton
from .projective import projective_weyl
from .symkernel import Expr, PoleError


class QuarticError(ValueError):
    pass


# quartics


@dataclass(frozen=True)
class QuarticCoefficients:
    c4: object
    c3: object
    c2: object
    c1: object
    c0: object

    @classmethod
    def from_sequence(cls, coeffs):
        """Build from (C4, C3, C2, C1, C0)."""
        coeffs = list(coeffs)
        if len(coeffs) != 5:
            raise QuarticError(f"a quartic needs 5 coefficients, got {len(coeffs)}")
        return cls(*coeffs)

    def as_tuple(self):
        return (self.c4, self.c3, self.c2, self.c1, self.c0)

    def scaled(self, lam):
        return QuarticCoefficients(*(c * lam for c in self.as_tuple()))

    def chart_polynomial(self):
        """q(t) = C4 t^4 + 4 C3 t^3 + 6 C2 t^2 + 4 C1 t + C0, the form at [t:1]."""
        vals = []
        for c in self.as_tuple():
            if isinstance(c, Expr):
                if not c.is_constant():
                    raise QuarticError("pointwise classification needs constant coefficients")
                c = c.constant_value()
            vals.append(Fraction(c))
        c4, c3, c2, c1, c0 = vals
        return flint.fmpq_poly([_q(c0), _q(4 * c1), _q(6 * c2), _q(4 * c3), _q(c4)])


def _q(x):
    x = Fraction(x)
    return flint.fmpq(x.numerator, x.denominator)


def _frac(q):
    return Fraction(int(q.p), int(q.q))


@dataclass(frozen=True)
class RealRoot:
    multiplicity: int
    point: str | None = None  # "[a1:a2]" for rational roots
    degree: int = 1  # algebraic degree of the root
    approx: float | None = None

    def as_dict(self):
        return {"root": self.point, "degree": self.degree, "multiplicity": self.multiplicity, "approx": self.approx}


@dataclass(frozen=True)
class RootType:
    kind: str  # "Zero" or "Typed"
    real_roots: tuple = ()
    complex_pairs: tuple = ()  # multiplicities of nonreal conjugate pairs

    @property
    def is_type_n(self):
        return self.kind == "Typed" and len(self.real_roots) == 1 and self.real_roots[0].multiplicity == 4

    @property
    def label(self):
        if self.kind == "Zero":
            return "Zero"
        return "TypeN" if self.is_type_n else "Typed"

    def partition(self):
        """(real multiplicities, complex-pair multiplicities), each sorted descending."""
        return (
            tuple(sorted((r.multiplicity for r in self.real_roots), reverse=True)),
            tuple(sorted(self.complex_pairs, reverse=True)),
        )

    def total_multiplicity(self):
        return sum(r.multiplicity for r in self.real_roots) + 2 * sum(self.complex_pairs)

    def as_dict(self):
        out = {
            "kind": self.label,
            "real_roots": [r.as_dict() for r in self.real_roots],
            "complex_pairs": list(self.complex_pairs),
        }
        if self.is_type_n:
            out["root"] = self.real_roots[0].point
            out["multiplicity"] = 4
        return out


def _sign_at_inf(poly, positive):
    d = poly.degree()
    lc = poly[d]
    s = 1 if lc > 0 else -1
    if not positive and d % 2 == 1:
        s = -s
    return s


def sturm_sequence(poly):
    seq = [poly, poly.derivative()]
    while seq[-1].degree() > 0:
        r = seq[-2] % seq[-1]
        if r == 0:
            break
        seq.append(-r)
    return seq


def count_real_roots(poly):
    """Number of distinct real roots of a squarefree polynomial (Sturm's theorem)."""
    if poly.degree() <= 0:
        return 0
    seq = sturm_sequence(poly)

    def changes(positive):
        signs = [_sign_at_inf(p, positive) for p in seq if p != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    return changes(False) - changes(True)


def _real_root_approximations(poly):
    roots = []
    for z in poly.complex_roots():
        r = z[0]
        if r.imag.contains(0) and abs(float(r.imag.mid())) < 1e-30:
            roots.append(float(r.real.mid()))
    return sorted(roots)


def _point_label(t):
    return f"[{t.numerator}:{t.denominator}]"


def classify_quartic(c):
    if not isinstance(c, QuarticCoefficients):
        c = QuarticCoefficients.from_sequence(c)
    q = c.chart_polynomial()
    if q == 0:
        return RootType("Zero")
    real = []
    pairs = []
    at_infinity = 4 - q.degree()
    if at_infinity:
        real.append((float("inf"), RealRoot(at_infinity, "[1:0]", 1, None)))
    content, factors = q.factor()
    for fac, mult in factors:
        d = fac.degree()
        if d == 1:
            t = -_frac(fac[0]) / _frac(fac[1])
            real.append((float(t), RealRoot(mult, _point_label(t), 1, float(t))))
            continue
        nreal = count_real_roots(fac)
        approx = _real_root_approximations(fac)
        if len(approx) != nreal:
            raise QuarticError("root isolation disagrees with the Sturm count")
        for a in approx:
            real.append((a, RealRoot(mult, None, d, a)))
        pairs.extend([mult] * ((d - nreal) // 2))
    real.sort(key=lambda item: item[0])
    rt = RootType("Typed", tuple(r for _, r in real), tuple(sorted(pairs, reverse=True)))
    if rt.total_multiplicity() != 4:
        raise QuarticError("multiplicities do not add up to 4")
    return rt


def transform_quartic(c, matrix):
    """Coefficients of the quartic after the substitution a1 -> a*a1 + b*a2, a2 -> c*a1 + d*a2."""
    (a, b), (cc, d) = matrix
    vals = [Fraction(x) for x in (c.as_tuple() if isinstance(c, QuarticCoefficients) else c)]
    weights = [1, 4, 6, 4, 1]
    # form as polynomial in s = a1 with a2 = 1, then read off homogeneous coefficients
    u = flint.fmpq_poly([_q(b), _q(a)])  # new a1 expression at a2 = 1
    v = flint.fmpq_poly([_q(d), _q(cc)])  # new a2 expression at a2 = 1
    total = flint.fmpq_poly([0])
    for k, (val, w) in enumerate(zip(vals, weights)):
        total += _q(val * w) * u ** (4 - k) * v**k
    coeffs = [_frac(total[i]) for i in range(5)]
    # total = sum_k w_k C'_k s^(4-k), so C'_k = coeff of s^(4-k) / w_k
    return QuarticCoefficients(*(coeffs[4 - k] / weights[k] for k in range(5)))


# twistor quartic of a conformal 3-structure


@dataclass(frozen=True)
class TwistorQuartic:
    kind: str  # "Zero" or "TypeN"
    root: str | None = None
    multiplicity: int = 0
    leading_coefficient: Expr | None = None
    component: tuple | None = None

    def as_dict(self):
        out = {"kind": self.kind}
        if self.kind == "TypeN":
            out.update(
                root=self.root,
                multiplicity=self.multiplicity,
                principal_direction="vertical (fiber of the twistor bundle)",
                leading_coefficient=str(self.leading_coefficient),
                cotton_component=list(self.component),
            )
        return out


def twistor_quartic_type(g):
    """Zero when the Cotton tensor vanishes, otherwise a single real root of multiplicity 4.

    In a coframe adapted to the Cotton tensor the quartic has C0 = C1 = C2 = C3 = 0
    and C4 = signature * Y_012, so a nonzero quartic always has its root at [0:1].
    The coordinate component Y_012 can vanish while Y does not, so the reported
    leading coefficient is signature * Y_ijk for the first nonzero coordinate
    component (i, j, k) with j < k, listed in ``component``.
    """
    if not isinstance(g, MetricField):
        raise QuarticError("expected a MetricField")
    if g.chart.n != 3:
        raise QuarticError(f"the twistor quartic is defined for n = 3, got n = {g.chart.n}")
    y = cotton(WeylStructureField(g)).y
    if y.is_zero():
        return TwistorQuartic("Zero")
    order = [(0, 1, 2)] + [(i, j, k) for i in range(3) for j in range(3) for k in range(j + 1, 3)]
    idx = next(t for t in order if not y[t].is_zero())
    return TwistorQuartic("TypeN", "[0:1]", 4, y[idx] * g.signature, idx)


# para-CR frame


def _fiber_chart(conn):
    if conn.chart.n != 3:
        raise QuarticError("the para-CR frame needs n = 3")
    return conn.chart.lifted()


def _lifted_gamma(conn, chart):
    return {(i, j, k): conn[i, j, k].rechart(chart) for i in range(3) for j in range(3) for k in range(3)}


def paracr_frame(conn):
    """Vector fields v1, v2 spanning the lifted geodesic directions on the contact 5-manifold.

    Components are ordered (d_x0, d_x1, d_x2, d_p1, d_p2). With xi = (1, -p1, -p2)
    and S_i(j) = G^k_{ij} xi_k:

        v_a = d_a + p^a d_0 + sum_b H_ab d_{p^b},
        H_ab = -S_a(b) - p^b S_a(0) - p^a S_0(b) - p^a p^b S_0(0).

    Both fields annihilate theta = dx0 - p1 dx1 - p2 dx2, and [v1, v2] lies in
    their span exactly when the projective Weyl curvature vanishes.
    """
    chart = _fiber_chart(conn)
    G = _lifted_gamma(conn, chart)
    one, zero = chart.one(), chart.zero()
    p = [one] + [chart.var(v) for v in chart.fiber]
    xi = [one, -p[1], -p[2]]

    def S(i, j):
        return sum((G[k, i, j] * xi[k] for k in range(3) if not G[k, i, j].is_zero()), zero)

    frame = []
    for a in (1, 2):
        comps = [p[a], zero, zero]
        comps[a] = one
        for b in (1, 2):
            comps.append(-S(a, b) - p[b] * S(a, 0) - p[a] * S(0, b) - p[a] * p[b] * S(0, 0))
        frame.append(tuple(comps))
    return frame[0], frame[1]


def printed_paracr_frame(conn):
    """An alternative closed-form frame with cubic fiber coefficients, for comparison.

    It annihilates the contact form but its bracket is not in general
    contained in its span for flat projective structures.
    """
    chart = _fiber_chart(conn)
    G = _lifted_gamma(conn, chart)
    one, zero = chart.one(), chart.zero()
    p1, p2 = chart.var(chart.fiber[0]), chart.var(chart.fiber[1])
    g = lambda i, j, k: G[i, j, k]
    v1_p1 = -g(1, 0, 0) * p1**3 - g(2, 0, 0) * p1**2 * p2 - g(0, 0, 0) * p1**2 + g(1, 1, 1) * p1 + g(2, 1, 1) * p2 + g(0, 1, 1)
    v1_p2 = (
        -g(1, 0, 0) * p1**2 * p2
        - g(2, 0, 0) * p1 * p2**2
        + g(1, 2, 0) * p1**2
        - (g(0, 0, 0) + g(1, 1, 0) - g(2, 2, 0)) * p1 * p2
        - g(2, 1, 0) * p2**2
        + (g(0, 2, 0) + g(1, 2, 1)) * p1
        - (g(0, 1, 0) + g(2, 2, 1)) * p2
        + g(0, 2, 1)
    )
    v2_p2 = -g(2, 0, 0) * p2**3 - g(1, 0, 0) * p2**2 * p1 - g(0, 0, 0) * p2**2 + g(1, 2, 2) * p1 + g(2, 2, 2) * p2 + g(0, 2, 2)
    v2_p1 = (
        -g(1, 0, 0) * p1**2 * p2
        - g(2, 0, 0) * p1 * p2**2
        - g(1, 2, 0) * p1**2
        + (-g(0, 0, 0) + g(1, 1, 0) - g(2, 2, 0)) * p1 * p2
        + g(2, 1, 0) * p2**2
        + (-g(0, 2, 0) + g(1, 2, 1)) * p1
        + (g(0, 1, 0) + g(2, 2, 1)) * p2
        + g(0, 2, 1)
    )
    v1 = (p1, one, zero, v1_p1, v1_p2)
    v2 = (p2, zero, one, v2_p1, v2_p2)
    return v1, v2


def contact_pairing(v, chart):
    """theta(v) for theta = dx0 - p1 dx1 - p2 dx2."""
    p1, p2 = chart.var(chart.fiber[0]), chart.var(chart.fiber[1])
    return v[0] - p1 * v[1] - p2 * v[2]


def bracket(x, y, chart):
    names = chart.variables
    out = []
    for c in range(len(names)):
        e = chart.zero()
        for m, name in enumerate(names):
            if not x[m].is_zero():
                e = e + x[m] * y[c].diff(name)
            if not y[m].is_zero():
                e = e - y[m] * x[c].diff(name)
        out.append(e)
    return tuple(out)


def membership_defect(v1, v2, chart):
    """[v1, v2] minus its projection onto span{v1, v2}; components (d_x0, d_p1, d_p2).

    Both fields have d_x1, d_x2 components (1, 0) and (0, 1), so the projection
    coefficients are the d_x1 and d_x2 components of the bracket.
    """
    b = bracket(v1, v2, chart)
    a1, a2 = b[1], b[2]
    full = [b[c] - a1 * v1[c] - a2 * v2[c] for c in range(5)]
    return (full[0], full[3], full[4])


def predicted_defect(weyl, chart):
    """Contraction of the projective Weyl curvature predicting the bracket defect.

    Component b (fiber direction p^b) is
    -(xi_i W^i_{b kl} + p^b xi_i W^i_{0 kl}) X1^k X2^l with X_a = d_a + p^a d_0.
    """
    p = [chart.one()] + [chart.var(v) for v in chart.fiber]
    xi = [chart.one(), -p[1], -p[2]]
    W = {key: weyl[key].rechart(chart) for key in weyl.indices()}
    X1 = [p[1], chart.one(), chart.zero()]
    X2 = [p[2], chart.zero(), chart.one()]

    def contr(j):
        total = chart.zero()
        for i in range(3):
            for k in range(3):
                for l in range(3):
                    w = W[i, j, k, l]
                    if w.is_zero() or X1[k].is_zero() or X2[l].is_zero():
                        continue
                    total = total + xi[i] * w * X1[k] * X2[l]
        return total

    c0 = contr(0)
    return (chart.zero(), -(contr(1) + p[1] * c0), -(contr(2) + p[2] * c0))


@dataclass
class ParaCRRow:
    point: tuple
    defect_values: list
    weyl_components: list
    predicted_values: list
    covanish: bool
    prediction_matches: bool

    def as_dict(self):
        return {
            "point": [str(x) for x in self.point],
            "defect_values": [str(x) for x in self.defect_values],
            "weyl_components": [str(x) for x in self.weyl_components],
            "predicted_values": [str(x) for x in self.predicted_values],
            "covanish": self.covanish,
            "prediction_matches": self.prediction_matches,
        }


@dataclass
class ParaCRReport:
    contact_ok: bool
    bracket_in_span: bool
    rows: list = field(default_factory=list)

    def as_dict(self):
        return {
            "contact_ok": self.contact_ok,
            "bracket_in_span": self.bracket_in_span,
            "rows": [r.as_dict() for r in self.rows],
        }


def paracr_torsion_diagnostics(conn, samples):
    """Bracket defect of the para-CR frame next to W^0_{112}, W^0_{212} at each sample.

    ``samples`` are 5-tuples (x0, x1, x2, p1, p2) of rationals. ``covanish``
    records whether the defect vanishing agrees with both W components
    vanishing; it is reported, not enforced.
    """
    chart = _fiber_chart(conn)
    v1, v2 = paracr_frame(conn)
    contact_ok = contact_pairing(v1, chart).is_zero() and contact_pairing(v2, chart).is_zero()
    defect = membership_defect(v1, v2, chart)
    weyl = projective_weyl(conn)
    pred = predicted_defect(weyl, chart)
    w_parts = (weyl[0, 1, 1, 2], weyl[0, 2, 1, 2])
    rows = []
    for pt in samples:
        pt = tuple(Fraction(x) for x in pt)
        if len(pt) != 5:
            raise QuarticError("samples are (x0, x1, x2, p1, p2)")
        try:
            dv = [e.evaluate(pt) for e in defect]
            pv = [e.evaluate(pt) for e in pred]
            wv = [e.evaluate(pt[:3]) for e in w_parts]
        except PoleError as exc:
            raise PoleError(f"pole at sample {pt}: {exc}") from exc
        covanish = all(x == 0 for x in dv) == all(x == 0 for x in wv)
        rows.append(ParaCRRow(pt, dv, wv, pv, covanish, dv == pv))
    in_span = all(e.is_zero() for e in defect)
    return ParaCRReport(contact_ok, in_span, rows)
