"""Projective structures: Thomas symbols, equivalence, projective Rho and Weyl
curvature, and the correspondence with pairs of second-order ODEs.

Projective Rho convention: the curvature of a torsion-free connection splits as

    R^i_{jkl} = W^i_{jkl} - d^i_k Q_{jl} + d^i_l Q_{jk} - 2 Q_{[kl]} d^i_j

with W totally trace-free. On the unit round sphere Q = -g.
"""

from __future__ import annotations

from fractions import Fraction

from .affine import curvature
from .symkernel import SymkernelError
from .tensor import DOWN, UP, ConnectionField, TensorField, _as_expr


class ProjectiveError(ValueError):
    pass


def _traces(gamma):
    n = gamma.chart.n
    zero = gamma.chart.zero()
    return [sum((gamma[l, l, k] for l in range(n)), zero) for k in range(n)]


class ThomasSymbols:
    """Trace-free projective invariant part Pi^i_{jk} of a connection."""

    __slots__ = ("chart", "pi")

    def __init__(self, chart, pi):
        if not isinstance(pi, TensorField):
            pi = TensorField.from_nested(chart, (UP, DOWN, DOWN), pi)
        if pi.variance != (UP, DOWN, DOWN):
            raise ProjectiveError("Thomas symbols have variance (u, d, d)")
        for (i, j, k), e in pi.items():
            if j < k and e != pi[i, k, j]:
                raise ProjectiveError(f"Thomas symbols not symmetric at {i},{j},{k}")
        if any(not t.is_zero() for t in _traces(pi)):
            raise ProjectiveError("Thomas symbols must be trace-free")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "pi", pi)

    def __setattr__(self, name, value):
        raise AttributeError("ThomasSymbols is immutable")

    def __getitem__(self, idx):
        return self.pi[idx]

    def __eq__(self, other):
        return isinstance(other, ThomasSymbols) and self.pi == other.pi

    def __hash__(self):
        return hash(self.pi)

    def __repr__(self):
        return f"ThomasSymbols(nonzero={len(self.pi.nonzero())})"

    def as_connection(self):
        """Pi is itself a torsion-free connection in the projective class."""
        return ConnectionField(self.chart, self.pi)


def thomas(conn):
    chart = conn.chart
    n = chart.n
    tr = _traces(conn.gamma)
    c = Fraction(1, n + 1)

    def fn(i, j, k):
        e = conn[i, j, k]
        if i == j:
            e = e - tr[k] * c
        if i == k:
            e = e - tr[j] * c
        return e

    return ThomasSymbols(chart, TensorField.from_function(chart, (UP, DOWN, DOWN), fn))


def projectively_equivalent(a, b):
    """Return the covector f with b = a + d f + d f, or None."""
    if a.chart != b.chart:
        raise ProjectiveError("connections live on different charts")
    n = a.chart.n
    c = Fraction(1, n + 1)
    ta, tb = _traces(a.gamma), _traces(b.gamma)
    f = [(y - x) * c for x, y in zip(ta, tb)]
    if a.projective_change(f).gamma != b.gamma:
        return None
    return TensorField(a.chart, (DOWN,), f)


def projective_schouten(conn, ricci=None):
    """Projective Rho Q, the trace normalizer of the projective Weyl curvature.

    Taking the trace W^i_{jil} = 0 of the decomposition gives
    Ric_{jl} = Q_{lj} - n Q_{jl}, whose unique solution is
    Q_(jl) = -Ric_(jl)/(n-1) and Q_[jl] = -Ric_[jl]/(n+1).
    """
    if ricci is None:
        ricci = curvature(conn)[1]
    n = conn.chart.n
    cs, ca = Fraction(-1, n - 1), Fraction(-1, n + 1)
    half = Fraction(1, 2)

    def fn(j, l):
        s = (ricci[j, l] + ricci[l, j]) * half
        a = (ricci[j, l] - ricci[l, j]) * half
        return s * cs + a * ca

    return TensorField.from_function(conn.chart, (DOWN, DOWN), fn)


def weyl_from_rho(riemann, rho):
    """W^i_{jkl} = R^i_{jkl} + d^i_k Q_{jl} - d^i_l Q_{jk} + 2 Q_{[kl]} d^i_j."""

    def fn(i, j, k, l):
        e = riemann[i, j, k, l]
        if i == k:
            e = e + rho[j, l]
        if i == l:
            e = e - rho[j, k]
        if i == j:
            e = e + rho[k, l] - rho[l, k]
        return e

    return TensorField.from_function(riemann.chart, riemann.variance, fn)


def projective_weyl(conn):
    riemann, ricci = curvature(conn)
    return weyl_from_rho(riemann, projective_schouten(conn, ricci))


# ODE pairs


class ODEPair:
    """Right-hand sides of x1'' = F1, x2'' = F2 with x0 as the parameter.

    The chart carries fiber variables standing for the first derivatives
    dx1/dx0 and dx2/dx0.
    """

    __slots__ = ("chart", "f1", "f2")

    def __init__(self, chart, f1, f2):
        if not chart.fiber:
            raise ProjectiveError("an ODE pair needs a chart with fiber variables")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "f1", _as_expr(chart, f1))
        object.__setattr__(self, "f2", _as_expr(chart, f2))

    def __setattr__(self, name, value):
        raise AttributeError("ODEPair is immutable")

    @property
    def rhs(self):
        return (self.f1, self.f2)

    def __eq__(self, other):
        return isinstance(other, ODEPair) and self.rhs == other.rhs and self.chart == other.chart

    def __hash__(self):
        return hash(self.rhs)

    def __repr__(self):
        return f"ODEPair(F1={self.f1}, F2={self.f2})"


def _require_dim3(chart):
    if chart.n != 3:
        raise ProjectiveError(f"the ODE correspondence needs n = 3, got n = {chart.n}")


def odes_from_connection(conn):
    """F^a = -G^a(P, P) + p^a G^0(P, P) with P = (1, p1, p2)."""
    _require_dim3(conn.chart)
    chart = conn.chart.lifted()
    p = [chart.one()] + [chart.var(v) for v in chart.fiber]
    g = {key: conn[key].rechart(chart) for key in ((i, j, k) for i in range(3) for j in range(3) for k in range(3))}
    zero = chart.zero()

    def quad(i):
        total = zero
        for j in range(3):
            for k in range(3):
                if not g[i, j, k].is_zero():
                    total = total + g[i, j, k] * p[j] * p[k]
        return total

    q0 = quad(0)
    return ODEPair(chart, p[1] * q0 - quad(1), p[2] * q0 - quad(2))


def _third_derivatives(odes):
    names = odes.chart.fiber
    out = {}
    for a, f in enumerate(odes.rhs):
        for j in range(2):
            fj = f.diff(names[j])
            for k in range(j, 2):
                fjk = fj.diff(names[k])
                for l in range(k, 2):
                    out[a, j, k, l] = fjk.diff(names[l])
    return lambda a, j, k, l: out[(a,) + tuple(sorted((j, k, l)))]


def odepair_is_projective(odes):
    """F^i_{jkl} - 3/4 F^r_{r(jk} d^i_{l)} = 0 for i, j, k, l in the fiber directions."""
    F = _third_derivatives(odes)
    tr = lambda j, k: F(0, 0, j, k) + F(1, 1, j, k)
    quarter = Fraction(1, 4)
    for i in range(2):
        for j in range(2):
            for k in range(j, 2):
                for l in range(k, 2):
                    sym = odes.chart.zero()
                    if i == l:
                        sym = sym + tr(j, k)
                    if i == j:
                        sym = sym + tr(k, l)
                    if i == k:
                        sym = sym + tr(l, j)
                    if not (F(i, j, k, l) - sym * quarter).is_zero():
                        return False
    return True


def _sym_pairs():
    return [(j, k) for j in range(3) for k in range(j, 3)]


def _ode_coefficient_map():
    """Linear map from symmetric Pi entries to p-monomial coefficients of (F1, F2).

    Columns: (i, j, k) with j <= k. Rows: (a, e1, e2) meaning the coefficient of
    p1^e1 p2^e2 in F^a.
    """
    cols = [(i, j, k) for i in range(3) for (j, k) in _sym_pairs()]
    rows = [(a, e1, e2) for a in (1, 2) for e1 in range(4) for e2 in range(4 - e1)]
    index = {r: m for m, r in enumerate(rows)}
    mat = [[Fraction(0)] * len(cols) for _ in rows]
    for c, (i, j, k) in enumerate(cols):
        mult = 1 if j == k else 2
        mono = [int(j == 1) + int(k == 1), int(j == 2) + int(k == 2)]
        for a in (1, 2):
            if i == a:
                mat[index[a, mono[0], mono[1]]][c] -= mult
            if i == 0:
                e = list(mono)
                e[a - 1] += 1
                mat[index[a, e[0], e[1]]][c] += mult
    return cols, rows, mat


def thomas_from_odes(odes):
    """The unique trace-free Pi whose ODE pair is ``odes``."""
    _require_dim3(odes.chart)
    if not odepair_is_projective(odes):
        raise ProjectiveError("ODE pair does not satisfy the projective third-derivative condition")
    chart = odes.chart
    base = chart.without_fiber()
    coeffs = []
    for a, f in enumerate(odes.rhs, start=1):
        try:
            parts = f.coefficients(chart.fiber)
        except SymkernelError as exc:
            raise ProjectiveError(f"F{a} is not polynomial in the fiber variables") from exc
        if any(e1 + e2 > 3 for (e1, e2) in parts):
            raise ProjectiveError(f"F{a} has degree > 3 in the fiber variables")
        coeffs.append({k: v.rechart(base) for k, v in parts.items()})
    cols, rows, mat = _ode_coefficient_map()
    zero = base.zero()
    rhs = [coeffs[a - 1].get((e1, e2), zero) for (a, e1, e2) in rows]
    # trace-free constraints sum_l Pi^l_{lk} = 0
    colidx = {c: m for m, c in enumerate(cols)}
    for k in range(3):
        row = [Fraction(0)] * len(cols)
        for l in range(3):
            row[colidx[(l,) + tuple(sorted((l, k)))]] += 1
        mat.append(row)
        rhs.append(zero)
    sol = _solve_exact(mat, rhs, zero)
    table = {}
    for (i, j, k), v in zip(cols, sol):
        table[i, j, k] = table[i, k, j] = v
    pi = ThomasSymbols(base, TensorField.from_function(base, (UP, DOWN, DOWN), lambda i, j, k: table[i, j, k]))
    if odes_from_connection(pi.as_connection()).rhs != tuple(f.rechart(chart) for f in odes.rhs):
        raise ProjectiveError("ODE pair is not in the image of the projective correspondence")
    return pi


def _solve_exact(mat, rhs, zero):
    """Solve a full-column-rank system with rational matrix and Expr right side."""
    mat = [list(r) for r in mat]
    rhs = list(rhs)
    nrows, ncols = len(mat), len(mat[0])
    r = 0
    pivots = []
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if mat[i][c] != 0), None)
        if p is None:
            raise ProjectiveError("linear system is rank deficient")
        mat[r], mat[p] = mat[p], mat[r]
        rhs[r], rhs[p] = rhs[p], rhs[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        rhs[r] = rhs[r] * inv
        for i in range(nrows):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
                rhs[i] = rhs[i] - rhs[r] * f
        pivots.append(r)
        r += 1
    for i in range(r, nrows):
        if not rhs[i].is_zero():
            raise ProjectiveError("ODE pair is not in the image of the projective correspondence")
    return rhs[:ncols]
