"""Conformal invariants of metrics and Weyl structures.

Conformal Rho convention: the curvature of a Weyl connection splits as

    R^i_{jkl} = C^i_{jkl} - d^i_k P_{jl} + d^i_l P_{jk} - g_{jl} P^i_k + g_{jk} P^i_l - 2 P_{[kl]} d^i_j

with C totally trace-free and P^i_k = g^{ia} P_{ak}. The unit round sphere
has P = -g/2.
"""

from __future__ import annotations

from fractions import Fraction

from .affine import WeylStructureField, curvature, ricci_scalar, weyl_connection
from .tensor import DOWN, UP, TensorField, _as_expr, covariant_derivative, raise_index


class ConformalError(ValueError):
    pass


CLOSED_FORMULA = "closed-formula"
TRACE_SOLVE = "trace-solve"


class ConformalRho:
    __slots__ = ("chart", "p", "provenance")

    def __init__(self, chart, p, provenance):
        if provenance not in (CLOSED_FORMULA, TRACE_SOLVE):
            raise ConformalError(f"unknown provenance {provenance!r}")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "provenance", provenance)

    def __setattr__(self, name, value):
        raise AttributeError("ConformalRho is immutable")

    def __getitem__(self, idx):
        return self.p[idx]

    def trace(self, g):
        n = self.chart.n
        return sum((g.inverse[i, j] * self.p[i, j] for i in range(n) for j in range(n)), self.chart.zero())

    def __repr__(self):
        return f"ConformalRho({self.provenance}, nonzero={len(self.p.nonzero())})"


class CottonTensor:
    __slots__ = ("chart", "y")

    def __init__(self, chart, y):
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name, value):
        raise AttributeError("CottonTensor is immutable")

    def __getitem__(self, idx):
        return self.y[idx]

    def is_zero(self):
        return self.y.is_zero()

    def __repr__(self):
        return f"CottonTensor(nonzero={len(self.y.nonzero())})"


def _as_weyl(w):
    return w if isinstance(w, WeylStructureField) else WeylStructureField(w)


def _require_n3(chart):
    if chart.n < 3:
        raise ConformalError("conformal Rho needs n >= 3")


def rho_closed_formula(ricci, g):
    """P_{ij} = -1/(n-2) (Ric_{ij} - R/(2(n-1)) g_{ij}) for a symmetric Ricci tensor."""
    n = g.chart.n
    _require_n3(g.chart)
    r = ricci_scalar(ricci, g) * Fraction(1, 2 * (n - 1))
    c = Fraction(-1, n - 2)
    return TensorField.from_function(g.chart, (DOWN, DOWN), lambda i, j: (ricci[i, j] - r * g[i, j]) * c)


def rho_trace_solve(ricci, g):
    """Unique P making the conformal Weyl part C trace-free.

    Tracing the decomposition over i = k gives
    Ric_{jl} = -(n-1) P_{jl} + P_{lj} - tr(P) g_{jl}, solved by
    tr(P) = -R/(2(n-1)), P_(jl) = -(Ric_(jl) + tr(P) g_{jl})/(n-2), P_[jl] = -Ric_[jl]/n.
    """
    n = g.chart.n
    _require_n3(g.chart)
    ptr = ricci_scalar(ricci, g) * Fraction(-1, 2 * (n - 1))
    cs, ca = Fraction(-1, n - 2), Fraction(-1, n)
    half = Fraction(1, 2)

    def fn(j, l):
        s = (ricci[j, l] + ricci[l, j]) * half
        a = (ricci[j, l] - ricci[l, j]) * half
        return (s + ptr * g[j, l]) * cs + a * ca

    return TensorField.from_function(g.chart, (DOWN, DOWN), fn)


def conformal_rho(w, ricci=None):
    w = _as_weyl(w)
    g = w.metric
    _require_n3(g.chart)
    if ricci is None:
        ricci = curvature(weyl_connection(w))[1]
    if w.is_closed():
        sym = TensorField.from_function(g.chart, (DOWN, DOWN), lambda i, j: (ricci[i, j] + ricci[j, i]) * Fraction(1, 2))
        return ConformalRho(g.chart, rho_closed_formula(sym, g), CLOSED_FORMULA)
    return ConformalRho(g.chart, rho_trace_solve(ricci, g), TRACE_SOLVE)


def conformal_weyl_from(riemann, rho, g):
    """C^i_{jkl} = R + d^i_k P_{jl} - d^i_l P_{jk} + g_{jl} P^i_k - g_{jk} P^i_l + 2 P_{[kl]} d^i_j."""
    pu = raise_index(rho, 0, g)

    def fn(i, j, k, l):
        e = riemann[i, j, k, l] + g[j, l] * pu[i, k] - g[j, k] * pu[i, l]
        if i == k:
            e = e + rho[j, l]
        if i == l:
            e = e - rho[j, k]
        if i == j:
            e = e + rho[k, l] - rho[l, k]
        return e

    return TensorField.from_function(g.chart, (UP, DOWN, DOWN, DOWN), fn)


def weyl_structure_conformal_weyl(w):
    """Conformal Weyl curvature of a Weyl connection (any n >= 3)."""
    w = _as_weyl(w)
    riemann, ricci = curvature(weyl_connection(w))
    return conformal_weyl_from(riemann, rho_trace_solve(ricci, w.metric), w.metric)


def conformal_weyl_tensor(g):
    if g.chart.n < 4:
        raise ConformalError("the conformal Weyl tensor is only an obstruction for n >= 4")
    return weyl_structure_conformal_weyl(WeylStructureField(g))


def cotton(w):
    """Y_{ijk} = P_{ik;j} - P_{ij;k} with derivatives of the Weyl connection."""
    w = _as_weyl(w)
    _require_n3(w.chart)
    conn = weyl_connection(w)
    ricci = curvature(conn)[1]
    p = conformal_rho(w, ricci).p
    dp = covariant_derivative(p, conn)
    y = TensorField.from_function(w.chart, (DOWN, DOWN, DOWN), lambda i, j, k: dp[i, k, j] - dp[i, j, k])
    return CottonTensor(w.chart, y)


def conformally_flat(g):
    n = g.chart.n
    if n < 3:
        raise ConformalError("conformal flatness test needs n >= 3")
    if n == 3:
        return cotton(WeylStructureField(g)).is_zero()
    return conformal_weyl_tensor(g).is_zero()


def einstein_weyl(w):
    """Return (verdict, residual) where residual is the trace-free part of Sym(Ric)."""
    w = _as_weyl(w)
    g = w.metric
    n = g.chart.n
    ricci = curvature(weyl_connection(w))[1]
    half = Fraction(1, 2)
    sym = TensorField.from_function(g.chart, (DOWN, DOWN), lambda i, j: (ricci[i, j] + ricci[j, i]) * half)
    f = ricci_scalar(sym, g) * Fraction(1, n)
    residual = sym - g.g * f
    return residual.is_zero(), residual


def frame_components(t, frame):
    """Components t(e_a, e_b, ...) of a covariant tensor in a frame.

    ``frame`` is a list of n vectors, each a list of n entries e_a^i.
    """
    if any(v != DOWN for v in t.variance):
        raise ConformalError("frame contraction expects a covariant tensor")
    chart = t.chart
    n = chart.n
    e = [[_as_expr(chart, x) for x in vec] for vec in frame]
    if len(e) != n or any(len(vec) != n for vec in e):
        raise ConformalError(f"frame must consist of {n} vectors with {n} components")
    out = t
    for slot in range(t.rank):
        prev = out

        def fn(*idx, slot=slot, prev=prev):
            total = chart.zero()
            src = list(idx)
            for m in range(n):
                c = e[idx[slot]][m]
                if c.is_zero():
                    continue
                src[slot] = m
                total = total + c * prev[tuple(src)]
            return total

        out = TensorField.from_function(chart, t.variance, fn)
    return out
