"""Relations between the projective and conformal geometry of a Weyl structure.

Conventions are those of :mod:`projconf.projective` (projective Rho Q) and
:mod:`projconf.confweyl` (conformal Rho P). Under them the following hold
exactly for every Weyl structure (g, beta):

* Q = tr(P) g/(n-1) + (n^2-n-1)/(n^2-1) P - 1/(n^2-1) P^T
* g^{jl} W_{(ij)kl} = (n-2)/(2(n-1)) (tr(P) g_{ik} - n P_(ik)) - (n-2)(n+2)/(2(n+1)) P_[ik]
* Alt_{kl}[C_{ijkl}/2 + g_{il} P_{jk} - g_{jl} P_{ik} + g_{ij} P_{lk}]
  = Alt_{kl}[W_{ijkl}/2 - g_{ik} Q_{jl} + g_{ij} Q_{lk}]

where W and C are lowered with g on their first slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .affine import WeylStructureField, curvature, levi_civita, weyl_connection
from .confweyl import ConformalRho, conformal_weyl_from, conformal_weyl_tensor, cotton, rho_trace_solve
from .projective import projective_schouten, weyl_from_rho
from .tensor import DOWN, TensorField, lower_index


class MetrizabilityError(ValueError):
    pass


class BeltramiViolation(AssertionError):
    """Raised when a computed case contradicts the conformal Beltrami theorem."""


def _rho_tensor(p):
    return p.p if isinstance(p, ConformalRho) else p


def _trace(t, g):
    n = g.chart.n
    return sum((g.inverse[i, j] * t[i, j] for i in range(n) for j in range(n)), g.chart.zero())


def q_from_p(p, g):
    n = g.chart.n
    if n < 3:
        raise MetrizabilityError("the Q-P map needs n >= 3")
    p = _rho_tensor(p)
    ptr = _trace(p, g) * Fraction(1, n - 1)
    a = Fraction(n * n - n - 1, n * n - 1)
    b = Fraction(-1, n * n - 1)
    return TensorField.from_function(g.chart, (DOWN, DOWN), lambda i, j: ptr * g[i, j] + p[i, j] * a + p[j, i] * b)


@dataclass(frozen=True)
class QPPair:
    chart: object
    p: TensorField
    q: TensorField
    trace: object


class _Data:
    """Curvature quantities of one Weyl structure, computed once."""

    def __init__(self, w):
        self.w = w
        self.g = w.metric
        self.conn = weyl_connection(w)
        self.riemann, self.ricci = curvature(self.conn)
        self.p = rho_trace_solve(self.ricci, self.g)
        self.q = projective_schouten(self.conn, self.ricci)
        self.weyl = weyl_from_rho(self.riemann, self.q)


def qp_pair(w):
    d = _Data(w)
    return QPPair(w.chart, d.p, d.q, _trace(d.p, d.g))


def verify_qp_identity(w, _data=None):
    d = _data or _Data(w)
    return d.q - q_from_p(d.p, d.g)


def w_trace(weyl, g):
    """W_{ik} = g^{jl} W_{(ij)kl} with W lowered on its first slot."""
    wl = lower_index(weyl, 0, g)
    n = g.chart.n
    half = Fraction(1, 2)
    zero = g.chart.zero()

    def fn(i, k):
        total = zero
        for j in range(n):
            for l in range(n):
                c = g.inverse[j, l]
                if c.is_zero():
                    continue
                total = total + c * (wl[i, j, k, l] + wl[j, i, k, l]) * half
        return total

    return TensorField.from_function(g.chart, (DOWN, DOWN), fn)


def w_trace_rhs(p, g):
    n = g.chart.n
    p = _rho_tensor(p)
    ptr = _trace(p, g)
    cs = Fraction(n - 2, 2 * (n - 1))
    ca = Fraction(-(n - 2) * (n + 2), 2 * (n + 1))
    half = Fraction(1, 2)

    def fn(i, k):
        s = (p[i, k] + p[k, i]) * half
        a = (p[i, k] - p[k, i]) * half
        return (ptr * g[i, k] - s * n) * cs + a * ca

    return TensorField.from_function(g.chart, (DOWN, DOWN), fn)


def w_trace_rhs_alternative(p, g):
    """Right side 2/(n+1) P_[ik] + (n-2)/(n-1) (tr(P) g_ik - n P_(ik)).

    Kept for comparison only: it is not an identity under the package conventions.
    """
    n = g.chart.n
    p = _rho_tensor(p)
    ptr = _trace(p, g)
    half = Fraction(1, 2)

    def fn(i, k):
        s = (p[i, k] + p[k, i]) * half
        a = (p[i, k] - p[k, i]) * half
        return a * Fraction(2, n + 1) + (ptr * g[i, k] - s * n) * Fraction(n - 2, n - 1)

    return TensorField.from_function(g.chart, (DOWN, DOWN), fn)


def verify_w_trace_identity(w, _data=None):
    if w.chart.n < 3:
        raise MetrizabilityError("the W-trace identity needs n >= 3")
    d = _data or _Data(w)
    return w_trace(d.weyl, d.g) - w_trace_rhs(d.p, d.g)


def _cwqp_sides(d, weight):
    g = d.g
    wl = lower_index(d.weyl, 0, g)
    cl = lower_index(conformal_weyl_from(d.riemann, d.p, g), 0, g)
    p, q = d.p, d.q

    def lhs(i, j, k, l):
        return cl[i, j, k, l] * weight + g[i, l] * p[j, k] - g[j, l] * p[i, k] + g[i, j] * p[l, k]

    def rhs(i, j, k, l):
        return wl[i, j, k, l] * weight - g[i, k] * q[j, l] + g[i, j] * q[l, k]

    half = Fraction(1, 2)

    def fn(i, j, k, l):
        a = lhs(i, j, k, l) - lhs(i, j, l, k)
        b = rhs(i, j, k, l) - rhs(i, j, l, k)
        return (a - b) * half

    return TensorField.from_function(g.chart, (DOWN,) * 4, fn)


def verify_cwqp_identity(w, _data=None, weight=Fraction(1, 2)):
    """Residual of the (k,l)-antisymmetrized C-W-Q-P relation (n >= 4).

    ``weight`` multiplies the C and W terms; the relation holds with 1/2,
    the normalization in which both curvature 2-forms carry a factor 1/2.
    """
    if w.chart.n < 4:
        raise MetrizabilityError("the C-W-Q-P relation degenerates for n = 3 (C = 0); use n >= 4")
    d = _data or _Data(w)
    return _cwqp_sides(d, weight)


def identity_residuals(w):
    """All identity residuals for one Weyl structure, sharing the curvature computation."""
    d = _Data(w)
    out = {"qp": verify_qp_identity(w, d), "w_trace": verify_w_trace_identity(w, d)}
    if w.chart.n >= 4:
        out["cwqp"] = verify_cwqp_identity(w, d)
    return out


def weyl_metrizable_with(rep, g):
    """Find (beta, f) with weyl_connection(g, beta) = rep + d f + d f, or None.

    With D = rep - LC(g) and s = beta + f, the traces D^l_{lk} = -(n+1) s_k + beta_k
    and g_{im} g^{jk} D^m_{jk} = -2 s_i + n beta_i determine s and beta; the full
    equation is then checked exactly.
    """
    chart = g.chart
    if rep.chart != chart:
        raise MetrizabilityError("connection and metric live on different charts")
    n = chart.n
    D = rep - levi_civita(g)
    zero = chart.zero()
    dtr = [sum((D[l, l, k] for l in range(n)), zero) for k in range(n)]
    contracted = [
        sum((g.inverse[j, k] * D[m, j, k] for j in range(n) for k in range(n) if not g.inverse[j, k].is_zero()), zero)
        for m in range(n)
    ]
    e = [sum((g[i, m] * contracted[m] for m in range(n)), zero) for i in range(n)]
    c = Fraction(1, (n + 2) * (n - 1))
    s = [(e[i] - dtr[i] * n) * c for i in range(n)]
    beta = [dtr[i] + s[i] * (n + 1) for i in range(n)]
    f = [s[i] - beta[i] for i in range(n)]
    beta_t = TensorField(chart, (DOWN,), beta)
    f_t = TensorField(chart, (DOWN,), f)
    if weyl_connection(WeylStructureField(g, beta_t)).gamma != rep.projective_change(f_t).gamma:
        return None
    return beta_t, f_t


@dataclass(frozen=True)
class BeltramiVerdict:
    projective_weyl_zero: bool
    conformally_flat: bool
    weyl_residual: TensorField
    conformal_residual: TensorField
    rho_pure_trace: bool | None = None
    rho_factor: object = None
    rho_factor_constant: bool | None = None

    @property
    def implication_holds(self):
        return (not self.projective_weyl_zero) or self.conformally_flat


def beltrami_check(w):
    """Projective flatness and conformal flatness of a Weyl structure, cross-checked.

    A projectively flat case that is not conformally flat, or whose P_(ij) is not
    a multiple of g, raises :class:`BeltramiViolation`. When beta = 0 the
    multiple must moreover be constant.
    """
    if not isinstance(w, WeylStructureField):
        w = WeylStructureField(w)
    n = w.chart.n
    if n < 3:
        raise MetrizabilityError("the Beltrami check needs n >= 3")
    d = _Data(w)
    g = d.g
    conf = cotton(WeylStructureField(g)).y if n == 3 else conformal_weyl_tensor(g)
    proj_zero = d.weyl.is_zero()
    conf_zero = conf.is_zero()
    if not proj_zero:
        return BeltramiVerdict(False, conf_zero, d.weyl, conf)
    if not conf_zero:
        raise BeltramiViolation("projectively flat Weyl structure on a non-flat conformal structure")
    factor = _trace(d.p, g) * Fraction(1, n)
    half = Fraction(1, 2)
    pure = all(((d.p[i, j] + d.p[j, i]) * half - factor * g[i, j]).is_zero() for i in range(n) for j in range(n))
    if not pure:
        raise BeltramiViolation("projectively flat case with P_(ij) not proportional to g")
    constant = factor.is_constant()
    if not constant and w.beta.is_zero():
        raise BeltramiViolation("projectively flat Levi-Civita case with non-constant P_(ij)/g_ij")
    return BeltramiVerdict(True, True, d.weyl, conf, True, factor, constant)
