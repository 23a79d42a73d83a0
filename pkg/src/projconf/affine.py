"""Metrics, Levi-Civita and Weyl connections, curvature, and a geodesic integrator.

Curvature convention used everywhere in the package::

    R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}
    Ric_{jl}  = R^i_{jil}

With this choice the unit round sphere has Ric = (n - 1) g.
"""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction

import numpy as np

from .symkernel import PoleError
from .tensor import DOWN, UP, ConnectionField, TensorError, TensorField, _as_expr


class MetricError(ValueError):
    pass


class GeodesicError(RuntimeError):
    pass


def _invert(rows, chart):
    """Inverse of a square matrix of Expr by Gauss-Jordan elimination."""
    n = len(rows)
    one, zero = chart.one(), chart.zero()
    a = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(rows)]
    det = one
    for col in range(n):
        pivot = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if pivot is None:
            raise MetricError("metric is degenerate: determinant vanishes identically")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        p = a[col][col]
        det = det * p
        inv = p.reciprocal()
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a], det


class MetricField:
    """Symmetric nondegenerate (0,2) tensor with a signature tag.

    ``signature`` is +1 for the definite case and -1 for the indefinite one,
    so in dimension 3 the flat model is diag(1, s, s).
    """

    __slots__ = ("chart", "g", "signature", "inverse", "det")

    def __init__(self, chart, entries, signature=1):
        if signature not in (1, -1):
            raise MetricError(f"signature must be +1 or -1, got {signature!r}")
        g = entries if isinstance(entries, TensorField) else TensorField.from_nested(chart, (DOWN, DOWN), entries)
        if g.variance != (DOWN, DOWN):
            raise MetricError("metric must be a (0,2) tensor")
        if g.chart != chart:
            raise MetricError("chart mismatch")
        n = chart.n
        for i in range(n):
            for j in range(i + 1, n):
                if g[i, j] != g[j, i]:
                    raise MetricError(f"metric is not symmetric at ({i},{j})")
        rows = [[g[i, j] for j in range(n)] for i in range(n)]
        inv, det = _invert(rows, chart)
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "inverse", TensorField.from_nested(chart, (UP, UP), inv))
        object.__setattr__(self, "det", det)

    def __setattr__(self, name, value):
        raise AttributeError("MetricField is immutable")

    @classmethod
    def diagonal(cls, chart, entries, signature=1):
        zero = chart.zero()
        entries = [_as_expr(chart, e) for e in entries]
        rows = [[entries[i] if i == j else zero for j in range(chart.n)] for i in range(chart.n)]
        return cls(chart, rows, signature)

    @classmethod
    def flat(cls, chart, signature=1):
        return cls.diagonal(chart, [1] + [signature] * (chart.n - 1), signature)

    def __getitem__(self, idx):
        return self.g[idx]

    def scaled(self, factor):
        """The metric ``factor * g`` (factor an Expr or rational)."""
        return MetricField(self.chart, self.g * factor, self.signature)

    def __eq__(self, other):
        return isinstance(other, MetricField) and self.g == other.g and self.signature == other.signature

    def __hash__(self):
        return hash((self.g, self.signature))

    def __repr__(self):
        return f"MetricField(n={self.chart.n}, signature={self.signature:+d})"


class WeylStructureField:
    """A metric representative together with a 1-form beta."""

    __slots__ = ("metric", "beta")

    def __init__(self, metric, beta=None):
        chart = metric.chart
        if beta is None:
            beta = TensorField.zeros(chart, (DOWN,))
        elif not isinstance(beta, TensorField):
            beta = TensorField(chart, (DOWN,), beta)
        if beta.variance != (DOWN,) or beta.chart != chart:
            raise TensorError("beta must be a covector on the metric's chart")
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "beta", beta)

    def __setattr__(self, name, value):
        raise AttributeError("WeylStructureField is immutable")

    @property
    def chart(self):
        return self.metric.chart

    def is_closed(self):
        """True when d(beta) vanishes identically."""
        b = self.beta
        names = self.chart.base
        n = self.chart.n
        return all((b[i].diff(names[j]) - b[j].diff(names[i])).is_zero() for i in range(n) for j in range(i + 1, n))

    def rescaled(self, sigma):
        """The gauge-equivalent pair (sigma^2 g, beta + d sigma / sigma)."""
        chart = self.chart
        sigma = _as_expr(chart, sigma)
        if sigma.is_zero():
            raise MetricError("conformal factor must be nonzero")
        shift = [sigma.diff(x) / sigma for x in chart.base]
        beta = TensorField(chart, (DOWN,), [b + s for b, s in zip(self.beta.entries, shift)])
        return WeylStructureField(self.metric.scaled(sigma * sigma), beta)

    def __repr__(self):
        return f"WeylStructureField({self.metric!r}, beta_nonzero={len(self.beta.nonzero())})"


def levi_civita(g):
    chart = g.chart
    n = chart.n
    names = chart.base
    dg = [[[g[a, b].diff(names[c]) for c in range(n)] for b in range(n)] for a in range(n)]
    # first kind: [jk, l] = 1/2 (d_j g_lk + d_k g_lj - d_l g_jk)
    first = {}
    half = Fraction(1, 2)
    for l in range(n):
        for j in range(n):
            for k in range(j, n):
                first[l, j, k] = (dg[l][k][j] + dg[l][j][k] - dg[j][k][l]) * half
    gi = g.inverse
    zero = chart.zero()
    table = {}
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                total = zero
                for l in range(n):
                    w = gi[i, l]
                    if not w.is_zero() and not first[l, j, k].is_zero():
                        total = total + w * first[l, j, k]
                table[i, j, k] = table[i, k, j] = total
    return ConnectionField(chart, TensorField.from_function(chart, (UP, DOWN, DOWN), lambda i, j, k: table[i, j, k]))


def weyl_connection(w):
    """The torsion-free connection D with D g = 2 beta (x) g.

    Christoffel symbols: LC(g)^i_{jk} - d^i_j b_k - d^i_k b_j + g_{jk} b^i.
    """
    g = w.metric
    chart = g.chart
    n = chart.n
    lc = levi_civita(g)
    b = w.beta
    bu = [sum((g.inverse[i, m] * b[m] for m in range(n)), chart.zero()) for i in range(n)]

    def fn(i, j, k):
        e = lc[i, j, k] + g[j, k] * bu[i]
        if i == j:
            e = e - b[k]
        if i == k:
            e = e - b[j]
        return e

    return ConnectionField(chart, TensorField.from_function(chart, (UP, DOWN, DOWN), fn))


def curvature(conn):
    """Return (Riemann R^i_{jkl}, Ricci R_{jl})."""
    chart = conn.chart
    n = chart.n
    names = chart.base
    G = conn.gamma
    zero = chart.zero()
    dG = {}

    def d(i, a, b, c):
        key = (i, min(a, b), max(a, b), c)
        if key not in dG:
            dG[key] = G[i, a, b].diff(names[c])
        return dG[key]

    R = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(k + 1, n):
                    e = d(i, l, j, k) - d(i, k, j, l)
                    for m in range(n):
                        a, b = G[i, k, m], G[m, l, j]
                        if not a.is_zero() and not b.is_zero():
                            e = e + a * b
                        a, b = G[i, l, m], G[m, k, j]
                        if not a.is_zero() and not b.is_zero():
                            e = e - a * b
                    R[i, j, k, l] = e
                    R[i, j, l, k] = -e
                R[i, j, k, k] = zero
    riemann = TensorField.from_function(chart, (UP, DOWN, DOWN, DOWN), lambda i, j, k, l: R[i, j, k, l])
    ricci = TensorField.from_function(
        chart, (DOWN, DOWN), lambda j, l: sum((R[i, j, i, l] for i in range(n)), zero)
    )
    return riemann, ricci


def ricci_scalar(ricci, g):
    n = g.chart.n
    return sum((g.inverse[i, j] * ricci[i, j] for i in range(n) for j in range(n)), g.chart.zero())


# numerics


def _float_christoffel(conn):
    chart = conn.chart
    n = chart.n
    funcs = {}
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                e = conn[i, j, k]
                if not e.is_zero():
                    if any(e.uses(p) for p in chart.fiber):
                        raise GeodesicError("Christoffel symbols depend on fiber variables")
                    funcs[i, j, k] = e.float_function()
    nfib = len(chart.fiber)

    def accel(x, v):
        pt = list(x) + [0.0] * nfib
        a = np.zeros(n)
        for (i, j, k), f in funcs.items():
            c = f(pt)
            a[i] -= c * v[j] * v[k] * (1 if j == k else 2)
        return a

    return accel


def integrate_geodesic(conn, x0, v0, h, steps):
    """Classical RK4 for x'' = -G(x)(x', x').

    Returns a float array of shape (steps + 1, 1 + n) with columns t, x^0..x^{n-1}.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    steps = int(steps)
    if steps < 0:
        raise ValueError("step count must be non-negative")
    n = conn.chart.n
    x = np.array([float(Fraction(c)) for c in x0], dtype=float)
    v = np.array([float(Fraction(c)) for c in v0], dtype=float)
    if x.shape != (n,) or v.shape != (n,):
        raise ValueError(f"initial point and velocity need {n} components")
    accel = _float_christoffel(conn)
    out = np.empty((steps + 1, n + 1))
    out[0, 0], out[0, 1:] = 0.0, x
    for s in range(1, steps + 1):
        try:
            with np.errstate(over="raise", invalid="raise"):
                k1x, k1v = v, accel(x, v)
                k2x, k2v = v + 0.5 * h * k1v, accel(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
                k3x, k3v = v + 0.5 * h * k2v, accel(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
                k4x, k4v = v + h * k3v, accel(x + h * k3x, v + h * k3v)
                x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
                v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        except PoleError as exc:
            raise GeodesicError(f"pole encountered at step {s}: {exc}") from exc
        except (OverflowError, ZeroDivisionError, FloatingPointError) as exc:
            raise GeodesicError(f"step {s} diverged: {exc}") from exc
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))) or np.linalg.norm(v) > 1e150:
            raise GeodesicError(f"step {s} diverged (norm overflow)")
        out[s, 0], out[s, 1:] = s * h, x
    return out


def polyline_csv(path):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    n = path.shape[1] - 1
    writer.writerow(["t"] + [f"x{i}" for i in range(n)])
    for row in path:
        writer.writerow([repr(float(c)) for c in row])
    return buf.getvalue()


def _directed_distance(pts, line):
    """max over pts of the distance to the polyline ``line``."""
    if len(line) == 1:
        return float(np.max(np.linalg.norm(pts - line[0], axis=1)))
    a, b = line[:-1], line[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom = np.where(denom == 0.0, 1.0, denom)
    worst = 0.0
    for p in pts:
        t = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
        d = np.min(np.linalg.norm(a + t[:, None] * ab - p, axis=1))
        worst = max(worst, float(d))
    return worst


def hausdorff_distance(a, b):
    """Hausdorff distance between two polylines given as point arrays (no time column)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return max(_directed_distance(a, b), _directed_distance(b, a))


def arc_length(points):
    points = np.asarray(points, dtype=float)
    return float(np.sum(np.linalg.norm(np.diff(points, axis=0), axis=1)))


def truncate_to_length(points, length):
    """Initial piece of a polyline with the given arc length (last segment cut to fit)."""
    points = np.asarray(points, dtype=float)
    out = [points[0]]
    acc = 0.0
    for a, b in zip(points[:-1], points[1:]):
        seg = float(np.linalg.norm(b - a))
        if acc + seg >= length:
            t = (length - acc) / seg if seg else 0.0
            out.append(a + t * (b - a))
            return np.array(out)
        acc += seg
        out.append(b)
    return np.array(out)


def same_unparametrized_path(path_a, path_b):
    """Hausdorff distance between the common-length initial arcs of two integrated paths."""
    pa, pb = np.asarray(path_a)[:, 1:], np.asarray(path_b)[:, 1:]
    length = min(arc_length(pa), arc_length(pb))
    if not math.isfinite(length):
        raise GeodesicError("non-finite arc length")
    return hausdorff_distance(truncate_to_length(pa, length), truncate_to_length(pb, length))
