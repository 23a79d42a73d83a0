"""Dense index algebra over :class:`~projconf.symkernel.Expr` entries.

Slots are addressed positionally (0-based). Each slot is contravariant
(``"u"``) or covariant (``"d"``) and runs over the chart's base dimension.
Covariant derivatives append the differentiation slot last, so
``covariant_derivative(P, conn)[i, k, j]`` is ``P_{ik;j}``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .symkernel import Expr

UP, DOWN = "u", "d"


class TensorError(ValueError):
    pass


class TensorField:
    __slots__ = ("chart", "variance", "entries")

    def __init__(self, chart, variance, entries):
        variance = tuple(variance)
        for v in variance:
            if v not in (UP, DOWN):
                raise TensorError(f"bad variance marker {v!r}")
        n = chart.n
        entries = tuple(_as_expr(chart, e) for e in entries)
        if len(entries) != n ** len(variance):
            raise TensorError(f"expected {n ** len(variance)} entries, got {len(entries)}")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "variance", variance)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("TensorField is immutable")

    @classmethod
    def from_function(cls, chart, variance, fn):
        idx = itertools.product(range(chart.n), repeat=len(variance))
        return cls(chart, variance, [fn(*i) for i in idx])

    @classmethod
    def from_nested(cls, chart, variance, nested):
        def flat(x, depth):
            if depth == 0:
                return [x]
            if len(x) != chart.n:
                raise TensorError(f"nested component has length {len(x)}, expected {chart.n}")
            return [y for row in x for y in flat(row, depth - 1)]

        return cls(chart, variance, flat(nested, len(variance)))

    @classmethod
    def zeros(cls, chart, variance):
        z = chart.zero()
        return cls(chart, variance, [z] * chart.n ** len(variance))

    @property
    def rank(self):
        return len(self.variance)

    @property
    def n(self):
        return self.chart.n

    def _offset(self, idx):
        off = 0
        for i in idx:
            off = off * self.chart.n + i
        return off

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        if len(idx) != self.rank:
            raise TensorError(f"rank {self.rank} tensor indexed with {len(idx)} indices")
        return self.entries[self._offset(idx)]

    def indices(self):
        return itertools.product(range(self.chart.n), repeat=self.rank)

    def items(self):
        return zip(self.indices(), self.entries)

    def is_zero(self):
        return all(e.is_zero() for e in self.entries)

    def nonzero(self):
        return [(i, e) for i, e in self.items() if not e.is_zero()]

    def map(self, fn):
        return TensorField(self.chart, self.variance, [fn(e) for e in self.entries])

    def _check_same(self, other):
        if not isinstance(other, TensorField):
            raise TensorError("expected a TensorField")
        if other.chart != self.chart:
            raise TensorError("chart mismatch")
        if other.variance != self.variance:
            raise TensorError(f"variance mismatch {self.variance} vs {other.variance}")

    def __add__(self, other):
        self._check_same(other)
        return TensorField(self.chart, self.variance, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._check_same(other)
        return TensorField(self.chart, self.variance, [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def __mul__(self, scalar):
        if isinstance(scalar, TensorField):
            return NotImplemented
        return self.map(lambda e: e * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self.map(lambda e: e / scalar)

    def __eq__(self, other):
        if not isinstance(other, TensorField):
            return NotImplemented
        return self.chart == other.chart and self.variance == other.variance and self.entries == other.entries

    def __hash__(self):
        return hash((self.variance, self.entries))

    def transpose(self, perm):
        """Reorder slots: new slot ``s`` is old slot ``perm[s]``."""
        perm = tuple(perm)
        if sorted(perm) != list(range(self.rank)):
            raise TensorError(f"bad permutation {perm}")
        var = tuple(self.variance[p] for p in perm)

        def fn(*idx):
            old = [0] * self.rank
            for s, p in enumerate(perm):
                old[p] = idx[s]
            return self[tuple(old)]

        return TensorField.from_function(self.chart, var, fn)

    def evaluate(self, point):
        """Nested lists of exact Fractions at ``point``."""
        vals = [e.evaluate(point) for e in self.entries]
        return _nest(vals, self.chart.n, self.rank)

    def to_strings(self):
        return _nest([str(e) for e in self.entries], self.chart.n, self.rank)

    def __repr__(self):
        return f"TensorField(variance={''.join(self.variance)}, nonzero={len(self.nonzero())})"


def _as_expr(chart, e):
    if isinstance(e, Expr):
        if e.chart != chart:
            raise TensorError("entry chart mismatch")
        return e
    if isinstance(e, str):
        return chart.parse(e)
    return chart.const(Fraction(e))


def _nest(flat, n, rank):
    if rank == 0:
        return flat[0]
    for _ in range(rank - 1):
        flat = [flat[i : i + n] for i in range(0, len(flat), n)]
    return flat


def scalar(chart, value):
    return TensorField(chart, (), [value])


def kronecker(chart):
    one, zero = chart.one(), chart.zero()
    return TensorField.from_function(chart, (UP, DOWN), lambda i, j: one if i == j else zero)


def vector(chart, components):
    return TensorField(chart, (UP,), components)


def covector(chart, components):
    return TensorField(chart, (DOWN,), components)


def outer(a, b):
    if a.chart != b.chart:
        raise TensorError("chart mismatch")
    return TensorField(a.chart, a.variance + b.variance, [x * y for x in a.entries for y in b.entries])


def contract(t, slot_a, slot_b, metric=None):
    """Trace over two slots.

    Without ``metric`` the slots must have opposite variance. With a metric
    (a :class:`~projconf.affine.MetricField`) two slots of equal variance are
    traced with the inverse metric (both covariant) or the metric (both
    contravariant).
    """
    if slot_a == slot_b:
        raise TensorError("cannot contract a slot with itself")
    a, b = sorted((slot_a, slot_b))
    va, vb = t.variance[a], t.variance[b]
    n = t.chart.n
    weight = None
    if va == vb:
        if metric is None:
            raise TensorError(f"cannot contract slots {a},{b} of equal variance {va!r} without a metric")
        weight = metric.inverse if va == DOWN else metric.g
    rest = [s for s in range(t.rank) if s not in (a, b)]
    var = tuple(t.variance[s] for s in rest)
    zero = t.chart.zero()

    def fn(*idx):
        full = [0] * t.rank
        for s, i in zip(rest, idx):
            full[s] = i
        total = zero
        if weight is None:
            for m in range(n):
                full[a] = full[b] = m
                total = total + t[tuple(full)]
        else:
            for m in range(n):
                for l in range(n):
                    w = weight[m, l]
                    if w.is_zero():
                        continue
                    full[a], full[b] = m, l
                    total = total + w * t[tuple(full)]
        return total

    return TensorField.from_function(t.chart, var, fn)


def _perm_sign(p):
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def sym_antisym(t, slots, mode):
    """Symmetrize (``mode="round"``) or antisymmetrize (``mode="square"``) over ``slots``.

    Normalized with 1/k!, so both operations are projectors.
    """
    slots = tuple(slots)
    if mode not in ("round", "square"):
        raise TensorError(f"mode must be 'round' or 'square', got {mode!r}")
    if len(set(slots)) != len(slots):
        raise TensorError("repeated slot")
    if len({t.variance[s] for s in slots}) > 1:
        raise TensorError("symmetrized slots must share variance")
    perms = list(itertools.permutations(range(len(slots))))
    signs = [1 if mode == "round" else _perm_sign(p) for p in perms]
    norm = Fraction(1, len(perms))
    zero = t.chart.zero()

    def fn(*idx):
        total = zero
        for p, s in zip(perms, signs):
            src = list(idx)
            for k, slot in enumerate(slots):
                src[slot] = idx[slots[p[k]]]
            e = t[tuple(src)]
            total = total + e if s > 0 else total - e
        return total * norm

    return TensorField.from_function(t.chart, t.variance, fn)


def symmetrize(t, slots):
    return sym_antisym(t, slots, "round")


def antisymmetrize(t, slots):
    return sym_antisym(t, slots, "square")


def lower_index(t, slot, metric):
    if t.variance[slot] != UP:
        raise TensorError(f"slot {slot} is not contravariant")
    g = metric.g
    n = t.chart.n
    var = t.variance[:slot] + (DOWN,) + t.variance[slot + 1 :]
    zero = t.chart.zero()

    def fn(*idx):
        total = zero
        src = list(idx)
        for m in range(n):
            w = g[idx[slot], m]
            if w.is_zero():
                continue
            src[slot] = m
            total = total + w * t[tuple(src)]
        return total

    return TensorField.from_function(t.chart, var, fn)


def raise_index(t, slot, metric):
    if t.variance[slot] != DOWN:
        raise TensorError(f"slot {slot} is not covariant")
    gi = metric.inverse
    n = t.chart.n
    var = t.variance[:slot] + (UP,) + t.variance[slot + 1 :]
    zero = t.chart.zero()

    def fn(*idx):
        total = zero
        src = list(idx)
        for m in range(n):
            w = gi[idx[slot], m]
            if w.is_zero():
                continue
            src[slot] = m
            total = total + w * t[tuple(src)]
        return total

    return TensorField.from_function(t.chart, var, fn)


class ConnectionField:
    """Torsion-free connection given by Christoffel symbols Γ^i_{jk} = ``gamma[i, j, k]``."""

    __slots__ = ("chart", "gamma")

    def __init__(self, chart, gamma):
        if not isinstance(gamma, TensorField):
            gamma = TensorField.from_nested(chart, (UP, DOWN, DOWN), gamma)
        if gamma.variance != (UP, DOWN, DOWN):
            raise TensorError("Christoffel symbols must have variance (u, d, d)")
        if gamma.chart != chart:
            raise TensorError("chart mismatch")
        for (i, j, k), e in gamma.items():
            if j < k and e != gamma[i, k, j]:
                raise TensorError(f"connection has torsion: Γ^{i}_{j}{k} != Γ^{i}_{k}{j}")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "gamma", gamma)

    def __setattr__(self, name, value):
        raise AttributeError("ConnectionField is immutable")

    @classmethod
    def from_entries(cls, chart, entries):
        """Build from a sparse mapping ``{(i, j, k): expr}``; (j, k) symmetry is filled in."""
        table = {}
        for (i, j, k), e in entries.items():
            e = _as_expr(chart, e)
            for key in ((i, j, k), (i, k, j)):
                if key in table and table[key] != e:
                    raise TensorError(f"conflicting entries for Γ^{i}_{j}{k}")
                table[key] = e
        zero = chart.zero()
        return cls(chart, TensorField.from_function(chart, (UP, DOWN, DOWN), lambda i, j, k: table.get((i, j, k), zero)))

    @classmethod
    def flat(cls, chart):
        return cls(chart, TensorField.zeros(chart, (UP, DOWN, DOWN)))

    def __getitem__(self, idx):
        return self.gamma[idx]

    def __add__(self, other):
        if isinstance(other, ConnectionField):
            other = other.gamma
        return ConnectionField(self.chart, self.gamma + other)

    def __sub__(self, other):
        if isinstance(other, ConnectionField):
            other = other.gamma
        return self.gamma - other

    def __eq__(self, other):
        return isinstance(other, ConnectionField) and self.gamma == other.gamma

    def __hash__(self):
        return hash(self.gamma)

    def __repr__(self):
        return f"ConnectionField(nonzero={len(self.gamma.nonzero())})"

    def projective_change(self, f):
        """Γ^i_{jk} + δ^i_j f_k + δ^i_k f_j for a covector ``f`` (sequence or TensorField)."""
        f = f.entries if isinstance(f, TensorField) else [_as_expr(self.chart, x) for x in f]

        def fn(i, j, k):
            e = self.gamma[i, j, k]
            if i == j:
                e = e + f[k]
            if i == k:
                e = e + f[j]
            return e

        return ConnectionField(self.chart, TensorField.from_function(self.chart, (UP, DOWN, DOWN), fn))


def covariant_derivative(t, conn):
    """∇T with the derivative slot appended last."""
    if t.chart != conn.chart:
        raise TensorError("chart mismatch between tensor and connection")
    chart = t.chart
    n = chart.n
    names = chart.base
    G = conn.gamma
    var = t.variance + (DOWN,)

    def fn(*idx):
        *tidx, k = idx
        total = t[tuple(tidx)].diff(names[k])
        src = list(tidx)
        for s, v in enumerate(t.variance):
            orig = tidx[s]
            for m in range(n):
                src[s] = m
                val = t[tuple(src)]
                if val.is_zero():
                    continue
                if v == UP:
                    c = G[orig, k, m]
                    if not c.is_zero():
                        total = total + c * val
                else:
                    c = G[m, k, orig]
                    if not c.is_zero():
                        total = total - c * val
            src[s] = orig
        return total

    return TensorField.from_function(chart, var, fn)
