"""Exact multivariate rational functions over Q.

An :class:`Expr` is a reduced pair ``numerator / denominator`` of polynomials
over the chart's variables. The denominator is kept monic under graded
lexicographic order, so two equal rational functions always have identical
representations and zero-testing is a check on the numerator.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import flint

DEFAULT_DEGREE_BOUND = 64


class SymkernelError(Exception):
    pass


class ParseError(SymkernelError):
    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}")


class UnknownVariableError(SymkernelError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class PoleError(SymkernelError, ZeroDivisionError):
    pass


class DegreeBoundError(SymkernelError):
    pass


class Chart:
    """Coordinate chart: base variables x0..x{n-1}, optional fiber variables.

    Fiber variables (p1, p2 by default) model the projectivized cotangent
    fibre and are only allowed for n = 3.
    """

    __slots__ = ("n", "base", "fiber", "degree_bound", "_ctx")

    def __init__(self, n, base=None, fiber=(), degree_bound=DEFAULT_DEGREE_BOUND):
        if not 2 <= n <= 6:
            raise ValueError(f"chart dimension must be in 2..6, got {n}")
        base = tuple(base) if base is not None else tuple(f"x{i}" for i in range(n))
        fiber = tuple(fiber)
        if len(base) != n:
            raise ValueError(f"expected {n} base variables, got {len(base)}")
        names = base + fiber
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        for name in names:
            if not name.isidentifier():
                raise ValueError(f"invalid variable name {name!r}")
        if fiber and n != 3:
            raise ValueError("fiber variables are only supported for n = 3")
        if fiber and len(fiber) != 2:
            raise ValueError("expected exactly two fiber variables")
        self.n = n
        self.base = base
        self.fiber = fiber
        self.degree_bound = int(degree_bound)
        self._ctx = flint.fmpq_mpoly_ctx.get(names, "deglex")

    @classmethod
    def with_fiber(cls, names=("p1", "p2"), base=None, degree_bound=DEFAULT_DEGREE_BOUND):
        return cls(3, base=base, fiber=names, degree_bound=degree_bound)

    @property
    def variables(self):
        return self.base + self.fiber

    @property
    def ctx(self):
        return self._ctx

    def index(self, name):
        try:
            return self.variables.index(name)
        except ValueError:
            raise UnknownVariableError(f"unknown variable {name!r} in chart {self.variables}") from None

    def _key(self):
        return (self.n, self.base, self.fiber, self.degree_bound)

    def __eq__(self, other):
        return isinstance(other, Chart) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        extra = f", fiber={self.fiber}" if self.fiber else ""
        return f"Chart(n={self.n}, base={self.base}{extra})"

    def with_degree_bound(self, bound):
        return Chart(self.n, self.base, self.fiber, bound)

    def without_fiber(self):
        return Chart(self.n, self.base, (), self.degree_bound)

    def lifted(self, names=("p1", "p2")):
        """This chart extended by fiber variables."""
        if self.fiber:
            return self
        return Chart(self.n, self.base, names, self.degree_bound)

    # constructors
    def const(self, value):
        value = Fraction(value)
        ctx = self._ctx
        return Expr._raw(self, ctx.from_dict({(0,) * ctx.nvars(): flint.fmpq(value.numerator, value.denominator)}) if value else ctx.from_dict({}), ctx.from_dict({(0,) * ctx.nvars(): 1}))

    def zero(self):
        return self.const(0)

    def one(self):
        return self.const(1)

    def var(self, name):
        i = self.index(name)
        return Expr._raw(self, self._ctx.gens()[i], self.one().den)

    def vars(self):
        return [self.var(v) for v in self.variables]

    def parse(self, text):
        return parse(text, self)


def _to_fraction(q):
    return Fraction(int(q.p), int(q.q))


class Expr:
    """Immutable canonical rational function on a :class:`Chart`."""

    __slots__ = ("chart", "num", "den")

    def __init__(self, chart, num, den=None):
        ctx = chart.ctx
        if den is None:
            den = ctx.from_dict({(0,) * ctx.nvars(): 1})
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            num, den = ctx.from_dict({}), ctx.from_dict({(0,) * ctx.nvars(): 1})
        else:
            g = num.gcd(den)
            if not g.is_one():
                num = num // g
                den = den // g
            lc = den.leading_coefficient()
            if lc != 1:
                num = num / lc
                den = den / lc
        self._set(chart, num, den)

    def _set(self, chart, num, den):
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        bound = chart.degree_bound
        if num.total_degree() > bound or den.total_degree() > bound:
            raise DegreeBoundError(
                f"expression degree ({num.total_degree()}, {den.total_degree()}) exceeds bound {bound}"
            )

    @classmethod
    def _raw(cls, chart, num, den):
        # caller guarantees canonical form
        self = object.__new__(cls)
        self._set(chart, num, den)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    # coercion
    def _coerce(self, other):
        if isinstance(other, Expr):
            if other.chart != self.chart:
                raise ValueError(f"chart mismatch: {self.chart} vs {other.chart}")
            return other
        if isinstance(other, (int, Rational)):
            return self.chart.const(other)
        return NotImplemented

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def is_constant(self):
        return self.num.is_constant() and self.den.is_constant()

    def is_polynomial(self):
        return self.den.is_one()

    def constant_value(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.evaluate((0,) * len(self.chart.variables))

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, Expr) else other
        if other is NotImplemented:
            return NotImplemented
        return self.chart == other.chart and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.chart, str(self.num), str(self.den)))

    def __neg__(self):
        return Expr._raw(self.chart, -self.num, self.den)

    def __pos__(self):
        return self

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            return Expr(self.chart, self.num + other.num, self.den)
        if self.den.is_one():
            return Expr._raw(self.chart, self.num * other.den + other.num, other.den)
        if other.den.is_one():
            return Expr._raw(self.chart, other.num * self.den + self.num, self.den)
        g = self.den.gcd(other.den)
        b, d = self.den // g, other.den // g
        return Expr(self.chart, self.num * d + other.num * b, self.den * d)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return self.chart.zero()
        if self.den.is_one() and other.den.is_one():
            return Expr._raw(self.chart, self.num * other.num, self.den)
        # cross-cancel before multiplying
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        num = (self.num // g1) * (other.num // g2)
        den = (self.den // g2) * (other.den // g1)
        lc = den.leading_coefficient()
        if lc != 1:
            num, den = num / lc, den / lc
        return Expr._raw(self.chart, num, den)

    __rmul__ = __mul__

    def reciprocal(self):
        if self.is_zero():
            raise ZeroDivisionError("division by zero expression")
        num, den = self.den, self.num
        lc = den.leading_coefficient()
        if lc != 1:
            num, den = num / lc, den / lc
        return Expr._raw(self.chart, num, den)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.reciprocal() ** (-k)
        if k == 0:
            return self.chart.one()
        return Expr._raw(self.chart, self.num**k, self.den**k)

    def diff(self, var):
        """Partial derivative with respect to the variable named ``var``."""
        i = self.chart.index(var) if isinstance(var, str) else int(var)
        num, den = self.num, self.den
        dn = num.derivative(i)
        if den.is_constant():
            return Expr._raw(self.chart, dn, den)
        dd = den.derivative(i)
        return Expr(self.chart, dn * den - num * dd, den * den)

    def uses(self, name):
        i = self.chart.index(name)
        return self.num.degrees()[i] > 0 or self.den.degrees()[i] > 0

    def degree(self):
        return (max(self.num.total_degree(), 0), self.den.total_degree())

    def evaluate(self, point):
        """Exact value at ``point`` (sequence over all chart variables, or a name->value dict)."""
        names = self.chart.variables
        if isinstance(point, dict):
            unknown = set(point) - set(names)
            if unknown:
                raise UnknownVariableError(f"unknown variables {sorted(unknown)}")
            point = [point.get(v, 0) for v in names]
        point = list(point)
        if len(point) != len(names):
            raise ValueError(f"point has {len(point)} coordinates, chart has {len(names)} variables")
        vals = [flint.fmpq(Fraction(v).numerator, Fraction(v).denominator) for v in point]
        den = self.den(*vals) if names else self.den
        if den == 0:
            raise PoleError(f"denominator of {self} vanishes at {tuple(point)}")
        return _to_fraction(self.num(*vals) / den)

    def subs(self, values):
        """Substitute rational constants for some variables (name -> value)."""
        mapping = {}
        for name, v in values.items():
            v = Fraction(v)
            mapping[name] = flint.fmpq(v.numerator, v.denominator)
        num = self.num.subs(mapping) if mapping else self.num
        den = self.den.subs(mapping) if mapping else self.den
        if den.is_zero():
            raise PoleError(f"denominator of {self} vanishes under {values}")
        return Expr(self.chart, num, den)

    def rechart(self, chart):
        """The same rational function viewed on another chart (variables matched by name)."""
        if chart == self.chart:
            return self
        src = self.chart.variables
        target = chart.variables
        pos = [target.index(name) if name in target else None for name in src]
        width = len(chart.variables)

        def move(poly):
            out = {}
            for mono, c in poly.terms():
                if any(e and pos[k] is None for k, e in enumerate(mono)):
                    raise UnknownVariableError(f"{self} uses variables missing from {chart}")
                new = [0] * width
                for k, e in enumerate(mono):
                    if e:
                        new[pos[k]] = e
                out[tuple(new)] = c
            return chart.ctx.from_dict(out)

        return Expr(chart, move(self.num), move(self.den))

    def coefficients(self, names):
        """Split a polynomial dependence on ``names``.

        Returns ``{exponents: coefficient}`` where the coefficients are free of
        ``names``. The denominator must not involve ``names``.
        """
        idx = [self.chart.index(v) for v in names]
        degs = self.den.degrees()
        if any(degs[i] for i in idx):
            raise SymkernelError(f"denominator depends on {list(names)}")
        groups = {}
        for mono, c in self.num.terms():
            key = tuple(mono[i] for i in idx)
            rest = list(mono)
            for i in idx:
                rest[i] = 0
            groups.setdefault(key, {})[tuple(rest)] = c
        ctx = self.chart.ctx
        return {k: Expr(self.chart, ctx.from_dict(v), self.den) for k, v in sorted(groups.items())}

    def float_function(self):
        """Return a callable evaluating this expression in double precision."""
        nterms = [(tuple(int(e) for e in m), float(_to_fraction(c))) for m, c in self.num.terms()]
        dterms = [(tuple(int(e) for e in m), float(_to_fraction(c))) for m, c in self.den.terms()]

        def poly(terms, x):
            total = 0.0
            for m, c in terms:
                t = c
                for xi, e in zip(x, m):
                    if e:
                        t *= xi**e
                total += t
            return total

        def f(x):
            d = poly(dterms, x)
            if d == 0.0:
                raise PoleError(f"denominator of {self} vanishes at {tuple(x)}")
            return poly(nterms, x) / d

        return f

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"Expr({to_string(self)!r})"


# printing


def _poly_str(poly, names):
    if poly.is_zero():
        return "0"
    out = []
    for k, (mono, coeff) in enumerate(poly.terms()):
        c = _to_fraction(coeff)
        sign = "-" if c < 0 else "+"
        c = abs(c)
        factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, mono) if e]
        if not factors:
            body = str(c)
        elif c == 1:
            body = "*".join(factors)
        else:
            body = f"{c}*" + "*".join(factors)
        if k == 0:
            out.append(("-" if sign == "-" else "") + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def _n_terms(poly):
    return len(poly)


def to_string(e):
    names = e.chart.variables
    num = _poly_str(e.num, names)
    if e.den.is_one():
        return num
    den = _poly_str(e.den, names)
    if _n_terms(e.num) > 1:
        num = f"({num})"
    if _n_terms(e.den) > 1 or "*" in den or "/" in den or "^" in den:
        den = f"({den})"
    return f"{num}/{den}"


# parsing

_OPS = set("+-*/^()")


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
        elif ch in _OPS:
            tokens.append(("op", ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", text, i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    # expr   := term (('+'|'-') term)*
    # term   := unary (('*'|'/') unary)*
    # unary  := ('+'|'-') unary | power
    # power  := atom ('^' ['+'|'-'] INT)?
    # atom   := INT | NAME | '(' expr ')'

    def __init__(self, text, chart):
        self.text = text
        self.chart = chart
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, self.text, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            self.error("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            tok = self.take()
            rhs = self.unary()
            if tok[1] == "*":
                e = e * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", self.text, tok[2])
                e = e / rhs
        return e

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            e = self.unary()
            return -e if tok[1] == "-" else e
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            sign = 1
            paren = False
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                self.take()
                paren = True
            if self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
                sign = -1 if self.take()[1] == "-" else 1
            t = self.peek()
            if t[0] != "int":
                self.error("exponent must be an integer literal", t)
            self.take()
            if paren:
                if self.peek()[1] != ")":
                    self.error("expected ')'")
                self.take()
            k = sign * int(t[1])
            if k < 0 and base.is_zero():
                raise ParseError("negative power of zero", self.text, t[2])
            return base**k
        return base

    def atom(self):
        tok = self.take()
        kind, value, at = tok
        if kind == "int":
            return self.chart.const(int(value))
        if kind == "name":
            if value not in self.chart.variables:
                err = UnknownVariableError(
                    f"unknown variable {value!r} at position {at}; chart has {', '.join(self.chart.variables)}"
                )
                err.position = at
                raise err
            return self.chart.var(value)
        if kind == "op" and value == "(":
            e = self.expr()
            if self.peek()[1] != ")":
                self.error("expected ')'")
            self.take()
            return e
        self.error(f"unexpected token {value!r}" if value else "unexpected end of input", tok)


def parse(text, chart):
    """Parse ``text`` into a canonical :class:`Expr` over ``chart``."""
    return _Parser(text, chart).parse()


def diff(e, var):
    return e.diff(var)


def evaluate(e, point):
    return e.evaluate(point)


def is_zero(e):
    return e.is_zero()
