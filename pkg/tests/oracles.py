"""Independent numeric recomputations used to cross-check exact results."""

from fractions import Fraction

import mpmath

mpmath.mp.dps = 40


def mpf(q):
    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator


def christoffel_at(conn, x):
    n = conn.chart.n
    pt = [Fraction(v) for v in x]
    return [[[mpf(conn[i, j, k].evaluate(pt)) for k in range(n)] for j in range(n)] for i in range(n)]


def _numeric_gamma(conn):
    n = conn.chart.n
    funcs = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                e = conn[i, j, k]
                num = {tuple(int(a) for a in m): mpf(Fraction(int(c.p), int(c.q))) for m, c in e.num.terms()}
                den = {tuple(int(a) for a in m): mpf(Fraction(int(c.p), int(c.q))) for m, c in e.den.terms()}
                funcs[i, j, k] = (num, den)

    def ev(poly, x):
        total = mpmath.mpf(0)
        for m, c in poly.items():
            t = c
            for xi, a in zip(x, m):
                t *= xi**a
            total += t
        return total

    def gamma(i, j, k, x):
        num, den = funcs[i, j, k]
        return ev(num, x) / ev(den, x)

    return gamma


def riemann_numeric(conn, x):
    """R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}."""
    n = conn.chart.n
    gamma = _numeric_gamma(conn)
    x = [mpf(v) for v in x]

    def dgamma(i, j, k, var):
        def f(t):
            y = list(x)
            y[var] = t
            return gamma(i, j, k, y)

        return mpmath.diff(f, x[var])

    G = [[[gamma(i, j, k, x) for k in range(n)] for j in range(n)] for i in range(n)]
    R = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    v = dgamma(i, l, j, k) - dgamma(i, k, j, l)
                    v += sum(G[i][k][m] * G[m][l][j] - G[i][l][m] * G[m][k][j] for m in range(n))
                    R[i, j, k, l] = v
    return R


def projective_weyl_numeric(conn, x):
    n = conn.chart.n
    R = riemann_numeric(conn, x)
    ric = {(j, l): sum(R[i, j, i, l] for i in range(n)) for j in range(n) for l in range(n)}
    Q = {}
    for j in range(n):
        for l in range(n):
            sym = (ric[j, l] + ric[l, j]) / 2
            alt = (ric[j, l] - ric[l, j]) / 2
            Q[j, l] = -sym / (n - 1) - alt / (n + 1)
    W = {}
    for (i, j, k, l), r in R.items():
        v = r + (Q[j, l] if i == k else 0) - (Q[j, k] if i == l else 0)
        if i == j:
            v += Q[k, l] - Q[l, k]
        W[i, j, k, l] = v
    return W


def quartic_partition_numeric(coeffs, tol=1e-8, dps=60):
    """Multiplicity partition of C4 a^4 + 4 C3 a^3 b + 6 C2 a^2 b^2 + 4 C1 a b^3 + C0 b^4 from numeric roots.

    Returns None for the zero form, otherwise (real multiplicities, complex-pair
    multiplicities), each sorted descending. Roots closer than ``tol`` are clustered.
    """
    c4, c3, c2, c1, c0 = [Fraction(c) for c in coeffs]
    poly = [c4, 4 * c3, 6 * c2, 4 * c1, c0]  # highest degree first, in t = a/b
    if all(x == 0 for x in poly):
        return None
    lead = next(i for i, x in enumerate(poly) if x != 0)
    at_infinity = lead
    trimmed = poly[lead:]
    with mpmath.workdps(dps):
        roots = companion_roots([mpf(x) for x in trimmed])
        clusters = []
        for r in roots:
            for cl in clusters:
                if abs(cl[0] - r) < tol:
                    cl[1] += 1
                    break
            else:
                clusters.append([r, 1])
        real = [m for r, m in clusters if abs(mpmath.im(r)) < tol]
        upper = [m for r, m in clusters if mpmath.im(r) >= tol]
    if at_infinity:
        real.append(at_infinity)
    return tuple(sorted(real, reverse=True)), tuple(sorted(upper, reverse=True))


def companion_roots(coeffs):
    """Roots of a polynomial (highest degree first) as eigenvalues of its companion matrix."""
    d = len(coeffs) - 1
    if d < 1:
        return []
    m = mpmath.matrix(d, d)
    for i in range(1, d):
        m[i, i - 1] = 1
    for i in range(d):
        m[i, d - 1] = -coeffs[d - i] / coeffs[0]
    return list(mpmath.eig(m, left=False, right=False))
