"""Pure-Python scalar and polynomial kernel.

Everything above this module (rational functions, crossed products,
pseudodifferential operators) is written against the functions defined
here; a compiled twin with the same signatures may replace it at import
time (see cyckp.kernel).

Scalars come in three wire formats, selected by the context mode:

* RATIONAL   -- bare gmpy2.mpq (used for m with phi(m) == 1, i.e. m in {1, 2},
                and as the bootstrap domain for cyclotomic tables)
* CYCLOTOMIC -- tuples of mpq of length phi(m), coefficients of the power
                basis 1, t, ..., t^{phi-1} of Q(zeta_m) modulo Phi_m
* FLOATC     -- Python complex

Polynomials are tuples of scalars, lowest degree first, with no trailing
zeros; the zero polynomial is the empty tuple.
"""

from __future__ import annotations

import cmath

try:
    from gmpy2 import mpq as QQ
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    from fractions import Fraction as QQ

KERNEL_KIND = "pure"

RATIONAL = 0
CYCLOTOMIC = 1
FLOATC = 2

_Q0 = QQ(0)
_Q1 = QQ(1)


def q_from_str(text):
    """Parse "p/q" or "p" into an exact rational."""
    text = text.strip()
    if "/" in text:
        p, q = text.split("/")
        return QQ(int(p), int(q))
    return QQ(int(text))


def q_to_str(q):
    return str(q)


class Context:
    """Bound scalar domain: one per (m, backend) pair.

    Carries the cyclotomic reduction data and precomputed roots of unity
    so the scalar functions below never recompute them.
    """

    __slots__ = (
        "m", "mode", "phi", "phim", "red", "roots", "tol", "zero", "one",
    )

    def __repr__(self):
        names = {RATIONAL: "rational", CYCLOTOMIC: "cyclotomic", FLOATC: "float"}
        return f"<Context m={self.m} {names[self.mode]}>"


# ---------------------------------------------------------------------------
# rational-coefficient polynomial helpers (bootstrap domain for the tables)

def _qp_trim(c):
    n = len(c)
    while n and c[n - 1] == 0:
        n -= 1
    return tuple(c[:n])


def _qp_mul(a, b):
    if not a or not b:
        return ()
    out = [_Q0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _qp_trim(out)


def _qp_divmod(a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    lead = b[-1]
    db = len(b) - 1
    rem = list(a)
    if len(rem) - 1 < db:
        return (), _qp_trim(rem)
    quo = [_Q0] * (len(rem) - db)
    for i in range(len(rem) - 1, db - 1, -1):
        c = rem[i]
        if c:
            q = c / lead
            quo[i - db] = q
            for j in range(db + 1):
                rem[i - db + j] -= q * b[j]
    return _qp_trim(quo), _qp_trim(rem)


def _qp_xgcd(a, b):
    """Extended Euclid over Q[t]: returns (g, u, v) with u*a + v*b = g."""
    r0, r1 = a, b
    s0, s1 = (_Q1,), ()
    t0, t1 = (), (_Q1,)
    while r1:
        q, r = _qp_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _qp_sub(s0, _qp_mul(q, s1))
        t0, t1 = t1, _qp_sub(t0, _qp_mul(q, t1))
    return r0, s0, t0


def _qp_sub(a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else _Q0
        y = b[i] if i < len(b) else _Q0
        out.append(x - y)
    return _qp_trim(out)


_CYCLO_CACHE = {}


def cyclotomic_poly_q(m):
    """Coefficients of the m-th cyclotomic polynomial, lowest degree first.

    Computed by exact division of t^m - 1 by the product of Phi_d over
    proper divisors d of m.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    cached = _CYCLO_CACHE.get(m)
    if cached is not None:
        return cached
    tm1 = tuple([-_Q1] + [_Q0] * (m - 1) + [_Q1])
    den = (_Q1,)
    for d in range(1, m):
        if m % d == 0:
            den = _qp_mul(den, cyclotomic_poly_q(d))
    quo, rem = _qp_divmod(tm1, den)
    if rem:
        raise ArithmeticError("cyclotomic recursion produced a nonzero remainder")
    _CYCLO_CACHE[m] = quo
    return quo


# ---------------------------------------------------------------------------
# context construction

def _cyc_reduce_rows(phim, phi):
    """Rows expressing t^e (phi <= e <= 2*phi-2) in the power basis."""
    base = tuple(-phim[i] for i in range(phi))  # t^phi, Phi monic
    rows = [base]
    for _ in range(phi - 2):
        prev = rows[-1]
        shifted = [_Q0] + list(prev[:-1])
        top = prev[-1]
        if top:
            for i in range(phi):
                shifted[i] += top * base[i]
        rows.append(tuple(shifted))
    return tuple(rows)


def make_exact_context(m):
    ctx = Context()
    ctx.m = m
    ctx.tol = 0.0
    phim = cyclotomic_poly_q(m)
    phi = len(phim) - 1
    ctx.phim = phim
    ctx.phi = phi
    if phi == 1:
        ctx.mode = RATIONAL
        ctx.zero = _Q0
        ctx.one = _Q1
        mu = -phim[0]  # t = -c0 for the monic linear Phi_m
        roots = []
        acc = _Q1
        for _ in range(m):
            roots.append(acc)
            acc = acc * mu
        ctx.roots = tuple(roots)
        ctx.red = ()
    else:
        ctx.mode = CYCLOTOMIC
        ctx.zero = (_Q0,) * phi
        ctx.one = (_Q1,) + (_Q0,) * (phi - 1)
        ctx.red = _cyc_reduce_rows(phim, phi)
        roots = [ctx.one]
        mu = (_Q0, _Q1) + (_Q0,) * (phi - 2)
        acc = ctx.one
        for _ in range(m - 1):
            acc = s_mul(ctx, acc, mu)
            roots.append(acc)
        ctx.roots = tuple(roots)
    return ctx


def make_float_context(m, tol=1e-9):
    ctx = Context()
    ctx.m = m
    ctx.mode = FLOATC
    ctx.phi = 1
    ctx.phim = ()
    ctx.red = ()
    ctx.tol = tol
    ctx.zero = 0j
    ctx.one = 1 + 0j
    ctx.roots = tuple(cmath.exp(2j * cmath.pi * j / m) for j in range(m))
    return ctx


# ---------------------------------------------------------------------------
# scalar operations

def s_add(ctx, a, b):
    if ctx.mode == CYCLOTOMIC:
        return tuple(x + y for x, y in zip(a, b))
    return a + b


def s_sub(ctx, a, b):
    if ctx.mode == CYCLOTOMIC:
        return tuple(x - y for x, y in zip(a, b))
    return a - b


def s_neg(ctx, a):
    if ctx.mode == CYCLOTOMIC:
        return tuple(-x for x in a)
    return -a


def s_mul(ctx, a, b):
    if ctx.mode != CYCLOTOMIC:
        return a * b
    phi = ctx.phi
    conv = [_Q0] * (2 * phi - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    conv[i + j] += ai * bj
    out = conv[:phi]
    red = ctx.red
    for e in range(phi, 2 * phi - 1):
        c = conv[e]
        if c:
            row = red[e - phi]
            for i in range(phi):
                ri = row[i]
                if ri:
                    out[i] += c * ri
    return tuple(out)


def s_inv(ctx, a):
    if ctx.mode == RATIONAL:
        if a == 0:
            raise ZeroDivisionError("scalar inverse of zero")
        return _Q1 / a
    if ctx.mode == FLOATC:
        if a == 0:
            raise ZeroDivisionError("scalar inverse of zero")
        return 1 / a
    poly = _qp_trim(a)
    if not poly:
        raise ZeroDivisionError("scalar inverse of zero")
    g, u, _ = _qp_xgcd(poly, ctx.phim)
    if len(g) != 1:
        raise ArithmeticError("cyclotomic polynomial is not coprime to element")
    ginv = _Q1 / g[0]
    out = [c * ginv for c in u]
    out += [_Q0] * (ctx.phi - len(out))
    return tuple(out[:ctx.phi])


def s_div(ctx, a, b):
    return s_mul(ctx, a, s_inv(ctx, b))


def s_is0(ctx, a):
    if ctx.mode == CYCLOTOMIC:
        for x in a:
            if x:
                return False
        return True
    return a == 0


def s_eq(ctx, a, b):
    return a == b


def s_from_int(ctx, n):
    if ctx.mode == CYCLOTOMIC:
        return (QQ(n),) + (_Q0,) * (ctx.phi - 1)
    if ctx.mode == FLOATC:
        return complex(n)
    return QQ(n)


def s_from_q(ctx, q):
    if ctx.mode == CYCLOTOMIC:
        return (QQ(q),) + (_Q0,) * (ctx.phi - 1)
    if ctx.mode == FLOATC:
        return complex(float(QQ(q)))
    return QQ(q)


def s_root(ctx, j):
    return ctx.roots[j % ctx.m]


def s_pow(ctx, a, n):
    if n < 0:
        return s_pow(ctx, s_inv(ctx, a), -n)
    acc = ctx.one
    base = a
    while n:
        if n & 1:
            acc = s_mul(ctx, acc, base)
        base = s_mul(ctx, base, base)
        n >>= 1
    return acc


def s_abs2(ctx, a):
    """Crude magnitude used only for float pivot selection and trimming."""
    if ctx.mode == FLOATC:
        return abs(a)
    if ctx.mode == CYCLOTOMIC:
        return float(sum(abs(x) for x in a))
    return abs(float(a))


# ---------------------------------------------------------------------------
# polynomial operations (coefficients in the context's scalar domain)

def p_trim(ctx, coeffs):
    n = len(coeffs)
    while n and s_is0(ctx, coeffs[n - 1]):
        n -= 1
    return tuple(coeffs[:n])


def p_one(ctx):
    return (ctx.one,)


def p_x(ctx):
    return (ctx.zero, ctx.one)


def p_add(ctx, a, b):
    if not a:
        return b
    if not b:
        return a
    la, lb = len(a), len(b)
    n = la if la > lb else lb
    out = []
    for i in range(n):
        if i < la and i < lb:
            out.append(s_add(ctx, a[i], b[i]))
        elif i < la:
            out.append(a[i])
        else:
            out.append(b[i])
    return p_trim(ctx, out)


def p_sub(ctx, a, b):
    if not b:
        return a
    la, lb = len(a), len(b)
    n = la if la > lb else lb
    out = []
    for i in range(n):
        x = a[i] if i < la else ctx.zero
        y = b[i] if i < lb else ctx.zero
        out.append(s_sub(ctx, x, y))
    return p_trim(ctx, out)


def p_neg(ctx, a):
    return tuple(s_neg(ctx, c) for c in a)


def p_scale(ctx, a, s):
    if s_is0(ctx, s):
        return ()
    return p_trim(ctx, [s_mul(ctx, c, s) for c in a])


def p_mul(ctx, a, b):
    if not a or not b:
        return ()
    if len(a) == 1:
        return p_scale(ctx, b, a[0])
    if len(b) == 1:
        return p_scale(ctx, a, b[0])
    if ctx.mode == CYCLOTOMIC:
        out = [ctx.zero] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if not s_is0(ctx, ai):
                for j, bj in enumerate(b):
                    if not s_is0(ctx, bj):
                        out[i + j] = s_add(ctx, out[i + j], s_mul(ctx, ai, bj))
        return p_trim(ctx, out)
    zero = ctx.zero
    out = [zero] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return p_trim(ctx, out)


def p_divmod(ctx, a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    db = len(b) - 1
    rem = list(a)
    if len(rem) - 1 < db:
        return (), p_trim(ctx, rem)
    lead_inv = s_inv(ctx, b[-1])
    quo = [ctx.zero] * (len(rem) - db)
    for i in range(len(rem) - 1, db - 1, -1):
        c = rem[i]
        if not s_is0(ctx, c):
            q = s_mul(ctx, c, lead_inv)
            quo[i - db] = q
            for j in range(db + 1):
                rem[i - db + j] = s_sub(ctx, rem[i - db + j], s_mul(ctx, q, b[j]))
    return p_trim(ctx, quo), p_trim(ctx, rem)


def p_exact_div(ctx, a, b):
    """Division known to be exact (raises if a remainder shows up)."""
    q, r = p_divmod(ctx, a, b)
    if r:
        raise ArithmeticError("inexact polynomial division")
    return q


def p_monic(ctx, a):
    """Return (leading coefficient, monic polynomial)."""
    if not a:
        return ctx.one, ()
    lead = a[-1]
    if s_eq(ctx, lead, ctx.one):
        return lead, a
    inv = s_inv(ctx, lead)
    return lead, tuple(s_mul(ctx, c, inv) for c in a)


def p_gcd(ctx, a, b):
    """Monic gcd by the Euclidean algorithm (exact modes only)."""
    r0, r1 = a, b
    while r1:
        _, r = p_divmod(ctx, r0, r1)
        r0, r1 = r1, r
    if not r0:
        return ()
    _, g = p_monic(ctx, r0)
    return g


def p_diff(ctx, a):
    if len(a) < 2:
        return ()
    out = []
    for i in range(1, len(a)):
        out.append(s_mul(ctx, a[i], s_from_int(ctx, i)))
    return p_trim(ctx, out)


def p_eval(ctx, a, s):
    acc = ctx.zero
    for c in reversed(a):
        acc = s_add(ctx, s_mul(ctx, acc, s), c)
    return acc


def p_scale_arg(ctx, a, s):
    """Substitute x -> s*x: coefficient i picks up s^i."""
    if not a:
        return ()
    out = [a[0]]
    power = ctx.one
    for i in range(1, len(a)):
        power = s_mul(ctx, power, s)
        out.append(s_mul(ctx, a[i], power))
    return p_trim(ctx, out)


def p_shift_up(ctx, a, k):
    """Multiply by x^k."""
    if not a:
        return ()
    return (ctx.zero,) * k + tuple(a)


def p_trim_tol(ctx, coeffs):
    """Strip numerically negligible leading coefficients (float mode)."""
    if ctx.mode != FLOATC:
        return p_trim(ctx, coeffs)
    if not coeffs:
        return ()
    mx = max(abs(c) for c in coeffs)
    if mx == 0.0:
        return ()
    cut = ctx.tol * mx
    n = len(coeffs)
    while n and abs(coeffs[n - 1]) <= cut:
        n -= 1
    return tuple(coeffs[:n])


# ---------------------------------------------------------------------------
# rational-function normalization

def rf_normalize(ctx, num, den):
    """Bring num/den to canonical form.

    Exact backends reduce by the monic gcd and rescale the denominator to
    be monic.  The float backend only trims negligible coefficients and
    rescales; gcds are numerically meaningless there.
    Raises ZeroDivisionError on a zero denominator.
    """
    if ctx.mode == FLOATC:
        num = p_trim_tol(ctx, num)
        den = p_trim_tol(ctx, den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return (), p_one(ctx)
        lead, den = p_monic(ctx, den)
        if not s_eq(ctx, lead, ctx.one):
            inv = s_inv(ctx, lead)
            num = tuple(s_mul(ctx, c, inv) for c in num)
        return num, den
    num = p_trim(ctx, num)
    den = p_trim(ctx, den)
    if not den:
        raise ZeroDivisionError("zero denominator")
    if not num:
        return (), p_one(ctx)
    if len(den) == 1:
        inv = s_inv(ctx, den[0])
        return p_scale(ctx, num, inv), p_one(ctx)
    g = p_gcd(ctx, num, den)
    if len(g) > 1:
        num = p_exact_div(ctx, num, g)
        den = p_exact_div(ctx, den, g)
    lead, den = p_monic(ctx, den)
    if not s_eq(ctx, lead, ctx.one):
        inv = s_inv(ctx, lead)
        num = tuple(s_mul(ctx, c, inv) for c in num)
    return num, den


def _rf_add_sub(ctx, n1, d1, n2, d2, sub):
    # operands are canonical: coprime, monic denominator
    comb = p_sub if sub else p_add
    if d1 == d2:
        num = comb(ctx, n1, n2)
        if len(d1) == 1:
            return p_trim_tol(ctx, num), d1
        return rf_normalize(ctx, num, d1)
    if ctx.mode == FLOATC:
        return rf_normalize(
            ctx,
            comb(ctx, p_mul(ctx, n1, d2), p_mul(ctx, n2, d1)),
            p_mul(ctx, d1, d2),
        )
    g = p_gcd(ctx, d1, d2)
    if len(g) <= 1:
        # coprime denominators: the cross sum is already in lowest terms
        num = comb(ctx, p_mul(ctx, n1, d2), p_mul(ctx, n2, d1))
        if not num:
            return (), p_one(ctx)
        return num, p_mul(ctx, d1, d2)
    t1 = p_exact_div(ctx, d1, g)
    t2 = p_exact_div(ctx, d2, g)
    num = comb(ctx, p_mul(ctx, n1, t2), p_mul(ctx, n2, t1))
    if not num:
        return (), p_one(ctx)
    den = p_mul(ctx, t1, d2)
    # any surviving common factor divides g, with multiplicity at most
    # that in g, so one reduction step leaves lowest terms
    h = p_gcd(ctx, num, g)
    if len(h) > 1:
        num = p_exact_div(ctx, num, h)
        den = p_exact_div(ctx, den, h)
    return num, den


def rf_add(ctx, n1, d1, n2, d2):
    return _rf_add_sub(ctx, n1, d1, n2, d2, False)


def rf_sub(ctx, n1, d1, n2, d2):
    return _rf_add_sub(ctx, n1, d1, n2, d2, True)


def rf_mul(ctx, n1, d1, n2, d2):
    if not n1 or not n2:
        return (), p_one(ctx)
    if ctx.mode == FLOATC:
        return rf_normalize(ctx, p_mul(ctx, n1, n2), p_mul(ctx, d1, d2))
    # cross-cancel, then the product is automatically in lowest terms
    if len(d2) > 1:
        g = p_gcd(ctx, n1, d2)
        if len(g) > 1:
            n1 = p_exact_div(ctx, n1, g)
            d2 = p_exact_div(ctx, d2, g)
    if len(d1) > 1:
        g = p_gcd(ctx, n2, d1)
        if len(g) > 1:
            n2 = p_exact_div(ctx, n2, g)
            d1 = p_exact_div(ctx, d1, g)
    return p_mul(ctx, n1, n2), p_mul(ctx, d1, d2)


def rf_div(ctx, n1, d1, n2, d2):
    if not n2:
        raise ZeroDivisionError("division by the zero rational function")
    if ctx.mode == FLOATC:
        return rf_normalize(ctx, p_mul(ctx, n1, d2), p_mul(ctx, d1, n2))
    # invert n2/d2 with a monic rescale, then multiply
    lead, n2m = p_monic(ctx, n2)
    if not s_eq(ctx, lead, ctx.one):
        d2 = p_scale(ctx, d2, s_inv(ctx, lead))
    return rf_mul(ctx, n1, d1, d2, n2m)


def rf_scale_arg(ctx, num, den, s):
    """Substitute x -> s*x; for invertible s this preserves lowest terms."""
    if s_is0(ctx, s):
        return rf_normalize(ctx, p_scale_arg(ctx, num, s), p_scale_arg(ctx, den, s))
    n = p_scale_arg(ctx, num, s)
    d = p_scale_arg(ctx, den, s)
    if not n:
        return (), p_one(ctx)
    lead = d[-1]
    if not s_eq(ctx, lead, ctx.one):
        inv = s_inv(ctx, lead)
        n = p_scale(ctx, n, inv)
        d = p_scale(ctx, d, inv)
    return n, d


def rf_diff(ctx, num, den):
    """Quotient-rule derivative, already normalized."""
    dn = p_diff(ctx, num)
    if len(den) == 1:
        return dn, den
    dd = p_diff(ctx, den)
    if ctx.mode != FLOATC:
        g = p_gcd(ctx, den, dd)
        if len(g) <= 1:
            # squarefree denominator: (n'd - nd')/d^2 is already reduced
            top = p_sub(ctx, p_mul(ctx, dn, den), p_mul(ctx, num, dd))
            if not top:
                return (), p_one(ctx)
            return top, p_mul(ctx, den, den)
    top = p_sub(ctx, p_mul(ctx, dn, den), p_mul(ctx, num, dd))
    return rf_normalize(ctx, top, p_mul(ctx, den, den))
