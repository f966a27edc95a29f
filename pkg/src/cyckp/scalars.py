"""Scalar tower: Q, Q(zeta_m), complex floats, and rational functions over them.

CycField bundles a kernel context with value-level wrappers (CycScalar,
RatFunc) whose operator overloads make the upper layers readable.  All
exact arithmetic is canonical: cyclotomic scalars are reduced modulo the
m-th cyclotomic polynomial, rational functions carry a gcd-reduced
numerator over a monic denominator, so equality is literal equality of
the stored data.
"""

from __future__ import annotations

import numbers
from fractions import Fraction

from cyckp import kernel as K
from cyckp.errors import DivisionByZero, ShapeMismatch, SingularMatrix


def cyclotomic_polynomial(m):
    """Coefficients of the m-th cyclotomic polynomial, lowest degree first.

    E.g. m=1 -> (-1, 1) (t - 1) and m=12 -> (1, 0, -1, 0, 1) (t^4 - t^2 + 1).
    """
    return K.cyclotomic_poly_q(m)


_FIELD_CACHE = {}


class CycField:
    """The coefficient field Q(zeta_m), or its complex-float stand-in."""

    is_dual = False

    def __new__(cls, m, exact=True, tol=1e-9):
        key = (m, exact, tol)
        cached = _FIELD_CACHE.get(key)
        if cached is not None:
            return cached
        self = super().__new__(cls)
        self.m = m
        self.is_exact = exact
        self.tol = tol
        self.ctx = K.make_exact_context(m) if exact else K.make_float_context(m, tol)
        self.zero = CycScalar(self, self.ctx.zero)
        self.one = CycScalar(self, self.ctx.one)
        self.rf_zero = RatFunc(self, (), K.p_one(self.ctx), _normalized=True)
        self.rf_one = RatFunc(self, K.p_one(self.ctx), K.p_one(self.ctx), _normalized=True)
        self.x = RatFunc(self, K.p_x(self.ctx), K.p_one(self.ctx), _normalized=True)
        _FIELD_CACHE[key] = self
        return self

    def __repr__(self):
        kind = "exact" if self.is_exact else "float"
        return f"CycField(m={self.m}, {kind})"

    # -- scalar factories ---------------------------------------------------

    def scalar(self, value):
        if isinstance(value, CycScalar):
            if value.field is self:
                return value
            if value.field.m == self.m and value.field.is_exact and not self.is_exact:
                return CycScalar(self, _raw_to_complex(value.field.ctx, value.raw))
            raise ShapeMismatch("scalar from an incompatible field")
        return CycScalar(self, self._raw(value))

    def _raw(self, value):
        ctx = self.ctx
        if isinstance(value, bool):
            raise TypeError("booleans are not scalars")
        if isinstance(value, int):
            return K.s_from_int(ctx, value)
        if isinstance(value, str):
            return K.s_from_q(ctx, K.q_from_str(value))
        if isinstance(value, Fraction):
            return K.s_from_q(ctx, K.QQ(value.numerator, value.denominator))
        if isinstance(value, float):
            if not self.is_exact:
                return complex(value)
            frac = Fraction(value).limit_denominator(10**12)
            if float(frac) != value:
                raise TypeError("refusing to coerce a non-dyadic float exactly")
            return K.s_from_q(ctx, K.QQ(frac.numerator, frac.denominator))
        if isinstance(value, complex):
            if self.is_exact:
                raise TypeError("complex literals need the float backend")
            return value
        if type(value) is type(K.QQ(0)):
            return K.s_from_q(ctx, value)
        if isinstance(value, tuple) and ctx.mode == K.CYCLOTOMIC:
            coeffs = [K.QQ(Fraction(c)) if not isinstance(c, str) else K.q_from_str(c) for c in value]
            coeffs += [K.QQ(0)] * (ctx.phi - len(coeffs))
            if len(coeffs) != ctx.phi:
                raise ShapeMismatch("cyclotomic coefficient vector of the wrong length")
            return tuple(coeffs)
        if isinstance(value, numbers.Rational):
            return K.s_from_q(ctx, K.QQ(value.numerator, value.denominator))
        raise TypeError(f"cannot coerce {value!r} into {self!r}")

    def root(self, j=1):
        """The root of unity zeta_m^j."""
        return CycScalar(self, K.s_root(self.ctx, j))

    def lift(self, scalar):
        return self.scalar(scalar)

    # -- rational-function factories ----------------------------------------

    def ratfunc(self, num, den=None):
        np = self._poly(num)
        dp = self._poly(den) if den is not None else K.p_one(self.ctx)
        try:
            n, d = K.rf_normalize(self.ctx, np, dp)
        except ZeroDivisionError as exc:
            raise DivisionByZero(str(exc)) from None
        return RatFunc(self, n, d, _normalized=True)

    def _poly(self, value):
        if isinstance(value, RatFunc):
            if value.field is not self:
                raise ShapeMismatch("rational function from another field")
            if len(value.den) != 1:
                raise TypeError("expected a polynomial, got a proper fraction")
            return value.num
        if isinstance(value, (list, tuple)):
            return K.p_trim(self.ctx, [self._raw(c) if not isinstance(c, CycScalar) else self.scalar(c).raw for c in value])
        return K.p_trim(self.ctx, [self.scalar(value).raw])

    def rf_const(self, value):
        s = self.scalar(value)
        if s.is_zero:
            return self.rf_zero
        return RatFunc(self, (s.raw,), K.p_one(self.ctx), _normalized=True)

    def coerce_rf(self, value):
        if isinstance(value, RatFunc):
            if value.field is not self:
                raise ShapeMismatch("rational function from another field")
            return value
        return self.rf_const(value)

    def dual(self):
        from cyckp.dual import DualField

        return DualField(self)

    def to_float(self):
        """The complex-float field with the same m."""
        if not self.is_exact:
            return self
        return CycField(self.m, exact=False, tol=self.tol)


def root_of_unity(m, j):
    """zeta_m^j as an exact cyclotomic scalar."""
    return CycField(m).root(j)


def _raw_to_complex(ctx, raw):
    if ctx.mode == K.FLOATC:
        return raw
    if ctx.mode == K.RATIONAL:
        return complex(float(raw))
    import cmath

    z = cmath.exp(2j * cmath.pi / ctx.m)
    acc = 0j
    for c in reversed(raw):
        acc = acc * z + float(c)
    return acc


def format_scalar(ctx, raw):
    if ctx.mode == K.RATIONAL:
        return str(raw)
    if ctx.mode == K.FLOATC:
        if raw.imag == 0:
            return repr(raw.real)
        return repr(raw)
    terms = []
    for i, c in enumerate(raw):
        if c == 0:
            continue
        if i == 0:
            terms.append(str(c))
        else:
            z = "z" if i == 1 else f"z^{i}"
            if c == 1:
                terms.append(z)
            elif c == -1:
                terms.append(f"-{z}")
            else:
                terms.append(f"{c}*{z}")
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return out


def format_poly(ctx, coeffs, var="x"):
    if not coeffs:
        return "0"
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if K.s_is0(ctx, c):
            continue
        cs = format_scalar(ctx, c)
        wrap = ("+" in cs[1:]) or ("-" in cs[1:]) or ("*" in cs and i > 0)
        if wrap:
            cs = f"({cs})"
        if i == 0:
            parts.append(cs)
        else:
            xs = var if i == 1 else f"{var}^{i}"
            if cs == "1":
                parts.append(xs)
            elif cs == "-1":
                parts.append(f"-{xs}")
            else:
                parts.append(f"{cs}*{xs}")
    out = parts[0]
    for t in parts[1:]:
        out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return out


class CycScalar:
    """An element of the coefficient field, with operator overloads."""

    __slots__ = ("field", "raw")

    def __init__(self, field, raw):
        self.field = field
        self.raw = raw

    # coercion helper
    def _mate(self, other):
        if isinstance(other, CycScalar):
            if other.field is not self.field:
                raise ShapeMismatch("scalars from different fields")
            return other.raw
        if isinstance(other, RatFunc):
            return NotImplemented
        try:
            return self.field._raw(other)
        except TypeError:
            return NotImplemented

    @property
    def is_zero(self):
        return K.s_is0(self.field.ctx, self.raw)

    def __bool__(self):
        return not self.is_zero

    def __add__(self, other):
        raw = self._mate(other)
        if raw is NotImplemented:
            return NotImplemented
        return CycScalar(self.field, K.s_add(self.field.ctx, self.raw, raw))

    __radd__ = __add__

    def __sub__(self, other):
        raw = self._mate(other)
        if raw is NotImplemented:
            return NotImplemented
        return CycScalar(self.field, K.s_sub(self.field.ctx, self.raw, raw))

    def __rsub__(self, other):
        raw = self._mate(other)
        if raw is NotImplemented:
            return NotImplemented
        return CycScalar(self.field, K.s_sub(self.field.ctx, raw, self.raw))

    def __neg__(self):
        return CycScalar(self.field, K.s_neg(self.field.ctx, self.raw))

    def __mul__(self, other):
        raw = self._mate(other)
        if raw is NotImplemented:
            return NotImplemented
        return CycScalar(self.field, K.s_mul(self.field.ctx, self.raw, raw))

    __rmul__ = __mul__

    def __truediv__(self, other):
        raw = self._mate(other)
        if raw is NotImplemented:
            return NotImplemented
        try:
            return CycScalar(self.field, K.s_div(self.field.ctx, self.raw, raw))
        except ZeroDivisionError as exc:
            raise DivisionByZero(str(exc)) from None

    def __rtruediv__(self, other):
        raw = self._mate(other)
        if raw is NotImplemented:
            return NotImplemented
        try:
            return CycScalar(self.field, K.s_div(self.field.ctx, raw, self.raw))
        except ZeroDivisionError as exc:
            raise DivisionByZero(str(exc)) from None

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        try:
            return CycScalar(self.field, K.s_pow(self.field.ctx, self.raw, n))
        except ZeroDivisionError as exc:
            raise DivisionByZero(str(exc)) from None

    def inv(self):
        try:
            return CycScalar(self.field, K.s_inv(self.field.ctx, self.raw))
        except ZeroDivisionError as exc:
            raise DivisionByZero(str(exc)) from None

    def __eq__(self, other):
        raw = self._mate(other)
        if raw is NotImplemented:
            return NotImplemented
        return K.s_eq(self.field.ctx, self.raw, raw)

    def __hash__(self):
        return hash((self.field.m, self.field.is_exact, self.raw))

    def to_complex(self):
        return _raw_to_complex(self.field.ctx, self.raw)

    def __str__(self):
        return format_scalar(self.field.ctx, self.raw)

    def __repr__(self):
        return f"<{self} : m={self.field.m}>"


class RatFunc:
    """A canonical rational function in x over the coefficient field."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field, num, den=None, _normalized=False):
        self.field = field
        if _normalized:
            self.num = num
            self.den = den
        else:
            np = field._poly(num)
            dp = field._poly(den) if den is not None else K.p_one(field.ctx)
            try:
                self.num, self.den = K.rf_normalize(field.ctx, np, dp)
            except ZeroDivisionError as exc:
                raise DivisionByZero(str(exc)) from None

    @classmethod
    def _from_raw(cls, field, num, den):
        """Normalize raw kernel polynomials directly (internal use)."""
        try:
            n, d = K.rf_normalize(field.ctx, num, den)
        except ZeroDivisionError as exc:
            raise DivisionByZero(str(exc)) from None
        return cls(field, n, d, _normalized=True)

    # -- basic queries -------------------------------------------------------

    @property
    def is_zero(self):
        return not self.num

    @property
    def is_invertible(self):
        return bool(self.num)

    def __bool__(self):
        return bool(self.num)

    @property
    def is_constant(self):
        return len(self.num) <= 1 and len(self.den) == 1

    def const_value(self):
        if not self.is_constant:
            raise ValueError("not a constant")
        ctx = self.field.ctx
        if not self.num:
            return CycScalar(self.field, ctx.zero)
        return CycScalar(self.field, K.s_div(ctx, self.num[0], self.den[0]))

    def degree(self):
        """(numerator degree, denominator degree); zero has degree (-1, 0)."""
        return (len(self.num) - 1, len(self.den) - 1)

    # -- coercion ------------------------------------------------------------

    def _mate(self, other):
        if isinstance(other, RatFunc):
            if other.field is not self.field:
                raise ShapeMismatch("rational functions over different fields")
            return other
        if isinstance(other, CycScalar):
            return self.field.rf_const(other)
        try:
            return self.field.rf_const(other)
        except (TypeError, ShapeMismatch):
            return NotImplemented

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        n, d = K.rf_add(self.field.ctx, self.num, self.den, o.num, o.den)
        return RatFunc(self.field, n, d, _normalized=True)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        n, d = K.rf_sub(self.field.ctx, self.num, self.den, o.num, o.den)
        return RatFunc(self.field, n, d, _normalized=True)

    def __rsub__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        n, d = K.rf_sub(self.field.ctx, o.num, o.den, self.num, self.den)
        return RatFunc(self.field, n, d, _normalized=True)

    def __neg__(self):
        return RatFunc(self.field, K.p_neg(self.field.ctx, self.num), self.den, _normalized=True)

    def __mul__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        n, d = K.rf_mul(self.field.ctx, self.num, self.den, o.num, o.den)
        return RatFunc(self.field, n, d, _normalized=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        try:
            n, d = K.rf_div(self.field.ctx, self.num, self.den, o.num, o.den)
        except ZeroDivisionError as exc:
            raise DivisionByZero(str(exc)) from None
        return RatFunc(self.field, n, d, _normalized=True)

    def __rtruediv__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return o.__truediv__(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if self.is_zero:
                raise DivisionByZero("negative power of zero")
            inv = RatFunc(self.field, self.den, self.num)
            return inv ** (-n)
        out = self.field.rf_one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        if self.field.is_exact:
            return self.num == o.num and self.den == o.den
        ctx = self.field.ctx
        a = K.p_mul(ctx, self.num, o.den)
        b = K.p_mul(ctx, o.num, self.den)
        diff = K.p_sub(ctx, a, b)
        if not diff:
            return True
        scale = max((abs(c) for c in a + b), default=0.0)
        return max(abs(c) for c in diff) <= self.field.tol * max(scale, 1.0)

    def __hash__(self):
        return hash((self.field.m, self.num, self.den))

    # -- calculus and substitution -------------------------------------------

    def diff(self):
        n, d = K.rf_diff(self.field.ctx, self.num, self.den)
        return RatFunc(self.field, n, d, _normalized=True)

    def scale_arg(self, s):
        """Substitute x -> s*x for a field scalar s."""
        s = self.field.scalar(s)
        ctx = self.field.ctx
        n, d = K.rf_scale_arg(ctx, self.num, self.den, s.raw)
        return RatFunc(self.field, n, d, _normalized=True)

    def eval(self, s):
        s = self.field.scalar(s)
        ctx = self.field.ctx
        dv = K.p_eval(ctx, self.den, s.raw)
        if K.s_is0(ctx, dv):
            raise DivisionByZero("evaluation at a pole")
        nv = K.p_eval(ctx, self.num, s.raw)
        return CycScalar(self.field, K.s_div(ctx, nv, dv))

    def __str__(self):
        ctx = self.field.ctx
        ns = format_poly(ctx, self.num)
        if len(self.den) == 1 and K.s_eq(ctx, self.den[0], ctx.one):
            return ns
        ds = format_poly(ctx, self.den)
        if len(self.num) > 1:
            ns = f"({ns})"
        if len(self.den) > 1:
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self):
        return f"<RatFunc {self}>"


def ratfunc_arith(op, a, b):
    """Named dispatch used by the CLI: op in {add, sub, mul, div}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def ratfunc_diff(f):
    return f.diff()


# ---------------------------------------------------------------------------
# matrix inverses over rational functions

def matrix_inverse_ratfunc(rows):
    """Exact inverse of a square matrix of rational functions.

    The exact backend clears denominators row by row and runs Bareiss
    fraction-free elimination (all interior divisions are exact) followed
    by back-substitution; float and dual backends use ordinary
    Gauss-Jordan elimination.  Raises SingularMatrix when no inverse
    exists.
    """
    n = len(rows)
    if n == 0:
        return []
    for r in rows:
        if len(r) != n:
            raise ShapeMismatch("matrix is not square")
    first = rows[0][0]
    field = first.field
    if getattr(field, "is_dual", False) or not field.is_exact:
        return _gauss_jordan_inverse(rows, field)
    return _bareiss_inverse(rows, field)


def _bareiss_inverse(rows, field):
    ctx = field.ctx
    n = len(rows)
    one = K.p_one(ctx)
    # clear denominators: A = diag(rd) * M with rd_i the lcm of row i's dens
    A = []
    rds = []
    for row in rows:
        rd = one
        for e in row:
            g = K.p_gcd(ctx, rd, e.den)
            rd = K.p_mul(ctx, rd, K.p_exact_div(ctx, e.den, g))
        arow = []
        for e in row:
            scale = K.p_exact_div(ctx, rd, e.den)
            arow.append(K.p_mul(ctx, e.num, scale))
        # augment with diag(rd): the identity row scaled by nothing yet
        aug = [() for _ in range(n)]
        aug[len(A)] = one
        A.append(arow + aug)
        rds.append(rd)
    width = 2 * n
    prev = one
    for k in range(n):
        piv = -1
        best = None
        for r in range(k, n):
            cand = A[r][k]
            if cand:
                size = len(cand)
                if best is None or size < best:
                    best = size
                    piv = r
        if piv < 0:
            raise SingularMatrix("matrix is not invertible")
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
        pk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            rowi = A[i]
            rowk = A[k]
            for j in range(k + 1, width):
                t = K.p_sub(ctx, K.p_mul(ctx, pk, rowi[j]), K.p_mul(ctx, aik, rowk[j]))
                rowi[j] = K.p_exact_div(ctx, t, prev) if len(prev) > 1 or not K.s_eq(ctx, prev[0], ctx.one) else t
            rowi[k] = ()
        prev = pk
    # back-substitution over the fraction field, one source column at a time
    inv = [[None] * n for _ in range(n)]
    diag = [RatFunc._from_raw(field, A[i][i], one) for i in range(n)]
    for c in range(n):
        col = [None] * n
        for i in range(n - 1, -1, -1):
            acc = RatFunc._from_raw(field, A[i][n + c], one)
            for j in range(i + 1, n):
                if A[i][j] and not col[j].is_zero:
                    acc = acc - RatFunc._from_raw(field, A[i][j], one) * col[j]
            col[i] = acc / diag[i]
        rdc = RatFunc._from_raw(field, rds[c], one)
        for i in range(n):
            inv[i][c] = col[i] * rdc
    return inv


def _gauss_jordan_inverse(rows, field):
    n = len(rows)
    one = field.rf_one
    zero = field.rf_zero
    A = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(rows)]
    for k in range(n):
        piv = -1
        for r in range(k, n):
            if A[r][k].is_invertible:
                piv = r
                break
        if piv < 0:
            raise SingularMatrix("matrix is not invertible")
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
        inv = one / A[k][k]
        A[k] = [e * inv for e in A[k]]
        for i in range(n):
            if i != k:
                f = A[i][k]
                if not f.is_zero:
                    A[i] = [a - f * b for a, b in zip(A[i], A[k])]
    return [row[n:] for row in A]
