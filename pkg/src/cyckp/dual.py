"""First-order dual numbers over the scalar tower.

DualScalar and DualRatFunc are pairs (value, derivative) of base-field
objects with Leibniz arithmetic.  Keeping the pair ABOVE the canonical
rational-function level means every normalization (gcd, monic
denominator) happens inside the base field, where it is well defined;
the dual layer itself never divides polynomials.

These are used to differentiate anything the package computes with
respect to a chosen tangent direction: perturb the inputs to
value + eps * velocity, rerun the computation over the dual field, read
off the eps part.  Exact when the base field is exact.
"""

from __future__ import annotations

from cyckp.errors import DivisionByZero, ShapeMismatch

_DUAL_CACHE = {}


class DualField:
    """Field-like wrapper: elements are a + eps*b with eps^2 = 0."""

    is_dual = True

    def __new__(cls, base):
        cached = _DUAL_CACHE.get(id(base))
        if cached is not None:
            return cached
        self = super().__new__(cls)
        self.base = base
        self.m = base.m
        self.is_exact = base.is_exact
        self.tol = base.tol
        self.zero = DualScalar(self, base.zero, base.zero)
        self.one = DualScalar(self, base.one, base.zero)
        self.rf_zero = DualRatFunc(self, base.rf_zero, base.rf_zero)
        self.rf_one = DualRatFunc(self, base.rf_one, base.rf_zero)
        self.x = DualRatFunc(self, base.x, base.rf_zero)
        _DUAL_CACHE[id(base)] = self
        return self

    def __repr__(self):
        return f"Dual({self.base!r})"

    def scalar(self, value):
        if isinstance(value, DualScalar):
            if value.field is not self:
                raise ShapeMismatch("dual scalar from another field")
            return value
        return DualScalar(self, self.base.scalar(value), self.base.zero)

    def dual_scalar(self, value, velocity):
        return DualScalar(self, self.base.scalar(value), self.base.scalar(velocity))

    def root(self, j=1):
        return DualScalar(self, self.base.root(j), self.base.zero)

    def lift(self, value):
        """Embed a base scalar or rational function with zero derivative."""
        from cyckp.scalars import CycScalar, RatFunc

        if isinstance(value, (DualScalar, DualRatFunc)):
            return value
        if isinstance(value, RatFunc):
            return DualRatFunc(self, value, self.base.rf_zero)
        if isinstance(value, CycScalar):
            return DualScalar(self, value, self.base.zero)
        return self.scalar(value)

    def ratfunc(self, num, den=None):
        if isinstance(num, DualRatFunc) and den is None:
            return num
        f = self.base.ratfunc(num, den)
        return DualRatFunc(self, f, self.base.rf_zero)

    def rf_const(self, value):
        s = self.scalar(value)
        return DualRatFunc(self, self.base.rf_const(s.val), self.base.rf_const(s.eps))

    def coerce_rf(self, value):
        if isinstance(value, DualRatFunc):
            if value.field is not self:
                raise ShapeMismatch("dual rational function from another field")
            return value
        from cyckp.scalars import RatFunc

        if isinstance(value, RatFunc):
            return DualRatFunc(self, self.base.coerce_rf(value), self.base.rf_zero)
        return self.rf_const(value)


class DualScalar:
    __slots__ = ("field", "val", "eps")

    def __init__(self, field, val, eps):
        self.field = field
        self.val = val
        self.eps = eps

    def _mate(self, other):
        if isinstance(other, DualScalar):
            if other.field is not self.field:
                raise ShapeMismatch("dual scalars from different fields")
            return other
        if isinstance(other, DualRatFunc):
            return NotImplemented
        try:
            return self.field.scalar(other)
        except (TypeError, ShapeMismatch):
            return NotImplemented

    @property
    def is_zero(self):
        return self.val.is_zero and self.eps.is_zero

    def __bool__(self):
        return not self.is_zero

    def __add__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return DualScalar(self.field, self.val + o.val, self.eps + o.eps)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return DualScalar(self.field, self.val - o.val, self.eps - o.eps)

    def __rsub__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return DualScalar(self.field, o.val - self.val, o.eps - self.eps)

    def __neg__(self):
        return DualScalar(self.field, -self.val, -self.eps)

    def __mul__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return DualScalar(
            self.field, self.val * o.val, self.val * o.eps + self.eps * o.val
        )

    __rmul__ = __mul__

    def inv(self):
        if self.val.is_zero:
            raise DivisionByZero("dual scalar with zero value part is not invertible")
        vinv = self.val.inv()
        return DualScalar(self.field, vinv, -(vinv * vinv) * self.eps)

    def __truediv__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inv()

    def __rtruediv__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.inv()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inv() ** (-n)
        out = self.field.one
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
        return self.val == o.val and self.eps == o.eps

    def __hash__(self):
        return hash((self.val, self.eps))

    def to_complex(self):
        return self.val.to_complex()

    def __str__(self):
        return f"{self.val} + eps*({self.eps})"

    __repr__ = __str__


class DualRatFunc:
    __slots__ = ("field", "val", "eps")

    def __init__(self, field, val, eps):
        self.field = field
        self.val = val
        self.eps = eps

    def _mate(self, other):
        if isinstance(other, DualRatFunc):
            if other.field is not self.field:
                raise ShapeMismatch("dual rational functions from different fields")
            return other
        if isinstance(other, DualScalar):
            return self.field.rf_const(other)
        try:
            return self.field.coerce_rf(other)
        except (TypeError, ShapeMismatch):
            return NotImplemented

    @property
    def is_zero(self):
        return self.val.is_zero and self.eps.is_zero

    @property
    def is_invertible(self):
        return not self.val.is_zero

    def __bool__(self):
        return not self.is_zero

    @property
    def is_constant(self):
        return self.val.is_constant and self.eps.is_constant

    def const_value(self):
        return DualScalar(self.field, self.val.const_value(), self.eps.const_value())

    def __add__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return DualRatFunc(self.field, self.val + o.val, self.eps + o.eps)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return DualRatFunc(self.field, self.val - o.val, self.eps - o.eps)

    def __rsub__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return DualRatFunc(self.field, o.val - self.val, o.eps - self.eps)

    def __neg__(self):
        return DualRatFunc(self.field, -self.val, -self.eps)

    def __mul__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return DualRatFunc(
            self.field, self.val * o.val, self.val * o.eps + self.eps * o.val
        )

    __rmul__ = __mul__

    def inv(self):
        if self.val.is_zero:
            raise DivisionByZero("dual rational function with zero value part")
        vinv = self.field.base.rf_one / self.val
        return DualRatFunc(self.field, vinv, -(vinv * vinv) * self.eps)

    def __truediv__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inv()

    def __rtruediv__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.inv()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inv() ** (-n)
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
        return self.val == o.val and self.eps == o.eps

    def __hash__(self):
        return hash((self.val, self.eps))

    def diff(self):
        return DualRatFunc(self.field, self.val.diff(), self.eps.diff())

    def scale_arg(self, s):
        s = self.field.scalar(s)
        base = self.field.base
        v = self.val.scale_arg(s.val)
        e = self.eps.scale_arg(s.val)
        if not s.eps.is_zero:
            # d/deps of f((s0 + eps*s1) x) contributes s1 * x * f'(s0 x)
            e = e + base.x * s.eps * self.val.diff().scale_arg(s.val)
        return DualRatFunc(self.field, v, e)

    def eval(self, s):
        s = self.field.scalar(s)
        v = self.val.eval(s.val)
        e = self.eps.eval(s.val)
        if not s.eps.is_zero:
            e = e + s.eps * self.val.diff().eval(s.val)
        return DualScalar(self.field, v, e)

    def __str__(self):
        return f"{self.val} + eps*({self.eps})"

    __repr__ = __str__
