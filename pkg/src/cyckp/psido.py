"""Truncated pseudodifferential calculus over the crossed product.

Elements are series sum_{j>=0} f_j y^{N-j} with f_j in C(x) * Z_m (matrix
coefficients allowed) and y the Dunkl generator, subject to the single
commutation rule

    y f = theta^{-1}(f) y + D(f).

Negative powers of y conjugate coefficients through an infinite series

    y^{-1} f = sum_{p>=0} u_p y^{-1-p},   u_0 = theta(f), u_{p+1} = -theta(D(u_p)),

which terminates exactly when some u_p vanishes (always the case for
polynomial coefficients, since D lowers x-degree) and is otherwise cut at
the validity horizon.

Every element carries its own horizon: `coeffs` stores the degrees from
`top` down to `valid_to` and nothing below is claimed unless `exact_tail`
is set, in which case the tail is exactly zero.  Products propagate the
worst-case horizon max(valid_A + top_B, top_A + valid_B) so precision loss
is explicit and testable: recomputing at a deeper horizon and truncating
reproduces shallower results bit for bit.

Two independent multiplication routines are provided.  `psido_mul` pushes
powers of y through the right factor one step at a time (shared chains
y^a B).  `psido_mul_alt` uses the twisted derivations D_i = theta^{1-i} D
theta^{i} in a triangular recursion, one (power, coefficient) pair at a
time.  They must agree wherever both are defined; the second serves as a
built-in oracle for the first.
"""

from __future__ import annotations

from cyckp.crossed import CrossedElem, apply_D, crossed_mul, idempotent, theta
from cyckp.errors import DepthExhausted, NotUnitriangular, ShapeMismatch

__all__ = [
    "PsiDO",
    "PsiRing",
    "DEFAULT_DEPTH",
    "psido_mul",
    "psido_mul_alt",
    "split",
    "invert_unitriangular",
    "dunkl_y",
    "dunkl_realisation",
    "constraint_f0",
]

DEFAULT_DEPTH = 8

_NEG_INF = None  # marks an exactly-zero tail in horizon arithmetic


class PsiDO:
    """A truncated series in the Dunkl generator y.

    coeffs[j] is the coefficient of y^(top - j); the stored window runs
    from degree `top` down to `valid_to` = top - depth.  `exact_tail`
    asserts that every coefficient below the window is exactly zero.
    """

    __slots__ = ("field", "m", "d", "top", "coeffs", "exact_tail")

    def __init__(self, field, top, coeffs, exact_tail=False):
        coeffs = list(coeffs)
        if not coeffs:
            raise ShapeMismatch("a series needs at least one stored coefficient")
        d = coeffs[0].d
        for c in coeffs:
            if not isinstance(c, CrossedElem):
                raise ShapeMismatch("coefficients must be crossed-product elements")
            if c.field is not field:
                raise ShapeMismatch("coefficients over a different field")
            if c.d != d:
                raise ShapeMismatch("coefficients with mixed matrix sizes")
        # canonical form: no zero leading coefficient unless the window is
        # a single entry; exact tails drop stored zeros at the bottom too
        while len(coeffs) > 1 and coeffs[0].is_zero:
            coeffs.pop(0)
            top -= 1
        if exact_tail:
            while len(coeffs) > 1 and coeffs[-1].is_zero:
                coeffs.pop()
            if len(coeffs) == 1 and coeffs[0].is_zero:
                top = 0
        self.field = field
        self.m = field.m
        self.d = d
        self.top = top
        self.coeffs = tuple(coeffs)
        self.exact_tail = exact_tail

    # -- constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, field, d=1):
        return cls(field, 0, [CrossedElem.zero(field, d)], exact_tail=True)

    @classmethod
    def one(cls, field, d=1):
        return cls(field, 0, [CrossedElem.one(field, d)], exact_tail=True)

    @classmethod
    def from_crossed(cls, f, degree=0):
        """f * y^degree for a crossed-product coefficient f."""
        return cls(f.field, degree, [f], exact_tail=True)

    @classmethod
    def y_power(cls, field, n=1, d=1):
        return cls(field, n, [CrossedElem.one(field, d)], exact_tail=True)

    # -- queries ----------------------------------------------------------------

    @property
    def depth(self):
        return len(self.coeffs) - 1

    @property
    def valid_to(self):
        return self.top - self.depth

    @property
    def is_zero(self):
        return self.exact_tail and all(c.is_zero for c in self.coeffs)

    def coeff(self, u):
        """The coefficient of y^u; zero above the window and below an
        exact tail, DepthExhausted below an inexact one."""
        if u > self.top:
            return CrossedElem.zero(self.field, self.d)
        if u >= self.valid_to:
            return self.coeffs[self.top - u]
        if self.exact_tail:
            return CrossedElem.zero(self.field, self.d)
        raise DepthExhausted(f"coefficient of y^{u} is below the horizon {self.valid_to}")

    def truncate(self, depth):
        """Keep at most depth+1 coefficients from the top."""
        if depth < 0:
            raise ShapeMismatch("depth must be nonnegative")
        if depth >= self.depth:
            return self
        kept = self.coeffs[: depth + 1]
        dropped_all_zero = all(c.is_zero for c in self.coeffs[depth + 1 :])
        return PsiDO(self.field, self.top, kept,
                     exact_tail=self.exact_tail and dropped_all_zero)

    def broadcast(self, d):
        if self.d == d:
            return self
        return PsiDO(self.field, self.top, [c.broadcast(d) for c in self.coeffs],
                     exact_tail=self.exact_tail)

    @staticmethod
    def _common_d(a, b):
        if a.d == b.d:
            return a, b
        if a.d == 1:
            return a.broadcast(b.d), b
        if b.d == 1:
            return a, b.broadcast(a.d)
        raise ShapeMismatch(f"component sizes {a.d} and {b.d} differ")

    def _mate(self, other):
        if isinstance(other, PsiDO):
            if other.field is not self.field:
                raise ShapeMismatch("series over different fields")
            return other
        if isinstance(other, CrossedElem):
            return PsiDO.from_crossed(other)
        try:
            rf = self.field.coerce_rf(other)
        except (TypeError, ShapeMismatch):
            return NotImplemented
        return PsiDO.from_crossed(CrossedElem.from_rf(self.field, rf))

    # -- linear arithmetic ---------------------------------------------------------

    def __add__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        a, b = PsiDO._common_d(self, o)
        top = max(a.top, b.top)
        if a.exact_tail and b.exact_tail:
            floor = min(a.valid_to, b.valid_to)
            exact = True
        elif a.exact_tail:
            floor, exact = b.valid_to, False
        elif b.exact_tail:
            floor, exact = a.valid_to, False
        else:
            floor, exact = max(a.valid_to, b.valid_to), False
        out = [a.coeff(u) + b.coeff(u) for u in range(top, floor - 1, -1)]
        return PsiDO(a.field, top, out, exact_tail=exact)

    __radd__ = __add__

    def __neg__(self):
        return PsiDO(self.field, self.top, [-c for c in self.coeffs],
                     exact_tail=self.exact_tail)

    def __sub__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return self.__add__(-o)

    def __rsub__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return o.__add__(-self)

    def scale(self, s):
        s = self.field.scalar(s)
        return PsiDO(self.field, self.top, [c.scale(s) for c in self.coeffs],
                     exact_tail=self.exact_tail)

    def __eq__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        a, b = PsiDO._common_d(self, o)
        return (a.top == b.top and a.exact_tail == b.exact_tail
                and a.coeffs == b.coeffs)

    def __hash__(self):
        return hash((self.top, self.exact_tail, self.coeffs))

    def agrees(self, other):
        """Equality on the degrees both sides can vouch for."""
        o = self._mate(other)
        if o is NotImplemented:
            raise ShapeMismatch("cannot compare with this operand")
        a, b = PsiDO._common_d(self, o)
        if a.exact_tail and b.exact_tail:
            floor = min(a.valid_to, b.valid_to)
        else:
            floor = max(
                a.valid_to if not a.exact_tail else b.valid_to,
                b.valid_to if not b.exact_tail else a.valid_to,
            )
        top = max(a.top, b.top)
        if floor > top:
            return True
        return all(a.coeff(u) == b.coeff(u) for u in range(top, floor - 1, -1))

    def __str__(self):
        parts = []
        for j, c in enumerate(self.coeffs):
            u = self.top - j
            if c.is_zero:
                continue
            body = str(c)
            if " + " in body or body.startswith("-"):
                body = f"({body})"
            if u == 0:
                parts.append(body)
            else:
                yp = "y" if u == 1 else f"y^{u}"
                parts.append(yp if body == "1" else f"{body}*{yp}")
        head = " + ".join(parts) if parts else "0"
        tail = "" if self.exact_tail else f" + O(y^{self.valid_to - 1})"
        return head + tail

    def __repr__(self):
        return f"<PsiDO {self}>"


# ---------------------------------------------------------------------------
# horizon arithmetic: None plays the role of -infinity (an exact tail)

def _hmax(a, b):
    if a is _NEG_INF:
        return b
    if b is _NEG_INF:
        return a
    return max(a, b)


def _product_floor(A, B, depth):
    """(storage floor, horizon) for A*B at the requested depth."""
    top = A.top + B.top
    va = _NEG_INF if A.exact_tail else A.valid_to + B.top
    vb = _NEG_INF if B.exact_tail else B.valid_to + A.top
    horizon = _hmax(va, vb)
    floor = top - depth if horizon is _NEG_INF else max(top - depth, horizon)
    if floor > top:
        raise DepthExhausted(
            f"product has no trustworthy coefficients above degree {floor}")
    return floor, horizon


# ---------------------------------------------------------------------------
# route 1: shared chains C_a = y^a B

class _Chain:
    """One chain level: coefficients of y^a B on [floor, top]."""

    __slots__ = ("top", "floor", "exact", "coeffs")

    def __init__(self, top, floor, exact, coeffs):
        self.top = top
        self.floor = floor
        self.exact = exact
        self.coeffs = coeffs  # dict degree -> CrossedElem

    def get(self, u, zero):
        if u > self.top or (self.exact and u < self.floor):
            return zero
        return self.coeffs[u]


def _chain_up(level, p, tf, zero):
    """y * level, computed down to target floor tf."""
    top = level.top + 1
    floor = max(tf, level.floor if level.exact else level.floor + 1)
    coeffs = {}
    for w in range(top, floor - 1, -1):
        below = level.get(w - 1, zero)
        here = level.get(w, zero)
        coeffs[w] = theta(below, -1) + apply_D(here, p)
    return _Chain(top, floor, level.exact, coeffs)


def _chain_down(level, p, tf, zero):
    """y^{-1} * level, computed down to target floor tf."""
    top = level.top - 1
    floor = tf if level.exact else max(tf, level.floor - 1)
    coeffs = {w: zero for w in range(top, floor - 1, -1)}
    all_terminated = True
    lo_src = max(level.floor, floor + 1)
    for u in range(lo_src, level.top + 1):
        g = level.coeffs[u]
        if g.is_zero:
            continue
        term = theta(g)
        budget = u - 1 - floor
        terminated = False
        for q in range(budget + 1):
            if term.is_zero:
                terminated = True
                break
            coeffs[u - 1 - q] = coeffs[u - 1 - q] + term
            term = -theta(apply_D(term, p))
        if not terminated and not term.is_zero:
            all_terminated = False
    return _Chain(top, floor, level.exact and all_terminated, coeffs)


def psido_mul(A, B, p, depth=None):
    """The product A*B, commuting powers of y through B step by step."""
    if not isinstance(A, PsiDO) or not isinstance(B, PsiDO):
        raise ShapeMismatch("psido_mul needs two series")
    if A.field is not B.field:
        raise ShapeMismatch("series over different fields")
    if p.field is not A.field:
        raise ShapeMismatch("params over a different field")
    A, B = PsiDO._common_d(A, B)
    field = A.field
    d = A.d
    K = DEFAULT_DEPTH if depth is None else depth
    zero = CrossedElem.zero(field, d)

    if A.is_zero or B.is_zero:
        return PsiDO.zero(field, d)

    floor, horizon = _product_floor(A, B, K)
    top = A.top + B.top

    powers = [A.top - j for j in range(len(A.coeffs)) if not A.coeffs[j].is_zero]
    amax = max(powers + [0])
    amin = min(powers + [0])

    chains = {0: _Chain(B.top, B.valid_to, B.exact_tail,
                        {B.top - j: B.coeffs[j] for j in range(len(B.coeffs))})}
    for a in range(1, amax + 1):
        chains[a] = _chain_up(chains[a - 1], p, floor - (amax - a), zero)
    for a in range(-1, amin - 1, -1):
        chains[a] = _chain_down(chains[a + 1], p, floor, zero)

    out = {u: zero for u in range(top, floor - 1, -1)}
    exact = A.exact_tail
    for a in powers:
        f_a = A.coeff(a)
        ch = chains[a]
        exact = exact and ch.exact
        for u in range(min(ch.top, top), floor - 1, -1):
            g = ch.get(u, zero)
            if not g.is_zero:
                out[u] = out[u] + crossed_mul(f_a, g)
    coeffs = [out[u] for u in range(top, floor - 1, -1)]
    return PsiDO(field, top, coeffs, exact_tail=exact)


# ---------------------------------------------------------------------------
# route 2: twisted derivations D_i = theta^{1-i} D theta^{i}

def _D_i(f, p, i):
    return theta(apply_D(theta(f, i), p), 1 - i)


def _expand_pos(n, g, p, budget):
    """Coefficients [A_1[0], ..., A_1[n]] of y^n g = sum A_1[q] y^{n-q}."""
    row = [theta(g, -n)]
    for i in range(n, 0, -1):
        nxt = [row[0]]
        for q in range(1, len(row) + 1):
            prev = row[q] if q < len(row) else None
            term = _D_i(row[q - 1], p, i)
            nxt.append(term if prev is None else prev + term)
        row = nxt
    return row[: budget + 1]


def _expand_neg(n, g, p, budget):
    """Terms of y^{-n} g = sum (-1)^q A_n[q] y^{-n-q} up to q = budget.

    Returns (coeff list, terminated) where terminated means some column of
    the triangular recursion vanished entirely, so the tail is exactly zero.
    """
    f = theta(g, n)
    rows = [[f] + [None] * budget for _ in range(n)]
    for q in range(1, budget + 1):
        rows[0][q] = _D_i(rows[0][q - 1], p, 1 - n)
    for j in range(1, n):
        for q in range(1, budget + 1):
            rows[j][q] = rows[j - 1][q] + _D_i(rows[j][q - 1], p, j + 1 - n)
    out = []
    terminated = False
    for q in range(budget + 1):
        if all(rows[j][q].is_zero for j in range(n)):
            terminated = True
            break
        c = rows[n - 1][q]
        out.append(c if q % 2 == 0 else -c)
    return out, terminated


def psido_mul_alt(A, B, p, depth=None):
    """Independent product via the triangular D_i recursion."""
    if not isinstance(A, PsiDO) or not isinstance(B, PsiDO):
        raise ShapeMismatch("psido_mul_alt needs two series")
    if A.field is not B.field:
        raise ShapeMismatch("series over different fields")
    if p.field is not A.field:
        raise ShapeMismatch("params over a different field")
    A, B = PsiDO._common_d(A, B)
    field = A.field
    d = A.d
    K = DEFAULT_DEPTH if depth is None else depth
    zero = CrossedElem.zero(field, d)

    if A.is_zero or B.is_zero:
        return PsiDO.zero(field, d)

    floor, horizon = _product_floor(A, B, K)
    top = A.top + B.top

    out = {u: zero for u in range(top, floor - 1, -1)}
    exact = A.exact_tail and B.exact_tail
    for ja, f_a in enumerate(A.coeffs):
        a = A.top - ja
        if f_a.is_zero:
            continue
        for jb, g_u in enumerate(B.coeffs):
            u = B.top - jb
            if g_u.is_zero:
                continue
            budget = a + u - floor
            if budget < 0:
                continue
            if a == 0:
                terms = [g_u]
            elif a > 0:
                terms = _expand_pos(a, g_u, p, budget)
            else:
                terms, terminated = _expand_neg(-a, g_u, p, budget)
                exact = exact and terminated
            for q, t in enumerate(terms):
                w = a + u - q
                if w < floor:
                    break
                if not t.is_zero:
                    out[w] = out[w] + crossed_mul(f_a, t)
    coeffs = [out[u] for u in range(top, floor - 1, -1)]
    return PsiDO(field, top, coeffs, exact_tail=exact)


# ---------------------------------------------------------------------------
# splitting, inversion, generators

def split(S):
    """S = S_minus + S_plus by sign of the y-degree."""
    field = S.field
    d = S.d
    if S.top < 0:
        return S, PsiDO.zero(field, d)
    n_plus = min(len(S.coeffs), S.top + 1)
    plus = PsiDO(field, S.top, list(S.coeffs[:n_plus]),
                 exact_tail=S.exact_tail or S.valid_to <= 0)
    if n_plus == len(S.coeffs):
        if not S.exact_tail:
            raise DepthExhausted(
                "no trustworthy negative-degree coefficients to split off")
        minus = PsiDO.zero(field, d)
    else:
        minus = PsiDO(field, -1, list(S.coeffs[n_plus:]), exact_tail=S.exact_tail)
    return minus, plus


def invert_unitriangular(M, p, depth=None):
    """Invert M = 1 + (strictly negative degrees) by the geometric series."""
    if not isinstance(M, PsiDO):
        raise ShapeMismatch("need a series")
    field = M.field
    d = M.d
    K = DEFAULT_DEPTH if depth is None else depth
    if M.top != 0 or M.coeffs[0] != CrossedElem.one(field, d):
        raise NotUnitriangular("leading term must be 1*y^0")
    T = M - PsiDO.one(field, d)
    if T.is_zero:
        return PsiDO.one(field, d)
    if T.top >= 0:
        raise NotUnitriangular("lower-order part must have negative degrees only")
    floor = -K if M.exact_tail else max(-K, M.valid_to)
    terms = [PsiDO.one(field, d)]
    P = PsiDO.one(field, d)
    terminated = False
    while T.top + P.top >= floor:
        P = psido_mul(-T, P, p, depth=T.top + P.top - floor)
        if P.is_zero:
            terminated = True
            break
        terms.append(P)
    zero = CrossedElem.zero(field, d)
    out = []
    for u in range(0, floor - 1, -1):
        acc = zero
        for t in terms:
            if u <= t.top and (t.exact_tail or u >= t.valid_to):
                acc = acc + t.coeff(u)
        out.append(acc)
    exact = terminated and all(t.exact_tail for t in terms)
    return PsiDO(field, 0, out, exact_tail=exact)


def dunkl_y(p):
    """The degree-one generator y as a series (the formal symbol)."""
    return PsiDO.y_power(p.field, 1)


def dunkl_realisation(p):
    """Documentation view of y as tau*d/dx - (1/x) sum_i m k_i e_i.

    Returns (tau, zero_order) where zero_order is the multiplication part;
    ring arithmetic never uses this, only the commutation rule.
    """
    field = p.field
    acc = CrossedElem.zero(field)
    inv_x = field.rf_one / field.x
    for i in range(p.m):
        acc = acc + idempotent(field, i).scale(field.scalar(p.m) * p.k[i])
    zero_order = -(CrossedElem.from_rf(field, inv_x) * acc)
    return p.tau, zero_order


def constraint_f0(L):
    """True iff the identity-group component of every diagonal entry of the
    degree-zero coefficient vanishes (leading term must be scalar 1)."""
    f0 = L.coeff(0)
    return f0.e_component_diag_zero()


class PsiRing:
    """Convenience handle binding params and a working depth.

    Keeps call sites readable: R.mul(A, B, C), R.inv(M), R.commutator(A, B)
    instead of threading the same params and depth everywhere.
    """

    __slots__ = ("params", "field", "depth", "_mul")

    def __init__(self, params, depth=DEFAULT_DEPTH, mul=psido_mul):
        self.params = params
        self.field = params.field
        self.depth = depth
        self._mul = mul

    def mul(self, *factors, depth=None):
        K = self.depth if depth is None else depth
        factors = [f if isinstance(f, PsiDO) else PsiDO.from_crossed(f)
                   for f in factors]
        acc = factors[0]
        for f in factors[1:]:
            acc = self._mul(acc, f, self.params, depth=K)
        return acc

    def power(self, A, n, depth=None):
        K = self.depth if depth is None else depth
        acc = PsiDO.one(self.field, A.d)
        for _ in range(n):
            acc = self._mul(acc, A, self.params, depth=K)
        return acc

    def inv(self, M, depth=None):
        return invert_unitriangular(M, self.params,
                                    self.depth if depth is None else depth)

    def commutator(self, A, B, depth=None):
        return self.mul(A, B, depth=depth) - self.mul(B, A, depth=depth)

    def one(self, d=1):
        return PsiDO.one(self.field, d)

    def zero(self, d=1):
        return PsiDO.zero(self.field, d)

    def y(self, n=1, d=1):
        return PsiDO.y_power(self.field, n, d)
