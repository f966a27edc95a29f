"""The crossed product C(x) * Z_m and its Dunkl data.

Elements are sums sum_i a_i(x) s^i where s is the cyclic generator acting
by s x s^{-1} = mu^{-1} x (mu a primitive m-th root of unity) and the
a_i are d x d matrices of rational functions; d = 1 is the scalar case
and d > 1 carries the multicomponent framing indices.

The three structural maps used by the pseudodifferential layer all live
here:

* theta, the grading automorphism a_i s^i -> mu^i a_i s^i,
* apply_D, the degree-lowering derivation
      D(f) = tau f' - sum_{j != 0} c_j x^{-1} [s^j, f],
* the idempotents e_i = (1/m) sum_r mu^{-ir} s^r.

Commuting y across a coefficient is then y f = theta^{-1}(f) y + D(f).
"""

from __future__ import annotations

from cyckp import matutil as MU
from cyckp.errors import ShapeMismatch

__all__ = [
    "CrossedElem",
    "Params",
    "crossed_mul",
    "theta",
    "apply_D",
    "idempotent",
    "params_from_tau_k",
    "params_from_lambda",
    "params_from_cm_c",
    "is_regular",
]


class CrossedElem:
    """sum_i a_i(x) s^i with matrix coefficients over one field."""

    __slots__ = ("field", "m", "d", "comps")

    def __init__(self, field, comps, d=None):
        self.field = field
        self.m = field.m
        comps = tuple(MU.mat(c) for c in comps)
        if len(comps) != self.m:
            raise ShapeMismatch(f"need {self.m} group components, got {len(comps)}")
        dd = d if d is not None else len(comps[0])
        for c in comps:
            if MU.mat_shape(c) != (dd, dd):
                raise ShapeMismatch("component matrices must all be d x d")
        self.comps = comps
        self.d = dd

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, field, d=1):
        z = field.rf_zero
        return cls(field, [MU.mat_fill(d, d, z) for _ in range(field.m)], d)

    @classmethod
    def one(cls, field, d=1):
        comps = [MU.mat_fill(d, d, field.rf_zero) for _ in range(field.m)]
        comps[0] = MU.mat_identity(d, field.rf_one, field.rf_zero)
        return cls(field, comps, d)

    @classmethod
    def from_rf(cls, field, rf, power=0, d=1):
        """rf(x) * s^power, rf broadcast on the diagonal for d > 1."""
        rf = field.coerce_rf(rf)
        comps = [MU.mat_fill(d, d, field.rf_zero) for _ in range(field.m)]
        comps[power % field.m] = tuple(
            tuple(rf if i == j else field.rf_zero for j in range(d)) for i in range(d)
        )
        return cls(field, comps, d)

    @classmethod
    def from_matrix(cls, field, matrix, power=0):
        """A d x d matrix of rational functions times s^power."""
        matrix = MU.mat(matrix)
        d = len(matrix)
        matrix = MU.mat_map(field.coerce_rf, matrix)
        comps = [MU.mat_fill(d, d, field.rf_zero) for _ in range(field.m)]
        comps[power % field.m] = matrix
        return cls(field, comps, d)

    @classmethod
    def x(cls, field, d=1):
        return cls.from_rf(field, field.x, 0, d)

    @classmethod
    def s(cls, field, power=1, d=1):
        return cls.from_rf(field, field.rf_one, power, d)

    # -- queries ---------------------------------------------------------------

    @property
    def is_zero(self):
        return all(MU.mat_is_zero(c) for c in self.comps)

    def __bool__(self):
        return not self.is_zero

    def comp(self, j):
        return self.comps[j % self.m]

    def e_component_diag_zero(self):
        """True iff every diagonal entry of the s^0 component vanishes."""
        c0 = self.comps[0]
        return all(c0[i][i].is_zero for i in range(self.d))

    def entry(self, a, b):
        """The (a, b) matrix entry as a scalar (d=1-style) crossed element."""
        return CrossedElem(self.field, [((c[a][b],),) for c in self.comps], 1)

    # -- shape plumbing ---------------------------------------------------------

    def _mate(self, other):
        if isinstance(other, CrossedElem):
            if other.field is not self.field:
                raise ShapeMismatch("crossed elements over different fields")
            return other
        try:
            rf = self.field.coerce_rf(other)
        except (TypeError, ShapeMismatch):
            return NotImplemented
        return CrossedElem.from_rf(self.field, rf, 0, 1)

    def broadcast(self, d):
        """Promote a scalar (d=1) element to diagonal d x d."""
        if self.d == d:
            return self
        if self.d != 1:
            raise ShapeMismatch(f"cannot broadcast d={self.d} to d={d}")
        z = self.field.rf_zero
        comps = []
        for c in self.comps:
            e = c[0][0]
            comps.append(tuple(tuple(e if i == j else z for j in range(d)) for i in range(d)))
        return CrossedElem(self.field, comps, d)

    @staticmethod
    def _common_d(a, b):
        if a.d == b.d:
            return a, b
        if a.d == 1:
            return a.broadcast(b.d), b
        if b.d == 1:
            return a, b.broadcast(a.d)
        raise ShapeMismatch(f"component sizes {a.d} and {b.d} differ")

    # -- arithmetic --------------------------------------------------------------

    def __add__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        a, b = CrossedElem._common_d(self, o)
        return CrossedElem(
            a.field, [MU.mat_add(x, y) for x, y in zip(a.comps, b.comps)], a.d
        )

    __radd__ = __add__

    def __sub__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        a, b = CrossedElem._common_d(self, o)
        return CrossedElem(
            a.field, [MU.mat_sub(x, y) for x, y in zip(a.comps, b.comps)], a.d
        )

    def __rsub__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return o.__sub__(self)

    def __neg__(self):
        return CrossedElem(self.field, [MU.mat_neg(c) for c in self.comps], self.d)

    def __mul__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return crossed_mul(self, o)

    def __rmul__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        return crossed_mul(o, self)

    def scale(self, s):
        """Multiply by a central scalar."""
        s = self.field.scalar(s)
        return CrossedElem(
            self.field, [MU.mat_scale(c, s) for c in self.comps], self.d
        )

    def __eq__(self, other):
        o = self._mate(other)
        if o is NotImplemented:
            return NotImplemented
        if self.d != o.d:
            try:
                a, b = CrossedElem._common_d(self, o)
            except ShapeMismatch:
                return False
            return a == b
        return all(MU.mat_eq(x, y) for x, y in zip(self.comps, o.comps))

    def __hash__(self):
        return hash((self.m, self.d, self.comps))

    # -- structural maps -----------------------------------------------------------

    def arg_scale(self, s):
        """Substitute x -> s*x in every coefficient."""
        return CrossedElem(
            self.field,
            [MU.mat_map(lambda e: e.scale_arg(s), c) for c in self.comps],
            self.d,
        )

    def theta(self, power=1):
        return theta(self, power)

    def __str__(self):
        parts = []
        for i, c in enumerate(self.comps):
            if MU.mat_is_zero(c):
                continue
            if self.d == 1:
                body = str(c[0][0])
                if ("+" in body[1:]) or ("-" in body[1:]) or "/" in body:
                    body = f"({body})"
            else:
                body = "[" + "; ".join(", ".join(str(e) for e in r) for r in c) + "]"
            if i == 0:
                parts.append(body)
            elif body == "1":
                parts.append("s" if i == 1 else f"s^{i}")
            else:
                parts.append(f"{body}*s" if i == 1 else f"{body}*s^{i}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"<CrossedElem {self}>"


def crossed_mul(A, B):
    """Product in C(x) * Z_m: (a s^i)(b s^j) = a * b(mu^{-i} x) s^{i+j}."""
    if not isinstance(A, CrossedElem) or not isinstance(B, CrossedElem):
        raise ShapeMismatch("crossed_mul needs two crossed elements")
    if A.field is not B.field:
        raise ShapeMismatch("crossed elements over different fields")
    A, B = CrossedElem._common_d(A, B)
    field = A.field
    m = A.m
    d = A.d
    z = field.rf_zero
    out = [MU.mat_fill(d, d, z) for _ in range(m)]
    for i, ai in enumerate(A.comps):
        if MU.mat_is_zero(ai):
            continue
        mu_i = field.root(-i)
        for j, bj in enumerate(B.comps):
            if MU.mat_is_zero(bj):
                continue
            shifted = MU.mat_map(lambda e: e.scale_arg(mu_i), bj)
            u = (i + j) % m
            out[u] = MU.mat_add(out[u], MU.mat_mul(ai, shifted))
    return CrossedElem(field, out, d)


def theta(f, power=1):
    """The grading automorphism: a_i s^i picks up mu^{i*power}."""
    field = f.field
    comps = [f.comps[0]]
    for i in range(1, f.m):
        comps.append(MU.mat_scale(f.comps[i], field.root(i * power)))
    return CrossedElem(field, comps, f.d)


def apply_D(f, p):
    """The derivation D(f) = tau f' - sum_{j!=0} c_j x^{-1} [s^j, f].

    Componentwise: D(f)_u = tau a_u' - sum_{j!=0} c_j (a_{u-j}(mu^{-j} x)
    - a_{u-j}(x)) / x.  Lowers x-degree by one on polynomials, which is
    what makes the negative-power commutation series terminate there.
    """
    field = f.field
    if p.field is not field:
        raise ShapeMismatch("params and element live over different fields")
    m = f.m
    inv_x = field.rf_one / field.x
    tau = p.tau
    out = []
    for u in range(m):
        mat = MU.mat_map(lambda e: tau * e.diff(), f.comps[u])
        for j in range(1, m):
            a = f.comps[(u - j) % m]
            if MU.mat_is_zero(a):
                continue
            cj = p.c_gamma[j]
            if cj.is_zero:
                continue
            mu_j = field.root(-j)
            jump = MU.mat_map(lambda e: (e.scale_arg(mu_j) - e) * inv_x, a)
            mat = MU.mat_sub(mat, MU.mat_scale(jump, cj))
        out.append(mat)
    return CrossedElem(field, out, f.d)


def idempotent(field_or_params, i, d=1):
    """e_i = (1/m) sum_r mu^{-ir} s^r, optionally broadcast to d x d."""
    field = getattr(field_or_params, "field", field_or_params)
    m = field.m
    inv_m = field.scalar(1) / field.scalar(m)
    comps = []
    for r in range(m):
        coeff = field.rf_const(inv_m * field.root(-i * r))
        comps.append(
            tuple(
                tuple(coeff if a == b else field.rf_zero for b in range(d))
                for a in range(d)
            )
        )
    return CrossedElem(field, comps, d)


# ---------------------------------------------------------------------------
# parameters

class Params:
    """All equivalent parameter dictionaries of the deformation.

    tau, k  -- the Dunkl normalization: y = tau d/dx - (1/x) sum m k_i e_i
    lam     -- commutator spectrum: x y - y x = sum lam_i e_i,
               lam_i = m (k_{i-1} - k_i) - tau, sum lam_i = -m tau
    c_gamma -- group-component coefficients c_{s^j} = sum_i mu^{-ij} k_i
               (j = 0 entry is c_e, never used by D)
    c00, c_wreath -- the wreath-model coupling constants: c00 = -|lam|/m,
               c_r = (1/m) sum_i mu^{ir} hat(lam)_i with hat(lam)_0 =
               lam_0 - |lam|
    kappa   -- normalized cyclic weights, sum kappa_l = 0, entering the
               one-particle term of the wreath Dunkl operators
    """

    __slots__ = ("field", "m", "tau", "k", "lam", "c_gamma", "c00", "c_wreath", "kappa")

    def __init__(self, field, tau, k, lam, c_gamma, c00, c_wreath, kappa):
        self.field = field
        self.m = field.m
        self.tau = tau
        self.k = tuple(k)
        self.lam = tuple(lam)
        self.c_gamma = tuple(c_gamma)
        self.c00 = c00
        self.c_wreath = tuple(c_wreath)
        self.kappa = tuple(kappa)

    @property
    def lambda_total(self):
        total = self.field.zero
        for l in self.lam:
            total = total + l
        return total

    def lambda_inf(self, alpha):
        """-lam . alpha for a dimension vector alpha."""
        acc = self.field.zero
        for l, a in zip(self.lam, alpha):
            acc = acc - l * a
        return acc

    @property
    def spherical_shift(self):
        """a = -sum_r ((m-r)/m) lam_r, the zero-point of the spherical slice."""
        m = self.m
        acc = self.field.zero
        for r in range(m):
            acc = acc - self.field.scalar(f"{m - r}/{m}") * self.lam[r]
        return acc

    def is_regular(self, alpha=None, window=None):
        ok, _ = is_regular(self, alpha, window)
        return ok

    def to_field(self, field):
        """Rebuild the parameter pack over another field (e.g. a dual field)."""
        if field is self.field:
            return self
        lift = field.lift
        return Params(
            field,
            lift(self.tau),
            [lift(v) for v in self.k],
            [lift(v) for v in self.lam],
            [lift(v) for v in self.c_gamma],
            lift(self.c00),
            [lift(v) for v in self.c_wreath],
            [lift(v) for v in self.kappa],
        )

    def __repr__(self):
        lam = ", ".join(str(l) for l in self.lam)
        return f"<Params m={self.m} tau={self.tau} lambda=({lam})>"


def _complete_from_tau_k(field, tau, k):
    m = field.m
    lam = []
    for i in range(m):
        lam.append(field.scalar(m) * (k[(i - 1) % m] - k[i]) - tau)
    c_gamma = []
    for j in range(m):
        acc = field.zero
        for i in range(m):
            acc = acc + field.root(-i * j) * k[i]
        c_gamma.append(acc)
    total = field.zero
    for l in lam:
        total = total + l
    c00 = -total / field.scalar(m)
    lam_hat = [lam[0] - total] + list(lam[1:])
    c_wreath = []
    inv_m = field.scalar(1) / field.scalar(m)
    for r in range(1, m):
        acc = field.zero
        for i in range(m):
            acc = acc + field.root(i * r) * lam_hat[i]
        c_wreath.append(inv_m * acc)
    # kappa: kappa_{m-1} = sum_{r>=1} ((m-r)/m^2) lam_r, then the cyclic
    # recursion kappa_l = kappa_{l-1} + lam_{m-l}/m closes with sum = 0
    kappa_last = field.zero
    for r in range(1, m):
        kappa_last = kappa_last + field.scalar(f"{m - r}/{m * m}") * lam[r]
    kappa = [field.zero] * m
    kappa[m - 1] = kappa_last
    if m > 1:
        kappa[0] = kappa_last + (lam[0] - total) / field.scalar(m)
        for l in range(1, m - 1):
            kappa[l] = kappa[l - 1] + lam[m - l] / field.scalar(m)
    check = field.zero
    for v in kappa:
        check = check + v
    if not check.is_zero:
        raise ArithmeticError("kappa normalization failed to sum to zero")
    return Params(field, tau, tuple(k), tuple(lam), tuple(c_gamma), c00, tuple(c_wreath), tuple(kappa))


def params_from_tau_k(m, tau, k, field=None, exact=True):
    """Build the parameter pack from (tau, k_0..k_{m-1})."""
    from cyckp.scalars import CycField

    field = field or CycField(m, exact=exact)
    if len(k) != m:
        raise ShapeMismatch(f"need {m} values of k")
    tau = field.scalar(tau)
    k = [field.scalar(v) for v in k]
    return _complete_from_tau_k(field, tau, k)


def params_from_lambda(m, lam, field=None, exact=True):
    """Build the parameter pack from the commutator spectrum lambda."""
    from cyckp.scalars import CycField

    field = field or CycField(m, exact=exact)
    if len(lam) != m:
        raise ShapeMismatch(f"need {m} values of lambda")
    lam = [field.scalar(v) for v in lam]
    total = field.zero
    for l in lam:
        total = total + l
    tau = -total / field.scalar(m)
    k = [field.zero]
    for i in range(1, m):
        k.append(k[i - 1] - (lam[i] + tau) / field.scalar(m))
    p = _complete_from_tau_k(field, tau, k)
    for a, b in zip(p.lam, lam):
        if a != b:
            raise ArithmeticError("lambda reconstruction mismatch")
    return p


def params_from_cm_c(m, c00, c, field=None, exact=True):
    """Build the parameter pack from the wreath couplings (c00, c_1..c_{m-1})."""
    from cyckp.scalars import CycField

    field = field or CycField(m, exact=exact)
    if len(c) != m - 1:
        raise ShapeMismatch(f"need {m - 1} values of c beyond c00")
    c00 = field.scalar(c00)
    c = [field.scalar(v) for v in c]
    lam0 = -field.scalar(m) * c00
    for cl in c:
        lam0 = lam0 + cl
    lam = [lam0]
    for i in range(1, m):
        acc = field.zero
        for l, cl in enumerate(c, start=1):
            acc = acc + cl * field.root(-i * l)
        lam.append(acc)
    p = params_from_lambda(m, lam, field=field)
    if p.c00 != c00 or any(a != b for a, b in zip(p.c_wreath, c)):
        raise ArithmeticError("wreath coupling round-trip mismatch")
    return p


def _as_integer(scalar):
    """Return the Python int a field scalar equals, or None."""
    field = scalar.field
    if not field.is_exact:
        z = scalar.to_complex()
        n = round(z.real)
        return n if abs(z - n) < 1e-9 else None
    raw = scalar.raw
    if isinstance(raw, tuple):
        if any(raw[i] != 0 for i in range(1, len(raw))):
            return None
        raw = raw[0]
    num, den = raw.numerator, raw.denominator
    return int(num) if den == 1 else None


def is_regular(p, alpha=None, window=None):
    """Check the root-theoretic regularity of lambda.

    lambda is regular when |lambda| != 0 and no integer n satisfies
    n |lambda| = lam_i + ... + lam_{j-1} for a consecutive segment with
    1 <= i < j <= m.  The ratio test is exact, so every integer n is
    covered at once; `window` (default 2 sum(alpha)) only bounds which
    witnesses are reported, matching the documented scan.
    Returns (bool, witness) where witness is ('delta',) or (n, i, j).
    """
    total = p.lambda_total
    if total.is_zero:
        return False, ("delta",)
    m = p.m
    if window is None:
        window = 2 * sum(alpha) if alpha else 2 * m
    for i in range(1, m):
        seg = p.field.zero
        for j in range(i + 1, m + 1):
            seg = seg + p.lam[j - 1]
            n = _as_integer(seg / total)
            if n is not None:
                return False, (n, i, j)
    return True, None
