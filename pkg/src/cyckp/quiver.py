"""Moment-map data on the cyclic quiver and its Darboux slices.

A point consists of cyclic-arrow blocks X_i: V_i -> V_{i+1}, Y_i:
V_{i+1} -> V_i and framing blocks v_i: W -> V_i, w_i: V_i -> W (all
indices mod m).  The moment map condition reads, vertex by vertex,

    Y_i X_i - X_{i-1} Y_{i-1} - v_i w_i = lam_i * Id.

Four framings are supported through one implementation: `full` hangs a
one-dimensional W off every vertex, `spherical` off a single vertex ell,
and the `_d` variants thicken W to d dimensions.  Balanced dimension
vectors alpha = n*delta admit a canonical slice where the composite
X = X_{m-1}...X_0 is diagonal with distinct m-th-power-free eigenvalues;
the slice map from Darboux coordinates (nu, mu, phi, psi) builds the
blocks by residue formulas, and every identity about it is checked
exactly over the cyclotomic field.
"""

from __future__ import annotations

import random as _random

from cyckp import matutil as MU
from cyckp.errors import DegeneratePoint, ShapeMismatch, SingularMatrix

__all__ = [
    "Framing",
    "CMPoint",
    "DarbouxPoint",
    "check_moment_map",
    "dimension",
    "slice_from_darboux",
    "gauge_act",
    "random_point",
    "big_matrices",
]


class Framing:
    """Which vertices carry framing arrows, and how thick they are.

    kind: one of "full", "spherical", "full_d", "spherical_d";
    ell: the framed vertex for the spherical kinds (0 <= ell < m);
    d: the framing dimension for the _d kinds (d >= 1, forced to 1 otherwise).
    """

    __slots__ = ("kind", "ell", "d")

    KINDS = ("full", "spherical", "full_d", "spherical_d")

    def __init__(self, kind, ell=0, d=1):
        if kind not in self.KINDS:
            raise ShapeMismatch(f"unknown framing kind {kind!r}")
        if d < 1:
            raise ShapeMismatch("framing dimension must be at least 1")
        if kind in ("full", "spherical"):
            d = 1
        self.kind = kind
        self.ell = ell
        self.d = d

    @property
    def spherical(self):
        return self.kind in ("spherical", "spherical_d")

    def weights(self, m):
        """Per-vertex framing multiplicities (a_0, ..., a_{m-1})."""
        if self.ell < 0 or self.ell >= m:
            raise ShapeMismatch(f"framed vertex {self.ell} out of range for m={m}")
        if self.spherical:
            return tuple(self.d if i == self.ell else 0 for i in range(m))
        return (self.d,) * m

    def __repr__(self):
        if self.spherical:
            return f"Framing({self.kind!r}, ell={self.ell}, d={self.d})"
        return f"Framing({self.kind!r}, d={self.d})"

    def __eq__(self, other):
        return (isinstance(other, Framing) and self.kind == other.kind
                and self.ell == other.ell and self.d == other.d)


class CMPoint:
    """Raw block data (X_i, Y_i, v_i, w_i) over a cyclotomic field.

    X[i] has shape alpha_{i+1} x alpha_i, Y[i] alpha_i x alpha_{i+1},
    v[i] alpha_i x a_i, w[i] a_i x alpha_i where a_i are the framing
    weights.  Vertices with a_i = 0 store empty blocks.
    """

    __slots__ = ("field", "m", "alpha", "framing", "X", "Y", "v", "w")

    def __init__(self, field, alpha, framing, X, Y, v, w):
        m = field.m
        if len(alpha) != m:
            raise ShapeMismatch(f"need {m} dimension entries")
        self.field = field
        self.m = m
        self.alpha = tuple(int(a) for a in alpha)
        self.framing = framing
        wts = framing.weights(m)
        X = [MU.mat(b) for b in X]
        Y = [MU.mat(b) for b in Y]
        v = [MU.mat(b) for b in v]
        w = [MU.mat(b) for b in w]
        if not (len(X) == len(Y) == len(v) == len(w) == m):
            raise ShapeMismatch("need one block per vertex")
        for i in range(m):
            ai, aj = self.alpha[i], self.alpha[(i + 1) % m]
            if not MU.mat_shape_ok(X[i], aj, ai):
                raise ShapeMismatch(f"X[{i}] must be {aj}x{ai}")
            if not MU.mat_shape_ok(Y[i], ai, aj):
                raise ShapeMismatch(f"Y[{i}] must be {ai}x{aj}")
            if not MU.mat_shape_ok(v[i], ai, wts[i]):
                raise ShapeMismatch(f"v[{i}] must be {ai}x{wts[i]}")
            if not MU.mat_shape_ok(w[i], wts[i], ai):
                raise ShapeMismatch(f"w[{i}] must be {wts[i]}x{ai}")
        self.X = tuple(X)
        self.Y = tuple(Y)
        self.v = tuple(v)
        self.w = tuple(w)

    @property
    def weights(self):
        return self.framing.weights(self.m)

    def map_entries(self, fn):
        g = lambda b: MU.mat_map(fn, b)
        return CMPoint(self.field, self.alpha, self.framing,
                       [g(b) for b in self.X], [g(b) for b in self.Y],
                       [g(b) for b in self.v], [g(b) for b in self.w])

    def to_field(self, field):
        if field is self.field:
            return self
        g = lambda b: MU.mat_map(field.lift, b)
        return CMPoint(field, self.alpha, self.framing,
                       [g(b) for b in self.X], [g(b) for b in self.Y],
                       [g(b) for b in self.v], [g(b) for b in self.w])

    def __repr__(self):
        return (f"<CMPoint m={self.m} alpha={self.alpha} "
                f"framing={self.framing!r}>")


class DarbouxPoint:
    """Canonical coordinates on a slice: positions nu, momenta mu, and
    spin columns phi_j (d x m) / rows psi_j (m x d).

    Constraints: nu_j != 0, the nu_j^m pairwise distinct, and
    tr(phi_j psi_j) = -|lambda| for every particle.
    """

    __slots__ = ("field", "m", "n", "d", "nu", "mu", "phi", "psi")

    def __init__(self, field, nu, mu, phi, psi, d=1):
        self.field = field
        self.m = field.m
        self.n = len(nu)
        self.d = d
        if len(mu) != self.n or len(phi) != self.n or len(psi) != self.n:
            raise ShapeMismatch("nu, mu, phi, psi must have one entry per particle")
        self.nu = tuple(field.scalar(v) for v in nu)
        self.mu = tuple(field.scalar(v) for v in mu)
        phi = [MU.mat_map(field.scalar, MU.mat(pj)) for pj in phi]
        psi = [MU.mat_map(field.scalar, MU.mat(pj)) for pj in psi]
        for j in range(self.n):
            if MU.mat_shape(phi[j]) != (d, self.m):
                raise ShapeMismatch(f"phi[{j}] must be {d}x{self.m}")
            if MU.mat_shape(psi[j]) != (self.m, d):
                raise ShapeMismatch(f"psi[{j}] must be {self.m}x{d}")
        self.phi = tuple(phi)
        self.psi = tuple(psi)

    def check_distinct(self):
        """Positions must be nonzero with pairwise distinct m-th powers."""
        field = self.field
        powered = []
        for v in self.nu:
            if v.is_zero:
                raise DegeneratePoint("a position vanishes")
            powered.append(v ** self.m)
        for a in range(self.n):
            for b in range(a + 1, self.n):
                if powered[a] == powered[b]:
                    raise DegeneratePoint(
                        f"positions {a} and {b} collide up to a root of unity")

    def spin_products(self):
        """psi_j phi_j (m x m) for each particle."""
        return [MU.mat_mul(self.psi[j], self.phi[j]) for j in range(self.n)]

    def to_field(self, field):
        if field is self.field:
            return self
        lift = field.lift
        return DarbouxPoint(
            field,
            [lift(v) for v in self.nu],
            [lift(v) for v in self.mu],
            [MU.mat_map(lift, pj) for pj in self.phi],
            [MU.mat_map(lift, pj) for pj in self.psi],
            self.d,
        )

    def __repr__(self):
        return f"<DarbouxPoint m={self.m} n={self.n} d={self.d}>"


# ---------------------------------------------------------------------------
# moment map

def check_moment_map(point, params):
    """Per-vertex residuals Y_i X_i - X_{i-1} Y_{i-1} - v_i w_i - lam_i.

    Returns (ok, residuals) with residuals a list of alpha_i x alpha_i
    matrices; also verifies the scalar identity sum_i tr(w_i v_i) =
    -lam . alpha forced by taking traces.
    """
    field = point.field
    if params.field is not field:
        params = params.to_field(field)
    m = point.m
    residuals = []
    ok = True
    zero = field.zero
    for i in range(m):
        ai = point.alpha[i]
        yx = MU.mat_mul_z(point.Y[i], point.X[i], zero)
        xy = MU.mat_mul_z(point.X[(i - 1) % m], point.Y[(i - 1) % m], zero)
        vw = MU.mat_mul_z(point.v[i], point.w[i], zero, cols=ai)
        res = MU.mat_sub(MU.mat_sub(yx, xy), vw)
        lam = params.lam[i]
        res = tuple(
            tuple(res[a][b] - lam if a == b else res[a][b] for b in range(ai))
            for a in range(ai)
        )
        residuals.append(res)
        if not MU.mat_is_zero(res):
            ok = False
    if ok:
        wts = point.weights
        total = zero
        for i in range(m):
            wv = MU.mat_mul_z(point.w[i], point.v[i], zero, cols=wts[i])
            total = total + MU.mat_trace(wv, zero)
        if total != params.lambda_inf(point.alpha):
            ok = False
    return ok, residuals


def dimension(m, alpha, framing):
    """Dimension of the moment-map quotient for this framing.

    2 * (framing weight) . alpha - sum_i (alpha_i - alpha_{i+1})^2.
    """
    wts = framing.weights(m)
    lin = 2 * sum(w * a for w, a in zip(wts, alpha))
    quad = sum((alpha[i] - alpha[(i + 1) % m]) ** 2 for i in range(m))
    return lin - quad


# ---------------------------------------------------------------------------
# the canonical slice

def _vertex_framing(darboux, framing):
    """Framing blocks (v_i, w_i) in the slice basis.

    In the slice, V_i has the particle index j = 1..n as its basis; the
    spin data fills v_i with phi columns and w_i with psi rows:
    (v_i)[j, a] = phi_j[a, i], (w_i)[a, j] = psi_j[i, a] at every framed
    vertex i (all vertices for full kinds, only ell for spherical ones).
    """
    field = darboux.field
    m, n, d = darboux.m, darboux.n, darboux.d
    wts = framing.weights(m)
    v = []
    w = []
    for i in range(m):
        if wts[i] == 0:
            v.append(MU.mat_fill(n, 0, field.zero))
            w.append(MU.mat_fill(0, n, field.zero))
        else:
            v.append(tuple(tuple(darboux.phi[j][a][i] for a in range(d))
                           for j in range(n)))
            w.append(tuple(tuple(darboux.psi[j][i][a] for j in range(n))
                           for a in range(d)))
    return v, w


def slice_from_darboux(darboux, params, framing=None, check=True):
    """Build the slice point with X_i = diag(nu) and Y_i by residues.

    Diagonal entries:
        (Y_i)_jj = mu_j + (1/nu_j) * (sum_{r<=i} A_r - sum_r ((m-r)/m) A_r),
        A_r = lam_r + (psi_j phi_j)_rr,
    which needs tr(psi_j phi_j) = -|lambda| so that the m diagonal values
    sum to m*mu_j.  Off-diagonal entries:
        (Y_i)_jk = -sum_l b^{(jk)}_{i-l} nu_j^l nu_k^{m-l-1} / (nu_j^m - nu_k^m),
        b^{(jk)}_r = (psi_k phi_j)_rr.

    check=False skips the trace constraint: derivatives of the slice map
    in unconstrained spin directions are legitimate (the map itself makes
    sense off the constraint, it just lands off the moment locus).
    """
    field = darboux.field
    if params.field is not field:
        params = params.to_field(field)
    m, n, d = darboux.m, darboux.n, darboux.d
    if framing is None:
        framing = Framing("full_d" if d > 1 else "full")
    if framing.d != d:
        raise ShapeMismatch("framing dimension disagrees with the spin data")
    if framing.spherical:
        ell = framing.ell
        for j in range(n):
            for a in range(d):
                for i in range(m):
                    if i != ell and not (darboux.phi[j][a][i].is_zero
                                         and darboux.psi[j][i][a].is_zero):
                        raise ShapeMismatch(
                            "spherical slices need the spin data concentrated "
                            f"at vertex {ell}")
    darboux.check_distinct()

    spins = darboux.spin_products()
    lam_total = params.lambda_total
    if check:
        for j in range(n):
            tr = MU.mat_trace(spins[j], field.zero)
            if tr != -lam_total:
                raise DegeneratePoint(
                    f"particle {j}: tr(psi phi) = {tr} but -|lambda| = {-lam_total}")

    nu = darboux.nu
    mu = darboux.mu
    numpow = [[field.one] for _ in range(n)]
    for j in range(n):
        for _ in range(m):
            numpow[j].append(numpow[j][-1] * nu[j])

    X = [tuple(tuple(nu[j] if j == k else field.zero for k in range(n))
               for j in range(n)) for _ in range(m)]
    Y = []
    for i in range(m):
        rows = []
        for j in range(n):
            row = []
            for k in range(n):
                if j == k:
                    acc = field.zero
                    for r in range(i + 1):
                        acc = acc + params.lam[r] + spins[j][r][r]
                    shift = field.zero
                    for r in range(m):
                        shift = shift + field.scalar(f"{m - r}/{m}") * (
                            params.lam[r] + spins[j][r][r])
                    row.append(mu[j] + (acc - shift) / nu[j])
                else:
                    bden = numpow[j][m] - numpow[k][m]
                    acc = field.zero
                    spin_kj = MU.mat_mul(darboux.psi[k], darboux.phi[j])
                    for l in range(m):
                        b = spin_kj[(i - l) % m][(i - l) % m]
                        acc = acc + b * numpow[j][l] * numpow[k][m - l - 1]
                    row.append(-acc / bden)
            rows.append(tuple(row))
        Y.append(tuple(rows))

    v, w = _vertex_framing(darboux, framing)
    alpha = (n,) * m
    point = CMPoint(field, alpha, framing, X, Y, v, w)
    if check:
        ok, residuals = check_moment_map(point, params)
        if not ok:
            raise DegeneratePoint("slice data violates the moment map")
    return point


# ---------------------------------------------------------------------------
# gauge action

def scalar_matrix_inverse(field, mat):
    """Gauss-Jordan inverse of a square matrix of field scalars."""
    n = len(mat)
    if n == 0:
        return ()
    aug = [list(row) + [field.one if i == j else field.zero
                        for j in range(n)]
           for i, row in enumerate(mat)]
    for c in range(n):
        piv = None
        for r in range(c, n):
            e = aug[r][c]
            ok = getattr(e, "is_invertible", None)
            if ok is None:
                ok = not e.is_zero
            if ok:
                piv = r
                break
        if piv is None:
            raise SingularMatrix("gauge block is not invertible")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = aug[c][c].inv()
        aug[c] = [e * inv for e in aug[c]]
        for r in range(n):
            if r != c:
                f = aug[r][c]
                if not f.is_zero:
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[c])]
    return tuple(tuple(row[n:]) for row in aug)


def promote_framing(point):
    """The same point with every vertex framed: spherical data is padded
    with zero columns/rows of the framing width.  The dressing series of
    the promoted point is identical, but flows that leave the spherical
    locus have well-shaped tangents on it."""
    fr = point.framing
    if fr.kind == "full" or fr.kind == "full_d":
        return point
    field = point.field
    m = point.m
    d = fr.d
    new = Framing("full") if d == 1 else Framing("full_d", d=d)
    wts = point.weights
    v = []
    w = []
    for i in range(m):
        a = point.alpha[i]
        if wts[i] > 0:
            v.append(point.v[i])
            w.append(point.w[i])
        else:
            v.append(MU.mat_fill(a, d, field.zero))
            w.append(MU.mat_fill(d, a, field.zero))
    return CMPoint(field, point.alpha, new, point.X, point.Y, v, w)


def gauge_act(point, g):
    """Act by invertible block matrices g = (g_0, ..., g_{m-1}):

    X_i -> g_{i+1} X_i g_i^{-1}, Y_i -> g_i Y_i g_{i+1}^{-1},
    v_i -> g_i v_i, w_i -> w_i g_i^{-1}.
    """
    field = point.field
    m = point.m
    if len(g) != m:
        raise ShapeMismatch("need one gauge block per vertex")
    g = [MU.mat_map(field.scalar, MU.mat(b)) for b in g]
    for i, b in enumerate(g):
        if MU.mat_shape(b) != (point.alpha[i], point.alpha[i]):
            raise ShapeMismatch(f"gauge block {i} has the wrong shape")
    ginv = [scalar_matrix_inverse(field, b) for b in g]
    zero = field.zero
    X = [MU.mat_mul_z(MU.mat_mul_z(g[(i + 1) % m], point.X[i], zero), ginv[i], zero)
         for i in range(m)]
    Y = [MU.mat_mul_z(MU.mat_mul_z(g[i], point.Y[i], zero), ginv[(i + 1) % m], zero)
         for i in range(m)]
    v = [MU.mat_mul_z(g[i], point.v[i], zero) for i in range(m)]
    w = [MU.mat_mul_z(point.w[i], ginv[i], zero) for i in range(m)]
    return CMPoint(field, point.alpha, point.framing, X, Y, v, w)


# ---------------------------------------------------------------------------
# random sampling

def random_point(m, n, params, framing=None, seed=0, max_tries=50):
    """A random moment-map point: random Darboux data pushed through the
    slice, then a random gauge twist.  Deterministic for a fixed seed."""
    field = params.field
    if framing is None:
        framing = Framing("full")
    rng = _random.Random(seed)
    if n == 0:
        alpha = (0,) * m
        empty = [MU.mat_fill(0, 0, field.zero)] * m
        wts = framing.weights(m)
        v = [MU.mat_fill(0, wts[i], field.zero) for i in range(m)]
        w = [MU.mat_fill(wts[i], 0, field.zero) for i in range(m)]
        return CMPoint(field, alpha, framing, empty, empty, v, w)
    for _ in range(max_tries):
        try:
            dp = random_darboux(params, n, framing, seed=rng.randint(0, 10 ** 9))
            point = slice_from_darboux(dp, params, framing)
        except DegeneratePoint:
            continue
        g = []
        for i in range(m):
            for _ in range(20):
                cand = [[field.scalar(rng.randint(-3, 3)) for _ in range(n)]
                        for _ in range(n)]
                for a in range(n):
                    if cand[a][a].is_zero:
                        cand[a][a] = field.one
                try:
                    scalar_matrix_inverse(field, MU.mat(cand))
                except SingularMatrix:
                    continue
                g.append(MU.mat(cand))
                break
            else:
                raise DegeneratePoint("could not sample an invertible gauge block")
        return gauge_act(point, g)
    raise DegeneratePoint(f"no nondegenerate point found in {max_tries} tries")


def random_darboux(params, n, framing=None, seed=0):
    """Random Darboux data satisfying the trace constraint exactly.

    For spherical framings the spin matrices are concentrated at the
    framed vertex, as the slice requires."""
    field = params.field
    m = field.m
    if framing is None:
        framing = Framing("full")
    d = framing.d
    cols = ([framing.ell] if framing.spherical else list(range(m)))
    rng = _random.Random(seed)
    nu = []
    used = set()
    while len(nu) < n:
        cand = field.scalar(rng.randint(1, 8 + 4 * n)) / field.scalar(
            rng.choice((1, 1, 2, 3)))
        key = str(cand ** m)
        if key in used:
            continue
        used.add(key)
        nu.append(cand)
    mu = [field.scalar(f"{rng.randint(-6, 6)}/{rng.choice((1, 2, 3))}")
          for _ in range(n)]
    lam_total = params.lambda_total
    c0 = cols[0]
    phi = []
    psi = []
    for _ in range(n):
        pj = [[field.scalar(rng.randint(-3, 3)) if i in cols else field.zero
               for i in range(m)] for _ in range(d)]
        qj = [[field.scalar(rng.randint(-3, 3)) if i in cols else field.zero
               for a in range(d)] for i in range(m)]
        tr = field.zero
        for a in range(d):
            for i in range(m):
                tr = tr + pj[a][i] * qj[i][a]
        gap = -lam_total - tr
        if not gap.is_zero:
            if qj[c0][0].is_zero:
                qj[c0][0] = field.one
                tr = field.zero
                for a in range(d):
                    for i in range(m):
                        tr = tr + pj[a][i] * qj[i][a]
                gap = -lam_total - tr
            pj[0][c0] = pj[0][c0] + gap / qj[c0][0]
        phi.append(MU.mat(pj))
        psi.append(MU.mat(qj))
    return DarbouxPoint(field, nu, mu, phi, psi, d)


# ---------------------------------------------------------------------------
# assembled matrices

def big_matrices(point):
    """(Xhat, Yhat, Vhat, What): the block-cyclic matrices on sum V_i.

    Basis ordering is vertex-major: vertex 0's basis vectors first.
    Xhat has X_i in block (i+1, i); Yhat has Y_i in block (i, i+1);
    Vhat stacks the v_i side by side on the framing space, What the w_i.
    """
    field = point.field
    m = point.m
    alpha = point.alpha
    N = sum(alpha)
    wts = point.weights
    W = sum(wts)
    zero = field.zero
    off = [0]
    for a in alpha:
        off.append(off[-1] + a)
    woff = [0]
    for a in wts:
        woff.append(woff[-1] + a)

    Xh = [[zero] * N for _ in range(N)]
    Yh = [[zero] * N for _ in range(N)]
    Vh = [[zero] * W for _ in range(N)]
    Wh = [[zero] * N for _ in range(W)]
    for i in range(m):
        ip = (i + 1) % m
        for a in range(alpha[ip]):
            for b in range(alpha[i]):
                Xh[off[ip] + a][off[i] + b] = point.X[i][a][b]
        for a in range(alpha[i]):
            for b in range(alpha[ip]):
                Yh[off[i] + a][off[ip] + b] = point.Y[i][a][b]
        for a in range(alpha[i]):
            for b in range(wts[i]):
                Vh[off[i] + a][woff[i] + b] = point.v[i][a][b]
        for a in range(wts[i]):
            for b in range(alpha[i]):
                Wh[woff[i] + a][off[i] + b] = point.w[i][a][b]
    t = lambda rows: tuple(tuple(r) for r in rows)
    return t(Xh), t(Yh), t(Vh), t(Wh)
