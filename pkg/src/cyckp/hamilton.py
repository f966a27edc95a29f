"""Hamiltonians, Poisson brackets and flows on moment-map points.

Observables live in a small trace grammar: sums c * tr(A_1 ... A_s)
where each factor is a block of the point (X_i, Y_i, v_i, w_i) or a
constant matrix on the framing slot.  The gradient of tr(A_1 ... A_s)
with respect to one factor is the transposed product of the remaining
factors read around the cycle, so brackets of such sums are exact:
X-gradients contract with Y-gradients and v-gradients with w-gradients,
vertex by vertex.

On a Darboux slice the same brackets are reproduced from the canonical
pairs: (mu_j, nu_j) with weight 1/m and the spin entries with weight 1,
all gradients taken by forward-mode dual numbers through the slice map.

Flows come in three grades.  The times t_{mj} act affinely on X and are
integrated exactly over any field.  A general time t_{k,beta} is
integrated in closed form through the spectral decomposition of the big
matrix Y (float backend).  A monitored Runge-Kutta driver integrates
the same vector field numerically as an independent cross-check.
"""

import csv
from fractions import Fraction

import numpy as np

from . import matutil as MU
from .dual import DualField, DualScalar
from .errors import (
    IllConditioned,
    ShapeMismatch,
    StepRejected,
    UnsupportedObservable,
)
from .quiver import (
    CMPoint,
    DarbouxPoint,
    big_matrices,
    check_moment_map,
    promote_framing,
    slice_from_darboux,
)
from .solution import FlowSpec, flow_vector_field

__all__ = [
    "Observable",
    "TracePolynomial",
    "evaluate",
    "poisson_rep",
    "poisson_darboux",
    "darboux_coordinates",
    "darboux_form_pullback",
    "darboux_form_canonical",
    "independence_rank",
    "evolve_exact_mj",
    "evolve_closed_form",
    "evolve_rk4",
    "write_trajectory",
]


# ---------------------------------------------------------------------------
# the trace grammar

class TracePolynomial:
    """sum_t c_t * tr(word_t) with rational coefficients.

    Tokens are ("X", i), ("Y", i), ("v", i), ("w", i) with the vertex
    index reduced mod m at evaluation time, or ("C", rows) for a
    constant matrix on the framing slot.  Words must close up into a
    square product; words that pass through an empty framing slot of a
    spherical point evaluate to zero.
    """

    __slots__ = ("terms",)

    def __init__(self, terms):
        packed = []
        for coeff, word in terms:
            word = tuple(word)
            for tok in word:
                if tok[0] == "C":
                    continue
                if tok[0] not in ("X", "Y", "v", "w"):
                    raise UnsupportedObservable(f"unknown token {tok!r}")
            packed.append((Fraction(coeff), word))
        self.terms = tuple(packed)

    def __repr__(self):
        return f"<TracePolynomial terms={len(self.terms)}>"


class Observable:
    """A named conserved quantity, compiled to trace words on demand.

    kind        meaning
    H_k         -sum_i tr(w_i Y_i...Y_{i+k-1} v_{i+k})
    H_k_beta    the same with E_beta inserted on the framing slot
    I_k_A       sum_i tr(A w_i Y_i...Y_{i+k-1} v_{i+k})
    h_j_beta    -tr(E_beta w_l Y^{mj} v_l) at the framed vertex l
    tr_Y_mj     (1/m) * trace of the (mj)-th power of the big matrix Y

    The index argument is k for the first three kinds and j for the
    last two.
    """

    KINDS = ("H_k", "H_k_beta", "I_k_A", "h_j_beta", "tr_Y_mj")

    __slots__ = ("kind", "k", "beta", "A")

    def __init__(self, kind, k, beta=None, A=None):
        if kind not in self.KINDS:
            raise UnsupportedObservable(f"unknown observable kind {kind!r}")
        k = int(k)
        if k < (0 if kind == "I_k_A" else 1):
            raise ShapeMismatch(f"index {k} out of range for {kind}")
        if (A is not None) != (kind == "I_k_A"):
            raise ShapeMismatch("a constant matrix goes with I_k_A only")
        if (beta is not None) != (kind in ("H_k_beta", "h_j_beta")):
            raise ShapeMismatch("a component index goes with the beta kinds only")
        if beta is not None:
            beta = int(beta)
            if beta < 1:
                raise ShapeMismatch("component index beta counts from 1")
        if A is not None:
            A = tuple(tuple(Fraction(x) for x in row) for row in A)
            if any(len(row) != len(A) for row in A):
                raise ShapeMismatch("constant matrix must be square")
        self.kind = kind
        self.k = k
        self.beta = beta
        self.A = A

    def __repr__(self):
        if self.kind == "I_k_A":
            return f"Observable(I_{self.k}(A), d={len(self.A)})"
        if self.beta is not None:
            return f"Observable({self.kind}, {self.k}, beta={self.beta})"
        return f"Observable({self.kind}, {self.k})"


def _unit_matrix(d, beta):
    one, zero = Fraction(1), Fraction(0)
    return tuple(
        tuple(one if r == c == beta - 1 else zero for c in range(d))
        for r in range(d)
    )


def _ychain_word(start, steps, m):
    return tuple(("Y", (start + s) % m) for s in range(steps))


def _compile(obs, m, d, ell):
    """Unroll an observable into (coefficient, word) terms."""
    if isinstance(obs, TracePolynomial):
        return obs.terms
    if not isinstance(obs, Observable):
        raise UnsupportedObservable(
            f"cannot compile {type(obs).__name__} into trace words")
    if obs.beta is not None and obs.beta > d:
        raise ShapeMismatch(f"component beta={obs.beta} exceeds d={d}")
    if obs.A is not None and len(obs.A) != d:
        raise ShapeMismatch(f"constant block is {len(obs.A)}x{len(obs.A)}, "
                            f"framing carries d={d}")
    k = obs.k
    terms = []
    if obs.kind == "tr_Y_mj":
        coeff = Fraction(1, m)
        for i in range(m):
            terms.append((coeff, _ychain_word(i, k * m, m)))
    elif obs.kind == "h_j_beta":
        word = ((("C", _unit_matrix(d, obs.beta)), ("w", ell))
                + _ychain_word(ell, k * m, m) + (("v", ell),))
        terms.append((Fraction(-1), word))
    else:
        if obs.kind == "I_k_A":
            head, sign = obs.A, Fraction(1)
        elif obs.kind == "H_k_beta":
            head, sign = _unit_matrix(d, obs.beta), Fraction(-1)
        else:
            head, sign = None, Fraction(-1)
        for i in range(m):
            word = (("w", i),) + _ychain_word(i, k, m) + (("v", (i + k) % m),)
            if head is not None:
                word = (("C", head),) + word
            terms.append((sign, word))
    return tuple(terms)


def _token_shape(point, tok):
    m, alpha, wts = point.m, point.alpha, point.weights
    t = tok[0]
    if t == "C":
        d = point.framing.d
        return (d, d)
    i = tok[1] % m
    if t == "X":
        return (alpha[(i + 1) % m], alpha[i])
    if t == "Y":
        return (alpha[i], alpha[(i + 1) % m])
    if t == "v":
        return (alpha[i], wts[i])
    return (wts[i], alpha[i])


def _instantiate(point, word):
    """Blocks for each token; None when the word passes through an
    empty framing slot (the term is identically zero there)."""
    m, wts = point.m, point.weights
    field = point.field
    blocks = []
    for tok in word:
        t = tok[0]
        if t == "C":
            blocks.append(tuple(
                tuple(field.scalar(x) for x in row) for row in tok[1]))
        elif t == "X":
            blocks.append(point.X[tok[1] % m])
        elif t == "Y":
            blocks.append(point.Y[tok[1] % m])
        else:
            i = tok[1] % m
            if wts[i] == 0:
                return None
            blocks.append(point.v[i] if t == "v" else point.w[i])
    return blocks


def _eval_term(point, word):
    blocks = _instantiate(point, word)
    zero = point.field.zero
    if blocks is None:
        return zero
    shapes = [_token_shape(point, tok) for tok in word]
    cur = blocks[0]
    cols = shapes[0][1]
    for blk, (r, c) in zip(blocks[1:], shapes[1:]):
        if cols != r:
            raise ShapeMismatch("trace word does not compose")
        cur = MU.mat_mul_z(cur, blk, zero, cols=c)
        cols = c
    if cols != shapes[0][0]:
        raise ShapeMismatch("trace word does not close up")
    return MU.mat_trace(cur, zero)


def evaluate(obs, point):
    """The value of the observable at the point, over the point's field."""
    field = point.field
    framing = point.framing
    ell = framing.ell if framing.spherical else 0
    terms = _compile(obs, point.m, framing.d, ell)
    total = field.zero
    for coeff, word in terms:
        total = total + field.scalar(coeff) * _eval_term(point, word)
    return total


# ---------------------------------------------------------------------------
# the representation-space bracket

def _gradients(point, terms):
    """Gradient matrices of sum c*tr(word) per (kind, vertex).

    d tr(A_1...A_s) / d(A_t)_{ab} = (A_{t+1} ... A_{t-1})_{ba}: the
    gradient block is the transposed rest-of-cycle product.
    """
    field = point.field
    zero = field.zero
    grads = {}
    for coeff, word in terms:
        blocks = _instantiate(point, word)
        if blocks is None:
            continue
        shapes = [_token_shape(point, tok) for tok in word]
        s = len(word)
        cf = field.scalar(coeff)
        for t, tok in enumerate(word):
            if tok[0] == "C":
                continue
            rows, cols = shapes[t]
            rest = MU.mat_identity(cols, field.one, zero)
            for u in range(1, s):
                blk = blocks[(t + u) % s]
                rest = MU.mat_mul_z(rest, blk, zero, cols=shapes[(t + u) % s][1])
            # rest is cols x rows; contribute cf * rest^T
            contrib = tuple(
                tuple(cf * rest[b][a] for b in range(cols)) for a in range(rows))
            key = (tok[0], tok[1] % point.m)
            held = grads.get(key)
            grads[key] = contrib if held is None else MU.mat_add(held, contrib)
    return grads


def _pair(field, A, B):
    if A is None or B is None or not A or not B:
        return field.zero
    return MU.mat_trace(MU.mat_mul_z(A, B, field.zero, cols=len(A)), field.zero)


def poisson_rep(F, G, point):
    """{F, G} at the point from the canonical block pairings.

    The weights are {X_ab, Y_cd} = -delta_ad delta_bc and the matching
    {v, w} = -delta, the inverse of the symplectic form whose moment
    level check_moment_map enforces.  Three things pin this choice at
    once: {I_k(A), I_l(B)} = I_{k+l}([A,B]) with the commutator in that
    order, agreement with poisson_darboux through the slice chart, and
    d/dt = {H_k, .} reproducing flow_vector_field.  Flipping both signs
    reverses the commutator; flipping one breaks the slice agreement.
    """
    field = point.field
    framing = point.framing
    ell = framing.ell if framing.spherical else 0
    gf = _gradients(point, _compile(F, point.m, framing.d, ell))
    gg = _gradients(point, _compile(G, point.m, framing.d, ell))
    total = field.zero
    for i in range(point.m):
        total = total - _pair(field, gf.get(("X", i)), gg.get(("Y", i)))
        total = total + _pair(field, gg.get(("X", i)), gf.get(("Y", i)))
        total = total - _pair(field, gf.get(("v", i)), gg.get(("w", i)))
        total = total + _pair(field, gg.get(("v", i)), gf.get(("w", i)))
    return total


# ---------------------------------------------------------------------------
# the Darboux bracket

def darboux_coordinates(q, framing=None):
    """Coordinate labels on a slice chart, canonical pairs adjacent.

    ("mu", j) and ("nu", j) first, then ("phi", j, a, r) and
    ("psi", j, r, a); spherical framings keep only the framed vertex
    column of phi and row of psi.
    """
    coords = []
    for j in range(q.n):
        coords.append(("mu", j))
        coords.append(("nu", j))
    if framing is not None and framing.spherical:
        verts = (framing.ell,)
    else:
        verts = tuple(range(q.m))
    for j in range(q.n):
        for r in verts:
            for a in range(q.d):
                coords.append(("phi", j, a, r))
                coords.append(("psi", j, r, a))
    return tuple(coords)


def _dual_darboux(q, coord):
    """Lift q to dual numbers with unit velocity on one coordinate."""
    field = q.field
    DF = DualField(field)
    one, zero = field.one, field.zero

    def lift(x, on):
        return DF.dual_scalar(x, one if on else zero)

    kind = coord[0]
    nu = [lift(q.nu[j], kind == "nu" and coord[1] == j) for j in range(q.n)]
    mu = [lift(q.mu[j], kind == "mu" and coord[1] == j) for j in range(q.n)]
    phi = [tuple(
        tuple(lift(q.phi[j][a][r], coord == ("phi", j, a, r))
              for r in range(q.m))
        for a in range(q.d)) for j in range(q.n)]
    psi = [tuple(
        tuple(lift(q.psi[j][r][a], coord == ("psi", j, r, a))
              for a in range(q.d))
        for r in range(q.m)) for j in range(q.n)]
    return DarbouxPoint(DF, nu, mu, phi, psi, d=q.d)


def _as_slice_function(F, params, framing):
    if isinstance(F, (Observable, TracePolynomial)):
        def fn(qd):
            p = params.to_field(qd.field)
            return evaluate(F, slice_from_darboux(qd, p, framing, check=False))
        return fn
    if callable(F):
        return F
    raise UnsupportedObservable(
        f"cannot take slice gradients of {type(F).__name__}")


def _darboux_gradient(fn, q, coords):
    grads = {}
    zero = q.field.zero
    for coord in coords:
        val = fn(_dual_darboux(q, coord))
        grads[coord] = val.eps if isinstance(val, DualScalar) else zero
    return grads


def poisson_darboux(F, G, q, params, framing=None):
    """{F, G} on the slice chart at q.

    F and G are observables (evaluated through the slice map) or plain
    callables on Darboux points.  The pair (mu_j, nu_j) carries weight
    1/m and the spin entries weight 1, oriented to match poisson_rep
    through the slice: {mu_j, nu_j} = 1/m and {psi, phi} = 1.
    """
    coords = darboux_coordinates(q, framing)
    field = q.field
    fF = _as_slice_function(F, params, framing)
    fG = _as_slice_function(G, params, framing)
    gF = _darboux_gradient(fF, q, coords)
    gG = _darboux_gradient(fG, q, coords)
    inv_m = field.one / field.scalar(q.m)
    total = field.zero
    for coord in coords:
        if coord[0] == "nu":
            j = coord[1]
            total = total + inv_m * (gF[("mu", j)] * gG[("nu", j)]
                                     - gF[("nu", j)] * gG[("mu", j)])
        elif coord[0] == "psi":
            _, j, r, a = coord
            pc = ("phi", j, a, r)
            total = total + (gF[coord] * gG[pc] - gF[pc] * gG[coord])
    return total


def _slice_tangent(q, params, framing, coord):
    """Blockwise derivative of the slice map along one coordinate."""
    qd = _dual_darboux(q, coord)
    pd = params.to_field(qd.field)
    point = slice_from_darboux(qd, pd, framing, check=False)
    eps = lambda b: MU.mat_map(lambda x: x.eps, b)
    return ([eps(b) for b in point.X], [eps(b) for b in point.Y],
            [eps(b) for b in point.v], [eps(b) for b in point.w])


def darboux_form_pullback(q, params, framing=None):
    """(coords, Omega): the symplectic form pulled back through the slice.

    Omega[I][J] = sum_i tr(dY_i(I) dX_i(J)) - tr(dY_i(J) dX_i(I))
                + sum_i tr(dw_i(I) dv_i(J)) - tr(dw_i(J) dv_i(I)),
    evaluated exactly; the directions are the chart coordinates.
    """
    field = q.field
    coords = darboux_coordinates(q, framing)
    tangents = [_slice_tangent(q, params, framing, c) for c in coords]
    n = len(coords)
    omega = [[field.zero] * n for _ in range(n)]
    for I in range(n):
        XI, YI, vI, wI = tangents[I]
        for J in range(I + 1, n):
            XJ, YJ, vJ, wJ = tangents[J]
            val = field.zero
            for i in range(q.m):
                val = val + _pair(field, YI[i], XJ[i]) - _pair(field, YJ[i], XI[i])
                val = val + _pair(field, wI[i], vJ[i]) - _pair(field, wJ[i], vI[i])
            omega[I][J] = val
            omega[J][I] = -val
    return coords, tuple(tuple(row) for row in omega)


def darboux_form_canonical(q, framing=None):
    """(coords, Omega) for the form m dmu^dnu - dphi^dpsi per pair."""
    field = q.field
    coords = darboux_coordinates(q, framing)
    index = {c: i for i, c in enumerate(coords)}
    n = len(coords)
    mval = field.scalar(q.m)
    one = field.one
    omega = [[field.zero] * n for _ in range(n)]
    for c in coords:
        if c[0] == "mu":
            j = c[1]
            I, J = index[("mu", j)], index[("nu", j)]
            omega[I][J] = mval
            omega[J][I] = -mval
        elif c[0] == "phi":
            _, j, a, r = c
            I, J = index[c], index[("psi", j, r, a)]
            omega[I][J] = -one
            omega[J][I] = one
    return coords, tuple(tuple(row) for row in omega)


def independence_rank(obs_list, q, params, framing=None, threshold=1e-8):
    """Numerical rank of the observables' Jacobian on the slice chart."""
    fl = q.field.to_float()
    qf = q.to_field(fl)
    pf = params.to_field(fl)
    coords = darboux_coordinates(qf, framing)
    rows = []
    for obs in obs_list:
        fn = _as_slice_function(obs, pf, framing)
        g = _darboux_gradient(fn, qf, coords)
        rows.append([g[c].to_complex() for c in coords])
    if not rows:
        return 0
    sv = np.linalg.svd(np.array(rows, dtype=complex), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > threshold * sv[0]))


# ---------------------------------------------------------------------------
# flows

def _chain(point, start, steps):
    """Y_start Y_{start+1} ... over `steps` consecutive vertices."""
    field = point.field
    m = point.m
    alpha = point.alpha
    cur = MU.mat_identity(alpha[start % m], field.one, field.zero)
    for t in range(steps):
        i = (start + t) % m
        cur = MU.mat_mul_z(cur, point.Y[i], field.zero, cols=alpha[(i + 1) % m])
    return cur


def evolve_exact_mj(point, params, times):
    """Integrate the linear t_{mj} flows: X moves, Y, v, w stay put.

    times maps j >= 1 to the time value t_{mj}; the shift of X_i is
    sum_j j * t_{mj} * |lambda| * Y_{i+1} ... Y_{i+mj-1}, exact over the
    point's own field.
    """
    field = point.field
    if params.field is not field:
        params = params.to_field(field)
    m = point.m
    total = params.lambda_total
    newX = [b for b in point.X]
    for j, t in sorted(times.items()):
        j = int(j)
        if j < 1:
            raise ShapeMismatch("flow index j must be at least 1")
        c = field.scalar(j) * total * field.scalar(t)
        for i in range(m):
            shift = MU.mat_scale(_chain(point, i + 1, m * j - 1), c)
            newX[i] = MU.mat_add(newX[i], shift)
    return CMPoint(field, point.alpha, point.framing,
                   newX, point.Y, point.v, point.w)


def _np_block(block, rows, cols):
    arr = np.zeros((rows, cols), dtype=complex)
    for a in range(rows):
        for b in range(cols):
            arr[a, b] = block[a][b].to_complex()
    return arr


def _field_block(field, arr):
    return tuple(tuple(field.scalar(complex(x)) for x in row) for row in arr)


def _cexpm1(z):
    # exp(z) - 1 without cancellation for small complex z
    if abs(z) < 1e-5:
        return z * (1 + z / 2 * (1 + z / 3 * (1 + z / 4)))
    return np.exp(z) - 1.0


def _as_spec(spec):
    return spec if isinstance(spec, FlowSpec) else FlowSpec(spec)


def evolve_closed_form(point, spec, t, eig_gap=1e-8):
    """Integrate the t_{k,beta} flow through the spectrum of Y.

    v and w evolve by the exponential of the big matrix Y^k; the shift
    of X is conjugation-invariant, so in the eigenbasis of Y each entry
    of v E w picks up the factor (exp(-t(y_a^k - y_b^k)) - 1)/(y_a - y_b),
    with the limit -t*k*y_a^{k-1} on the diagonal.  Requires the float
    backend and simple spectrum: eigenvalue gaps below eig_gap raise
    IllConditioned.
    """
    spec = _as_spec(spec)
    k = spec.k
    if point.framing.spherical and k % point.m != 0:
        point = promote_framing(point)
    fl = point.field.to_float()
    pt = point.to_field(fl)
    m, alpha, wts = pt.m, pt.alpha, pt.weights
    d = pt.framing.d
    if spec.beta is not None and spec.beta > d:
        raise ShapeMismatch(f"component beta={spec.beta} exceeds d={d}")
    N = sum(alpha)
    if N == 0:
        return pt
    off = [0]
    for a in alpha:
        off.append(off[-1] + a)

    _, Yh, _, _ = big_matrices(pt)
    Ynp = _np_block(Yh, N, N)
    yv, U = np.linalg.eig(Ynp)
    for a in range(N):
        for b in range(a + 1, N):
            gap = abs(yv[a] - yv[b])
            if gap < eig_gap:
                raise IllConditioned(
                    f"eigenvalues of Y separated by {gap:.3e} < {eig_gap:.3e}")
    Uinv = np.linalg.inv(U)

    proj = np.zeros((d, d), dtype=complex)
    if spec.beta is None:
        np.fill_diagonal(proj, 1.0)
    else:
        proj[spec.beta - 1, spec.beta - 1] = 1.0
    comp = np.eye(d, dtype=complex) - proj

    VS = np.zeros((N, d), dtype=complex)
    WS = np.zeros((d, N), dtype=complex)
    for i in range(m):
        if wts[i] == 0:
            continue
        VS[off[i]:off[i + 1], :] = _np_block(pt.v[i], alpha[i], d)
        WS[:, off[i]:off[i + 1]] = _np_block(pt.w[i], d, alpha[i])

    ph = yv ** k
    Em = U @ np.diag(np.exp(-t * ph)) @ Uinv
    Ep = U @ np.diag(np.exp(t * ph)) @ Uinv
    Vt = Em @ VS
    Wt = WS @ Ep

    Q0 = VS @ proj @ WS
    Qt = Uinv @ Q0 @ U
    F = np.empty((N, N), dtype=complex)
    for a in range(N):
        for b in range(N):
            if a == b:
                F[a, b] = -t * k * yv[a] ** (k - 1)
            else:
                F[a, b] = _cexpm1(-t * (ph[a] - ph[b])) / (yv[a] - yv[b])
    G = U @ (Qt * F) @ Uinv

    newX, newv, neww = [], [], []
    for i in range(m):
        ip = (i + 1) % m
        Xi = _np_block(pt.X[i], alpha[ip], alpha[i])
        Xi = Xi + G[off[ip]:off[ip + 1], off[i]:off[i + 1]]
        newX.append(_field_block(fl, Xi))
        if wts[i] == 0:
            newv.append(pt.v[i])
            neww.append(pt.w[i])
        else:
            vi = _np_block(pt.v[i], alpha[i], d)
            wi = _np_block(pt.w[i], d, alpha[i])
            newv.append(_field_block(fl, vi @ comp + Vt[off[i]:off[i + 1], :] @ proj))
            neww.append(_field_block(fl, comp @ wi + proj @ Wt[:, off[i]:off[i + 1]]))
    return CMPoint(fl, alpha, pt.framing, newX, pt.Y, newv, neww)


def evolve_rk4(point, params, spec, t, steps, hamiltonians=None):
    """Classical fourth-order Runge-Kutta on the t_{k,beta} field.

    Integrates flow_vector_field over the float backend and records a
    monitor row per step: time, flattened X entries, the values of the
    given Hamiltonians (H_1..H_4 by default), the moment-map residual
    norm and the (constant) eigenvalues of Y.  Non-finite state raises
    StepRejected.
    """
    spec = _as_spec(spec)
    if point.framing.spherical and spec.k % point.m != 0:
        point = promote_framing(point)
    fl = point.field.to_float()
    pt = point.to_field(fl)
    prm = params.to_field(fl)
    if hamiltonians is None:
        hamiltonians = tuple(Observable("H_k", l) for l in range(1, 5))
    m, alpha, wts = pt.m, pt.alpha, pt.weights
    d = pt.framing.d
    framing = pt.framing

    Yblocks = pt.Y
    N = sum(alpha)
    _, Yh, _, _ = big_matrices(pt)
    y_eigs = tuple(np.linalg.eigvals(_np_block(Yh, N, N))) if N else ()

    def unpack(state):
        Xs, vs, ws = state
        X = [_field_block(fl, Xs[i]) for i in range(m)]
        v = [_field_block(fl, vs[i]) if wts[i] else pt.v[i] for i in range(m)]
        w = [_field_block(fl, ws[i]) if wts[i] else pt.w[i] for i in range(m)]
        return CMPoint(fl, alpha, framing, X, Yblocks, v, w)

    def pack_point(p):
        Xs = [_np_block(p.X[i], alpha[(i + 1) % m], alpha[i]) for i in range(m)]
        vs = [_np_block(p.v[i], alpha[i], wts[i]) for i in range(m)]
        ws = [_np_block(p.w[i], wts[i], alpha[i]) for i in range(m)]
        return (Xs, vs, ws)

    def deriv(state):
        tg = flow_vector_field(unpack(state), prm, spec)
        Xs = [_np_block(tg.X[i], alpha[(i + 1) % m], alpha[i]) for i in range(m)]
        vs = [_np_block(tg.v[i], alpha[i], wts[i]) for i in range(m)]
        ws = [_np_block(tg.w[i], wts[i], alpha[i]) for i in range(m)]
        return (Xs, vs, ws)

    def axpy(state, c, delta):
        return tuple([s + c * dd for s, dd in zip(group, dgroup)]
                     for group, dgroup in zip(state, delta))

    def weighted(state, h, k1, k2, k3, k4):
        out = []
        for g, g1, g2, g3, g4 in zip(state, k1, k2, k3, k4):
            out.append([s + (h / 6.0) * (a + 2 * b + 2 * c + e)
                        for s, a, b, c, e in zip(g, g1, g2, g3, g4)])
        return tuple(out)

    def monitor(tcur, p, state):
        hvals = tuple(evaluate(obs, p).to_complex() for obs in hamiltonians)
        _, res = check_moment_map(p, prm)
        rnorm = 0.0
        for blk in res:
            for row in blk:
                for e in row:
                    rnorm = max(rnorm, abs(e.to_complex()))
        xflat = tuple(complex(x) for Xi in state[0] for x in Xi.flat)
        return {"t": tcur, "X": xflat, "hamiltonians": hvals,
                "moment_residual": rnorm, "y_eigenvalues": y_eigs}

    state = pack_point(pt)
    records = [monitor(0.0, pt, state)]
    h = t / steps
    for s in range(steps):
        k1 = deriv(state)
        k2 = deriv(axpy(state, h / 2.0, k1))
        k3 = deriv(axpy(state, h / 2.0, k2))
        k4 = deriv(axpy(state, h, k3))
        state = weighted(state, h, k1, k2, k3, k4)
        for group in state:
            for arr in group:
                if arr.size and not np.all(np.isfinite(arr)):
                    raise StepRejected(f"non-finite state at step {s + 1}")
        p = unpack(state)
        records.append(monitor((s + 1) * h, p, state))
    return unpack(state), records


def write_trajectory(path, records, x_labels=None, ham_labels=None):
    """CSV dump: t, the flattened X entries, the Hamiltonians, residual."""
    if not records:
        raise ShapeMismatch("no monitor rows to write")
    nx = len(records[0]["X"])
    nh = len(records[0]["hamiltonians"])
    if x_labels is None:
        x_labels = [f"x{i}" for i in range(nx)]
    if ham_labels is None:
        ham_labels = [f"H_{i + 1}" for i in range(nh)]

    def num(z):
        z = complex(z)
        if abs(z.imag) <= 1e-12 * max(1.0, abs(z.real)):
            return repr(z.real)
        return repr(z)

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *x_labels, *ham_labels, "residual"])
        for rec in records:
            writer.writerow([repr(rec["t"]),
                             *[num(x) for x in rec["X"]],
                             *[num(hv) for hv in rec["hamiltonians"]],
                             repr(rec["moment_residual"])])
    return path
