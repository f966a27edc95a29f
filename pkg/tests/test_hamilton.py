"""Trace observables, the two bracket realizations, and the flow drivers."""

import csv
from fractions import Fraction

import pytest

from cyckp import matutil as MU
from cyckp.crossed import params_from_lambda
from cyckp.errors import IllConditioned, ShapeMismatch, StepRejected, UnsupportedObservable
from cyckp.hamilton import (
    Observable,
    TracePolynomial,
    darboux_coordinates,
    darboux_form_canonical,
    darboux_form_pullback,
    evaluate,
    evolve_closed_form,
    evolve_exact_mj,
    evolve_rk4,
    independence_rank,
    poisson_darboux,
    poisson_rep,
    write_trajectory,
)
from cyckp.quiver import (
    CMPoint,
    Framing,
    check_moment_map,
    random_darboux,
    random_point,
    slice_from_darboux,
)
from cyckp.scalars import CycField
from cyckp.solution import FlowSpec, flow_vector_field

F2 = CycField(2)
FL2 = CycField(2, exact=False)
PAR2 = params_from_lambda(2, ("-3", "1/2"), field=F2)
PAR2F = PAR2.to_field(FL2)
FULL = Framing("full")

import random


def rand_mat(field, r, c, rng):
    return tuple(
        tuple(field.scalar(Fraction(rng.randint(-9, 9), rng.randint(1, 4)))
              for _ in range(c))
        for _ in range(r))


def rep_point(m, n, d, seed):
    # generic, deliberately off the moment locus: bracket identities are
    # identities of the ambient space
    field = CycField(m)
    rng = random.Random(seed)
    fr = Framing("full_d", d=d) if d > 1 else Framing("full")
    X = [rand_mat(field, n, n, rng) for _ in range(m)]
    Y = [rand_mat(field, n, n, rng) for _ in range(m)]
    v = [rand_mat(field, n, d, rng) for _ in range(m)]
    w = [rand_mat(field, d, n, rng) for _ in range(m)]
    return CMPoint(field, (n,) * m, fr, X, Y, v, w)


def frac_mat(rng, d):
    return tuple(
        tuple(Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(d))
        for _ in range(d))


def commutator(A, B):
    d = len(A)
    return tuple(
        tuple(sum(A[r][s] * B[s][c] - B[r][s] * A[s][c] for s in range(d))
              for c in range(d))
        for r in range(d))


def to_c(x):
    return x.to_complex()


def max_entry_diff(p, q, slots=("X", "Y", "v", "w")):
    worst = 0.0
    for slot in slots:
        for A, B in zip(getattr(p, slot), getattr(q, slot)):
            for ra, rb in zip(A, B):
                for a, b in zip(ra, rb):
                    worst = max(worst, abs(to_c(a) - to_c(b)))
    return worst


# ---------------------------------------------------------------------------
# evaluate

def test_H_k_matches_direct_product():
    pt = rep_point(2, 2, 1, 1)
    field, m = pt.field, pt.m
    for k in (1, 2, 3, 4, 5):
        tot = field.zero
        for i in range(m):
            cur = pt.w[i]
            for s in range(k):
                cur = MU.mat_mul_z(cur, pt.Y[(i + s) % m], field.zero,
                                   cols=pt.alpha[(i + s + 1) % m])
            cur = MU.mat_mul_z(cur, pt.v[(i + k) % m], field.zero,
                               cols=pt.weights[(i + k) % m])
            tot = tot + MU.mat_trace(cur, field.zero)
        assert evaluate(Observable("H_k", k), pt) == -tot


def test_H_k_beta_sums_to_H_k():
    pt = rep_point(2, 2, 2, 7)
    for k in (1, 2, 3):
        total = pt.field.zero
        for b in (1, 2):
            total = total + evaluate(Observable("H_k_beta", k, beta=b), pt)
        assert total == evaluate(Observable("H_k", k), pt)


def test_H_mj_equals_trace_power_on_moment_locus():
    # H_{mj} = (|lambda|/m) tr Y^{mj} holds on the moment level, not off it
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3)
    lam = PAR2.lambda_total
    for j in (1, 2):
        assert evaluate(Observable("H_k", 2 * j), pt) == \
            lam * evaluate(Observable("tr_Y_mj", j), pt)


def test_spherical_h_sums_to_trace_power():
    pt = random_point(2, 2, PAR2, framing=Framing("spherical", ell=0), seed=9)
    lam = PAR2.lambda_total
    for j in (1, 2):
        assert evaluate(Observable("h_j_beta", j, beta=1), pt) == \
            lam * evaluate(Observable("tr_Y_mj", j), pt)


def test_observable_validation():
    with pytest.raises(UnsupportedObservable):
        Observable("H_q", 1)
    with pytest.raises(ShapeMismatch):
        Observable("H_k", 0)
    with pytest.raises(ShapeMismatch):
        Observable("H_k", 1, beta=1)
    with pytest.raises(ShapeMismatch):
        Observable("I_k_A", 1)
    # I_0(A) is a legal zero-step word
    pt = rep_point(2, 2, 1, 2)
    A = ((Fraction(2),),)
    direct = pt.field.zero
    for i in range(2):
        prod = MU.mat_mul_z(pt.w[i], pt.v[i], pt.field.zero, cols=1)
        direct = direct + MU.mat_trace(prod, pt.field.zero)
    assert evaluate(Observable("I_k_A", 0, A=A), pt) == pt.field.scalar(2) * direct


def test_trace_polynomial_validation():
    with pytest.raises(UnsupportedObservable):
        TracePolynomial([(Fraction(1), (("Q", 0),))])


# ---------------------------------------------------------------------------
# poisson_rep

def test_hamiltonians_commute_off_shell():
    for seed in range(3):
        pt = rep_point(2, 2, 1, 10 + seed)
        for j in (1, 2):
            for k in (2, 3, 4):
                assert poisson_rep(Observable("H_k", j),
                                   Observable("H_k", k), pt).is_zero


def test_I_closure_gives_commutator():
    rng = random.Random(99)
    for seed in range(3):
        pt = rep_point(2, 2, 2, 30 + seed)
        for k, l in ((0, 1), (1, 1), (1, 2), (2, 3)):
            A, B = frac_mat(rng, 2), frac_mat(rng, 2)
            lhs = poisson_rep(Observable("I_k_A", k, A=A),
                              Observable("I_k_A", l, A=B), pt)
            rhs = evaluate(Observable("I_k_A", k + l, A=commutator(A, B)), pt)
            assert lhs == rhs


def test_bracket_antisymmetry():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3)
    F = TracePolynomial([(Fraction(1), (("X", 0), ("X", 1), ("Y", 1), ("Y", 0)))])
    G = Observable("H_k", 2)
    assert poisson_rep(F, G, pt) == -poisson_rep(G, F, pt)


# ---------------------------------------------------------------------------
# the slice chart: forms, weights, agreement

FORM_CASES = [
    (1, 2, Framing("full"), ("-2",), 3),
    (2, 2, Framing("full"), ("-3", "1/2"), 4),
    (2, 2, Framing("full_d", d=2), ("-3", "1/2"), 5),
    (2, 2, Framing("spherical", ell=0), ("-3", "1/2"), 6),
    (3, 2, Framing("spherical_d", ell=1, d=2), ("-2", "1/3", "1/5"), 7),
]


@pytest.mark.parametrize("m, n, framing, lam, seed", FORM_CASES)
def test_form_pullback_is_canonical(m, n, framing, lam, seed):
    params = params_from_lambda(m, lam)
    q = random_darboux(params, n, framing=framing, seed=seed)
    coords, omega = darboux_form_pullback(q, params, framing=framing)
    coords2, want = darboux_form_canonical(q, framing=framing)
    assert coords == coords2 == darboux_coordinates(q, framing)
    assert omega == want


def coord_fn(kind, *idx):
    def fn(qd):
        if kind == "nu":
            return qd.nu[idx[0]]
        if kind == "mu":
            return qd.mu[idx[0]]
        if kind == "phi":
            j, a, r = idx
            return qd.phi[j][a][r]
        j, r, a = idx
        return qd.psi[j][r][a]
    return fn


def test_darboux_coordinate_weights():
    q = random_darboux(PAR2, 2, framing=FULL, seed=11)
    half = F2.scalar("1/2")

    def br(F, G):
        return poisson_darboux(F, G, q, PAR2, framing=FULL)

    assert br(coord_fn("mu", 0), coord_fn("nu", 0)) == half
    assert br(coord_fn("nu", 0), coord_fn("mu", 0)) == -half
    assert br(coord_fn("nu", 0), coord_fn("mu", 1)).is_zero
    assert br(coord_fn("nu", 0), coord_fn("nu", 1)).is_zero
    assert br(coord_fn("psi", 0, 1, 0), coord_fn("phi", 0, 0, 1)) == F2.one
    assert br(coord_fn("phi", 0, 0, 1), coord_fn("psi", 0, 1, 0)) == -F2.one
    assert br(coord_fn("phi", 0, 0, 1), coord_fn("psi", 1, 1, 0)).is_zero


def test_rep_and_darboux_brackets_agree_through_slice():
    q = random_darboux(PAR2, 2, framing=FULL, seed=11)
    pt = slice_from_darboux(q, PAR2, framing=FULL)
    inv4 = TracePolynomial(
        [(Fraction(1), (("X", 0), ("X", 1), ("Y", 1), ("Y", 0)))])
    pairs = [
        (Observable("H_k", 1), Observable("tr_Y_mj", 1)),
        (Observable("H_k", 1), Observable("H_k_beta", 2, beta=1)),
        (inv4, Observable("H_k", 1)),
        (inv4, Observable("H_k", 2)),
    ]
    nonzero = 0
    for F, G in pairs:
        a = poisson_rep(F, G, pt)
        b = poisson_darboux(F, G, q, PAR2, framing=FULL)
        assert a == b
        nonzero += not a.is_zero
    assert nonzero >= 2


def test_slice_agreement_needs_gauge_invariance():
    # tr(X_0 Y_0 X_1 Y_1) mixes vertices and is not invariant; the chart
    # bracket is under no obligation to match it
    q = random_darboux(PAR2, 2, framing=FULL, seed=11)
    pt = slice_from_darboux(q, PAR2, framing=FULL)
    bad = TracePolynomial(
        [(Fraction(1), (("X", 0), ("Y", 0), ("X", 1), ("Y", 1)))])
    G = Observable("H_k", 1)
    assert poisson_rep(bad, G, pt) != poisson_darboux(bad, G, q, PAR2, framing=FULL)


def test_spherical_slice_agreement():
    fr = Framing("spherical", ell=0)
    q = random_darboux(PAR2, 2, framing=fr, seed=21)
    pt = slice_from_darboux(q, PAR2, framing=fr)
    inv4 = TracePolynomial(
        [(Fraction(1), (("X", 0), ("X", 1), ("Y", 1), ("Y", 0)))])
    for F, G in ((Observable("h_j_beta", 1, beta=1), Observable("h_j_beta", 2, beta=1)),
                 (inv4, Observable("h_j_beta", 1, beta=1))):
        assert poisson_rep(F, G, pt) == poisson_darboux(F, G, q, PAR2, framing=fr)


# ---------------------------------------------------------------------------
# independence ranks

def test_rank_full_framing():
    q = random_darboux(PAR2, 2, framing=FULL, seed=11)
    obs = [Observable("H_k", k) for k in (1, 2, 3, 4)]
    assert independence_rank(obs, q, PAR2, framing=FULL) == 4
    obs.append(Observable("H_k", 1))
    assert independence_rank(obs, q, PAR2, framing=FULL) == 4


def test_rank_multicomponent():
    fr = Framing("full_d", d=2)
    q = random_darboux(PAR2, 1, framing=fr, seed=5)
    obs = [Observable("H_k_beta", k, beta=b) for k in (1, 2) for b in (1, 2)]
    assert independence_rank(obs, q, PAR2, framing=fr) == 4


def test_rank_spherical():
    fr = Framing("spherical", ell=0)
    q = random_darboux(PAR2, 2, framing=fr, seed=21)
    obs = [Observable("h_j_beta", j, beta=1) for j in (1, 2)]
    assert independence_rank(obs, q, PAR2, framing=fr) == 2


# ---------------------------------------------------------------------------
# exact mj flows

def test_exact_mj_is_identity_at_zero():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3)
    p0 = evolve_exact_mj(pt, PAR2, {1: Fraction(0)})
    assert p0.X == [tuple(b) if not isinstance(b, tuple) else b for b in pt.X] \
        or p0.X == pt.X
    assert p0.Y == pt.Y and p0.v == pt.v and p0.w == pt.w


def test_exact_mj_preserves_moment_map_bitwise():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3)
    p1 = evolve_exact_mj(pt, PAR2, {1: Fraction(3, 7), 2: Fraction(-1, 5)})
    ok, residuals = check_moment_map(p1, PAR2)
    assert ok
    assert p1.Y == pt.Y and p1.v == pt.v and p1.w == pt.w


def test_exact_mj_flows_commute():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3)
    joint = evolve_exact_mj(pt, PAR2, {1: Fraction(3, 7), 2: Fraction(-1, 5)})
    ab = evolve_exact_mj(evolve_exact_mj(pt, PAR2, {1: Fraction(3, 7)}),
                         PAR2, {2: Fraction(-1, 5)})
    ba = evolve_exact_mj(evolve_exact_mj(pt, PAR2, {2: Fraction(-1, 5)}),
                         PAR2, {1: Fraction(3, 7)})
    assert ab.X == ba.X == joint.X


def test_exact_mj_block_formula():
    # j = 1: X_i picks up |lambda| t Y_{i+1}
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3)
    c = PAR2.lambda_total * F2.scalar(Fraction(3, 7))
    p1 = evolve_exact_mj(pt, PAR2, {1: Fraction(3, 7)})
    assert p1.X[0] == MU.mat_add(pt.X[0], MU.mat_scale(pt.Y[1], c))
    assert p1.X[1] == MU.mat_add(pt.X[1], MU.mat_scale(pt.Y[0], c))


def test_exact_mj_conserves_hamiltonians():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3)
    p1 = evolve_exact_mj(pt, PAR2, {1: Fraction(3, 7)})
    for k in (1, 2, 3):
        assert evaluate(Observable("H_k", k), pt) == \
            evaluate(Observable("H_k", k), p1)

    with pytest.raises(ShapeMismatch):
        evolve_exact_mj(pt, PAR2, {0: Fraction(1)})


# ---------------------------------------------------------------------------
# closed-form flow

def test_closed_form_derivative_matches_vector_field():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3).to_field(FL2)
    assert pt.field is FL2  # to_field must rebind the field
    spec = FlowSpec(2)
    h = 1e-6
    plus = evolve_closed_form(pt, spec, h)
    minus = evolve_closed_form(pt, spec, -h)
    tang = flow_vector_field(pt, PAR2F, spec)
    worst = 0.0
    for i in range(2):
        for slot in ("X", "v", "w"):
            P, M = getattr(plus, slot)[i], getattr(minus, slot)[i]
            T = getattr(tang, slot)[i]
            for rp, rm, rt in zip(P, M, T):
                for a, b, t in zip(rp, rm, rt):
                    worst = max(worst, abs((to_c(a) - to_c(b)) / (2 * h) - to_c(t)))
    assert worst < 1e-7


def test_closed_form_preserves_moment_and_hamiltonians():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3).to_field(FL2)
    p5 = evolve_closed_form(pt, FlowSpec(2), 0.5)
    ok, residuals = check_moment_map(p5, PAR2F)
    worst = max(abs(to_c(e)) for blk in residuals for row in blk for e in row)
    assert worst < 1e-9
    for k in (1, 2, 3):
        a = to_c(evaluate(Observable("H_k", k), pt))
        b = to_c(evaluate(Observable("H_k", k), p5))
        assert abs(a - b) < 1e-9


def test_closed_form_derivative_is_the_bracket():
    # d/dt F = {H_{k,beta}, F} fixes the orientation of poisson_rep
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3)
    ptf = pt.to_field(FL2)
    h = 1e-6
    for k in (1, 2):
        for F in (Observable("tr_Y_mj", 1), Observable("H_k", 3)):
            plus = evolve_closed_form(ptf, FlowSpec(k), h)
            minus = evolve_closed_form(ptf, FlowSpec(k), -h)
            dF = (to_c(evaluate(F, plus)) - to_c(evaluate(F, minus))) / (2 * h)
            br = to_c(poisson_rep(Observable("H_k_beta", k, beta=1), F, pt))
            assert abs(dF - br) < 1e-5


def test_closed_form_mj_agrees_with_exact_up_to_gauge():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3)
    t = Fraction(3, 8)
    pa = evolve_exact_mj(pt, PAR2, {1: t})
    pb = evolve_closed_form(pt.to_field(FL2), FlowSpec(2), float(t))
    invariants = [Observable("H_k", k) for k in (1, 2, 3)]
    invariants.append(Observable("tr_Y_mj", 1))
    invariants.append(TracePolynomial(
        [(Fraction(1), (("X", 0), ("X", 1), ("Y", 1), ("Y", 0)))]))
    invariants.append(TracePolynomial([(Fraction(1), (("X", 0), ("X", 1)) * 2)]))
    for F in invariants:
        assert abs(complex(to_c(evaluate(F, pa))) - to_c(evaluate(F, pb))) < 1e-9


def test_closed_form_spherical_promotion():
    pts = random_point(2, 2, PAR2, framing=Framing("spherical", ell=0), seed=9)
    ptsf = pts.to_field(FL2)
    p1 = evolve_closed_form(ptsf, FlowSpec(1), 0.3)
    assert not p1.framing.spherical
    ok, residuals = check_moment_map(p1, PAR2F)
    worst = max(abs(to_c(e)) for blk in residuals for row in blk for e in row)
    assert worst < 1e-9
    p2 = evolve_closed_form(ptsf, FlowSpec(2), 0.3)
    assert p2.framing.spherical


def test_closed_form_rejects_degenerate_spectrum():
    one, zero = FL2.one, FL2.zero
    I2 = ((one, zero), (zero, one))
    col = ((one,), (one,))
    row = ((one, one),)
    bad = CMPoint(FL2, (2, 2), Framing("full"), [I2, I2], [I2, I2],
                  [col, col], [row, row])
    with pytest.raises(IllConditioned):
        evolve_closed_form(bad, FlowSpec(1), 0.1)


# ---------------------------------------------------------------------------
# monitored RK4

def test_rk4_conserves_hamiltonians():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3).to_field(FL2)
    final, records = evolve_rk4(pt, PAR2, FlowSpec(2), 1.0, 1000)
    assert len(records) == 1001
    h0, hN = records[0]["hamiltonians"], records[-1]["hamiltonians"]
    assert max(abs(a - b) for a, b in zip(h0, hN)) < 1e-6
    assert records[-1]["moment_residual"] < 1e-6
    assert final.Y == pt.Y  # Y never moves


def test_rk4_matches_closed_form():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3).to_field(FL2)
    cf = evolve_closed_form(pt, FlowSpec(2), 0.5)
    rk, _ = evolve_rk4(pt, PAR2, FlowSpec(2), 0.5, 300)
    assert max_entry_diff(cf, rk, slots=("X", "v", "w")) < 1e-6


def test_rk4_is_fourth_order():
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3).to_field(FL2)
    cf = evolve_closed_form(pt, FlowSpec(2), 0.5)

    def err(steps):
        rk, _ = evolve_rk4(pt, PAR2, FlowSpec(2), 0.5, steps)
        return max_entry_diff(cf, rk, slots=("X", "v", "w"))

    ratio = err(25) / err(50)
    assert 10.0 < ratio < 24.0


def test_rk4_rejects_nonfinite():
    big = FL2.scalar(complex(1e200))
    one, zero = FL2.one, FL2.zero
    B2 = ((big, zero), (zero, big))
    col = ((one,), (one,))
    row = ((one, one),)
    wild = CMPoint(FL2, (2, 2), Framing("full"), [B2, B2], [B2, B2],
                   [col, col], [row, row])
    with pytest.raises(StepRejected):
        evolve_rk4(wild, PAR2, FlowSpec(3), 1.0, 4)


def test_write_trajectory(tmp_path):
    pt = random_point(2, 2, PAR2, framing=FULL, seed=3).to_field(FL2)
    _, records = evolve_rk4(pt, PAR2, FlowSpec(2), 0.2, 20)
    path = tmp_path / "traj.csv"
    write_trajectory(str(path), records)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 22
    assert rows[0][0] == "t" and rows[0][1] == "x0" and rows[0][-1] == "residual"
    assert float(rows[1][0]) == 0.0
    assert abs(float(rows[-1][0]) - 0.2) < 1e-12
