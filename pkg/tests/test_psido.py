"""Truncated pseudodifferential calculus over the crossed product."""

import random

import pytest

from cyckp.crossed import CrossedElem, idempotent, params_from_tau_k
from cyckp.errors import DepthExhausted, NotUnitriangular
from cyckp.psido import (
    PsiDO,
    PsiRing,
    constraint_f0,
    dunkl_y,
    invert_unitriangular,
    psido_mul,
    psido_mul_alt,
    split,
)
from cyckp.scalars import CycField

P2 = params_from_tau_k(2, 1, (0, "1/4"))
F2 = P2.field


def _poly_op(field, rng, top, depth, deg=1, exact=False):
    coeffs = []
    for _ in range(depth + 1):
        comps = []
        for _ in range(field.m):
            f = field.rf_zero
            for p in range(deg + 1):
                c = rng.randint(-3, 3)
                if c:
                    f = f + field.coerce_rf(field.scalar(c)) * field.x ** p
            comps.append(((f,),))
        coeffs.append(CrossedElem(field, tuple(comps)))
    return PsiDO(field, top, coeffs, exact_tail=exact)


def test_y_inverse_two_sided():
    y = PsiDO.y_power(F2, 1)
    yinv = PsiDO.y_power(F2, -1)
    one = PsiDO.one(F2)
    assert psido_mul(y, yinv, P2) == one
    assert psido_mul(yinv, y, P2) == one


def test_y_inverse_x_terminates():
    # y^-1 x = x y^-1 - (tau - 2(k0-k1) s) y^-2 exactly, for m = 2
    yinv = PsiDO.y_power(F2, -1)
    x = PsiDO.from_crossed(CrossedElem.x(F2))
    prod = psido_mul(yinv, x, P2)
    assert prod.exact_tail
    assert prod.top == -1
    assert prod.coeff(-1) == CrossedElem.x(F2)
    s = CrossedElem.s(F2)
    one = CrossedElem.one(F2)
    # coefficient is -theta(D(x)) = -(1 + s/2) for tau=1, k=(0,1/4)
    want = -(one + s.scale(F2.scalar("1/2")))
    assert prod.coeff(-2) == want
    assert prod.coeff(-3).is_zero
    # oracle: multiply back by y on the left
    y = PsiDO.y_power(F2, 1)
    back = psido_mul(y, prod, P2)
    assert back == x


def test_heisenberg_relation():
    # x y - y x = sum_i lam_i eps_i
    for m in (1, 2, 3):
        p = params_from_tau_k(m, 1, tuple([0] + ["1/4"] * (m - 1)))
        F = p.field
        x = PsiDO.from_crossed(CrossedElem.x(F))
        y = PsiDO.y_power(F, 1)
        comm = psido_mul(x, y, p) - psido_mul(y, x, p)
        want = CrossedElem.zero(F)
        for i in range(m):
            want = want + idempotent(F, i).scale(p.lam[i])
        assert comm.top == 0
        assert comm.coeff(0) == want
        assert comm.exact_tail


def test_idempotent_shift_past_y():
    F = CycField(3)
    p = params_from_tau_k(3, 1, (0, "1/4", "-1/3"), field=F)
    y = PsiDO.y_power(F, 1)
    for i in range(3):
        e = PsiDO.from_crossed(idempotent(F, i))
        lhs = psido_mul(e, y, p)
        rhs = psido_mul(y, PsiDO.from_crossed(idempotent(F, (i - 1) % 3)), p)
        assert lhs == rhs


def test_m1_commutator_is_derivative():
    # tau d/dx: [y, f] = tau f'
    p = params_from_tau_k(1, "3/2", (0,))
    F = p.field
    x = F.x
    f = F.coerce_rf(F.scalar(2)) * x ** 3 - x
    fo = PsiDO.from_crossed(CrossedElem.from_rf(F, f))
    y = PsiDO.y_power(F, 1)
    comm = psido_mul(y, fo, p) - psido_mul(fo, y, p)
    want = CrossedElem.from_rf(F, f.diff() * F.coerce_rf(F.scalar("3/2")))
    assert comm.top == 0 and comm.coeff(0) == want


def test_routes_agree():
    rng = random.Random(4)
    for m in (1, 2, 3):
        p = params_from_tau_k(m, 1, tuple([0] + ["1/3"] * (m - 1)))
        F = p.field
        for _ in range(8):
            A = _poly_op(F, rng, rng.randint(-1, 2), 3)
            B = _poly_op(F, rng, rng.randint(-1, 2), 3)
            r1 = psido_mul(A, B, p)
            r2 = psido_mul_alt(A, B, p)
            assert r1.agrees(r2)


def test_associativity():
    rng = random.Random(8)
    for m in (1, 2):
        p = params_from_tau_k(m, 1, tuple([0] + ["1/4"] * (m - 1)))
        F = p.field
        for _ in range(6):
            A = _poly_op(F, rng, rng.randint(-1, 1), 2)
            B = _poly_op(F, rng, rng.randint(-1, 1), 2)
            C = _poly_op(F, rng, rng.randint(-1, 1), 2)
            left = psido_mul(psido_mul(A, B, p), C, p)
            right = psido_mul(A, psido_mul(B, C, p), p)
            assert left.agrees(right)


def test_deep_multiply_then_truncate():
    rng = random.Random(13)
    for _ in range(10):
        A = _poly_op(F2, rng, rng.randint(-1, 2), 4)
        B = _poly_op(F2, rng, rng.randint(-1, 2), 4)
        big = psido_mul(A, B, P2, depth=10)
        small = psido_mul(A, B, P2, depth=6)
        assert big.truncate(6).agrees(small)


def test_validity_tracking_blocks_unknown_coefficients():
    # an inexact tail times y^-1 shifts the trustworthy window down
    rng = random.Random(3)
    A = _poly_op(F2, rng, 0, 2)  # valid to -2
    yinv = PsiDO.y_power(F2, -1)
    prod = psido_mul(A, yinv, P2)
    assert prod.valid_to == A.valid_to - 1
    with pytest.raises(DepthExhausted):
        prod.coeff(prod.valid_to - 1)


def test_truncate_keeps_exact_tail_only_when_zero():
    y = PsiDO.y_power(F2, 1)
    t = y.truncate(0)
    assert t.exact_tail  # dropped nothing nonzero
    x = PsiDO.from_crossed(CrossedElem.x(F2))
    prod = psido_mul(PsiDO.y_power(F2, -1), x, P2)
    t2 = prod.truncate(0)
    assert not t2.exact_tail


def test_split_plus_minus():
    rng = random.Random(6)
    A = _poly_op(F2, rng, 2, 5)
    minus, plus = split(A)
    assert plus.top == 2
    assert minus.top <= -1
    back = plus + minus
    assert back.agrees(A)
    # splitting the plus part again changes nothing
    m2, p2 = split(plus)
    assert m2.is_zero and p2 == plus


def test_split_respects_multiplication_by_plus_ops():
    # (S f)_- = (S_- f)_- for differential-operator f
    rng = random.Random(7)
    S = _poly_op(F2, rng, 1, 4)
    f = _poly_op(F2, rng, 1, 1, exact=True)
    fplus = split(f)[1]
    lhs = split(psido_mul(S, fplus, P2))[0]
    rhs = split(psido_mul(split(S)[0], fplus, P2))[0]
    assert lhs.agrees(rhs)


def test_split_refuses_unknown_negative_part():
    rng = random.Random(7)
    f = _poly_op(F2, rng, 1, 1)  # inexact tail, nothing stored below y^0
    with pytest.raises(DepthExhausted):
        split(f)


def test_invert_unitriangular():
    # M = 1 + w1 y^-1: inverse starts 1 - w1 y^-1 + w1 theta(w1) y^-2
    from cyckp.crossed import theta

    F = F2
    x = F.x
    w1 = CrossedElem.from_rf(F, F.rf_one / x)
    coeffs = [CrossedElem.one(F), w1]
    M = PsiDO(F, 0, coeffs, exact_tail=True)
    Minv = invert_unitriangular(M, P2, depth=4)
    assert Minv.coeff(0) == CrossedElem.one(F)
    assert Minv.coeff(-1) == -w1
    assert Minv.coeff(-2) == crossed_w1_pair(F, w1)
    prod = psido_mul(M, Minv, P2, depth=4)
    assert prod.truncate(4).agrees(PsiDO.one(F))
    prod2 = psido_mul(Minv, M, P2, depth=4)
    assert prod2.truncate(4).agrees(PsiDO.one(F))


def crossed_w1_pair(F, w1):
    from cyckp.crossed import theta

    return w1 * theta(w1)


def test_invert_rejects_non_unitriangular():
    y = PsiDO.y_power(F2, 1)
    with pytest.raises(NotUnitriangular):
        invert_unitriangular(y, P2)
    two = PsiDO.from_crossed(CrossedElem.one(F2).scale(F2.scalar(2)))
    with pytest.raises(NotUnitriangular):
        invert_unitriangular(two, P2)


def test_dunkl_y_and_constraint():
    y = dunkl_y(P2)
    assert y.top == 1
    assert constraint_f0(y)
    s_over_x = CrossedElem.s(F2) * CrossedElem.from_rf(F2, F2.rf_one / F2.x)
    ok = PsiDO(F2, 1, [y.coeff(1), s_over_x], exact_tail=True)
    assert constraint_f0(ok)
    bad = PsiDO(F2, 1, [y.coeff(1), CrossedElem.one(F2)], exact_tail=True)
    assert not constraint_f0(bad)


def test_ring_helper():
    R = PsiRing(P2, depth=6)
    y = R.y()
    a = R.mul(y, y, y)
    assert a.top == 3
    assert R.power(y, 3) == a
    c = R.commutator(PsiDO.from_crossed(CrossedElem.x(F2)), y)
    assert c.top == 0


def test_json_round_trip():
    from cyckp.jsonio import psido_from_json, psido_to_json

    rng = random.Random(15)
    A = _poly_op(F2, rng, 1, 3)
    blob = psido_to_json(A)
    B = psido_from_json(F2, blob)
    assert A == B
