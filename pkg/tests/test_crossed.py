"""Crossed product of rational functions with the cyclic group."""

import random

from cyckp.crossed import (
    CrossedElem,
    apply_D,
    crossed_mul,
    idempotent,
    is_regular,
    params_from_cm_c,
    params_from_lambda,
    params_from_tau_k,
    theta,
)
from cyckp.scalars import CycField


def _x(field):
    return CrossedElem.x(field)


def _s(field):
    return CrossedElem.s(field)


def test_twist_relation_m2():
    F = CycField(2)
    x, s = _x(F), _s(F)
    assert s * x == -(x * s)
    assert s * s == CrossedElem.one(F)


def test_twist_relation_general():
    for m in (3, 4):
        F = CycField(m)
        x, s = _x(F), _s(F)
        mu_inv = F.root(m - 1)
        assert s * x == (x * s).scale(mu_inv)


def test_idempotents():
    for m in (2, 3):
        F = CycField(m)
        one = CrossedElem.one(F)
        eps = [idempotent(F, i) for i in range(m)]
        total = eps[0]
        for e in eps[1:]:
            total = total + e
        assert total == one
        for i in range(m):
            for j in range(m):
                prod = eps[i] * eps[j]
                assert prod == (eps[i] if i == j else CrossedElem.zero(F))
        x = _x(F)
        for i in range(m):
            assert eps[i] * x == x * eps[(i + 1) % m]


def test_theta_is_the_grading_twist():
    F = CycField(3)
    rng = random.Random(1)

    def rnd():
        comps = []
        for _ in range(3):
            f = F.rf_zero
            for p in range(2):
                f = f + F.coerce_rf(F.scalar(rng.randint(-2, 2))) * F.x ** p
            comps.append(((f,),))
        return CrossedElem(F, tuple(comps))

    for _ in range(10):
        a, b = rnd(), rnd()
        assert theta(a * b) == theta(a) * theta(b)
        assert theta(theta(a, 1), -1) == a
    # on the group algebra theta multiplies s^i by mu^i
    s = _s(F)
    assert theta(s) == s.scale(F.root(1))


def test_D_on_monomials_m2():
    # tau = 1, k = (0, 1/4): D(x) = tau + 2(k0 - k1) s = 1 - s/2
    F = CycField(2)
    p = params_from_tau_k(2, 1, (0, "1/4"), field=F)
    x, s = _x(F), _s(F)
    one = CrossedElem.one(F)
    got = apply_D(x, p)
    want = one - s.scale(F.scalar("1/2"))
    assert got == want
    assert apply_D(s, p).is_zero
    assert apply_D(one, p).is_zero


def test_D_twisted_leibniz():
    F = CycField(3)
    p = params_from_tau_k(3, 1, (0, "1/4", "-1/3"), field=F)
    rng = random.Random(5)

    def rnd():
        comps = []
        for _ in range(3):
            f = F.rf_zero
            for q in range(3):
                f = f + F.coerce_rf(F.scalar(rng.randint(-2, 2))) * F.x ** q
            comps.append(((f,),))
        return CrossedElem(F, tuple(comps))

    for _ in range(8):
        a, b = rnd(), rnd()
        lhs = apply_D(a * b, p)
        rhs = theta(a, -1) * apply_D(b, p) + apply_D(a, p) * b
        assert lhs == rhs


def test_associativity_with_denominators():
    F = CycField(2)
    rng = random.Random(9)
    x = F.x
    one = F.rf_one
    dens = (one, x, x - one)

    def rnd():
        comps = []
        for _ in range(2):
            f = F.rf_zero
            for q in range(2):
                f = f + F.coerce_rf(F.scalar(rng.randint(-2, 2))) * x ** q
            comps.append(((f / rng.choice(dens),),))
        return CrossedElem(F, tuple(comps))

    for _ in range(10):
        a, b, c = rnd(), rnd(), rnd()
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


def test_parameter_dictionaries_roundtrip():
    p = params_from_tau_k(2, 1, (0, "1/4"))
    assert [str(v) for v in p.lam] == ["-1/2", "-3/2"]
    q = params_from_lambda(2, ("-1/2", "-3/2"))
    assert q.tau == p.field.lift(p.tau) or str(q.tau) == str(p.tau)
    assert [str(v) for v in q.k] == [str(v) for v in p.k]
    # c00 is tau in the spherical dictionary
    assert str(p.c00) == "1"


def test_cm_coupling_dictionary():
    # m = 2, c_1 = 1/2: kappa = (1/8, -1/8), kappa sums to zero
    p = params_from_cm_c(2, "1", ("1/2",))
    assert [str(v) for v in p.kappa] == ["1/8", "-1/8"]
    total = p.field.zero
    for v in p.kappa:
        total = total + v
    assert total.is_zero


def test_group_element_coefficients_match_idempotent_weights():
    # sum_i m k_i eps_i expands to sum_j c_j s^j with c_j = sum_i mu^{-ij} k_i
    F = CycField(3)
    p = params_from_tau_k(3, 1, (0, "1/4", "-1/3"), field=F)
    m = 3
    lhs = CrossedElem.zero(F)
    for i in range(m):
        lhs = lhs + idempotent(F, i).scale(F.scalar(3) * p.to_field(F).k[i])
    rhs = CrossedElem.zero(F)
    s = _s(F)
    pw = CrossedElem.one(F)
    for j in range(m):
        rhs = rhs + pw.scale(F.scalar(3) * p.c_gamma[j] / F.scalar(3))
        pw = pw * s
    # c_gamma stores these coefficients directly
    comps_expected = [p.c_gamma[j] for j in range(m)]
    for j in range(m):
        assert lhs.comp(j)[0][0] == F.coerce_rf(comps_expected[j])


def test_regularity_witness():
    # lam = (0, -2): n = 1 with segment lam_1 + ... picks out (i, j) = (1, 2)
    p = params_from_lambda(2, (0, -2))
    ok, witness = is_regular(p)
    assert not ok
    assert witness == (1, 1, 2)
    q = params_from_lambda(2, ("-1/2", "-3/2"))
    ok, witness = is_regular(q)
    assert ok and witness is None


def test_regularity_zero_total():
    p = params_from_lambda(2, (1, -1))
    ok, witness = is_regular(p)
    assert not ok
    assert witness == ("delta",)


def test_regularity_respects_scaling():
    # scaling lambda by a nonzero rational cannot change regularity
    p = params_from_lambda(3, ("-1/2", "1/3", "-5/6"))
    q = params_from_lambda(3, ("-3/2", "1", "-5/2"))
    assert is_regular(p)[0] == is_regular(q)[0]


def test_arg_scale_matches_theta_conjugation():
    # s f s^{-1} acts on coefficients by x -> mu^{-1} x
    F = CycField(4)
    rng = random.Random(2)
    x = F.x

    def rnd():
        comps = []
        for _ in range(4):
            f = F.rf_zero
            for q in range(2):
                f = f + F.coerce_rf(F.scalar(rng.randint(-2, 2))) * x ** q
            comps.append(((f,),))
        return CrossedElem(F, tuple(comps))

    s = _s(F)
    s_inv = s * s * s
    for _ in range(6):
        a = rnd()
        assert s * a * s_inv == a.arg_scale(F.root(3)).scale(F.one)
