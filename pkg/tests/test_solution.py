"""Dressing series, closed projections, flows and the verification reports."""

import pytest

from cyckp import matutil as MU
from cyckp.crossed import CrossedElem, idempotent, params_from_lambda
from cyckp.psido import PsiDO, constraint_f0, psido_mul, split
from cyckp.quiver import CMPoint, Framing, check_moment_map, gauge_act, random_point
from cyckp.scalars import CycField
from cyckp.solution import (
    FlowSpec,
    Lk_minus_closed_form,
    Tangent,
    build_L_R,
    build_M,
    build_M_inverse,
    dM_dt,
    flow_vector_field,
    verify_hierarchy,
    verify_spherical,
    verify_zero_curvature,
)

F2 = CycField(2)
P2 = params_from_lambda(2, ("-1/2", "1/3"), field=F2)

F1 = CycField(1)
P1 = params_from_lambda(1, ("-2",), field=F1)
P1_RANK1 = params_from_lambda(1, ("-1",), field=F1)


def stored_zero(op):
    return all(c.is_zero for c in op.coeffs)


def single_particle_m1():
    # X = 3, Y = 5, vw = 1 satisfies the rank-one moment map for lam = -1
    F = F1
    one = MU.mat([[F.scalar(1)]])
    return CMPoint(
        F,
        (1,),
        Framing("full"),
        [MU.mat([[F.scalar(3)]])],
        [MU.mat([[F.scalar(5)]])],
        [one],
        [one],
    )


def test_single_pole_series():
    # the one-particle series is geometric: coeff of y^{-k-1} is -5^k/(x-3)
    pt = single_particle_m1()
    M = build_M(pt, P1_RANK1, depth=5)
    assert M.top == 0
    assert (M.coeff(0) - CrossedElem.one(F1)).is_zero
    for k in range(5):
        expected = CrossedElem.from_rf(F1, F1.ratfunc([-(5**k)], [-3, 1]))
        assert M.coeff(-k - 1) == expected


def test_vacuum_point():
    z = F2.scalar(0)
    pt = CMPoint(
        F2,
        (0, 0),
        Framing("full"),
        [MU.mat_fill(0, 0, z)] * 2,
        [MU.mat_fill(0, 0, z)] * 2,
        [MU.mat_fill(0, 1, z)] * 2,
        [MU.mat_fill(1, 0, z)] * 2,
    )
    one = CrossedElem.one(F2)
    M = build_M(pt, P2, depth=4)
    assert M.top == 0 and M.exact_tail and (M.coeff(0) - one).is_zero
    Mi = build_M_inverse(pt, P2, depth=4)
    assert Mi.top == 0 and Mi.exact_tail and (Mi.coeff(0) - one).is_zero
    L, Rs = build_L_R(pt, P2, depth=4)
    assert L.top == 1 and L.exact_tail
    assert (L.coeff(1) - one).is_zero and L.coeff(0).is_zero
    assert len(Rs) == 1 and Rs[0].exact_tail
    assert stored_zero(Lk_minus_closed_form(pt, P2, 2, depth=4))
    assert stored_zero(dM_dt(pt, P2, FlowSpec(2), depth=4))


@pytest.mark.parametrize(
    "kind,ell,d,n",
    [
        ("full", 0, 1, 2),
        ("spherical", 1, 1, 2),
        ("full_d", 0, 2, 1),
        ("spherical_d", 0, 2, 1),
    ],
)
def test_inverse_identities(kind, ell, d, n):
    depth = 4
    pt = random_point(2, n, P2, Framing(kind, ell, d), seed=7)
    M = build_M(pt, P2, depth=depth)
    Mi = build_M_inverse(pt, P2, depth=depth)
    one = PsiDO.one(F2, d)
    left = psido_mul(Mi, M, P2, depth=depth) - one
    right = psido_mul(M, Mi, P2, depth=depth) - one
    assert stored_zero(left)
    assert stored_zero(right)


def test_inverse_matches_generic_inverter():
    from cyckp.psido import invert_unitriangular

    depth = 4
    pt = random_point(2, 2, P2, Framing("full"), seed=3)
    M = build_M(pt, P2, depth=depth)
    Mi = build_M_inverse(pt, P2, depth=depth)
    alt = invert_unitriangular(M, P2, depth=depth)
    diff = Mi - alt
    assert stored_zero(diff)


def test_inverse_identities_m3():
    F3 = CycField(3)
    P3 = params_from_lambda(3, ("-1/2", "1/3", "-5/6"), field=F3)
    depth = 3
    pt = random_point(3, 1, P3, Framing("full"), seed=2)
    M = build_M(pt, P3, depth=depth)
    Mi = build_M_inverse(pt, P3, depth=depth)
    prod = psido_mul(Mi, M, P3, depth=depth) - PsiDO.one(F3)
    assert stored_zero(prod)


def test_dressed_operator_properties():
    depth = 4
    pt = random_point(2, 1, P2, Framing("full_d", d=2), seed=6)
    L, Rs = build_L_R(pt, P2, depth=depth)
    assert constraint_f0(L)
    one = PsiDO.one(F2, 2)
    assert stored_zero(Rs[0] + Rs[1] - one)
    for a in range(2):
        for b in range(2):
            prod = psido_mul(Rs[a], Rs[b], P2, depth=depth)
            if a == b:
                prod = prod - Rs[a]
            assert stored_zero(prod)
        comm = psido_mul(L, Rs[a], P2, depth=depth) - psido_mul(
            Rs[a], L, P2, depth=depth
        )
        assert stored_zero(comm)


def test_gauge_invariance():
    pt = random_point(2, 1, P2, Framing("full"), seed=4)
    g = [MU.mat([[F2.scalar(3)]]), MU.mat([[F2.scalar("-1/2")]])]
    ptg = gauge_act(pt, g)
    L1, _ = build_L_R(pt, P2, depth=4)
    L2, _ = build_L_R(ptg, P2, depth=4)
    assert stored_zero(L1 - L2)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_closed_form_matches_split(k):
    depth = 4
    pt = random_point(2, 1, P2, Framing("full"), seed=4)
    closed = Lk_minus_closed_form(pt, P2, k, depth=depth)
    L, _ = build_L_R(pt, P2, depth=depth + k + 1)
    Lk = L
    for _ in range(k - 1):
        Lk = psido_mul(Lk, L, P2, depth=depth + k + 1)
    minus, _ = split(Lk)
    diff = closed - minus
    for u in range(0, -depth, -1):
        assert diff.coeff(u - 1).is_zero, f"u={u - 1}"


def test_closed_form_matches_split_multicomponent():
    depth = 3
    k = 2
    pt = random_point(2, 1, P2, Framing("full_d", d=2), seed=6)
    L, Rs = build_L_R(pt, P2, depth=depth + k + 1)
    for beta in (1, 2):
        closed = Lk_minus_closed_form(pt, P2, k, depth=depth, beta=beta)
        Lk = psido_mul(L, L, P2, depth=depth + k + 1)
        op = psido_mul(Lk, Rs[beta - 1], P2, depth=depth + k + 1)
        minus, _ = split(op)
        diff = closed - minus
        for u in range(0, -depth, -1):
            assert diff.coeff(u - 1).is_zero, f"beta={beta} u={u - 1}"


def test_closed_form_shift_symmetry():
    # on a spherically framed point e_i (L^k)_- = (L^k)_- e_{i-k}
    pt = random_point(2, 2, P2, Framing("spherical", ell=1), seed=8)
    for k in (1, 2):
        lk = Lk_minus_closed_form(pt, P2, k, depth=4)
        for i in range(2):
            Ei = PsiDO.from_crossed(idempotent(F2, i))
            Em = PsiDO.from_crossed(idempotent(F2, i - k))
            diff = psido_mul(Ei, lk, P2, depth=8) - psido_mul(lk, Em, P2, depth=8)
            assert stored_zero(diff)


def test_flow_spec_validation():
    from cyckp.errors import ShapeMismatch

    with pytest.raises(ShapeMismatch):
        FlowSpec(0)
    with pytest.raises(ShapeMismatch):
        FlowSpec(2, beta=0)


@pytest.mark.parametrize(
    "kind,ell,d,n",
    [
        ("full", 0, 1, 2),
        ("spherical", 1, 1, 2),
        ("full_d", 0, 2, 1),
    ],
)
def test_flow_preserves_moment_map(kind, ell, d, n):
    from cyckp.solution import _dual_point

    pt = random_point(2, n, P2, Framing(kind, ell, d), seed=9)
    for spec in (FlowSpec(1), FlowSpec(2), FlowSpec(3)):
        tg = flow_vector_field(pt, P2, spec)
        base = tg.point if tg.point is not None else pt
        dp = _dual_point(base, tg)
        dP = params_from_lambda(2, P2.lam, field=dp.field)
        ok, _ = check_moment_map(dp, dP)
        assert ok, f"{kind} k={spec.k}"


def test_spherical_flow_promotion():
    # k not divisible by m pushes v, w off the spherical support, so the
    # tangent is shaped against the promoted (fully framed) point
    pt = random_point(2, 2, P2, Framing("spherical", ell=1), seed=9)
    tg = flow_vector_field(pt, P2, FlowSpec(1))
    assert tg.point.framing.kind == "full"
    # k divisible by m keeps any spherical point on its slice
    tg = flow_vector_field(pt, P2, FlowSpec(2))
    assert tg.point.framing.kind == "spherical"
    assert tg.point.weights == pt.weights


def test_mj_variant_field():
    # k = j m with trivial projector: the alternative field keeps Y, v, w fixed
    pt = random_point(2, 1, P2, Framing("full"), seed=4)
    tg = flow_vector_field(pt, P2, FlowSpec(2))
    mj = tg.mj_variant
    assert mj is not None
    assert all(MU.mat_is_zero(b) for b in mj.v)
    assert all(MU.mat_is_zero(b) for b in mj.w)
    assert all(MU.mat_is_zero(b) for b in mj.Y)
    assert not all(MU.mat_is_zero(b) for b in mj.X)
    # the two fields differ by a gauge direction: identical dM/dt
    d1 = dM_dt(pt, P2, FlowSpec(2), depth=3, tangent=tg)
    d2 = dM_dt(pt, P2, FlowSpec(2), depth=3, tangent=mj)
    assert stored_zero(d1 - d2)
    # no alternative for k not divisible by m
    assert flow_vector_field(pt, P2, FlowSpec(1)).mj_variant is None


@pytest.mark.parametrize(
    "kind,ell,d,beta",
    [
        ("full", 0, 1, None),
        ("spherical", 1, 1, None),
        ("full_d", 0, 2, 1),
        ("full_d", 0, 2, 2),
    ],
)
def test_dressing_derivative_identity(kind, ell, d, beta):
    # dM/dt + (L^k R_beta)_- M = 0 for the matching flow
    depth = 3
    pt = random_point(2, 1 if d == 2 else 2, P2, Framing(kind, ell, d), seed=9)
    for k in (1, 2):
        spec = FlowSpec(k, beta=beta)
        tg = flow_vector_field(pt, P2, spec)
        base = tg.point if tg.point is not None else pt
        Md = dM_dt(pt, P2, spec, depth=depth, tangent=tg)
        proj = Lk_minus_closed_form(base, P2, k, depth=depth + 1, beta=beta)
        M = build_M(base, P2, depth=depth + 2)
        res = Md + psido_mul(proj, M, P2, depth=depth + 2)
        for u in range(-1, -depth, -1):
            assert res.coeff(u).is_zero, f"k={k} u={u}"


def test_verify_hierarchy_report():
    pt = random_point(2, 1, P2, Framing("full"), seed=4)
    rep = verify_hierarchy(pt, P2, FlowSpec(2), depth=3)
    assert rep["status"] == "pass"
    assert rep["max_residual"] == 0.0
    assert {"dressing", "lax", "powers_commute"} <= set(rep["residuals"])


def test_verify_hierarchy_multicomponent():
    pt = random_point(2, 1, P2, Framing("full_d", d=2), seed=6)
    rep = verify_hierarchy(pt, P2, FlowSpec(2, beta=1), depth=3)
    assert rep["status"] == "pass"
    assert {"proj_1", "proj_2"} <= set(rep["residuals"])


def test_verify_zero_curvature_report():
    pt = random_point(2, 1, P2, Framing("full"), seed=4)
    rep = verify_zero_curvature(pt, P2, 1, 2, depth=3)
    assert rep["status"] == "pass"


def test_verify_spherical_report():
    pts = random_point(2, 2, P2, Framing("spherical", ell=1), seed=8)
    rep = verify_spherical(pts, P2, depth=4)
    assert rep["status"] == "pass"

    # a fully framed point breaks the shift symmetry, and the report says so
    ptf = random_point(2, 1, P2, Framing("full"), seed=4)
    rep = verify_spherical(ptf, P2, depth=4)
    assert rep["status"] == "fail"
    assert rep["max_residual"] > 0
    assert rep.get("notes")

    # m = 1 has a single idempotent
    pt1 = random_point(1, 2, P1, Framing("full"), seed=3)
    rep = verify_spherical(pt1, P1, depth=4)
    assert rep["status"] == "pass"
