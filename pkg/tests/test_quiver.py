"""Moment-map points, the canonical slice, framings and gauge action."""

import random

import pytest

from cyckp import matutil as MU
from cyckp.crossed import params_from_lambda
from cyckp.errors import DegeneratePoint, ShapeMismatch
from cyckp.quiver import (
    CMPoint,
    DarbouxPoint,
    Framing,
    big_matrices,
    check_moment_map,
    dimension,
    gauge_act,
    random_darboux,
    random_point,
    slice_from_darboux,
)
from cyckp.scalars import CycField

P3 = params_from_lambda(3, ("-1/2", "1/3", "-5/6"))


def test_framing_weights():
    assert Framing("full").weights(3) == (1, 1, 1)
    assert Framing("spherical", 1).weights(3) == (0, 1, 0)
    assert Framing("full_d", d=2).weights(3) == (2, 2, 2)
    assert Framing("spherical_d", 2, 3).weights(3) == (0, 0, 3)
    with pytest.raises(ShapeMismatch):
        Framing("nope")


def test_single_particle_slice_m2():
    # one particle, spin concentrated at vertex 0:
    # Y_0 = mu - lam_1/(2 nu), Y_1 = mu + lam_1/(2 nu)
    F = CycField(2)
    p = params_from_lambda(2, ("-1/2", "-3/2"))
    lam1 = p.lam[1]
    nu, mu = F.scalar(3), F.scalar("5/7")
    phi = [((F.one, F.zero),)]
    psi = [((-p.lambda_total,), (F.zero,))]
    dp = DarbouxPoint(F, [nu], [mu], phi, psi, 1)
    pt = slice_from_darboux(dp, p, Framing("spherical", 0))
    two = F.scalar(2)
    assert pt.Y[0][0][0] == mu - lam1 / (two * nu)
    assert pt.Y[1][0][0] == mu + lam1 / (two * nu)
    ok, _ = check_moment_map(pt, p)
    assert ok


def test_untwisted_offdiagonal():
    # m = 1 reduces to (Y)_jk = -(v w)_jk / (nu_j - nu_k)
    p1 = params_from_lambda(1, ("-1",))
    dp = random_darboux(p1, 3, Framing("full"), seed=5)
    pt = slice_from_darboux(dp, p1, Framing("full"))
    ok, _ = check_moment_map(pt, p1)
    assert ok
    vw = MU.mat_mul(pt.v[0], pt.w[0])
    for j in range(3):
        for k in range(3):
            if j != k:
                assert pt.Y[0][j][k] == -vw[j][k] / (dp.nu[j] - dp.nu[k])


def test_moment_map_all_framings():
    for kind, ell, d in (
        ("full", 0, 1),
        ("spherical", 1, 1),
        ("full_d", 0, 2),
        ("spherical_d", 2, 2),
    ):
        fr = Framing(kind, ell, d)
        pt = random_point(3, 2, P3, fr, seed=11)
        ok, _ = check_moment_map(pt, P3)
        assert ok, kind


def test_moment_map_detects_perturbation():
    p1 = params_from_lambda(1, ("-1",))
    pt = random_point(1, 3, p1, Framing("full"), seed=5)
    X = [list(map(list, b)) for b in pt.X]
    X[0][0][1] = X[0][0][1] + p1.field.one
    bad = CMPoint(p1.field, pt.alpha, pt.framing, X, pt.Y, pt.v, pt.w)
    ok, res = check_moment_map(bad, p1)
    assert not ok
    nonzero = [i for i, r in enumerate(res) if not MU.mat_is_zero(r)]
    assert nonzero == [0]


def test_dimension_formula():
    assert dimension(3, (2, 2, 2), Framing("full")) == 12          # 2mn
    assert dimension(3, (2, 2, 2), Framing("spherical", 1)) == 4   # 2n
    assert dimension(3, (2, 2, 2), Framing("full_d", d=2)) == 24   # 2mnd
    assert dimension(2, (3, 3), Framing("spherical_d", 0, 2)) == 12  # 2dn


def test_gauge_preserves_moment_map():
    pt = random_point(3, 2, P3, Framing("full"), seed=11)
    g = [[[1, 1], [0, 1]] for _ in range(3)]
    pt2 = gauge_act(pt, g)
    ok, _ = check_moment_map(pt2, P3)
    assert ok


def test_gauge_composition():
    rng = random.Random(3)
    F = P3.field
    pt = random_point(3, 2, P3, Framing("full"), seed=4)

    def blocks():
        out = []
        for _ in range(3):
            while True:
                rows = [[rng.randint(-2, 2) for _ in range(2)] for _ in range(2)]
                if rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0] != 0:
                    break
            out.append(MU.mat(rows))
        return out

    g, h = blocks(), blocks()
    hg = [MU.mat_mul(MU.mat_map(F.scalar, h[i]), MU.mat_map(F.scalar, g[i]))
          for i in range(3)]
    lhs = gauge_act(gauge_act(pt, g), h)
    rhs = gauge_act(pt, hg)
    for a, b in zip(lhs.X + lhs.Y + lhs.v + lhs.w,
                    rhs.X + rhs.Y + rhs.v + rhs.w):
        assert MU.mat_eq(a, b)


def test_empty_point():
    p = params_from_lambda(2, ("-1", "1/2"))
    pt = random_point(2, 0, p, Framing("full"), seed=0)
    ok, _ = check_moment_map(pt, p)
    assert ok


def test_random_point_deterministic():
    p = params_from_lambda(2, ("-1", "1/2"))
    a = random_point(2, 2, p, Framing("full_d", d=2), seed=9)
    b = random_point(2, 2, p, Framing("full_d", d=2), seed=9)
    for x, y in zip(a.X + a.Y + a.v + a.w, b.X + b.Y + b.v + b.w):
        assert MU.mat_eq(x, y)


def test_degenerate_positions_rejected():
    F = CycField(2)
    p = params_from_lambda(2, ("-1", "-1"), field=F)
    phi = [((F.one, F.zero),), ((F.one, F.zero),)]
    psi = [((F.scalar(2),), (F.zero,)), ((F.scalar(2),), (F.zero,))]
    # nu and -nu collide after raising to the m-th power
    dp = DarbouxPoint(F, [F.scalar(3), F.scalar(-3)], [F.zero, F.zero], phi, psi)
    with pytest.raises(DegeneratePoint):
        slice_from_darboux(dp, p, Framing("spherical", 0))


def test_trace_constraint_enforced():
    F = CycField(2)
    p = params_from_lambda(2, ("-1", "-1"), field=F)
    phi = [((F.one, F.zero),)]
    psi = [((F.one,), (F.zero,))]  # trace 1 != -|lambda| = 2
    dp = DarbouxPoint(F, [F.scalar(3)], [F.zero], phi, psi)
    with pytest.raises(DegeneratePoint):
        slice_from_darboux(dp, p, Framing("spherical", 0))


def test_big_matrices_satisfy_global_identity():
    # Yhat Xhat - Xhat Yhat - Vhat What = blockdiag(lam_i I)
    dp = random_darboux(P3, 2, Framing("spherical", 1), seed=2)
    pt = slice_from_darboux(dp, P3, Framing("spherical", 1))
    Xh, Yh, Vh, Wh = big_matrices(pt)
    F = P3.field
    z = F.zero
    comm = MU.mat_sub(MU.mat_mul(Yh, Xh), MU.mat_mul(Xh, Yh))
    vw = MU.mat_mul_z(Vh, Wh, z, cols=MU.mat_shape(Xh)[1])
    res = MU.mat_sub(comm, vw)
    n = 2
    for r in range(3 * n):
        for c in range(3 * n):
            want = P3.lam[r // n] if r == c else z
            assert res[r][c] == want


def test_point_json_round_trip():
    from cyckp.jsonio import (
        cmpoint_from_json,
        cmpoint_to_json,
        darboux_from_json,
        darboux_to_json,
        point_from_json,
    )

    F = P3.field
    dp = random_darboux(P3, 2, Framing("full"), seed=1)
    dp2 = darboux_from_json(F, darboux_to_json(dp))
    assert dp.nu == dp2.nu and dp.mu == dp2.mu
    for a, b in zip(dp.phi + dp.psi, dp2.phi + dp2.psi):
        assert MU.mat_eq(a, b)
    pt = slice_from_darboux(dp, P3, Framing("full"))
    pt2 = cmpoint_from_json(F, cmpoint_to_json(pt))
    for a, b in zip(pt.X + pt.Y + pt.v + pt.w, pt2.X + pt2.Y + pt2.v + pt2.w):
        assert MU.mat_eq(a, b)
    pt3 = point_from_json(F, cmpoint_to_json(pt))
    assert isinstance(pt3, CMPoint)
