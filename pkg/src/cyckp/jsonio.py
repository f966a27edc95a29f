"""JSON encodings for every value the CLI reads or writes.

Scalars: exact rationals as "p/q" strings, cyclotomic values as
{"m": int, "coeffs": ["p/q", ...]}, complex floats as [re, im].
Rational functions: {"num": [scalar], "den": [scalar]}, coefficient
lists lowest degree first.  Everything larger nests these.
"""

from __future__ import annotations

from cyckp import kernel as K
from cyckp import matutil as MU
from cyckp.crossed import (
    CrossedElem,
    Params,
    params_from_cm_c,
    params_from_lambda,
    params_from_tau_k,
)
from cyckp.errors import ShapeMismatch
from cyckp.psido import PsiDO
from cyckp.quiver import CMPoint, DarbouxPoint, Framing
from cyckp.scalars import CycField, CycScalar, RatFunc


# ---------------------------------------------------------------------------
# scalars

def scalar_to_json(s):
    raw = s.raw
    if s.field.is_exact:
        # raw is a bare rational when the field needs no extension
        if not isinstance(raw, tuple):
            return K.q_to_str(raw)
        coeffs = [K.q_to_str(c) for c in raw]
        if all(c == "0" for c in coeffs[1:]):
            return coeffs[0]
        return {"m": s.field.m, "coeffs": coeffs}
    return [raw.real, raw.imag]


def scalar_from_json(field, blob):
    if isinstance(blob, dict):
        if blob.get("m", field.m) != field.m:
            raise ShapeMismatch("cyclotomic order mismatch")
        acc = field.zero
        for r, c in enumerate(blob["coeffs"]):
            acc = acc + field.scalar(c) * field.root(1) ** r
        return acc
    if isinstance(blob, list):
        return field.scalar(complex(blob[0], blob[1]))
    return field.scalar(blob)


def ratfunc_to_json(f):
    field = f.field
    wrap = lambda raw: scalar_to_json(CycScalar(field, raw))
    return {"num": [wrap(c) for c in f.num], "den": [wrap(c) for c in f.den]}


def ratfunc_from_json(field, blob):
    num = [scalar_from_json(field, c) for c in blob["num"]]
    den = [scalar_from_json(field, c) for c in blob["den"]]
    return field.ratfunc(num, den)


# ---------------------------------------------------------------------------
# crossed product and operators

def crossed_to_json(f):
    return {
        "comps": [
            [[ratfunc_to_json(e) for e in row] for row in comp]
            for comp in f.comps
        ]
    }


def crossed_from_json(field, blob):
    comps = tuple(
        MU.mat([[ratfunc_from_json(field, e) for e in row] for row in comp])
        for comp in blob["comps"]
    )
    return CrossedElem(field, comps)


def psido_to_json(S):
    blob = {
        "top": S.top,
        "valid_to": S.valid_to,
        "coeffs": [crossed_to_json(c) for c in S.coeffs],
    }
    if S.exact_tail:
        blob["exact_tail"] = True
    return blob


def psido_from_json(field, blob):
    coeffs = [crossed_from_json(field, c) for c in blob["coeffs"]]
    return PsiDO(field, blob["top"], coeffs, exact_tail=blob.get("exact_tail", False))


# ---------------------------------------------------------------------------
# parameters

def params_to_json(p):
    return {
        "m": p.m,
        "tau": scalar_to_json(p.tau),
        "k": [scalar_to_json(v) for v in p.k],
        "lambda": [scalar_to_json(v) for v in p.lam],
        "cm_c": {
            "c00": scalar_to_json(p.c00),
            "c": [scalar_to_json(v) for v in p.c_wreath[1:]],
        },
    }


def params_from_json(blob, field=None, exact=True):
    m = int(blob["m"])
    from cyckp.scalars import CycField

    field = field or CycField(m, exact=exact)
    pick = lambda b: scalar_from_json(field, b)
    if "lambda" in blob:
        return params_from_lambda(m, [pick(v) for v in blob["lambda"]], field=field)
    if "tau" in blob and "k" in blob:
        return params_from_tau_k(m, pick(blob["tau"]), [pick(v) for v in blob["k"]], field=field)
    if "cm_c" in blob:
        cm = blob["cm_c"]
        return params_from_cm_c(m, pick(cm["c00"]), [pick(v) for v in cm["c"]], field=field)
    raise ShapeMismatch("no generating block (lambda, tau+k, or cm_c) present")


# ---------------------------------------------------------------------------
# moment-map points

def _matrix_to_json(A):
    return [[scalar_to_json(e) for e in row] for row in A]


def _matrix_from_json(field, rows, r, c):
    A = MU.mat([[scalar_from_json(field, e) for e in row] for row in rows])
    if not MU.mat_shape_ok(A, r, c):
        raise ShapeMismatch(f"expected a {r}x{c} block")
    return A


def framing_to_json(fr):
    return {"kind": fr.kind, "ell": fr.ell, "d": fr.d}


def framing_from_json(blob):
    return Framing(blob["kind"], blob.get("ell", 0), blob.get("d", 1))


def cmpoint_to_json(pt):
    return {
        "m": pt.m,
        "alpha": list(pt.alpha),
        "framing": framing_to_json(pt.framing),
        "X": [_matrix_to_json(b) for b in pt.X],
        "Y": [_matrix_to_json(b) for b in pt.Y],
        "v": [_matrix_to_json(b) for b in pt.v],
        "w": [_matrix_to_json(b) for b in pt.w],
    }


def cmpoint_from_json(field, blob):
    m = field.m
    alpha = [int(a) for a in blob["alpha"]]
    fr = framing_from_json(blob["framing"])
    wts = fr.weights(m)
    X = [_matrix_from_json(field, blob["X"][i], alpha[(i + 1) % m], alpha[i])
         for i in range(m)]
    Y = [_matrix_from_json(field, blob["Y"][i], alpha[i], alpha[(i + 1) % m])
         for i in range(m)]
    v = [_matrix_from_json(field, blob["v"][i], alpha[i], wts[i])
         for i in range(m)]
    w = [_matrix_from_json(field, blob["w"][i], wts[i], alpha[i])
         for i in range(m)]
    return CMPoint(field, alpha, fr, X, Y, v, w)


def darboux_to_json(dp):
    return {
        "m": dp.m,
        "d": dp.d,
        "nu": [scalar_to_json(v) for v in dp.nu],
        "mu": [scalar_to_json(v) for v in dp.mu],
        "phi": [_matrix_to_json(b) for b in dp.phi],
        "psi": [_matrix_to_json(b) for b in dp.psi],
    }


def darboux_from_json(field, blob):
    d = int(blob.get("d", 1))
    nu = [scalar_from_json(field, v) for v in blob["nu"]]
    mu = [scalar_from_json(field, v) for v in blob["mu"]]
    phi = [_matrix_from_json(field, b, d, field.m) for b in blob["phi"]]
    psi = [_matrix_from_json(field, b, field.m, d) for b in blob["psi"]]
    return DarbouxPoint(field, nu, mu, phi, psi, d)


def point_from_json(field, blob):
    """Accept either point flavour and convert on sight."""
    if "X" in blob:
        return cmpoint_from_json(field, blob)
    return darboux_from_json(field, blob)
