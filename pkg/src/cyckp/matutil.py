"""Tiny dense-matrix helpers over any scalar-like entries.

Matrices are tuples of row tuples.  Entries only need the arithmetic
dunders, so the same helpers serve field scalars, rational functions,
dual numbers and crossed-product elements alike.
"""

from __future__ import annotations

from cyckp.errors import ShapeMismatch


def mat(rows):
    return tuple(tuple(r) for r in rows)


def mat_shape(A):
    return (len(A), len(A[0]) if A else 0)


def mat_shape_ok(A, r, c):
    # a zero-row matrix is a bare (); its column count is unknowable
    return len(A) == r and (r == 0 or len(A[0]) == c)


def mat_fill(r, c, value):
    return tuple(tuple(value for _ in range(c)) for _ in range(r))


def mat_identity(n, one, zero):
    return tuple(
        tuple(one if i == j else zero for j in range(n)) for i in range(n)
    )


def mat_add(A, B):
    if mat_shape(A) != mat_shape(B):
        raise ShapeMismatch("matrix addition shape mismatch")
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_sub(A, B):
    if mat_shape(A) != mat_shape(B):
        raise ShapeMismatch("matrix subtraction shape mismatch")
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_neg(A):
    return tuple(tuple(-a for a in r) for r in A)


def mat_scale(A, s):
    return tuple(tuple(s * a for a in r) for r in A)


def mat_mul(A, B):
    ra, ca = mat_shape(A)
    rb, cb = mat_shape(B)
    if ca != rb:
        raise ShapeMismatch(f"matrix product shapes {ra}x{ca} and {rb}x{cb}")
    if ca == 0:
        raise ShapeMismatch("inner dimension zero needs an explicit zero element")
    Bt = tuple(zip(*B))
    out = []
    for row in A:
        orow = []
        for col in Bt:
            it = iter(zip(row, col))
            a, b = next(it)
            acc = a * b
            for a, b in it:
                acc = acc + a * b
            orow.append(acc)
        out.append(tuple(orow))
    return tuple(out)


def mat_mul_z(A, B, zero, cols=None):
    """Matrix product that tolerates empty dimensions.

    When B has no rows its width is unknowable from the data, so `cols`
    pins the output width for that case.
    """
    ra = len(A)
    if ra == 0:
        return ()
    ca = len(A[0])
    rb = len(B)
    if ca != rb:
        raise ShapeMismatch(f"matrix product inner dimensions {ca} and {rb}")
    if ca == 0:
        return mat_fill(ra, cols if cols is not None else 0, zero)
    return mat_mul(A, B)


def mat_transpose(A):
    return tuple(zip(*A)) if A else ()


def mat_trace(A, zero):
    n = len(A)
    acc = zero
    for i in range(n):
        acc = acc + A[i][i]
    return acc


def mat_eq(A, B):
    return mat_shape(A) == mat_shape(B) and all(
        a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb)
    )


def mat_is_zero(A):
    return all(not e for r in A for e in r)


def mat_map(f, A):
    return tuple(tuple(f(e) for e in r) for r in A)
