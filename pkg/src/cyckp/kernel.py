"""Kernel selection: compiled extension when available, pure Python otherwise.

Set CYCKP_PURE=1 to force the pure implementation (the benchmark suite
imports both explicitly).
"""

import os

if os.environ.get("CYCKP_PURE") == "1":
    from cyckp import _kernel_py as _impl
else:
    try:
        from cyckp import _speedups as _impl  # type: ignore[attr-defined]

        if not hasattr(_impl, "KERNEL_KIND"):  # stale or partial build
            raise ImportError("compiled kernel is incomplete")
    except ImportError:
        from cyckp import _kernel_py as _impl

KERNEL_KIND = _impl.KERNEL_KIND

QQ = _impl.QQ
RATIONAL = _impl.RATIONAL
CYCLOTOMIC = _impl.CYCLOTOMIC
FLOATC = _impl.FLOATC

q_from_str = _impl.q_from_str
q_to_str = _impl.q_to_str
cyclotomic_poly_q = _impl.cyclotomic_poly_q
make_exact_context = _impl.make_exact_context
make_float_context = _impl.make_float_context

s_add = _impl.s_add
s_sub = _impl.s_sub
s_neg = _impl.s_neg
s_mul = _impl.s_mul
s_inv = _impl.s_inv
s_div = _impl.s_div
s_is0 = _impl.s_is0
s_eq = _impl.s_eq
s_from_int = _impl.s_from_int
s_from_q = _impl.s_from_q
s_root = _impl.s_root
s_pow = _impl.s_pow
s_abs2 = _impl.s_abs2

p_trim = _impl.p_trim
p_one = _impl.p_one
p_x = _impl.p_x
p_add = _impl.p_add
p_sub = _impl.p_sub
p_neg = _impl.p_neg
p_scale = _impl.p_scale
p_mul = _impl.p_mul
p_divmod = _impl.p_divmod
p_exact_div = _impl.p_exact_div
p_monic = _impl.p_monic
p_gcd = _impl.p_gcd
p_diff = _impl.p_diff
p_eval = _impl.p_eval
p_scale_arg = _impl.p_scale_arg
p_shift_up = _impl.p_shift_up
p_trim_tol = _impl.p_trim_tol

rf_normalize = _impl.rf_normalize
rf_add = _impl.rf_add
rf_sub = _impl.rf_sub
rf_mul = _impl.rf_mul
rf_div = _impl.rf_div
rf_diff = _impl.rf_diff
rf_scale_arg = _impl.rf_scale_arg
