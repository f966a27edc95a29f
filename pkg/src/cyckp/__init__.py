"""cyckp: exact workbench for KP-type hierarchies built on cyclic quivers.

The tower, bottom to top:

* scalars  -- Q(zeta_m) and rational functions in x, exact or float
* crossed  -- the crossed product C(x) * Z_m and its Dunkl data
* psido    -- truncated pseudodifferential operators in y over the crossed
              product, with two independent multiplication routines
* quiver   -- cyclic-quiver representation data, moment maps, Darboux slices
* solution -- the dressing element M, M^{-1}, the dressed operator L and
              the closed forms for its negative parts
* hamilton -- Hamiltonians, Poisson brackets, flows and integrators
* dunkl    -- the wreath-product model and its trace dictionary
"""

from cyckp.kernel import KERNEL_KIND
from cyckp.errors import (
    CyckpError,
    DegeneratePoint,
    DepthExhausted,
    DivisionByZero,
    IllConditioned,
    NotUnitriangular,
    ShapeMismatch,
    SingularMatrix,
    StepRejected,
    UnsupportedObservable,
)
from cyckp.scalars import (
    CycField,
    CycScalar,
    RatFunc,
    cyclotomic_polynomial,
    matrix_inverse_ratfunc,
    ratfunc_arith,
    ratfunc_diff,
    root_of_unity,
)
from cyckp.dual import DualField

__version__ = "0.1.0"

__all__ = [
    "KERNEL_KIND",
    "CyckpError",
    "DegeneratePoint",
    "DepthExhausted",
    "DivisionByZero",
    "IllConditioned",
    "NotUnitriangular",
    "ShapeMismatch",
    "SingularMatrix",
    "StepRejected",
    "UnsupportedObservable",
    "CycField",
    "CycScalar",
    "RatFunc",
    "DualField",
    "cyclotomic_polynomial",
    "matrix_inverse_ratfunc",
    "ratfunc_arith",
    "ratfunc_diff",
    "root_of_unity",
    "__version__",
]
