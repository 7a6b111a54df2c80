"""Deterministic float64 numerics: normalization, affine algebra, RNG, gradient oracle."""
from numerics.gradcheck import finite_diff_grad, finite_diff_jacobian, relative_error
from numerics.linalg import (
    add,
    affine,
    dot,
    l2_normalize,
    l2_normalize_rows,
    l2_normalize_rows_total,
    matmul,
    matvec,
    normalize_backward,
    relu,
    relu_backward,
)
from numerics.rng import SeededRng

__all__ = [
    "SeededRng",
    "add",
    "affine",
    "dot",
    "finite_diff_grad",
    "finite_diff_jacobian",
    "l2_normalize",
    "l2_normalize_rows",
    "l2_normalize_rows_total",
    "matmul",
    "matvec",
    "normalize_backward",
    "relative_error",
    "relu",
    "relu_backward",
]
