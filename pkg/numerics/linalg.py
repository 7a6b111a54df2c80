"""Dense float64 linear algebra used by every other package.

Vectors and matrices are plain ``numpy`` arrays of dtype float64. Batched
helpers treat each row of a 2-D array as one sample.
"""
from __future__ import annotations

import numpy as np

from config.settings import NORM_EPS
from errors import DimensionMismatch, ZeroNorm

Vector = np.ndarray
Matrix = np.ndarray


def l2_normalize(v: Vector) -> Vector:
    """Scale ``v`` to unit Euclidean norm."""
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if not norm > NORM_EPS:
        raise ZeroNorm(f"cannot normalize vector with norm {norm:.3e}")
    return v / norm


def l2_normalize_rows(x: Matrix):
    """Normalize every row of ``x``; returns ``(unit_rows, norms)``."""
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1)
    if x.shape[0] and not np.all(norms > NORM_EPS):
        raise ZeroNorm(f"row norm {float(norms.min()):.3e} is too small to normalize")
    return x / norms[:, None], norms


def l2_normalize_rows_total(x: Matrix):
    """Like ``l2_normalize_rows``, but never raises.

    A row with norm at or below ``NORM_EPS`` maps to the first basis vector
    and its norm is reported as ``inf``, so ``normalize_backward`` passes no
    gradient through it.
    """
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1)
    dead = ~(norms > NORM_EPS)
    if not dead.any():
        return x / norms[:, None], norms
    safe = np.where(dead, 1.0, norms)
    unit = x / safe[:, None]
    unit[dead] = 0.0
    unit[dead, 0] = 1.0
    return unit, np.where(dead, np.inf, norms)


def normalize_backward(unit: np.ndarray, norms, grad_out: np.ndarray) -> np.ndarray:
    """Vector-Jacobian product of ``v -> v / ||v||``.

    ``unit`` is the normalized output (row-wise for 2-D input) and ``norms``
    the pre-normalization norms. Returns ``(g - u (u . g)) / ||v||``.
    """
    if unit.shape != grad_out.shape:
        raise DimensionMismatch(f"gradient shape {grad_out.shape} != output shape {unit.shape}")
    if unit.ndim == 1:
        return (grad_out - unit * float(unit @ grad_out)) / norms
    radial = np.sum(unit * grad_out, axis=1, keepdims=True)
    return (grad_out - unit * radial) / np.asarray(norms)[:, None]


def dot(a: Vector, b: Vector) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionMismatch(f"dot of shapes {a.shape} and {b.shape}")
    return float(a @ b)


def matvec(a: Matrix, v: Vector) -> Vector:
    a = np.asarray(a, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if a.ndim != 2 or v.ndim != 1 or a.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"matvec of shapes {a.shape} and {v.shape}")
    return a @ v


def matmul(a: Matrix, b: Matrix) -> Matrix:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"matmul of shapes {a.shape} and {b.shape}")
    return a @ b


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise sum; a 1-D ``b`` broadcasts over the rows of a 2-D ``a``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape and not (a.ndim == 2 and b.ndim == 1 and a.shape[1] == b.shape[0]):
        raise DimensionMismatch(f"add of shapes {a.shape} and {b.shape}")
    return a + b


def affine(x: np.ndarray, weight: Matrix, bias: Vector) -> np.ndarray:
    """``x @ weight + bias`` for a vector or a batch of row vectors."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != weight.shape[0] or bias.shape != (weight.shape[1],):
        raise DimensionMismatch(
            f"affine input {x.shape} does not fit weight {weight.shape} / bias {bias.shape}"
        )
    return x @ weight + bias


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(pre_activation: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    if pre_activation.shape != grad_out.shape:
        raise DimensionMismatch(f"relu grad {grad_out.shape} != input {pre_activation.shape}")
    return grad_out * (pre_activation > 0)


def random_orthogonal(dim: int, rng) -> Matrix:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix)."""
    q, r = np.linalg.qr(rng.normal(0.0, 1.0, size=(dim, dim)))
    return q * np.sign(np.diag(r))
