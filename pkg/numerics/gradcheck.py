"""Finite-difference gradient oracle."""
from __future__ import annotations

from typing import Callable

import numpy as np

from config.settings import FINITE_DIFF_STEP
from errors import NonFiniteFunction


def finite_diff_grad(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    h: float = FINITE_DIFF_STEP,
) -> np.ndarray:
    """Central-difference gradient of scalar ``f`` at ``x``.

    Args:
        f: Scalar function of a float64 vector
        x: Point to differentiate at (left unchanged)
        h: Step size, must be positive

    Returns:
        Vector of ``(f(x + h e_i) - f(x - h e_i)) / (2h)``
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    probe = x.copy()
    for i in range(x.size):
        original = probe.flat[i]
        probe.flat[i] = original + h
        f_plus = float(f(probe))
        probe.flat[i] = original - h
        f_minus = float(f(probe))
        probe.flat[i] = original
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NonFiniteFunction(f"function is not finite around coordinate {i}")
        grad.flat[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    """``||a - n|| / max(||a||, ||n||, floor)``."""
    analytic = np.ravel(analytic)
    numeric = np.ravel(numeric)
    scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)), floor)
    return float(np.linalg.norm(analytic - numeric)) / scale


def finite_diff_jacobian(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    h: float = FINITE_DIFF_STEP,
) -> np.ndarray:
    """Central-difference Jacobian ``(m, n)`` of a vector-valued ``f``.

    Row ``j`` equals ``finite_diff_grad`` of output ``j``; one pair of
    evaluations per coordinate serves every output.
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    x = np.array(x, dtype=np.float64)
    probe = x.copy()
    columns = []
    for i in range(x.size):
        original = probe.flat[i]
        probe.flat[i] = original + h
        f_plus = np.asarray(f(probe), dtype=np.float64)
        probe.flat[i] = original - h
        f_minus = np.asarray(f(probe), dtype=np.float64)
        probe.flat[i] = original
        if not (np.all(np.isfinite(f_plus)) and np.all(np.isfinite(f_minus))):
            raise NonFiniteFunction(f"function is not finite around coordinate {i}")
        columns.append((f_plus - f_minus) / (2.0 * h))
    return np.stack(columns, axis=1)
