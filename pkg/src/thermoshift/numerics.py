"""Shared numerical helpers: stable log-sums, scaled matrix products, power iteration.

All reductions here are order-insensitive (math.fsum rounds the exact sum),
so results do not depend on chunking or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NEG_INF = float("-inf")


def logsumexp(values) -> float:
    """Stable log of a sum of exponentials.

    Accepts any iterable of floats, possibly containing -inf. Returns -inf
    for an empty input or when every term is -inf.
    """
    vals = [v for v in values if v != NEG_INF]
    if not vals:
        return NEG_INF
    hi = max(vals)
    if hi == float("inf"):
        return hi
    return hi + math.log(math.fsum(math.exp(v - hi) for v in vals))


def log_mean(values) -> float:
    """log of the arithmetic mean of exp(values)."""
    n = len(values)
    return logsumexp(values) - math.log(n)


@dataclass(frozen=True)
class ScaledMatrix:
    """Nonnegative matrix stored as mat * exp(log_scale) to avoid overflow."""

    mat: np.ndarray
    log_scale: float

    @staticmethod
    def from_array(a: np.ndarray) -> "ScaledMatrix":
        a = np.asarray(a, dtype=float)
        s = a.sum()
        if s <= 0 or not np.isfinite(s):
            raise ValueError("matrix must have a positive finite entry sum")
        return ScaledMatrix(a / s, math.log(s))

    def matmul(self, other: "ScaledMatrix") -> "ScaledMatrix":
        prod = self.mat @ other.mat
        s = prod.sum()
        if s <= 0:
            # All-zero product: represent as exact zero with -inf scale.
            return ScaledMatrix(np.zeros_like(prod), NEG_INF)
        return ScaledMatrix(prod / s, self.log_scale + other.log_scale + math.log(s))

    def log_entry(self, i: int, j: int) -> float:
        v = self.mat[i, j]
        if v <= 0:
            return NEG_INF
        return self.log_scale + math.log(v)

    def log_entry_sum(self) -> float:
        s = self.mat.sum()
        if s <= 0:
            return NEG_INF
        return self.log_scale + math.log(s)


def scaled_power_diagonal(W: np.ndarray, index: int, n_max: int) -> list[float]:
    """log of (W^n)[index, index] for n = 1..n_max via renormalized products."""
    out = []
    P = ScaledMatrix.from_array(np.eye(W.shape[0]))
    step = ScaledMatrix.from_array(W)
    for _ in range(n_max):
        P = P.matmul(step)
        out.append(P.log_entry(index, index))
    return out


def int_matrix_power(A, n: int):
    """Exact integer matrix power using Python big ints (no overflow)."""
    size = len(A)
    base = [[int(x) for x in row] for row in A]

    def mul(X, Y):
        return [
            [sum(X[i][k] * Y[k][j] for k in range(size)) for j in range(size)]
            for i in range(size)
        ]

    result = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    while n > 0:
        if n & 1:
            result = mul(result, base)
        base_needed = n >> 1
        if base_needed:
            base = mul(base, base)
        n >>= 1
    return result


class PowerIterationError(RuntimeError):
    pass


def perron_data(W: np.ndarray, tol: float = 1e-13, max_iter: int = 500_000):
    """Perron root and positive left/right eigenvectors of a primitive matrix.

    Plain power iteration on W and W.T until the iterates move less than tol
    in sup norm; the returned root is the two-sided Rayleigh quotient, which
    squares the eigenvector error. Vectors are normalized to unit sum.
    """
    W = np.asarray(W, dtype=float)
    m = W.shape[0]
    v = np.full(m, 1.0 / m)
    u = np.full(m, 1.0 / m)
    for _ in range(max_iter):
        v_new = W @ v
        sv = v_new.sum()
        if sv <= 0:
            raise PowerIterationError("matrix is not primitive: iterate collapsed")
        v_new /= sv
        u_new = W.T @ u
        u_new /= u_new.sum()
        moved = max(np.abs(v_new - v).max(), np.abs(u_new - u).max())
        v, u = v_new, u_new
        if moved <= tol:
            break
    else:
        raise PowerIterationError(
            f"power iteration did not reach tol={tol} in {max_iter} steps"
        )
    rho = float(u @ W @ v) / float(u @ v)
    return rho, v, u
