"""Top Lyapunov exponents of positive matrix products and their pressure curves.

A matrix family assigns an entrywise-positive d x d matrix to every symbol.
The norm of a matrix is the sum of its entries, so the norm of a product
along a path is a word function that the partition machinery can treat like
any other potential. Exponents are estimated by averaging renormalized
products over paths sampled from an explicit Markov measure; scalar families
are additive, so their exponent is computed in closed form instead.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .gibbs import MeasureKindError
from .numerics import ScaledMatrix
from .potentials import (
    check_cone_condition,
    cocycle_potential,
    summability_report,
)
from .pressure import PressureEstimate, pressure_curve
from .shift_core import TransitionModel


class MatrixFamily:
    """Symbol-indexed family of entrywise-positive square matrices.

    `entries` may be a dict keyed by symbol, a sequence (symbol k maps to
    entry k-1), or a callable for countable families. Finite families are
    validated eagerly; callables are validated on first access and cached.
    Negative entries are rejected; zeros are allowed (identity families are
    legitimate exponent inputs) but pressure work additionally runs the cone
    check, which demands strictly positive entries.
    `norm_tail` is an optional closed-form bound for the summed norms of the
    symbols beyond a truncation, with the same contract as potential tails.
    """

    def __init__(
        self,
        d: int,
        entries: Union[dict, Sequence, Callable[[int], np.ndarray]],
        norm_tail: Optional[Callable[[int], float]] = None,
        name: str = "matrix-family",
    ):
        if d < 1:
            raise ValueError("matrix dimension must be at least 1")
        self.d = int(d)
        self.norm_tail = norm_tail
        self.name = name
        self._cache: dict[int, np.ndarray] = {}
        if callable(entries):
            self._lookup = entries
            self._symbols = None
        else:
            if isinstance(entries, dict):
                table = {int(a): entries[a] for a in entries}
            else:
                table = {k + 1: a for k, a in enumerate(entries)}
            self._lookup = table.__getitem__
            self._symbols = tuple(sorted(table))
            for a in self._symbols:
                self.matrix(a)

    @property
    def symbols(self) -> Optional[tuple[int, ...]]:
        """Symbols of a finite family, or None for callable families."""
        return self._symbols

    def matrix(self, a: int) -> np.ndarray:
        cached = self._cache.get(a)
        if cached is not None:
            return cached
        raw = np.asarray(self._lookup(a), dtype=float)
        if raw.shape != (self.d, self.d):
            raise ValueError(
                f"matrix for symbol {a} has shape {raw.shape}, "
                f"expected ({self.d}, {self.d})"
            )
        if not np.isfinite(raw).all():
            raise ValueError(f"matrix for symbol {a} has a non-finite entry")
        if (raw < 0).any():
            raise ValueError(f"matrix for symbol {a} has a negative entry")
        if not (raw > 0).any():
            raise ValueError(f"matrix for symbol {a} has no positive entry")
        raw.setflags(write=False)
        self._cache[a] = raw
        return raw

    def norm(self, a: int) -> float:
        return entry_sum_norm(self.matrix(a))


def entry_sum_norm(a) -> float:
    """Sum of all matrix entries, the norm 1^T A 1 used throughout."""
    arr = np.asarray(a, dtype=float)
    return math.fsum(arr.ravel().tolist())


@dataclass(frozen=True)
class LyapunovEstimate:
    lambda_hat: float
    n_used: int
    sample_count: int
    standard_error: float


def log_norm_of_path(family: MatrixFamily, word: Sequence[int]) -> float:
    """log of the entry-sum norm of A_{w_{n-1}} ... A_{w_0}.

    Later symbols multiply on the left; products are renormalized per step so
    arbitrarily long words stay in floating-point range.
    """
    prod = ScaledMatrix.from_array(family.matrix(word[0]))
    for b in word[1:]:
        prod = ScaledMatrix.from_array(family.matrix(b)).matmul(prod)
    return prod.log_entry_sum()


def max_lyapunov(
    family: MatrixFamily,
    mu,
    n: int,
    samples: int,
    seed: int = 0,
) -> LyapunovEstimate:
    """Monte Carlo estimate of the top Lyapunov exponent under mu.

    Paths are sampled ancestrally from the Markov measure, each from its own
    generator seeded by (seed, sample index), so results do not depend on
    evaluation order. Scalar families are additive: the path average of log
    norms integrates to the stationary weighted mean exactly at every n, so
    that value is returned directly with zero standard error.
    """
    if getattr(mu, "kind", None) != "markov":
        raise MeasureKindError("max_lyapunov requires a markov-kind measure")
    if n < 1:
        raise ValueError("path length n must be at least 1")
    if samples < 1:
        raise ValueError("sample count must be at least 1")
    symbols = tuple(mu.symbols)
    for s in symbols:
        family.matrix(s)
    if family.d == 1:
        lam = math.fsum(
            mu.pi(s) * math.log(float(family.matrix(s)[0, 0])) for s in symbols
        )
        return LyapunovEstimate(lam, n, samples, 0.0)
    weights = np.array([mu.pi(s) for s in symbols])
    weights = weights / weights.sum()
    rows = {}
    for s in symbols:
        outs = [t for t in symbols if mu.transition(s, t) > 0.0]
        probs = np.array([mu.transition(s, t) for t in outs])
        rows[s] = (outs, probs / probs.sum())
    values = []
    for k in range(samples):
        rng = np.random.default_rng((seed, k))
        cur = symbols[rng.choice(len(symbols), p=weights)]
        prod = ScaledMatrix.from_array(family.matrix(cur))
        for _ in range(n - 1):
            outs, probs = rows[cur]
            cur = outs[rng.choice(len(outs), p=probs)]
            prod = ScaledMatrix.from_array(family.matrix(cur)).matmul(prod)
        values.append(prod.log_entry_sum() / n)
    lam = math.fsum(values) / samples
    if samples > 1:
        var = math.fsum((v - lam) ** 2 for v in values) / (samples - 1)
        se = math.sqrt(var / samples)
    else:
        se = 0.0
    return LyapunovEstimate(lam, n, samples, se)


def cocycle_pressure(
    family: MatrixFamily,
    model: TransitionModel,
    t_grid: Sequence[float],
    symbol_bound: int = 16,
    **params,
) -> list[tuple[float, PressureEstimate]]:
    """Pressure curve of the norm potential of a positive matrix family.

    Preflight checks the cone condition on the probed symbols and the
    summability of the per-symbol norms (a warning, not an error, when no
    tail bound is available). When every probed norm is below 1, the finite
    part of the curve is verified to be non-increasing on each truncation.
    """
    if model.alphabet_size is not None:
        probe = min(symbol_bound, model.alphabet_size)
    else:
        probe = symbol_bound
    cone = check_cone_condition(family, probe)
    # A finite family of strictly positive matrices always has a uniform cone
    # constant; the degeneration heuristic inside the report is meaningful
    # only when the probe samples a countable family.
    finite_probe = (
        model.alphabet_size is not None and probe == model.alphabet_size
    )
    if not (cone.uniform or (finite_probe and cone.best_C > 0.0)):
        raise ValueError(
            "matrix family fails the cone condition on the probed symbols"
        )
    p = cocycle_potential(family, model, symbol_bound=probe)
    report = summability_report(p)
    if report.verdict != "summable":
        warnings.warn(
            f"summed matrix norms are {report.verdict} over the probe range; "
            "results describe truncations only",
            RuntimeWarning,
            stacklevel=2,
        )
    curve = pressure_curve(model, p, t_grid, **params)
    if all(family.norm(a) < 1.0 for a in range(1, probe + 1)):
        _check_decreasing(curve)
    return curve


def _check_decreasing(curve: list[tuple[float, PressureEstimate]]) -> None:
    levels = max(len(est.truncation_values) for _, est in curve)
    for k in range(levels):
        finite = [
            est.truncation_values[k][1]
            for _, est in curve
            if k < len(est.truncation_values)
            and math.isfinite(est.truncation_values[k][1])
        ]
        for a, b in zip(finite, finite[1:]):
            if b > a + 1e-9:
                raise RuntimeError(
                    "pressure curve failed to decrease on a truncation "
                    f"({a} -> {b}) although every matrix norm is below 1"
                )
