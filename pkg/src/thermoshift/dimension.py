"""Hausdorff dimension of coded limit sets via the zero of the pressure curve.

A geometric construction assigns to every admissible word the length ratio of
its interval. The dimension of the limit set is the infimum of t with
P(t log r) <= 0; for contracting ratios the pressure is strictly decreasing
in t, so the infimum is located by bisection on the pressure estimate.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .gibbs import entropy_markov, lyapunov_functional, rpf_equilibrium
from .potentials import PotentialSequence, SymbolWeightPotential
from .pressure import PressureEstimate, gurevich_pressure
from .shift_core import TransitionModel, Word, truncate


class GeometricConstruction:
    """Interval-length ratios indexed by admissible words.

    Product-kind constructions multiply per-symbol ratios, so their log
    ratios are arc sums and inherit the fast matrix path. General-kind
    constructions evaluate a callback and carry a declared
    almost-multiplicativity constant instead.
    """

    def __init__(
        self,
        kind: str,
        rho: Optional[Callable[[int], float]] = None,
        ratio_fn: Optional[Callable[[Word], float]] = None,
        declared_C: float = 0.0,
        rho_tail: Optional[Callable[[int, float], float]] = None,
    ):
        if kind not in ("product", "general"):
            raise ValueError(f"unknown construction kind {kind!r}")
        if kind == "product" and rho is None:
            raise ValueError("product constructions need per-symbol ratios")
        if kind == "general" and ratio_fn is None:
            raise ValueError("general constructions need a ratio callback")
        self.kind = kind
        self._rho = rho
        self._ratio_fn = ratio_fn
        self.declared_C = float(declared_C)
        self.rho_tail = rho_tail
        self._rho_cache: dict[int, float] = {}

    def symbol_ratio(self, a: int) -> float:
        """Per-symbol contraction ratio (product kind only)."""
        if self.kind != "product":
            raise ValueError("per-symbol ratios exist only for product kind")
        cached = self._rho_cache.get(a)
        if cached is None:
            cached = float(self._rho(a))
            if not (0.0 < cached < 1.0):
                raise ValueError(f"ratio for symbol {a} is {cached}, not in (0, 1)")
            self._rho_cache[a] = cached
        return cached

    def ratio(self, word: Word) -> float:
        if len(word) == 0:
            raise ValueError("ratios are defined for nonempty words")
        if self.kind == "product":
            return math.exp(self.log_ratio(word))
        r = float(self._ratio_fn(tuple(word)))
        if not (0.0 < r < 1.0):
            raise ValueError(f"ratio of word {tuple(word)} is {r}, not in (0, 1)")
        return r

    def log_ratio(self, word: Word) -> float:
        if self.kind == "product":
            return math.fsum(math.log(self.symbol_ratio(a)) for a in word)
        return math.log(self.ratio(word))

    def potential(self, model: TransitionModel) -> PotentialSequence:
        """Log-ratio potential whose pressure zero is the dimension."""
        if self.kind == "product":
            return SymbolWeightPotential(
                self.symbol_ratio,
                model,
                lam_tail_power=self.rho_tail,
                name="ratio-product",
            )
        return _GeneralRatioPotential(self)


def product_construction(
    rho: Union[Callable[[int], float], dict, Sequence[float]],
    tail: Optional[Callable[[int, float], float]] = None,
) -> GeometricConstruction:
    """Construction with r_w equal to the product of per-symbol ratios."""
    if isinstance(rho, dict):
        table = {int(a): float(v) for a, v in rho.items()}
        fn = table.__getitem__
    elif callable(rho):
        fn = rho
    else:
        table = {k + 1: float(v) for k, v in enumerate(rho)}
        fn = table.__getitem__
    return GeometricConstruction("product", rho=fn, rho_tail=tail)


def general_construction(
    ratio_fn: Callable[[Word], float], declared_C: float
) -> GeometricConstruction:
    """Construction with an arbitrary ratio callback.

    declared_C bounds |log r_uv - log r_u - log r_v| over splits; it feeds
    the pressure brackets exactly like a potential's additivity constant.
    """
    return GeometricConstruction(
        "general", ratio_fn=ratio_fn, declared_C=declared_C
    )


class _GeneralRatioPotential(PotentialSequence):
    """log r_w as a word potential for general-kind constructions."""

    def __init__(self, gc: GeometricConstruction):
        self.gc = gc
        self.name = "ratio-general"
        self.declared_C = gc.declared_C

    def eval(self, word):
        return self.gc.log_ratio(word)

    def sup_f1(self, a):
        return self.gc.ratio((a,))


@dataclass(frozen=True)
class DimensionResult:
    """Outcome of the bisection on t with the final bracket and diagnostics.

    dim_hat is the smallest probed t whose pressure is certified at or below
    zero; root_found reports whether the pressure magnitude there is within
    the solver tolerance (it is not when the curve jumps past zero, in which
    case dim_hat still reports the infimum boundary). uncertain is set when
    an endpoint was classified while the pressure estimate's own error
    bracket straddled zero; probes near a genuine root straddle by nature and
    do not trip it. experimental marks Markov-constrained constructions.
    """

    dim_hat: float
    bracket: tuple[float, float]
    root_found: bool
    pressure_at_dim: float
    uncertain: bool
    experimental: bool
    trace: tuple[tuple[float, float, float, float, bool], ...]


def _is_full_model(model: TransitionModel, probe: int = 6) -> bool:
    bound = probe
    if model.alphabet_size is not None:
        bound = min(probe, model.alphabet_size)
    return all(
        model.rule(i, j)
        for i in range(1, bound + 1)
        for j in range(1, bound + 1)
    )


def bowen_dimension(
    gc: GeometricConstruction,
    model: TransitionModel,
    t_bracket: tuple[float, float] = (0.0, 1.0),
    tol: float = 1e-8,
    max_iter: int = 80,
    evaluator: Optional[Callable[[float], PressureEstimate]] = None,
    **pressure_params,
) -> DimensionResult:
    """Locate inf{t : P(t log r) <= 0} by bisection on the pressure value.

    tol is the pressure tolerance: a root is declared when |P| <= tol at the
    probed t. The endpoints must straddle (pressure positive at t_lo, at or
    below zero at t_hi) or a ValueError reports the measured values.
    `evaluator` overrides the pressure computation per t; by default each
    probe runs the truncation estimator on the scaled ratio potential.
    """
    t_lo, t_hi = float(t_bracket[0]), float(t_bracket[1])
    if not t_lo < t_hi:
        raise ValueError("t_bracket must be an increasing pair")
    if evaluator is None:
        pot = gc.potential(model)

        def evaluator(t: float) -> PressureEstimate:
            return gurevich_pressure(model, pot.scaled(t), **pressure_params)

    trace: list[tuple[float, float, float, float, bool]] = []

    def probe(t: float) -> PressureEstimate:
        est = evaluator(t)
        trace.append((t, est.value, est.lower, est.upper, est.diverged))
        return est

    def straddles(est: PressureEstimate) -> bool:
        return (
            not est.diverged
            and math.isfinite(est.lower)
            and math.isfinite(est.upper)
            and est.lower <= 0.0 <= est.upper
        )

    experimental = not _is_full_model(model)
    est_hi = probe(t_hi)
    if est_hi.value > tol:
        raise ValueError(
            "bracket does not straddle: pressure at "
            f"t_hi={t_hi} is {est_hi.value}, still positive"
        )
    est_lo = probe(t_lo)
    if abs(est_lo.value) <= tol:
        return DimensionResult(
            dim_hat=t_lo,
            bracket=(t_lo, t_lo),
            root_found=True,
            pressure_at_dim=est_lo.value,
            uncertain=straddles(est_lo),
            experimental=experimental,
            trace=tuple(trace),
        )
    if est_lo.value < 0.0:
        raise ValueError(
            "bracket does not straddle: pressure at "
            f"t_lo={t_lo} is {est_lo.value}, already negative "
            f"(t_hi gives {est_hi.value})"
        )
    uncertain = straddles(est_lo) or straddles(est_hi)

    lo, hi = t_lo, t_hi
    hi_est = est_hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        est = probe(mid)
        if abs(est.value) <= tol:
            return DimensionResult(
                dim_hat=mid,
                bracket=(lo, hi),
                root_found=True,
                pressure_at_dim=est.value,
                uncertain=uncertain,
                experimental=experimental,
                trace=tuple(trace),
            )
        if est.value > 0.0:
            lo = mid
        else:
            hi = mid
            hi_est = est
    return DimensionResult(
        dim_hat=hi,
        bracket=(lo, hi),
        root_found=False,
        pressure_at_dim=hi_est.value,
        uncertain=uncertain,
        experimental=experimental,
        trace=tuple(trace),
    )


@dataclass(frozen=True)
class LedrappierYoungReport:
    """Dimension against entropy over contraction at the pressure zero."""

    lhs: float
    rhs: float
    deviation: float
    entropy: float
    exponent: float


def ledrappier_young_check(
    gc: GeometricConstruction,
    model: TransitionModel,
    dim_result: DimensionResult,
    truncation: int,
) -> LedrappierYoungReport:
    """Compare dim_hat with -h(mu)/Lambda(mu) at the equilibrium measure.

    mu is the transfer-matrix equilibrium of dim_hat * log rho on the given
    truncation (product kind only); Lambda is its mean log contraction, which
    must be negative.
    """
    if gc.kind != "product":
        raise ValueError("the identity check supports product constructions only")
    if not dim_result.root_found:
        raise ValueError("the identity check needs a located pressure root")
    sub = truncate(model, truncation)
    t_star = dim_result.dim_hat

    def arc_value(i: int, j: int) -> float:
        return t_star * math.log(gc.symbol_ratio(i))

    _, mu = rpf_equilibrium(sub, arc_value)
    h = entropy_markov(mu)
    lam = lyapunov_functional(mu, gc.potential(model), 8, sub)
    if lam >= 0.0:
        raise ValueError(f"mean log contraction is {lam}, ratios must contract")
    rhs = -h / lam
    return LedrappierYoungReport(
        lhs=t_star,
        rhs=rhs,
        deviation=abs(t_star - rhs),
        entropy=h,
        exponent=lam,
    )
