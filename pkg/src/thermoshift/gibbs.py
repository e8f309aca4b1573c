"""Cylinder measures, Gibbs certification, and the variational inequality.

Two measure representations cover everything the toolkit certifies. Markov
measures store log-probabilities and give exact cylinder masses at any depth.
Finite-approximation measures put mass proportional to the cylinder weight
exp(sup log f_l) on every admissible word of length l; shallower masses are
exact marginal sums, computed either by explicit aggregation or, when the
level is too large to enumerate, by suffix-vector recursions that exploit the
potential's arc or matrix-product structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .numerics import NEG_INF, logsumexp, perron_data
from .potentials import PotentialSequence
from .shift_core import (
    FiniteSubshift,
    SymbolDomainError,
    Word,
    check_mixing,
    full_shift,
    truncate,
)


class NoAdmissibleWordsError(ValueError):
    pass


class MeasureKindError(TypeError):
    pass


class NonMixingSubshiftError(RuntimeError):
    pass


def iter_admissible_words(sub: FiniteSubshift, n: int) -> Iterator[Word]:
    """All admissible words of length n, in lexicographic symbol order."""
    word: list[int] = []

    def rec() -> Iterator[Word]:
        if len(word) == n:
            yield tuple(word)
            return
        if not word:
            starts = sub.symbols
        else:
            starts = sub.out_neighbors(word[-1])
        for s in starts:
            word.append(s)
            yield from rec()
            word.pop()

    yield from rec()


def count_admissible_words(sub: FiniteSubshift, n: int) -> int:
    """Exact number of admissible words of length n (big-int matrix power)."""
    if n == 1:
        return sub.size
    from .numerics import int_matrix_power

    P = int_matrix_power(sub.matrix.tolist(), n - 1)
    return sum(sum(row) for row in P)


class MarkovCylinderMeasure:
    """Stationary Markov measure stored as log-probabilities.

    Masses of cylinders are exact products; the representation keeps the log
    values supplied at construction so that certificates built from matching
    logs (for example uniform Bernoulli against the zero potential) cancel
    exactly instead of to rounding.
    """

    kind = "markov"

    def __init__(
        self,
        symbols: Sequence[int],
        log_pi: dict[int, float],
        log_p: dict[tuple[int, int], float],
        sub: Optional[FiniteSubshift] = None,
        tol: float = 1e-9,
    ):
        self.symbols = tuple(symbols)
        self.log_pi = dict(log_pi)
        self.log_p = dict(log_p)
        self.sub = sub
        pi_total = math.fsum(math.exp(v) for v in self.log_pi.values())
        if abs(pi_total - 1.0) > tol:
            raise ValueError(f"initial distribution sums to {pi_total}, not 1")
        for i in self.symbols:
            row = math.fsum(
                math.exp(v) for (a, _), v in self.log_p.items() if a == i
            )
            if abs(row - 1.0) > tol:
                raise ValueError(f"transition row of symbol {i} sums to {row}")
        for j in self.symbols:
            flow = math.fsum(
                math.exp(self.log_pi[i] + self.log_p[(i, j)])
                for i in self.symbols
                if (i, j) in self.log_p
            )
            if abs(flow - math.exp(self.log_pi[j])) > tol:
                raise ValueError(f"distribution is not stationary at symbol {j}")
        if sub is not None:
            for (i, j) in self.log_p:
                if not sub.arc(i, j):
                    raise ValueError(
                        f"transition {i}->{j} is not an admissible arc"
                    )

    @property
    def depth(self) -> float:
        return math.inf

    def pi(self, a: int) -> float:
        return math.exp(self.log_pi.get(a, NEG_INF))

    def transition(self, i: int, j: int) -> float:
        return math.exp(self.log_p.get((i, j), NEG_INF))

    def log_mass(self, word: Sequence[int]) -> float:
        word = tuple(word)
        total = self.log_pi.get(word[0], NEG_INF)
        for i, j in zip(word, word[1:]):
            total += self.log_p.get((i, j), NEG_INF)
        return total

    def mass(self, word: Sequence[int]) -> float:
        return math.exp(self.log_mass(word))

    def log_mass_plus_n_pressure(self, word: Sequence[int], P: float) -> float:
        """log mass(w) + n*P, grouped per symbol so matching logs cancel exactly."""
        word = tuple(word)
        terms = [self.log_pi.get(word[0], NEG_INF) + P]
        terms.extend(
            self.log_p.get((i, j), NEG_INF) + P for i, j in zip(word, word[1:])
        )
        if NEG_INF in terms:
            return NEG_INF
        return math.fsum(terms)


def uniform_bernoulli(m: int) -> MarkovCylinderMeasure:
    """Uniform Bernoulli measure on the m-symbol full-shift truncation."""
    sub = truncate(full_shift(), m)
    log_u = -math.log(m)
    log_pi = {a: log_u for a in sub.symbols}
    log_p = {(i, j): log_u for i in sub.symbols for j in sub.symbols}
    return MarkovCylinderMeasure(sub.symbols, log_pi, log_p, sub)


def bernoulli_measure(
    probs: dict[int, float], sub: Optional[FiniteSubshift] = None
) -> MarkovCylinderMeasure:
    """Product measure with the given symbol probabilities."""
    if sub is None:
        sub = truncate(full_shift(), max(probs))
    log_pi = {a: math.log(p) for a, p in probs.items() if p > 0}
    log_p = {
        (i, j): log_pi[j]
        for i in log_pi
        for j in log_pi
        if sub.arc(i, j)
    }
    return MarkovCylinderMeasure(tuple(sorted(log_pi)), log_pi, log_p, sub)


def markov_measure(
    symbols: Sequence[int],
    pi: dict[int, float],
    p: dict[tuple[int, int], float],
    sub: Optional[FiniteSubshift] = None,
) -> MarkovCylinderMeasure:
    """Markov measure from plain probabilities (validated for stationarity)."""
    log_pi = {a: math.log(v) for a, v in pi.items() if v > 0}
    log_p = {arc: math.log(v) for arc, v in p.items() if v > 0}
    return MarkovCylinderMeasure(tuple(symbols), log_pi, log_p, sub)


def rpf_equilibrium(sub: FiniteSubshift, f) -> tuple[float, MarkovCylinderMeasure]:
    """Exact pressure and equilibrium Markov measure of a pair potential.

    Classical transfer-matrix construction: with W_ij = arc(i,j) e^{f(i,j)},
    the pressure is log of the Perron root rho, the equilibrium kernel is
    p_ij = W_ij v_j / (rho v_i) for the right eigenvector v, and the
    stationary distribution combines both eigenvectors.
    """
    if hasattr(f, "pair_structure"):
        ps = f.pair_structure()
        if ps is None:
            raise ValueError("potential has no pair structure")
        pair = ps.pair
    else:
        pair = f
    mix = sub.mixing_certificate
    if mix is None:
        mix = check_mixing(sub)
    if mix is None:
        raise NonMixingSubshiftError(
            "equilibrium eigendata requires a mixing subshift"
        )
    size = sub.size
    W = np.zeros((size, size))
    for ki, i in enumerate(sub.symbols):
        for kj, j in enumerate(sub.symbols):
            if sub.matrix[ki, kj]:
                W[ki, kj] = math.exp(pair(i, j))
    rho, v, u = perron_data(W)
    p_exact = math.log(rho)
    log_pi = {}
    log_p = {}
    weights = u * v
    total = weights.sum()
    for ki, i in enumerate(sub.symbols):
        log_pi[i] = math.log(weights[ki] / total)
        for kj, j in enumerate(sub.symbols):
            if sub.matrix[ki, kj]:
                log_p[(i, j)] = math.log(W[ki, kj] * v[kj] / (rho * v[ki]))
    return p_exact, MarkovCylinderMeasure(sub.symbols, log_pi, log_p, sub)


def _normalized(vec: np.ndarray) -> tuple[np.ndarray, float]:
    s = vec.sum()
    if s <= 0:
        return np.zeros_like(vec), NEG_INF
    return vec / s, math.log(s)


class GibbsCylinderMeasure:
    """Finite-approximation measure: level-l masses proportional to cylinder weights.

    Masses of shorter words are marginal sums. Small levels are enumerated
    explicitly; large levels fall back to suffix-vector recursions that need
    the potential's pair or matrix-product structure.
    """

    kind = "empirical-cylinder"

    def __init__(self, sub: FiniteSubshift, p: PotentialSequence, l: int,
                 strategy: str, log_alpha: float):
        self.sub = sub
        self.potential = p
        self.depth = l
        self.strategy = strategy
        self.log_alpha = log_alpha

    def log_mass(self, word: Sequence[int]) -> float:
        raise NotImplementedError

    def mass(self, word: Sequence[int]) -> float:
        return math.exp(self.log_mass(word))

    def level_mass_total(self, n: int) -> float:
        raise NotImplementedError


class _ExplicitGibbs(GibbsCylinderMeasure):
    def __init__(self, sub, p, l, levels: list[dict[Word, float]], log_alpha):
        super().__init__(sub, p, l, "explicit", log_alpha)
        self._levels = levels

    def log_mass(self, word):
        word = tuple(word)
        m = self._levels[len(word) - 1].get(word, 0.0)
        return math.log(m) if m > 0 else NEG_INF

    def mass(self, word):
        return self._levels[len(word) - 1].get(tuple(word), 0.0)

    def level_mass_total(self, n):
        return math.fsum(self._levels[n - 1].values())


class _PairGibbs(GibbsCylinderMeasure):
    """Marginals via suffix vectors H_k[a] = sum over k-step extensions of a."""

    def __init__(self, sub, p, l):
        ps = p.pair_structure()
        size = sub.size
        tails = np.array([
            math.exp(p.cylinder_log_weight((a,), sub) - ps.offset(1))
            for a in sub.symbols
        ])
        W = np.zeros((size, size))
        for ki, i in enumerate(sub.symbols):
            for kj, j in enumerate(sub.symbols):
                if sub.matrix[ki, kj]:
                    W[ki, kj] = math.exp(ps.pair(i, j))
        hs = []
        vec, scale = _normalized(tails)
        hs.append((vec, scale))
        for _ in range(l - 1):
            nxt = W @ vec
            vec, s = _normalized(nxt)
            scale += s
            hs.append((vec, scale))
        top_vec, top_scale = hs[l - 1]
        log_alpha = ps.offset(l) + top_scale + math.log(top_vec.sum())
        super().__init__(sub, p, l, "pair", log_alpha)
        self._ps = ps
        self._hs = hs
        self._W = W

    def log_mass(self, word):
        word = tuple(word)
        if not self.sub.admits_word(word):
            return NEG_INF
        n = len(word)
        path = math.fsum(
            self._ps.pair(i, j) for i, j in zip(word, word[1:])
        )
        k = self.depth - n
        vec, scale = self._hs[k]
        pos = self.sub.position(word[-1])
        if vec[pos] <= 0:
            return NEG_INF
        tail = scale + math.log(vec[pos])
        return self._ps.offset(self.depth) + path + tail - self.log_alpha

    def level_mass_total(self, n):
        # Forward weights g_n[b] = sum over words of length n ending at b of
        # the arc products; pairing them with the suffix vectors reproduces
        # the level sum without enumerating words.
        g = np.ones(self.sub.size)
        g_scale = 0.0
        for _ in range(n - 1):
            g, s = _normalized(self._W.T @ g)
            g_scale += s
        vec, scale = self._hs[self.depth - n]
        total = float(g @ vec)
        return math.exp(
            self._ps.offset(self.depth) + g_scale + scale + math.log(total)
            - self.log_alpha
        )


class _BlockGibbs(GibbsCylinderMeasure):
    """Marginals for matrix-product potentials via row-vector recursions."""

    def __init__(self, sub, p, l):
        entries, d = p.block_entries()
        self._mats = {a: np.asarray(entries(a), dtype=float) for a in sub.symbols}
        self._d = d
        # R_k[a]: row vector, sum over words v of length k starting at a of
        # ones^T A_{v_{k-1}} ... A_{v_1} A_a, renormalized with a log scale.
        rows = []
        cur = {a: np.ones(d) @ self._mats[a] for a in sub.symbols}
        rows.append(self._norm_bank(cur))
        for _ in range(l - 1):
            bank, scale = rows[-1]
            nxt = {}
            for a in sub.symbols:
                acc = np.zeros(d)
                for b in sub.out_neighbors(a):
                    acc = acc + bank[b]
                nxt[a] = acc @ self._mats[a]
            vecs, s = self._norm_bank(nxt)
            rows.append((vecs, scale + s))
        bank_l, scale_l = rows[l - 1]
        alpha = math.fsum(v.sum() for v in bank_l.values())
        log_alpha = scale_l + math.log(alpha)
        super().__init__(sub, p, l, "block", log_alpha)
        self._rows = rows

    @staticmethod
    def _norm_bank(bank: dict[int, np.ndarray]):
        total = math.fsum(v.sum() for v in bank.values())
        if total <= 0:
            raise NoAdmissibleWordsError("suffix recursion collapsed to zero")
        return {a: v / total for a, v in bank.items()}, math.log(total)

    def log_mass(self, word):
        word = tuple(word)
        if not self.sub.admits_word(word):
            return NEG_INF
        n = len(word)
        r = np.ones(self._d)
        r_scale = 0.0
        for a in word:
            r = self._mats[a] @ r
            s = r.sum()
            r, r_scale = r / s, r_scale + math.log(s)
        k = self.depth - n
        if k == 0:
            total = r.sum()  # equals 1 after normalization
            return r_scale + math.log(total) - self.log_alpha
        bank, scale = self._rows[k - 1]
        acc = np.zeros(self._d)
        for b in self.sub.out_neighbors(word[-1]):
            acc = acc + bank[b]
        total = float(acc @ r)
        if total <= 0:
            return NEG_INF
        return scale + r_scale + math.log(total) - self.log_alpha

    def level_mass_total(self, n):
        # Forward bank: F_n[b] = sum over words of length n ending at b of
        # A_{w_{n-1}} ... A_{w_0} ones.
        fwd = {b: self._mats[b] @ np.ones(self._d) for b in self.sub.symbols}
        scale = 0.0
        for _ in range(n - 1):
            total = math.fsum(v.sum() for v in fwd.values())
            fwd = {b: v / total for b, v in fwd.items()}
            scale += math.log(total)
            nxt = {}
            for b in self.sub.symbols:
                acc = np.zeros(self._d)
                for a in self.sub.in_neighbors(b):
                    acc = acc + fwd[a]
                nxt[b] = self._mats[b] @ acc
            fwd = nxt
        k = self.depth - n
        if k == 0:
            total = math.fsum(v.sum() for v in fwd.values())
            return math.exp(scale + math.log(total) - self.log_alpha)
        bank, bscale = self._rows[k - 1]
        acc = 0.0
        for b, vec in fwd.items():
            srow = np.zeros(self._d)
            for c in self.sub.out_neighbors(b):
                srow = srow + bank[c]
            acc += float(srow @ vec)
        return math.exp(scale + bscale + math.log(acc) - self.log_alpha)


def finite_gibbs_nu(
    sub: FiniteSubshift,
    p: PotentialSequence,
    l: int,
    cap: int = 200_000,
) -> GibbsCylinderMeasure:
    """Finite-approximation measure at level l.

    Masses on length-l words are proportional to exp(sup log f_l) on the
    cylinder, normalized by the full level sum; shallower masses are marginal
    sums. Levels beyond the enumeration cap require a structured potential.
    """
    if l < 1:
        raise ValueError("level must be at least 1")
    total = count_admissible_words(sub, l)
    if total == 0:
        raise NoAdmissibleWordsError(
            f"no admissible words of length {l} in the truncation"
        )
    if total <= cap:
        weights: dict[Word, float] = {}
        for w in iter_admissible_words(sub, l):
            weights[w] = p.cylinder_log_weight(w, sub)
        log_alpha = logsumexp(weights.values())
        top = {w: math.exp(lw - log_alpha) for w, lw in weights.items()}
        levels = [top]
        for n in range(l - 1, 0, -1):
            shorter: dict[Word, float] = {}
            for w, m in levels[0].items():
                key = w[:n]
                shorter[key] = shorter.get(key, 0.0) + m
            levels.insert(0, shorter)
        return _ExplicitGibbs(sub, p, l, levels, log_alpha)
    if p.pair_structure() is not None:
        return _PairGibbs(sub, p, l)
    if p.block_entries() is not None:
        return _BlockGibbs(sub, p, l)
    raise NoAdmissibleWordsError(
        f"level {l} has {total} words, beyond the enumeration cap, and the "
        "potential exposes no structure for marginal recursions"
    )


@dataclass(frozen=True)
class GibbsCertificate:
    """Extremes of mass(C) / exp(-nP + log f_n(C)) over tested cylinders."""

    P_used: float
    ratio_min: float
    ratio_max: float
    depth: int
    words_tested: int
    passed: bool


def verify_gibbs(
    mu,
    p: PotentialSequence,
    P: float,
    depth: int,
    sub: Optional[FiniteSubshift] = None,
    ratio_bound: float = 100.0,
    row_sink: Optional[Callable[[int, Word, float, float, float], None]] = None,
) -> GibbsCertificate:
    """Scan all admissible cylinders up to depth and bound the Gibbs ratios.

    A cylinder with zero mass but positive potential weight records ratio 0
    and fails the certificate. The certificate passes iff both extremes are
    finite, positive, and ratio_max/ratio_min <= ratio_bound.
    """
    if sub is None:
        sub = getattr(mu, "sub", None)
    if sub is None:
        raise ValueError("a finite subshift is required to enumerate cylinders")
    if depth > mu.depth:
        raise ValueError(f"depth {depth} exceeds measure depth {mu.depth}")
    log_lo = math.inf
    log_hi = -math.inf
    zero_mass_hit = False
    tested = 0
    grouped = getattr(mu, "log_mass_plus_n_pressure", None)
    for n in range(1, depth + 1):
        for w in iter_admissible_words(sub, n):
            weight = p.cylinder_log_weight(w, sub)
            if grouped is not None:
                numer = grouped(w, P)
            else:
                numer = mu.log_mass(w) + n * P
            tested += 1
            if numer == NEG_INF:
                if weight > NEG_INF:
                    zero_mass_hit = True
                    if row_sink is not None:
                        row_sink(n, w, 0.0, weight, 0.0)
                continue
            log_ratio = numer - weight
            log_lo = min(log_lo, log_ratio)
            log_hi = max(log_hi, log_ratio)
            if row_sink is not None:
                row_sink(n, w, mu.mass(w), weight, math.exp(log_ratio))
    if tested == 0 or log_hi == -math.inf:
        raise NoAdmissibleWordsError("no cylinders with positive mass tested")
    ratio_min = 0.0 if zero_mass_hit else math.exp(log_lo)
    ratio_max = math.exp(log_hi)
    passed = (
        not zero_mass_hit
        and math.isfinite(ratio_max)
        and ratio_min > 0
        and ratio_max / ratio_min <= ratio_bound
    )
    return GibbsCertificate(
        P_used=P,
        ratio_min=ratio_min,
        ratio_max=ratio_max,
        depth=depth,
        words_tested=tested,
        passed=passed,
    )


def entropy_markov(mu) -> float:
    """Entropy -sum_i pi_i sum_j p_ij log p_ij of a Markov measure."""
    if getattr(mu, "kind", None) != "markov":
        raise MeasureKindError(
            "entropy is computed from the Markov representation only"
        )
    terms = []
    for (i, j), lp in mu.log_p.items():
        if lp == NEG_INF:
            continue
        terms.append(-math.exp(mu.log_pi[i] + lp) * lp)
    return math.fsum(terms)


def lyapunov_functional(
    mu, p: PotentialSequence, n: int, sub: Optional[FiniteSubshift] = None
) -> float:
    """(1/n) integral of log f_n against the measure.

    For Markov measures and arc-structured potentials the stationary average
    is exact at every n: offset(n)/n plus the expected arc value (there is no
    wrap term; the offset carries the entire length dependence). Otherwise
    the integral is a finite sum of cylinder masses times cylinder weights.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > mu.depth:
        raise ValueError(f"n={n} exceeds measure depth {mu.depth}")
    ps = p.pair_structure()
    if getattr(mu, "kind", None) == "markov" and ps is not None:
        expected = math.fsum(
            math.exp(mu.log_pi[i] + lp) * ps.pair(i, j)
            for (i, j), lp in mu.log_p.items()
            if lp > NEG_INF
        )
        return ps.offset(n) / n + expected
    if sub is None:
        sub = getattr(mu, "sub", None)
    if sub is None:
        raise ValueError("a finite subshift is required to enumerate cylinders")
    terms = []
    for w in iter_admissible_words(sub, n):
        m = mu.mass(w)
        if m > 0:
            terms.append(m * p.cylinder_log_weight(w, sub))
    return math.fsum(terms) / n


def variational_defect(
    mu, p: PotentialSequence, P: float, n: int,
    sub: Optional[FiniteSubshift] = None,
) -> float:
    """P minus (entropy + Lyapunov functional); nonnegative at every Markov mu."""
    return P - (entropy_markov(mu) + lyapunov_functional(mu, p, n, sub))
