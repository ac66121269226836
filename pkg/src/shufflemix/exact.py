"""Dense evolution of shuffle walks over all of S_n at small n.

Distributions live on the full n!-point state space indexed by lexicographic
permutation rank.  Distance sums run through math.fsum (exact compensated
summation), because n! terms of magnitude ~1/n! lose digits under naive
accumulation.  Hard caps: n <= 8 for dense convolution, n <= 6 for
eigendecomposition (n = 7 behind an explicit opt-in, it allocates a
5040 x 5040 matrix).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import CapacityError
from .measures import (
    SparseMeasure,
    convolve_measures,
    lazy,
    reversal,
    symmetrize,
    top_to_bottom_k,
)
from .perms import Permutation

DENSE_CAP = 8
EIGEN_CAP = 6

TV_THRESHOLD = 1 / (2 * math.e)
LP_THRESHOLD = 1 / math.e


class GroupTable:
    """Rank-indexed multiplication tables for one S_n, built lazily."""

    def __init__(self, n: int):
        self.n = n
        self.size = math.factorial(n)
        self.perms = list(itertools.permutations(range(1, n + 1)))
        self.index = {p: i for i, p in enumerate(self.perms)}
        self._right: dict[tuple, np.ndarray] = {}

    def right_mul(self, s: tuple) -> np.ndarray:
        """J with J[i] = rank(perm_i * s); a bijection of ranks."""
        tbl = self._right.get(s)
        if tbl is None:
            idx = self.index
            tbl = np.fromiter(
                (idx[tuple(p[x - 1] for x in s)] for p in self.perms),
                dtype=np.int64,
                count=self.size,
            )
            self._right[s] = tbl
        return tbl


@lru_cache(maxsize=None)
def group_table(n: int) -> GroupTable:
    if n > DENSE_CAP:
        raise CapacityError(f"n={n} exceeds dense cap {DENSE_CAP}")
    return GroupTable(n)


@dataclass(frozen=True)
class DenseDistribution:
    """Probability vector over S_n indexed by permutation rank."""

    n: int
    probs: np.ndarray = field(compare=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape != (math.factorial(self.n),):
            raise ValueError(f"expected length {math.factorial(self.n)}, got {p.shape}")
        if p.min() < -1e-15:
            raise ValueError(f"negative probability {p.min()}")
        p = np.where(p < 0, 0.0, p)
        if abs(math.fsum(p.tolist()) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {math.fsum(p.tolist())}")
        object.__setattr__(self, "probs", p)


def point_mass(n: int) -> DenseDistribution:
    t = group_table(n)
    p = np.zeros(t.size)
    p[0] = 1.0
    return DenseDistribution(n, p)


def densify(q: SparseMeasure) -> DenseDistribution:
    t = group_table(q.n)
    p = np.zeros(t.size)
    for g, w in q.items():
        p[t.index[g.map]] += float(w)
    return DenseDistribution(q.n, p)


def convolve_step(d: DenseDistribution, q: SparseMeasure) -> DenseDistribution:
    """One walk step: result(g) = sum_h d(h) q(h^{-1} g).

    Each support atom scatters d along a rank bijection; atoms are applied in
    sorted rank order so the result is bitwise deterministic.
    """
    if d.n != q.n:
        raise ValueError(f"size mismatch: {d.n} vs {q.n}")
    t = group_table(d.n)
    out = np.zeros(t.size)
    for g, w in q.items():
        out[t.right_mul(g.map)] += float(w) * d.probs
    return DenseDistribution(d.n, out)


def tv_distance(d: DenseDistribution) -> float:
    """Total variation distance to uniform: half the L1 gap."""
    u = 1.0 / math.factorial(d.n)
    return 0.5 * math.fsum(abs(x - u) for x in d.probs.tolist())


def lp_distance(d: DenseDistribution, p: int) -> float:
    """d_{pi,p}(d) = (sum |d(g)/pi(g) - 1|^p pi(g))^{1/p} for p in {1, 2}."""
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p}")
    size = math.factorial(d.n)
    if p == 1:
        return math.fsum(abs(size * x - 1.0) for x in d.probs.tolist()) / size
    return math.sqrt(math.fsum((size * x - 1.0) ** 2 for x in d.probs.tolist()) / size)


@dataclass(frozen=True)
class MixingReport:
    measure: str
    metric: str                      # "tv" | "l2"
    threshold: float
    mixing_time: int | None          # None when saturated
    profile: tuple                   # ((step, distance), ...), step 0 included
    saturated: bool

    def distance_at(self, m: int) -> float:
        return self.profile[m][1]


def _metric_fn(metric: str):
    if metric == "tv":
        return tv_distance, TV_THRESHOLD
    if metric == "l2":
        return lambda d: lp_distance(d, 2), LP_THRESHOLD
    raise ValueError(f"metric must be 'tv' or 'l2', got {metric!r}")


def mixing_time(q: SparseMeasure, metric: str = "tv", m_max: int = 200,
                label: str | None = None) -> MixingReport:
    """First step m with distance(q^m, pi) <= threshold, plus the profile.

    Thresholds are 1/(2e) for TV and 1/e for the L2 distance.  Saturation
    (threshold not reached by m_max) is a reported outcome, not an error.
    """
    dist_fn, threshold = _metric_fn(metric)
    d = point_mass(q.n)
    profile = [(0, dist_fn(d))]
    hit = 0 if profile[0][1] <= threshold else None
    for m in range(1, m_max + 1):
        d = convolve_step(d, q)
        profile.append((m, dist_fn(d)))
        if hit is None and profile[-1][1] <= threshold:
            hit = m
    return MixingReport(
        measure=label or f"measure(n={q.n})",
        metric=metric,
        threshold=threshold,
        mixing_time=hit,
        profile=tuple(profile),
        saturated=hit is None,
    )


def distance_profile(q: SparseMeasure, m_max: int) -> list[tuple[int, float, float]]:
    """(step, tv, l2) rows for steps 0..m_max, one pass of convolution."""
    d = point_mass(q.n)
    rows = [(0, tv_distance(d), lp_distance(d, 2))]
    for m in range(1, m_max + 1):
        d = convolve_step(d, q)
        rows.append((m, tv_distance(d), lp_distance(d, 2)))
    return rows


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray = field(compare=False)   # ascending
    beta_min: float = 0.0
    spectral_gap: float = 0.0


def spectrum(q: SparseMeasure, allow_n7: bool = False) -> SpectrumReport:
    """Full real spectrum of the transition matrix M(x, y) = q(x^{-1} y).

    Only symmetric measures are accepted (q equal to its reversal makes M
    symmetric); nonreversible spectra are out of scope.
    """
    if q != reversal(q):
        raise ValueError("spectrum requires a symmetric measure (q == reversal(q))")
    cap = 7 if allow_n7 else EIGEN_CAP
    if q.n > cap:
        raise CapacityError(f"n={q.n} exceeds eigen cap {cap}")
    t = group_table(q.n)
    m = np.zeros((t.size, t.size))
    rows = np.arange(t.size)
    for g, w in q.items():
        m[rows, t.right_mul(g.map)] += float(w)
    if not np.array_equal(m, m.T):
        raise ValueError("transition matrix not symmetric; measure weights inconsistent")
    eig = np.linalg.eigvalsh(m)
    if abs(eig[-1] - 1.0) > 1e-10:
        raise ValueError(f"top eigenvalue {eig[-1]} != 1")
    gap = 1.0 - eig[-2] if t.size > 1 else 1.0
    return SpectrumReport(eigenvalues=eig, beta_min=float(eig[0]), spectral_gap=float(gap))


def least_eigenvalue_formula(n: int, k: int) -> Fraction:
    """Closed-form lower bound -1 + (k-1)/(k(n-k+2)(n+1)) for beta_min."""
    return -1 + Fraction(k - 1, k * (n - k + 2) * (n + 1))


@dataclass(frozen=True)
class BetaMinReport:
    n: int
    k: int
    exact_beta_min: float
    formula_value: Fraction
    holds: bool


def beta_min_bound_check(n: int, k: int, allow_n7: bool = False) -> BetaMinReport:
    """Exact beta_min of the symmetrized walk against the closed-form bound."""
    rep = spectrum(symmetrize(top_to_bottom_k(n, k)), allow_n7=allow_n7)
    formula = least_eigenvalue_formula(n, k)
    return BetaMinReport(
        n=n,
        k=k,
        exact_beta_min=rep.beta_min,
        formula_value=formula,
        holds=rep.beta_min >= float(formula) - 1e-12,
    )


def l2_from_spectrum(q: SparseMeasure, m: int, allow_n7: bool = False) -> float:
    """Squared L2 distance from the spectrum: sum_{beta_i != top} beta_i^{2m}.

    Spectral identity for reversible chains, d_{pi,2}(q^m)^2 = sum beta_i^{2m}
    over non-top eigenvalues; cross-checks lp_distance(.., 2)^2 within 1e-8.
    At m = 0 this is n! - 1.
    """
    eig = spectrum(q, allow_n7=allow_n7).eigenvalues
    return math.fsum(float(b) ** (2 * m) for b in eig[:-1])


def generates_full_group(q: SparseMeasure) -> bool:
    """Whether the support of q generates all of S_n (closure by BFS)."""
    t = group_table(q.n)
    letters = [t.right_mul(g.map) for g, _ in q.items()]
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for r in frontier:
            for j in letters:
                s = int(j[r])
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
        frontier = nxt
    return len(seen) == t.size


@dataclass(frozen=True)
class TransferReport:
    n: int
    k: int
    t_tv: int
    t_l2: int
    t_l2_qq_star: int | None                 # None: q * q* lives on a proper subgroup
    tv_le_l2: bool
    doubling_holds: bool                     # T2(q) <= 2 T2(q * q*)
    doubling_vacuous: bool                   # right side infinite (reducible q * q*)
    t_tv_lazy: int
    t_l2_lazy: int
    t_l2_lazy_pair: int                      # T2(lazy(q)* (*) lazy(q))
    doubling_lazy_holds: bool                # T2(lazy q) <= 2 T2(lazy pair)
    lazy_rows: tuple                         # (eps, lazy T, bound, holds)


def transfer_checks(n: int, k: int, p=Fraction(1, 2),
                    eps_grid=(0.1, 0.5, 0.9), m_max: int = 400) -> TransferReport:
    """Mixing-time transfer inequalities for q = top_to_bottom_k(n, k).

    Checks T <= T2, the reversed-convolution doubling bound
    T2(q) <= 2 T2(q * q*), and the lazy-walk transfer
    T(lazy_p(q)) <= max(((2+eps)/p) T(q), 80/(p eps^2)) over an eps grid.

    For k < n the measure q * q* fixes the card at position 2 (every atom
    sigma_a sigma_b^{-1} has a, b >= 2), so it lives on a proper subgroup and
    T2(q * q*) is infinite: the doubling bound holds vacuously.  The
    substantive instance is the lazy one, lazy(q)* (*) lazy(q), which always
    generates; it is checked as well.
    """
    q = top_to_bottom_k(n, k)
    t_tv = mixing_time(q, "tv", m_max).mixing_time
    t_l2 = mixing_time(q, "l2", m_max).mixing_time
    qq = convolve_measures(q, reversal(q))
    if generates_full_group(qq):
        t_qq = mixing_time(qq, "l2", m_max).mixing_time
        vacuous = False
    else:
        t_qq = None
        vacuous = True
    p = Fraction(p)
    lazy_q = lazy(q, p)
    t_tv_lazy = mixing_time(lazy_q, "tv", m_max).mixing_time
    t_l2_lazy = mixing_time(lazy_q, "l2", m_max).mixing_time
    lazy_pair = convolve_measures(reversal(lazy_q), lazy_q)
    t_pair = mixing_time(lazy_pair, "l2", m_max).mixing_time
    needed = [t_tv, t_l2, t_tv_lazy, t_l2_lazy, t_pair] + ([] if vacuous else [t_qq])
    if any(v is None for v in needed):
        raise ValueError(f"m_max={m_max} too small to reach thresholds at n={n}, k={k}")
    rows = []
    for eps in eps_grid:
        bound = max((2 + eps) / float(p) * t_tv, 80.0 / (float(p) * eps * eps))
        rows.append((eps, t_tv_lazy, bound, t_tv_lazy <= bound))
    return TransferReport(
        n=n,
        k=k,
        t_tv=t_tv,
        t_l2=t_l2,
        t_l2_qq_star=t_qq,
        tv_le_l2=t_tv <= t_l2,
        doubling_holds=True if vacuous else t_l2 <= 2 * t_qq,
        doubling_vacuous=vacuous,
        t_tv_lazy=t_tv_lazy,
        t_l2_lazy=t_l2_lazy,
        t_l2_lazy_pair=t_pair,
        doubling_lazy_holds=t_l2_lazy <= 2 * t_pair,
        lazy_rows=tuple(rows),
    )
