"""Probability measures on S_n driving the shuffle walks.

All measures here carry exact rational weights (``fractions.Fraction``),
keyed by lexicographic permutation rank, so measure-level identities and
flow marginals can be checked with equality rather than tolerances.  Dense
float work lives in :mod:`shufflemix.exact`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .perms import (
    Permutation,
    compose,
    cycle_generator,
    identity,
    inverse,
    rank,
    serialize,
    transposition,
    unrank,
)


@dataclass(frozen=True)
class SparseMeasure:
    """Finitely supported probability measure on S_n.

    atoms maps permutation rank -> weight; zero-weight atoms are dropped.
    """

    n: int
    atoms: dict[int, Fraction] = field(compare=False)

    def __post_init__(self):
        cleaned = {}
        for r, w in self.atoms.items():
            w = Fraction(w)
            if w < 0:
                raise ValueError(f"negative weight {w} at rank {r}")
            if w > 0:
                cleaned[r] = cleaned.get(r, Fraction(0)) + w
        total = sum(cleaned.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"weights sum to {total}, expected 1")
        object.__setattr__(self, "atoms", cleaned)

    def weight(self, g: Permutation) -> Fraction:
        return self.atoms.get(rank(g), Fraction(0))

    def items(self):
        """(Permutation, weight) pairs in deterministic rank order."""
        for r in sorted(self.atoms):
            yield unrank(r, self.n), self.atoms[r]

    def support(self) -> list[Permutation]:
        return [g for g, _ in self.items()]

    def __eq__(self, other):
        return isinstance(other, SparseMeasure) and self.n == other.n and self.atoms == other.atoms

    def __len__(self):
        return len(self.atoms)


def _from_pairs(n: int, pairs) -> SparseMeasure:
    atoms: dict[int, Fraction] = {}
    for g, w in pairs:
        r = rank(g)
        atoms[r] = atoms.get(r, Fraction(0)) + Fraction(w)
    return SparseMeasure(n, atoms)


def delta_e(n: int) -> SparseMeasure:
    """Point mass at the identity."""
    return _from_pairs(n, [(identity(n), Fraction(1))])


def top_to_bottom_k(n: int, k: int) -> SparseMeasure:
    """Weight 1/k on each cycle sigma_l, l in [n-k+1, n].

    Right multiplication by sigma_l moves the top card to position l, so this
    drives the walk inserting the top card uniformly into the bottom k
    positions.  Requires n >= k > 1; for k = n the support includes sigma_1,
    the identity.
    """
    if not (isinstance(k, int) and 1 < k <= n):
        raise ValueError(f"need n >= k > 1, got n={n}, k={k}")
    w = Fraction(1, k)
    return _from_pairs(n, [(cycle_generator(l, n), w) for l in range(n - k + 1, n + 1)])


def reversal(q: SparseMeasure) -> SparseMeasure:
    """q*(g) = q(g^{-1}); drives the time-reversed walk."""
    return _from_pairs(q.n, [(inverse(g), w) for g, w in q.items()])


def symmetrize(q: SparseMeasure) -> SparseMeasure:
    """Additive symmetrization (q + q*)/2; equals its own reversal."""
    half = Fraction(1, 2)
    pairs = [(g, w * half) for g, w in q.items()]
    pairs += [(inverse(g), w * half) for g, w in q.items()]
    return _from_pairs(q.n, pairs)


def lazy(q: SparseMeasure, p) -> SparseMeasure:
    """p-lazy version p*q + (1-p)*delta_e; p must lie strictly in (0, 1)."""
    p = Fraction(p)
    if not 0 < p < 1:
        raise ValueError(f"laziness p must be in (0,1), got {p}")
    pairs = [(g, w * p) for g, w in q.items()]
    pairs.append((identity(q.n), 1 - p))
    return _from_pairs(q.n, pairs)


def random_transposition(n: int) -> SparseMeasure:
    """1/n on e and 2/n^2 on each transposition (i, j), i != j."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    pairs = [(identity(n), Fraction(1, n))]
    w = Fraction(2, n * n)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            pairs.append((transposition(i, j, n), w))
    return _from_pairs(n, pairs)


def rudvalis_symmetric(n: int) -> SparseMeasure:
    """Uniform on {sigma_n, sigma_n^{-1}, (1, n), e}.

    At n = 2 the first three elements coincide and their weights accumulate.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    quarter = Fraction(1, 4)
    s = cycle_generator(n, n)
    return _from_pairs(
        n,
        [(s, quarter), (inverse(s), quarter), (transposition(1, n, n), quarter), (identity(n), quarter)],
    )


def convolve_measures(a: SparseMeasure, b: SparseMeasure) -> SparseMeasure:
    """(a * b)(g) = sum_h a(h) b(h^{-1} g), i.e. step by a, then by b."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    pairs = []
    for g, wa in a.items():
        for h, wb in b.items():
            pairs.append((compose(g, h), wa * wb))
    return _from_pairs(a.n, pairs)


def convolution_power(q: SparseMeasure, m: int) -> SparseMeasure:
    if m < 0:
        raise ValueError(f"negative power {m}")
    acc = delta_e(q.n)
    for _ in range(m):
        acc = convolve_measures(acc, q)
    return acc


def measure_to_json_obj(q: SparseMeasure) -> dict:
    return {
        "n": q.n,
        "atoms": [{"perm": serialize(g), "weight": str(w)} for g, w in q.items()],
    }
