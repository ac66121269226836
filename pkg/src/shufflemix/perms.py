"""Permutations of {1..n}, cycle generators, and lexicographic ranking.

A permutation sigma is stored in one-line form: ``sigma.map[i]`` is the card
label held at position i+1, matching the convention "position i holds the
card with label sigma(i)".  Positions and labels are 1-based in every public
interface; storage is 0-based.

Composition is (a * b)(i) = a(b(i)).  The shuffle walk multiplies generators
on the right, so right multiplication by the cycle ``sigma_l`` moves the
current top card to position l:

>>> deck = identity(4)
>>> moved = compose(deck, cycle_generator(3, 4))
>>> moved.map.index(1) + 1        # card 1 (the old top card) now sits at 3
3
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Permutation:
    """One-line permutation of {1..n}; map[i] holds the label at position i+1."""

    n: int
    map: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"deck size must be positive, got {self.n}")
        if len(self.map) != self.n or sorted(self.map) != list(range(1, self.n + 1)):
            raise ValueError(f"map {self.map!r} is not a bijection of 1..{self.n}")

    def __call__(self, position: int) -> int:
        """Label held at a 1-based position.

        >>> cycle_generator(3, 3)(1)
        2
        """
        if not 1 <= position <= self.n:
            raise ValueError(f"position {position} outside 1..{self.n}")
        return self.map[position - 1]

    def is_identity(self) -> bool:
        return all(self.map[i] == i + 1 for i in range(self.n))

    def __str__(self) -> str:
        return serialize(self)


def identity(n: int) -> Permutation:
    return Permutation(n, tuple(range(1, n + 1)))


def cycle_generator(l: int, n: int) -> Permutation:
    """The cycle sigma_l: sigma(i) = i+1 for i < l, sigma(l) = 1, rest fixed.

    >>> cycle_generator(3, 3).map
    (2, 3, 1)
    >>> cycle_generator(2, 4).map
    (2, 1, 3, 4)
    >>> cycle_generator(1, 4) == identity(4)
    True
    """
    if not 1 <= l <= n:
        raise ValueError(f"cycle length {l} outside 1..{n}")
    return Permutation(n, tuple(list(range(2, l + 1)) + [1] + list(range(l + 1, n + 1))))


def transposition(i: int, j: int, n: int) -> Permutation:
    """The transposition (i, j) in S_n."""
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"bad transposition ({i},{j}) in S_{n}")
    m = list(range(1, n + 1))
    m[i - 1], m[j - 1] = j, i
    return Permutation(n, tuple(m))


def compose(a: Permutation, b: Permutation) -> Permutation:
    """(a * b)(i) = a(b(i)).

    >>> s3 = cycle_generator(3, 3)
    >>> compose(s3, s3).map
    (3, 1, 2)
    >>> compose(s3, compose(s3, s3)) == identity(3)
    True
    """
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    return Permutation(a.n, tuple(a.map[x - 1] for x in b.map))


def inverse(a: Permutation) -> Permutation:
    """The group inverse: compose(a, inverse(a)) is the identity.

    >>> inverse(cycle_generator(3, 3)) == compose(cycle_generator(3, 3), cycle_generator(3, 3))
    True
    """
    out = [0] * a.n
    for pos0, label in enumerate(a.map):
        out[label - 1] = pos0 + 1
    return Permutation(a.n, tuple(out))


def compose_word(letters, n: int) -> Permutation:
    """Left-to-right product of a sequence of permutations (empty word -> e)."""
    acc = identity(n)
    for g in letters:
        acc = compose(acc, g)
    return acc


def rank(a: Permutation) -> int:
    """Lexicographic rank of the one-line array, in [0, n!-1].

    >>> rank(identity(4))
    0
    >>> rank(Permutation(3, (3, 2, 1)))
    5
    """
    # factorial number system: count smaller unused labels at each position
    r = 0
    seen = 0  # bitmask of used labels
    fact = math.factorial(a.n - 1)
    for i, label in enumerate(a.map):
        smaller = bin(seen & ((1 << (label - 1)) - 1)).count("1")
        r += (label - 1 - smaller) * fact
        seen |= 1 << (label - 1)
        if i < a.n - 1:
            fact //= a.n - 1 - i
    return r


def unrank(r: int, n: int) -> Permutation:
    """Inverse of :func:`rank`.

    >>> all(unrank(rank(unrank(i, 4)), 4) == unrank(i, 4) for i in range(24))
    True
    """
    if not 0 <= r < math.factorial(n):
        raise ValueError(f"rank {r} outside [0, {n}!-1]")
    labels = list(range(1, n + 1))
    out = []
    fact = math.factorial(n - 1)
    for i in range(n):
        idx, r = divmod(r, fact)
        out.append(labels.pop(idx))
        if i < n - 1:
            fact //= n - 1 - i
    return Permutation(n, tuple(out))


def serialize(a: Permutation) -> str:
    """One-line form as a comma-separated string, e.g. "2,3,1"."""
    return ",".join(str(x) for x in a.map)


def parse(text: str, n: int | None = None) -> Permutation:
    """Parse the :func:`serialize` format.

    >>> parse("2,3,1") == cycle_generator(3, 3)
    True
    """
    entries = tuple(int(tok) for tok in text.split(","))
    if n is not None and len(entries) != n:
        raise ValueError(f"expected {n} entries, got {len(entries)}")
    return Permutation(len(entries), entries)
