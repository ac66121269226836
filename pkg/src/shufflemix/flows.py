"""Cayley-graph path flows and the comparison bounds they certify.

A flow routes the mass of a target measure through paths in the Cayley graph
of a comparison measure q: every target atom y receives paths ending at y
whose weights sum to the atom's mass, exactly, in rational arithmetic.  The
congestion constant

    A(eta) = max_s (1/q(s)) sum_paths |delta| N(s, delta) eta(delta)

(N counts how often the generator s appears in the path) then bounds the
target's Dirichlet form by A times the comparison form, which converts known
mixing or spectral information about one walk into bounds for the other.
Flows made of odd-length loops at the identity bound the least eigenvalue
instead: beta_min >= -1 + (1 + beta~_min)/A.

Four constructions are provided: odd loops for the symmetrized shuffle, two
routings of the random-transposition measure through shuffle generators (one
for k close to n, one for general k), and a routing of the symmetrized
shuffle through the Rudvalis generators {sigma_n^{+-1}, (1, n)}.  Printed
per-path weights in the source analyses sum to half the transposition mass
(they count unordered pairs once); the builders double them so marginals
match the target exactly rather than up to a factor absorbed in a constant.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import CapacityError, UnreachableTargetError
from .exact import DENSE_CAP, group_table, mixing_time, spectrum
from .measures import (
    SparseMeasure,
    delta_e,
    measure_to_json_obj,
    random_transposition,
    rudvalis_symmetric,
    symmetrize,
    top_to_bottom_k,
)
from .perms import (
    Permutation,
    cycle_generator,
    inverse,
    rank,
    serialize,
    transposition,
    unrank,
)

BFS_CAP = 8          # breadth-first search over n! vertices


@lru_cache(maxsize=None)
def letter_perm(name: str, n: int) -> Permutation:
    """Resolve a generator name: "s{l}" / "s{l}inv" are the cycles sigma_l
    and their inverses, "tau" is the transposition (1, n).

    >>> letter_perm("s3", 3).map
    (2, 3, 1)
    >>> letter_perm("s3inv", 3) == inverse(letter_perm("s3", 3))
    True
    """
    if name == "tau":
        return transposition(1, n, n)
    if name.startswith("s"):
        body = name[1:-3] if name.endswith("inv") else name[1:]
        if body.isdigit():
            g = cycle_generator(int(body), n)
            return inverse(g) if name.endswith("inv") else g
    raise ValueError(f"unknown generator name {name!r}")


def invert_letter(name: str) -> str:
    if name == "tau":
        return name
    return name[:-3] if name.endswith("inv") else name + "inv"


def generator_name(g: Permutation) -> str:
    """Canonical display name for a permutation: e, s{l}, s{l}inv, or tau."""
    if g.is_identity():
        return "e"
    for l in range(2, g.n + 1):
        c = cycle_generator(l, g.n)
        if g == c:
            return f"s{l}"
        if g == inverse(c):
            return f"s{l}inv"
    if g == transposition(1, g.n, g.n):
        return "tau"
    return serialize(g)


@dataclass(frozen=True)
class CayleyPath:
    """Word of generator names, walked left to right from e by right
    multiplication; the endpoint is the product of the letters in written
    order.  Hash and equality use the word only, so paths key flow dicts.
    """

    n: int
    word: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def endpoint(self) -> Permutation:
        cached = self.__dict__.get("_endpoint")
        if cached is None:
            # fold one-line tuples directly; Permutation validation per step
            # would dominate at tens of thousands of paths
            cur = tuple(range(1, self.n + 1))
            for name in self.word:
                s = letter_perm(name, self.n).map
                cur = tuple(cur[x - 1] for x in s)
            cached = Permutation(self.n, cur)
            object.__setattr__(self, "_endpoint", cached)
        return cached


def path_endpoint(path: CayleyPath) -> Permutation:
    """Product of the path's letters in written order (empty word -> e).

    >>> path_endpoint(CayleyPath(5, ("s3inv", "s5", "s4inv", "s3"))) == transposition(3, 5, 5)
    True
    """
    return path.endpoint


@dataclass(frozen=True)
class Flow:
    """Weighted paths routing ``target`` through the Cayley graph of ``q``.

    Letters must name support elements of q (the identity may appear as a
    letter only when q(e) > 0, which odd loop flows at k = n exploit).
    Marginal correctness is checked by :func:`verify_flow`, not here, so that
    a mis-weighted flow can be built and reported on.
    """

    target: SparseMeasure
    q: SparseMeasure
    paths: dict[CayleyPath, Fraction] = field(compare=False)
    odd_only: bool = False

    def __post_init__(self):
        if self.target.n != self.q.n:
            raise ValueError(f"size mismatch: target n={self.target.n}, q n={self.q.n}")
        cleaned = {}
        names = set()
        for p, w in self.paths.items():
            if p.n != self.q.n:
                raise ValueError(f"path size {p.n} != {self.q.n}")
            w = Fraction(w)
            if w < 0:
                raise ValueError(f"negative weight {w}")
            if self.odd_only and p.length % 2 == 0:
                raise ValueError(f"even-length path {p.word!r} in odd-only flow")
            names.update(p.word)
            cleaned[p] = cleaned.get(p, Fraction(0)) + w
        for name in sorted(names):
            if self.q.weight(letter_perm(name, self.q.n)) == 0:
                raise ValueError(f"letter {name!r} is not in the support of q")
        object.__setattr__(self, "paths", cleaned)

    @property
    def n(self) -> int:
        return self.q.n


@dataclass(frozen=True)
class FlowVerification:
    exact: bool
    discrepancies: tuple     # (perm string, routed mass, target mass)


def verify_flow(flow: Flow) -> FlowVerification:
    """Exact rational check that path-endpoint marginals equal the target."""
    routed: dict[int, Fraction] = {}
    for p, w in flow.paths.items():
        if w == 0:
            continue
        r = rank(p.endpoint)
        routed[r] = routed.get(r, Fraction(0)) + w
    bad = []
    for r in sorted(set(routed) | set(flow.target.atoms)):
        got = routed.get(r, Fraction(0))
        want = flow.target.atoms.get(r, Fraction(0))
        if got != want:
            bad.append((serialize(unrank(r, flow.n)), got, want))
    return FlowVerification(exact=not bad, discrepancies=tuple(bad))


@dataclass(frozen=True)
class FlowReport:
    a_value: Fraction
    a_float: float
    per_generator: tuple            # (name, q(s), term) in rank order
    lower_bound: Fraction | None = None
    comparisons: tuple = ()         # (label, bound, holds)


def congestion_A(flow: Flow, lower_bound: bool = False, bounds: dict | None = None) -> FlowReport:
    """Exact congestion constant A(eta) with a per-generator breakdown.

    Traffic sums |delta| * N(s, delta) are accumulated as integers per weight
    class, so the Fraction work is proportional to the number of distinct
    weights rather than the number of letters.
    """
    n = flow.n
    per_weight: dict[Fraction, dict[str, int]] = {}
    for p, w in flow.paths.items():
        if w == 0 or not p.word:
            continue
        bucket = per_weight.setdefault(w, {})
        length = p.length
        for name, c in Counter(p.word).items():
            bucket[name] = bucket.get(name, 0) + length * c
    traffic: dict[int, Fraction] = {}
    for w, bucket in per_weight.items():
        for name, units in bucket.items():
            r = rank(letter_perm(name, n))
            traffic[r] = traffic.get(r, Fraction(0)) + w * units
    rows = []
    for g, qs in flow.q.items():
        r = rank(g)
        if qs == 0:
            if traffic.get(r, Fraction(0)) != 0:
                raise ValueError(f"generator {generator_name(g)} has q = 0 but carries traffic")
            continue
        rows.append((generator_name(g), qs, traffic.get(r, Fraction(0)) / qs))
    a = max((t for _, _, t in rows), default=Fraction(0))
    lb = congestion_lower_bound(flow.target, [g for g, _ in flow.q.items()]) if lower_bound else None
    comps = tuple(
        (label, float(b), float(a) <= float(b) * (1 + 1e-12))
        for label, b in (bounds or {}).items()
    )
    return FlowReport(
        a_value=a,
        a_float=float(a),
        per_generator=tuple(rows),
        lower_bound=lb,
        comparisons=comps,
    )


def congestion_lower_bound(target: SparseMeasure, generators) -> Fraction:
    """sum_g d_S(e, g)^2 * target(g): no flow over S can beat this congestion.

    Distances come from breadth-first search on the Cayley graph; the
    generator set is symmetrized and identity letters are dropped (self loops
    never shorten a distance).
    """
    n = target.n
    if n > BFS_CAP:
        raise CapacityError(f"n={n} exceeds breadth-first search cap {BFS_CAP}")
    t = group_table(n)
    gens = {}
    for g in generators:
        if not g.is_identity():
            gens[g.map] = None
            gens[inverse(g).map] = None
    letters = [t.right_mul(m) for m in gens]
    dist = np.full(t.size, -1, dtype=np.int64)
    dist[0] = 0
    queue = deque([0])
    while queue:
        x = queue.popleft()
        d = dist[x] + 1
        for j in letters:
            y = int(j[x])
            if dist[y] < 0:
                dist[y] = d
                queue.append(y)
    acc = Fraction(0)
    for g, w in target.items():
        d = int(dist[t.index[g.map]])
        if d < 0:
            raise UnreachableTargetError(
                f"target atom {serialize(g)} not reachable from the generators"
            )
        acc += w * d * d
    return acc


# ---------------------------------------------------------------------------
# builders


def _short_word(i: int, j: int) -> tuple[str, ...]:
    # ends at the transposition (i, j) for j > i; the trailing pair
    # degenerates to s{i}inv s{i} when j = i + 1, which is kept as printed
    return (f"s{i}inv", f"s{j}", f"s{j-1}inv", f"s{i}")


def _strip_identity(word) -> tuple[str, ...]:
    return tuple(x for x in word if x not in ("s1", "s1inv"))


def transposition_word_large_k(n: int, C: int, i: int, j: int) -> tuple[str, ...]:
    """Word ending at (i, j) over {sigma_l : l > C}, for the k = n - C flow."""
    if not 1 <= i < j <= n:
        raise ValueError(f"need 1 <= i < j <= n, got ({i}, {j})")
    if i >= C + 1:
        return _strip_identity(_short_word(i, j))
    m = C - i + 1
    if j <= n - C:
        return (f"s{n}inv",) * m + _short_word(C + 1, j + C - i + 1) + (f"s{n}",) * m
    return (f"s{n-C}inv",) * m + _short_word(C + 1, j) + (f"s{n-C}",) * m


def transposition_words_general(n: int, k: int, i: int, j: int) -> tuple[tuple[str, ...], ...]:
    """Words ending at (i, j) over the bottom-k generators: one short word
    when i sits in the generator range, otherwise k - 1 conjugations, one per
    l in (n-k, n)."""
    if not 1 <= i < j <= n:
        raise ValueError(f"need 1 <= i < j <= n, got ({i}, {j})")
    if i > n - k:
        return (_strip_identity(_short_word(i, j)),)
    words = []
    for l in range(n - k + 1, n):
        sl, sli = f"s{l}", f"s{l}inv"
        if j > l:
            words.append((sli,) * (l - i) + _short_word(l, j) + (sl,) * (l - i))
        else:
            adj = _short_word(l, l + 1)
            words.append(
                (sli,) * (l - j)
                + adj
                + (sli,) * (j - i)
                + adj
                + (sl,) * (j - i)
                + adj
                + (sl,) * (l - j)
            )
    return tuple(words)


def build_odd_flow_tbk(n: int, k: int) -> Flow:
    """Odd loop flow at e over the symmetrized shuffle generators.

    For each odd l in [n-k+1, n] the loop walks sigma_l (and its inverse)
    l times; weights are 1/(2Z) * 1/l^2 per direction with Z summing 1/l^2
    over the odd l, so the total mass at e is exactly 1.  At l = 1 both
    directions are the same single identity letter and merge into one path,
    carried by the identity mass of the symmetrized measure at k = n.
    """
    q = symmetrize(top_to_bottom_k(n, k))
    odd_ls = [l for l in range(n - k + 1, n + 1) if l % 2 == 1]
    if not odd_ls:
        raise ValueError(f"no odd cycle length in [{n - k + 1}, {n}]")
    z = sum((Fraction(1, l * l) for l in odd_ls), Fraction(0))
    paths: dict[CayleyPath, Fraction] = {}
    for l in odd_ls:
        w = Fraction(1, 2 * l * l) / z
        if l == 1:
            paths[CayleyPath(n, ("s1",))] = 2 * w
        else:
            paths[CayleyPath(n, (f"s{l}",) * l)] = w
            paths[CayleyPath(n, (f"s{l}inv",) * l)] = w
    return Flow(target=delta_e(n), q=q, paths=paths, odd_only=True)


def odd_flow_eigenvalue_bound(flow: Flow, beta_tilde_min=1) -> Fraction:
    """Least-eigenvalue bound -1 + (1 + beta~_min)/A(eta) from an odd flow.

    beta~_min is the least eigenvalue of the target walk; the point mass at e
    drives the identity chain, whose spectrum is {1}.
    """
    for p in flow.paths:
        if p.length % 2 == 0:
            raise ValueError(f"even-length path {p.word!r}: bound needs odd loops only")
    a = congestion_A(flow).a_value
    if a == 0:
        raise ValueError("flow carries no traffic; congestion is zero")
    return -1 + (1 + Fraction(beta_tilde_min)) / a


def build_flow_large_k(n: int, C: int) -> Flow:
    """Random-transposition flow over the shuffle generators at k = n - C.

    Every transposition (i, j) gets one path: a short conjugation when both
    ends exceed C, otherwise a conjugation by sigma_n or sigma_{n-C} powers
    that first carries i up into the generator range.  Requires n > 2C + 2 so
    the two ranges cannot collide.
    """
    if not (isinstance(C, int) and C >= 0):
        raise ValueError(f"C must be a nonnegative integer, got {C!r}")
    if n <= 2 * C + 2:
        raise ValueError(f"need n > 2C + 2, got n={n}, C={C}")
    k = n - C
    q = symmetrize(top_to_bottom_k(n, k))
    target = random_transposition(n)
    w = Fraction(2, n * n)
    paths: dict[CayleyPath, Fraction] = {CayleyPath(n, ()): Fraction(1, n)}
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            paths[CayleyPath(n, transposition_word_large_k(n, C, i, j))] = w
    return Flow(target=target, q=q, paths=paths)


def build_flow_general(n: int, k: int) -> Flow:
    """Random-transposition flow over the shuffle generators for any k.

    Transpositions inside the generator range take the short conjugation.
    A transposition with i <= n - k splits its mass over k - 1 paths, one per
    l in (n-k, n): conjugating by sigma_l powers either reduces to a short
    word (j > l) or to three copies of the adjacent transposition word
    delta_{l,l+1} separated by sigma_l powers (j <= l).
    """
    if not (isinstance(k, int) and 1 < k <= n):
        raise ValueError(f"need n >= k > 1, got n={n}, k={k}")
    q = symmetrize(top_to_bottom_k(n, k))
    target = random_transposition(n)
    w_short = Fraction(2, n * n)
    w_long = Fraction(2, (k - 1) * n * n)
    paths: dict[CayleyPath, Fraction] = {CayleyPath(n, ()): Fraction(1, n)}
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            words = transposition_words_general(n, k, i, j)
            w = w_short if len(words) == 1 else w_long
            for word in words:
                p = CayleyPath(n, word)
                paths[p] = paths.get(p, Fraction(0)) + w
    return Flow(target=target, q=q, paths=paths)


def build_flow_rudvalis(n: int, k: int) -> Flow:
    """Symmetrized-shuffle flow over the Rudvalis generators.

    Each sigma_l is reached as sigma_n (sigma_n^{-1} tau)^{n-l} sigma_n^{n-l};
    inverses take the reversed word with inverted letters.  One path per
    support atom carrying exactly its mass, so the flow is simple and the
    marginals are immediate.
    """
    target = symmetrize(top_to_bottom_k(n, k))
    q = rudvalis_symmetric(n)
    paths: dict[CayleyPath, Fraction] = {}
    for g, w in target.items():
        paths[CayleyPath(n, _rudvalis_word_for(g, n))] = w
    return Flow(target=target, q=q, paths=paths)


def rudvalis_generator_word(n: int, l: int) -> tuple[str, ...]:
    """Word ending at sigma_l over {sigma_n^{+-1}, tau}: one sigma_n, then
    n - l rounds of sigma_n^{-1} tau, then n - l closing sigma_n letters."""
    if not 2 <= l <= n:
        raise ValueError(f"cycle length {l} outside 2..{n}")
    m = n - l
    return (f"s{n}",) + (f"s{n}inv", "tau") * m + (f"s{n}",) * m


def _rudvalis_word_for(g: Permutation, n: int) -> tuple[str, ...]:
    if g.is_identity():
        return ()
    for l in range(2, n + 1):
        c = cycle_generator(l, n)
        if g == c:
            return rudvalis_generator_word(n, l)
        if g == inverse(c):
            return tuple(invert_letter(x) for x in reversed(rudvalis_generator_word(n, l)))
    raise ValueError(f"{serialize(g)} is not a shuffle generator")


def rudvalis_congestion_bound(n: int, k: int) -> Fraction:
    """(4/k) sum over the bottom k of (3(n-l) + 1)^2, the printed estimate."""
    return Fraction(4, k) * sum((3 * (n - l) + 1) ** 2 for l in range(n - k + 1, n + 1))


def general_congestion_bound(n: int, k: int) -> Fraction:
    """18n^2 + 8k^2/n^2, the printed estimate for the general-k flow."""
    return 18 * n * n + Fraction(8 * k * k, n * n)


def large_k_congestion_bound(C: int) -> int:
    """8[C(C+2)^2 + 1], the printed estimate for the large-k flow."""
    return 8 * (C * (C + 2) ** 2 + 1)


# ---------------------------------------------------------------------------
# Dirichlet forms and the comparison mixing bound


def dirichlet_form(f, q: SparseMeasure) -> float:
    """E_q(f, f) = (1/(2|G|)) sum_{x,y} |f(xy) - f(x)|^2 q(y)."""
    t = group_table(q.n)
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (t.size,):
        raise ValueError(f"expected f of length {t.size}, got {f.shape}")
    acc = 0.0
    for g, w in q.items():
        diff = f[t.right_mul(g.map)] - f
        acc += float(w) * float(diff @ diff)
    return acc / (2 * t.size)


def dirichlet_form_operator(f, q: SparseMeasure) -> float:
    """<(I - Q)f, f> under the uniform inner product; equals
    :func:`dirichlet_form` when q is symmetric."""
    t = group_table(q.n)
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (t.size,):
        raise ValueError(f"expected f of length {t.size}, got {f.shape}")
    qf = np.zeros(t.size)
    for g, w in q.items():
        qf += float(w) * f[t.right_mul(g.map)]
    return float((f - qf) @ f) / t.size


@dataclass(frozen=True)
class ComparisonBoundReport:
    n: int
    k: int
    a_value: float
    reference_t2: int
    term_reference: float        # A * T2 of the flow's target walk
    term_entropy: float          # A * log n!
    term_beta: float             # 1/(-log beta_-); 0 when the spectrum is nonnegative
    bound: float
    t2_exact: int
    holds: bool
    slack: float


def comparison_bound_report(n: int, k: int, flow: Flow, reference_t2: int,
                            m_max: int = 200) -> ComparisonBoundReport:
    """L2 mixing bound for the flow's comparison walk q:

        T2(q) <= max(A * T2(target), A * log|G|, 1/(-log beta_-)),

    beta_- = max(0, -beta_min(q)).  Checked against the exact T2 of q.
    """
    if flow.n > DENSE_CAP:
        raise CapacityError(f"n={flow.n} exceeds dense cap {DENSE_CAP}")
    a = float(congestion_A(flow).a_value)
    beta_minus = max(0.0, -spectrum(flow.q).beta_min)
    if beta_minus >= 1.0:
        term_beta = math.inf
    elif beta_minus == 0.0:
        term_beta = 0.0
    else:
        term_beta = 1.0 / (-math.log(beta_minus))
    term_reference = a * reference_t2
    term_entropy = a * math.log(math.factorial(n))
    bound = max(term_reference, term_entropy, term_beta)
    t2 = mixing_time(flow.q, "l2", m_max).mixing_time
    if t2 is None:
        raise ValueError(f"m_max={m_max} too small to reach the L2 threshold")
    return ComparisonBoundReport(
        n=n,
        k=k,
        a_value=a,
        reference_t2=reference_t2,
        term_reference=term_reference,
        term_entropy=term_entropy,
        term_beta=term_beta,
        bound=bound,
        t2_exact=t2,
        holds=t2 <= bound,
        slack=bound - t2,
    )


# ---------------------------------------------------------------------------
# serialization


def flow_to_json_obj(flow: Flow) -> dict:
    items = sorted(flow.paths.items(), key=lambda kv: (rank(kv[0].endpoint), kv[0].word))
    return {
        "target": measure_to_json_obj(flow.target),
        "q": measure_to_json_obj(flow.q),
        "odd_only": flow.odd_only,
        "paths": [{"word": list(p.word), "weight": str(w)} for p, w in items],
    }


def flow_report_rows(report: FlowReport):
    """(header, rows) for the per-generator congestion CSV."""
    header = ("generator", "q_weight", "term")
    rows = [(name, qs, term) for name, qs, term in report.per_generator]
    return header, rows
