"""Independent oracles used to freeze expected values.

Everything here is deliberately self-contained: no imports from the package
under test, simple data (tuples, Fractions), brute-force algorithms.  Slow is
fine; these run at tiny n and their outputs are frozen into fixtures or test
literals.
"""

from fractions import Fraction
from itertools import permutations, product
from math import comb, fsum


def o_cycle(l, n):
    """One-line tuple for the cycle sending i -> i+1 (i < l), l -> 1."""
    return tuple(list(range(2, l + 1)) + [1] + list(range(l + 1, n + 1)))


def o_compose(a, b):
    return tuple(a[x - 1] for x in b)


def o_inverse(a):
    out = [0] * len(a)
    for i, x in enumerate(a):
        out[x - 1] = i + 1
    return tuple(out)


def o_transposition(i, j, n):
    m = list(range(1, n + 1))
    m[i - 1], m[j - 1] = j, i
    return tuple(m)


def brute_power(pairs, n, m):
    """Distribution of the m-step walk by enumerating all generator words.

    pairs: list of (one-line tuple, Fraction weight).  Returns a dict mapping
    one-line tuples to exact probabilities.  Cost |support|^m.
    """
    e = tuple(range(1, n + 1))
    dist = {}
    for word in product(pairs, repeat=m):
        g = e
        w = Fraction(1)
        for letter, weight in word:
            g = o_compose(g, letter)
            w *= weight
        dist[g] = dist.get(g, Fraction(0)) + w
    return dist


def brute_tv(dist, n):
    """Total variation to uniform from an exact sparse distribution."""
    import math
    size = math.factorial(n)
    u = Fraction(1, size)
    acc = Fraction(0)
    for w in dist.values():
        acc += abs(w - u)
    acc += (size - len(dist)) * u
    return acc / 2


def brute_lp(dist, n, p):
    import math
    size = math.factorial(n)
    u = Fraction(1, size)
    if p == 1:
        acc = Fraction(0)
        for w in dist.values():
            acc += abs(w / u - 1) * u
        acc += (size - len(dist)) * u          # |0/u - 1| * u per missing atom
        return acc
    acc = Fraction(0)
    for w in dist.values():
        acc += (w / u - 1) ** 2 * u
    acc += (size - len(dist)) * u
    return acc


def brute_mixing_time(pairs, n, metric, m_max=60):
    """First m with distance <= threshold, via repeated exact convolution."""
    import math
    e = tuple(range(1, n + 1))
    dist = {e: Fraction(1)}
    thr_tv = 1 / (2 * math.e)
    thr_l2 = 1 / math.e
    for m in range(0, m_max + 1):
        if metric == "tv":
            if float(brute_tv(dist, n)) <= thr_tv:
                return m
        else:
            if float(brute_lp(dist, n, 2)) ** 0.5 <= thr_l2:
                return m
        nxt = {}
        for g, w in dist.items():
            for letter, lw in pairs:
                h = o_compose(g, letter)
                nxt[h] = nxt.get(h, Fraction(0)) + w * lw
        dist = nxt
    return None


def eigen_matrix(pairs, n):
    """Transition matrix M[x, y] = q(x^{-1} y) over lex-ordered S_n."""
    import numpy as np
    perms = list(permutations(range(1, n + 1)))
    index = {p: i for i, p in enumerate(perms)}
    m = np.zeros((len(perms), len(perms)))
    for i, x in enumerate(perms):
        for letter, w in pairs:
            m[i, index[o_compose(x, letter)]] += float(w)
    return m


def brute_beta_min(pairs, n):
    import numpy as np
    return float(np.linalg.eigvalsh(eigen_matrix(pairs, n))[0])


def tbk_pairs(n, k):
    """(letter, weight) list for the top to bottom-k measure."""
    return [(o_cycle(l, n), Fraction(1, k)) for l in range(n - k + 1, n + 1)]


def symmetrized(pairs):
    acc = {}
    for g, w in pairs:
        acc[g] = acc.get(g, Fraction(0)) + w / 2
        gi = o_inverse(g)
        acc[gi] = acc.get(gi, Fraction(0)) + w / 2
    return list(acc.items())


def bfs_distances_nx(gens, n):
    """Word distance from e to every element of S_n, via networkx BFS."""
    import networkx as nx
    graph = nx.Graph()
    verts = list(permutations(range(1, n + 1)))
    graph.add_nodes_from(verts)
    for v in verts:
        for g in gens:
            graph.add_edge(v, o_compose(v, g))
    e = tuple(range(1, n + 1))
    return nx.single_source_shortest_path_length(graph, e)


def pair_coupling_tail(n, k, m_max):
    """Exact P(coupling time > m) for the card coupling, m = 0..m_max.

    The pair chain starts from (identity, uniform) and follows the blockwise
    rule: deck one moves a uniform bottom-k card to the top; deck two moves
    the same card when its own block holds it, otherwise a uniform card from
    its block minus deck one's block.  Equal pairs are absorbing.  Evolution
    is a sparse float matvec over all (deck1, deck2) pairs, so n stays tiny.
    """
    import numpy as np
    from scipy import sparse

    perms = list(permutations(range(1, n + 1)))
    index = {p: i for i, p in enumerate(perms)}
    size = len(perms)

    def move_to_top(deck, card):
        i = deck.index(card)
        return (card,) + deck[:i] + deck[i + 1:]

    rows, cols, vals = [], [], []
    for d1 in perms:
        b1 = d1[n - k:]
        for d2 in perms:
            s = index[d1] * size + index[d2]
            if d1 == d2:
                rows.append(s)
                cols.append(s)
                vals.append(1.0)
                continue
            b2 = set(d2[n - k:])
            pool = sorted(b2 - set(b1))
            for card in b1:
                if card in b2:
                    moves = [(card, 1.0 / k)]
                else:
                    moves = [(c2, 1.0 / (k * len(pool))) for c2 in pool]
                for c2, w in moves:
                    rows.append(s)
                    cols.append(index[move_to_top(d1, card)] * size
                                + index[move_to_top(d2, c2)])
                    vals.append(w)
    step = sparse.csr_matrix((vals, (rows, cols)), shape=(size**2, size**2))
    equal = np.zeros(size**2, dtype=bool)
    for p in perms:
        equal[index[p] * size + index[p]] = True
    dist = np.zeros(size**2)
    e = tuple(range(1, n + 1))
    dist[index[e] * size:(index[e] + 1) * size] = 1.0 / size
    tails = []
    for _ in range(m_max + 1):
        tails.append(float(dist[~equal].sum()))
        dist = step.T @ dist
    return tails


def coupon_tail(n, m, t):
    """P(more than t-1 labels uncollected after m uniform draws), exactly.

    Inclusion-exclusion over the set of missed labels:
    P(W_m >= t) = sum_{i>=t} (-1)^{i-t} C(i-1, t-1) C(n, i) (1 - i/n)^m.
    """
    terms = []
    for i in range(t, n + 1):
        base = (1.0 - i / n) ** m
        if base == 0.0:
            break
        terms.append((-1) ** (i - t) * comb(i - 1, t - 1) * comb(n, i) * base)
    return fsum(terms)


def harmonic_mean_l0(n):
    """E L_0 = n * H_n as an exact Fraction."""
    return n * sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))
