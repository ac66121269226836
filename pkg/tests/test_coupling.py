import math

import pytest
from scipy import stats as sstats

from shufflemix.coupling import (
    DeckPair,
    bottom_k_to_top_step,
    coupling_trials,
    coupon_collector,
    fisher_yates,
    increasing_bottom_statistic,
    lazy_trial_wrapper,
    single_card_lower_bound,
    single_card_position_step,
    tail_estimate,
    top_insert_couple_step,
    trial_rng,
)
from shufflemix.exact import convolve_step, densify, point_mass, tv_distance
from shufflemix.measures import symmetrize, top_to_bottom_k


def test_trial_rng_is_keyed_and_validated():
    a = trial_rng(3, 7).integers(1000, size=5)
    b = trial_rng(3, 7).integers(1000, size=5)
    c = trial_rng(3, 8).integers(1000, size=5)
    assert a.tolist() == b.tolist()
    assert a.tolist() != c.tolist()
    with pytest.raises(ValueError):
        trial_rng(-1, 0)


def test_fisher_yates_uniform_chi_square():
    counts = {}
    rng = trial_rng(11, 0)
    for _ in range(12000):
        deck = tuple(fisher_yates(3, rng))
        counts[deck] = counts.get(deck, 0) + 1
    _, p = sstats.chisquare(list(counts.values()))
    assert len(counts) == 6
    assert p > 1e-3


def test_engines_realize_identical_trials():
    for kind in ("bottom_k_to_top", "top_insert"):
        for k in (3, 8):
            seq = coupling_trials(8, k, kind, 40, seed=5, engine="sequential")
            par = coupling_trials(8, k, kind, 40, seed=5, engine="lockstep")
            assert [(s.coupling_time, s.censored) for s in seq] == \
                   [(s.coupling_time, s.censored) for s in par]


def test_trials_are_deterministic_in_seed():
    a = coupling_trials(6, 3, "top_insert", 30, seed=9)
    b = coupling_trials(6, 3, "top_insert", 30, seed=9)
    c = coupling_trials(6, 3, "top_insert", 30, seed=10)
    assert a == b
    assert a != c


def test_two_card_deck_couples_in_one_step():
    for s in coupling_trials(2, 2, "bottom_k_to_top", 300, seed=1):
        assert s.coupling_time <= 1
        assert not s.censored


def test_equal_decks_stay_equal_under_both_steps():
    deck = tuple(fisher_yates(7, trial_rng(2, 0)))
    pair = DeckPair(7, deck, deck)
    rng = trial_rng(2, 1)
    for _ in range(80):
        pair = bottom_k_to_top_step(pair, 4, rng)
        assert pair.deck1 == pair.deck2
    for _ in range(80):
        pair = top_insert_couple_step(pair, 4, rng)
        assert pair.deck1 == pair.deck2


def test_censoring_is_flagged_not_dropped():
    out = coupling_trials(6, 2, "bottom_k_to_top", 30, seed=0, cap=3)
    assert all(s.coupling_time <= 3 for s in out)
    censored = [s for s in out if s.censored]
    assert censored and all(s.coupling_time == 3 for s in censored)


def test_bottom_step_moves_each_block_card_uniformly():
    # deck2's moved card must be uniform on its bottom block whatever the
    # overlap with deck1's block; this is the reversed-walk marginal
    pair = DeckPair(6, (1, 2, 3, 4, 5, 6), (4, 1, 6, 2, 3, 5))
    rng = trial_rng(21, 0)
    k = 3
    moved1 = {c: 0 for c in pair.deck1[3:]}
    moved2 = {c: 0 for c in pair.deck2[3:]}
    for _ in range(18000):
        nxt = bottom_k_to_top_step(pair, k, rng)
        moved1[nxt.deck1[0]] += 1
        moved2[nxt.deck2[0]] += 1
    for counts in (moved1, moved2):
        _, p = sstats.chisquare(list(counts.values()))
        assert p > 1e-3


def test_top_insert_slot_marginals_uniform():
    # each deck's own insertion slot must be uniform on the bottom k whether
    # it led or trailed; validates reading the swap block as the trailer's
    pair = DeckPair(6, (1, 2, 3, 4, 5, 6), (4, 1, 6, 2, 3, 5))
    rng = trial_rng(22, 0)
    k = 4
    slots1 = {l: 0 for l in range(3, 7)}
    slots2 = {l: 0 for l in range(3, 7)}
    for _ in range(18000):
        nxt = top_insert_couple_step(pair, k, rng)
        slots1[nxt.deck1.index(pair.deck1[0]) + 1] += 1
        slots2[nxt.deck2.index(pair.deck2[0]) + 1] += 1
    for counts in (slots1, slots2):
        _, p = sstats.chisquare(list(counts.values()))
        assert p > 1e-3


def test_top_insert_swap_case_parks_the_leaders_card():
    # leader's top card sits at trailing position p in the bottom k-1 block;
    # a slot draw of p or p-1 must end with that card at the same position
    # in both decks
    n, k = 6, 4
    pair = DeckPair(n, (1, 2, 3, 4, 5, 6), (2, 3, 4, 1, 6, 5))
    rng = trial_rng(23, 0)
    seen_match = 0
    for _ in range(400):
        nxt = top_insert_couple_step(pair, k, rng)
        card = pair.deck1[0]
        p1 = nxt.deck1.index(card) + 1
        p2 = nxt.deck2.index(card) + 1
        if p1 == p2:
            seen_match += 1
    assert seen_match > 0


def test_top_insert_matched_card_set_never_shrinks():
    # matched cards stay matched (their shared position may shift)
    rng = trial_rng(4, 2)
    pair = DeckPair(6, (1, 2, 3, 4, 5, 6), tuple(fisher_yates(6, rng)))
    for _ in range(300):
        before = {a for a, b in zip(pair.deck1, pair.deck2) if a == b}
        pair = top_insert_couple_step(pair, 4, rng)
        after = {a for a, b in zip(pair.deck1, pair.deck2) if a == b}
        assert before <= after


def test_bottom_step_can_break_a_match():
    # both blocks hold {3,4,5}, so card 3 moves to the top of both decks,
    # but its block positions differ and the shift tears card 4's match apart
    pair = DeckPair(5, (1, 2, 3, 4, 5), (1, 2, 5, 4, 3))
    rng = trial_rng(0, 0)
    for _ in range(50):
        nxt = bottom_k_to_top_step(pair, 3, rng)
        if nxt.deck1[0] == 3:
            matched_before = {c for c, d in zip(pair.deck1, pair.deck2) if c == d}
            matched_after = {c for c, d in zip(nxt.deck1, nxt.deck2) if c == d}
            assert 4 in matched_before and 4 not in matched_after
            break
    else:
        pytest.fail("card 3 never selected in 50 draws")


def test_coupling_tail_dominates_exact_tv():
    # P(T > m) upper-bounds the distance of the m-th convolution power;
    # allow the 3-sigma Monte Carlo margin on the empirical side
    n, k, trials = 5, 3, 4000
    q = top_to_bottom_k(n, k)
    for kind in ("bottom_k_to_top", "top_insert"):
        out = coupling_trials(n, k, kind, trials, seed=7)
        d = point_mass(n)
        for m in range(1, 21):
            d = convolve_step(d, q)
            p, se = tail_estimate(out, m)
            assert p + 3 * se >= tv_distance(d) - 1e-12, (kind, m)


def test_tau_tracking_consistent_with_coupling_time():
    out = coupling_trials(6, 6, "top_insert", 25, seed=3, track_cards=True)
    for s in out:
        assert not s.censored
        assert all(t >= 0 for t in s.tau)
        assert s.coupling_time == max(s.tau)


def test_collector_edge_cases_and_small_mean():
    one = coupon_collector(1, 0, 50, seed=0)
    assert set(one.times) == {1}
    cc = coupon_collector(3, 0, 10_000, seed=2)
    assert all(t >= 3 for t in cc.times)
    assert abs(cc.mean - 5.5) <= 3 * cc.stderr


def test_collector_tail_matches_exact_fixture(frozen):
    exact = frozen.get("collector_tail_1_25")["100"]
    cc = coupon_collector(100, 1, 800, seed=6)
    m = 1.25 * 100 * math.log(100)
    p = sum(t > m for t in cc.times) / len(cc.times)
    se = math.sqrt(max(p * (1 - p), 1e-9) / len(cc.times))
    assert abs(p - exact) <= 4 * se + 1e-3


def test_increasing_bottom_statistic_at_zero_steps():
    rep = increasing_bottom_statistic(40, 40, 6, 0, 200, seed=1)
    assert rep.p_hat == 1.0
    assert abs(rep.estimate - (1 - 1 / 720)) < 1e-12


def test_increasing_bottom_matches_exact_fixture(frozen):
    exact = frozen.get("increasing_bottom_exact")["100"]
    m = 0.75 * 100 * math.log(100)
    rep = increasing_bottom_statistic(100, 100, 6, m, 1200, seed=8)
    assert abs(rep.estimate - exact) <= 4 * rep.stderr + 1e-3


def test_increasing_bottom_small_k_reduces_to_block_collection():
    # with k < n the statistic still watches the initial bottom block only
    rep = increasing_bottom_statistic(8, 4, 2, 1, 400, seed=2)
    assert 0 <= rep.p_hat <= 1
    assert rep.ci_low <= rep.estimate <= rep.ci_high


def test_single_card_starts_outside_the_block():
    rep = single_card_lower_bound(100, 50, 0, 400, seed=4)
    assert rep.prob_estimate == 0.0
    assert rep.lower_bound == pytest.approx(0.5)


def test_single_card_diffusive_window_stays_mostly_outside():
    # l = floor(c (1-c)^2 n^2 / 12) steps with c = 1/2: the +-1 walk has not
    # yet crossed the gap to the block, so occupancy is well under c/3
    n, k = 100, 50
    c = k / n
    l = int(c * (1 - c) ** 2 * n * n / 12)
    rep = single_card_lower_bound(n, k, l, 3000, seed=4)
    assert rep.prob_estimate <= c / 3 + 3 * rep.stderr


def test_single_card_walk_matches_exact_marginal():
    # exact occupancy of the bottom block via dense convolution powers
    n, k, l = 6, 3, 60
    q = symmetrize(top_to_bottom_k(n, k))
    d = point_mass(n)
    for _ in range(l):
        d = convolve_step(d, q)
    start = (n - k) // 2 + 1
    from shufflemix.perms import unrank
    exact = math.fsum(
        d.probs[r]
        for r in range(d.probs.size)
        if unrank(r, n).map.index(start) + 1 >= n - k + 1
        if d.probs[r] > 0
    )
    rep = single_card_lower_bound(n, k, l, 6000, seed=1)
    assert abs(rep.prob_estimate - exact) <= 3 * rep.stderr + 1e-3


def test_single_card_long_run_reaches_block_mass():
    n, k = 30, 6
    l = 20 * n**3 // (k * k)
    rep = single_card_lower_bound(n, k, l, 1500, seed=10)
    assert abs(rep.prob_estimate - k / n) <= 3 * rep.stderr + 5e-3


def test_single_card_position_step_is_a_valid_position():
    rng = trial_rng(12, 0)
    p = 4
    for _ in range(500):
        p = single_card_position_step(p, 9, 4, rng)
        assert 1 <= p <= 9


def test_lazy_wrapper_identity_and_scaling():
    inner = coupling_trials(32, 32, "bottom_k_to_top", 60, seed=13)
    assert [lazy_trial_wrapper(s, 1.0, seed=13) for s in inner] == inner
    lazy = [lazy_trial_wrapper(s, 0.5, seed=13) for s in inner]
    again = [lazy_trial_wrapper(s, 0.5, seed=13) for s in inner]
    assert lazy == again
    ratio = sum(s.coupling_time for s in lazy) / sum(s.coupling_time for s in inner)
    assert 1.7 <= ratio <= 2.3


def test_deck_pair_validation():
    with pytest.raises(ValueError):
        DeckPair(3, (1, 2, 3), (1, 1, 2))
    with pytest.raises(ValueError):
        coupling_trials(5, 1, "top_insert", 3)
    with pytest.raises(ValueError):
        coupling_trials(5, 3, "sideways", 3)
