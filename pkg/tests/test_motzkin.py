import numpy as np
import pytest

from semichain.core import neighbor_words
from semichain.models import motzkin as mz
from semichain.rng import SplitMix64

P = mz.STAR_MODEL.parse
PC = mz.CHIRAL_MODEL.parse


@pytest.mark.parametrize(
    "text,expected",
    [("*", 1), ("(*)", 2), ("((*))*", 5), ("0*)", 2), (")**", 2), ("000", 0), (")*(", 1)],
)
def test_charge_examples(text, expected):
    assert mz.charge_Q(P(text)) == expected


def test_height_profile_shifted_to_zero():
    h = mz.height_profile(P("))(("))
    assert h.min() == 0
    # unmatched closes push the start height up
    assert h[0] == 2


def test_unmatched_counts():
    assert mz.unmatched_counts(P("))((")) == (2, 2)
    assert mz.unmatched_counts(P("(())")) == (0, 0)
    assert mz.unmatched_counts(P(")*(")) == (1, 1)


def test_charge_conserved_by_every_move():
    # the central correctness property: random words, all single moves
    gen = SplitMix64(77).numpy_generator()
    for model, label in ((mz.STAR_MODEL, mz.star_sector), (mz.CHIRAL_MODEL, mz.chiral_sector)):
        for _ in range(400):
            w = tuple(gen.integers(0, 4, size=10).tolist())
            ref = label(w)
            for v in neighbor_words(w, model.presentation):
                assert label(v) == ref, (model.name, w, v)


def test_chiral_gap_charges_examples():
    # trapped charge after each unmatched open parenthesis
    assert mz.chiral_gap_charges(PC("(>0")) == (0, (1,))
    assert mz.chiral_gap_charges(PC(">0(")) == (1, (0,))
    assert mz.chiral_gap_charges(PC(">(>(>>")) == (1, (1, 2))
    assert mz.chiral_gap_charges(PC("((>))>>0")) == (6, ())


def test_star_vs_chiral_window_sectors():
    # star: duplication works on both parenthesis species, so the star may
    # cross an opening parenthesis; chiral: it may not
    assert mz.star_sector(P("(*0")) == mz.star_sector(P("**("))
    assert mz.chiral_sector(PC("(>0")) != mz.chiral_sector(PC(">>("))


def test_clean_examples():
    assert mz.STAR_MODEL.format(mz.clean(P("(0)*"))) == "000*"
    assert mz.STAR_MODEL.format(mz.clean(P("((0))"))) == "00000"
    assert mz.STAR_MODEL.format(mz.clean(P("(*)"))) == "(*)"
    assert mz.STAR_MODEL.format(mz.clean(P("(()())"))) == "000000"


@pytest.mark.parametrize(
    "text,h,expected",
    [
        ("0*0", 0, (1,)),
        ("(*)0(*)", 0, (2, 2)),
        ("(*)0(*)", 5, ()),
        ("((*))00", 1, (4,)),
        ("(*)(*)0", 1, (2, 2)),
    ],
)
def test_h_restriction_examples(text, h, expected):
    assert mz.h_restriction(P(text), h) == expected


def test_h_restriction_invariant_under_cleaning():
    gen = SplitMix64(5).numpy_generator()
    for _ in range(800):
        w = gen.integers(0, 4, size=11, dtype=np.uint8)
        for h in range(0, 4):
            assert mz.h_restriction(w, h) == mz.h_restriction(mz.clean(w), h)


def test_hitting_lower_bound():
    a, b = P("((*))00"), P("(*)(*)0")
    assert mz.star_sector(a) == mz.star_sector(b)
    assert mz.hitting_lower_bound(a, a, 1) == 0.0
    assert mz.hitting_lower_bound(a, b, 1) == 2.0
    with pytest.raises(mz.SectorMismatch):
        mz.hitting_lower_bound(P("*00"), P("**0"), 0)


def test_hitting_bound_below_bfs_distance():
    # exhaustive over a length-7 sector: every same-sector pair respects
    # the bound once the reference height clears the one-move boundary
    # effects (straddling duplications carry 2^(h+1) in a single move, so
    # h = 0, 1 can overestimate by an O(1) factor on tiny instances)
    from itertools import product

    target = mz.star_sector(P("((*))00"))
    words = [w for w in product(range(4), repeat=7) if mz.star_sector(w) == target]
    assert len(words) == 255
    for i, a in enumerate(words):
        dists = _bfs_all(a, mz.STAR_MODEL)
        for b in words[i + 1 :]:
            d = dists.get(b, float("inf"))
            for h in (2, 3):
                bound = mz.hitting_lower_bound(np.array(a), np.array(b), h)
                assert bound <= d + 1e-9, (a, b, h, bound, d)


def _bfs_all(start, model):
    from collections import deque

    dist = {tuple(start): 0}
    queue = deque([tuple(start)])
    while queue:
        x = queue.popleft()
        for y in neighbor_words(x, model.presentation):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def test_reference_state_layout():
    word = mz.reference_state(5, 0, 0, 6)
    assert mz.STAR_MODEL.format(word) == "((*))*"
    word = mz.reference_state(0, 2, 1, 6)
    assert mz.STAR_MODEL.format(word) == "000))("
    with pytest.raises(mz.InsufficientLength):
        mz.reference_state(5, 0, 0, 5)


def test_reference_state_round_trip():
    gen = SplitMix64(9).numpy_generator()
    for _ in range(400):
        Q = int(gen.integers(0, 1 << 24))
        m = int(gen.integers(0, 3))
        n = int(gen.integers(0, 3))
        L = m + n + (2 * (Q.bit_length() - 1) + bin(Q).count("1") if Q else 0) + 4
        w = mz.reference_state(Q, m, n, L)
        assert mz.charge_Q(w) == Q
        assert mz.unmatched_counts(w) == (m, n)


def test_reference_state_huge_charge():
    Q = (1 << 80) + 7
    w = mz.reference_state(Q, 1, 1, 200)
    assert mz.charge_Q(w) == Q


def test_reachable_counts_paren_free_region():
    # no parentheses in the region: the full range allowed by the charge
    # is attainable (transient pair creation lets stars merge and split)
    counts, complete = mz.reachable_star_counts(PC(">>00"), (0, 4), 0, 100_000, model="chiral")
    assert complete and counts == {1, 2}
    counts, _ = mz.reachable_star_counts(PC(")>>0"), (0, 4), 0, 100_000, model="chiral")
    assert counts == {1, 2}


def test_trapped_charge_instance():
    # an unmatched open parenthesis walls off its right-hand gap
    counts, complete = mz.reachable_star_counts(PC(">>>(0"), (4, 5), 0, 200_000, model="chiral")
    assert complete and max(counts) == 0  # strictly below |A| = 1
    star_counts, complete2 = mz.reachable_star_counts(P("***(0"), (4, 5), 0, 200_000, model="star")
    assert complete2 and counts < star_counts


def test_budget_exhaustion_flags_partial():
    counts, complete = mz.reachable_star_counts(PC("((>))>>0"), (0, 5), 4, 50, model="chiral")
    assert not complete
    assert counts  # partial set still reported
