"""Star-Motzkin and chiral star-Motzkin semigroup models.

Both act on {0, (, ), *} with Motzkin parenthesis dynamics; the star
character duplicates whenever a parenthesis moves past it in the active
direction.  In the star model both parenthesis species interact with the
star; in the chiral model (written with > in text encodings) only the
closing parenthesis does, so chiral stars can never cross an opening
parenthesis.

Conserved structure: the unmatched-parenthesis counts (m, n) and the
nonlocal charge Q = sum over star sites of 2^h, with h the prefix height
shifted so the lowest point of the full profile (including the final
height) sits at zero.  The chiral model refines Q into one charge per
gap between consecutive unmatched open parentheses, since trapped stars
cannot leave their gap.
"""

from __future__ import annotations

import numpy as np

from ..core import Alphabet, build_presentation
from ..rng import SplitMix64
from .base import Model, ModelError

Z, OP, CL, ST = 0, 1, 2, 3  # 0 ( ) * (or > in the chiral encoding)

STAR_ALPHABET = Alphabet(symbols=("0", "(", ")", "*"), identity=Z)
CHIRAL_ALPHABET = Alphabet(symbols=("0", "(", ")", ">"), identity=Z)

# Pair collapse plus the star duplication rules; 0-commutations are
# auto-generated.  The chiral model keeps only the closing-side rule.
STAR_PRESENTATION = build_presentation(
    STAR_ALPHABET,
    [("()", "00"), ("(*0", "**("), ("0*)", ")**")],
)
CHIRAL_PRESENTATION = build_presentation(
    CHIRAL_ALPHABET,
    [("()", "00"), ("0>)", ")>>")],
)


class SectorMismatch(ModelError):
    pass


class InsufficientLength(ModelError):
    pass


def height_profile(word) -> np.ndarray:
    """Shifted per-site prefix heights h_i = sum_{j<i} (open - close).

    The shift uses the minimum over all L+1 prefix heights (the final
    height included); without the final prefix the charge below would not
    be conserved by boundary moves.
    """
    w = [int(s) for s in word]
    h = 0
    pre = []
    hmin = 0
    for s in w:
        pre.append(h)
        if s == OP:
            h += 1
        elif s == CL:
            h -= 1
        hmin = min(hmin, h)
    return np.array([x - hmin for x in pre], dtype=np.int64)


def unmatched_counts(word) -> tuple[int, int]:
    """(m, n): unmatched close and open parenthesis counts."""
    h = 0
    hmin = 0
    for s in word:
        s = int(s)
        if s == OP:
            h += 1
        elif s == CL:
            h -= 1
        hmin = min(hmin, h)
    return -hmin, h - hmin


def charge_Q(word) -> int:
    """Nonlocal conserved charge: sum of 2^h over star sites."""
    heights = height_profile(word)
    total = 0
    for s, h in zip(word, heights):
        if int(s) == ST:
            total += 1 << int(h)
    return total


def _unmatched_open_positions(word) -> list[int]:
    w = [int(s) for s in word]
    stack: list[int] = []
    unmatched: list[int] = []
    for i, s in enumerate(w):
        if s == OP:
            stack.append(i)
        elif s == CL:
            if stack:
                stack.pop()
    return stack  # left-to-right positions of unmatched opens


def chiral_gap_charges(word) -> tuple[int, tuple[int, ...]]:
    """(ell, k_vec): star charge before the first unmatched open, then
    per-gap trapped charges after each unmatched open.

    Gap i's charge is weighted relative to its floor height (the height
    just after its opening parenthesis); gap 0's floor is the global
    minimum.  Stars can never cross an unmatched open parenthesis, so
    each entry is separately conserved.
    """
    heights = height_profile(word)
    opens = _unmatched_open_positions(word)
    w = [int(s) for s in word]
    charges = [0] * (len(opens) + 1)
    region = 0
    for i, s in enumerate(w):
        while region < len(opens) and i > opens[region]:
            region += 1
        if s == ST:
            base = region  # gap r's floor height is r above the global minimum
            charges[region] += 1 << (int(heights[i]) - base)
    return charges[0], tuple(charges[1:])


def star_sector(word):
    m, n = unmatched_counts(word)
    return (m, n, charge_Q(word))


def chiral_sector(word):
    m, n = unmatched_counts(word)
    ell, kvec = chiral_gap_charges(word)
    return (m, n, ell, kvec)


# ---------------------------------------------------------------------------
# h-restrictions and the hitting-time bound


def clean(word) -> np.ndarray:
    """Cancel every matched () pair separated only by 0s, to a fixpoint."""
    w = [int(s) for s in word]
    changed = True
    while changed:
        changed = False
        open_pos = -1
        for i, s in enumerate(w):
            if s == OP:
                open_pos = i
            elif s == CL:
                if open_pos >= 0 and all(w[j] == Z for j in range(open_pos + 1, i)):
                    w[open_pos] = Z
                    w[i] = Z
                    changed = True
                    break
                open_pos = -1
            elif s == ST:
                open_pos = -1
    return np.array(w, dtype=np.uint8)


def h_restriction(word, h: int) -> tuple[int, ...]:
    """Descending charge vector of the contiguous regions above height h.

    The input should be cleaned first (see `clean`); region charges use
    the absolute shifted heights.  Regions are maximal runs of sites not
    cut by the reference line: a site is cut when its height lies below
    h, or when it sits exactly at h without being a star (sites at the
    line are the channels separating regions; a star resting on the line
    still belongs to its region).  Chargeless regions are dropped, which
    makes the vector invariant under cleaning.
    """
    heights = height_profile(word)
    w = [int(s) for s in word]
    charges = []
    current = 0
    in_region = False
    for i, s in enumerate(w):
        cut = heights[i] < h or (heights[i] == h and s != ST)
        if not cut:
            in_region = True
            if s == ST:
                current += 1 << int(heights[i])
        else:
            if in_region and current:
                charges.append(current)
            current = 0
            in_region = False
    if in_region and current:
        charges.append(current)
    return tuple(sorted(charges, reverse=True))


def hitting_lower_bound(word_a, word_b, h: int, model: str = "star") -> float:
    """Charge-transport estimate of the time to connect two words.

    Both words must share a sector; the estimate is 2^-h times the L1
    distance between their zero-padded descending h-restriction charge
    vectors (charge crosses the reference line in quanta of 2^h).  A
    single move straddling the line carries 2^(h+1), so on tiny
    instances with h comparable to the word height the estimate can
    exceed the true distance by an O(1) factor; it is a genuine lower
    bound once the charge imbalance dominates such boundary effects.
    """
    label = star_sector if model == "star" else chiral_sector
    if label(word_a) != label(word_b):
        raise SectorMismatch("words lie in different sectors")
    qa = list(h_restriction(clean(word_a), h))
    qb = list(h_restriction(clean(word_b), h))
    size = max(len(qa), len(qb))
    qa += [0] * (size - len(qa))
    qb += [0] * (size - len(qb))
    l1 = sum(abs(x - y) for x, y in zip(qa, qb))
    return l1 / (1 << h) if h >= 0 else float(l1 * (1 << -h))


# ---------------------------------------------------------------------------
# reference states and reachability probes


def reference_state(Q: int, m: int, n: int, L: int) -> np.ndarray:
    """Canonical word )^m <nest holding Q in binary> (^n, left-padded with 0s.

    The nest places the binary digits of Q at descending heights, e.g.
    Q=5 -> ((*))* with digit contributions 4 + 1.
    """
    if Q < 0 or m < 0 or n < 0:
        raise ValueError("Q, m, n must be nonnegative")
    core: list[int] = []
    if Q > 0:
        digits = [int(c) for c in bin(Q)[2:]]
        k = len(digits)
        core.extend([OP] * (k - 1))
        core.extend([ST] * digits[0])
        for d in digits[1:]:
            core.append(CL)
            core.extend([ST] * d)
    used = m + n + len(core)
    if used > L:
        raise InsufficientLength(f"need L >= {used}")
    cells = [Z] * (L - used) + [CL] * m + core + [OP] * n
    return np.array(cells, dtype=np.uint8)


def reachable_star_counts(word, region, extra_space: int, cap: int, model: str = "chiral"):
    """All values of the region star count attainable by fixed-length moves.

    The word is padded on the right with `extra_space` 0s and explored by
    exhaustive BFS over the move closure (budgeted at `cap` visited
    states).  Returns (counts, complete); an exhausted budget yields the
    partial set with complete=False.
    """
    from ..core import neighbor_words

    pres = CHIRAL_PRESENTATION if model == "chiral" else STAR_PRESENTATION
    lo, hi = region
    start = tuple(int(s) for s in word) + (Z,) * extra_space
    seen = {start}
    queue = [start]
    counts = {sum(1 for s in start[lo:hi] if s == ST)}
    complete = True
    while queue:
        if len(seen) > cap:
            complete = False
            break
        nxt = []
        for w in queue:
            for v in neighbor_words(w, pres):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
                    counts.add(sum(1 for s in v[lo:hi] if s == ST))
        queue = nxt
    return counts, complete


STAR_MODEL = Model(
    name="star_motzkin",
    alphabet=STAR_ALPHABET,
    presentation=STAR_PRESENTATION,
    sector_label=star_sector,
    charge=(0, 0, 0, 1),  # star occupancy
)

CHIRAL_MODEL = Model(
    name="chiral_motzkin",
    alphabet=CHIRAL_ALPHABET,
    presentation=CHIRAL_PRESENTATION,
    sector_label=chiral_sector,
    charge=(0, 0, 0, 1),
)
