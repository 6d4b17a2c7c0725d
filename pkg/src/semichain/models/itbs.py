"""Iterated Baumslag-Solitar model: a second exponential layer (bc = cbb).

Words over {e, a, A, b, B, c, C}.  The group has no known linear
representation, so full words carry no canonical label; equality is only
decided for gate-sized (3-symbol) words, by exhaustive bounded-move
closure.  Identity characters commute freely with everything, so
connectivity inside a padded chain of `cap` cells is exactly
connectivity of e-stripped words of length <= cap under free
reduction/insertion of inverse pairs plus the 2<->3 relation rewrites;
the closure runs over that quotient.
"""

from __future__ import annotations

import numpy as np

from ..core import Alphabet, build_presentation
from ..rng import SplitMix64
from .base import EvaluatorUnavailable, Model, TooLong

E, A_, AI, B_, BI, C_, CI = range(7)  # e a A b B c C

ALPHABET = Alphabet(
    symbols=("e", "a", "A", "b", "B", "c", "C"),
    identity=E,
    inverse_of=(E, AI, A_, BI, B_, CI, C_),
)

# Pentagon chords of both defining relations (see models.bs for the a-b set).
AB_PENTAGON = [
    ("ab", "baa"),
    ("bA", "Aba"),
    ("AA", "BAb"),
    ("AB", "aBA"),
    ("Ba", "aaB"),
]
BC_PENTAGON = [
    ("bc", "cbb"),
    ("cB", "Bcb"),
    ("BB", "CBc"),
    ("BC", "bCB"),
    ("Cb", "bbC"),
]

PRESENTATION = build_presentation(ALPHABET, AB_PENTAGON + BC_PENTAGON)

DEFAULT_CLOSURE_CAP = 8
_partition_cache: dict[tuple, dict[tuple, int]] = {}


def _rewrite_arrays(rules, index_map=None):
    """Directed rewrite tables for the closure kernel (both directions)."""
    directed = []
    for lhs, rhs in rules:
        l = tuple(index_map[s] if index_map else s for s in lhs)
        r = tuple(index_map[s] if index_map else s for s in rhs)
        directed.append((l, r))
        directed.append((r, l))
    n = len(directed)
    src_len = np.zeros(n, dtype=np.int64)
    dst_len = np.zeros(n, dtype=np.int64)
    src = np.zeros((n, 3), dtype=np.int64)
    dst = np.zeros((n, 3), dtype=np.int64)
    for i, (l, r) in enumerate(directed):
        src_len[i] = len(l)
        dst_len[i] = len(r)
        src[i, : len(l)] = l
        dst[i, : len(r)] = r
    return src_len, src, dst_len, dst


def bounded_window_partition(n_symbols, inverse_of, rules, cap, max_states=6_000_000):
    """Partition all length-3 windows by bounded-move connectivity.

    `rules` are (lhs, rhs) tuples over nonzero symbol codes; symbol 0 is
    the identity, stripped before packing.  Returns a dict window tuple
    -> class id (the smallest member window, encoded base-n_symbols).
    Raises if the state budget blows up, since a silent truncation could
    merge too little.
    """
    from .. import _kernels

    windows = []
    codes = np.empty(n_symbols**3, dtype=np.uint64)
    buf = np.empty(8, dtype=np.int64)
    for idx in range(n_symbols**3):
        w = (idx // (n_symbols * n_symbols), (idx // n_symbols) % n_symbols, idx % n_symbols)
        windows.append(w)
        reduced = [s for s in w if s != 0]
        for i, s in enumerate(reduced):
            buf[i] = s
        code = np.uint64(len(reduced) + 1) << np.uint64(54)
        for i in range(len(reduced)):
            code |= np.uint64(buf[i]) << np.uint64(3 * i)
        codes[idx] = code
    inv = np.array(inverse_of, dtype=np.int64)
    inv = np.where(inv < 0, 0, inv)
    src_len, src, dst_len, dst = _rewrite_arrays(rules)
    owners = _kernels.closure_partition(codes, cap, inv, src_len, src, dst_len, dst, max_states)
    if np.any(owners == -2):
        raise RuntimeError(f"closure budget exhausted (cap={cap}, budget={max_states})")
    # canonical ids: smallest window index in each component
    rep: dict[int, int] = {}
    for idx, owner in enumerate(owners):
        o = int(owner)
        if o not in rep or idx < rep[o]:
            rep[o] = idx
    return {windows[idx]: rep[int(owner)] for idx, owner in enumerate(owners)}


def _index_rules(string_rules, alphabet):
    return [
        (tuple(alphabet.index(ch) for ch in lhs), tuple(alphabet.index(ch) for ch in rhs))
        for lhs, rhs in string_rules
    ]


def window_classes(cap: int = DEFAULT_CLOSURE_CAP, check_stability: bool = True):
    """Window -> class map for the 343 windows, with cap-stability guard.

    The partition must be identical at caps (cap - 1) and cap; a
    difference means the scratch space still matters and the closure
    cannot be trusted, which is a hard failure by design.
    """
    key = ("itbs", cap, check_stability)
    if key in _partition_cache:
        return _partition_cache[key]
    rules = _index_rules(AB_PENTAGON + BC_PENTAGON, ALPHABET)
    part = bounded_window_partition(7, ALPHABET.inverse_of, rules, cap)
    if check_stability:
        prev = bounded_window_partition(7, ALPHABET.inverse_of, rules, cap - 1)
        if _partition_signature(prev) != _partition_signature(part):
            raise RuntimeError(
                f"window partition changed between caps {cap - 1} and {cap}; "
                "raise the cap until it stabilizes"
            )
    _partition_cache[key] = part
    return part


def _partition_signature(part):
    groups: dict[int, list] = {}
    for w, c in part.items():
        groups.setdefault(c, []).append(w)
    return sorted(tuple(sorted(g)) for g in groups.values())


def itbs_window_equal(u, v, cap: int = DEFAULT_CLOSURE_CAP) -> bool:
    """Equality of two 3-symbol words under padded-move connectivity."""
    part = window_classes(cap)
    return part[tuple(int(s) for s in u)] == part[tuple(int(s) for s in v)]


def _window_label(word):
    w = tuple(int(s) for s in word)
    if len(w) != 3:
        raise EvaluatorUnavailable("iterated-BS labels exist only for 3-site windows")
    return window_classes()[w]


def n_c(word) -> int:
    total = 0
    for s in word:
        s = int(s)
        if s == C_:
            total += 1
        elif s == CI:
            total -= 1
    return total


def n_abs_c(word) -> int:
    return sum(1 for s in word if int(s) in (C_, CI))


def w_huge_core(n: int) -> list[int]:
    """The commutator loop a^-1 v(n)^-1 a v(n), length 8n + 8.

    v(n) = (c^-n b^-1 c^n) a (c^-n b c^n) equals a^(2^(2^n)), so the loop
    closes but its area is doubly exponential in n.
    """
    x = [CI] * n + [BI] + [C_] * n  # c^-n b^-1 c^n
    y = [CI] * n + [B_] + [C_] * n  # c^-n b c^n
    v = x + [A_] + y
    v_inv = x + [AI] + y  # (x a y)^-1 = y^-1 a^-1 x^-1 with y^-1 = x, x^-1 = y
    return [AI] + v_inv + [A_] + v


def make_w_huge(n: int, L: int, rng: SplitMix64) -> np.ndarray:
    core = w_huge_core(n)
    if L < len(core):
        raise TooLong(f"need L >= {len(core)} for n={n}")
    cells = np.full(L, E, dtype=np.uint8)
    for sym, pos in zip(core, rng.choice_indices(L, len(core))):
        cells[pos] = sym
    return cells


MODEL = Model(
    name="itbs",
    alphabet=ALPHABET,
    presentation=PRESENTATION,
    sector_label=_window_label,
    window_label=_window_label,
    charge=(0, 0, 0, 0, 0, 1, -1),  # n_c
)
