"""The two-generator exponential-growth group model (relation ab = baa).

Words over {e, a, A, b, B} (capital = inverse) evaluate exactly through
the 2x2 upper-triangular representation

    a -> [[1, 1], [0, 1]],   b -> [[1/2, 0], [0, 1]],

whose products stay of the form [[2^p, q], [0, 1]] with q a dyadic
rational.  Matrix equality decides the word problem in linear time, and
the canonical form b^k a^n b^-l is extracted from (p, q) by the
significant-binary-digits rule.  This module also builds the slow-mode
initial states (exponential-area loops and random density waves) and the
Cayley-geometry sampling experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import Alphabet, build_presentation
from ..rng import SplitMix64
from .base import Model, TooLong

E, A_, AI, B_, BI = 0, 1, 2, 3, 4  # e a A b B

ALPHABET = Alphabet(
    symbols=("e", "a", "A", "b", "B"),
    identity=E,
    inverse_of=(E, AI, A_, BI, B_),
)

# The defining relation ab = baa sweeps a pentagonal 2-cell of the Cayley
# complex; the five chords of that pentagon are the elementary 2<->3 site
# rewrites.  Each costs one unit of area; identity commutations and free
# reductions are generated automatically and cost nothing.
PENTAGON = [
    ("ab", "baa"),
    ("bA", "Aba"),
    ("AA", "BAb"),
    ("AB", "aBA"),
    ("Ba", "aaB"),
]

PRESENTATION = build_presentation(ALPHABET, PENTAGON)


@dataclass(frozen=True)
class DyadicMatrix:
    """Value [[2^a_exponent, b_numerator * 2^-b_exponent], [0, 1]].

    Normalized so b_numerator is odd whenever b_exponent > 0 and
    b_exponent = 0 for b_numerator = 0; numerators are arbitrary-precision
    (they reach 2^L for length-L words).
    """

    a_exponent: int
    b_numerator: int
    b_exponent: int

    @staticmethod
    def identity() -> "DyadicMatrix":
        return DyadicMatrix(0, 0, 0)

    @staticmethod
    def normalized(p: int, num: int, exp: int) -> "DyadicMatrix":
        if num == 0:
            return DyadicMatrix(p, 0, 0)
        while exp > 0 and num % 2 == 0:
            num //= 2
            exp -= 1
        return DyadicMatrix(p, num, exp)

    def __mul__(self, other: "DyadicMatrix") -> "DyadicMatrix":
        # [[2^p, q], [0,1]] * [[2^p', q'], [0,1]] = [[2^(p+p'), q + 2^p q'], [0,1]]
        p, q_num, q_exp = self.a_exponent, self.b_numerator, self.b_exponent
        shift = p - other.b_exponent
        if shift + q_exp >= 0:
            num = q_num + other.b_numerator * (1 << (shift + q_exp))
            exp = q_exp
        else:
            exp = -shift
            num = q_num * (1 << (exp - q_exp)) + other.b_numerator
        return DyadicMatrix.normalized(p + other.a_exponent, num, exp)

    @property
    def is_identity(self) -> bool:
        return self.a_exponent == 0 and self.b_numerator == 0

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.a_exponent, self.b_numerator, self.b_exponent)


_GEN = {
    E: DyadicMatrix(0, 0, 0),
    A_: DyadicMatrix(0, 1, 0),
    AI: DyadicMatrix(0, -1, 0),
    B_: DyadicMatrix(-1, 0, 0),
    BI: DyadicMatrix(1, 0, 0),
}


def evaluate(word) -> DyadicMatrix:
    """Left-to-right matrix product of a word; identities contribute nothing."""
    p = 0
    num = 0
    exp = 0
    for s in word:
        s = int(s)
        if s == E:
            continue
        if s == B_:
            p -= 1
        elif s == BI:
            p += 1
        else:
            sign = 1 if s == A_ else -1
            # q += sign * 2^p with q = num * 2^-exp
            if p + exp >= 0:
                num = num + sign * (1 << (p + exp))
            else:
                num = num * (1 << (-p - exp)) + sign
                exp = -p
    m = DyadicMatrix.normalized(p, num, exp)
    return m


def n_b(word) -> int:
    """Net b-charge; equals minus the diagonal exponent of the matrix."""
    total = 0
    for s in word:
        s = int(s)
        if s == B_:
            total += 1
        elif s == BI:
            total -= 1
    return total


@dataclass(frozen=True)
class CanonicalKNL:
    """Exponents of the unique standard form b^k a^n b^-l."""

    k: int
    n: int
    l: int


def canonical_knl(word) -> CanonicalKNL:
    """Extract (k, n, l) from the dyadic matrix of `word`.

    With q = n * 2^-k and 2^p = 2^(l-k): integer q forces k = 0 or l = 0
    (which one follows from the sign of the b-charge); fractional q puts
    k at the number of significant binary digits after the point.  A
    naive l < 0 outcome signals the n = 2^m * odd case and is corrected
    by shifting the power of two back into n.
    """
    m = evaluate(word)
    nb = -m.a_exponent  # k - l
    if m.b_numerator == 0:
        return CanonicalKNL(nb, 0, 0) if nb >= 0 else CanonicalKNL(0, 0, -nb)
    if m.b_exponent == 0:
        if nb > 0:
            return CanonicalKNL(nb, m.b_numerator << nb, 0)
        return CanonicalKNL(0, m.b_numerator, -nb)
    k = m.b_exponent
    l = k - nb
    if l >= 0:
        return CanonicalKNL(k, m.b_numerator, l)
    # naive exponents came out as (k - m, odd, -m); undo the shift
    shift = -l
    return CanonicalKNL(k + shift, m.b_numerator << shift, 0)


def rebuild_matrix(knl: CanonicalKNL) -> DyadicMatrix:
    """Matrix of b^k a^n b^-l, for round-trip checks against evaluate()."""
    return DyadicMatrix.normalized(knl.l - knl.k, knl.n, knl.k)


def log2_abs_plus1(n: int) -> float:
    """log2(|n| + 1) for arbitrary-precision n (the geodesic proxy term)."""
    m = abs(n) + 1
    b = m.bit_length()
    if b <= 512:
        return math.log2(m)
    shift = b - 64
    return math.log2(m >> shift) + shift


def geodesic_bounds(knl: CanonicalKNL) -> tuple[float, float]:
    """Two-sided geodesic-length bounds from the canonical exponents."""
    if knl.n == 0:
        d = abs(knl.k - knl.l)
        return (float(d), float(d))
    n_abs = abs(knl.n)
    b = n_abs.bit_length()
    log2n = math.log2(n_abs) if b <= 512 else math.log2(n_abs >> (b - 64)) + (b - 64)
    base = knl.k + knl.l + log2n
    return (0.5 * base, 4.0 * (base + 1.0))


# ---------------------------------------------------------------------------
# initial-state constructors


def w_large_core(n: int) -> list[int]:
    """The closed loop a b^-n a^-1 b^n a^-1 b^-n a b^n (length 4n + 4)."""
    return (
        [A_] + [BI] * n + [AI] + [B_] * n + [AI] + [BI] * n + [A_] + [B_] * n
    )


def make_w_large(n: int, L: int, rng: SplitMix64) -> np.ndarray:
    """w_large(n) padded to length L with identities at random positions."""
    core = w_large_core(n)
    if L < len(core):
        raise TooLong(f"need L >= {len(core)} for n={n}")
    cells = np.full(L, E, dtype=np.uint8)
    slots = rng.choice_indices(L, len(core))
    for sym, pos in zip(core, slots):
        cells[pos] = sym
    return cells


def make_random_wave(n: int, L: int, rng: SplitMix64) -> np.ndarray:
    """A b-density wave b^n ... b^-n ... with random {a, A, e} filler.

    Shape: w1 b^n w2 b^-n w3 b^n w4 b^-n w5, the filler blocks splitting
    the remaining L - 4n sites as evenly as possible.
    """
    if L < 4 * n:
        raise TooLong(f"need L >= {4 * n} for n={n}")
    filler_total = L - 4 * n
    sizes = [filler_total // 5] * 5
    for i in range(filler_total % 5):
        sizes[i] += 1
    filler_syms = (A_, AI, E)
    out: list[int] = []
    for block, b_sym in zip(sizes, (B_, BI, B_, BI, None)):
        out.extend(filler_syms[rng.randrange(3)] for _ in range(block))
        if b_sym is not None:
            out.extend([b_sym] * n)
    return np.array(out, dtype=np.uint8)


# ---------------------------------------------------------------------------
# sampling experiments (identity-sector fraction, Cayley geometry)

_P1 = 2147483629  # two 31-bit primes for the modular zero screen
_P2 = 2147483587


def _mod_screen(words: np.ndarray) -> np.ndarray:
    """Candidate mask for evaluate(word) == identity, by modular arithmetic.

    Tracks n_b and the off-diagonal entry scaled to an integer, mod two
    31-bit primes.  Zero residues are necessary for identity; survivors
    are verified exactly, so the screen introduces no error.
    """
    from .. import _kernels

    return _kernels.bs_identity_screen(words, _P1, _P2)


def sample_identity_fraction(L: int, samples: int, rng: SplitMix64, batch: int = 1 << 16):
    """Estimate the probability that a uniform length-L word is the identity.

    Returns (p_hat, (wilson_lo, wilson_hi), hits).  Uniform words are
    screened in bulk; the few candidates are confirmed with exact
    arithmetic.
    """
    if samples < 1:
        raise ValueError("samples >= 1 required")
    gen = rng.numpy_generator()
    hits = 0
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        words = gen.integers(0, 5, size=(size, L), dtype=np.uint8)
        for idx in np.nonzero(_mod_screen(words))[0]:
            if evaluate(words[idx]).is_identity:
                hits += 1
        done += size
    p = hits / samples
    z = 1.959963984540054  # 95% Wilson interval
    denom = 1.0 + z * z / samples
    center = (p + z * z / (2 * samples)) / denom
    half = z * math.sqrt(p * (1 - p) / samples + z * z / (4 * samples * samples)) / denom
    return p, (max(0.0, center - half), min(1.0, center + half)), hits


def sample_identity_words(L: int, count: int, rng: SplitMix64, max_batches: int = 20000):
    """Uniform words from the identity sector, by rejection sampling."""
    gen = rng.numpy_generator()
    out = []
    batches = 0
    while len(out) < count and batches < max_batches:
        words = gen.integers(0, 5, size=(1 << 14, L), dtype=np.uint8)
        for idx in np.nonzero(_mod_screen(words))[0]:
            w = words[idx]
            if evaluate(w).is_identity:
                out.append(w.copy())
        batches += 1
    if len(out) < count:
        raise RuntimeError(f"rejection sampling starved: {len(out)}/{count} at L={L}")
    return out[:count]


def geometry_records(L: int, samples: int, rng: SplitMix64, conditioned: bool = False):
    """Canonical-form samples for the geodesic-proxy histograms.

    Unconditioned: canonical data of uniform random length-L words.
    Conditioned: uniform identity-sector words, recording the canonical
    data of their first half (the midpoint excursion probe).
    Each record is (k, l, n_b, log2(|n|+1), in_identity_sector).
    """
    records = []
    if conditioned:
        for w in sample_identity_words(L, samples, rng):
            half = w[: L // 2]
            knl = canonical_knl(half)
            records.append((knl.k, knl.l, knl.k - knl.l, log2_abs_plus1(knl.n), True))
        return records
    gen = rng.numpy_generator()
    words = gen.integers(0, 5, size=(samples, L), dtype=np.uint8)
    for w in words:
        knl = canonical_knl(w)
        m_ident = knl.k == 0 and knl.l == 0 and knl.n == 0
        records.append((knl.k, knl.l, knl.k - knl.l, log2_abs_plus1(knl.n), m_ident))
    return records


# ---------------------------------------------------------------------------
# returning walks on the 3-regular tree

P_UP_SAME = 1.0 / 3.0
P_UP_DIFF = 1.0 / 6.0
P_DOWN = 1.0 / 2.0


def tree_walk_move_counts(n_steps: int, rng: SplitMix64) -> tuple[int, int, int]:
    """Unconditioned move-type counts (up-same, up-different, down)."""
    gen = rng.numpy_generator()
    draws = gen.random(n_steps)
    up_same = int(np.count_nonzero(draws < P_UP_SAME))
    up_diff = int(np.count_nonzero((draws >= P_UP_SAME) & (draws < P_UP_SAME + P_UP_DIFF)))
    return up_same, up_diff, n_steps - up_same - up_diff


def _returning_walks(steps: int, count: int, gen: np.random.Generator):
    """Sample `count` returning walks by rejection, as move sequences.

    A walk is a sequence over {0: up on current sheet, 1: up on the
    branching sheet, 2: down}; rejection enforces that the depth profile
    stays nonnegative and ends at zero.
    """
    walks = []
    batch = 1 << 14
    while len(walks) < count:
        moves = gen.choice(3, size=(batch, steps), p=[P_UP_SAME, P_UP_DIFF, P_DOWN])
        delta = np.where(moves == 2, -1, 1)
        depth = np.cumsum(delta, axis=1)
        ok = (depth.min(axis=1) >= 0) & (depth[:, -1] == 0)
        for i in np.nonzero(ok)[0]:
            walks.append(moves[i])
            if len(walks) == count:
                break
    return walks


def _visited_vertices(moves) -> set[tuple[int, ...]]:
    path: list[int] = []
    seen = {()}
    for m in moves:
        if m == 2:
            path.pop()
        else:
            path.append(int(m))
        seen.add(tuple(path))
    return seen


def tree_walk_branch_points(steps: int, pairs: int, rng: SplitMix64) -> np.ndarray:
    """Deepest tree vertex shared by two independent returning walks.

    Edge labels are fixed per vertex (child 0 = continue the sheet,
    child 1 = branch off), so vertex identities are stable across visits.
    """
    gen = rng.numpy_generator()
    walks = _returning_walks(steps, 2 * pairs, gen)
    out = np.empty(pairs, dtype=np.int64)
    for i in range(pairs):
        va = _visited_vertices(walks[2 * i])
        vb = _visited_vertices(walks[2 * i + 1])
        out[i] = max(len(v) for v in va & vb)
    return out


def _sector_label(word):
    return evaluate(word).as_tuple()


MODEL = Model(
    name="bs",
    alphabet=ALPHABET,
    presentation=PRESENTATION,
    sector_label=_sector_label,
    charge=(0, 0, 0, 1, -1),  # n_b: site charge +1 for b, -1 for B
)
