"""Alphabets, presentations, configurations, and single-relation rewriting.

A configuration of the spin chain is a fixed-length sequence of symbol
indices; symbols are small integers everywhere except at the I/O
boundary, where one printable character per site is used.  A
presentation bundles the symbol alphabet with a finite set of local
relations (equal-length word pairs after identity padding).  Applying a
relation at a position is the elementary dynamical move shared by every
model; everything else in the package (gate tables, exhaustive oracles,
trajectory dynamics) is built on top of these moves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class CoreError(Exception):
    pass


class UnknownSymbol(CoreError):
    def __init__(self, char: str, position: int):
        super().__init__(f"unknown symbol {char!r} at site {position}")
        self.char = char
        self.position = position


class EmptyWord(CoreError):
    pass


class OrientedRelationReversed(CoreError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Symbol set of a model, with optional identity and inverses.

    `inverse_of[i]` is the index of symbol i's inverse, or -1 when the
    symbol has none (semigroup generators, or the identity itself).
    """

    symbols: tuple[str, ...]
    identity: int | None = None
    inverse_of: tuple[int, ...] = ()

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise CoreError("duplicate symbol names")
        inv = self.inverse_of or tuple([-1] * len(self.symbols))
        object.__setattr__(self, "inverse_of", inv)
        if len(inv) != len(self.symbols):
            raise CoreError("inverse_of length mismatch")
        for i, j in enumerate(inv):
            if j >= 0 and inv[j] != i:
                raise CoreError("inverse map is not an involution")
        if self.identity is not None:
            j = inv[self.identity]
            if j not in (-1, self.identity):
                raise CoreError("identity symbol may only be its own inverse")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, name: str) -> int:
        return self.symbols.index(name)


@dataclass(frozen=True)
class Relation:
    """One local rewriting rule lhs <-> rhs (lengths equal, <= locality).

    `core` marks relations that sweep a 2-cell of the Cayley complex and
    therefore count toward the area metric; identity commutations and
    free reductions are non-core ("trivial") moves.
    `oriented` restricts application to the lhs -> rhs direction.
    """

    lhs: tuple[int, ...]
    rhs: tuple[int, ...]
    core: bool = True
    oriented: bool = False


@dataclass(frozen=True)
class Presentation:
    alphabet: Alphabet
    relations: tuple[Relation, ...]
    locality: int = 3
    # (side, replacement, core) triples for every allowed direction,
    # precomputed once so neighbor scans are a flat loop.
    _moves: tuple[tuple[tuple[int, ...], tuple[int, ...], bool], ...] = field(
        default=(), repr=False, compare=False
    )

    def __post_init__(self):
        for r in self.relations:
            if len(r.lhs) != len(r.rhs):
                raise CoreError(f"relation sides differ in length: {r}")
            if len(r.lhs) > self.locality:
                raise CoreError(f"relation longer than locality {self.locality}: {r}")
        moves = []
        for r in self.relations:
            moves.append((r.lhs, r.rhs, r.core))
            if not r.oriented:
                moves.append((r.rhs, r.lhs, r.core))
        object.__setattr__(self, "_moves", tuple(moves))

    @property
    def moves(self):
        return self._moves


def pad_relation(lhs, rhs, identity, core=True, oriented=False):
    """Equalize the lengths of a relation pair by single-identity insertion.

    All distinct insertion positions of the short side are generated, so
    e.g. a 2<->3 rule yields three padded variants.  Done once at
    presentation-build time to keep the move set finite and auditable.
    """
    lhs, rhs = tuple(lhs), tuple(rhs)
    if len(lhs) == len(rhs):
        return [Relation(lhs, rhs, core=core, oriented=oriented)]
    if identity is None:
        raise CoreError("cannot pad relations without an identity symbol")
    if len(lhs) > len(rhs):
        long_side, short_side, flip = lhs, rhs, False
    else:
        long_side, short_side, flip = rhs, lhs, True
    if len(long_side) - len(short_side) != 1:
        raise CoreError("only single-symbol padding is supported")
    out = []
    seen = set()
    for pos in range(len(short_side) + 1):
        padded = short_side[:pos] + (identity,) + short_side[pos:]
        if padded in seen:
            continue
        seen.add(padded)
        if flip:
            out.append(Relation(padded, long_side, core=core, oriented=oriented))
        else:
            out.append(Relation(long_side, padded, core=core, oriented=oriented))
    return out


def trivial_relations(alphabet: Alphabet) -> list[Relation]:
    """Identity commutations and free reductions implied by the alphabet."""
    rels = []
    e = alphabet.identity
    if e is not None:
        for x in range(alphabet.size):
            if x != e:
                rels.append(Relation((x, e), (e, x), core=False))
        for x, xinv in enumerate(alphabet.inverse_of):
            if xinv >= 0 and x != e:
                rels.append(Relation((x, xinv), (e, e), core=False))
    return rels


def build_presentation(alphabet, named_relations, locality=3, auto_trivial=True):
    """Assemble a Presentation from (lhs, rhs[, core, oriented]) name tuples."""
    rels: list[Relation] = []
    for entry in named_relations:
        lhs, rhs = entry[0], entry[1]
        core = entry[2] if len(entry) > 2 else True
        oriented = entry[3] if len(entry) > 3 else False
        lhs_idx = tuple(alphabet.index(s) for s in lhs)
        rhs_idx = tuple(alphabet.index(s) for s in rhs)
        rels.extend(pad_relation(lhs_idx, rhs_idx, alphabet.identity, core, oriented))
    if auto_trivial:
        rels.extend(trivial_relations(alphabet))
    return Presentation(alphabet, tuple(rels), locality=locality)


def load_presentation(path) -> Presentation:
    """Load a custom presentation from a JSON file.

    Format::

        {"symbols": ["e", "a", "A"],
         "identity": "e",
         "inverses": {"a": "A"},
         "locality": 3,
         "relations": [{"lhs": ["a", "a"], "rhs": ["e", "e"],
                        "core": true, "oriented": false}]}

    Relation sides are symbol-name lists; unequal lengths are padded with
    the identity exactly as for the bundled models.
    """
    spec = json.loads(Path(path).read_text())
    symbols = tuple(spec["symbols"])
    identity = symbols.index(spec["identity"]) if spec.get("identity") else None
    inverse = [-1] * len(symbols)
    for a, b in spec.get("inverses", {}).items():
        ia, ib = symbols.index(a), symbols.index(b)
        inverse[ia], inverse[ib] = ib, ia
    if identity is not None:
        inverse[identity] = identity
    alphabet = Alphabet(symbols, identity, tuple(inverse))
    named = [
        (r["lhs"], r["rhs"], r.get("core", True), r.get("oriented", False))
        for r in spec["relations"]
    ]
    return build_presentation(alphabet, named, locality=spec.get("locality", 3))


# ---------------------------------------------------------------------------
# configurations


def parse_word(text: str, alphabet: Alphabet) -> np.ndarray:
    """Parse a textual word, one character per site, whitespace optional."""
    chars = [c for c in text if not c.isspace()]
    if not chars:
        raise EmptyWord("empty word")
    lookup = {name: i for i, name in enumerate(alphabet.symbols)}
    cells = np.empty(len(chars), dtype=np.uint8)
    for i, c in enumerate(chars):
        if c not in lookup:
            raise UnknownSymbol(c, i)
        cells[i] = lookup[c]
    return cells


def format_word(cells, alphabet: Alphabet, sep: str = "") -> str:
    return sep.join(alphabet.symbols[int(c)] for c in cells)


def apply_relation_at(config, presentation, relation_index, position, direction="forward"):
    """Apply one relation at a fixed position; None when the side mismatches.

    The configuration length never changes; `backward` swaps the roles of
    lhs and rhs and is rejected for oriented relations.
    """
    rel = presentation.relations[relation_index]
    if direction == "forward":
        src, dst = rel.lhs, rel.rhs
    elif direction == "backward":
        if rel.oriented:
            raise OrientedRelationReversed(f"relation {relation_index} is oriented")
        src, dst = rel.rhs, rel.lhs
    else:
        raise ValueError(f"bad direction {direction!r}")
    n = len(src)
    if position < 0 or position + n > len(config):
        return None
    window = tuple(int(c) for c in config[position : position + n])
    if window != src:
        return None
    out = np.array(config, dtype=np.uint8, copy=True)
    out[position : position + n] = dst
    return out


def neighbor_words(word, presentation, core_only=False):
    """All distinct words one relation application away from `word`.

    Operates on plain tuples (hashable, BFS-friendly).  The input itself
    is never included, even when some relation maps it to itself.
    """
    L = len(word)
    out = set()
    for src, dst, core in presentation.moves:
        if core_only and not core:
            continue
        n = len(src)
        for pos in range(L - n + 1):
            if word[pos : pos + n] == src:
                new = word[:pos] + dst + word[pos + n :]
                if new != word:
                    out.add(new)
    return out


def neighbors(config, presentation):
    """Array-valued wrapper around `neighbor_words`, deterministic order."""
    found = neighbor_words(tuple(int(c) for c in config), presentation)
    return [np.array(w, dtype=np.uint8) for w in sorted(found)]
