"""Three-color pair-flip sanity model: adjacent equal pairs interconvert.

Moves are xx <-> yy for colors x != y.  Adjacent equal pairs cancel
against each other in the stack-reduction sense, so the sector of a word
is its length together with its irreducible string (the word left after
repeatedly deleting adjacent equal pairs).  Words with no adjacent equal
pair are completely frozen.
"""

from __future__ import annotations

from ..core import Alphabet, build_presentation
from .base import Model

ALPHABET = Alphabet(symbols=("1", "2", "3"), identity=None)

PRESENTATION = build_presentation(
    ALPHABET,
    [("11", "22"), ("11", "33"), ("22", "33")],
    auto_trivial=False,
)


def reduced_string(word) -> tuple[int, ...]:
    """Stack-cancel adjacent equal pairs; invariant under all pair flips."""
    stack: list[int] = []
    for s in word:
        s = int(s)
        if stack and stack[-1] == s:
            stack.pop()
        else:
            stack.append(s)
    return tuple(stack)


def _sector_label(word):
    return (len(tuple(word)), reduced_string(word))


def is_frozen(word) -> bool:
    w = [int(s) for s in word]
    return all(w[i] != w[i + 1] for i in range(len(w) - 1))


MODEL = Model(
    name="pair_flip",
    alphabet=ALPHABET,
    presentation=PRESENTATION,
    sector_label=_sector_label,
)
