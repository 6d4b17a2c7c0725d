"""Shared model plumbing: every bundled model exposes the same surface."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..core import Alphabet, Presentation


class ModelError(Exception):
    pass


class EvaluatorUnavailable(ModelError):
    """The model has no full-word decision procedure (only window-level)."""


class TooLong(ModelError):
    """A constructed word does not fit in the requested chain length."""


@dataclass
class Model:
    """A concrete semigroup model wired into the shared machinery.

    sector_label maps a word (tuple of symbol indices) to a hashable label
    identifying its dynamical sector exactly; window_label does the same
    restricted to gate-sized words and always exists (it drives the gate
    table).  charge gives the per-symbol value of the model's tracked
    density (b-charge, c-charge, or star occupancy).
    """

    name: str
    alphabet: Alphabet
    presentation: Presentation
    sector_label: Callable[[tuple], object]
    window_label: Callable[[tuple], object] | None = None
    charge: tuple[int, ...] = ()
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.window_label is None:
            self.window_label = self.sector_label
        if not self.charge:
            self.charge = tuple([0] * self.alphabet.size)

    @property
    def locality(self) -> int:
        return self.presentation.locality

    def parse(self, text: str):
        from ..core import parse_word

        return parse_word(text, self.alphabet)

    def format(self, cells) -> str:
        from ..core import format_word

        return format_word(cells, self.alphabet)
