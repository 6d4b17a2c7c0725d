"""Window equivalence classes and the uniform class-resampling gate.

All length-3 windows over a model's alphabet are partitioned by
semigroup equality (the model's exact window evaluator); a gate replaces
a window by a uniformly random member of its class, self-transitions
included, which makes every gate a symmetric doubly stochastic matrix.
Tables are tiny (at most 343 windows) and built once per model.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .core import neighbor_words
from .models import Model
from .rng import SplitMix64

log = logging.getLogger(__name__)

_table_cache: dict[str, "WindowClassTable"] = {}


class PredicateKillsSelfTransition(Exception):
    pass


@dataclass
class WindowClassTable:
    """Partition of all |S|^3 windows plus flat per-window target arrays.

    Class ids are the smallest member window index, so ids and member
    order are deterministic and the (seed, config) -> trajectory map is
    reproducible across platforms.  The flat arrays list, for every
    window, the targets it may jump to (its whole class when unfiltered)
    in ascending order; `allow_thresh` holds the rejection threshold for
    unbiased sampling (0 means every 64-bit draw is accepted).
    """

    model: Model
    n_symbols: int
    locality: int
    class_of: np.ndarray
    members: dict[int, tuple[int, ...]]
    allow_flat: np.ndarray = field(repr=False)
    allow_start: np.ndarray = field(repr=False)
    allow_count: np.ndarray = field(repr=False)
    allow_thresh: np.ndarray = field(repr=False)
    filtered: bool = False

    @property
    def window_count(self) -> int:
        return self.n_symbols**self.locality

    def window_tuple(self, idx: int) -> tuple[int, ...]:
        s = self.n_symbols
        return (idx // (s * s), (idx // s) % s, idx % s)

    def window_index(self, window) -> int:
        s = self.n_symbols
        w = [int(x) for x in window]
        return w[0] * s * s + w[1] * s + w[2]

    def class_members(self, window) -> tuple[int, ...]:
        return self.members[int(self.class_of[self.window_index(window)])]

    def targets_of(self, window) -> tuple[int, ...]:
        idx = self.window_index(window)
        a, n = self.allow_start[idx], self.allow_count[idx]
        return tuple(int(t) for t in self.allow_flat[a : a + n])


def _draw_threshold(count: int) -> int:
    """Rejection threshold for an unbiased `uint64 % count`; 0 = accept all."""
    rem = (1 << 64) % count
    return 0 if rem == 0 else (1 << 64) - rem


def _flat_arrays(n_windows, targets_per_window):
    counts = np.array([len(t) for t in targets_per_window], dtype=np.int64)
    starts = np.zeros(n_windows, dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    flat = np.array([t for ts in targets_per_window for t in ts], dtype=np.int64)
    thresh = np.array(
        [_draw_threshold(len(t)) if len(t) > 1 else 0 for t in targets_per_window],
        dtype=np.uint64,
    )
    return flat, starts, counts, thresh


def build_table(model: Model) -> WindowClassTable:
    """Partition all windows through the model's exact evaluator."""
    if model.name in _table_cache:
        return _table_cache[model.name]
    s = model.alphabet.size
    n = s**model.locality
    by_label: dict[object, list[int]] = {}
    for idx in range(n):
        w = (idx // (s * s), (idx // s) % s, idx % s)
        by_label.setdefault(model.window_label(w), []).append(idx)
    class_of = np.empty(n, dtype=np.int64)
    members: dict[int, tuple[int, ...]] = {}
    for group in by_label.values():
        rep = min(group)
        members[rep] = tuple(sorted(group))
        for idx in group:
            class_of[idx] = rep
    targets = [members[int(class_of[idx])] for idx in range(n)]
    flat, starts, counts, thresh = _flat_arrays(n, targets)
    table = WindowClassTable(
        model=model,
        n_symbols=s,
        locality=model.locality,
        class_of=class_of,
        members=members,
        allow_flat=flat,
        allow_start=starts,
        allow_count=counts,
        allow_thresh=thresh,
    )
    _table_cache[model.name] = table
    return table


def sample_transition(table: WindowClassTable, window, rng: SplitMix64):
    """Uniform draw over the window's allowed targets (kernel-identical).

    Singleton target sets return the window itself without consuming a
    draw, matching the numba path so trajectories agree exactly.
    """
    idx = table.window_index(window)
    cnt = int(table.allow_count[idx])
    if cnt <= 1:
        return table.window_tuple(idx)
    j = rng.randrange(cnt)
    return table.window_tuple(int(table.allow_flat[table.allow_start[idx] + j]))


def filter_table(table: WindowClassTable, predicate) -> WindowClassTable:
    """Restrict transitions to pairs allowed by `predicate(from, to)`.

    Sampling stays uniform over the surviving targets of each window;
    every window must keep its self-transition (the gate could not be
    stochastic otherwise).
    """
    n = table.window_count
    targets = []
    for idx in range(n):
        w = table.window_tuple(idx)
        kept = tuple(
            t for t in table.members[int(table.class_of[idx])]
            if predicate(w, table.window_tuple(t))
        )
        if idx not in kept:
            raise PredicateKillsSelfTransition(f"window {w} lost its self-transition")
        targets.append(kept)
    flat, starts, counts, thresh = _flat_arrays(n, targets)
    return WindowClassTable(
        model=table.model,
        n_symbols=table.n_symbols,
        locality=table.locality,
        class_of=table.class_of,
        members=table.members,
        allow_flat=flat,
        allow_start=starts,
        allow_count=counts,
        allow_thresh=thresh,
        filtered=True,
    )


def irreversible_c_table(model: Model) -> WindowClassTable:
    """The annihilation-only modification: |c|-count may never increase."""
    from .models import itbs

    base = build_table(model)

    def no_c_creation(w_from, w_to):
        return itbs.n_abs_c(w_to) <= itbs.n_abs_c(w_from)

    return filter_table(base, no_c_creation)


def move_closure_partition(model: Model) -> dict[tuple, int]:
    """Partition of windows by fixed-length-3 relation moves only.

    A validation artifact: it always refines the evaluator partition, and
    any strict refinement is window-level fragility (logged, not an
    error).
    """
    s = model.alphabet.size
    part: dict[tuple, int] = {}
    seen: set[tuple] = set()
    for idx in range(s**3):
        w = (idx // (s * s), (idx // s) % s, idx % s)
        if w in seen:
            continue
        component = {w}
        frontier = [w]
        while frontier:
            x = frontier.pop()
            for y in neighbor_words(x, model.presentation):
                if y not in component:
                    component.add(y)
                    frontier.append(y)
        rep = min(
            x[0] * s * s + x[1] * s + x[2] for x in component
        )
        for x in component:
            part[x] = rep
            seen.add(x)
    return part


def log_move_refinement(model: Model) -> list[tuple]:
    """Report windows whose move component is smaller than their class."""
    table = build_table(model)
    move_part = move_closure_partition(model)
    fragile = []
    for idx in range(table.window_count):
        w = table.window_tuple(idx)
        cls = table.members[int(table.class_of[idx])]
        move_members = [i for i, x in enumerate(cls) if move_part[table.window_tuple(x)] == move_part[w]]
        if len(move_members) != len(cls):
            fragile.append(w)
    if fragile:
        log.info(
            "%s: %d windows have move components finer than their class "
            "(window-level fragility)", model.name, len(fragile)
        )
    return fragile


def dump_csv(table: WindowClassTable, path) -> None:
    """Golden-file dump: one (window, class_id) row per window."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window", "class_id"])
        for idx in range(table.window_count):
            word = table.model.format(table.window_tuple(idx))
            writer.writerow([word, int(table.class_of[idx])])
