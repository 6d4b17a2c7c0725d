"""Brickwork trajectory evolution, the decoupling protocol, and
geodesic-by-freezing.

A single time step is one brickwork layer: 3-site gates at positions
offset, offset+3, ... with the offset cycling 0, 1, 2 over layers; sites
not covered by a full window idle (open boundaries).  Each gate
resamples its window uniformly within the window's equivalence class.
Trajectories are driven by the numba kernel; `step_layer` is the
pure-python reference that consumes the identical RNG stream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .gates import WindowClassTable, build_table, irreversible_c_table, sample_transition
from .models import Model
from .rng import RNG_ALGORITHM, SplitMix64


class ChainTooShort(Exception):
    pass


class ZeroInitialContrast(Exception):
    pass


@dataclass
class TrajectoryState:
    cells: np.ndarray
    layer_count: int = 0
    rng: SplitMix64 = None  # type: ignore[assignment]

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.uint8)
        if self.rng is None:
            self.rng = SplitMix64(0)


def step_layer(state: TrajectoryState, table: WindowClassTable) -> TrajectoryState:
    """One brickwork layer, in place (reference implementation).

    Applies the gate at every full window of the current offset; windows
    whose class is a singleton consume no randomness.
    """
    L = len(state.cells)
    if L < table.locality:
        raise ChainTooShort(f"need at least {table.locality} sites, have {L}")
    off = state.layer_count % table.locality
    for p in range(off, L - table.locality + 1, table.locality):
        window = tuple(int(c) for c in state.cells[p : p + table.locality])
        state.cells[p : p + table.locality] = sample_transition(table, window, state.rng)
    state.layer_count += 1
    return state


def _advance(cells, table, layer0, n_layers, rng, accum=None, weight_arr=None, weight_now=-1):
    """Kernel wrapper: run n_layers, mutate cells, sync the RNG state."""
    do_accum = accum is not None
    if accum is None:
        accum = np.zeros(1, dtype=np.int64)
    charge = np.array(table.model.charge, dtype=np.int64)
    stop = weight_arr is not None
    if weight_arr is None:
        weight_arr = np.zeros(1, dtype=np.int64)
    state, done, weight = _kernels.run_layers(
        cells,
        table.n_symbols,
        table.allow_flat,
        table.allow_start,
        table.allow_count,
        table.allow_thresh,
        layer0,
        n_layers,
        np.uint64(rng.state),
        charge,
        accum,
        do_accum,
        weight_arr,
        stop,
        weight_now,
    )
    rng.state = int(state)
    return done, weight


def window_weight_array(table: WindowClassTable, per_window) -> np.ndarray:
    out = np.empty(table.window_count, dtype=np.int64)
    for idx in range(table.window_count):
        out[idx] = per_window(table.window_tuple(idx))
    return out


@dataclass
class ContrastRun:
    """Time series of the windowed charge profile and its contrast."""

    times: np.ndarray
    contrast: np.ndarray
    window: int
    t_th: int | None
    thermalized: bool
    censored: bool
    layers_run: int
    profiles: np.ndarray | None = None
    aux: dict = field(default_factory=dict)


def sample_grid(max_layers: int, window: int, stride: float = 1.05):
    """Geometric sample-start times with non-overlapping windows."""
    t = 0
    out = []
    while t + window <= max_layers:
        out.append(t)
        t = max(int(math.ceil(t * stride)), t + window)
    return out


def run_contrast(
    model: Model,
    cells0,
    rng: SplitMix64,
    max_layers: int,
    window: int,
    fraction: float = 0.1,
    stride: float = 1.05,
    early_stop: bool = True,
    overshoot: float = 1.0,
    keep_profiles: bool = False,
    table: WindowClassTable | None = None,
) -> ContrastRun:
    """Evolve and record the windowed charge contrast on a geometric grid.

    contrast(t) is the spatial mean of the squared per-site charge
    averaged over layers [t, t+window); thermalization is the first
    sample with contrast below `fraction` of the initial value.  With
    early_stop, the run ends at the crossing (or at overshoot * t_th
    when overshoot > 1, so the post-collapse tail is still recorded).
    """
    table = table or build_table(model)
    cells = np.array(cells0, dtype=np.uint8, copy=True)
    L = len(cells)
    if L < table.locality:
        raise ChainTooShort(f"need at least {table.locality} sites")
    times = []
    values = []
    profiles = [] if keep_profiles else None
    layer = 0
    t_th = None
    c0 = None
    for t in sample_grid(max_layers, window, stride):
        if t > layer:
            done, _ = _advance(cells, table, layer, t - layer, rng)
            layer += done
        accum = np.zeros(L, dtype=np.int64)
        done, _ = _advance(cells, table, layer, window, rng, accum=accum)
        layer += done
        mean_profile = accum / window
        c = float(np.mean(mean_profile**2))
        times.append(t)
        values.append(c)
        if keep_profiles:
            profiles.append(mean_profile)
        if c0 is None:
            c0 = c
        elif t_th is None and c0 > 0 and c < fraction * c0:
            t_th = t
        if t_th is not None and early_stop and t >= overshoot * t_th:
            break
    thermalized = t_th is not None
    return ContrastRun(
        times=np.array(times, dtype=np.int64),
        contrast=np.array(values),
        window=window,
        t_th=t_th,
        thermalized=thermalized,
        censored=not thermalized,
        layers_run=layer,
        profiles=np.array(profiles) if keep_profiles else None,
    )


def run_contrast_ensemble(
    model: Model,
    cells0,
    rng_seeds,
    max_layers: int,
    window: int,
    fraction: float = 0.1,
    stride: float = 1.05,
    early_stop: bool = True,
    overshoot: float = 1.0,
    table: WindowClassTable | None = None,
) -> ContrastRun:
    """Contrast of the circuit-averaged charge from replica trajectories.

    All replicas start in the same word and evolve under independent
    circuit realizations; the windowed site means are averaged over
    replicas before squaring.  The circuit-averaged dynamics is what the
    gate construction represents, and replica averaging suppresses the
    finite-window noise floor of the conserved charge (which decays too
    slowly in T alone for short chains) without touching t_th.
    """
    table = table or build_table(model)
    replicas = [np.array(cells0, dtype=np.uint8, copy=True) for _ in rng_seeds]
    rngs = [SplitMix64(s) for s in rng_seeds]
    L = len(replicas[0])
    if L < table.locality:
        raise ChainTooShort(f"need at least {table.locality} sites")
    times = []
    values = []
    layer = 0
    t_th = None
    c0 = None
    for t in sample_grid(max_layers, window, stride):
        gap = t - layer
        total = np.zeros(L, dtype=np.int64)
        accum = np.zeros(L, dtype=np.int64)
        for cells, rng in zip(replicas, rngs):
            if gap > 0:
                _advance(cells, table, layer, gap, rng)
            accum[:] = 0
            _advance(cells, table, layer + gap, window, rng, accum=accum)
            total += accum
        layer = t + window
        mean_profile = total / (window * len(replicas))
        c = float(np.mean(mean_profile**2))
        times.append(t)
        values.append(c)
        if c0 is None:
            c0 = c
        elif t_th is None and c0 > 0 and c < fraction * c0:
            t_th = t
        if t_th is not None and early_stop and t >= overshoot * t_th:
            break
    thermalized = t_th is not None
    return ContrastRun(
        times=np.array(times, dtype=np.int64),
        contrast=np.array(values),
        window=window,
        t_th=t_th,
        thermalized=thermalized,
        censored=not thermalized,
        layers_run=layer,
    )


@dataclass
class IrreversibleRun:
    times: np.ndarray
    n_abs_c: np.ndarray
    thermalized: bool
    t_th: int | None
    stalled: bool
    layers_run: int


def run_irreversible(
    model: Model,
    cells0,
    rng: SplitMix64,
    max_layers: int,
    patience: int | None = None,
    chunk: int = 4096,
    table: WindowClassTable | None = None,
) -> IrreversibleRun:
    """Annihilation-only evolution until no c-charge remains.

    Stops exactly at the first layer after which the absolute c-count
    reaches zero; `patience` (layers without any decrease) cuts off runs
    that have clearly jammed.
    """
    from .models import itbs

    table = table or irreversible_c_table(model)
    weight_arr = window_weight_array(table, itbs.n_abs_c)
    cells = np.array(cells0, dtype=np.uint8, copy=True)
    weight = itbs.n_abs_c(cells)
    layer = 0
    times = [0]
    series = [weight]
    last_change = 0
    while layer < max_layers and weight > 0:
        step = min(chunk, max_layers - layer)
        done, new_weight = _advance(
            cells, table, layer, step, rng, weight_arr=weight_arr, weight_now=weight
        )
        layer += done
        if new_weight != weight:
            last_change = layer
            weight = new_weight
        times.append(layer)
        series.append(weight)
        if patience is not None and layer - last_change >= patience and weight > 0:
            break
    thermalized = weight == 0
    return IrreversibleRun(
        times=np.array(times, dtype=np.int64),
        n_abs_c=np.array(series, dtype=np.int64),
        thermalized=thermalized,
        t_th=layer if thermalized else None,
        stalled=not thermalized and layer < max_layers,
        layers_run=layer,
    )


# ---------------------------------------------------------------------------
# decoupling protocol


@dataclass
class DecoupleResult:
    cells: np.ndarray
    stuck: bool
    measurements: int
    truncations: int

    @property
    def acceptance_rate(self) -> float:
        return self.truncations / max(1, self.measurements)


def decouple_protocol(
    model: Model,
    config0,
    ancilla_count: int,
    t_th: int,
    t_retherm: int,
    rng: SplitMix64,
    floor: int | None = None,
    patience_factor: int = 50,
    table: WindowClassTable | None = None,
) -> DecoupleResult:
    """Thermalize with an ancilla reservoir, then measure-and-truncate.

    Classical realization: evolve config0 + e^ancilla_count for t_th
    layers; then repeatedly read the last cell, cut it off when it is
    the identity, and re-thermalize for t_retherm layers.  Stops when
    the chain is back to the floor length (len(config0) by default), or
    when `patience_factor * current_length` consecutive measurements
    fail (a frozen end -- reported, not fatal).  The output is always in
    the evaluator sector of the input.
    """
    table = table or build_table(model)
    e = model.alphabet.identity
    if e is None:
        raise ValueError("decoupling needs an identity symbol")
    target = len(config0) if floor is None else floor
    cells = np.concatenate(
        [np.asarray(config0, dtype=np.uint8), np.full(ancilla_count, e, dtype=np.uint8)]
    )
    layer = 0
    if len(cells) >= table.locality and t_th > 0:
        done, _ = _advance(cells, table, layer, t_th, rng)
        layer += done
    measurements = 0
    truncations = 0
    fails = 0
    while len(cells) > target:
        measurements += 1
        if int(cells[-1]) == e:
            cells = cells[:-1]
            truncations += 1
            fails = 0
        else:
            fails += 1
            if len(cells) < table.locality or fails >= patience_factor * len(cells):
                return DecoupleResult(cells, True, measurements, truncations)
        if len(cells) >= table.locality and t_retherm > 0:
            done, _ = _advance(cells, table, layer, t_retherm, rng)
            layer += done
    return DecoupleResult(cells, False, measurements, truncations)


def geodesic_by_freezing(
    model: Model,
    config0,
    rng: SplitMix64,
    patience_factor: int = 50,
    ancilla_count: int | None = None,
    t_th: int | None = None,
    t_retherm: int | None = None,
    restarts: int = 8,
) -> int:
    """Estimate the geodesic length by shrinking until the end freezes.

    Runs the decoupling protocol with no length floor; the remaining
    length when no trailing identity can be produced upper-bounds the
    geodesic length of the word's sector (tight with high probability
    for small words, hence the independent restarts: the minimum over
    runs is still an upper bound).
    """
    L = len(config0)
    if ancilla_count is None:
        ancilla_count = max(4, L)
    if t_th is None:
        t_th = 50 * (L + ancilla_count) ** 2
    if t_retherm is None:
        t_retherm = 10 * (L + ancilla_count)
    best = None
    for _ in range(max(1, restarts)):
        res = decouple_protocol(
            model, config0, ancilla_count, t_th, t_retherm, rng,
            floor=0, patience_factor=patience_factor,
        )
        length = len(res.cells)
        best = length if best is None else min(best, length)
        if best == 0:
            break
    return int(best)


# ---------------------------------------------------------------------------
# checkpoints

CHECKPOINT_VERSION = 1


def checkpoint_payload(model: Model, cells, layer_count: int, rng: SplitMix64, extra=None):
    return {
        "version": CHECKPOINT_VERSION,
        "rng_algorithm": RNG_ALGORITHM,
        "model": model.name,
        "cells": [int(c) for c in cells],
        "layer_count": int(layer_count),
        "rng_state": int(rng.state),
        "extra": extra or {},
    }


def save_checkpoint(path, payload) -> None:
    Path(path).write_text(json.dumps(payload))


def load_checkpoint(path) -> dict:
    payload = json.loads(Path(path).read_text())
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
    return payload
