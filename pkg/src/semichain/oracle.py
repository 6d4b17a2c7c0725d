"""Exhaustive small-system ground truth.

Everything here enumerates honestly: sector partitions by full
enumeration plus union-find over single-relation moves, distances by
breadth-first search at fixed length, areas by 0/1-cost Dijkstra where
core relations cost one unit and identity shuffles or free reductions
cost nothing, and mixing times from exact brickwork transfer matrices.
State-space budgets are explicit and overruns raise instead of silently
truncating.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import neighbor_words
from .gates import build_table
from .models import Model


class BudgetExceeded(Exception):
    pass


class NotIrreducible(Exception):
    def __init__(self, components):
        super().__init__(f"sector splits into {len(components)} move components")
        self.components = components


def all_words(model: Model, L: int):
    return itertools.product(range(model.alphabet.size), repeat=L)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        root = x
        while self.parent.setdefault(root, root) != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass
class SectorPartition:
    L: int
    by_evaluator: dict
    by_moves: dict

    def evaluator_sector_of(self, word):
        for label, words in self.by_evaluator.items():
            if tuple(word) in words:
                return label
        raise KeyError(word)


def enumerate_sectors(model: Model, L: int, budget: int = 2_000_000,
                      with_moves: bool = True) -> SectorPartition:
    """Both partitions of all |S|^L words: exact labels and move components."""
    if model.alphabet.size**L > budget:
        raise BudgetExceeded(f"{model.alphabet.size}^{L} words exceed budget {budget}")
    by_evaluator: dict = {}
    for w in all_words(model, L):
        by_evaluator.setdefault(model.sector_label(w), set()).add(w)
    by_moves: dict = {}
    if with_moves:
        uf = _UnionFind()
        for w in all_words(model, L):
            for v in neighbor_words(w, model.presentation):
                uf.union(w, v)
        groups: dict = {}
        for w in all_words(model, L):
            groups.setdefault(uf.find(w), set()).add(w)
        by_moves = groups
    return SectorPartition(L=L, by_evaluator=by_evaluator, by_moves=by_moves)


def count_evaluator_sectors(model: Model, L: int, budget: int = 4_000_000) -> int:
    """Number of distinct evaluator labels among length-L words (N_K(L))."""
    if model.alphabet.size**L > budget:
        raise BudgetExceeded(f"{model.alphabet.size}^{L} words exceed budget {budget}")
    labels = set()
    for w in all_words(model, L):
        labels.add(model.sector_label(w))
    return len(labels)


@dataclass
class FragileSector:
    evaluator_label: object
    component_sizes: list[int]
    min_restoring_length: int | None


def _padded(word, identity, L):
    return tuple(word) + (identity,) * (L - len(word))


def _reachable(start, presentation, L_budget: int):
    """Whole move component of `start` at fixed length, budgeted."""
    seen = {start}
    queue = deque([start])
    while queue:
        w = queue.popleft()
        for v in neighbor_words(w, presentation):
            if v not in seen:
                if len(seen) >= L_budget:
                    raise BudgetExceeded("component larger than budget")
                seen.add(v)
                queue.append(v)
    return seen


def detect_fragile(model: Model, L: int, budget: int = 2_000_000,
                   max_extension: int = 8) -> list[FragileSector]:
    """Sectors whose fixed-length move graph splits into several components.

    For models with an identity symbol, the minimal padded length L'
    that reconnects a representative split pair is found by retrying the
    component search at L+1, L+2, ...; semigroups without a padding
    symbol report None.
    """
    part = enumerate_sectors(model, L, budget=budget)
    reports = []
    identity = model.alphabet.identity
    for label, words in sorted(part.by_evaluator.items(), key=lambda kv: repr(kv[0])):
        components = []
        remaining = set(words)
        while remaining:
            comp = _reachable(next(iter(sorted(remaining))), model.presentation, budget)
            comp &= words
            components.append(comp)
            remaining -= comp
        if len(components) <= 1:
            continue
        min_restore = None
        if identity is not None:
            a = sorted(components[0])[0]
            b = sorted(components[1])[0]
            for L2 in range(L + 1, L + max_extension + 1):
                seen = _reachable(_padded(a, identity, L2), model.presentation, budget)
                if _padded(b, identity, L2) in seen:
                    min_restore = L2
                    break
        reports.append(
            FragileSector(
                evaluator_label=label,
                component_sizes=sorted((len(c) for c in components), reverse=True),
                min_restoring_length=min_restore,
            )
        )
    return reports


def bfs_distance(w, w_prime, model: Model, budget: int = 2_000_000):
    """Fewest single-relation moves linking two equal-length words.

    Returns None when the fixed-length move graph does not connect them.
    """
    a, b = tuple(int(x) for x in w), tuple(int(x) for x in w_prime)
    if len(a) != len(b):
        raise ValueError("words must have equal length")
    if a == b:
        return 0
    dist = {a: 0}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        for y in neighbor_words(x, model.presentation):
            if y not in dist:
                if len(dist) >= budget:
                    raise BudgetExceeded("search exceeded budget")
                dist[y] = dist[x] + 1
                if y == b:
                    return dist[y]
                queue.append(y)
    return None


def move_diameter(words, model: Model, budget: int = 4_000_000,
                  moves: str = "dynamics") -> int:
    """Largest pairwise move distance within one component (all-pairs BFS).

    moves="relations" counts single relation applications only (the Dehn
    proof-system metric); moves="dynamics" additionally allows whole-
    window gate jumps, which is the metric of the simulated chain.  The
    relation-only graph can split at fixed length even when the chain is
    irreducible (the cyclic rotations of a relator word are relation-
    frozen), in which case this raises NotIrreducible.
    """
    words = [tuple(w) for w in words]
    word_set = set(words)
    if moves == "dynamics":
        table = build_table(model)
        step = lambda x: _dynamics_neighbors(x, model, table)
    else:
        step = lambda x: neighbor_words(x, model.presentation)
    diameter = 0
    for a in words:
        dist = {a: 0}
        queue = deque([a])
        reached = 1
        while queue:
            x = queue.popleft()
            for y in step(x):
                if y not in dist:
                    if len(dist) >= budget:
                        raise BudgetExceeded("search exceeded budget")
                    dist[y] = dist[x] + 1
                    if y in word_set:
                        reached += 1
                        diameter = max(diameter, dist[y])
                    queue.append(y)
        if reached != len(words):
            raise NotIrreducible([a])
    return diameter


# ---------------------------------------------------------------------------
# area metric


def _reduced(word, identity):
    return tuple(s for s in word if s != identity)


def _core_reduced_rules(model: Model):
    """Core relations with identity padding stripped, deduplicated."""
    identity = model.alphabet.identity
    rules = set()
    for rel in model.presentation.relations:
        if not rel.core:
            continue
        lhs = tuple(s for s in rel.lhs if s != identity)
        rhs = tuple(s for s in rel.rhs if s != identity)
        if lhs != rhs:
            rules.add((lhs, rhs))
            if not rel.oriented:
                rules.add((rhs, lhs))
    return sorted(rules)


def _inverse_pairs(model: Model):
    pairs = []
    for x, xi in enumerate(model.alphabet.inverse_of):
        if xi >= 0 and x != model.alphabet.identity:
            pairs.append((x, xi))
    return pairs


def min_area(w, model: Model, scratch_extra: int = 2, budget: int = 4_000_000):
    """Minimal number of core-relation applications reducing w to identities.

    0/1-cost Dijkstra over identity-stripped words: core rewrites cost
    one, free reductions/expansions and identity shuffles cost nothing.
    Intermediate words may grow `scratch_extra` symbols beyond |w|; the
    result is exact within that scratch bound (and the bound is an upper
    bound on the unrestricted area, which coincides whenever the optimal
    homotopy fits).
    """
    identity = model.alphabet.identity
    if identity is None:
        raise ValueError("area metric needs an identity symbol")
    start = _reduced(tuple(int(x) for x in w), identity)
    target = ()
    cap = len(tuple(w)) + scratch_extra
    rules = _core_reduced_rules(model)
    pairs = _inverse_pairs(model)
    dist = {start: 0}
    queue = deque([(start, 0)])
    while queue:
        x, d = queue.popleft()
        if d > dist[x]:
            continue
        if x == target:
            return d
        neighbors_zero = []
        neighbors_one = []
        n = len(x)
        for i in range(n - 1):
            for a, b in pairs:
                if x[i] == a and x[i + 1] == b:
                    neighbors_zero.append(x[:i] + x[i + 2 :])
        if n + 2 <= cap:
            for i in range(n + 1):
                for a, b in pairs:
                    neighbors_zero.append(x[:i] + (a, b) + x[i:])
        for lhs, rhs in rules:
            k = len(lhs)
            if n - k + len(rhs) > cap:
                continue
            for i in range(n - k + 1):
                if x[i : i + k] == lhs:
                    neighbors_one.append(x[:i] + rhs + x[i + k :])
        for y in neighbors_zero:
            if y not in dist or dist[y] > d:
                if len(dist) >= budget:
                    raise BudgetExceeded("area search exceeded budget")
                dist[y] = d
                queue.appendleft((y, d))
        for y in neighbors_one:
            if y not in dist or dist[y] > d + 1:
                if len(dist) >= budget:
                    raise BudgetExceeded("area search exceeded budget")
                dist[y] = d + 1
                queue.append((y, d + 1))
    return None


def _dynamics_neighbors(word, model: Model, table):
    """One-move successors under the full dynamics: any single relation
    application, or any single gate resampling of a 3-site window."""
    out = neighbor_words(word, model.presentation)
    k = table.locality
    for p in range(len(word) - k + 1):
        for m in table.class_members(word[p : p + k]):
            win = table.window_tuple(m)
            if win != word[p : p + k]:
                out.add(word[:p] + win + word[p + k :])
    return out


def min_connecting_length(w, w_prime, model: Model, L_max: int,
                          budget: int = 2_000_000):
    """Smallest padded length at which two words become dynamics-connected.

    Words are right-padded with identities and connectivity uses every
    elementary move the dynamics has: single relation applications and
    whole-window gate jumps.  Returns None when no length up to L_max
    works (fragile pair beyond the probe range).
    """
    identity = model.alphabet.identity
    if identity is None:
        raise ValueError("needs an identity symbol for padding")
    table = build_table(model)
    a, b = tuple(int(x) for x in w), tuple(int(x) for x in w_prime)
    for L2 in range(max(len(a), len(b)), L_max + 1):
        pa, pb = _padded(a, identity, L2), _padded(b, identity, L2)
        seen = {pa}
        queue = deque([pa])
        found = pa == pb
        while queue and not found:
            x = queue.popleft()
            for y in _dynamics_neighbors(x, model, table):
                if y not in seen:
                    if len(seen) >= budget:
                        raise BudgetExceeded("search exceeded budget")
                    seen.add(y)
                    if y == pb:
                        found = True
                        break
                    queue.append(y)
        if found:
            return L2
    return None


# ---------------------------------------------------------------------------
# exact chain analysis


@dataclass
class MarkovAnalysis:
    sector_size: int
    lambda2: float
    t_rel: float
    t_mix_cycles: int
    stationary_max_dev: float
    diameter_moves: int | None = None
    extras: dict = field(default_factory=dict)


def _layer_matrix(states, index, table, offset: int) -> np.ndarray:
    """Exact transition matrix of one brickwork layer on a sector."""
    L = len(states[0])
    n = len(states)
    P = np.zeros((n, n))
    window_positions = list(range(offset, L - table.locality + 1, table.locality))
    for i, w in enumerate(states):
        options = []
        for p in window_positions:
            members = table.class_members(w[p : p + table.locality])
            options.append([(table.window_tuple(m), 1.0 / len(members)) for m in members])
        if not options:
            P[i, i] = 1.0
            continue
        for combo in itertools.product(*options):
            prob = 1.0
            w2 = list(w)
            for p, (win, q) in zip(window_positions, combo):
                w2[p : p + table.locality] = win
                prob *= q
            P[i, index[tuple(w2)]] += prob
    return P


def sector_markov_analysis(model: Model, words, budget: int = 3000,
                           tv_threshold: float = 0.5) -> MarkovAnalysis:
    """Exact relaxation and mixing analysis of one Krylov sector.

    Builds the three staggered layer matrices on the sector.  lambda2
    and t_rel come from the reflection-symmetrized step P0 P1 P2 P2 P1 P0
    (symmetric, so the spectrum is real); the mixing time is measured on
    the plain cyclic step M = P0 P1 P2 and counted in 3-layer cycles,
    as the first power where every row of M^t is within `tv_threshold`
    of uniform in L1 norm.
    """
    states = sorted(tuple(int(c) for c in w) for w in words)
    n = len(states)
    if n > budget:
        raise BudgetExceeded(f"sector of {n} states exceeds budget {budget}")
    if n == 1:
        return MarkovAnalysis(1, float("nan"), 0.0, 0, 0.0)
    index = {w: i for i, w in enumerate(states)}
    table = build_table(model)
    P = [_layer_matrix(states, index, table, off) for off in range(table.locality)]
    M = np.linalg.multi_dot(P) if len(P) > 1 else P[0]
    # irreducibility: the uniform distribution must spread from any state
    reach = _components_of(M)
    if len(reach) > 1:
        raise NotIrreducible(reach)
    sym = np.linalg.multi_dot(P + P[::-1])
    eig = np.linalg.eigvalsh((sym + sym.T) / 2)
    lambda2 = float(eig[-2])
    t_rel = float("inf") if lambda2 >= 1.0 else 1.0 / (1.0 - lambda2)
    pi = np.full(n, 1.0 / n)
    stationary_dev = float(np.max(np.abs(pi @ M - pi)))

    def mixed(t: int) -> bool:
        Mt = np.linalg.matrix_power(M, t)
        return float(np.max(np.abs(Mt - pi).sum(axis=1))) <= tv_threshold

    hi = 1
    while not mixed(hi):
        hi *= 2
        if hi > 1 << 24:
            raise BudgetExceeded("mixing time beyond 2^24 cycles")
    lo = hi // 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if mixed(mid):
            hi = mid
        else:
            lo = mid
    t_mix = hi if hi > 1 or not mixed(0) else (0 if mixed(0) else 1)
    return MarkovAnalysis(
        sector_size=n,
        lambda2=lambda2,
        t_rel=t_rel,
        t_mix_cycles=int(t_mix),
        stationary_max_dev=stationary_dev,
    )


def _components_of(M: np.ndarray):
    n = M.shape[0]
    adj = (M > 0) | (M.T > 0)
    seen = np.zeros(n, dtype=bool)
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        stack = [s]
        seen[s] = True
        comp = [s]
        while stack:
            x = stack.pop()
            for y in np.nonzero(adj[x])[0]:
                if not seen[y]:
                    seen[y] = True
                    comp.append(int(y))
                    stack.append(int(y))
        comps.append(comp)
    return comps
