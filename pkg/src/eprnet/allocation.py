"""Max-min fair assignment of wavelength channels to node pairs.

Every channel ``x`` (generated rate ``rates[x]``) goes to exactly one node
pair ``p`` (route transmittance ``lam[p]``), which then receives
``lam[p] * rates[x]``.  The goal is to maximise the smallest total received
rate.  This module holds the exact branch-and-bound solver and four
polynomial-time strategies: Round Robin, First Fit, modified LPT and the
modified Bezakova-Dani matching algorithm.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import ConfigError


@dataclass(frozen=True)
class Allocation:
    """Binary ``m x kappa`` channel assignment and the rates it delivers."""

    x: np.ndarray
    received: np.ndarray
    lam: np.ndarray = field(repr=False)
    rates: np.ndarray = field(repr=False)

    @property
    def owner(self) -> np.ndarray:
        """Pair index holding each channel."""
        return np.argmax(self.x, axis=1)

    def to_csv(self, path, pair_labels=None) -> None:
        owner = self.owner
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["channel_index", "pair", "rate_contribution"])
            for c, p in enumerate(owner):
                name = pair_labels[p] if pair_labels is not None else int(p)
                writer.writerow([c + 1, name, repr(float(self.rates[c] * self.lam[p]))])


def make_allocation(x, lam, rates) -> Allocation:
    x = np.asarray(x, dtype=np.int8)
    lam = np.asarray(lam, dtype=float)
    rates = np.asarray(rates, dtype=float)
    received = (rates @ x) * lam
    return Allocation(x, received, lam, rates)


@dataclass(frozen=True)
class StrategyResult:
    allocation: Allocation
    strategy: str
    objective: float
    elapsed: float = 0.0
    complete: bool = True
    upper_bound: float | None = None
    threshold: float | None = None

    def to_dict(self) -> dict:
        out = {"strategy": self.strategy, "objective": self.objective, "elapsed_s": self.elapsed}
        if self.threshold is not None:
            out["threshold"] = self.threshold
        if self.strategy == "exact":
            out.update(complete=self.complete, upper_bound=self.upper_bound)
        return out

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def _result(x, lam, rates, name: str, **kw) -> StrategyResult:
    alloc = make_allocation(x, lam, rates)
    return StrategyResult(alloc, name, float(alloc.received.min()), **kw)


def _check(lam, rates) -> tuple[np.ndarray, np.ndarray]:
    lam = np.asarray(lam, dtype=float).ravel()
    rates = np.asarray(rates, dtype=float).ravel()
    if lam.size == 0:
        raise ConfigError("no node pairs to serve")
    if rates.size < lam.size:
        raise ConfigError(f"{rates.size} channels cannot serve {lam.size} node pairs")
    if not np.all(rates > 0):
        raise ConfigError("channel rates must be positive")
    if not np.all((lam > 0) & (lam <= 1)):
        raise ConfigError("transmittances must lie in (0, 1]")
    return lam, rates


def _pairs_worst_first(lam: np.ndarray) -> np.ndarray:
    return np.argsort(lam, kind="stable")


def _channels_best_first(rates: np.ndarray) -> np.ndarray:
    return np.argsort(-rates, kind="stable")


def round_robin(lam, rates) -> Allocation:
    """Deal channels, best first, to pairs in a cycle starting from the lossiest."""
    lam, rates = _check(lam, rates)
    m, kappa = rates.size, lam.size
    pairs = _pairs_worst_first(lam)
    chans = _channels_best_first(rates)
    x = np.zeros((m, kappa), dtype=np.int8)
    x[chans, pairs[np.arange(m) % kappa]] = 1
    return make_allocation(x, lam, rates)


def _first_fit_assignment(lam, rates, pairs, threshold: float):
    m, kappa = rates.size, lam.size
    x = np.zeros((m, kappa), dtype=np.int8)
    got = np.zeros(kappa)
    i = j = 0
    while i < m and j < kappa:
        p = pairs[j]
        x[i, p] = 1
        got[p] += lam[p] * rates[i]
        i += 1
        if got[p] >= threshold:
            j += 1
    # leftover channels stay with the last pair so every channel is assigned
    if i < m:
        p = pairs[kappa - 1]
        x[i:, p] = 1
        got[p] += lam[p] * rates[i:].sum()
    return x, got


def first_fit(lam, rates, *, resolution: float = 1.0) -> StrategyResult:
    """Largest threshold reachable by filling pairs one at a time, lossiest first.

    Channels are taken in index order.  The threshold is searched over the
    grid ``t / resolution`` for integers ``t`` in
    ``[0, ceil(resolution * sum(rates) / kappa)]``.
    """
    t0 = time.perf_counter()
    lam, rates = _check(lam, rates)
    if not resolution > 0:
        raise ConfigError("resolution must be positive")
    pairs = _pairs_worst_first(lam)

    def feasible(t: int) -> bool:
        _, got = _first_fit_assignment(lam, rates, pairs, t / resolution)
        return bool(np.all(got >= t / resolution))

    lo, hi = 0, math.ceil(resolution * rates.sum() / lam.size)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid - 1
    x, _ = _first_fit_assignment(lam, rates, pairs, lo / resolution)
    return _result(x, lam, rates, "first_fit", elapsed=time.perf_counter() - t0, threshold=lo / resolution)


def modified_lpt(lam, rates) -> StrategyResult:
    """One channel per pair, then each remaining channel to the current worst-off pair."""
    t0 = time.perf_counter()
    lam, rates = _check(lam, rates)
    m, kappa = rates.size, lam.size
    pairs = _pairs_worst_first(lam)
    chans = _channels_best_first(rates)
    x = np.zeros((m, kappa), dtype=np.int8)
    got = np.zeros(kappa)
    x[chans[:kappa], pairs] = 1
    got[pairs] = lam[pairs] * rates[chans[:kappa]]
    for c in chans[kappa:]:
        p = int(np.argmin(got))
        x[c, p] = 1
        got[p] += lam[p] * rates[c]
    return _result(x, lam, rates, "modified_lpt", elapsed=time.perf_counter() - t0)


def _perfect_matching_exists(ok: np.ndarray) -> bool:
    """Whether every row of the boolean bipartite matrix can be matched."""
    if ok.shape[0] == 0:
        return True
    if ok.shape[0] > ok.shape[1] or not ok.any(axis=1).all():
        return False
    match = maximum_bipartite_matching(csr_matrix(ok), perm_type="column")
    return bool(np.all(match >= 0))


def _nested_matching_exists(counts: np.ndarray) -> bool:
    """Hall's condition when the rows' neighbourhoods form a chain.

    A pair's usable channels are those above a rate cut-off, so the sets are
    nested and only the ``i`` smallest of them need checking, for every ``i``.
    """
    c = np.sort(counts)
    return bool(np.all(c >= np.arange(1, c.size + 1)))


def _bd_round(weights, got, free, floor):
    """Best threshold for one round and a min-weight matching achieving it.

    The threshold can never exceed what the worst-off pair reaches with the
    best free channel, so only pairs below that cap take part.
    Returns ``(threshold, [(channel, pair), ...])``.
    """
    chans = np.flatnonzero(free)
    worst = int(np.argmin(got))
    cap = got[worst] + weights[chans, worst].max()
    pool = np.flatnonzero(got < cap)
    w = weights[np.ix_(chans, pool)] + got[pool][None, :]
    candidates = np.unique(np.concatenate([w.ravel(), got[pool]]))
    candidates = candidates[(candidates >= floor) & (candidates <= cap)]

    def usable(t):
        active = np.flatnonzero(got[pool] < t)
        return active, (w[:, active] >= t).T

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _nested_matching_exists(usable(candidates[mid])[1].sum(axis=1)):
            lo = mid
        else:
            hi = mid - 1
    t = candidates[lo]
    active, ok = usable(t)
    if active.size == 0:
        return t, []
    # a row of a k-row matching only ever needs its k cheapest usable columns
    k = active.size
    cost = np.where(ok, w[:, active].T, np.inf)
    keep = np.zeros(chans.size, dtype=bool)
    for row in cost:
        cheapest = np.argsort(row, kind="stable")[:k]
        keep[cheapest[np.isfinite(row[cheapest])]] = True
    cols = np.flatnonzero(keep)
    rows, sel = linear_sum_assignment(cost[:, cols])
    return t, [(int(chans[cols[c]]), int(pool[active[r]])) for r, c in zip(rows, sel)]


def modified_bd(lam, rates) -> StrategyResult:
    """Iterated bottleneck matchings between channels and node pairs.

    Each round raises the threshold to the largest value for which every pair
    still below it can get one more channel reaching it, then takes the
    matching of minimum total delivered rate.  Pairs already at the threshold
    skip the round.  Rounds continue while the free channels cover the pairs
    below the next threshold; anything left is dealt by Round Robin.
    """
    t0 = time.perf_counter()
    lam, rates = _check(lam, rates)
    m, kappa = rates.size, lam.size
    weights = rates[:, None] * lam[None, :]
    x = np.zeros((m, kappa), dtype=np.int8)
    got = np.zeros(kappa)
    free = np.ones(m, dtype=bool)
    threshold = 0.0
    while free.any():
        t, matching = _bd_round(weights, got, free, threshold)
        if not matching:
            break
        threshold = t
        for c, p in matching:
            x[c, p] = 1
            free[c] = False
            got[p] += weights[c, p]
    rest = np.flatnonzero(free)
    if rest.size:
        # Round Robin order over all pairs, restricted to the leftover channels
        pairs = _pairs_worst_first(lam)
        order = rest[_channels_best_first(rates[rest])]
        for t, c in enumerate(order):
            x[c, pairs[t % kappa]] = 1
    return _result(x, lam, rates, "modified_bd", elapsed=time.perf_counter() - t0, threshold=float(threshold))


def water_fill_bound(lam, got, remaining: float) -> float:
    """Max-min value if ``remaining`` generated rate could be split freely.

    Raising pair ``p`` by ``d`` costs ``d / lam[p]`` of generated rate; the
    lowest pairs are lifted together until the budget is spent.
    """
    order = np.argsort(got, kind="stable")
    g = np.asarray(got, dtype=float)[order]
    inv = 1.0 / np.asarray(lam, dtype=float)[order]
    s_inv = np.cumsum(inv)
    s_ginv = np.cumsum(g * inv)
    for k in range(len(g) - 1):
        if g[k + 1] * s_inv[k] - s_ginv[k] >= remaining:
            return float((remaining + s_ginv[k]) / s_inv[k])
    return float((remaining + s_ginv[-1]) / s_inv[-1])


def exact_maxmin(lam, rates, *, budget: float = 60.0, rng=None) -> StrategyResult:
    """Optimal max-min allocation by depth-first branch and bound.

    Channels are branched on in decreasing rate order.  Nodes are pruned with
    the divisible (water-filling) relaxation, which can only overestimate the
    indivisible optimum.  The incumbent starts from the best heuristic.

    ``budget`` is a wall-clock limit in seconds; when it runs out the result
    has ``complete=False`` and carries the incumbent plus the root bound.
    With ``rng`` (a ``numpy.random.Generator``) pairs are tried in random
    order, which samples among allocations of equal optimal value.
    """
    t0 = time.perf_counter()
    lam, rates = _check(lam, rates)
    m, kappa = rates.size, lam.size
    chans = _channels_best_first(rates)
    r = rates[chans]
    suffix = np.concatenate([np.cumsum(r[::-1])[::-1], [0.0]])

    seeds = [modified_lpt(lam, rates), modified_bd(lam, rates)]
    best = max(seeds, key=lambda s: s.objective)
    root_bound = water_fill_bound(lam, np.zeros(kappa), float(suffix[0]))
    if rng is None:
        best_val = best.objective
        best_owner = best.allocation.owner.copy()
    else:
        # accept any allocation matching the heuristic value, not its exact X
        best_val = best.objective * (1 - 1e-9)
        best_owner = best.allocation.owner.copy()

    owner = np.empty(m, dtype=np.int64)
    got = np.zeros(kappa)
    nodes = 0
    out_of_time = False

    def search(depth: int) -> None:
        nonlocal best_val, best_owner, nodes, out_of_time
        nodes += 1
        if nodes % 2048 == 0 and time.perf_counter() - t0 > budget:
            out_of_time = True
        if out_of_time:
            return
        if depth == m:
            val = got.min()
            if val > best_val:
                best_val = float(val)
                best_owner = owner.copy()
            return
        if water_fill_bound(lam, got, float(suffix[depth])) <= best_val:
            return
        if rng is None:
            order = np.lexsort((np.arange(kappa), got))
        else:
            order = rng.permutation(kappa)
        seen = set()
        for p in order:
            key = (lam[p], got[p])
            if key in seen:
                continue
            seen.add(key)
            owner[chans[depth]] = p
            got[p] += lam[p] * r[depth]
            search(depth + 1)
            got[p] -= lam[p] * r[depth]
            if out_of_time:
                return

    search(0)
    x = np.zeros((m, kappa), dtype=np.int8)
    x[np.arange(m), best_owner] = 1
    return _result(
        x,
        lam,
        rates,
        "exact",
        elapsed=time.perf_counter() - t0,
        complete=not out_of_time,
        upper_bound=float(root_bound) if out_of_time else None,
    )


APPROXIMATIONS = ("round_robin", "first_fit", "modified_lpt", "modified_bd")
STRATEGIES = APPROXIMATIONS + ("exact",)


def allocate(strategy: str, lam, rates, **options) -> StrategyResult:
    """Run a strategy by name and time it."""
    t0 = time.perf_counter()
    if strategy == "round_robin":
        alloc = round_robin(lam, rates)
        return StrategyResult(alloc, strategy, float(alloc.received.min()), time.perf_counter() - t0)
    funcs = {"first_fit": first_fit, "modified_lpt": modified_lpt, "modified_bd": modified_bd, "exact": exact_maxmin}
    if strategy not in funcs:
        raise ConfigError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    return funcs[strategy](lam, rates, **options)
