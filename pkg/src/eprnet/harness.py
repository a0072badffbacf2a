"""Experiment runner: fixed-network source sweeps and Watts-Strogatz grids.

A run expands every (topology instance, source, WSS loss) cell, routes all
node pairs once and feeds the same transmittances to each strategy.  Rows are
written in a fixed order with ``repr`` floats, so an identical configuration
gives byte-identical CSV files.  Wall-clock timings and timestamps go to
separate files (``timings.csv``, ``manifest.json``).

Watts-Strogatz replication ``r`` uses seed ``base_seed + r``.  Parallelism is
bounded by the ``EPRNET_WORKERS`` environment variable (default 1).
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .allocation import STRATEGIES, allocate, round_robin
from .errors import ConfigError, EprNetError, MetricError
from .metrics import mean_ci95, report, source_importance
from .netgraph import expand
from .routing import route_all
from .spectrum import CALIBRATED_REP_RATE, SourceParams, channel_rates, pair_count, scaled_plan
from .topology import (
    DEFAULT_ALPHA,
    WattsStrogatzSpec,
    generate_ws,
    load_ilec,
    load_topology,
    ring_lattice_k,
)

WORKERS_ENV = "EPRNET_WORKERS"
REFERENCE_KAPPA = 136  # node pairs of the 17-node network the m=185 plan serves
BEST = "best"  # pseudo-strategy: the best strategy at each cell

RESULT_FIELDS = [
    "topology",
    "n",
    "k",
    "beta",
    "replication",
    "seed",
    "source",
    "l_wss",
    "strategy",
    "min_rate",
    "median_rate",
    "normalized_min",
    "jain",
    "complete",
    "config_hash",
]


@dataclass(frozen=True)
class WSGrid:
    n: tuple[int, ...] = (10, 20, 30, 40)
    beta: tuple[float, ...] = (0.2, 0.5, 0.8)
    k_over_n: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
    edge_length_km: float = 5.0
    max_attempts: int = 200_000

    def cells(self):
        """``(n, k_over_n, k, beta)`` in grid order, with k rounded to an even integer."""
        for n in self.n:
            for kn in self.k_over_n:
                for beta in self.beta:
                    yield n, kn, ring_lattice_k(n, kn), beta


@dataclass(frozen=True)
class ExperimentConfig:
    """What to run.  ``topology`` is ``"ilec"``, a JSON file path or ``"ws"``."""

    topology: str = "ilec"
    sources: tuple | str = "all"
    l_wss: tuple[float, ...] = (4.0, 8.0)
    strategies: tuple[str, ...] = ("round_robin", "first_fit", "modified_lpt", "modified_bd")
    ws: WSGrid = field(default_factory=WSGrid)
    replications: int = 40
    base_seed: int = 0
    alpha: float = DEFAULT_ALPHA
    mem_loss: float = 0.0
    rep_rate: float = CALIBRATED_REP_RATE
    first_fit_resolution: float = 1.0
    exact_max_size: int = 400  # run the exact solver only when m * kappa is at most this
    exact_budget: float = 60.0
    output_dir: str = "results"

    def __post_init__(self):
        if not self.strategies:
            raise ConfigError("strategy list is empty")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}; choose from {', '.join(STRATEGIES)}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ConfigError("duplicate strategies")
        if not self.l_wss or any(not (x >= 0) for x in self.l_wss):
            raise ConfigError(f"l_wss values must be non-negative, got {self.l_wss!r}")
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if not (self.sources == "all" or isinstance(self.sources, tuple) and self.sources):
            raise ConfigError("sources must be 'all' or a non-empty list")
        if not self.rep_rate > 0 or not self.alpha >= 0 or not self.mem_loss >= 0:
            raise ConfigError("rep_rate must be positive, alpha and mem_loss non-negative")
        if not self.first_fit_resolution > 0:
            raise ConfigError("first_fit_resolution must be positive")

    @property
    def is_ws(self) -> bool:
        return self.topology == "ws"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            if "ws" in data:
                ws = dict(data["ws"])
                for key in ("n", "beta", "k_over_n"):
                    if key in ws:
                        ws[key] = tuple(ws[key])
                data["ws"] = WSGrid(**ws)
            for key in ("l_wss", "strategies"):
                if key in data:
                    data[key] = tuple(data[key])
            if isinstance(data.get("sources"), list):
                data["sources"] = tuple(data["sources"])
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Hash of everything that affects results (the output directory does not)."""
        d = self.to_dict()
        d.pop("output_dir")
        text = json.dumps(d, sort_keys=True, default=list)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class ResultSet:
    config: ExperimentConfig
    rows: list[dict]
    timings: list[dict]
    failures: list[dict]
    importance: list[dict] = field(default_factory=list)
    ws_best: list[dict] = field(default_factory=list)
    ws_summary: list[dict] = field(default_factory=list)
    k_table: list[dict] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 2 if self.failures else 0

    def write(self, out_dir=None, *, started=None) -> Path:
        out = Path(out_dir or self.config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "results.csv", RESULT_FIELDS, self.rows)
        _write_csv(out / "timings.csv", ["topology", "replication", "source", "l_wss", "strategy", "elapsed_s"], self.timings)
        if self.importance:
            _write_csv(out / "importance.csv", list(self.importance[0]), self.importance)
        if self.ws_best:
            _write_csv(out / "ws_replications.csv", list(self.ws_best[0]), self.ws_best)
        if self.ws_summary:
            _write_csv(out / "ws_summary.csv", list(self.ws_summary[0]), self.ws_summary)
        manifest = {
            "version": __version__,
            "config": self.config.to_dict(),
            "config_hash": self.config.digest(),
            "started": started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "rows": len(self.rows),
            "k_rounding": self.k_table,
            "seed_rule": "replication r uses base_seed + r",
            "failures": self.failures,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=list) + "\n")
        return out


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _write_csv(path: Path, fields, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row.get(f)) for f in fields])


@lru_cache(maxsize=None)
def _plan(n_nodes: int, rep_rate: float, scaled: bool):
    reference = channel_rates(SourceParams(rep_rate=rep_rate))
    if not scaled:
        return reference
    return scaled_plan(reference, REFERENCE_KAPPA, n_nodes, params=SourceParams(rep_rate=rep_rate))


def plan_for(n_nodes: int, config: ExperimentConfig):
    """Reference 185-channel plan for fixed networks, rescaled plans for WS graphs.

    A fixed network with more node pairs than reference channels also gets a
    rescaled plan.
    """
    scaled = config.is_ws or pair_count(n_nodes) > 185
    return _plan(n_nodes, float(config.rep_rate), scaled)


@dataclass(frozen=True)
class _Instance:
    name: str
    n: int = 0
    k: int | None = None
    beta: float | None = None
    replication: int | None = None
    seed: int | None = None
    k_over_n: float | None = None


def _evaluate(config: ExperimentConfig, inst: _Instance, topology, source: int, l_wss: float):
    """All strategies for one cell.  Returns ``(rows, timings)``."""
    graph = expand(topology, source, l_wss, mem_loss=config.mem_loss)
    table = route_all(graph)
    plan = plan_for(topology.n, config)
    baseline = round_robin(table.lam, plan.rates)
    base = {
        "topology": inst.name,
        "n": topology.n,
        "k": inst.k,
        "beta": inst.beta,
        "replication": inst.replication,
        "seed": inst.seed,
        "source": topology.labels[source],
        "l_wss": float(l_wss),
        "config_hash": config.digest(),
    }
    rows, timings = [], []
    for strategy in config.strategies:
        options = {}
        if strategy == "first_fit":
            options["resolution"] = config.first_fit_resolution
        if strategy == "exact":
            if plan.m * table.kappa > config.exact_max_size:
                continue
            options["budget"] = config.exact_budget
        res = allocate(strategy, table.lam, plan.rates, **options)
        m = report(res.allocation, baseline)
        rows.append({**base, "strategy": strategy, **m.to_dict(), "complete": res.complete})
        timings.append({**{k: base[k] for k in ("topology", "replication", "source", "l_wss")},
                        "strategy": strategy, "elapsed_s": res.elapsed})
    return rows, timings


def _resolve_sources(config: ExperimentConfig, topology) -> list[int]:
    if config.sources == "all":
        return list(range(topology.n))
    return [topology.index(s if not isinstance(s, str) or s in topology.labels else int(s)) for s in config.sources]


def _job(args):
    """One topology instance: every source and WSS loss.  Runs in a worker."""
    config, inst = args
    rows, timings, failures = [], [], []
    try:
        topology = _build_topology(config, inst)
        sources = _resolve_sources(config, topology)
    except EprNetError as exc:
        return rows, timings, [{"topology": inst.name, "replication": inst.replication, "error": str(exc)}]
    for l_wss in config.l_wss:
        for s in sources:
            try:
                r, t = _evaluate(config, inst, topology, s, l_wss)
            except EprNetError as exc:
                failures.append({"topology": inst.name, "replication": inst.replication,
                                 "source": topology.labels[s], "l_wss": l_wss, "error": str(exc)})
                continue
            rows += r
            timings += t
    return rows, timings, failures


def _build_topology(config: ExperimentConfig, inst: _Instance):
    if config.is_ws:
        spec = WattsStrogatzSpec(inst.n, inst.k, inst.beta, config.ws.edge_length_km, inst.seed)
        return generate_ws(spec, config.ws.max_attempts, config.alpha)
    if config.topology == "ilec":
        return load_ilec(config.alpha)
    topo = load_topology(config.topology)
    return topo


def _instances(config: ExperimentConfig) -> list[_Instance]:
    if not config.is_ws:
        name = "ilec" if config.topology == "ilec" else Path(config.topology).stem
        return [_Instance(name)]
    out = []
    for n, kn, k, beta in config.ws.cells():
        for r in range(config.replications):
            out.append(_Instance(f"ws-n{n}-k{k}-b{beta}", n, k, beta, r, config.base_seed + r, kn))
    return out


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be at least 1")
    return n


def run(config: ExperimentConfig, workers: int | None = None) -> ResultSet:
    """Evaluate every cell of the configuration and aggregate.

    Failed cells are recorded and skipped; the rest of the run continues.
    """
    workers = worker_count() if workers is None else workers
    instances = _instances(config)
    jobs = [(config, inst) for inst in instances]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_job, jobs))
    else:
        outputs = [_job(j) for j in jobs]
    rows, timings, failures = [], [], []
    for r, t, f in outputs:
        rows += r
        timings += t
        failures += f
    result = ResultSet(config, rows, timings, failures)
    if config.is_ws:
        result.ws_best = _ws_best(rows, instances, config)
        result.ws_summary = _ws_summary(result.ws_best, instances)
        result.k_table = [{"n": n, "k_over_n": kn, "k": k} for n in config.ws.n for kn in config.ws.k_over_n
                          for k in [ring_lattice_k(n, kn)]]
    else:
        result.importance = _importance(rows, instances[0].name, config)
    return result


def _with_best(rows: list[dict]) -> dict:
    """Group rows by (instance, source, l_wss) and add the best-strategy row."""
    groups: dict = {}
    for row in rows:
        key = (row["topology"], row["replication"], row["l_wss"], row["source"])
        groups.setdefault(key, []).append(row)
    for key, grp in groups.items():
        best = max(grp, key=lambda r: r["min_rate"])  # first of equals in strategy order
        grp.append({**best, "strategy": BEST})
    return groups


def _safe_importance(values):
    """Source Jain index, or None when undefined (one source, or all zero)."""
    try:
        return source_importance(values)
    except MetricError:
        return None


def _importance(rows, name, config) -> list[dict]:
    """Per WSS loss and strategy: best source, its max-min rate, and the source Jain index."""
    out = []
    groups = _with_best(rows)
    for l_wss in config.l_wss:
        for strategy in (*config.strategies, BEST):
            vals = [(r["source"], r["min_rate"]) for (tn, _, lw, _), grp in groups.items() if lw == l_wss
                    for r in grp if r["strategy"] == strategy]
            if len(vals) < 2:
                continue
            best_src, best_val = max(vals, key=lambda v: v[1])
            out.append({
                "topology": name,
                "l_wss": float(l_wss),
                "strategy": strategy,
                "sources": len(vals),
                "best_source": best_src,
                "best_min_rate": best_val,
                "source_jain": _safe_importance([v for _, v in vals]),
            })
    return out


def _ws_best(rows, instances, config) -> list[dict]:
    """Per replication and strategy: metrics at the max-min-optimal source."""
    groups = _with_best(rows)
    by_rep: dict = {}
    for (name, rep, l_wss, _src), grp in groups.items():
        for r in grp:
            by_rep.setdefault((name, rep, l_wss, r["strategy"]), []).append(r)
    meta = {(i.name, i.replication): i for i in instances}
    out = []
    for inst in instances:
        for l_wss in config.l_wss:
            for strategy in (*config.strategies, BEST):
                cand = by_rep.get((inst.name, inst.replication, float(l_wss), strategy))
                if not cand:
                    continue
                best = max(cand, key=lambda r: r["min_rate"])
                imp = _safe_importance([r["min_rate"] for r in cand])
                i = meta[inst.name, inst.replication]
                out.append({
                    "n": i.n, "k_over_n": i.k_over_n, "k": i.k, "beta": i.beta,
                    "replication": i.replication, "seed": i.seed, "l_wss": float(l_wss), "strategy": strategy,
                    "best_source": best["source"], "min_rate": best["min_rate"],
                    "median_rate": best["median_rate"], "jain": best["jain"], "source_jain": imp,
                })
    return out


def _ws_summary(best_rows, instances) -> list[dict]:
    """Mean and 95% half-width over replications for each grid cell."""
    cells: dict = {}
    for r in best_rows:
        key = (r["n"], r["k_over_n"], r["k"], r["beta"], r["l_wss"], r["strategy"])
        cells.setdefault(key, []).append(r)
    out = []
    for key, grp in cells.items():
        row = dict(zip(("n", "k_over_n", "k", "beta", "l_wss", "strategy"), key))
        row["replications"] = len(grp)
        for metric in ("min_rate", "median_rate", "jain", "source_jain"):
            vals = [g[metric] for g in grp if g[metric] is not None]
            if vals:
                row[f"{metric}_mean"], row[f"{metric}_ci95"] = mean_ci95(vals)
            else:
                row[f"{metric}_mean"] = row[f"{metric}_ci95"] = None
        out.append(row)
    return out


def run_and_write(config: ExperimentConfig, out_dir=None, workers: int | None = None) -> ResultSet:
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    result = run(config, workers)
    result.write(out_dir, started=started)
    result.elapsed = time.perf_counter() - t0
    return result


def read_csv(path) -> list[dict]:
    """Rows of a result CSV as dicts of strings."""
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


__all__ = [
    "ExperimentConfig",
    "ResultSet",
    "WSGrid",
    "plan_for",
    "read_csv",
    "run",
    "run_and_write",
    "worker_count",
]
