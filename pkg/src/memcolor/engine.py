"""End-to-end solver loop for both problems.

One generation = parallel local searches from the current restart points,
online surrogate training on (restart, reached score) pairs, pairwise
distance computation, spacing-constrained pool update, nearest-neighbor
parent matching, and surrogate-guided offspring selection.  The weighted
problem initializes greedily (which also fixes the palette size k); the
k-coloring problem initializes uniformly at random and stops at the first
legal coloring, with an outer driver that decreases k after each success.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .coloring import Coloring, col_conflicts, wvcp_score
from .crossover import build_and_select_offspring
from .distance import pairwise_distances
from .init import greedy_order, init_col_population, init_wvcp_population
from .localsearch import COL, INF_SCORE, WVCP, improve_population
from .population import Population, match_parents, min_spacing, update_population
from .rng import TAG_TRAIN, Stream
from .surrogate import SurrogateNet

SCHEMA_VERSION = 1


class SizingError(RuntimeError):
    """Instance too large for the configured memory budget."""


@dataclass
class RunConfig:
    problem: str = WVCP
    p: int = 256
    K: int = 32
    max_ls_rounds: int = 10
    ls_depth_mult: int = 10  # tabu depth = mult * |V| (COL uses 128 by default)
    ms_divisor: int = 10
    epochs: int = 20
    lr: float = 0.001
    batch_size: int = 100
    seed: int = 0
    time_limit: float | None = None
    max_generations: int | None = None
    target: int | None = None
    threads: int | None = None
    use_surrogate: bool = True
    net_arch: str = "small"
    net_dtype: str = "float32"
    k: int | None = None  # COL only; None = derive from a greedy bound
    memory_budget: int = 1_500_000_000
    collect_pairs: bool = False  # keep raw (predicted, realized) pairs per generation

    def validate(self):
        if self.p < 2:
            raise ValueError("population size must be at least 2")
        if not (0 < self.K < self.p):
            raise ValueError("need 0 < K < p")
        if self.time_limit is None and self.max_generations is None and self.target is None:
            raise ValueError("need at least one stop condition")
        for name in ("max_ls_rounds", "ls_depth_mult", "ms_divisor", "epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def echo(self):
        return {k: v for k, v in self.__dict__.items()}


def col_defaults(cfg):
    """Table-default overrides when solving the plain coloring problem."""
    cfg.problem = COL
    if cfg.K == 32:
        cfg.K = 16
    if cfg.epochs == 20:
        cfg.epochs = 5
    if cfg.ls_depth_mult == 10:
        cfg.ls_depth_mult = 128
    return cfg


@dataclass
class RunRecord:
    problem: str
    instance: str
    n: int
    m: int
    config: dict
    generations: list = field(default_factory=list)
    best_score: int | None = None
    best_assign: list | None = None
    best_k: int | None = None
    legal: bool = False
    stop_reason: str = ""
    counters: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "problem": self.problem,
            "instance": self.instance,
            "n": self.n,
            "m": self.m,
            "config": self.config,
            "generations": self.generations,
            "best": {
                "score": self.best_score,
                "assign": self.best_assign,
                "k": self.best_k,
                "legal": self.legal,
            },
            "stop_reason": self.stop_reason,
            "counters": self.counters,
            "timing": self.timing,
        }


def canonical_payload(record_dict):
    """The deterministic part of a record: everything except timing."""
    return {k: v for k, v in record_dict.items() if k != "timing"}


def check_memory_budget(p, k, n, budget):
    """Refuse runs whose indicator encoding would blow the memory budget."""
    # one-hot training batch + inference chunk + activations, float32
    need = 3 * p * k * n * 4
    if need > budget:
        raise SizingError(
            f"instance too large for the memory budget: p*k*n = {p}*{k}*{n} "
            f"needs about {need / 1e9:.2f} GB of workspace "
            f"(budget {budget / 1e9:.2f} GB); lower p or use a smaller net"
        )


def _pearson(a, b):
    """Pearson r, defined as 0.0 when either side has no variance."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    mask = np.isfinite(a) & np.isfinite(b)
    a, b = a[mask], b[mask]
    if a.size < 2 or a.std() == 0.0 or b.std() == 0.0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


def _prediction_stats(predicted, realized):
    """Median relative error and correlation of prediction vs outcome."""
    predicted = np.asarray(predicted, dtype=np.float64)
    realized = np.asarray(realized, dtype=np.float64)
    mask = np.isfinite(predicted) & np.isfinite(realized)
    if not mask.any():
        return None
    p_, r_ = predicted[mask], realized[mask]
    denom = np.maximum(np.abs(r_), 1.0)
    med = float(np.median(np.abs(p_ - r_) / denom))
    return {"median_rel_err": med, "pearson": _pearson(p_, r_)}


def _distance_stats(dist):
    p = dist.shape[0]
    if p < 2:
        return {"min": 0, "mean": 0.0, "max": 0}
    vals = dist[np.triu_indices(p, k=1)]
    return {"min": int(vals.min()), "mean": float(vals.mean()), "max": int(vals.max())}


def _generation_loop(g, cfg, mode, init_colorings, k, init_fitness, record):
    """Shared Alg-1 loop; returns (best_assign, best_score) in solver scale."""
    p = cfg.p
    n = g.n
    ms = min_spacing(n, cfg.ms_divisor)
    depth = cfg.ls_depth_mult * n
    started = time.time()
    deadline = started + cfg.time_limit if cfg.time_limit is not None else None

    net = SurrogateNet(
        n,
        problem=mode,
        arch=cfg.net_arch,
        seed=cfg.seed,
        dtype=np.dtype(cfg.net_dtype),
        lr=cfg.lr,
    )
    check_memory_budget(p, k, n, cfg.memory_budget)

    pop = Population.from_colorings(init_colorings, init_fitness, generation=0)
    best_score = int(INF_SCORE)
    best_assign = None
    for i in range(p):
        if init_fitness[i] < best_score:
            best_score = int(init_fitness[i])
            best_assign = pop.assigns[i].copy()

    offspring = [Coloring(pop.assigns[i], k) for i in range(p)]
    prev_predictions = None
    counters = {"ls_calls": 0, "train_calls": 0, "train_skipped": 0, "select_calls": 0}
    gen_times = []
    t = 0
    stop_reason = ""

    while True:
        gen_started = time.time()
        results = improve_population(
            g,
            offspring,
            mode,
            cfg.seed,
            generation=t,
            thread_count=cfg.threads,
            depth=depth,
            max_rounds=cfg.max_ls_rounds,
        )
        counters["ls_calls"] += p
        realized = np.array([r.best_score for r in results], dtype=np.float64)
        realized[realized >= float(INF_SCORE)] = np.nan

        gen_rec = {"generation": t}
        if prev_predictions is not None:
            gen_rec["prediction"] = _prediction_stats(prev_predictions, realized)
            if cfg.collect_pairs:
                gen_rec["pairs"] = [
                    [float(a), None if not np.isfinite(b) else float(b)]
                    for a, b in zip(prev_predictions, realized)
                ]
        else:
            gen_rec["prediction"] = None

        improved_best = min(
            (r.best_score for r in results if r.legal_found or mode == COL),
            default=int(INF_SCORE),
        )
        if improved_best < best_score:
            best_score = int(improved_best)
            winner = min(range(p), key=lambda i: results[i].best_score)
            best_assign = results[winner].best.assign.copy()

        solved = mode == COL and best_score == 0
        if cfg.target is not None and best_score <= cfg.target:
            stop_reason = "target"
        elif solved:
            stop_reason = "solved"
        elif deadline is not None and time.time() >= deadline:
            stop_reason = "time_limit"
        elif cfg.max_generations is not None and t + 1 >= cfg.max_generations:
            stop_reason = "max_generations"

        gen_rec["best_score"] = int(best_score)
        finite = realized[np.isfinite(realized)]
        gen_rec["ls_best_mean"] = float(finite.mean()) if finite.size else None

        if stop_reason and stop_reason != "max_generations":
            gen_rec["pop_fitness_mean"] = float(pop.fitness.mean())
            gen_rec["distance"] = _distance_stats(pop.dist)
            gen_rec["train_loss"] = None
            record.generations.append(gen_rec)
            gen_times.append(time.time() - gen_started)
            break

        # supervised pairs: restart points -> reached scores (legal ones only)
        train_mask = np.isfinite(realized)
        if cfg.use_surrogate and train_mask.sum() >= 2:
            train_stream = Stream.derive(cfg.seed, TAG_TRAIN, t)
            off_assigns = np.stack([c.assign for c in offspring])
            losses = net.train_generation(
                off_assigns[train_mask],
                realized[train_mask],
                k,
                cfg.epochs,
                cfg.batch_size,
                train_stream,
            )
            counters["train_calls"] += 1
            gen_rec["train_loss"] = losses
        else:
            if cfg.use_surrogate:
                counters["train_skipped"] += 1
            gen_rec["train_loss"] = None

        improved_assigns = np.stack([r.best.assign for r in results])
        improved_fitness = np.array(
            [min(r.best_score, int(INF_SCORE)) for r in results], dtype=np.int64
        )
        cross, within = pairwise_distances(
            pop.assigns, improved_assigns, k=k, thread_count=cfg.threads
        )
        pop = update_population(pop, improved_assigns, improved_fitness, cross, within, ms)
        gen_rec["pop_fitness_mean"] = float(pop.fitness.mean())
        gen_rec["distance"] = _distance_stats(pop.dist)

        matches = match_parents(pop, cfg.K)
        batch = build_and_select_offspring(
            pop, matches, net, cfg.seed, t, use_surrogate=cfg.use_surrogate
        )
        counters["select_calls"] += 1
        offspring = [Coloring(batch.selected_assigns[i], k) for i in range(p)]
        prev_predictions = (
            batch.predicted[np.arange(p), batch.selected_index]
            if cfg.use_surrogate
            else None
        )

        record.generations.append(gen_rec)
        gen_times.append(time.time() - gen_started)
        if stop_reason:
            break
        t += 1

    record.counters = counters
    record.stop_reason = stop_reason
    record.timing = {
        "started_at": started,
        "wall_time_s": time.time() - started,
        "per_generation_s": gen_times,
    }
    return best_assign, best_score


def run_wvcp(g, cfg):
    """Full weighted run; returns (best Coloring, RunRecord)."""
    cfg.validate()
    if cfg.problem != WVCP:
        raise ValueError("config is not a WVCP config")
    record = RunRecord(
        problem=WVCP, instance=g.name, n=g.n, m=g.m, config=cfg.echo()
    )
    init = init_wvcp_population(g, cfg.p, cfg.seed)
    k = init.k
    fitness = np.array([wvcp_score(g, c)[0] for c in init.colorings], dtype=np.int64)
    best_assign, best_score = _generation_loop(
        g, cfg, WVCP, init.colorings, k, fitness, record
    )
    best = Coloring(best_assign, k)
    score, conflicts = wvcp_score(g, best)
    assert conflicts == 0 and score == best_score
    record.best_score = int(best_score)
    record.best_assign = [int(c) for c in best.assign]
    record.best_k = k
    record.legal = True
    return best, record


def run_col_fixed_k(g, k, cfg):
    """Alg-1 with random init and TabuCol; stops at the first legal coloring.

    Returns (legal Coloring or None, RunRecord).
    """
    cfg.validate()
    if cfg.problem != COL:
        raise ValueError("config is not a COL config")
    record = RunRecord(
        problem=COL, instance=g.name, n=g.n, m=g.m, config={**cfg.echo(), "k": k}
    )
    init = init_col_population(g.n, k, cfg.p, cfg.seed)
    fitness = np.array(
        [col_conflicts(g, c) for c in init.colorings], dtype=np.int64
    )
    best_assign, best_score = _generation_loop(
        g, cfg, COL, init.colorings, k, fitness, record
    )
    record.best_score = int(best_score)
    record.best_assign = [int(c) for c in best_assign] if best_assign is not None else None
    record.best_k = k
    record.legal = bool(best_score == 0)
    legal = Coloring(best_assign, k) if record.legal else None
    return legal, record


def greedy_col_bound(g):
    """Colors used by a deterministic greedy coloring in degree order."""
    assign = -np.ones(g.n, dtype=np.int64)
    order = np.lexsort((np.arange(g.n), -g.degrees))
    used = 0
    for v in order:
        blocked = {int(assign[u]) for u in g.adjacency[v] if assign[u] >= 0}
        c = 0
        while c in blocked:
            c += 1
        assign[v] = c
        used = max(used, c + 1)
    return used


def run_col_descending(g, cfg):
    """Decreasing-k driver: resolve with k-1 after every legal k-coloring.

    Returns (best_k, {k: Coloring}, [RunRecord per attempted k]).
    """
    cfg.validate()
    started = time.time()
    k = cfg.k if cfg.k is not None else greedy_col_bound(g)
    solutions = {}
    records = []
    best_k = None
    while k >= 1:
        sub = RunConfig(**{**cfg.echo(), "k": k})
        if cfg.time_limit is not None:
            remaining = cfg.time_limit - (time.time() - started)
            if remaining <= 0:
                break
            sub.time_limit = remaining
        legal, rec = run_col_fixed_k(g, k, sub)
        records.append(rec)
        if legal is None:
            break
        solutions[k] = legal
        best_k = k
        k -= 1
    return best_k, solutions, records
