"""Tabu search engines and the batch driver improving a whole population.

Two engines share the one-move neighborhood (recolor a single vertex):

* the weighted search minimizes score + phi * conflicts over legal and
  illegal colorings, with an adaptive phi schedule across successive
  restarts, a full (vertex, color) move scan, and per-vertex freezing;
* the plain k-coloring search is classic TabuCol: only conflicting vertices
  are scanned and a moved vertex may not return to its old color for the
  tenure, which grows with the conflict count.

Both are compiled as numba kernels that iterate one individual per prange
index; every individual owns its state and counter-based RNG stream, so
results are deterministic and independent of the thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from .coloring import Coloring
from .rng import TAG_LS, stream_key, u64_below

INF_SCORE = np.int64(1) << np.int64(62)

WVCP = "wvcp"
COL = "col"


@dataclass
class LsResult:
    """Outcome of improving one individual."""

    start: Coloring
    best: Coloring
    best_score: int
    iterations_used: int
    legal_found: bool
    end: Coloring
    phi_trajectory: list = field(default_factory=list)


@njit(cache=True, inline="always")
def _refresh_class(c, wc, nranks, wvals, max_rank, max_val, uniq_drop):
    mr = -1
    for r in range(nranks - 1, -1, -1):
        if wc[c, r] > 0:
            mr = r
            break
    max_rank[c] = mr
    if mr < 0:
        max_val[c] = 0
        uniq_drop[c] = 0
        return
    max_val[c] = wvals[mr]
    if wc[c, mr] > 1:
        uniq_drop[c] = 0
    else:
        second = np.int64(0)
        for r in range(mr - 1, -1, -1):
            if wc[c, r] > 0:
                second = wvals[r]
                break
        uniq_drop[c] = wvals[mr] - second


@njit(cache=True)
def _wvcp_scratch(assign, k, wranks, wvals, edges_u, edges_v):
    nranks = wvals.shape[0]
    counts = np.zeros((k, nranks), dtype=np.int64)
    for v in range(assign.shape[0]):
        counts[assign[v], wranks[v]] += 1
    score = np.int64(0)
    for c in range(k):
        for r in range(nranks - 1, -1, -1):
            if counts[c, r] > 0:
                score += wvals[r]
                break
    conf = np.int64(0)
    for e in range(edges_u.shape[0]):
        if assign[edges_u[e]] == assign[edges_v[e]]:
            conf += 1
    return score, conf


@njit(cache=True, parallel=True)
def _wvcp_batch(
    assigns,
    k,
    adj_indptr,
    adj_indices,
    edges_u,
    edges_v,
    wranks,
    wvals,
    weights,
    depth,
    rounds,
    schedule_on,
    phi0s,
    forced_phi,
    tt_base,
    keys,
    best_assigns,
    best_scores,
    end_scores,
    end_conflicts,
    phi_used,
    diag,
    log_cap,
    log_v,
    log_iter,
    log_tt,
    log_asp,
    log_cnt,
):
    p, n = assigns.shape
    nranks = wvals.shape[0]
    for i in prange(p):
        assign = assigns[i]
        key = keys[i]
        ctr = np.int64(0)

        gamma = np.zeros((n, k), dtype=np.int32)
        for v in range(n):
            for idx in range(adj_indptr[v], adj_indptr[v + 1]):
                gamma[adj_indices[idx], assign[v]] += 1

        wc = np.zeros((k, nranks), dtype=np.int32)
        for v in range(n):
            wc[assign[v], wranks[v]] += 1

        max_rank = np.empty(k, dtype=np.int64)
        max_val = np.empty(k, dtype=np.int64)
        uniq_drop = np.empty(k, dtype=np.int64)
        for c in range(k):
            _refresh_class(c, wc, nranks, wvals, max_rank, max_val, uniq_drop)

        score, conflicts = _wvcp_scratch(assign, k, wranks, wvals, edges_u, edges_v)

        best_score = INF_SCORE
        if conflicts == 0:
            best_score = score
            for v in range(n):
                best_assigns[i, v] = assign[v]

        tabu_until = np.zeros(n, dtype=np.int64)
        phi = phi0s[i]
        phi_used[i, 0] = phi
        it = np.int64(0)
        nlog = np.int64(0)

        for rnd in range(rounds):
            if schedule_on and rnd == rounds - 1:
                phi = forced_phi
                phi_used[i, rounds] = phi
            for v in range(n):
                tabu_until[v] = 0

            for _step in range(depth):
                best_g = np.inf
                best_v = -1
                best_c = -1
                best_ds = np.int64(0)
                best_dc = np.int64(0)
                best_was_tabu = False
                ties = np.int64(0)

                for v in range(n):
                    a = assign[v]
                    rem = np.int64(0)
                    if wranks[v] == max_rank[a]:
                        rem = uniq_drop[a]
                    gva = gamma[v, a]
                    frozen = it < tabu_until[v]
                    for c in range(k):
                        if c == a:
                            continue
                        d_conf = np.int64(gamma[v, c]) - np.int64(gva)
                        d_add = weights[v] - max_val[c]
                        if d_add < 0:
                            d_add = 0
                        d_score = d_add - rem
                        if frozen:
                            # aspiration: legal and strictly better than best legal
                            if conflicts + d_conf != 0:
                                continue
                            if score + d_score >= best_score:
                                continue
                        gval = float(d_score) + phi * float(d_conf)
                        if gval < best_g:
                            best_g = gval
                            best_v = v
                            best_c = c
                            best_ds = d_score
                            best_dc = d_conf
                            best_was_tabu = frozen
                            ties = 1
                        elif gval == best_g:
                            ties += 1
                            if u64_below(key, np.uint64(ctr), np.uint64(ties)) == np.uint64(0):
                                best_v = v
                                best_c = c
                                best_ds = d_score
                                best_dc = d_conf
                                best_was_tabu = frozen
                            ctr += 1

                if best_v >= 0:
                    v = best_v
                    a = assign[v]
                    b = best_c
                    wc[a, wranks[v]] -= 1
                    wc[b, wranks[v]] += 1
                    for idx in range(adj_indptr[v], adj_indptr[v + 1]):
                        u = adj_indices[idx]
                        gamma[u, a] -= 1
                        gamma[u, b] += 1
                    assign[v] = b
                    score += best_ds
                    conflicts += best_dc
                    _refresh_class(a, wc, nranks, wvals, max_rank, max_val, uniq_drop)
                    _refresh_class(b, wc, nranks, wvals, max_rank, max_val, uniq_drop)

                    ll = u64_below(key, np.uint64(ctr), np.uint64(10))
                    ctr += 1
                    tt = np.int64(ll) + tt_base
                    tabu_until[v] = it + tt + 1

                    if conflicts == 0 and score < best_score:
                        best_score = score
                        for u2 in range(n):
                            best_assigns[i, u2] = assign[u2]

                    if nlog < log_cap:
                        log_v[i, nlog] = v
                        log_iter[i, nlog] = it
                        log_tt[i, nlog] = tt
                        log_asp[i, nlog] = 1 if best_was_tabu else 0
                        nlog += 1

                it += 1
                if it % 1024 == 0:
                    s2, c2 = _wvcp_scratch(assign, k, wranks, wvals, edges_u, edges_v)
                    if s2 != score or c2 != conflicts:
                        diag[i] += 1

            if schedule_on and rnd < rounds - 1:
                if conflicts == 0:
                    phi = phi / 2.0
                else:
                    phi = phi * 2.0
                phi_used[i, rnd + 1] = phi
            elif not schedule_on:
                phi_used[i, rnd + 1] = phi

        end_scores[i] = score
        end_conflicts[i] = conflicts
        best_scores[i] = best_score
        log_cnt[i] = nlog


@njit(cache=True, parallel=True)
def _tabucol_batch(
    assigns,
    k,
    adj_indptr,
    adj_indices,
    edges_u,
    edges_v,
    depth,
    keys,
    best_assigns,
    best_conflicts,
    end_conflicts,
    iters_used,
    diag,
    log_cap,
    log_v,
    log_iter,
    log_tt,
    log_cnt,
):
    p, n = assigns.shape
    for i in prange(p):
        assign = assigns[i]
        key = keys[i]
        ctr = np.int64(0)

        gamma = np.zeros((n, k), dtype=np.int32)
        for v in range(n):
            for idx in range(adj_indptr[v], adj_indptr[v + 1]):
                gamma[adj_indices[idx], assign[v]] += 1

        conflicts = np.int64(0)
        for e in range(edges_u.shape[0]):
            if assign[edges_u[e]] == assign[edges_v[e]]:
                conflicts += 1

        conf_list = np.empty(n, dtype=np.int32)
        conf_pos = np.full(n, -1, dtype=np.int32)
        conf_count = 0
        for v in range(n):
            if gamma[v, assign[v]] > 0:
                conf_pos[v] = conf_count
                conf_list[conf_count] = v
                conf_count += 1

        best = conflicts
        for v in range(n):
            best_assigns[i, v] = assign[v]

        tabu_pair = np.zeros((n, k), dtype=np.int64)
        it = np.int64(0)
        nlog = np.int64(0)

        if k >= 2:
            for _step in range(depth):
                if conflicts == 0:
                    break
                best_d = np.int64(1) << np.int64(40)
                best_v = -1
                best_c = -1
                ties = np.int64(0)
                for li in range(conf_count):
                    v = conf_list[li]
                    a = assign[v]
                    gva = gamma[v, a]
                    for c in range(k):
                        if c == a:
                            continue
                        d = np.int64(gamma[v, c]) - np.int64(gva)
                        if it < tabu_pair[v, c]:
                            # aspiration: reaching a new overall best
                            if conflicts + d >= best:
                                continue
                        if d < best_d:
                            best_d = d
                            best_v = v
                            best_c = c
                            ties = 1
                        elif d == best_d:
                            ties += 1
                            if u64_below(key, np.uint64(ctr), np.uint64(ties)) == np.uint64(0):
                                best_v = v
                                best_c = c
                            ctr += 1

                if best_v >= 0:
                    v = best_v
                    a = assign[v]
                    b = best_c
                    for idx in range(adj_indptr[v], adj_indptr[v + 1]):
                        u = adj_indices[idx]
                        gamma[u, a] -= 1
                        gamma[u, b] += 1
                    assign[v] = b
                    conflicts += best_d

                    ll = u64_below(key, np.uint64(ctr), np.uint64(10))
                    ctr += 1
                    tt = np.int64(ll) + (np.int64(6) * conflicts) // np.int64(10)
                    tabu_pair[v, a] = it + tt + 1

                    # conflict-list membership can change for v and neighbors
                    for idx in range(adj_indptr[v], adj_indptr[v + 1] + 1):
                        if idx == adj_indptr[v + 1]:
                            u = v
                        else:
                            u = adj_indices[idx]
                        in_conf = gamma[u, assign[u]] > 0
                        if in_conf and conf_pos[u] < 0:
                            conf_pos[u] = conf_count
                            conf_list[conf_count] = u
                            conf_count += 1
                        elif not in_conf and conf_pos[u] >= 0:
                            pos = conf_pos[u]
                            last = conf_list[conf_count - 1]
                            conf_list[pos] = last
                            conf_pos[last] = pos
                            conf_count -= 1
                            conf_pos[u] = -1

                    if conflicts < best:
                        best = conflicts
                        for u2 in range(n):
                            best_assigns[i, u2] = assign[u2]

                    if nlog < log_cap:
                        log_v[i, nlog] = v
                        log_iter[i, nlog] = it
                        log_tt[i, nlog] = tt
                        nlog += 1

                it += 1
                if it % 1024 == 0:
                    c2 = np.int64(0)
                    for e in range(edges_u.shape[0]):
                        if assign[edges_u[e]] == assign[edges_v[e]]:
                            c2 += 1
                    if c2 != conflicts:
                        diag[i] += 1

        end_conflicts[i] = conflicts
        best_conflicts[i] = best
        iters_used[i] = it
        log_cnt[i] = nlog


def default_wvcp_phi0(g, k):
    """Initial penalty coefficient: (k / (2 |V|)) * max weight."""
    return (k / (2.0 * g.n)) * g.max_weight


def _graph_arrays(g):
    return (
        g.adj_indptr,
        g.adj_indices,
        g.edges[:, 0].astype(np.int32),
        g.edges[:, 1].astype(np.int32),
    )


def _run_wvcp_batch(
    g,
    assigns,
    k,
    keys,
    depth,
    rounds,
    schedule_on,
    phi0,
    log_moves=False,
):
    p, n = assigns.shape
    indptr, indices, eu, ev = _graph_arrays(g)
    phi0s = np.full(p, float(phi0), dtype=np.float64)
    forced_phi = 2.0 * float(g.max_weight)
    tt_base = np.int64(n // 5)

    best_assigns = assigns.copy()
    best_scores = np.empty(p, dtype=np.int64)
    end_scores = np.empty(p, dtype=np.int64)
    end_conflicts = np.empty(p, dtype=np.int64)
    phi_used = np.zeros((p, rounds + 1), dtype=np.float64)
    diag = np.zeros(p, dtype=np.int64)
    cap = rounds * depth if log_moves else 0
    log_v = np.zeros((p, max(cap, 1)), dtype=np.int32)
    log_iter = np.zeros((p, max(cap, 1)), dtype=np.int64)
    log_tt = np.zeros((p, max(cap, 1)), dtype=np.int64)
    log_asp = np.zeros((p, max(cap, 1)), dtype=np.int8)
    log_cnt = np.zeros(p, dtype=np.int64)

    _wvcp_batch(
        assigns,
        k,
        indptr,
        indices,
        eu,
        ev,
        g.weight_ranks,
        g.weight_values,
        g.weights,
        depth,
        rounds,
        schedule_on,
        phi0s,
        forced_phi,
        tt_base,
        keys,
        best_assigns,
        best_scores,
        end_scores,
        end_conflicts,
        phi_used,
        diag,
        np.int64(cap),
        log_v,
        log_iter,
        log_tt,
        log_asp,
        log_cnt,
    )
    if diag.any():
        raise AssertionError("incremental evaluation diverged from scratch recomputation")
    return {
        "end_assigns": assigns,
        "best_assigns": best_assigns,
        "best_scores": best_scores,
        "end_scores": end_scores,
        "end_conflicts": end_conflicts,
        "phi_used": phi_used,
        "log": (log_v, log_iter, log_tt, log_asp, log_cnt) if log_moves else None,
    }


def wvcp_tabu_search(g, coloring, phi, depth, key, log_moves=False):
    """One fixed-phi search; returns (end coloring, best legal or None)."""
    assigns = coloring.assign[None, :].astype(np.int32).copy()
    keys = np.array([key], dtype=np.uint64)
    out = _run_wvcp_batch(
        g, assigns, coloring.k, keys, depth, 1, False, phi, log_moves=log_moves
    )
    end = Coloring(out["end_assigns"][0], coloring.k)
    best = None
    if out["best_scores"][0] < INF_SCORE:
        best = (Coloring(out["best_assigns"][0], coloring.k), int(out["best_scores"][0]))
    result = (end, best)
    if log_moves:
        result = (end, best, out["log"])
    return result


def iterated_wvcp_ls(
    g, coloring, key, depth=None, max_rounds=10, phi0=None, log_moves=False
):
    """Successive tabu searches with the adaptive phi schedule.

    phi halves after a legal restart outcome, doubles after an illegal one,
    and the last restart runs with phi = 2 * max weight so at least one
    search is pushed hard toward legality.  Returns the best legal coloring
    seen anywhere on the trajectory.
    """
    k = coloring.k
    if depth is None:
        depth = 10 * g.n
    if phi0 is None:
        phi0 = default_wvcp_phi0(g, k)
    assigns = coloring.assign[None, :].astype(np.int32).copy()
    keys = np.array([key], dtype=np.uint64)
    out = _run_wvcp_batch(
        g, assigns, k, keys, depth, max_rounds, True, phi0, log_moves=log_moves
    )
    legal = bool(out["best_scores"][0] < INF_SCORE)
    best = Coloring(out["best_assigns"][0], k) if legal else coloring.copy()
    phis = list(out["phi_used"][0])
    # trajectory of phi values taken: initial, each post-round update, the
    # forced final value (the update after the last round does not exist)
    result = LsResult(
        start=coloring.copy(),
        best=best,
        best_score=int(out["best_scores"][0]) if legal else int(INF_SCORE),
        iterations_used=depth * max_rounds,
        legal_found=legal,
        end=Coloring(out["end_assigns"][0], k),
        phi_trajectory=phis,
    )
    if log_moves:
        return result, out["log"]
    return result


def _run_tabucol_batch(g, assigns, k, keys, depth, log_moves=False):
    p = assigns.shape[0]
    indptr, indices, eu, ev = _graph_arrays(g)
    best_assigns = assigns.copy()
    best_conflicts = np.empty(p, dtype=np.int64)
    end_conflicts = np.empty(p, dtype=np.int64)
    iters_used = np.zeros(p, dtype=np.int64)
    diag = np.zeros(p, dtype=np.int64)
    cap = depth if log_moves else 0
    log_v = np.zeros((p, max(cap, 1)), dtype=np.int32)
    log_iter = np.zeros((p, max(cap, 1)), dtype=np.int64)
    log_tt = np.zeros((p, max(cap, 1)), dtype=np.int64)
    log_cnt = np.zeros(p, dtype=np.int64)
    _tabucol_batch(
        assigns,
        k,
        indptr,
        indices,
        eu,
        ev,
        depth,
        keys,
        best_assigns,
        best_conflicts,
        end_conflicts,
        iters_used,
        diag,
        np.int64(cap),
        log_v,
        log_iter,
        log_tt,
        log_cnt,
    )
    if diag.any():
        raise AssertionError("incremental evaluation diverged from scratch recomputation")
    return {
        "end_assigns": assigns,
        "best_assigns": best_assigns,
        "best_conflicts": best_conflicts,
        "end_conflicts": end_conflicts,
        "iters_used": iters_used,
        "log": (log_v, log_iter, log_tt, log_cnt) if log_moves else None,
    }


def tabucol(g, coloring, k, depth=None, key=0, log_moves=False):
    """Classic TabuCol on conflicting vertices; stops at zero conflicts."""
    if depth is None:
        depth = 128 * g.n
    assigns = coloring.assign[None, :].astype(np.int32).copy()
    keys = np.array([key], dtype=np.uint64)
    out = _run_tabucol_batch(g, assigns, k, keys, depth, log_moves=log_moves)
    end = Coloring(out["end_assigns"][0], k)
    best = Coloring(out["best_assigns"][0], k)
    if log_moves:
        return end, best, int(out["best_conflicts"][0]), out["log"]
    return end, best, int(out["best_conflicts"][0])


def improve_population(
    g,
    colorings,
    mode,
    master_seed,
    generation=0,
    thread_count=None,
    depth=None,
    max_rounds=10,
):
    """Improve every individual independently; order-stable and
    deterministic for any thread count (one RNG stream per individual)."""
    import numba

    if thread_count:
        numba.set_num_threads(max(1, min(thread_count, numba.config.NUMBA_NUM_THREADS)))

    p = len(colorings)
    k = colorings[0].k
    n = g.n
    assigns = np.stack([c.assign for c in colorings]).astype(np.int32)
    keys = np.array(
        [stream_key(master_seed, TAG_LS, generation, i) for i in range(p)],
        dtype=np.uint64,
    )
    starts = [c.copy() for c in colorings]

    if mode == WVCP:
        if depth is None:
            depth = 10 * n
        phi0 = default_wvcp_phi0(g, k)
        out = _run_wvcp_batch(g, assigns, k, keys, depth, max_rounds, True, phi0)
        results = []
        for i in range(p):
            legal = bool(out["best_scores"][i] < INF_SCORE)
            best = Coloring(out["best_assigns"][i], k) if legal else starts[i].copy()
            results.append(
                LsResult(
                    start=starts[i],
                    best=best,
                    best_score=int(out["best_scores"][i]) if legal else int(INF_SCORE),
                    iterations_used=depth * max_rounds,
                    legal_found=legal,
                    end=Coloring(out["end_assigns"][i], k),
                    phi_trajectory=list(out["phi_used"][i]),
                )
            )
        return results

    if mode == COL:
        if depth is None:
            depth = 128 * n
        out = _run_tabucol_batch(g, assigns, k, keys, depth)
        results = []
        for i in range(p):
            results.append(
                LsResult(
                    start=starts[i],
                    best=Coloring(out["best_assigns"][i], k),
                    best_score=int(out["best_conflicts"][i]),
                    iterations_used=int(out["iters_used"][i]),
                    legal_found=bool(out["best_conflicts"][i] == 0),
                    end=Coloring(out["end_assigns"][i], k),
                )
            )
        return results

    raise ValueError(f"unknown mode {mode!r}")
