"""Command-line front end: solving, preprocessing, benchmarking, ablation.

Subcommands
    solve-wvcp      weighted run on one instance, JSON record out
    solve-col       k-coloring run (fixed k or descending from --k auto)
    reduce          print the preprocessing report for an instance
    bench           run a CSV suite of instances against expected values
    ablate          paired-seed comparison with the surrogate on vs off
    predict-quality dump per-generation (predicted, realized) score pairs

MEMCOLOR_THREADS sets the default worker count when --threads is absent.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from .coloring import Coloring, wvcp_score, write_solution
from .engine import (
    RunConfig,
    SizingError,
    canonical_payload,
    col_defaults,
    run_col_descending,
    run_col_fixed_k,
    run_wvcp,
)
from .graph import DimacsError, expand_coloring, load_instance, reduce_graph
from .localsearch import COL, WVCP


def _default_threads():
    env = os.environ.get("MEMCOLOR_THREADS")
    return int(env) if env else None


def _add_common(sp):
    sp.add_argument("--instance", required=True, help="DIMACS .col file")
    sp.add_argument("--pop", type=int, default=256, help="population size p")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--time-limit", type=float, default=None, help="seconds")
    sp.add_argument("--generations", type=int, default=None)
    sp.add_argument("--target", type=int, default=None, help="stop when best <= target")
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--no-surrogate", action="store_true", help="random crossover selection")
    sp.add_argument("--net", choices=["small", "paper"], default="small")
    sp.add_argument("--knn", type=int, default=None, help="neighbors K for crossover")
    sp.add_argument("--paper-config", action="store_true", help="full-scale table defaults (p=20480, paper net)")
    sp.add_argument("--out", default=None, help="JSON run record path")
    sp.add_argument("--sol-out", default=None, help="best solution file path")


def _build_config(args, problem):
    cfg = RunConfig(
        problem=problem,
        p=args.pop,
        seed=args.seed,
        time_limit=args.time_limit,
        max_generations=args.generations,
        target=args.target,
        threads=args.threads if args.threads is not None else _default_threads(),
        use_surrogate=not args.no_surrogate,
        net_arch=args.net,
    )
    if problem == COL:
        cfg = col_defaults(cfg)
    if args.paper_config:
        cfg.p = 20480
        cfg.net_arch = "paper"
    if args.knn is not None:
        cfg.K = args.knn
    if cfg.K >= cfg.p:
        cfg.K = max(1, cfg.p // 2)
    return cfg


def write_run_record(record, path):
    """Persist a record (RunRecord or plain dict) as JSON."""
    payload = record if isinstance(record, dict) else record.to_dict()
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")
    return payload


def _load(args, need_weights=None):
    weights = getattr(args, "weights", None)
    try:
        g = load_instance(args.instance, weights)
    except FileNotFoundError as e:
        raise CliError(f"cannot read {e.filename}") from e
    except DimacsError as e:
        raise CliError(f"{args.instance}: {e}") from e
    return g


class CliError(Exception):
    pass


def cmd_solve_wvcp(args):
    g = _load(args)
    report = None
    g_run = g
    if not args.no_reduce:
        g_run, report = reduce_graph(g)
    cfg = _build_config(args, WVCP)
    best, record = run_wvcp(g_run, cfg)
    payload = record.to_dict()
    if report is not None:
        assign, k = expand_coloring(g, report, best.assign, best.k)
        full = Coloring(assign, k)
        score, conflicts = wvcp_score(g, full)
        if conflicts != 0 or score != record.best_score:
            raise AssertionError("re-expressed solution lost legality or score")
        payload["reduction"] = report.summary()
        payload["best"]["assign"] = [int(c) for c in assign]
        payload["best"]["k"] = int(k)
    else:
        full = best
    if args.out:
        write_run_record(payload, args.out)
    if args.sol_out:
        with open(args.sol_out, "w", encoding="utf-8") as f:
            f.write(write_solution(g, full, record.best_score))
    print(f"{g.name}: best {record.best_score} ({record.stop_reason}, {len(record.generations)} generations)")
    return 0


def cmd_solve_col(args):
    if getattr(args, "weights", None):
        raise CliError("weights make no sense for solve-col")
    g = _load(args)
    cfg = _build_config(args, COL)
    if args.k == "auto":
        cfg.k = None
        best_k, solutions, records = run_col_descending(g, cfg)
        payload = {
            "schema_version": records[0].to_dict()["schema_version"] if records else 1,
            "mode": "descending",
            "instance": g.name,
            "best_k": best_k,
            "records": [r.to_dict() for r in records],
        }
        if args.out:
            write_run_record(payload, args.out)
        if args.sol_out and best_k is not None:
            with open(args.sol_out, "w", encoding="utf-8") as f:
                f.write(write_solution(g, solutions[best_k], best_k))
        print(f"{g.name}: best k = {best_k}")
        return 0
    try:
        k = int(args.k)
    except ValueError:
        raise CliError(f"--k must be an integer or 'auto', got {args.k!r}") from None
    legal, record = run_col_fixed_k(g, k, cfg)
    payload = record.to_dict()
    if args.out:
        write_run_record(payload, args.out)
    if args.sol_out and legal is not None:
        with open(args.sol_out, "w", encoding="utf-8") as f:
            f.write(write_solution(g, legal, k))
    print(
        f"{g.name}: k={k} legal={record.legal} best conflicts {record.best_score} "
        f"({record.stop_reason})"
    )
    return 0


def cmd_reduce(args):
    g = _load(args)
    reduced, report = reduce_graph(g)
    print(f"instance: {g.name} (n={g.n}, m={g.m})")
    print(f"cliques enumerated: {report.cliques_found}")
    print(f"removed vertices: {len(report.removed)}")
    if report.removed:
        shown = ", ".join(str(v + 1) for v in report.removed[:20])
        more = "..." if len(report.removed) > 20 else ""
        print(f"  (1-based ids) {shown}{more}")
    print(f"reduced: n={reduced.n}, m={reduced.m}")
    if args.out:
        col_text_path = args.out
        from .graph import write_dimacs

        col_text, w_text = write_dimacs(reduced)
        with open(col_text_path, "w", encoding="utf-8") as f:
            f.write(col_text)
        with open(col_text_path + ".w", "w", encoding="utf-8") as f:
            f.write(w_text)
        print(f"wrote {col_text_path} (+.w)")
    return 0


SUITE_COLUMNS = [
    "name",
    "instance",
    "weights",
    "problem",
    "expected",
    "provenance",
    "time_limit_s",
    "pop",
    "seeds",
]


def read_suite(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = set(SUITE_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise CliError(f"suite file missing columns: {sorted(missing)}")
        for row in reader:
            if not row.get("provenance", "").strip():
                raise CliError(f"suite row {row.get('name')} lacks a provenance tag")
            rows.append(row)
    return rows


def cmd_bench(args):
    suite = read_suite(args.suite)
    base = os.path.dirname(os.path.abspath(args.suite))
    results = []
    for row in suite:
        name = row["name"]
        inst = row["instance"]
        if not os.path.isabs(inst):
            inst = os.path.join(base, inst)
        weights = row["weights"].strip() or None
        if weights and not os.path.isabs(weights):
            weights = os.path.join(base, weights)
        expected = int(row["expected"])
        tl = float(row["time_limit_s"])
        pop = int(row["pop"])
        seeds = int(row["seeds"])
        problem = row["problem"].strip().lower()

        bests, times = [], []
        for seed in range(seeds):
            g = load_instance(inst, weights)
            cfg = RunConfig(
                problem=WVCP,
                p=pop,
                seed=seed,
                time_limit=tl,
                target=expected if problem == "wvcp" else None,
                threads=args.threads if args.threads is not None else _default_threads(),
            )
            t0 = time.time()
            if problem == "wvcp":
                g_run, _ = reduce_graph(g)
                _, rec = run_wvcp(g_run, cfg)
                bests.append(rec.best_score)
            elif problem == "col":
                cfg = col_defaults(cfg)
                legal, rec = run_col_fixed_k(g, expected, cfg)
                bests.append(0 if legal is not None else rec.best_score)
            else:
                raise CliError(f"unknown problem {problem!r} in suite row {name}")
            times.append(time.time() - t0)
            if problem == "wvcp" and bests[-1] == expected and args.first_hit:
                break
            if problem == "col" and bests[-1] == 0 and args.first_hit:
                break
        best = min(bests)
        hit = best == expected if problem == "wvcp" else best == 0
        results.append(
            {
                "name": name,
                "problem": problem,
                "expected": expected,
                "best": best,
                "avg": float(np.mean(bests)),
                "time_to_best_s": times[int(np.argmin(bests))],
                "runs": len(bests),
                "hit": hit,
                "provenance": row["provenance"],
            }
        )
        status = "ok" if hit else "MISS"
        print(f"[{status}] {name}: best {best} (expected {expected}) in {results[-1]['time_to_best_s']:.1f}s")

    print()
    print("| instance | problem | expected | best | avg | time-to-best (s) | runs | hit |")
    print("|---|---|---|---|---|---|---|---|")
    for r in results:
        print(
            f"| {r['name']} | {r['problem']} | {r['expected']} | {r['best']} "
            f"| {r['avg']:.1f} | {r['time_to_best_s']:.1f} | {r['runs']} | {'yes' if r['hit'] else 'no'} |"
        )
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as f:
            w = csv.DictWriter(f, fieldnames=list(results[0].keys()))
            w.writeheader()
            w.writerows(results)
    misses = sum(1 for r in results if not r["hit"])
    print(f"\n{len(results) - misses}/{len(results)} instances hit their expected value")
    if args.strict and misses:
        return 1
    return 0


def cmd_ablate(args):
    g = load_instance(args.instance, getattr(args, "weights", None))
    g, _ = reduce_graph(g)
    curves = {"surrogate": [], "random": []}
    finals = {"surrogate": [], "random": []}
    for pair in range(args.pairs):
        seed = args.seed + pair
        for label, use in (("surrogate", True), ("random", False)):
            cfg = RunConfig(
                problem=WVCP,
                p=args.pop,
                seed=seed,
                max_generations=args.generations,
                use_surrogate=use,
                threads=args.threads if args.threads is not None else _default_threads(),
            )
            _, rec = run_wvcp(g, cfg)
            curve = [gen["best_score"] for gen in rec.generations]
            curves[label].append(curve)
            finals[label].append(rec.best_score)
            print(f"pair {pair} seed {seed} {label}: best {rec.best_score}")
    mean_on = float(np.mean(finals["surrogate"]))
    mean_off = float(np.mean(finals["random"]))
    print(f"\nmean best with surrogate: {mean_on:.2f}")
    print(f"mean best with random selection: {mean_off:.2f}")
    print("surrogate <= random:", mean_on <= mean_off)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(
                {
                    "instance": g.name,
                    "pairs": args.pairs,
                    "generations": args.generations,
                    "pop": args.pop,
                    "finals": finals,
                    "curves": curves,
                    "mean_surrogate": mean_on,
                    "mean_random": mean_off,
                },
                f,
                indent=1,
            )
    return 0


def cmd_predict_quality(args):
    g = load_instance(args.instance, getattr(args, "weights", None))
    g, _ = reduce_graph(g)
    cfg = RunConfig(
        problem=WVCP,
        p=args.pop,
        seed=args.seed,
        max_generations=args.generations,
        collect_pairs=True,
        threads=args.threads if args.threads is not None else _default_threads(),
    )
    _, rec = run_wvcp(g, cfg)
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["generation", "individual", "predicted", "realized"])
        for gen in rec.generations:
            for i, (pred, real) in enumerate(gen.get("pairs", [])):
                w.writerow([gen["generation"], i, pred, real])
    print(f"wrote {args.out}")
    for gen in rec.generations:
        stats = gen.get("prediction")
        if stats:
            print(
                f"generation {gen['generation']}: pearson {stats['pearson']:.3f} "
                f"median rel err {stats['median_rel_err']:.4f}"
            )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="memcolor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve-wvcp", help="solve a weighted instance")
    _add_common(sp)
    sp.add_argument("--weights", default=None, help="weight file (defaults to <instance>.w)")
    sp.add_argument("--no-reduce", action="store_true", help="skip clique preprocessing")
    sp.set_defaults(func=cmd_solve_wvcp)

    sp = sub.add_parser("solve-col", help="solve a k-coloring instance")
    _add_common(sp)
    sp.add_argument("--k", required=True, help="color count, or 'auto' for descending")
    sp.set_defaults(func=cmd_solve_col)

    sp = sub.add_parser("reduce", help="print the reduction report")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--weights", default=None)
    sp.add_argument("--out", default=None, help="write the reduced instance here")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("bench", help="run a benchmark suite (CSV)")
    sp.add_argument("--suite", required=True)
    sp.add_argument("--csv", default=None, help="write the report table as CSV")
    sp.add_argument("--strict", action="store_true", help="nonzero exit on any miss")
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument(
        "--first-hit",
        action="store_true",
        help="stop seed sweep for an instance once the expected value is reached",
    )
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("ablate", help="surrogate on/off paired-seed comparison")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--weights", default=None)
    sp.add_argument("--pairs", type=int, default=5)
    sp.add_argument("--generations", type=int, default=30)
    sp.add_argument("--pop", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_ablate)

    sp = sub.add_parser("predict-quality", help="dump predicted vs realized scores")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--weights", default=None)
    sp.add_argument("--generations", type=int, default=30)
    sp.add_argument("--pop", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_predict_quality)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SizingError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except FileNotFoundError as e:
        print(f"error: cannot read {e.filename}", file=sys.stderr)
        return 2
    except DimacsError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
