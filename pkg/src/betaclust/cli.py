"""Command-line interface.

    betaclust cluster  --data d.csv --foi income --algo beta-ic --k 5 --beta 0.8 --out run/
    betaclust sweep    --data d.csv --schema s.json --betas 0.5,0.6,0.7,0.8,0.9,1.0 --k 5 --seeds 10 --out sw/
    betaclust sweep-k  --data d.csv --schema s.json --algos kc,ikc --ks 10,20,30 --out sk/
    betaclust synth    --n 500 --foi-cardinality 4 --out data/

Exit status: 0 on success, 1 on bad input or an infeasible request, 2 when a
beta-IC run does not reach its target.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import kcenter_on_foi, partition_by_value
from .beta_cluster import BetaRunConfig, beta_interpretable_clustering
from .dataset import Dataset, FeatureSchema, infer_schema, load_csv, synthesize, to_csv
from .errors import BetaClustError
from .explain import DEFAULT_MIN_SUPPORT, Explanation, Term, cluster_explanation
from .interpretability import score_clustering
from .kcenter import Clustering, best_of_k, greedy_kcenter, kcenter_objective
from .metric import EUCLIDEAN_ALL, EUCLIDEAN_FOI, DistanceMetric
from .strong_cluster import strong_interpretability

log = logging.getLogger("betaclust")

ALGOS = ("kc", "kcf", "pf", "beta-ic", "ikc")
METRICS = {"all": EUCLIDEAN_ALL, "foi": EUCLIDEAN_FOI}
EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for non-convergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class RunOutcome:
    algorithm: str
    clustering: Clustering
    k: int
    beta: float | None
    seed: int | None
    converged: bool = True
    achieved_beta: float | None = None
    iterations: int | None = None
    trace: list = field(default_factory=list)
    wall_time: float = 0.0


def run_algorithm(
    d: Dataset,
    m: DistanceMetric,
    algo: str,
    k: int,
    beta: float | None = None,
    seed: int | None = 0,
    max_iters: int | None = None,
    use_best_of_k: bool = False,
    deterministic: bool = False,
) -> RunOutcome:
    """Run one algorithm; with ``use_best_of_k`` the best result over
    k' = 1..k is kept (for beta-IC, the best converged one).

    ``deterministic`` starts the plain k-center baselines from the lowest
    node id, as the per-value subproblems of ikc always do.
    """
    if algo not in ALGOS:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGOS}")
    if algo == "beta-ic" and beta is None:
        raise ValueError("beta-ic needs --beta")
    if not 1 <= k <= d.n:
        raise ValueError(f"k must lie in [1, {d.n}], got {k}")

    def once(kk):
        if algo == "kc":
            return greedy_kcenter(d, m, None, kk, seed=seed, deterministic=deterministic)
        if algo == "kcf":
            return kcenter_on_foi(d, m, kk, seed=seed, deterministic=deterministic)
        if algo == "pf":
            return partition_by_value(d, m, kk)
        if algo == "ikc":
            return strong_interpretability(d, m, kk, seed=seed)
        cfg = BetaRunConfig(beta, max_iterations=max_iters, seed=seed)
        if kk < k:
            # smaller k' often cannot reach beta; the warning is noise there
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return beta_interpretable_clustering(d, m, kk, cfg)
        return beta_interpretable_clustering(d, m, kk, cfg)

    t0 = time.perf_counter()
    res = best_of_k(d, m, k, once) if use_best_of_k else once(k)
    wall = time.perf_counter() - t0
    if isinstance(res, Clustering):
        return RunOutcome(algo, res, k, beta, seed, wall_time=wall)
    return RunOutcome(
        algo, res.clustering, k, beta, seed,
        converged=res.converged,
        achieved_beta=res.achieved_beta,
        iterations=res.iterations,
        trace=[list(t) for t in res.trace],
        wall_time=wall,
    )


def _jsonable(value):
    return list(value) if isinstance(value, tuple) else value


def _value_text(value) -> str:
    return "|".join(value) if isinstance(value, tuple) else str(value)


def build_report(d: Dataset, m: DistanceMetric, out: RunOutcome, min_support=DEFAULT_MIN_SUPPORT, extra=None) -> dict:
    c = out.clustering
    interp = score_clustering(d, c)
    report = {
        "algorithm": out.algorithm,
        "parameters": {"k": out.k, "beta": out.beta, "seed": out.seed, "min_support": min_support, **(extra or {})},
        "k_used": len(c),
        "objective": kcenter_objective(d, m, c),
        "interpretability": interp.clustering_score,
        "converged": out.converged,
        "achieved_beta": out.achieved_beta,
        "iterations": out.iterations,
        "clusters": [
            {
                "index": s.index,
                "center": cl.center,
                "size": s.size,
                "majority": _jsonable(s.majority),
                "score": s.score,
            }
            for s, cl in zip(interp.per_cluster, c.clusters)
        ],
        "explanations": [e.to_dict() for e in cluster_explanation(d, c, min_support)],
        "wall_time": out.wall_time,
        "trace": out.trace,
    }
    return report


def write_assignments(d: Dataset, c: Clustering, path) -> None:
    labels = c.labels(d.n)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "cluster", "foi_value"])
        for v in range(d.n):
            w.writerow([v, int(labels[v]), _value_text(d.foi_values[d.foi_codes[v]])])


def read_assignments(path) -> tuple[np.ndarray, list[str]]:
    """``(cluster label per node id, foi value text per node id)`` from an
    assignments file."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    rows.sort(key=lambda r: int(r["node_id"]))
    return np.array([int(r["cluster"]) for r in rows]), [r["foi_value"] for r in rows]


def summary_text(report: dict, d: Dataset, min_support=DEFAULT_MIN_SUPPORT) -> str:
    p = report["parameters"]
    lines = [
        f"algorithm {report['algorithm']}  k={p['k']}  beta={p['beta']}  seed={p['seed']}  n={d.n}",
        f"objective {report['objective']:.6g}  interpretability {report['interpretability']:.4f}  "
        f"converged {'yes' if report['converged'] else 'no'}  time {report['wall_time']:.2f}s",
        f"{'cluster':>7} {'center':>7} {'size':>6}  {'majority':<20} {'I_F':>7}",
    ]
    for cl in report["clusters"]:
        maj = _value_text(tuple(cl["majority"]) if isinstance(cl["majority"], list) else cl["majority"])
        lines.append(f"{cl['index']:>7} {cl['center']:>7} {cl['size']:>6}  {maj:<20.20} {cl['score']:>7.4f}")
    lines.append(f"explanations (min support {min_support}):")
    for e in report["explanations"]:
        terms = tuple(Term(tuple(t["values"]), t["support"]) for t in e["terms"])
        lines.append("  " + Explanation(e["cluster"], terms, min_support).render())
    return "\n".join(lines)


# --- argument handling -----------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seeds(text: str) -> list[int]:
    """``10`` means seeds 0..9; ``3,7,11`` is an explicit list."""
    vals = _ints(text)
    if len(vals) == 1 and "," not in text:
        if vals[0] < 1:
            raise argparse.ArgumentTypeError("--seeds count must be positive")
        return list(range(vals[0]))
    return vals


def parse_bins(text: str | None, foi: list[str]) -> dict | None:
    """``0,25,50`` for a single FoI, or ``age=0,25,50;income=0,5e4,1e6``."""
    if not text:
        return None
    if "=" not in text:
        if len(foi) != 1:
            raise ValueError("with several features of interest, give bins as name=edges;name=edges")
        return {foi[0]: _floats(text)}
    out = {}
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        name, _, edges = chunk.partition("=")
        out[name.strip()] = _floats(edges)
    return out


def load_inputs(args) -> tuple[Dataset, DistanceMetric]:
    if args.schema:
        schema = FeatureSchema.from_json(args.schema)
        if args.foi or args.bins:
            foi = args.foi.split(",") if args.foi else schema.foi_names
            feats = [(f.name, f.kind) for f in schema.features]
            bins = parse_bins(args.bins, foi) if args.bins else dict(schema.foi_bins)
            schema = FeatureSchema.build(feats, foi, bins)
    else:
        if not args.foi:
            raise ValueError("give --schema or --foi")
        foi = args.foi.split(",")
        schema = infer_schema(args.data, foi, parse_bins(args.bins, foi))
    d = load_csv(args.data, schema, normalize=not args.no_normalize)
    return d, DistanceMetric(METRICS[args.metric])


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


# --- commands ----------------------------------------------------------------


def cmd_cluster(args) -> int:
    d, m = load_inputs(args)
    res = run_algorithm(d, m, args.algo, args.k, args.beta, args.seed, args.max_iters, args.best_of_k, args.deterministic)
    extra = {"best_of_k": args.best_of_k, "metric": args.metric, "max_iters": args.max_iters, "deterministic": args.deterministic}
    report = build_report(d, m, res, args.min_support, extra)
    out = _out_dir(args)
    _dump(report, out / "report.json")
    write_assignments(d, res.clustering, out / "assignments.csv")
    print(summary_text(report, d, args.min_support))
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _stats(xs) -> dict:
    a = np.asarray(xs, dtype=float)
    return {"mean": float(a.mean()), "min": float(a.min()), "max": float(a.max())}


def cmd_sweep(args) -> int:
    d, m = load_inputs(args)
    betas = sorted(args.betas)
    runs = []
    kc = []
    for seed in args.seeds:
        base = run_algorithm(d, m, "kc", args.k, seed=seed, use_best_of_k=args.best_of_k, deterministic=args.deterministic)
        kc.append(kcenter_objective(d, m, base.clustering))
        for beta in betas:
            r = run_algorithm(d, m, args.algo, args.k, beta, seed, args.max_iters, args.best_of_k)
            runs.append({
                "beta": beta,
                "seed": seed,
                "objective": kcenter_objective(d, m, r.clustering),
                "interpretability": score_clustering(d, r.clustering).clustering_score,
                "converged": r.converged,
                "k_used": len(r.clustering),
                "wall_time": r.wall_time,
            })
            log.info("beta=%.3g seed=%d objective=%.5g", beta, seed, runs[-1]["objective"])

    table = []
    for beta in betas:
        sel = [r for r in runs if r["beta"] == beta]
        row = {"beta": beta, "runs": len(sel), "converged": sum(r["converged"] for r in sel)}
        for key in ("objective", "interpretability"):
            for stat, val in _stats([r[key] for r in sel]).items():
                row[f"{stat}_{key}"] = val
        table.append(row)
    means = [row["mean_objective"] for row in table]
    kc_stats = _stats(kc)
    report = {
        "algorithm": args.algo,
        "parameters": {"k": args.k, "betas": betas, "seeds": args.seeds, "best_of_k": args.best_of_k, "metric": args.metric},
        "table": table,
        "kc_objective": kc_stats,
        "kc_runs": [{"seed": seed, "objective": obj} for seed, obj in zip(args.seeds, kc)],
        "weakly_increasing": bool(all(a <= b for a, b in zip(means, means[1:]))),
        "ratio_to_kc_at_max_beta": means[-1] / kc_stats["mean"] if kc_stats["mean"] > 0 else None,
        "runs": runs,
    }
    out = _out_dir(args)
    _dump(report, out / "report.json")
    with open(out / "tradeoff.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(table[0]))
        w.writeheader()
        w.writerows(table)

    print(f"{'beta':>6} {'mean o_kC':>11} {'min':>9} {'max':>9} {'mean I_F':>9} {'conv':>6}")
    for row in table:
        print(
            f"{row['beta']:>6.2f} {row['mean_objective']:>11.5g} {row['min_objective']:>9.5g} "
            f"{row['max_objective']:>9.5g} {row['mean_interpretability']:>9.4f} {row['converged']:>3}/{row['runs']}"
        )
    print(f"KC mean o_kC {kc_stats['mean']:.5g}; trend weakly increasing: {report['weakly_increasing']}")
    return EXIT_OK if all(r["converged"] for r in runs) else EXIT_NOT_CONVERGED


def cmd_sweep_k(args) -> int:
    d, m = load_inputs(args)
    rows = []
    for algo in args.algos:
        if algo not in ALGOS:
            raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGOS}")
        for k in sorted(args.ks):
            r = run_algorithm(d, m, algo, k, args.beta, args.seed, args.max_iters, args.best_of_k, args.deterministic)
            rows.append({
                "algo": algo,
                "k": k,
                "objective": kcenter_objective(d, m, r.clustering),
                "interpretability": score_clustering(d, r.clustering).clustering_score,
                "converged": r.converged,
                "wall_time": r.wall_time,
            })
    trend = {}
    for algo in args.algos:
        objs = [r["objective"] for r in rows if r["algo"] == algo]
        rises = sum(b > a for a, b in zip(objs, objs[1:]))
        trend[algo] = {"non_increasing": rises == 0, "increases": rises}
    report = {
        "parameters": {"algos": args.algos, "ks": sorted(args.ks), "seed": args.seed, "beta": args.beta, "best_of_k": args.best_of_k, "deterministic": args.deterministic},
        "table": rows,
        "trend": trend,
    }
    out = _out_dir(args)
    _dump(report, out / "report.json")
    with open(out / "tradeoff.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    print(f"{'algo':<8} {'k':>4} {'o_kC':>11} {'I_F':>7}")
    for r in rows:
        print(f"{r['algo']:<8} {r['k']:>4} {r['objective']:>11.5g} {r['interpretability']:>7.4f}")
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_NOT_CONVERGED


def cmd_synth(args) -> int:
    d = synthesize(
        args.n, args.features, args.foi_cardinality,
        foi_mix=args.mix, cluster_structure=args.blobs, seed=args.seed,
        foi_noise=args.noise, continuous_foi=args.continuous_foi,
    )
    out = _out_dir(args)
    to_csv(d, out / "data.csv")
    _dump(d.schema.to_dict(), out / "schema.json")
    print(f"wrote {d.n} rows to {out / 'data.csv'} and the schema to {out / 'schema.json'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="betaclust", description="Interpretability-constrained k-center clustering.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    data = _Parser(add_help=False)
    data.add_argument("--data", required=True, help="CSV file with a header row")
    data.add_argument("--schema", help="JSON schema (features, foi, bins)")
    data.add_argument("--foi", help="feature(s) of interest, comma-separated; kinds are inferred without --schema")
    data.add_argument("--bins", help="bin edges for numeric FoI: 0,25,50 or age=0,25,50;income=0,1e5")
    data.add_argument("--metric", choices=sorted(METRICS), default="all", help="distance over all features or FoI only")
    data.add_argument("--no-normalize", action="store_true", help="skip min-max scaling of numeric features")
    data.add_argument("--min-support", type=float, default=DEFAULT_MIN_SUPPORT)
    data.add_argument("--max-iters", type=int, default=None)
    data.add_argument("--best-of-k", action="store_true", help="keep the best result over k' = 1..k")
    data.add_argument("--deterministic", action="store_true", help="start kc and kcf from the lowest node id")
    data.add_argument("--out", default="out")

    c = sub.add_parser("cluster", parents=[data], help="run one algorithm")
    c.add_argument("--algo", choices=ALGOS, default="beta-ic")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--beta", type=float)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_cluster)

    s = sub.add_parser("sweep", parents=[data], help="beta sweep against plain k-center")
    s.add_argument("--algo", choices=["beta-ic"], default="beta-ic")
    s.add_argument("--betas", type=_floats, default=[0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seeds", type=_seeds, default=[0], help="a count (10 -> 0..9) or a comma list")
    s.set_defaults(func=cmd_sweep)

    sk = sub.add_parser("sweep-k", parents=[data], help="objective against k for several algorithms")
    sk.add_argument("--algos", type=lambda t: [a.strip() for a in t.split(",") if a.strip()], default=["kc"])
    sk.add_argument("--ks", type=_ints, required=True)
    sk.add_argument("--beta", type=float, default=1.0, help="target for beta-ic")
    sk.add_argument("--seed", type=int, default=0)
    sk.set_defaults(func=cmd_sweep_k)

    sy = sub.add_parser("synth", help="write a synthetic dataset and its schema")
    sy.add_argument("--n", type=int, default=500)
    sy.add_argument("--features", type=int, default=2)
    sy.add_argument("--foi-cardinality", type=int, default=4)
    sy.add_argument("--mix", type=_floats, default=None, help="FoI value proportions")
    sy.add_argument("--blobs", type=int, default=5)
    sy.add_argument("--noise", type=float, default=0.3)
    sy.add_argument("--continuous-foi", action="store_true")
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--out", default="data")
    sy.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (BetaClustError, ValueError, OSError, IndexError) as exc:
        print(f"betaclust: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
