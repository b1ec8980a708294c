"""Command-line entry point: ``silencer <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import SilencerError, ValidationError
from .graph import (
    GENERATORS,
    Graph,
    LayerConfig,
    load_edge_list,
    load_labels,
    load_matrix_csv,
    save_edge_list,
    save_labels,
    save_matrix_csv,
)
from .harness import METHODS, ExperimentConfig, MethodConfig, fit_method, run_experiment
from .metrics import evaluate_all, modularity
from .noise import GaParams, NoiseSpec, apply_noise

log = logging.getLogger("silencer")


def read_graph(path) -> Graph:
    """Edge lists (any extension) or dense ``.csv`` matrices."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"{path} not found")
    if path.suffix == ".csv":
        a = load_matrix_csv(path)
        binary = bool(np.all((a == 0) | (a == 1)) and not np.any(np.diag(a)))
        return Graph(a, symmetric=bool(np.array_equal(a, a.T)), binary=binary)
    return load_edge_list(path)


def write_graph(g: Graph, path):
    if str(path).endswith(".csv") or not g.binary:
        save_matrix_csv(g.adjacency, path)
    else:
        save_edge_list(g, path)


def _emit(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_generate(args):
    params = {"n": args.n}
    if args.model == "er":
        params["p_conn"] = args.p_conn
    elif args.model == "ws":
        params.update(k_neighbors=args.k_neighbors, p_rewire=args.p_rewire)
    else:
        params["m_edges"] = args.m_edges
    g = GENERATORS[args.model](seed=args.seed, **params)
    out = args.out or f"{args.model}_{args.n}.edges"
    save_edge_list(g, out)
    log.info("wrote %s (n=%d, edges=%d)", out, g.n, g.num_edges)


def _noise_from_args(args) -> NoiseSpec:
    ga = GaParams(population_size=args.population, generations=args.generations)
    if args.kind == "random":
        return NoiseSpec("random", p=args.p, seed=args.seed)
    if args.kind == "qattack":
        return NoiseSpec("qattack", budget_fraction=args.budget, ga=ga, seed=args.seed)
    base = None
    if args.base == "random":
        base = NoiseSpec("random", p=args.p, seed=args.seed)
    elif args.base == "qattack":
        base = NoiseSpec("qattack", budget_fraction=args.budget, ga=ga, seed=args.seed)
    return NoiseSpec("mixed", base=base, rank=args.rank, seed=args.seed)


def cmd_perturb(args):
    g = read_graph(args.graph)
    noisy, record = apply_noise(g, _noise_from_args(args))
    out = args.out
    if out is None:
        out = Path(args.graph).with_suffix(".csv" if args.kind == "mixed" else ".noisy.edges")
    write_graph(noisy, out)
    record["input_digest"] = g.digest()
    record["output_digest"] = noisy.digest()
    prov = args.provenance or f"{out}.json"
    _emit(record, prov)
    log.info("wrote %s and %s", out, prov)


def cmd_detect(args):
    g = read_graph(args.graph)
    if args.layers:
        layers = LayerConfig.parse(args.layers)
    elif args.k:
        layers = LayerConfig((g.n, args.k))
    else:
        raise ValidationError("give --layers or --k")
    method = MethodConfig(
        args.method,
        lam=args.lam,
        eta=args.eta,
        m=args.m,
        max_inner_iters=args.max_iters,
        pretrain_iters=args.pretrain_iters,
        tol=args.tol,
    )
    if method.name in ("nmf", "silencer-nmf"):
        layers.check(g)
        layers = LayerConfig((g.n, layers.k))
    outcome = fit_method(g, method, layers, args.seed)
    out = args.out or "labels.txt"
    save_labels(outcome.partition, out)
    if args.weights:
        save_matrix_csv(outcome.weights, args.weights)
    if args.report:
        _emit(outcome.report.to_dict(), args.report)
    log.info("wrote %s (%d communities used)", out, len(np.unique(outcome.partition.labels)))


def cmd_evaluate(args):
    pred = np.loadtxt(args.pred, dtype=np.int64, ndmin=2, comments="#")
    n = pred.shape[0]
    part = load_labels(args.pred, n)
    scores = {}
    if args.truth:
        scores.update(evaluate_all(part, load_labels(args.truth, n)))
    if args.graph:
        scores["modularity"] = modularity(read_graph(args.graph), part)
    if not scores:
        raise ValidationError("nothing to evaluate: give --truth and/or --graph")
    _emit(scores, args.out)


def cmd_experiment(args):
    cfg = ExperimentConfig.load(args.config)
    if args.seed_given:
        cfg.base_seed = args.seed
    out = args.out or cfg.output_dir
    table = run_experiment(cfg, threads=args.threads, out_dir=out)
    print(table.format())
    if table.failures:
        log.warning("%d run(s) failed; see results.json", len(table.failures))


def _global_flags(parser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default if suppress else 0, help="random seed")
    parser.add_argument("--out", default=default, help="output path or directory")
    parser.add_argument("--threads", type=int, default=default if suppress else 1, help="worker threads")
    parser.add_argument("-v", "--verbose", action="store_true", default=default if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="silencer", description="Self-paced NMF community detection on noisy graphs")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic graph as an edge list")
    _global_flags(p, suppress=True)
    p.add_argument("model", choices=sorted(GENERATORS))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p-conn", type=float, default=0.1, help="ER connection probability")
    p.add_argument("--k-neighbors", type=int, default=10, help="WS ring degree")
    p.add_argument("--p-rewire", type=float, default=0.5, help="WS rewiring probability")
    p.add_argument("--m-edges", type=int, default=2, help="BA edges per new node")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("perturb", help="apply random, attack or mixed noise")
    _global_flags(p, suppress=True)
    p.add_argument("graph")
    p.add_argument("--kind", choices=["random", "qattack", "mixed"], required=True)
    p.add_argument("--p", type=float, default=0.01, help="flip probability")
    p.add_argument("--budget", type=float, default=0.05, help="attack budget as a fraction of edges")
    p.add_argument("--population", type=int, default=GaParams.population_size)
    p.add_argument("--generations", type=int, default=GaParams.generations)
    p.add_argument("--base", choices=["none", "random", "qattack"], default="none", help="noise applied before mixing")
    p.add_argument("--rank", type=int, default=2, help="rank of the mixing factorization")
    p.add_argument("--provenance", help="JSON provenance path (default: <out>.json)")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("detect", help="run one method and write a labels file")
    _global_flags(p, suppress=True)
    p.add_argument("graph")
    p.add_argument("--method", choices=METHODS, default="silencer-danmf")
    p.add_argument("--layers", help="layer chain such as 34-16-2")
    p.add_argument("--k", type=int, help="community count (shallow layout n-k)")
    p.add_argument("--lam", type=float, default=0.01)
    p.add_argument("--eta", type=float, default=1.1)
    p.add_argument("--m", type=int, default=20, help="outer self-paced rounds")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--pretrain-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--weights", help="write the final pixel weights here (CSV)")
    p.add_argument("--report", help="write loss traces here (JSON)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score a labels file")
    _global_flags(p, suppress=True)
    p.add_argument("pred")
    p.add_argument("--truth")
    p.add_argument("--graph", help="also report modularity on this graph")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run a JSON experiment config")
    _global_flags(p, suppress=True)
    p.add_argument("config")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    raw = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(raw)
    args.seed_given = any(a == "--seed" or a.startswith("--seed=") for a in raw)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except SilencerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ValidationError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
