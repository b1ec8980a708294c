"""Config-driven experiment pipeline: load, perturb, fit, score, persist."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.stats import mannwhitneyu

from . import datasets
from .errors import NumericalError, ValidationError
from .factorization import (
    SolverOptions,
    assign_communities,
    reconstruction_errors,
    silencer_danmf_fit,
    silencer_nmf_fit,
)
from .graph import GENERATORS, Graph, LayerConfig, Partition, load_edge_list, load_labels, save_edge_list, save_matrix_csv
from .metrics import evaluate_all, modularity
from .noise import NoiseSpec, apply_noise, greedy_modularity
from .selfpace import PaceSchedule

log = logging.getLogger(__name__)

METHODS = ("nmf", "dnmf", "danmf", "silencer-nmf", "silencer-danmf")


@dataclass(frozen=True)
class MethodConfig:
    name: str
    layers: Optional[str] = None
    lam: float = 0.01
    eta: float = 1.1
    m: int = 20
    gamma0: Optional[float] = None
    max_inner_iters: int = 100
    pretrain_iters: int = 100
    tol: float = 1e-6

    def __post_init__(self):
        if self.name not in METHODS:
            raise ValidationError(f"unknown method {self.name!r}; choose from {', '.join(METHODS)}")
        if self.m < 1:
            raise ValidationError("m must be >= 1")

    @property
    def self_paced(self) -> bool:
        return self.name.startswith("silencer-")

    def schedule(self) -> PaceSchedule:
        if not self.self_paced:
            return PaceSchedule.disabled()
        return PaceSchedule(gamma0=self.gamma0, eta=self.eta, outer_iters=self.m)

    def options(self, seed: int) -> SolverOptions:
        return SolverOptions(
            lam=self.lam,
            max_inner_iters=self.max_inner_iters,
            pretrain_iters=self.pretrain_iters,
            tol=self.tol,
            seed=seed,
        )


@dataclass
class FitOutcome:
    partition: Partition
    factors: object
    weights: np.ndarray
    report: object


def fit_method(g: Graph, method: MethodConfig, layers: LayerConfig, seed: int) -> FitOutcome:
    """Run one named method on ``g`` and return labels plus raw solver output."""
    opts = method.options(seed)
    sched = method.schedule()
    if method.name in ("nmf", "silencer-nmf"):
        pair, W, report = silencer_nmf_fit(g, layers.k, sched, opts)
        return FitOutcome(assign_communities(pair), pair, W, report)
    encoder = method.name != "dnmf"
    stack, W, report = silencer_danmf_fit(g, layers, sched, opts, encoder=encoder)
    return FitOutcome(assign_communities(stack), stack, W, report)


# ---------------------------------------------------------------------------
# config


@dataclass
class ExperimentConfig:
    """JSON-backed experiment description.

    ``dataset`` is one of::

        {"name": "karate"}                              # registry (SILENCER_DATA for external files)
        {"edges": "g.edges", "labels": "g.labels"}      # labels optional
        {"generator": "er", "params": {"n": 1000, "p_conn": 0.1}, "seed": 0}
    """

    dataset: dict
    methods: list
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    repetitions: int = 10
    base_seed: int = 0
    output_dir: str = "runs/experiment"
    dump_weights: bool = False
    freeze_noise: bool = False
    dump_graphs: bool = True

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")
        if not self.methods:
            raise ValidationError("at least one method is required")
        self.methods = [m if isinstance(m, MethodConfig) else MethodConfig(**m) for m in self.methods]
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ValidationError(f"method names must be unique: {names}")
        if not isinstance(self.noise, NoiseSpec):
            self.noise = NoiseSpec.from_dict(self.noise)
        keys = set(self.dataset)
        if not (keys & {"name", "edges", "generator"}):
            raise ValidationError("dataset needs one of 'name', 'edges' or 'generator'")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ValidationError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise"] = self.noise.to_dict()
        d["methods"] = [asdict(m) for m in self.methods]
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def resolve_dataset(spec: dict, base_seed: int = 0) -> tuple[Graph, Optional[Partition], Optional[str]]:
    """Return ``(graph, labels or None, registry name or None)``."""
    if "name" in spec:
        g, truth = datasets.load(spec["name"], spec.get("directory"))
        return g, truth, spec["name"].lower()
    if "edges" in spec:
        g = load_edge_list(spec["edges"], n_hint=spec.get("n"), self_loops=spec.get("self_loops", "error"))
        truth = load_labels(spec["labels"], g.n) if spec.get("labels") else None
        return g, truth, None
    gen = GENERATORS.get(spec["generator"])
    if gen is None:
        raise ValidationError(f"unknown generator {spec['generator']!r}; choose from {sorted(GENERATORS)}")
    params = dict(spec.get("params", {}))
    try:
        g = gen(seed=spec.get("seed", base_seed), **params)
    except TypeError as exc:
        raise ValidationError(f"bad generator parameters: {exc}") from exc
    return g, None, None


def auto_layers(g: Graph, hidden=(256, 64)) -> LayerConfig:
    """``n-256-64-k`` with ``k`` taken from greedy modularity on ``g``.

    Hidden sizes that would not sit strictly between ``n`` and ``k`` are
    dropped.
    """
    k = greedy_modularity(g)[0].k
    sizes = [g.n] + [h for h in hidden if k < h < g.n] + [k]
    return LayerConfig(tuple(sizes))


def _layers_for(method: MethodConfig, g: Graph, registry_name: Optional[str]) -> LayerConfig:
    if method.layers not in (None, "auto"):
        layers = LayerConfig.parse(method.layers)
    elif registry_name in datasets.REGISTRY:
        layers = datasets.default_layers(registry_name)
    elif method.layers == "auto":
        layers = auto_layers(g)
    else:
        raise ValidationError(f"method {method.name!r} needs explicit layers (or \"auto\") for this dataset")
    layers.check(g)
    if method.name in ("nmf", "silencer-nmf"):
        # shallow solvers only use r_0 and k
        layers = LayerConfig((layers.sizes[0], layers.k))
    return layers


# ---------------------------------------------------------------------------
# statistics


def ranksum_test(a, b) -> float:
    """Two-sided Mann-Whitney p-value (normal approximation, tie-corrected)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValidationError("ranksum_test needs two non-empty samples")
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return 1.0
    return float(mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=False).pvalue)


def improvement_ratio(silencer_q: float, baseline_q: float) -> float:
    if baseline_q == 0:
        raise ValidationError("improvement ratio is undefined for a zero baseline")
    return (silencer_q - baseline_q) / baseline_q


def summarize(values) -> dict:
    """Mean and population std over the non-missing entries of ``values``."""
    ok = [v for v in values if v is not None]
    if not ok:
        return {"mean": None, "std": None, "values": list(values)}
    arr = np.asarray(ok, dtype=float)
    return {"mean": float(arr.mean()), "std": float(arr.std()), "values": list(values)}


# ---------------------------------------------------------------------------
# results


@dataclass
class ResultsTable:
    config: dict
    config_hash: str
    reps: list
    methods: dict
    failures: list

    def metric(self, method: str, name: str) -> dict:
        return self.methods[method]["metrics"][name]

    def values(self, method: str, name: str) -> list:
        return [v for v in self.metric(method, name)["values"] if v is not None]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "config_hash": self.config_hash,
            "reps": self.reps,
            "methods": self.methods,
            "failures": self.failures,
        }

    def rows(self):
        for method, block in self.methods.items():
            for name, agg in block["metrics"].items():
                yield method, name, agg

    def format(self) -> str:
        lines = []
        for method, name, agg in self.rows():
            if agg["mean"] is None:
                lines.append(f"{method:16s} {name:12s} failed")
            else:
                lines.append(f"{method:16s} {name:12s} {agg['mean']:.3f}±{agg['std']:.3f}")
        return "\n".join(lines)

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "results.json", "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(out / "results.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["method", "metric", "mean", "std", "runs", "failed"])
            for method, name, agg in self.rows():
                n_ok = sum(v is not None for v in agg["values"])
                mean = "" if agg["mean"] is None else repr(agg["mean"])
                std = "" if agg["std"] is None else repr(agg["std"])
                w.writerow([method, name, mean, std, n_ok, len(agg["values"]) - n_ok])

    @classmethod
    def read(cls, path) -> "ResultsTable":
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        return cls(d["config"], d["config_hash"], d["reps"], d["methods"], d["failures"])


def _score(outcome: FitOutcome, clean: Graph, noisy: Graph, truth: Optional[Partition]) -> dict:
    scores = evaluate_all(outcome.partition, truth) if truth is not None else {}
    # community quality is judged against the unperturbed topology
    scores["modularity"] = modularity(clean, outcome.partition)
    dec, enc = reconstruction_errors(noisy, outcome.factors)
    scores["decoder_err"] = dec
    scores["encoder_err"] = enc
    return scores


def _run_one(job):
    rep, seed, method, layers, clean, noisy, truth = job
    t0 = time.perf_counter()
    try:
        outcome = fit_method(noisy, method, layers, seed)
        scores = _score(outcome, clean, noisy, truth)
    except NumericalError as exc:
        log.warning("rep %d %s failed: %s", rep, method.name, exc)
        return {"status": "failed", "error": str(exc)}, None, time.perf_counter() - t0
    run = {
        "status": "ok",
        "scores": scores,
        "labels_digest": hashlib.sha256(outcome.partition.labels.tobytes()).hexdigest(),
        "report": outcome.report.to_dict(),
    }
    return run, outcome, time.perf_counter() - t0


def run_experiment(cfg: ExperimentConfig, threads: int = 1, out_dir=None) -> ResultsTable:
    """Run every method on every repetition and persist the aggregated table.

    Rep ``r`` uses seed ``base_seed + r`` for its noise draw (or ``base_seed``
    when ``freeze_noise`` is set) and for solver initialisation; all methods
    in a rep therefore see the same perturbed graph and the same start.
    """
    out = Path(out_dir or cfg.output_dir)
    clean, truth, registry_name = resolve_dataset(cfg.dataset, cfg.base_seed)
    layer_map = {m.name: _layers_for(m, clean, registry_name) for m in cfg.methods}
    metric_names = (["nmi", "ari", "f1"] if truth is not None else []) + ["modularity", "decoder_err", "encoder_err"]

    reps, noisy_graphs = [], []
    for r in range(cfg.repetitions):
        seed = cfg.base_seed + r
        noise_seed = cfg.base_seed if cfg.freeze_noise else seed
        noisy, record = apply_noise(clean, cfg.noise.with_seed(noise_seed))
        noisy_graphs.append(noisy)
        summary = {"rep": r, "seed": seed, "noise_seed": noise_seed, "graph_digest": noisy.digest()}
        for key in ("flipped", "removed", "added"):
            if key in record:
                summary[f"num_{key}"] = len(record[key])
        reps.append(summary)
        if cfg.dump_graphs and cfg.noise.kind != "none":
            out.mkdir(parents=True, exist_ok=True)
            if noisy.binary:
                save_edge_list(noisy, out / f"perturbed_{r}.edges")
            else:
                save_matrix_csv(noisy.adjacency, out / f"perturbed_{r}.csv")

    jobs = [
        (r, reps[r]["seed"], m, layer_map[m.name], clean, noisy_graphs[r], truth)
        for r in range(cfg.repetitions)
        for m in cfg.methods
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = list(pool.map(_run_one, jobs))
    else:
        done = [_run_one(j) for j in jobs]

    per_method = {m.name: [] for m in cfg.methods}
    timings = {m.name: [] for m in cfg.methods}
    failures = []
    for job, (run, outcome, secs) in zip(jobs, done):
        r, _, method = job[0], job[1], job[2]
        run["rep"] = r
        run["graph_digest"] = reps[r]["graph_digest"]
        per_method[method.name].append(run)
        timings[method.name].append(secs)
        if run["status"] != "ok":
            failures.append({"rep": r, "method": method.name, "error": run["error"]})
        elif cfg.dump_weights:
            out.mkdir(parents=True, exist_ok=True)
            save_matrix_csv(outcome.weights, out / f"weights_{method.name}_{r}.csv")

    methods = {}
    for m in cfg.methods:
        runs = per_method[m.name]
        metrics = {}
        for name in metric_names:
            vals = [run["scores"][name] if run["status"] == "ok" else None for run in runs]
            metrics[name] = summarize(vals)
        methods[m.name] = {"layers": list(layer_map[m.name].sizes), "metrics": metrics, "runs": runs}

    table = ResultsTable(cfg.to_dict(), cfg.digest(), reps, methods, failures)
    table.write(out)
    # wall-clock lives apart from results.json so reruns compare byte-for-byte
    with open(out / "timings.json", "w", encoding="utf-8") as fh:
        json.dump({"seconds": timings, "total": math.fsum(sum(timings.values(), []))}, fh, indent=2)
    return table
