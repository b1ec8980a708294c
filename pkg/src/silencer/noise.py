"""Edge-noise protocols: random flips, modularity attack, mixed noise."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import ValidationError
from .graph import Graph, Partition


# ---------------------------------------------------------------------------
# random flips


def random_flips(g: Graph, p: float, seed: int):
    """Flip every unordered node pair independently with probability ``p``.

    Each pair draws ``q`` uniform on ``(0, 1]`` and flips iff ``q <= p``, so
    ``p = 0`` never flips and ``p = 1`` always does. Returns the perturbed
    graph and the ``(u, v)`` pairs that changed.
    """
    if not (g.binary and g.symmetric):
        raise ValidationError("random noise needs a binary symmetric graph")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"flip probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(g.n, 1)
    q = 1.0 - rng.random(iu.size)
    flip = q <= p
    a = g.adjacency.copy()
    fi, fj = iu[flip], ju[flip]
    a[fi, fj] = 1.0 - a[fi, fj]
    a[fj, fi] = a[fi, fj]
    return Graph(a), list(zip(fi.tolist(), fj.tolist()))


def perturb_random(g: Graph, p: float, seed: int) -> Graph:
    return random_flips(g, p, seed)[0]


# ---------------------------------------------------------------------------
# greedy modularity


def greedy_modularity(g: Graph) -> tuple[Partition, float]:
    """Greedy agglomerative modularity maximisation; returns ``(partition, Q)``."""
    if not (g.binary and g.symmetric):
        raise ValidationError("greedy modularity needs a binary symmetric graph")
    two_m = int(g.adjacency.sum())
    if two_m == 0:
        raise ValidationError("modularity is undefined on an edgeless graph")
    labels, q_num = kernels.greedy_modularity(g.adjacency)
    return Partition(labels), q_num / float(two_m * two_m)


def greedy_modularity_partition(g: Graph) -> Partition:
    return greedy_modularity(g)[0]


# ---------------------------------------------------------------------------
# modularity attack


@dataclass(frozen=True)
class GaParams:
    population_size: int = 100
    generations: int = 200
    crossover_rate: float = 0.8
    mutation_rate: float = 0.1
    elite_count: int = 2
    tournament_size: int = 2

    def __post_init__(self):
        if self.population_size < 2:
            raise ValidationError("population_size must be >= 2")
        if not 0 <= self.elite_count < self.population_size:
            raise ValidationError("elite_count must be in [0, population_size)")
        if self.generations < 0:
            raise ValidationError("generations must be >= 0")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must be a probability")
        if self.tournament_size < 1:
            raise ValidationError("tournament_size must be >= 1")


@dataclass
class AttackResult:
    graph: Graph
    removed: list
    added: list
    modularity: float
    clean_modularity: float
    history: list = field(default_factory=list)


def attack_budget(num_edges: int, budget_fraction: float) -> int:
    """Rewiring budget, rounded half-up."""
    if not 0.0 < budget_fraction <= 1.0:
        raise ValidationError(f"budget_fraction must lie in (0, 1], got {budget_fraction}")
    return int(math.floor(budget_fraction * num_edges + 0.5))


class _Rewirer:
    def __init__(self, g: Graph, b: int):
        self.base = g.adjacency
        self.edges = np.array(g.edges(), dtype=np.int64).reshape(-1, 2)
        iu, ju = np.triu_indices(g.n, 1)
        missing = g.adjacency[iu, ju] == 0
        self.non_edges = np.stack([iu[missing], ju[missing]], axis=1)
        self.b = b
        self.two_m = int(g.adjacency.sum())
        self.cache: dict = {}

    def apply(self, chrom) -> np.ndarray:
        dels, adds = chrom
        a = self.base.copy()
        e = self.edges[list(dels)]
        a[e[:, 0], e[:, 1]] = a[e[:, 1], e[:, 0]] = 0.0
        e = self.non_edges[list(adds)]
        a[e[:, 0], e[:, 1]] = a[e[:, 1], e[:, 0]] = 1.0
        return a

    def fitness(self, chrom) -> float:
        hit = self.cache.get(chrom)
        if hit is None:
            _, q_num = kernels.greedy_modularity(self.apply(chrom))
            hit = q_num / float(self.two_m * self.two_m)
            self.cache[chrom] = hit
        return hit

    def random_genes(self, rng, pool_size) -> tuple:
        return tuple(sorted(rng.choice(pool_size, self.b, replace=False).tolist()))

    def random_chrom(self, rng) -> tuple:
        return (self.random_genes(rng, len(self.edges)), self.random_genes(rng, len(self.non_edges)))

    def crossover_genes(self, rng, g1, g2) -> tuple:
        # union of both parents then subsample back to the budget: no duplicates
        pool = sorted(set(g1) | set(g2))
        return tuple(sorted(rng.choice(pool, self.b, replace=False).tolist()))

    def mutate_genes(self, rng, genes, pool_size, rate) -> tuple:
        genes = list(genes)
        present = set(genes)
        if pool_size <= len(genes):
            return tuple(sorted(genes))
        for pos in range(len(genes)):
            if rng.random() < rate:
                while True:
                    cand = int(rng.integers(pool_size))
                    if cand not in present:
                        break
                present.discard(genes[pos])
                present.add(cand)
                genes[pos] = cand
        return tuple(sorted(genes))


def run_qattack(g: Graph, budget_fraction: float = 0.05, ga: GaParams = GaParams(), seed: int = 0) -> AttackResult:
    """Genetic search for a rewiring that minimises achievable modularity.

    A chromosome removes exactly ``b`` existing edges and adds exactly ``b``
    non-edges, so the edge count is preserved. Fitness is the modularity of
    :func:`greedy_modularity` on the rewired graph (lower is better).
    """
    if not (g.binary and g.symmetric):
        raise ValidationError("the attack needs a binary symmetric graph")
    m = g.num_edges
    b = attack_budget(m, budget_fraction)
    if b < 1:
        raise ValidationError(f"attack budget round({budget_fraction} * {m}) is zero")
    rw = _Rewirer(g, b)
    if len(rw.non_edges) < b:
        raise ValidationError(f"only {len(rw.non_edges)} non-edges available for {b} additions")
    rng = np.random.default_rng(seed)
    _, clean_q = greedy_modularity(g)

    pop = [rw.random_chrom(rng) for _ in range(ga.population_size)]
    best, best_fit = None, math.inf
    history = []
    for gen in range(ga.generations + 1):
        # sort key includes the chromosome itself so ties order deterministically
        scored = sorted(((rw.fitness(c), c) for c in pop))
        if scored[0][0] < best_fit:
            best_fit, best = scored[0]
        history.append(best_fit)
        if gen == ga.generations:
            break

        def pick():
            idx = rng.integers(len(scored), size=ga.tournament_size)
            return scored[int(idx.min())][1]

        nxt = [c for _, c in scored[: ga.elite_count]]
        while len(nxt) < ga.population_size:
            p1, p2 = pick(), pick()
            if rng.random() < ga.crossover_rate:
                child = (rw.crossover_genes(rng, p1[0], p2[0]), rw.crossover_genes(rng, p1[1], p2[1]))
            else:
                child = p1
            child = (
                rw.mutate_genes(rng, child[0], len(rw.edges), ga.mutation_rate),
                rw.mutate_genes(rng, child[1], len(rw.non_edges), ga.mutation_rate),
            )
            nxt.append(child)
        pop = nxt

    removed = [tuple(map(int, rw.edges[i])) for i in best[0]]
    added = [tuple(map(int, rw.non_edges[i])) for i in best[1]]
    return AttackResult(Graph(rw.apply(best)), removed, added, best_fit, clean_q, history)


def qattack(g: Graph, budget_fraction: float = 0.05, ga: GaParams = GaParams(), seed: int = 0) -> Graph:
    return run_qattack(g, budget_fraction, ga, seed).graph


# ---------------------------------------------------------------------------
# noise specs and mixed noise


@dataclass(frozen=True)
class NoiseSpec:
    """``kind`` is one of ``none``, ``random``, ``qattack``, ``mixed``."""

    kind: str = "none"
    p: float = 0.0
    budget_fraction: float = 0.05
    ga: GaParams = GaParams()
    base: Optional["NoiseSpec"] = None
    rank: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "random", "qattack", "mixed"):
            raise ValidationError(f"unknown noise kind {self.kind!r}")
        if self.kind == "random" and not 0.0 <= self.p <= 1.0:
            raise ValidationError("p must lie in [0, 1]")
        if self.kind == "qattack" and not 0.0 < self.budget_fraction <= 1.0:
            raise ValidationError("budget_fraction must lie in (0, 1]")
        if self.kind == "mixed":
            if self.rank < 1:
                raise ValidationError("rank must be >= 1")
            if self.base is not None and self.base.kind == "mixed":
                raise ValidationError("mixed noise cannot be nested")

    def with_seed(self, seed: int) -> "NoiseSpec":
        base = self.base.with_seed(seed) if self.base is not None else None
        return NoiseSpec(self.kind, self.p, self.budget_fraction, self.ga, base, self.rank, seed)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "seed": self.seed}
        if self.kind == "random":
            d["p"] = self.p
        elif self.kind == "qattack":
            d["budget_fraction"] = self.budget_fraction
            d["ga"] = vars(self.ga).copy()
        elif self.kind == "mixed":
            d["rank"] = self.rank
            d["base"] = None if self.base is None else self.base.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "NoiseSpec":
        if not d:
            return cls()
        d = dict(d)
        if "ga" in d:
            d["ga"] = GaParams(**d["ga"])
        if d.get("base") is not None:
            d["base"] = cls.from_dict(d["base"])
        unknown = set(d) - {"kind", "p", "budget_fraction", "ga", "base", "rank", "seed"}
        if unknown:
            raise ValidationError(f"unknown noise fields: {sorted(unknown)}")
        return cls(**d)


def apply_noise(g: Graph, spec: NoiseSpec) -> tuple[Graph, dict]:
    """Apply ``spec`` to ``g``; returns the noisy graph and a provenance record."""
    record: dict = {"spec": spec.to_dict()}
    if spec.kind == "none":
        return g, record
    if spec.kind == "random":
        out, flipped = random_flips(g, spec.p, spec.seed)
        record["flipped"] = [list(e) for e in flipped]
        return out, record
    if spec.kind == "qattack":
        res = run_qattack(g, spec.budget_fraction, spec.ga, spec.seed)
        record.update(
            removed=[list(e) for e in res.removed],
            added=[list(e) for e in res.added],
            clean_modularity=res.clean_modularity,
            attacked_modularity=res.modularity,
        )
        return res.graph, record
    base_graph = g
    if spec.base is not None and spec.base.kind != "none":
        base_graph, base_record = apply_noise(g, spec.base)
        record["base"] = base_record
    record["rank"] = spec.rank
    return mixed_from(base_graph, spec.rank, spec.seed), record


def mixed_from(g: Graph, rank: int, seed: int, max_iters: int = 500) -> Graph:
    """Replace the adjacency by the plain NMF reconstruction ``U V``."""
    from .factorization import SolverOptions, nmf_fit

    if not 1 <= rank <= g.n:
        raise ValidationError(f"rank must lie in [1, n={g.n}]")
    opts = SolverOptions(lam=0.0, max_inner_iters=max_iters, tol=1e-6, seed=seed)
    pair, _ = nmf_fit(g, rank, opts)
    return Graph(pair.U @ pair.V, symmetric=False, binary=False)


def perturb_mixed(g: Graph, base: Optional[NoiseSpec], rank: int, seed: int) -> Graph:
    spec = NoiseSpec("mixed", base=base, rank=rank, seed=seed)
    return apply_noise(g, spec.with_seed(seed) if base is None else spec)[0]
