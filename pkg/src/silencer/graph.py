"""Graph container, edge-list/label I/O, Laplacian and synthetic generators."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

from .errors import ParseError, ValidationError


@dataclass(frozen=True, eq=False)
class Graph:
    """Dense adjacency matrix with structural flags.

    The adjacency array is made read-only on construction so a graph can be
    shared between solvers and threads without copying.
    """

    adjacency: np.ndarray
    symmetric: bool = True
    binary: bool = True

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=np.float64, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValidationError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise ValidationError("adjacency entries must be finite and nonnegative")
        if self.symmetric and not np.array_equal(a, a.T):
            raise ValidationError("graph flagged symmetric but adjacency != adjacency.T")
        if self.binary:
            if not np.all((a == 0) | (a == 1)):
                raise ValidationError("graph flagged binary but has entries other than 0/1")
            if np.any(np.diag(a) != 0):
                raise ValidationError("binary graphs must not contain self-loops")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        """Undirected edge count (upper triangle) for binary symmetric graphs."""
        if not (self.binary and self.symmetric):
            raise ValidationError("edge count is defined for binary symmetric graphs only")
        return int(np.triu(self.adjacency, 1).sum())

    def edges(self) -> list[tuple[int, int]]:
        """Sorted unique ``(u, v)`` pairs with ``u < v``."""
        iu, ju = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def digest(self) -> str:
        """SHA-256 of the adjacency bytes; used to prove methods saw the same input."""
        h = hashlib.sha256()
        h.update(np.asarray(self.adjacency.shape, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.adjacency).tobytes())
        return h.hexdigest()

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        a = np.zeros((n, n))
        for u, v in edges:
            if u == v:
                raise ValidationError(f"self-loop on node {u}")
            a[u, v] = a[v, u] = 1.0
        return cls(a)

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        nodes = sorted(g.nodes())
        if nodes != list(range(len(nodes))):
            raise ValidationError("networkx graph nodes must be 0..n-1")
        return cls.from_edges(len(nodes), g.edges())


@dataclass(frozen=True, eq=False)
class Partition:
    labels: np.ndarray
    k: int = field(default=-1)

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 1 or lab.size == 0:
            raise ValidationError("labels must be a non-empty 1-D vector")
        if not np.issubdtype(lab.dtype, np.integer):
            if not np.all(np.equal(np.mod(lab, 1), 0)):
                raise ValidationError("labels must be integers")
        lab = lab.astype(np.int64)
        k = int(lab.max()) + 1 if self.k < 0 else int(self.k)
        if lab.min() < 0 or lab.max() >= k:
            raise ValidationError(f"labels must lie in [0, {k})")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "k", k)

    def __len__(self):
        return self.labels.size

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Densely re-index arbitrary labels in order of first appearance."""
        mapping: dict = {}
        dense = [mapping.setdefault(x, len(mapping)) for x in np.asarray(labels).tolist()]
        return cls(np.asarray(dense, dtype=np.int64), len(mapping))


@dataclass(frozen=True)
class LayerConfig:
    """Layer-size chain ``r_0 >= r_1 >= ... >= r_p`` (``r_0 = n``, ``r_p = k``)."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) < 2:
            raise ValidationError("a layer configuration needs at least two sizes")
        if any(s <= 0 for s in sizes):
            raise ValidationError("layer sizes must be positive")
        if any(a < b for a, b in zip(sizes, sizes[1:])):
            raise ValidationError(f"layer sizes must be non-increasing: {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def depth(self) -> int:
        return len(self.sizes) - 1

    @property
    def k(self) -> int:
        return self.sizes[-1]

    def check(self, g: Graph):
        if self.sizes[0] != g.n:
            raise ValidationError(f"layer config starts at {self.sizes[0]} but graph has n={g.n}")

    @classmethod
    def parse(cls, text: str) -> "LayerConfig":
        """Parse ``"34-16-2"`` style strings."""
        try:
            return cls(tuple(int(x) for x in text.split("-")))
        except ValueError as exc:
            raise ValidationError(f"bad layer spec {text!r}") from exc


# ---------------------------------------------------------------------------
# I/O


def _iter_pairs(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected two fields, got {len(parts)}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-integer field in {line!r}") from None
            if a < 0 or b < 0:
                raise ParseError(f"{path}:{lineno}: negative node id")
            yield lineno, a, b


def load_edge_list(
    path, n_hint: int | None = None, remap: bool = False, id_map_path=None, self_loops: str = "error"
) -> Graph:
    """Read a whitespace-separated undirected edge list.

    Node ids are taken as 0-based dense ids. With ``remap=True`` arbitrary ids
    are mapped to ``0..n-1`` in sorted order and, if ``id_map_path`` is given,
    the mapping is written there as ``original_id dense_id`` lines.
    ``self_loops="drop"`` skips ``u u`` lines instead of rejecting the file.
    """
    pairs = list(_iter_pairs(path))
    if self_loops == "drop":
        pairs = [(ln, a, b) for ln, a, b in pairs if a != b]
    for lineno, a, b in pairs:
        if a == b:
            raise ValidationError(f"{path}:{lineno}: self-loop on node {a}")
    if remap:
        ids = sorted({x for _, a, b in pairs for x in (a, b)})
        index = {orig: i for i, orig in enumerate(ids)}
        if id_map_path is not None:
            save_id_map(id_map_path, index)
        pairs = [(ln, index[a], index[b]) for ln, a, b in pairs]
    n = max((max(a, b) for _, a, b in pairs), default=-1) + 1
    if n_hint is not None:
        n = max(n, int(n_hint))
    if n == 0:
        raise ValidationError(f"{path}: no edges and no node count given")
    return Graph.from_edges(n, ((a, b) for _, a, b in pairs))


def save_edge_list(g: Graph, path):
    if not g.binary:
        raise ValidationError("only binary graphs can be written as edge lists")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def save_id_map(path, index: dict):
    with open(path, "w", encoding="utf-8") as fh:
        for orig, dense in sorted(index.items(), key=lambda kv: kv[1]):
            fh.write(f"{orig} {dense}\n")


def load_labels(path, n: int) -> Partition:
    labels: dict[int, int] = {}
    for lineno, node, lab in _iter_pairs(path):
        if node >= n:
            raise ValidationError(f"{path}:{lineno}: node {node} out of range for n={n}")
        if node in labels:
            raise ValidationError(f"{path}:{lineno}: duplicate node {node}")
        labels[node] = lab
    missing = [i for i in range(n) if i not in labels]
    if missing:
        raise ValidationError(f"{path}: missing labels for {len(missing)} node(s), first {missing[0]}")
    # dense ids follow sorted original label ids
    order = {lab: i for i, lab in enumerate(sorted(set(labels.values())))}
    return Partition(np.array([order[labels[i]] for i in range(n)], dtype=np.int64), len(order))


def save_labels(part: Partition, path):
    with open(path, "w", encoding="utf-8") as fh:
        for i, lab in enumerate(part.labels.tolist()):
            fh.write(f"{i} {lab}\n")


def save_matrix_csv(m: np.ndarray, path):
    np.savetxt(path, np.asarray(m), delimiter=",", fmt="%.17g")


def load_matrix_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=","))


# ---------------------------------------------------------------------------


def laplacian(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(D, L)`` with ``D = diag(row sums of A)`` and ``L = D - A``."""
    a = g.adjacency
    d = np.diag(a.sum(axis=1))
    return d, d - a


def generate_er(n: int, p_conn: float, seed: int) -> Graph:
    if n < 1 or not 0.0 <= p_conn <= 1.0:
        raise ValidationError(f"invalid ER parameters n={n}, p={p_conn}")
    return Graph.from_networkx(nx.fast_gnp_random_graph(n, p_conn, seed=seed))


def generate_ws(n: int, k_neighbors: int = 10, p_rewire: float = 0.5, seed: int = 0) -> Graph:
    if k_neighbors % 2 or not 0 < k_neighbors < n or not 0.0 <= p_rewire <= 1.0:
        raise ValidationError(f"invalid WS parameters n={n}, k={k_neighbors}, p={p_rewire}")
    return Graph.from_networkx(nx.watts_strogatz_graph(n, k_neighbors, p_rewire, seed=seed))


def generate_ba(n: int, m_edges: int = 2, seed: int = 0) -> Graph:
    """Preferential attachment grown from a star on ``m_edges + 1`` nodes."""
    if not 1 <= m_edges < n:
        raise ValidationError(f"invalid BA parameters n={n}, m={m_edges}")
    return Graph.from_networkx(nx.barabasi_albert_graph(n, m_edges, seed=seed))


GENERATORS = {"er": generate_er, "ws": generate_ws, "ba": generate_ba}
