"""Benchmark network registry.

Karate ships with the package. The other networks are not redistributable
here; place ``<name>.edges`` and ``<name>.labels`` (0-based ids) in a
directory and point ``SILENCER_DATA`` (or ``data_dir=``) at it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path
from typing import Optional

from .errors import ValidationError
from .graph import Graph, LayerConfig, Partition, load_edge_list, load_labels


@dataclass(frozen=True)
class DatasetInfo:
    name: str
    nodes: int
    edges: int
    classes: int
    layers: str
    noise: str


# node/class counts and layer chains as used for the benchmark tables
REGISTRY = {
    "email": DatasetInfo("email", 1005, 25571, 42, "1005-256-128-42", "random"),
    "cora": DatasetInfo("cora", 2708, 5429, 7, "2708-256-64-7", "random"),
    "karate": DatasetInfo("karate", 34, 78, 2, "34-16-2", "qattack"),
    "football": DatasetInfo("football", 115, 613, 12, "115-64-12", "qattack"),
    "polbooks": DatasetInfo("polbooks", 105, 441, 3, "105-64-32-3", "qattack"),
}

BUNDLED = {"karate"}


def data_dir(override=None) -> Optional[Path]:
    d = override or os.environ.get("SILENCER_DATA")
    return Path(d) if d else None


def dataset_paths(name: str, directory=None) -> tuple[Path, Path]:
    name = name.lower()
    if name in BUNDLED and directory is None:
        root = files("silencer") / "data"
        return Path(str(root / f"{name}.edges")), Path(str(root / f"{name}.labels"))
    d = data_dir(directory)
    if d is None:
        if name in BUNDLED:
            return dataset_paths(name, None)
        raise ValidationError(f"dataset {name!r} is not bundled; set SILENCER_DATA to a directory holding {name}.edges")
    edges, labels = d / f"{name}.edges", d / f"{name}.labels"
    if not edges.exists():
        if name in BUNDLED:
            return dataset_paths(name, None)
        raise ValidationError(f"{edges} not found")
    return edges, labels


def available(name: str, directory=None) -> bool:
    try:
        e, lab = dataset_paths(name, directory)
    except ValidationError:
        return False
    return e.exists() and lab.exists()


def load(name: str, directory=None) -> tuple[Graph, Partition]:
    """Load a registered network with its ground-truth communities.

    Self-loops are dropped for the externally supplied files, since several
    public releases (Email in particular) contain them.
    """
    edges, labels = dataset_paths(name, directory)
    info = REGISTRY.get(name.lower())
    g = load_edge_list(edges, n_hint=info.nodes if info else None, self_loops="drop")
    return g, load_labels(labels, g.n)


def default_layers(name: str) -> LayerConfig:
    return LayerConfig.parse(REGISTRY[name.lower()].layers)
