import importlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from silencer import _pykernels, kernels
from silencer.graph import generate_ba, generate_er, generate_ws

try:
    from silencer import _ckernels
except ImportError:  # pragma: no cover - extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


@needs_ext
@pytest.mark.parametrize(
    "g",
    [generate_er(60, 0.1, 1), generate_ws(60, 4, 0.3, 2), generate_ba(60, 2, 3), generate_er(25, 0.3, 4)],
    ids=["er", "ws", "ba", "dense"],
)
def test_greedy_backends_identical(g):
    la, qa = _pykernels.greedy_modularity(g.adjacency)
    lb, qb = _ckernels.greedy_modularity(g.adjacency)
    assert qa == qb
    assert np.array_equal(la, lb)


@needs_ext
@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 5.0))
def test_soft_weight_backends_identical(seed, gamma):
    losses = np.random.default_rng(seed).random((7, 9)) * 4
    losses[0, 0] = 0.0
    a = _pykernels.soft_weight_matrix(losses, gamma)
    b = np.asarray(_ckernels.soft_weight_matrix(losses, gamma))
    assert np.array_equal(a, b)


def test_backend_env_override(monkeypatch):
    monkeypatch.setenv("SILENCER_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
        assert mod.greedy_modularity is _pykernels.greedy_modularity
    finally:
        monkeypatch.delenv("SILENCER_PURE_PYTHON")
        importlib.reload(kernels)
