import os
import random
import subprocess
import sys

import numpy as np
import pytest

from geoknap import _kernels
from geoknap.exact import ExactConfig, optimal_pack, rainbow_feasible
from geoknap.geom import Item

needs_numba = pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not installed")


def both_paths(monkeypatch, fn):
    out = []
    for flag in (True, False):
        monkeypatch.setattr(_kernels, "USE_NUMBA", flag)
        out.append(fn())
    return out


@needs_numba
def test_fit_positions_paths_agree(monkeypatch):
    rng = np.random.default_rng(3)
    for _ in range(30):
        free = (rng.random((rng.integers(1, 12), rng.integers(1, 12))) < 0.7).astype(np.uint8)
        w, h = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        fast, slow = both_paths(monkeypatch, lambda: _kernels.fit_positions(free, w, h))
        assert fast.shape == slow.shape and (fast == slow).all()


@needs_numba
def test_exact_paths_agree(monkeypatch):
    rng = random.Random(5)
    for _ in range(40):
        side = rng.randint(3, 9)
        items = [Item(i, rng.randint(1, side), rng.randint(1, side), rng.randint(1, 9)) for i in range(rng.randint(1, 6))]
        cfg = ExactConfig(allow_rotation=rng.random() < 0.5)
        fast, slow = both_paths(monkeypatch, lambda: optimal_pack(items, side, cfg))
        assert fast == slow


@needs_numba
def test_rainbow_paths_agree(monkeypatch):
    rng = random.Random(9)
    for _ in range(40):
        region = np.random.default_rng(rng.randint(0, 999)).random((6, 6)) < 0.8
        items = [Item(i, rng.randint(1, 4), rng.randint(1, 3)) for i in range(rng.randint(1, 6))]
        colors = {it.id: rng.randint(1, 3) for it in items}
        fast, slow = both_paths(monkeypatch, lambda: rainbow_feasible(items, colors, region, 3))
        assert fast == slow


def test_env_flag_selects_fallback():
    code = "from geoknap import _kernels; print(_kernels.USE_NUMBA)"
    env = dict(os.environ, GEOKNAP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
