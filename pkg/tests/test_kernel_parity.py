"""Compiled kernel vs pure-Python kernel: trajectories must agree bit-for-bit."""

import numpy as np
import pytest

from allee_dyn import _backend, maps, noise, rng

pytestmark = pytest.mark.skipif(
    not _backend.compiled_available(), reason="compiled kernel not built")

UNI = noise.uniform()


def _keys(n, seed=99):
    states = [rng.derive(seed, i) for i in range(n)]
    return [(s.key0, s.key1) for s in states]


def _both(monkeypatch, *args, **kwargs):
    monkeypatch.delenv("ALLEE_DYN_FORCE_PY", raising=False)
    compiled = _backend.run_trials(*args, **kwargs)
    monkeypatch.setenv("ALLEE_DYN_FORCE_PY", "1")
    fallback = _backend.run_trials(*args, **kwargs)
    monkeypatch.delenv("ALLEE_DYN_FORCE_PY", raising=False)
    return compiled, fallback


@pytest.mark.parametrize("name,l,x0,lo,hi", [
    ("example-6-1", 0.2, 1.5, 0.3611808, 1.7399889),
    ("example-6-2", 0.01, 0.05, 0.0120988, 0.0946936),
    ("demo-4-4", 0.1, 5.0, 1.5496, 12.1522),
    ("sine", 0.3, 4.7, 3.6, 8.9),
])
def test_threshold_mode_parity(monkeypatch, name, l, x0, lo, hi):
    m = maps.builtin(name)
    args = (m, UNI, l, x0, 20_000, _keys(64), _backend.MODE_THRESHOLD, lo, hi)
    compiled, fallback = _both(monkeypatch, *args)
    for a, b in zip(compiled, fallback):
        assert np.array_equal(a, b)


def test_plain_mode_parity(monkeypatch):
    m = maps.builtin("example-6-1")
    args = (m, UNI, 0.2, 0.1, 5000, _keys(32), _backend.MODE_PLAIN)
    compiled, fallback = _both(monkeypatch, *args)
    for a, b in zip(compiled, fallback):
        assert np.array_equal(a, b)


def test_interval_mode_parity(monkeypatch):
    m = maps.builtin("example-6-2")
    args = (m, UNI, 0.04, 0.01, 50_000, _keys(32), _backend.MODE_INTERVAL,
            0.2, 1.8)
    compiled, fallback = _both(monkeypatch, *args, post_steps=500)
    for a, b in zip(compiled, fallback):
        assert np.array_equal(a, b)


def test_backend_selection(monkeypatch):
    monkeypatch.delenv("ALLEE_DYN_FORCE_PY", raising=False)
    assert _backend.backend_for(maps.builtin("example-6-1"), UNI) == "compiled"
    assert _backend.backend_for(maps.builtin("example-6-1"),
                                noise.triangular()) == "python"
    user = maps.from_script("piece 0 inf x/2")
    assert _backend.backend_for(user, UNI) == "python"
    monkeypatch.setenv("ALLEE_DYN_FORCE_PY", "1")
    assert _backend.backend_for(maps.builtin("example-6-1"), UNI) == "python"
