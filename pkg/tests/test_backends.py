import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapslab import _backend, engine
from gapslab.parallel import ordered_fsum, ordered_map

compiled = pytest.mark.skipif("compiled" not in _backend.available(),
                              reason="compiled backend not built")


def _both():
    return _backend.get("compiled"), _backend.get("python")


def test_selection_reports_backend():
    assert _backend.BACKEND in ("compiled", "python")
    assert "python" in _backend.available()
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_pure_env_forces_fallback():
    env = dict(os.environ, GAPSLAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import gapslab; print(gapslab.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@compiled
@settings(max_examples=30)
@given(st.integers(0, 2**36), st.integers(1, 70000))
def test_sieve_kernels_agree(base, length):
    c, p = _both()
    ps = engine._sieving_primes(base + length)
    assert np.array_equal(c.sieve_flags(base, length, ps), p.sieve_flags(base, length, ps))
    assert np.array_equal(c.spf_table(base, length, ps), p.spf_table(base, length, ps))


@compiled
@given(st.integers(1, 50000), st.integers(0, 40))
def test_count_kernels_agree(N, H):
    c, p = _both()
    tab = engine.small_table(2 * N + H + 64)
    assert c.count_pairs_window(tab.pi, N, 2 * N, H) == p.count_pairs_window(tab.pi, N, 2 * N, H)
    i0, i1 = int(tab.pi[N]), int(tab.pi[2 * N])
    assert c.gaps_le_count(tab.primes, i0, i1, H) == p.gaps_le_count(tab.primes, i0, i1, H)


@compiled
@settings(max_examples=30)
@given(st.integers(1, 10**9), st.sets(st.integers(0, 30), min_size=1, max_size=4).map(sorted),
       st.floats(2.0, 5000.0), st.integers(1, 6))
def test_lambda_kernels_agree(n0, H, R, power):
    c, p = _both()
    offs = np.array(H, dtype=np.int64)
    ps = engine.base_primes(int(R))
    a, ma = c.lambda_block(n0, 3000, offs, R, power, ps)
    b, mb = p.lambda_block(n0, 3000, offs, R, power, ps)
    # both backends add the same terms in the same order
    assert np.array_equal(ma, mb)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("workers", [1, 2, 5])
def test_ordered_map_keeps_order(workers):
    items = list(range(50))
    assert list(ordered_map(lambda i: i * i, items, workers)) == [i * i for i in items]


def test_ordered_fsum_independent_of_chunking():
    rng = np.random.default_rng(7)
    vals = (rng.standard_normal(10000) * 10.0 ** rng.integers(-8, 8, 10000)).tolist()
    parts = [sum(vals[i:i + 100]) for i in range(0, 10000, 100)]
    assert ordered_fsum(vals) == ordered_fsum(list(ordered_map(lambda x: x, vals, 3)))
    assert isinstance(ordered_fsum(parts), float)
