import numpy as np
import pytest
from hypothesis import given, strategies as st

from thermokin.kinetic.rng import CounterRNG, philox4x32


@pytest.mark.parametrize("ctr, key, out", [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF, 0xFFFFFFFF), (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
])
def test_known_answers(ctr, key, out):
    assert tuple(int(x) for x in philox4x32(ctr, key)) == out


@given(st.integers(0, 2**64 - 1), st.lists(st.integers(0, 2**40), min_size=1, max_size=20))
def test_order_independence(seed, particles):
    rng = CounterRNG(seed)
    p = np.array(particles, dtype=np.uint64)
    a, b = rng.uniforms(p, 7)
    perm = np.arange(len(p))[::-1]
    a2, b2 = rng.uniforms(p[perm], 7)
    np.testing.assert_array_equal(a2, a[perm])
    assert np.all((a >= 0) & (a < 1) & (b >= 0) & (b < 1))


def test_streams_differ_and_look_uniform():
    rng = CounterRNG(42)
    p = np.arange(200000, dtype=np.uint64)
    a, b = rng.uniforms(p, 0)
    c, _ = rng.uniforms(p, 1)
    d, _ = rng.uniforms(p, 0, tag=1)
    assert abs(a.mean() - 0.5) < 3e-3 and abs(a.var() - 1 / 12) < 2e-3
    for x in (b, c, d):
        assert abs(np.corrcoef(a, x)[0, 1]) < 0.01
    assert not np.array_equal(CounterRNG(43).uniforms(p[:10], 0)[0], a[:10])
