"""Random stream tests: known-answer vectors, numpy cross-check, chunking."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from resodecay import rng
from resodecay._kernels import compiled_available, get_backend

BACKENDS = ["python"] + (["cython"] if compiled_available() else [])

# Random123 known-answer vector for philox4x64-10, counter 0, key 0
PHILOX_KAT = (0x16554D9ECA36314C, 0xDB20FE9D672D0FDC, 0xD7E772CEE186176B, 0x7E68B68AEC7BA23B)


@pytest.mark.parametrize("backend", BACKENDS)
def test_philox_known_answer(backend):
    k = get_backend(backend)
    words = k.random_words(0, 0, 0, 4)
    assert tuple(int(w) for w in words) == PHILOX_KAT


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("key,stream", [((5, 7), 3), ((2**64 - 1, 1), 0), ((123, 0), 4)])
def test_matches_numpy_philox(backend, key, stream):
    # numpy increments its 256-bit counter before each block, so starting
    # at (2**64 - 1, stream - 1) makes its first block (0, stream, 0, 0)
    M = 2**64 - 1
    start = [M, (stream - 1) % 2**64, 0 if stream else M, 0 if stream else M]
    bg = np.random.Philox(key=np.array(key, dtype=np.uint64),
                          counter=np.array(start, dtype=np.uint64))
    expect = bg.random_raw(64)
    got = get_backend(backend).random_words(key[0], key[1], stream, 64)
    np.testing.assert_array_equal(got, expect)


def test_splitmix64_reference_outputs():
    assert rng.splitmix64(0, 3) == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    assert rng.splitmix64(1234567, 2) == [6457827717110365317, 3203168211198807973]


def test_chunk_keys_follow_splitmix_sequence():
    # chunk c of seed s uses the (c+1)-th SplitMix64 output of s
    seq = rng.splitmix64(99, 4)
    assert [rng.chunk_key(99, c)[0] for c in range(4)] == seq


def test_uniform_range_and_resolution():
    u = rng.uniforms(1, rng.DECAY_TIME, 100_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert np.all(u * 2.0**53 == np.floor(u * 2.0**53))


def test_streams_are_distinct():
    a = rng.uniforms(7, rng.DECAY_TIME, 1000)
    b = rng.uniforms(7, rng.DECAY_CHANNEL, 1000)
    c = rng.uniforms(8, rng.DECAY_TIME, 1000)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)


@given(seed=st.integers(0, 2**64 - 1),
       start=st.integers(0, 3 * rng.CHUNK),
       n=st.integers(1, 2 * rng.CHUNK))
def test_slices_are_consistent_across_chunks(seed, start, n):
    whole = rng.uniforms(seed, rng.XSEC_PROPOSAL, start + n)
    part = rng.uniforms(seed, rng.XSEC_PROPOSAL, n, start)
    np.testing.assert_array_equal(part, whole[start:])


def test_uniform_moments():
    u = rng.uniforms(2024, rng.XSEC_ACCEPT, 400_000)
    assert abs(u.mean() - 0.5) < 5 * np.sqrt(1 / 12 / u.size)
    assert abs(u.var() - 1 / 12) < 5e-3 / 12
