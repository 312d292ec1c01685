"""Reproducible random streams built on Philox4x64-10.

Layout
------
A run is identified by a 64-bit ``seed``.  Work is cut into chunks of
``CHUNK`` draws; chunk ``c`` of a run uses the Philox key::

    key0 = mix64(seed + (c + 1) * 0x9E3779B97F4A7C15  mod 2**64)
    key1 = seed

where ``mix64`` is the SplitMix64 output function.  Independent uses
inside a chunk (decay times, channel choices, proposals, ...) are separated
by the ``stream`` tag, which occupies the second counter word.  Draw ``j``
of a stream is 64-bit word ``j`` of the sequence of Philox blocks with
counters ``(0, stream, 0, 0), (1, stream, 0, 0), ...``.

Because every chunk is a pure function of ``(seed, chunk, stream)``, output
is bit-identical however chunks are scheduled.
"""
import numpy as np

from . import _kernels

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
CHUNK = 1 << 16

# stream tags
DECAY_TIME = 1
DECAY_CHANNEL = 2
XSEC_PROPOSAL = 3
XSEC_ACCEPT = 4


def mix64(x):
    """SplitMix64 output function (Stafford variant 13)."""
    z = int(x) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(seed, n):
    """First ``n`` outputs of a SplitMix64 generator started at ``seed``."""
    state = int(seed) & MASK64
    out = []
    for _ in range(n):
        state = (state + GOLDEN) & MASK64
        out.append(mix64(state))
    return out


def chunk_key(seed, chunk):
    seed = int(seed) & MASK64
    return mix64((seed + (int(chunk) + 1) * GOLDEN) & MASK64), seed


def uniforms(seed, stream, n, start=0):
    """``n`` uniforms in [0, 1) for draws ``start .. start+n-1`` of a stream."""
    n = int(n)
    start = int(start)
    if n <= 0:
        return np.empty(0, dtype=np.float64)
    first, last = start // CHUNK, (start + n - 1) // CHUNK
    parts = []
    for c in range(first, last + 1):
        k0, k1 = chunk_key(seed, c)
        lo = max(start, c * CHUNK) - c * CHUNK
        hi = min(start + n, (c + 1) * CHUNK) - c * CHUNK
        parts.append(_kernels.random_uniforms(k0, k1, stream, hi)[lo:hi])
    return np.concatenate(parts)
