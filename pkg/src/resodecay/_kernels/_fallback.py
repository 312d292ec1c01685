"""Pure numpy implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with an identical
signature.  Integer outputs (random words, bin counts) must agree bit for
bit between the two backends; floating outputs agree to rounding.
"""
import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_TWO_M53 = 2.0 ** -53


def _mulhilo(a, b):
    lo = a * b
    al, ah = a & _LO32, a >> _S32
    bl, bh = b & _LO32, b >> _S32
    ll, lh, hl, hh = al * bl, al * bh, ah * bl, ah * bh
    mid = (ll >> _S32) + (lh & _LO32) + (hl & _LO32)
    hi = hh + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    return lo, hi


def philox4x64(c0, c1, c2, c3, key0, key1):
    """Philox4x64-10 applied elementwise to counter arrays ``c0..c3``."""
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in (c0, c1, c2, c3))
    k0, k1 = np.uint64(key0), np.uint64(key1)
    with np.errstate(over="ignore"):
        for rnd in range(10):
            if rnd:
                k0 = k0 + _W0
                k1 = k1 + _W1
            lo0, hi0 = _mulhilo(_M0, c0)
            lo1, hi1 = _mulhilo(_M1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def random_words(key0, key1, stream, n):
    """First ``n`` 64-bit words of the stream keyed by ``(key0, key1)``.

    Block ``i`` uses counter ``(i, stream, 0, 0)`` and yields four words.
    """
    n = int(n)
    nblocks = (n + 3) // 4
    idx = np.arange(nblocks, dtype=np.uint64)
    zero = np.zeros(nblocks, dtype=np.uint64)
    tag = np.full(nblocks, stream, dtype=np.uint64)
    out = philox4x64(idx, tag, zero, zero, key0, key1)
    return np.stack(out, axis=1).reshape(-1)[:n]


def random_uniforms(key0, key1, stream, n):
    """Doubles in [0, 1) with 53 random bits each."""
    words = random_words(key0, key1, stream, n)
    return (words >> _S11).astype(np.float64) * _TWO_M53


def bin_counts(values, labels, edges, n_labels):
    """Half-open histogram ``[e_i, e_{i+1})`` split by integer label.

    Returns ``(counts[n_labels, nbins], underflow[n_labels], overflow[n_labels])``.
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    edges = np.asarray(edges, dtype=np.float64)
    nbins = edges.size - 1
    pos = np.searchsorted(edges, values, side="right") - 1
    # pos == -1 -> underflow, pos == nbins -> at/above last edge
    pos = np.where(np.isnan(values), nbins, pos)
    flat = labels * (nbins + 2) + (pos + 1)
    table = np.bincount(flat, minlength=n_labels * (nbins + 2)).reshape(n_labels, nbins + 2)
    table = table.astype(np.int64)
    return table[:, 1:-1].copy(), table[:, 0].copy(), table[:, -1].copy()


def rational_eval(z, poles, mults, coeffs):
    """Sum of ``c_k / (z - p_k)**m_k`` over all terms; zero for no terms."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.zeros(z.shape, dtype=np.complex128)
    with np.errstate(divide="ignore", invalid="ignore"):
        for p, m, c in zip(poles, mults, coeffs):
            out += c / (z - p) ** int(m)
    return out


def bw_intensity(energies, e_r, gamma, residue, bg_coeffs, norm):
    """``norm * |residue/(E - e_r + i gamma/2) + sum_k b_k E**k|**2`` at real E."""
    e = np.asarray(energies, dtype=np.float64)
    amp = residue / (e - complex(e_r, -0.5 * gamma))
    bg = np.zeros(e.shape, dtype=np.complex128)
    for c in reversed(list(bg_coeffs)):
        bg = bg * e + c
    tot = amp + bg
    return norm * (tot.real * tot.real + tot.imag * tot.imag)
