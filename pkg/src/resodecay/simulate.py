"""Synthetic scattering and decay data.

Scattering energies are drawn from the cross-section shape on a finite
window by rejection sampling; decay times are exponential with the total
rate and channels are chosen independently of time with the branching
fractions.  All randomness comes from :mod:`resodecay.rng`, so outputs
are bit-identical for a given ``(seed, n, model)``.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, rng
from .decay import ChannelRates
from .errors import BadEdges, BadWindow, EnvelopeViolation, TooFewEvents
from .smatrix import NO_BACKGROUND, cross_section, model_to_dict

ENVELOPE_SAFETY = 1.2


@dataclass(frozen=True)
class ScatteringEvents:
    energies: np.ndarray
    window: tuple
    seed: int
    model: dict = field(default_factory=dict)

    def __len__(self):
        return int(self.energies.size)


@dataclass(frozen=True)
class DecayEvents:
    times: np.ndarray
    channels: np.ndarray
    seed: int
    rates: ChannelRates = None

    def __len__(self):
        return int(self.times.size)


@dataclass(frozen=True)
class BinnedCounts:
    """Counts in half-open bins ``[e_i, e_{i+1})``, one row per channel."""

    edges: np.ndarray
    counts: np.ndarray
    underflow: np.ndarray
    overflow: np.ndarray
    total: int
    labels: tuple = ("all",)
    kind: str = "energy"

    @property
    def lo(self):
        return self.edges[:-1]

    @property
    def hi(self):
        return self.edges[1:]

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def _check_window(window):
    lo, hi = (float(x) for x in window)
    if not (np.isfinite(lo) and np.isfinite(hi) and 0 <= lo < hi):
        raise BadWindow(f"window must satisfy 0 <= E_min < E_max < inf, got {window}")
    return lo, hi


def _envelope(shape, lo, hi, points, extra):
    grid = np.linspace(lo, hi, points)
    grid = np.concatenate([grid, [x for x in extra if lo <= x <= hi]])
    return float(np.max(shape(grid)))


def sample_lineshape(n, params, bg=NO_BACKGROUND, norm=1.0, window=(1.0, 3.0), seed=0):
    """Draw ``n`` event energies from the cross-section shape on ``window``.

    Proposals are uniform on the window and accepted below an envelope set
    to 1.2 times the largest cross section on a grid scan.  A proposal
    above the envelope triggers one restart on a 16 times finer scan with
    safety factor 1.8; a second violation raises :class:`EnvelopeViolation`.
    """
    n = int(n)
    if n < 1:
        raise ValueError("need n >= 1")
    lo, hi = _check_window(window)
    width = hi - lo

    def shape(e):
        return cross_section(e, params, bg, norm)

    attempts = [(4097, ENVELOPE_SAFETY), (65537, 1.5 * ENVELOPE_SAFETY)]
    for points, safety in attempts:
        env = safety * _envelope(shape, lo, hi, points, [params.e_r])
        accepted = []
        count = 0
        chunk = 0
        violated = False
        while count < n:
            start = chunk * rng.CHUNK
            e = lo + width * rng.uniforms(seed, rng.XSEC_PROPOSAL, rng.CHUNK, start)
            u = env * rng.uniforms(seed, rng.XSEC_ACCEPT, rng.CHUNK, start)
            s = shape(e)
            if np.any(s > env):
                violated = True
                break
            keep = e[u < s]
            accepted.append(keep)
            count += keep.size
            chunk += 1
        if not violated:
            energies = np.concatenate(accepted)[:n]
            return ScatteringEvents(energies, (lo, hi), int(seed), model_to_dict(params, bg, norm))
    raise EnvelopeViolation("cross section exceeded the rescanned envelope")


def sample_decays(n, channels, seed=0):
    """``n`` decays: exponential times with the total rate, channels by branching fraction."""
    n = int(n)
    if n < 1:
        raise ValueError("need n >= 1")
    if not isinstance(channels, ChannelRates):
        channels = ChannelRates(tuple(channels))
    u_t = rng.uniforms(seed, rng.DECAY_TIME, n)
    u_c = rng.uniforms(seed, rng.DECAY_CHANNEL, n)
    times = -np.log1p(-u_t) / channels.total
    cum = np.cumsum(channels.branching)
    labels = np.minimum(np.searchsorted(cum, u_c, side="right"), len(cum) - 1)
    return DecayEvents(times, labels.astype(np.int64), int(seed), channels)


def check_edges(edges):
    e = np.asarray(edges, dtype=float)
    if e.ndim != 1 or e.size < 2 or not np.all(np.isfinite(e)) or np.any(np.diff(e) <= 0):
        raise BadEdges("bin edges must be finite, strictly ascending, at least two")
    return e


def bin_counts(events, edges):
    """Histogram events into half-open bins; decays are split by channel."""
    e = check_edges(edges)
    if isinstance(events, DecayEvents):
        values, labels = events.times, events.channels
        names = events.rates.labels if events.rates is not None else tuple(
            f"eta{k + 1}" for k in range(int(labels.max(initial=-1)) + 1))
        kind = "time"
    elif isinstance(events, ScatteringEvents):
        values = events.energies
        labels = np.zeros(values.size, dtype=np.int64)
        names = ("all",)
        kind = "energy"
    else:
        raise TypeError(f"cannot bin {type(events).__name__}")
    nlab = max(len(names), 1)
    counts, under, over = _kernels.bin_counts(values, labels, e, nlab)
    return BinnedCounts(e, counts, under, over, int(values.size), tuple(names), kind)


def mean_lifetime_estimator(events):
    """Sample mean of the decay times and its standard error."""
    t = np.asarray(events.times if isinstance(events, DecayEvents) else events, dtype=float)
    if t.size < 2:
        raise TooFewEvents("need at least two decays")
    return float(t.mean()), float(t.std(ddof=1) / np.sqrt(t.size))
