"""Decay of a Hilbert-space state with a Breit-Wigner energy distribution.

The state is described by its spectral density on the spectrum
``[lower, inf)``.  The survival amplitude is the Fourier transform of the
density, computed with the rotated-contour rule so that late times (the
``t**-2`` regime) stay accurate.  Units: hbar = 1.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, BadWeights, NegativeTime
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    integrate_half_line,
    integrate_interval,
    integrate_real_line,
    oscillatory_fourier_integral,
)

TRUNCATED = "truncated-lorentzian"
FULL_LINE = "full-line-lorentzian"

# looser rule for integrating survival curves over time
TIME_SPEC = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-11, max_subdivisions=100000)
# tighter rule for normalization integrals
NORM_SPEC = QuadratureSpec(rel_tol=1e-14, abs_tol=1e-16, r_trunc=1e16)


@dataclass(frozen=True)
class SpectralDensity:
    """``N / ((E - E_R)**2 + Gamma**2/4)`` on ``[lower, inf)``.

    Calling the density evaluates the analytic formula, also at complex
    arguments; the support restriction is applied by the integrators.
    """

    shape: str
    e_r: float
    gamma: float
    norm: float
    lower: float = 0.0

    @property
    def pole(self):
        return complex(self.e_r, -0.5 * self.gamma)

    def __call__(self, e):
        e = np.asarray(e)
        d = e - self.e_r
        return self.norm / (d * d + 0.25 * self.gamma ** 2)

    def simple_poles(self):
        z = self.pole
        return [(z, self.norm / (z - z.conjugate())), (z.conjugate(), self.norm / (z.conjugate() - z))]

    def integral(self, spec=NORM_SPEC):
        """Numerical integral over the support."""
        if np.isfinite(self.lower):
            return complex(integrate_half_line(self, self.lower, spec, points=[self.e_r],
                                               scale=self.gamma).value).real
        return complex(integrate_real_line(self, spec, points=[self.e_r], scale=self.gamma).value).real

    def renormalized(self, spec=NORM_SPEC):
        return SpectralDensity(self.shape, self.e_r, self.gamma, self.norm / self.integral(spec), self.lower)


def lorentzian_norm(e_r, gamma, lower=0.0):
    """Closed-form ``N`` making the Lorentzian integrate to one on ``[lower, inf)``."""
    if not np.isfinite(lower):
        return gamma / (2 * math.pi)
    # int_lower^inf dE / ((E-E_R)^2 + G^2/4) = (2/G) [pi/2 + atan(2(E_R-lower)/G)]
    return 1.0 / ((2.0 / gamma) * (0.5 * math.pi + math.atan(2.0 * (e_r - lower) / gamma)))


def normalize_density(shape, e_r, gamma, lower=0.0, spec=None):
    """Build a unit-normalized Lorentzian density.

    The closed form is used unless ``spec`` is given, in which case the
    normalization comes from quadrature of the unnormalized density.
    """
    if not (gamma > 0 and np.isfinite(gamma) and np.isfinite(e_r)):
        raise BadParams(f"need finite E_R and Gamma > 0, got E_R={e_r}, Gamma={gamma}")
    if shape == FULL_LINE:
        lower = -math.inf
    elif shape != TRUNCATED:
        raise BadParams(f"unknown density shape {shape!r}")
    elif not np.isfinite(lower):
        raise BadParams("a truncated density needs a finite lower edge")
    if spec is None:
        return SpectralDensity(shape, float(e_r), float(gamma), lorentzian_norm(e_r, gamma, lower), float(lower))
    raw = SpectralDensity(shape, float(e_r), float(gamma), 1.0, float(lower))
    return raw.renormalized(spec)


def truncated_lorentzian(e_r, gamma, lower=0.0):
    return normalize_density(TRUNCATED, e_r, gamma, lower)


def full_line_lorentzian(e_r, gamma):
    return normalize_density(FULL_LINE, e_r, gamma)


def survival_amplitude(rho, t, spec=DEFAULT_SPEC):
    return oscillatory_fourier_integral(rho, t, spec, lower=rho.lower, points=[rho.e_r],
                                        scale=rho.gamma)


def survival_probability(rho, t, spec=DEFAULT_SPEC):
    """``(A(t), |A(t)|**2)`` with ``A(t) = int rho(E) exp(-i E t) dE``; any real t."""
    a = survival_amplitude(rho, t, spec)
    return a, abs(a) ** 2


@dataclass(frozen=True)
class SurvivalCurve:
    times: np.ndarray
    amplitudes: np.ndarray
    probabilities: np.ndarray
    gamma: float = None

    @property
    def exponential(self):
        return np.exp(-self.gamma * self.times)

    @property
    def deviation(self):
        return self.probabilities - self.exponential


def survival_curve(rho, times, spec=DEFAULT_SPEC):
    ts = np.asarray(times, dtype=float)
    amps = np.array([survival_amplitude(rho, t, spec) for t in ts], dtype=complex)
    return SurvivalCurve(ts, amps, np.abs(amps) ** 2, rho.gamma)


def ww_deviation(rho, t, spec=DEFAULT_SPEC):
    """``P(t) - exp(-Gamma t)``: the non-exponential remainder, absolute."""
    if t < 0:
        raise NegativeTime("deviation is reported for t >= 0")
    _, p = survival_probability(rho, t, spec)
    return p - math.exp(-rho.gamma * t)


def loglog_slope(times, probabilities):
    """Least-squares slope of ``log P`` against ``log t``."""
    slope, _ = np.polyfit(np.log(np.asarray(times)), np.log(np.asarray(probabilities)), 1)
    return float(slope)


def late_time_slope(rho, t_lo, t_hi, points_per_period=8, min_points=41, spec=DEFAULT_SPEC):
    """Log-log slope of ``P(t)`` on ``[t_lo, t_hi]`` from a resolving grid.

    Late-time ``P(t)`` carries a cross term between the exponential and
    the power-law parts of the amplitude that oscillates with period
    ``2 pi / E_R``.  A grid coarser than that period aliases the cross
    term into the fitted slope, so the log-spaced grid is made dense
    enough to place ``points_per_period`` samples in every period.
    Returns ``(slope, times)``.
    """
    if not 0 < t_lo < t_hi:
        raise ValueError("need 0 < t_lo < t_hi")
    periods = (t_hi - t_lo) * abs(rho.e_r) / (2.0 * math.pi)
    n = max(int(min_points), math.ceil(points_per_period * periods))
    times = np.geomspace(t_lo, t_hi, n)
    probs = survival_curve(rho, times, spec).probabilities
    return loglog_slope(times, probs), times


@dataclass(frozen=True)
class ChannelRates:
    """Initial partial decay rates ``R_eta(0)`` (1/time)."""

    rates: tuple
    labels: tuple = None

    def __post_init__(self):
        r = tuple(float(x) for x in self.rates)
        if not r or any(not math.isfinite(x) or x < 0 for x in r):
            raise BadWeights(f"rates must be finite and nonnegative, got {self.rates}")
        if not sum(r) > 0:
            raise BadWeights("total rate must be positive")
        object.__setattr__(self, "rates", r)
        labels = self.labels or tuple(f"eta{k + 1}" for k in range(len(r)))
        if len(labels) != len(r):
            raise BadWeights("one label per channel required")
        object.__setattr__(self, "labels", tuple(labels))

    @property
    def total(self):
        return math.fsum(self.rates)

    @property
    def branching(self):
        tot = self.total
        return tuple(r / tot for r in self.rates)

    @property
    def lifetime(self):
        return 1.0 / self.total


def rate_curves(channels, t):
    """Per-channel ``(R_eta(t), P_eta(t))`` under the exponential law."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise NegativeTime("rates are defined for t >= 0")
    R = channels.total
    surv = np.exp(-R * t)
    rates = [r * surv for r in channels.rates]
    probs = [(r / R) * (1.0 - surv) for r in channels.rates]
    return rates, probs


@dataclass(frozen=True)
class LifetimeEstimate:
    tau: float
    tail: float
    t_max: float
    deviation: float = None


def mean_lifetime(source, spec=TIME_SPEC, t_max=None, density_spec=DEFAULT_SPEC):
    """Mean lifetime ``int_0^inf P(t) dt`` with a ``C/t**2`` tail beyond ``t_max``.

    ``source`` is a :class:`SpectralDensity`, a :class:`SurvivalCurve`
    (integrated by the trapezoid rule on its grid) or a callable ``P(t)``
    (``t_max`` required).  For densities ``deviation = tau Gamma - 1``.
    """
    gamma = None
    if isinstance(source, SurvivalCurve):
        ts, ps = source.times, source.probabilities
        if ts[0] != 0:
            raise ValueError("survival curve must start at t = 0")
        body = float(np.trapezoid(ps, ts))
        T = float(ts[-1])
        tail = float(ps[-1]) * T
        gamma = source.gamma
    else:
        if isinstance(source, SpectralDensity):
            gamma = source.gamma
            T = t_max if t_max is not None else 30.0 / gamma

            def P(t):
                t = np.atleast_1d(t)
                vals = [survival_probability(source, float(x), density_spec)[1] for x in t.ravel()]
                return np.array(vals).reshape(t.shape)
            pts = list(np.linspace(0, T, 9)[1:-1])
        else:
            if t_max is None:
                raise ValueError("t_max is required for a callable survival probability")
            T = float(t_max)
            P = source
            pts = ()
        body = integrate_interval(P, 0.0, T, spec, points=pts).value.real
        # P ~ C/t^2 beyond T
        tail = float(np.real(P(np.array([T]))[0])) * T
    tau = body + tail
    dev = tau * gamma - 1.0 if gamma else None
    return LifetimeEstimate(float(tau), float(tail), float(T), dev)
