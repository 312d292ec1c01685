"""Gamow kets as functionals on Hardy wave functions, and their time evolution.

The ket at ``z_R = E_R - i Gamma/2`` acts on the boundary data
``g(E) = <psi-|E->`` (an ``H2-`` rational function) through the Cauchy
integral ``(i/2pi) int g(E)/(E - z_R) dE``.  Every pairing is computed
twice: by real-axis quadrature and by the residue value ``g(z_R)``.
Units: hbar = 1, times measured from preparation at ``t = 0``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadWeights, DecayOrderTooLow, NegativeTime, NonNegativeTime
from .hardy import H2_MINUS, evaluate_closed_form
from .quadrature import (
    DEFAULT_SPEC,
    cauchy_kernel_integral,
    fourier_real_line,
    integrate_interval,
    integrate_real_line,
)


@dataclass(frozen=True)
class GamowKet:
    """``phi_G = normalization * |z_R->``; default normalization ``sqrt(2 pi Gamma)``."""

    z_r: complex
    normalization: complex = None

    def __post_init__(self):
        z = complex(self.z_r)
        if not z.imag < 0:
            raise ValueError(f"Gamow pole must lie in the lower half-plane, got {z}")
        object.__setattr__(self, "z_r", z)
        if self.normalization is None:
            object.__setattr__(self, "normalization", complex(math.sqrt(2 * math.pi * self.gamma)))
        else:
            object.__setattr__(self, "normalization", complex(self.normalization))

    @property
    def gamma(self):
        return -2.0 * self.z_r.imag

    @property
    def e_r(self):
        return self.z_r.real

    @classmethod
    def from_resonance(cls, e_r, gamma, f=1.0):
        return cls(complex(e_r, -0.5 * gamma), math.sqrt(2 * math.pi * gamma) / f)


@dataclass(frozen=True)
class PairingResult:
    residue: complex
    quadrature: complex
    discrepancy: float
    spec: object = None

    @property
    def relative_discrepancy(self):
        return self.discrepancy / max(abs(self.residue), 1e-300)


def _check_ket_domain(g, ket):
    g.require_class(H2_MINUS)
    if ket.z_r in set(g.poles):
        raise ValueError("z_R coincides with a pole of the wave function")


def gamow_pairing(g, ket, spec=DEFAULT_SPEC):
    """``<psi-|phi_G>`` by Titchmarsh quadrature and by the Cauchy residue."""
    _check_ket_domain(g, ket)
    if not g.terms:
        return PairingResult(0j, 0j, 0.0, spec)
    residue = ket.normalization * evaluate_closed_form(g, ket.z_r)
    quad = ket.normalization * complex(cauchy_kernel_integral(
        g, ket.z_r, spec, points=g.feature_points(), decay_order=min(g.decay_order, 8)).value)
    return PairingResult(residue, quad, abs(residue - quad), spec)


def eigenvalue_residual(g, ket, spec=DEFAULT_SPEC, floor=1e-300):
    """Relative mismatch in ``<H psi-|phi_G> = z_R <psi-|phi_G>``.

    The left side is ``(i/2pi) int E g(E)/(E - z_R) dE`` (H acts by
    multiplication with E on energy data); the right side is ``z_R`` times
    the quadrature pairing.  Needs decay order >= 2 so that ``int g = 0``.
    """
    _check_ket_domain(g, ket)
    if g.decay_order < 2:
        raise DecayOrderTooLow(f"decay order {g.decay_order} < 2")
    if not g.terms:
        return 0.0
    z = ket.z_r
    pts = sorted({z.real, *g.feature_points()})
    spread = max(pts) - min(pts)
    lhs = integrate_real_line(
        lambda e: e * g(e) / (e - z), spec, points=pts, scale=max(spread, abs(z.imag)),
        decay_order=int(min(g.decay_order, 8)))
    lhs = ket.normalization * 1j / (2 * np.pi) * lhs.value
    rhs = z * gamow_pairing(g, ket, spec).quadrature
    return float(abs(lhs - rhs) / (abs(rhs) + floor))


def _evolution_factor(ket, t):
    return np.exp(-1j * ket.z_r * t)


def evolved_pairing(g, ket, t, route="quadrature", spec=DEFAULT_SPEC):
    """``<psi-(t)|phi_G>`` for ``t >= 0``.

    ``route="closed"`` multiplies the residue pairing by
    ``exp(-i E_R t) exp(-Gamma t / 2)``; ``route="quadrature"`` integrates
    ``exp(-i E t) g(E)/(E - z_R)`` along the real axis with no residues.
    """
    t = float(t)
    if t < 0 or math.copysign(1.0, t) < 0:
        raise NegativeTime("the Gamow semigroup is defined for t >= 0 only; see catastrophe_probe")
    _check_ket_domain(g, ket)
    if not g.terms:
        return 0j
    if route == "closed":
        return complex(_evolution_factor(ket, t) * ket.normalization * evaluate_closed_form(g, ket.z_r))
    if route != "quadrature":
        raise ValueError(f"unknown route {route!r}")
    if t == 0.0:
        return gamow_pairing(g, ket, spec).quadrature
    z = ket.z_r
    res = fourier_real_line(lambda e: g(e) / (e - z), t, spec,
                            singularities=[z, *g.poles], scale=abs(z.imag))
    return complex(ket.normalization * 1j / (2 * np.pi) * res.value)


def compose(ket, value_t1, t2):
    """Advance an evolved pairing by ``t2 >= 0`` without recomputation."""
    if t2 < 0:
        raise NegativeTime("semigroup elements exist for t >= 0 only")
    return complex(_evolution_factor(ket, t2) * value_t1)


def catastrophe_probe(g, ket, t, radii, spec=DEFAULT_SPEC):
    """Size of the closing-arc contribution for ``t < 0`` at each radius.

    The semigroup law follows from closing the real-axis integral with a
    lower semicircle whose contribution vanishes for ``t >= 0``.  For
    ``t < 0`` the factor ``exp(-i z t)`` grows like ``exp(R |t|)`` on that
    arc.  For each radius ``R`` (centred on ``E_R``) this returns
    ``|norm/2pi| * int |exp(-i z t) g(z)/(z - z_R)| |dz|`` over the arc, the
    quantity that must vanish for the continuation to exist; it grows
    without bound, so no finite Born probability survives for ``t < 0``.
    """
    t = float(t)
    if not (t < 0):
        raise NonNegativeTime("catastrophe_probe explores t < 0 only; use evolved_pairing")
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly ascending")
    _check_ket_domain(g, ket)
    z0 = ket.z_r
    c = z0.real
    scale = abs(ket.normalization) / (2 * np.pi)
    out = []
    for R in radii:
        if R <= abs(z0.imag):
            raise ValueError("arc radius must exceed the distance to the pole")

        def mass(theta, R=R):
            z = c + R * np.exp(1j * theta)
            return np.abs(np.exp(-1j * z * t) * g(z) / (z - z0)) * R

        val = integrate_interval(mass, -np.pi, 0.0, spec, points=[-np.pi / 2]).value
        out.append(float(scale * val.real))
    return out


@dataclass(frozen=True)
class ChannelProbabilities:
    t: float
    probabilities: tuple
    rates: tuple


def decay_probability_gamow(widths, t, hbar=1.0, gamma=None, rtol=1e-9):
    """Per-channel ``P_eta(t) = (Gamma_eta/Gamma)(1 - e^{-Gamma t/hbar})`` and rates.

    The rates ``R_eta(t) = (Gamma_eta/hbar) e^{-Gamma t/hbar}`` are the
    time derivatives of the probabilities.  When the total ``gamma`` is
    given, the channel widths must add up to it within ``rtol``.
    """
    w = np.asarray(widths, dtype=float)
    if w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise BadWeights("channel widths must be nonnegative and finite")
    total = float(math.fsum(w))
    if not total > 0:
        raise BadWeights("total width must be positive")
    if gamma is not None and abs(total - gamma) > rtol * abs(gamma):
        raise BadWeights(f"channel widths sum to {total}, not Gamma = {gamma}")
    gamma = total
    if t < 0:
        raise NegativeTime("decay probabilities are defined for t >= 0")
    surv = math.exp(-gamma * t / hbar)
    probs = tuple(float(x) for x in (w / gamma) * (1.0 - surv))
    rates = tuple(float(x) for x in (w / hbar) * surv)
    return ChannelProbabilities(float(t), probs, rates)


def lifetime_from_pairings(ts, values):
    """Least-squares slope of ``log |value|**2`` against ``t``: returns ``tau``."""
    ts = np.asarray(ts, dtype=float)
    y = np.log(np.abs(np.asarray(values)) ** 2)
    slope, _ = np.polyfit(ts, y, 1)
    return -1.0 / slope
