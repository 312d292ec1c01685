"""Breit-Wigner amplitudes, backgrounds and one-pole partial-wave S-matrices.

Conventions: ``z_R = E_R - i Gamma/2``; the Breit-Wigner amplitude is
``r / (z - z_R)``; the partial-wave S-matrix is ``1 + 2i a`` in an elastic
channel and ``2i a`` between distinct channels.  With ``r = -Gamma/2`` and
no background the elastic S-matrix is ``(z - conj(z_R)) / (z - z_R)``,
unimodular on the real axis.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import BadParams, EvalAtPole, NonConvergence, RadiusTooLarge
from .hardy import H2_MINUS
from .quadrature import DEFAULT_SPEC, integrate_half_line, integrate_ray, integrate_segment


@dataclass(frozen=True)
class ResonanceParams:
    e_r: float
    gamma: float
    residue: complex = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.e_r) and np.isfinite(self.gamma)):
            raise BadParams("resonance parameters must be finite")
        if not self.gamma > 0:
            raise BadParams(f"width must be positive, got {self.gamma}")
        object.__setattr__(self, "residue", complex(self.residue))

    @property
    def pole(self):
        return complex(self.e_r, -0.5 * self.gamma)

    @classmethod
    def unitary(cls, e_r, gamma):
        """Residue ``-Gamma/2``: the canonical unimodular one-pole model."""
        return cls(e_r, gamma, -0.5 * gamma)


@dataclass(frozen=True)
class BackgroundModel:
    """``B(E) = sum_k poly[k] E**k + sum_j c_j / (E - p_j)**m_j``."""

    poly: tuple = ()
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "poly", tuple(complex(c) for c in self.poly))
        object.__setattr__(self, "terms", tuple((complex(p), int(m), complex(c)) for p, m, c in self.terms))

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape, dtype=np.complex128)
        for c in reversed(self.poly):
            out = out * z + c
        if self.terms:
            p, m, c = zip(*self.terms)
            out = out + _kernels.rational_eval(z, np.array(p), np.array(m), np.array(c))
        return out

    @property
    def poles(self):
        return tuple(p for p, _, _ in self.terms)

    @property
    def is_zero(self):
        return not self.poly and not self.terms


NO_BACKGROUND = BackgroundModel()


@dataclass(frozen=True)
class PartialWaveChannel:
    j: int = 0
    eta: str = "a"
    eta0: str = "a"
    elastic: bool = True

    def __post_init__(self):
        if int(self.j) < 0:
            raise ValueError("angular momentum must be >= 0")
        if not self.elastic and self.eta == self.eta0:
            raise ValueError("an inelastic channel needs eta != eta0")


ELASTIC = PartialWaveChannel()


@dataclass(frozen=True)
class LaurentCoefficients:
    coeffs: dict
    center: complex
    radius: float
    nodes: int = 0

    def __getitem__(self, order):
        return self.coeffs[order]

    def series(self, z):
        """Truncated Laurent series evaluated at ``z``."""
        z = np.asarray(z, dtype=np.complex128)
        d = z - self.center
        return sum(c * d ** n for n, c in self.coeffs.items())


def bw_amplitude(z, params):
    """``r / (z - z_R)``; vectorized over ``z``."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z == params.pole):
        raise EvalAtPole("Breit-Wigner amplitude evaluated at its pole")
    out = params.residue / (z - params.pole)
    return out if out.ndim else complex(out)


def cross_section(energy, params, bg=NO_BACKGROUND, norm=1.0):
    """``norm * |a_BW(E) + B(E)|**2`` at physical energies ``E >= 0``."""
    e = np.asarray(energy, dtype=np.float64)
    if np.any(e < 0):
        raise ValueError("cross sections are defined for E >= 0 only")
    if not norm > 0:
        raise BadParams("norm must be positive")
    if not bg.terms:
        out = _kernels.bw_intensity(e, params.e_r, params.gamma, params.residue, bg.poly, norm)
    else:
        a = params.residue / (e - params.pole) + bg(e)
        out = norm * (a.real ** 2 + a.imag ** 2)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class SMatrix:
    """Callable one-pole S-matrix element ``S(z)`` for a given channel."""

    params: ResonanceParams
    bg: BackgroundModel = NO_BACKGROUND
    channel: PartialWaveChannel = ELASTIC

    @property
    def pole(self):
        return self.params.pole

    def __call__(self, z):
        return s_matrix_value(z, self.params, self.bg, self.channel)

    @classmethod
    def unitary(cls, e_r, gamma):
        return cls(ResonanceParams.unitary(e_r, gamma))


def s_matrix_value(z, params, bg=NO_BACKGROUND, channel=ELASTIC):
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z == params.pole):
        raise EvalAtPole("S-matrix evaluated at the resonance pole")
    a = params.residue / (z - params.pole) + bg(z)
    out = 1 + 2j * a if channel.elastic else 2j * a
    return out if out.ndim else complex(out)


def _trapezoid_coeffs(S, center, radius, orders, nodes):
    theta = 2 * np.pi * np.arange(nodes) / nodes
    u = np.exp(1j * theta)
    vals = np.asarray(S(center + radius * u), dtype=np.complex128)
    out = {n: complex(np.mean(vals * u ** (-n)) * radius ** (-n)) for n in orders}
    return out, float(np.max(np.abs(vals)))


def _converged_coeffs(S, center, radius, orders, spec, n0, max_nodes):
    n = n0
    prev, smax = _trapezoid_coeffs(S, center, radius, orders, n)
    while True:
        n *= 2
        if n > max_nodes:
            raise NonConvergence(f"Laurent coefficients not converged with {max_nodes} nodes")
        cur, smax = _trapezoid_coeffs(S, center, radius, orders, n)
        ok = all(abs(cur[k] - prev[k]) <= max(spec.abs_tol, spec.rel_tol * smax) * radius ** (-k)
                 for k in orders)
        if ok:
            return cur, n, smax
        prev = cur


def laurent_coefficients(S, z_r, orders=(-1, 0, 1), radius=None, spec=DEFAULT_SPEC,
                         n0=64, max_nodes=1 << 20):
    """Laurent coefficients of ``S`` about ``z_r`` by trapezoidal sums on a circle.

    ``R_n = (1/2 pi i) oint S(z) (z - z_r)**(-n-1) dz`` is estimated with
    ``n0, 2 n0, ...`` equispaced nodes until two successive estimates agree.
    The same coefficients are then recomputed on the circle of half the
    radius; disagreement means another singularity lies inside the contour
    and raises :class:`RadiusTooLarge`.  ``radius`` defaults to ``Gamma/2``.
    """
    z_r = complex(z_r)
    orders = tuple(sorted(set(int(k) for k in orders)))
    if radius is None:
        radius = abs(z_r.imag)
    radius = float(radius)
    if not radius > 0:
        raise ValueError("contour radius must be positive")
    coeffs, nodes, smax = _converged_coeffs(S, z_r, radius, orders, spec, n0, max_nodes)
    inner, _, smax_in = _converged_coeffs(S, z_r, 0.5 * radius, orders, spec, n0, max_nodes)
    for k in orders:
        scale = max(smax, smax_in) * (0.5 * radius) ** (-k)
        if abs(inner[k] - coeffs[k]) > 1e-7 * scale + 1e3 * spec.abs_tol:
            raise RadiusTooLarge(
                f"R_{k} changes between radius {radius:g} and {radius / 2:g}: "
                "another singularity lies inside the contour")
    return LaurentCoefficients(coeffs, z_r, radius, nodes)


@dataclass(frozen=True)
class BornAmplitude:
    value: complex
    mode: str
    pole_term: complex = 0j
    background: complex = 0j
    residue: complex = field(default=0j)


def born_amplitude(psi, phi, S, mode="direct", spec=DEFAULT_SPEC, pole=None, full_output=False):
    """S-matrix element ``int_0^inf psi(E) S(E) phi(E) dE`` between Hardy wave functions.

    ``psi`` holds ``<psi-|E->`` and ``phi`` holds ``<+E|phi+>``; both are
    ``H2-`` rational functions.  ``mode="pole-extracted"`` bends the path
    ``[0, inf)`` down to ``0 -> -iD -> inf - iD`` with ``D = Gamma``, adds the
    circle around ``z_R`` as ``-2 pi i R_-1 psi(z_R) phi(z_R)`` with the
    residue ``R_-1`` taken from :func:`laurent_coefficients`, and integrates
    the background remainder along the bent path.
    """
    psi.require_class(H2_MINUS)
    phi.require_class(H2_MINUS)
    if min(psi.decay_order, phi.decay_order) < 1:
        raise ValueError("wave functions must decay at least like 1/E")
    if not psi.terms or not phi.terms:
        res = BornAmplitude(0j, mode)
        return res if full_output else 0j
    z_r = complex(pole if pole is not None else getattr(S, "pole"))
    order = int(min(psi.decay_order + phi.decay_order, 8))
    feats = sorted({0.0, z_r.real, *psi.feature_points(), *phi.feature_points()})

    def h(z):
        return psi(z) * np.asarray(S(z)) * phi(z)

    if mode == "direct":
        r = integrate_half_line(h, 0.0, spec, points=feats, scale=max(abs(z_r.imag), 1e-3),
                                decay_order=order)
        res = BornAmplitude(complex(r.value), mode)
    elif mode == "pole-extracted":
        if not (z_r.imag < 0 and z_r.real > 0):
            raise ValueError("pole extraction needs the pole in the fourth quadrant")
        depth = 2.0 * abs(z_r.imag)
        lc = laurent_coefficients(S, z_r, orders=(-1,), radius=0.5 * abs(z_r.imag), spec=spec)
        r_m1 = lc[-1]
        pole_term = -2j * np.pi * r_m1 * complex(psi(z_r)) * complex(phi(z_r))
        drop = integrate_segment(h, 0.0, -1j * depth, spec)
        run = integrate_ray(h, -1j * depth, 1.0, spec, scale=max(z_r.real, depth))
        background = complex(drop.value + run.value)
        res = BornAmplitude(pole_term + background, mode, pole_term, background, r_m1)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return res if full_output else res.value


def model_from_dict(doc):
    """Parse the model configuration document shared with the CLI."""
    residues = doc.get("residues", doc.get("residue", 1.0))
    if isinstance(residues, dict):
        residues = next(iter(residues.values()))
    if isinstance(residues, (list, tuple)):
        residues = complex(*residues) if len(residues) == 2 else complex(residues[0])
    params = ResonanceParams(float(doc["E_R"]), float(doc["Gamma"]), complex(residues))
    poly = [complex(*c) if isinstance(c, (list, tuple)) else complex(c)
            for c in doc.get("background", [])]
    return params, BackgroundModel(tuple(poly)), float(doc.get("norm", 1.0))


def model_to_dict(params, bg=NO_BACKGROUND, norm=1.0):
    return {
        "E_R": params.e_r,
        "Gamma": params.gamma,
        "residues": {"a": [params.residue.real, params.residue.imag]},
        "background": [[c.real, c.imag] for c in bg.poly],
        "norm": norm,
    }


def model_digest(params, bg=NO_BACKGROUND, norm=1.0):
    import hashlib
    text = json.dumps(model_to_dict(params, bg, norm), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
