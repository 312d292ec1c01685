"""Adaptive quadrature on intervals, the real line, half-lines and rays.

All routines use a globally adaptive 21-point Gauss-Kronrod rule with
interval bisection.  Integrands are called with numpy arrays and must
return arrays of the same shape; scalar-only callables are detected and
evaluated point by point.

Infinite ranges are handled by the substitution ``E = c + w tan(theta)``,
truncated at ``|E| = r_trunc``.  The neglected tail is bounded from the
integrand's declared algebraic decay order and reported separately.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (
    NonConvergence,
    NonFiniteIntegrand,
    PoleOnAxis,
    StrategyUnavailable,
    TailBoundExceeded,
)

# Gauss-Kronrod 21 nodes on [-1, 1] (QUADPACK qk21), positive half incl. 0
_XGK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])           # 21 ascending
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(21)
_GW[1:10:2] = _WG
_GW[11:20:2] = _WG[::-1]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits shared by all quadrature routines.

    ``oscillatory`` selects the Fourier strategy: ``"auto"`` rotates the
    contour whenever the density's poles are known and the truncated range
    holds more than ``rotation_threshold`` radians of phase.
    """

    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    r_trunc: float = 1e14
    max_subdivisions: int = 20000
    oscillatory: str = "auto"
    pole_floor: float = 1e-8
    rotation_threshold: float = 20.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.r_trunc > 0:
            raise ValueError("truncation radius must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.oscillatory not in ("auto", "direct", "rotated"):
            raise ValueError(f"unknown oscillatory strategy {self.oscillatory!r}")

    def tolerance(self, value):
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    error: float
    subdivisions: int
    tail_bound: float = 0.0

    def __complex__(self):
        return complex(self.value)


def _as_vectorized(f):
    def g(x):
        x = np.asarray(x)
        try:
            y = np.asarray(f(x), dtype=np.complex128)
        except TypeError:
            y = None
        if y is None or y.shape != x.shape:
            y = np.array([complex(f(xi)) for xi in x.ravel()]).reshape(x.shape)
        return y
    return g


def _gk_batch(g, lo, hi):
    """Kronrod value and error estimate on each interval ``[lo_k, hi_k]``."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = g(x)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)]
        raise NonFiniteIntegrand(f"integrand not finite at {bad[:3].tolist()}")
    resk = fx @ _KW
    resg = fx @ _GW
    mean = 0.5 * resk
    resabs = np.abs(fx) @ _KW * np.abs(half)
    resasc = np.abs(fx - mean[:, None]) @ _KW * np.abs(half)
    err = np.abs((resk - resg) * half)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    floor = 50 * _EPS * resabs
    return resk * half, np.maximum(err, floor), floor


def _adaptive(g, breaks, spec):
    """Global bisection until the summed error meets the tolerance.

    Each interval's error carries a rounding floor ``50 eps int|f|`` that
    bisection cannot reduce.  When the requested tolerance lies below
    twice the summed floor (heavy cancellation, e.g. an integral that is
    exactly zero), iteration stops there and the honest error estimate,
    larger than the tolerance, is returned.
    """
    breaks = np.unique(np.asarray(breaks, dtype=float))
    lo, hi = breaks[:-1], breaks[1:]
    val, err, flo = _gk_batch(g, lo, hi)
    while True:
        total = val.sum()
        etot = err.sum()
        tol = spec.tolerance(total)
        if etot <= max(tol, 2.0 * flo.sum()):
            return IntegralResult(complex(total), float(etot), int(lo.size))
        order = np.argsort(-(err - flo))
        excess = etot - np.cumsum(err[order])
        nsplit = int(np.searchsorted(-excess, -0.5 * tol)) + 1
        pick = order[:nsplit]
        if lo.size + pick.size > spec.max_subdivisions:
            raise NonConvergence(
                f"subdivision budget {spec.max_subdivisions} exhausted "
                f"(value {complex(total):.6g}, error {etot:.3g}, tolerance {tol:.3g})")
        a, b = lo[pick], hi[pick]
        m = 0.5 * (a + b)
        if np.any((m <= a) | (m >= b)):
            raise NonConvergence("interval width reached floating-point resolution")
        v1, e1, f1 = _gk_batch(g, a, m)
        v2, e2, f2 = _gk_batch(g, m, b)
        keep = np.ones(lo.size, dtype=bool)
        keep[pick] = False
        lo = np.concatenate([lo[keep], a, m])
        hi = np.concatenate([hi[keep], m, b])
        val = np.concatenate([val[keep], v1, v2])
        err = np.concatenate([err[keep], e1, e2])
        flo = np.concatenate([flo[keep], f1, f2])


def integrate_interval(f, a, b, spec=DEFAULT_SPEC, points=()):
    """Adaptive estimate of the integral of ``f`` over ``[a, b]``.

    ``points`` are optional interior breakpoints (peaks, kinks).
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    g = _as_vectorized(f)
    inner = [p for p in points if a < p < b]
    return _adaptive(g, [a, *inner, b], spec)


def _tail_constant(g, radii, order):
    vals = np.abs(g(np.asarray(radii, dtype=float)))
    return float(np.max(vals * np.abs(np.asarray(radii)) ** order))


def integrate_real_line(f, spec=DEFAULT_SPEC, points=(), center=None, scale=1.0,
                        decay_order=2):
    """Integral of ``f`` over ``[-r_trunc, r_trunc]`` standing in for the real line.

    The caller declares ``|f(E)| = O(|E|**-decay_order)`` with
    ``decay_order >= 2``; the discarded tails are bounded by
    ``2 C / ((decay_order - 1) R**(decay_order - 1))`` with ``C`` measured
    at ``E = +-R`` and returned as ``tail_bound``.
    """
    if decay_order < 2:
        raise ValueError("real-line integrands must decay at least like |E|^-2")
    g = _as_vectorized(f)
    pts = [float(p) for p in points]
    c = float(np.mean(pts)) if center is None and pts else float(center or 0.0)
    w = float(scale)
    R = spec.r_trunc

    def mapped(theta):
        tn = np.tan(theta)
        return g(c + w * tn) * (w * (1.0 + tn * tn))

    lo, hi = np.arctan((-R - c) / w), np.arctan((R - c) / w)
    brk = [lo, hi] + [np.arctan((p - c) / w) for p in pts if -R < p < R]
    res = _adaptive(mapped, brk, spec)
    tail = 2.0 * _tail_constant(g, [-R, R], decay_order) / ((decay_order - 1) * R ** (decay_order - 1))
    if tail > spec.tolerance(res.value):
        raise TailBoundExceeded(
            f"tail bound {tail:.3g} exceeds tolerance at r_trunc={R:.3g}")
    return IntegralResult(res.value, res.error, res.subdivisions, tail)


def integrate_half_line(f, a, spec=DEFAULT_SPEC, points=(), scale=1.0, decay_order=2):
    """Integral of ``f`` over ``[a, r_trunc]`` standing in for ``[a, inf)``.

    The stretch up to the last feature point is integrated directly; only
    the range beyond it goes through the ``tan`` map, so features far from
    ``a`` keep full floating-point resolution.
    """
    if decay_order < 2:
        raise ValueError("half-line integrands must decay at least like |E|^-2")
    g = _as_vectorized(f)
    a = float(a)
    w = float(scale)
    R = spec.r_trunc
    if not R > a:
        raise ValueError("truncation radius must exceed the lower limit")
    inner = sorted(float(p) for p in points if a < p < R)
    b = inner[-1] if inner else a

    def mapped(theta):
        tn = np.tan(theta)
        return g(b + w * tn) * (w * (1.0 + tn * tn))

    res = _adaptive(mapped, [0.0, np.arctan((R - b) / w)], spec)
    value, error, nsub = res.value, res.error, res.subdivisions
    if b > a:
        head = _adaptive(g, [a, *inner], spec)
        value, error, nsub = value + head.value, error + head.error, nsub + head.subdivisions
    tail = _tail_constant(g, [R], decay_order) / ((decay_order - 1) * R ** (decay_order - 1))
    if tail > spec.tolerance(value):
        raise TailBoundExceeded(
            f"tail bound {tail:.3g} exceeds tolerance at r_trunc={R:.3g}")
    return IntegralResult(complex(value), error, nsub, tail)


def integrate_ray(f, origin, direction, spec=DEFAULT_SPEC, scale=1.0):
    """Contour integral of ``f`` along ``origin + s*direction``, ``s`` in ``[0, inf)``.

    ``direction`` should have unit modulus.  Intended for integrands that
    decay exponentially along the ray; the tail beyond ``s = r_trunc`` is
    reported as ``|f| * r_trunc`` at the cut.
    """
    g = _as_vectorized(f)
    z0, d = complex(origin), complex(direction)
    w = float(scale)
    R = spec.r_trunc

    def mapped(theta):
        tn = np.tan(theta)
        return g(z0 + d * (w * tn)) * (d * w * (1.0 + tn * tn))

    res = _adaptive(mapped, [0.0, np.arctan(R / w)], spec)
    tail = float(np.abs(g(np.array([z0 + d * R])))[0]) * R
    return IntegralResult(res.value, res.error, res.subdivisions, tail)


def integrate_segment(f, z0, z1, spec=DEFAULT_SPEC):
    """Contour integral of ``f`` along the straight segment ``z0 -> z1``."""
    g = _as_vectorized(f)
    z0, z1 = complex(z0), complex(z1)
    d = z1 - z0
    res = _adaptive(lambda s: g(z0 + d * s) * d, [0.0, 1.0], spec)
    return res


def cauchy_kernel_integral(f, z, spec=DEFAULT_SPEC, points=(), decay_order=1, sign=1):
    """``sign * (i/2pi) * integral of f(E)/(E - z)`` over the real line.

    ``f`` must decay at least like ``|E|**-decay_order`` (``>= 1``), so the
    kernel integrand decays like ``|E|**-(decay_order + 1)``.
    """
    z = complex(z)
    if abs(z.imag) < spec.pole_floor:
        raise PoleOnAxis(f"|Im z| = {abs(z.imag):.3g} below floor {spec.pole_floor:.3g}")
    g = _as_vectorized(f)
    pts = [z.real, *points]

    def kern(e):
        return g(e) / (e - z)

    spread = max(pts) - min(pts)
    res = integrate_real_line(kern, spec, points=pts, center=float(np.mean(pts)),
                              scale=max(spread, abs(z.imag), 1e-3),
                              decay_order=decay_order + 1)
    fac = sign * 1j / (2 * np.pi)
    return IntegralResult(fac * res.value, abs(fac) * res.error, res.subdivisions,
                          abs(fac) * res.tail_bound)


def _density_poles(rho, poles):
    if poles is not None:
        return [(complex(p), complex(r)) for p, r in poles]
    getter = getattr(rho, "simple_poles", None)
    if getter is None:
        return None
    return [(complex(p), complex(r)) for p, r in getter()]


def oscillatory_fourier_integral(rho, t, spec=DEFAULT_SPEC, lower=0.0, poles=None,
                                 points=(), scale=1.0, full_output=False):
    """Integral of ``rho(E) exp(-i E t)`` over ``[lower, inf)`` (units with hbar = 1).

    ``lower`` may be ``-inf`` for full-line densities.  The rotated-contour
    strategy needs the simple poles of ``rho`` as ``(pole, residue)`` pairs,
    either through ``poles`` or a ``rho.simple_poles()`` method, and requires
    ``rho`` to accept complex arguments and vanish at infinity.  For ``t > 0``
    the path is swung onto the ray ``lower - i s``, picking up the poles in
    the swept lower quadrant; ``t < 0`` mirrors this into the upper plane.
    """
    t = float(t)
    lower = float(lower)
    pole_list = _density_poles(rho, poles)
    span = spec.r_trunc - (lower if np.isfinite(lower) else -spec.r_trunc)
    mode = spec.oscillatory
    if mode == "auto":
        mode = "rotated" if (pole_list is not None and abs(t) * span > spec.rotation_threshold) else "direct"
    if mode == "rotated" and t == 0.0:
        mode = "direct"
    if mode == "rotated":
        if pole_list is None:
            raise StrategyUnavailable("contour rotation needs the analytic poles of the density")
        res = _rotated_fourier(rho, t, lower, pole_list, spec, scale)
    else:
        g = _as_vectorized(rho)

        def integrand(e):
            return g(e) * np.exp(-1j * e * t)

        if np.isfinite(lower):
            res = integrate_half_line(integrand, lower, spec, points=points, scale=scale)
        else:
            res = integrate_real_line(integrand, spec, points=points, scale=scale)
    return res if full_output else complex(res.value)


def _rotated_fourier(rho, t, lower, pole_list, spec, scale):
    g = _as_vectorized(rho)
    down = t > 0
    total = 0j
    for p, r in pole_list:
        if np.isfinite(lower) and p.real <= lower:
            continue
        if down and p.imag < 0:
            total += -2j * np.pi * r * np.exp(-1j * p * t)
        elif not down and p.imag > 0:
            total += 2j * np.pi * r * np.exp(-1j * p * t)
    err = 0.0
    nsub = 0
    tail = 0.0
    if np.isfinite(lower):
        d = -1j if down else 1j
        ray = integrate_ray(lambda z: g(z) * np.exp(-1j * z * t), lower, d, spec,
                            scale=min(float(scale), 1.0 / abs(t)))
        total += ray.value
        err, nsub, tail = ray.error, ray.subdivisions, ray.tail_bound
    return IntegralResult(complex(total), err, nsub, tail)


def fourier_real_line(h, t, spec=DEFAULT_SPEC, singularities=(), scale=1.0):
    """Integral of ``h(E) exp(-i E t)`` over the whole real line, without residues.

    The segment holding every singularity's real part is integrated
    directly; the two tails are swung onto vertical rays (downward for
    ``t > 0``, upward for ``t < 0``), which is exact provided ``h`` is
    analytic and vanishes at infinity in the quadrants beyond the segment.
    """
    t = float(t)
    g = _as_vectorized(h)
    sing = [complex(s) for s in singularities]
    if t == 0.0:
        return integrate_real_line(g, spec, points=[s.real for s in sing], scale=scale,
                                   decay_order=2)
    re = [s.real for s in sing] or [0.0]
    c = 0.5 * (max(re) + min(re))
    half = 0.5 * (max(re) - min(re))
    reach = max([abs(s.imag) for s in sing] + [float(scale)])
    L = half + 4.0 * reach
    a, b = c - L, c + L

    def integrand(z):
        return g(z) * np.exp(-1j * z * t)

    mid = integrate_interval(integrand, a, b, spec, points=sorted(set(re)))
    d = -1j if t > 0 else 1j
    rs = min(reach, 1.0 / abs(t))
    right = integrate_ray(integrand, b, d, spec, scale=rs)
    left = integrate_ray(integrand, a, d, spec, scale=rs)
    value = mid.value + right.value - left.value
    return IntegralResult(complex(value), mid.error + right.error + left.error,
                          mid.subdivisions + right.subdivisions + left.subdivisions,
                          right.tail_bound + left.tail_bound)
