"""Rational Hardy-class wave functions and numerical membership checks.

A :class:`RationalHardyFunction` is a finite sum ``sum_k c_k / (E - p_k)**m_k``.
Class ``"H2-"`` (boundary values of functions analytic in the lower
half-plane) needs every pole above the real axis; ``"H2+"`` needs every
pole below it.  Closed-form evaluation gives an exact oracle for every
Cauchy-kernel integral in the package.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import EvalAtPole, WrongClass
from .quadrature import DEFAULT_SPEC, cauchy_kernel_integral

H2_MINUS = "H2-"
H2_PLUS = "H2+"
_CLASSES = (H2_MINUS, H2_PLUS)


def flip_class(cls):
    return H2_PLUS if cls == H2_MINUS else H2_MINUS


@dataclass(frozen=True)
class HardyTerm:
    pole: complex
    multiplicity: int
    coeff: complex

    def __post_init__(self):
        if int(self.multiplicity) < 1:
            raise ValueError("multiplicity must be >= 1")
        object.__setattr__(self, "pole", complex(self.pole))
        object.__setattr__(self, "multiplicity", int(self.multiplicity))
        object.__setattr__(self, "coeff", complex(self.coeff))


def _canonical_terms(terms):
    merged = {}
    for t in terms:
        if not isinstance(t, HardyTerm):
            t = HardyTerm(*t)
        key = (t.pole, t.multiplicity)
        merged[key] = merged.get(key, 0j) + t.coeff
    return tuple(HardyTerm(p, m, c) for (p, m), c in sorted(
        merged.items(), key=lambda kv: (kv[0][0].real, kv[0][0].imag, kv[0][1])) if c != 0)


def asymptotic_order(terms, rtol=1e-12):
    """Smallest ``j`` with a non-vanishing ``E**-j`` coefficient at infinity.

    Uses ``1/(E-p)**m = sum_n C(n+m-1, m-1) p**n E**-(m+n)``.  Returns
    ``math.inf`` for the zero function.
    """
    if not terms:
        return math.inf
    top = sum(t.multiplicity for t in terms)
    for j in range(1, top + 1):
        coef = 0j
        scale = 0.0
        for t in terms:
            if j < t.multiplicity:
                continue
            b = math.comb(j - 1, t.multiplicity - 1)
            v = t.coeff * b * t.pole ** (j - t.multiplicity)
            coef += v
            scale += abs(v)
        if scale > 0 and abs(coef) > rtol * scale:
            return j
    return math.inf


@dataclass(frozen=True)
class RationalHardyFunction:
    """``sum_k c_k / (E - p_k)**m_k`` with a declared Hardy class.

    The class is a claim, not enforced at construction, so that
    mislabelled data can be loaded and then rejected by
    :func:`hardy_membership_check`; use :meth:`class_consistent`.
    """

    terms: tuple = ()
    hardy_class: str = H2_MINUS
    decay_order: float = field(default=None, compare=False)

    def __post_init__(self):
        if self.hardy_class not in _CLASSES:
            raise ValueError(f"hardy_class must be one of {_CLASSES}")
        terms = _canonical_terms(self.terms)
        object.__setattr__(self, "terms", terms)
        order = asymptotic_order(terms)
        if self.decay_order is not None and self.decay_order != order:
            raise ValueError(f"declared decay order {self.decay_order} does not match terms ({order})")
        object.__setattr__(self, "decay_order", order)

    # construction helpers
    @classmethod
    def from_poles(cls, poles, scale=1.0, hardy_class=H2_MINUS):
        """Partial-fraction form of ``scale / prod_k (E - p_k)`` (distinct poles)."""
        poles = [complex(p) for p in poles]
        if len(set(poles)) != len(poles):
            raise ValueError("from_poles needs distinct poles")
        terms = []
        for i, p in enumerate(poles):
            denom = 1 + 0j
            for j, q in enumerate(poles):
                if j != i:
                    denom *= p - q
            terms.append(HardyTerm(p, 1, scale / denom))
        return cls(tuple(terms), hardy_class)

    @classmethod
    def single(cls, pole, multiplicity=1, coeff=1.0, hardy_class=H2_MINUS):
        return cls((HardyTerm(pole, multiplicity, coeff),), hardy_class)

    @property
    def poles(self):
        return tuple(t.pole for t in self.terms)

    def class_consistent(self, cls=None):
        cls = cls or self.hardy_class
        if cls == H2_MINUS:
            return all(p.imag > 0 for p in self.poles)
        return all(p.imag < 0 for p in self.poles)

    def require_class(self, cls):
        if self.hardy_class != cls or not self.class_consistent(cls):
            raise WrongClass(f"function is not a valid {cls} element "
                             f"(declared {self.hardy_class}, poles {list(self.poles)})")

    def __call__(self, z):
        """Vectorized evaluation; raises :class:`EvalAtPole` on a pole."""
        z = np.asarray(z, dtype=np.complex128)
        if self.terms:
            hit = np.isin(z, np.array(self.poles))
            if np.any(hit):
                raise EvalAtPole(f"evaluation at pole {z[hit].ravel()[0]}")
        if not self.terms:
            return np.zeros(z.shape, dtype=np.complex128)
        return _kernels.rational_eval(
            z, np.array(self.poles), np.array([t.multiplicity for t in self.terms]),
            np.array([t.coeff for t in self.terms]))

    def conjugate(self):
        """``E -> conj(f(conj E))``: poles reflected, class flipped."""
        return RationalHardyFunction(
            tuple(HardyTerm(t.pole.conjugate(), t.multiplicity, t.coeff.conjugate()) for t in self.terms),
            flip_class(self.hardy_class))

    def __add__(self, other):
        if not isinstance(other, RationalHardyFunction):
            return NotImplemented
        if other.hardy_class != self.hardy_class:
            raise ValueError("cannot add functions of different declared class")
        return RationalHardyFunction(self.terms + other.terms, self.hardy_class)

    def __mul__(self, scalar):
        s = complex(scalar)
        return RationalHardyFunction(
            tuple(HardyTerm(t.pole, t.multiplicity, s * t.coeff) for t in self.terms),
            self.hardy_class)

    __rmul__ = __mul__

    def feature_points(self):
        """Real parts of the poles, used as quadrature breakpoints."""
        return sorted({p.real for p in self.poles})

    def to_dict(self):
        return {
            "class": self.hardy_class,
            "terms": [
                {"re_pole": t.pole.real, "im_pole": t.pole.imag, "multiplicity": t.multiplicity,
                 "re_coeff": t.coeff.real, "im_coeff": t.coeff.imag}
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        terms = doc["terms"] if isinstance(doc, dict) else doc
        hclass = doc.get("class", H2_MINUS) if isinstance(doc, dict) else H2_MINUS
        parsed = []
        for item in terms:
            parsed.append(HardyTerm(
                complex(float(item["re_pole"]), float(item["im_pole"])),
                int(item.get("multiplicity", 1)),
                complex(float(item.get("re_coeff", 0.0)), float(item.get("im_coeff", 0.0)))))
        return cls(tuple(parsed), hclass)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def evaluate_closed_form(f, z):
    """Exact value ``sum_k c_k / (z - p_k)**m_k`` at a single point."""
    z = complex(z)
    return complex(f(np.array([z]))[0])


@dataclass(frozen=True)
class MembershipReport:
    residual: float
    leakage: float
    verdict: str
    probes: tuple
    claimed_class: str = H2_MINUS

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        return {
            "claimed_class": self.claimed_class,
            "residual": self.residual,
            "leakage": self.leakage,
            "verdict": self.verdict,
            "probes": [[z.real, z.imag] for z in self.probes],
        }


def probe_points(f):
    """Eight fixed probes at ``Im z = +-{0.1, 1} * width`` around the pole region."""
    poles = f.poles
    if poles:
        width = max(abs(p.imag) for p in poles) or 1.0
        re = [p.real for p in poles]
        center = 0.5 * (max(re) + min(re))
        span = max(0.5 * (max(re) - min(re)), width)
    else:
        width, center, span = 1.0, 0.0, 1.0
    out = []
    for x in (center - span, center + span):
        for y in (-width, -0.1 * width, 0.1 * width, width):
            out.append(complex(x, y))
    return tuple(out)


def _kernel(f, z, sign, spec):
    if not f.terms:
        return 0j
    return complex(cauchy_kernel_integral(
        f, z, spec, points=f.feature_points(), decay_order=min(f.decay_order, 8), sign=sign).value)


def hardy_membership_check(f, claimed_class=None, tol=1e-8, spec=DEFAULT_SPEC):
    """Test numerically whether ``f`` behaves as a member of ``claimed_class``.

    For ``H2-`` the Cauchy integral ``(i/2pi) int f(E)/(E-z) dE`` must
    reproduce ``f(z)`` below the axis (``residual``) and vanish above it
    (``leakage``).  For ``H2+`` the kernel sign and the half-planes swap.
    Both figures are absolute maxima over the probe set.
    """
    cls = claimed_class or f.hardy_class
    if cls not in _CLASSES:
        raise ValueError(f"unknown class {cls!r}")
    if f.decay_order < 1:
        raise ValueError("membership check needs decay order >= 1")
    sign = 1 if cls == H2_MINUS else -1
    probes = probe_points(f)
    residual = 0.0
    leakage = 0.0
    pole_set = set(f.poles)
    for z in probes:
        inside = (z.imag < 0) if cls == H2_MINUS else (z.imag > 0)
        val = _kernel(f, z, sign, spec)
        if inside:
            if z in pole_set:
                continue
            residual = max(residual, abs(val - evaluate_closed_form(f, z)) if f.terms else 0.0)
        else:
            leakage = max(leakage, abs(val))
    verdict = "pass" if (residual <= tol and leakage <= tol) else "fail"
    return MembershipReport(residual, leakage, verdict, probes, cls)


def titchmarsh_reconstruct(f, z, spec=DEFAULT_SPEC):
    """Value of an ``H2-`` function below the axis from its real-axis data."""
    f.require_class(H2_MINUS)
    z = complex(z)
    if not z.imag < 0:
        raise ValueError("reconstruction point must lie in the lower half-plane")
    if z in set(f.poles):
        raise EvalAtPole(f"{z} is a pole")
    return _kernel(f, z, 1, spec)
