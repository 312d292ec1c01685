"""A fixed set of rational wave functions and resonance poles.

Used by ``gamow-verify`` and by the test-suite as a reproducible battery
for the Gamow-ket checks.  Every function is an ``H2-`` element (all
poles in the upper half-plane).
"""
from .hardy import HardyTerm, RationalHardyFunction


def standard_wave_functions():
    """Five named test functions with decay orders 1, 2, 2, 3 and 2."""
    R = RationalHardyFunction
    return {
        "simple": R.single(2.0 + 1.0j),
        "double_pole": R.single(2.0 + 0.7j, 2, 0.5 - 0.2j),
        "two_poles": R.from_poles([1.0 + 0.5j, 3.0 + 0.8j]),
        "three_poles": R.from_poles([1.5 + 0.4j, 2.5 + 0.6j, 2.0 + 1.2j], scale=1.0 + 1.0j),
        "mixed": R((HardyTerm(0.5 + 2.0j, 3, 2.0), HardyTerm(2.0 + 0.3j, 2, 1.0 - 1.0j))),
    }


def standard_poles():
    """Three resonance poles ``z_R = E_R - i Gamma/2``."""
    return {
        "narrow": complex(2.0, -0.05),
        "canonical": complex(2.0, -0.1),
        "broad": complex(1.0, -0.4),
    }


def pole_separation(g, z_r):
    """Distance from ``z_R`` to the nearest pole of ``g`` in units of Gamma."""
    gamma = -2.0 * z_r.imag
    return min(abs(p - z_r) for p in g.poles) / gamma
