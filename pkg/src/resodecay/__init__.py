"""Resonance lineshapes, Gamow kets and semigroup decay.

Submodules
----------
quadrature  adaptive Gauss-Kronrod rules, Cauchy kernels, rotated Fourier contours
hardy       rational Hardy-class wave functions and membership checks
smatrix     Breit-Wigner amplitudes, one-pole S-matrices, Laurent coefficients
gamow       Gamow-ket pairings, semigroup evolution, catastrophe probe
decay       survival amplitudes of Lorentzian states, partial decay rates
simulate    Monte Carlo scattering and decay events, binning
fit         lineshape and decay-count fits, width-lifetime ratio
cli         the ``resodecay`` command
"""
from ._kernels import BACKEND
from .decay import ChannelRates, full_line_lorentzian, truncated_lorentzian
from .fit import fit_decay, fit_lineshape, width_lifetime_ratio
from .gamow import GamowKet, evolved_pairing, gamow_pairing
from .hardy import RationalHardyFunction, hardy_membership_check
from .simulate import bin_counts, sample_decays, sample_lineshape
from .smatrix import BackgroundModel, ResonanceParams, SMatrix

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ChannelRates", "full_line_lorentzian", "truncated_lorentzian",
    "fit_decay", "fit_lineshape", "width_lifetime_ratio", "GamowKet",
    "evolved_pairing", "gamow_pairing", "RationalHardyFunction",
    "hardy_membership_check", "bin_counts", "sample_decays", "sample_lineshape",
    "BackgroundModel", "ResonanceParams", "SMatrix",
]
