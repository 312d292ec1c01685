import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from resodecay.errors import BadParams, EvalAtPole, RadiusTooLarge, WrongClass
from resodecay.hardy import RationalHardyFunction as R
from resodecay.smatrix import (
    BackgroundModel,
    PartialWaveChannel,
    ResonanceParams,
    SMatrix,
    born_amplitude,
    bw_amplitude,
    cross_section,
    laurent_coefficients,
    model_digest,
    model_from_dict,
    model_to_dict,
    s_matrix_value,
)

params_st = st.builds(ResonanceParams, st.floats(0.5, 50), st.floats(0.01, 5),
                      st.complex_numbers(min_magnitude=0.1, max_magnitude=5))


class TestAmplitude:
    def test_on_resonance(self):
        p = ResonanceParams(2.0, 0.2)
        assert abs(bw_amplitude(2.0, p) - (-10j)) < 1e-12

    def test_zero_coupling(self):
        assert bw_amplitude(2.0 + 1e-9, ResonanceParams(2.0, 0.2, 0.0)) == 0

    def test_pole(self):
        p = ResonanceParams(2.0, 0.2)
        with pytest.raises(EvalAtPole):
            bw_amplitude(p.pole, p)

    @given(params_st)
    def test_fwhm(self, p):
        peak = abs(bw_amplitude(p.e_r, p)) ** 2
        for e in (p.e_r - p.gamma / 2, p.e_r + p.gamma / 2):
            assert abs(bw_amplitude(e, p)) ** 2 == pytest.approx(0.5 * peak, rel=1e-12)

    def test_invalid_params(self):
        with pytest.raises(BadParams):
            ResonanceParams(2.0, 0.0)


class TestCrossSection:
    def test_peak(self):
        p = ResonanceParams(2.0, 0.2, 1.5)
        assert cross_section(2.0, p, norm=3.0) == pytest.approx(3.0 * 2.25 * 4 / 0.04)

    def test_half_max(self):
        p = ResonanceParams(2.0, 0.2)
        assert cross_section(2.1, p) == pytest.approx(0.5 * cross_section(2.0, p))

    def test_constant_background(self):
        p = ResonanceParams(2.0, 0.2)
        assert cross_section(2.0, p, BackgroundModel((0.5,)), 2.0) == pytest.approx(2 * 100.25)

    def test_rational_background_matches_direct(self):
        p = ResonanceParams(2.0, 0.2)
        bg = BackgroundModel((0.1,), ((5 + 1j, 1, 0.3),))
        e = np.linspace(0, 4, 7)
        want = np.abs(1 / (e - p.pole) + 0.1 + 0.3 / (e - 5 - 1j)) ** 2
        assert np.allclose(cross_section(e, p, bg), want, rtol=1e-13)

    def test_negative_energy(self):
        with pytest.raises(ValueError):
            cross_section(-1.0, ResonanceParams(2.0, 0.2))

    @given(st.floats(0.5, 50), st.floats(0.01, 2))
    def test_peak_location(self, er, g):
        p = ResonanceParams(er, g)
        grid = np.linspace(max(er - 5 * g, 0), er + 5 * g, 2001)
        assert abs(grid[np.argmax(cross_section(grid, p))] - er) <= grid[1] - grid[0]


class TestSMatrix:
    def test_unitarity(self):
        S = SMatrix.unitary(2.0, 0.2)
        e = np.linspace(0, 20, 4001)
        assert np.max(np.abs(np.abs(S(e)) - 1)) <= 1e-12

    def test_zero_at_conjugate_pole(self):
        S = SMatrix.unitary(2.0, 0.2)
        assert abs(S(complex(2.0, 0.1))) < 1e-15

    def test_below_pole(self):
        S = SMatrix.unitary(2.0, 0.2)
        assert abs(S(complex(2.0, -0.2)) - 3) < 1e-12

    def test_inelastic(self):
        p = ResonanceParams(2.0, 0.2)
        ch = PartialWaveChannel(0, "a", "b", elastic=False)
        assert s_matrix_value(2.0, p, channel=ch) == pytest.approx(2j * -10j)

    def test_channel_validation(self):
        with pytest.raises(ValueError):
            PartialWaveChannel(0, "a", "a", elastic=False)
        with pytest.raises(ValueError):
            PartialWaveChannel(-1)


class TestLaurent:
    def test_unitary(self):
        S = SMatrix.unitary(2.0, 0.2)
        lc = laurent_coefficients(S, S.pole)
        assert abs(lc[-1] - (-0.2j)) < 1e-10
        assert abs(lc[0] - 1) < 1e-10
        assert abs(lc[1]) < 1e-10
        assert lc.radius == pytest.approx(0.1)

    def test_pure_pole(self):
        z = 1 - 0.3j
        lc = laurent_coefficients(lambda s: 1 / (s - z), z, orders=(-1, 0))
        assert abs(lc[-1] - 1) < 1e-12 and abs(lc[0]) < 1e-12

    def test_constant(self):
        lc = laurent_coefficients(lambda s: np.full(np.shape(s), 2.5 + 0j), 1 - 1j, orders=(-1, 0))
        assert abs(lc[-1]) < 1e-12 and abs(lc[0] - 2.5) < 1e-12

    def test_completeness(self):
        S = SMatrix.unitary(3.0, 0.4)
        lc = laurent_coefficients(S, S.pole)
        z = S.pole + 0.5 * lc.radius * np.exp(2j * np.pi * np.arange(32) / 32)
        assert np.max(np.abs(S(z) - lc.series(z))) <= 1e-8

    def test_radius_too_large(self):
        z = 2 - 0.1j
        with pytest.raises(RadiusTooLarge):
            laurent_coefficients(lambda s: 1 / (s - z) + 1 / (s - z - 0.15), z, radius=0.2)


class TestBorn:
    pairs = [
        (R.single(1 + 1j, 1), R.single(2 + 0.5j, 1)),
        (R.from_poles([1 + 0.5j, 3 + 1j]), R.single(2 + 2j, 2, 0.5 - 1j)),
        (R.single(0.5 + 1j, 2, 1j), R.from_poles([1.5 + 0.3j, 2.5 + 0.4j], scale=2.0)),
    ]

    @pytest.mark.parametrize("psi,phi", pairs)
    def test_routes_agree(self, psi, phi):
        S = SMatrix.unitary(2.0, 0.2)
        a = born_amplitude(psi, phi, S, "direct")
        b = born_amplitude(psi, phi, S, "pole-extracted")
        assert abs(a - b) <= 1e-6 * abs(a)

    def test_identity_s(self):
        psi, phi = self.pairs[0]
        one = SMatrix(ResonanceParams(2.0, 0.2, 0.0))
        got = born_amplitude(psi, phi, one, "direct")
        # closed form of int_0^inf dE / ((E - p)(E - q))
        p, q = psi.poles[0], phi.poles[0]
        want = (np.log(-q) - np.log(-p)) / (p - q)
        assert abs(got - want) < 1e-10

    def test_zero_state(self):
        psi, _ = self.pairs[0]
        assert born_amplitude(psi, R(()), SMatrix.unitary(2.0, 0.2)) == 0

    def test_wrong_class(self):
        psi, phi = self.pairs[0]
        with pytest.raises(WrongClass):
            born_amplitude(psi.conjugate(), phi, SMatrix.unitary(2.0, 0.2))

    def test_pole_term_reported(self):
        psi, phi = self.pairs[0]
        S = SMatrix.unitary(2.0, 0.2)
        res = born_amplitude(psi, phi, S, "pole-extracted", full_output=True)
        assert abs(res.residue - (-0.2j)) < 1e-10
        assert abs(res.pole_term + res.background - res.value) < 1e-15


def test_model_json_round_trip():
    p = ResonanceParams(2.0, 0.2, 1 - 0.5j)
    bg = BackgroundModel((0.5, 0.1j))
    doc = model_to_dict(p, bg, 3.0)
    p2, bg2, n2 = model_from_dict(doc)
    assert (p2, bg2, n2) == (p, bg, 3.0)
    assert model_digest(p, bg, 3.0) == model_digest(p2, bg2, n2)
    assert not math.isnan(float(int(model_digest(p), 16)))
