"""Tank parameter closed forms and their invariants."""

import math

import pytest
from hypothesis import given, strategies as st

from ssipt.circuit import (
    derive,
    fundamental_rms,
    mutual_inductance,
    resonant_frequency,
    series_reactance,
    table1_params,
)
from ssipt.errors import DomainError


class TestResonantFrequency:
    def test_primary_tank_reference_value(self):
        # 19.5 uH with 26 nF resonates at 223.5 kHz
        f1 = resonant_frequency(19.5e-6, 26e-9)
        assert f1 == pytest.approx(223.5e3, rel=1e-3)

    def test_secondary_tank_value(self):
        # closed form: 239.9 kHz, i.e. NOT at the 245 kHz switching frequency
        f2 = resonant_frequency(5.5e-6, 80e-9)
        assert f2 == pytest.approx(239.935e3, rel=1e-4)

    def test_quadrupled_inductance_halves_frequency(self):
        f = resonant_frequency(19.5e-6, 26e-9)
        f4 = resonant_frequency(4 * 19.5e-6, 26e-9)
        assert f4 == pytest.approx(f / 2, rel=1e-12)

    @pytest.mark.parametrize("L,C", [(0.0, 1e-9), (1e-6, 0.0), (-1e-6, 1e-9)])
    def test_nonpositive_rejected(self, L, C):
        with pytest.raises(DomainError):
            resonant_frequency(L, C)


class TestMutualInductance:
    def test_reference_value(self):
        assert mutual_inductance(0.38, 19.5e-6, 5.5e-6) == pytest.approx(
            3.9353e-6, rel=1e-4
        )

    def test_zero_coupling(self):
        assert mutual_inductance(0.0, 19.5e-6, 5.5e-6) == 0.0

    def test_equal_inductance_near_unity(self):
        eps = 1e-6
        L = 7e-6
        assert mutual_inductance(1 - eps, L, L) == pytest.approx((1 - eps) * L)

    @pytest.mark.parametrize("k", [-0.1, 1.0, 1.2])
    def test_out_of_range_coupling_rejected(self, k):
        with pytest.raises(DomainError):
            mutual_inductance(k, 1e-6, 1e-6)

    @given(
        k=st.floats(0.01, 0.99),
        l1=st.floats(1e-7, 1e-3),
        l2=st.floats(1e-7, 1e-3),
    )
    def test_symmetric_and_monotone(self, k, l1, l2):
        m = mutual_inductance(k, l1, l2)
        assert m == mutual_inductance(k, l2, l1)
        assert mutual_inductance(k, 2 * l1, l2) > m
        assert mutual_inductance(min(0.999, k * 1.5), l1, l2) > m


class TestSeriesReactance:
    def test_detuned_primary_reactance(self):
        assert series_reactance(19.5e-6, 26e-9, 245e3) == pytest.approx(5.0328, abs=5e-4)

    def test_secondary_residual_reactance(self):
        assert series_reactance(5.5e-6, 80e-9, 245e3) == pytest.approx(0.34644, abs=5e-5)

    def test_vanishes_at_resonance(self):
        x = series_reactance(19.5e-6, 26e-9, 223.5e3)
        # magnitude below 0.5% of the inductive part
        w = 2 * math.pi * 223.5e3
        assert abs(x) < 0.005 * w * 19.5e-6

    def test_zero_exactly_at_resonant_frequency(self):
        f0 = resonant_frequency(19.5e-6, 26e-9)
        assert abs(series_reactance(19.5e-6, 26e-9, f0)) < 1e-9

    @given(f=st.floats(10e3, 2e6))
    def test_strictly_increasing_in_frequency(self, f):
        x_lo = series_reactance(19.5e-6, 26e-9, f)
        x_hi = series_reactance(19.5e-6, 26e-9, f * 1.01)
        assert x_hi > x_lo

    def test_sign_convention_detuned_inductive(self):
        # f1 < fs means positive (inductive) residual reactance
        assert resonant_frequency(19.5e-6, 26e-9) < 245e3
        assert series_reactance(19.5e-6, 26e-9, 245e3) > 0


class TestFundamentalRms:
    def test_inverter_fundamental(self):
        assert fundamental_rms(29.0) == pytest.approx(26.109, abs=1e-3)

    def test_battery_side_fundamental(self):
        assert fundamental_rms(11.1) == pytest.approx(9.9935, abs=1e-3)

    def test_zero(self):
        assert fundamental_rms(0.0) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            fundamental_rms(-1.0)


class TestCircuitParams:
    def test_derived_identities(self):
        p = table1_params()
        d = derive(p)
        assert d.f1 == pytest.approx(1 / (2 * math.pi * math.sqrt(p.l1 * p.c1)))
        assert d.f2 == pytest.approx(1 / (2 * math.pi * math.sqrt(p.l2 * p.c2)))
        assert d.m == pytest.approx(p.k * math.sqrt(p.l1 * p.l2))
        assert d.x1 > 0  # inductive detuning: f1 < fs
        assert d.f1 < p.fs

    def test_invalid_fields_rejected(self):
        with pytest.raises(DomainError):
            table1_params(l1=-1e-6)
        with pytest.raises(DomainError):
            table1_params(k=1.0)
        with pytest.raises(DomainError):
            table1_params(r1=-0.1)
        with pytest.raises(DomainError):
            table1_params(vdc=0.0)

    def test_lossless_copy(self):
        p = table1_params().lossless()
        assert p.r1 == p.r2 == p.vd == 0.0
        assert p.l1 == 19.5e-6
