"""Detuning design search: closed-form inversion and feasibility gating.

Expected capacitor/frequency values come from evaluating the inversion
formulas directly: V1 = 26.109 V, ws*L1 = 30.018 ohm at 245 kHz, so a
4.5 A cap needs X1 = 5.802 ohm giving C1 = 26.83 nF, f1 = 220.05 kHz;
a 5.19 A cap recovers the reference design (26.0 nF, 223.5 kHz).
"""

import math

import pytest

from ssipt.circuit import table1_params
from ssipt.design import (
    DesignSpec,
    design_detuning,
    evaluate_design,
    min_detuning_for_current_cap,
    misalignment_envelope,
)
from ssipt.errors import DomainError, InfeasibleDesignError
from ssipt.fha import solve_operating_point
from ssipt.magnetics import default_geometry


def spec_with(**overrides):
    base = dict(i1_max_zero_k=5.2, target_pout=40.0, k_nominal=0.38,
                k_min=0.26, k_max=0.38, zvs_required=True)
    base.update(overrides)
    return DesignSpec(**base)


class TestMinDetuning:
    def test_measured_current_cap_inversion(self):
        c1, f1 = min_detuning_for_current_cap(table1_params().lossless(), 4.5)
        assert c1 == pytest.approx(26.83e-9, rel=1e-3)
        assert f1 == pytest.approx(220.05e3, rel=1e-3)

    def test_reference_design_round_trip(self):
        # capping at the reference design's own current recovers its C1
        c1, f1 = min_detuning_for_current_cap(table1_params().lossless(), 5.19)
        assert c1 == pytest.approx(26.0e-9, rel=2e-3)
        assert f1 == pytest.approx(223.5e3, rel=1e-3)

    def test_uncapped_limit_recovers_resonance(self):
        p = table1_params().lossless()
        c1, f1 = min_detuning_for_current_cap(p, 1e9)
        assert f1 == pytest.approx(p.fs, rel=1e-6)

    def test_impossible_cap_rejected(self):
        with pytest.raises(InfeasibleDesignError):
            min_detuning_for_current_cap(table1_params().lossless(), 0.5)

    def test_nonpositive_cap_rejected(self):
        with pytest.raises(DomainError):
            min_detuning_for_current_cap(table1_params(), 0.0)

    def test_tighter_cap_means_lower_resonance(self):
        p = table1_params().lossless()
        f1s = [min_detuning_for_current_cap(p, cap)[1]
               for cap in (6.0, 5.0, 4.0, 3.0)]
        assert all(a > b for a, b in zip(f1s, f1s[1:]))

    def test_current_round_trip_within_gate(self):
        # feeding the chosen C1 back through the phasor model reproduces
        # the cap current to 0.1%
        p = table1_params().lossless()
        for cap in (3.0, 4.5, 5.19):
            c1, _ = min_detuning_for_current_cap(p, cap)
            op = solve_operating_point(p.with_(c1=c1, k=0.0))
            assert abs(op.i1) == pytest.approx(cap, rel=1e-3)


class TestEvaluateDesign:
    def test_reference_design_feasible_at_model_predictions(self):
        result = evaluate_design(table1_params(), spec_with())
        assert result.feasible
        assert result.reasons == ()
        assert result.zvs_all
        assert result.pout_nominal == pytest.approx(41.77, abs=0.1)
        assert result.i1_zero_k == pytest.approx(5.185, abs=0.01)

    def test_tight_current_cap_infeasible(self):
        result = evaluate_design(table1_params(), spec_with(i1_max_zero_k=1.0))
        assert not result.feasible
        assert any("exceeds cap" in r for r in result.reasons)

    def test_point_coupling_range(self):
        result = evaluate_design(
            table1_params(),
            spec_with(k_min=0.38, k_nominal=0.38, k_max=0.38),
        )
        op = solve_operating_point(table1_params())
        assert result.pout_nominal == pytest.approx(op.pout, rel=1e-12)
        assert result.feasible

    def test_power_band_violation(self):
        result = evaluate_design(table1_params(), spec_with(target_pout=200.0))
        assert not result.feasible
        assert any("outside" in r for r in result.reasons)

    def test_zvs_requirement_can_fail(self):
        # a resonant primary has no inductive input at zero coupling
        w = 2 * math.pi * 245e3
        p = table1_params(c1=1 / (w**2 * 19.5e-6))
        result = evaluate_design(p, spec_with(i1_max_zero_k=1e9,
                                              target_pout=48.0))
        assert not result.zvs_all
        assert not result.feasible

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            spec_with(k_min=0.5)   # above k_nominal
        with pytest.raises(DomainError):
            spec_with(target_pout=-1.0)


class TestDesignDetuning:
    def test_full_design_flow_reproduces_reference(self):
        # a 5.2 A cap at 40 W target lands within a whisker of the
        # reference 26 nF / 223.5 kHz detuning, and is feasible
        result = design_detuning(table1_params(), spec_with())
        assert result.feasible
        assert result.c1 == pytest.approx(26.0e-9, rel=0.01)
        assert result.f1 == pytest.approx(223.5e3, rel=0.005)

    def test_infeasible_cap_propagates(self):
        with pytest.raises(InfeasibleDesignError):
            design_detuning(table1_params(), spec_with(i1_max_zero_k=0.5))


@pytest.fixture(scope="module")
def envelope():
    params = table1_params()
    spec = spec_with()
    return misalignment_envelope(
        params, default_geometry(), [0.0, 0.010, 1.0], [0.0, 0.050], spec
    ), params, spec


class TestMisalignmentEnvelope:
    def test_aligned_cell_feasible(self, envelope):
        table, _, _ = envelope
        row = table.rows[0]
        cols = {c: row[i] for i, c in enumerate(table.columns)}
        assert cols["k"] == pytest.approx(0.38, abs=0.01)
        assert cols["feasible"]
        assert cols["zvs"]

    def test_misaligned_cell_near_measured_coupling(self, envelope):
        table, params, _ = envelope
        for row in table.rows:
            cols = {c: row[i] for i, c in enumerate(table.columns)}
            if cols["dx_m"] == 0.010 and cols["dy_m"] == 0.050:
                assert 0.21 <= cols["k"] <= 0.31
                op = solve_operating_point(params.with_(k=cols["k"]))
                assert cols["pout_W"] == pytest.approx(op.pout, rel=1e-9)
                return
        pytest.fail("misaligned cell missing")

    def test_far_field_cell(self, envelope):
        table, _, spec = envelope
        for row in table.rows:
            cols = {c: row[i] for i, c in enumerate(table.columns)}
            if cols["dx_m"] == 1.0:
                assert cols["k"] < 0.01
                assert cols["pout_W"] == 0.0
                assert cols["i1_Arms"] <= spec.i1_max_zero_k
                return
        pytest.fail("far-field cell missing")

    def test_feasible_rows_reevaluate_feasible(self, envelope):
        from dataclasses import replace

        table, params, spec = envelope
        for row in table.rows:
            cols = {c: row[i] for i, c in enumerate(table.columns)}
            if cols["status"] != "ok" or not cols["feasible"]:
                continue
            point = replace(spec, k_nominal=cols["k"], k_min=cols["k"],
                            k_max=cols["k"])
            assert evaluate_design(params, point).feasible

    def test_row_count_and_columns(self, envelope):
        table, _, _ = envelope
        assert len(table.rows) == 6
        assert table.columns == ["dx_m", "dy_m", "k", "pout_W", "i1_Arms",
                                 "zvs", "feasible", "status"]
