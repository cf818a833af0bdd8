"""Config parsing, serialization round trip, CSV/SVG determinism."""

import math
import os

import pytest

from ssipt.config import (
    load_config,
    parse_config,
    serialize_config,
)
from ssipt.errors import ConfigError, WorkbenchError
from ssipt.table import PlotSpec, SweepTable, emit_csv, emit_svg

REPO_ROOT = os.path.join(os.path.dirname(__file__), "..")

MINIMAL = """
[circuit]
vdc_V = 29
vb_V = 11.1
fs_kHz = 245
l1_uH = 19.5
l2_uH = 5.5
c1_nF = 26
c2_nF = 80
k = 0.38
"""


class TestParseConfig:
    def test_shipped_reference_config(self):
        cfg = load_config(os.path.join(REPO_ROOT, "configs", "table1.cfg"))
        c = cfg.circuit
        assert c.l1 == pytest.approx(19.5e-6)
        assert c.c1 == pytest.approx(26e-9)
        assert c.fs == pytest.approx(245e3)
        assert c.k == 0.38
        assert cfg.geometry is not None
        assert cfg.design is not None

    def test_shipped_zero_coupling_config(self):
        cfg = load_config(os.path.join(REPO_ROOT, "configs", "table1-k0.cfg"))
        assert cfg.circuit.k == 0.0

    def test_minimal_circuit_with_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.circuit.r1 == 0.156
        assert cfg.circuit.vd == 0.4
        assert cfg.geometry is None
        assert cfg.sim.max_cycles == 2000
        assert cfg.output.directory == "out"

    def test_empty_text_rejected(self):
        with pytest.raises(ConfigError, match="missing circuit"):
            parse_config("")

    def test_out_of_range_coupling_names_the_invariant(self):
        bad = MINIMAL.replace("k = 0.38", "k = 1.2")
        with pytest.raises(ConfigError, match=r"k.*\[0, 1\)"):
            parse_config(bad)

    def test_unknown_key_reports_line_and_suggestion(self):
        bad = MINIMAL.replace("l1_uH = 19.5", "l1 = 19.5")
        with pytest.raises(ConfigError) as exc:
            parse_config(bad)
        msg = str(exc.value)
        assert "l1" in msg
        assert "l1_uH" in msg     # suggests the unit-suffixed key
        assert "line" in msg

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config(MINIMAL + "\n[thermal]\nx = 1\n")

    def test_missing_required_key(self):
        text = MINIMAL.replace("c1_nF = 26\n", "")
        with pytest.raises(ConfigError, match="c1_nF"):
            parse_config(text)

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(MINIMAL + "k = 0.2\n")

    def test_malformed_line_rejected(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config("[circuit]\nnonsense\n")

    def test_key_outside_section_rejected(self):
        with pytest.raises(ConfigError, match="outside"):
            parse_config("k = 0.38\n")

    def test_negative_physical_value_rejected(self):
        bad = MINIMAL.replace("l1_uH = 19.5", "l1_uH = -19.5")
        with pytest.raises(ConfigError, match="l1"):
            parse_config(bad)

    def test_bad_number_rejected(self):
        bad = MINIMAL.replace("k = 0.38", "k = lots")
        with pytest.raises(ConfigError, match="bad value"):
            parse_config(bad)

    def test_comments_and_blank_lines_ignored(self):
        text = "# leading comment\n\n" + MINIMAL + "\n# trailing\n"
        assert parse_config(text).circuit.k == 0.38


class TestRoundTrip:
    def test_serialize_parse_identity(self):
        cfg = load_config(os.path.join(REPO_ROOT, "configs", "table1.cfg"))
        assert parse_config(serialize_config(cfg)) == cfg

    def test_minimal_round_trip(self):
        cfg = parse_config(MINIMAL)
        assert parse_config(serialize_config(cfg)) == cfg

    def test_sweep_grid_round_trip(self):
        text = MINIMAL + "\n[sweeps]\nk_values = 0, 0.1, 0.26, 0.38\n" \
                         "dx_values_mm = 0, 12.5, 50\n"
        cfg = parse_config(text)
        assert cfg.sweeps.k_values == (0.0, 0.1, 0.26, 0.38)
        assert cfg.sweeps.dx_values == (0.0, 0.0125, 0.05)
        assert parse_config(serialize_config(cfg)) == cfg


def small_table():
    t = SweepTable(columns=["k", "pout_W", "status"])
    t.append((0.0, 0.0, "ok"))
    t.append((0.26, 62.0338135, "ok"))
    t.append((0.38, 42.8720781, "ok"))
    return t


class TestCsv:
    def test_header_plus_rows(self, tmp_path):
        path = tmp_path / "sweep.csv"
        emit_csv(small_table(), path)
        lines = path.read_text().split("\n")
        assert lines[0] == "k,pout_W,status"
        assert len(lines) == 5  # header + 3 rows + trailing newline
        assert lines[-1] == ""

    def test_nine_significant_digits(self, tmp_path):
        path = tmp_path / "sweep.csv"
        emit_csv(small_table(), path)
        assert "62.0338135" in path.read_text()

    def test_byte_identical_on_rerun(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(small_table(), a)
        emit_csv(small_table(), b)
        assert a.read_bytes() == b.read_bytes()

    def test_newline_endings(self, tmp_path):
        path = tmp_path / "sweep.csv"
        emit_csv(small_table(), path)
        assert b"\r" not in path.read_bytes()

    def test_nan_cells_render_as_nan(self, tmp_path):
        t = SweepTable(columns=["k", "pout_W", "status"])
        t.append((0.5, math.nan, "error: boom"))
        path = tmp_path / "err.csv"
        emit_csv(t, path)
        assert "nan" in path.read_text()

    def test_ragged_row_rejected(self):
        t = small_table()
        with pytest.raises(WorkbenchError):
            t.append((1.0,))

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(WorkbenchError):
            emit_csv(small_table(), tmp_path / "no" / "dir" / "x.csv")


class TestSvg:
    def test_polyline_per_column_with_labels(self, tmp_path):
        path = tmp_path / "plot.svg"
        emit_svg(small_table(), PlotSpec(x="k", ys=("pout_W",), title="t"),
                 path)
        text = path.read_text()
        assert text.count("<polyline") == 1
        assert "pout_W" in text
        assert ">k<" in text  # x-axis label

    def test_two_series(self, tmp_path):
        t = SweepTable(columns=["x", "a", "b"])
        for i in range(5):
            t.append((float(i), float(i * i), float(10 - i)))
        path = tmp_path / "two.svg"
        emit_svg(t, PlotSpec(x="x", ys=("a", "b")), path)
        assert path.read_text().count("<polyline") == 2

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        spec = PlotSpec(x="k", ys=("pout_W",))
        emit_svg(small_table(), spec, a)
        emit_svg(small_table(), spec, b)
        assert a.read_bytes() == b.read_bytes()

    def test_nonfinite_rows_skipped(self, tmp_path):
        t = SweepTable(columns=["x", "y"])
        t.append((0.0, 1.0))
        t.append((1.0, math.nan))
        t.append((2.0, 3.0))
        path = tmp_path / "gap.svg"
        emit_svg(t, PlotSpec(x="x", ys=("y",)), path)
        text = path.read_text()
        # only the two finite points survive
        assert text.count(",") >= 1

    def test_empty_plot_rejected(self, tmp_path):
        t = SweepTable(columns=["x", "y"])
        t.append((math.nan, math.nan))
        with pytest.raises(WorkbenchError):
            emit_svg(t, PlotSpec(x="x", ys=("y",)), tmp_path / "e.svg")
