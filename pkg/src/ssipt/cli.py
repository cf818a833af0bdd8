"""Command-line client for the workbench.

Thin by design: every command loads a config file, builds the same
request the HTTP service accepts, runs it (in-process by default, or
against a remote service with --server), and renders the result as text
plus CSV/SVG artifacts.

Exit codes: 0 success, 1 domain or infeasibility failure, 2 config or
usage errors. SSIPT_OUT overrides the config's output directory; --out
overrides both.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from .config import WorkbenchConfig, load_config
from .errors import ConfigError, WorkbenchError
from .table import PlotSpec, SweepTable, emit_csv, emit_svg

COMMANDS = ("analyze", "simulate", "sweep-k", "sweep-misalign", "coupler",
            "design", "calibrate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssipt",
        description="Detuned series-series IPT design and analysis workbench",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="workbench config file")
    parser.add_argument("--out", help="output directory for CSV/SVG artifacts")
    parser.add_argument("--server",
                        help="run against a workbench service (base URL) "
                             "instead of in-process")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    out_dir = args.out or os.environ.get("SSIPT_OUT") or config.output.directory
    try:
        if args.server:
            return _run_remote(args.command, config, args.server, out_dir)
        return _run_local(args.command, config, out_dir)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except WorkbenchError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def _fmt(v, nd=4):
    return f"{v:.{nd}g}"


def _artifact_path(config, out_dir, name):
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def _write_artifacts(config, out_dir, name, table, plot: PlotSpec | None):
    written = []
    if config.output.csv:
        path = _artifact_path(config, out_dir, f"{name}.csv")
        emit_csv(table, path)
        written.append(path)
    if config.output.svg and plot is not None:
        path = _artifact_path(config, out_dir, f"{name}.svg")
        emit_svg(table, plot, path)
        written.append(path)
    for path in written:
        print(f"wrote {path}")


# ---------------------------------------------------------------------------
# in-process execution


def _run_local(command: str, config: WorkbenchConfig, out_dir: str) -> int:
    from . import runner

    if command == "analyze":
        out = runner.run_analyze(config)
        _print_analyze(out)
        return 0
    if command == "simulate":
        out = runner.run_simulate(config)
        _print_simulate(out.result, out.zvs)
        _write_artifacts(config, out_dir, "waveform", out.waveform,
                         PlotSpec(x="t_s", ys=("v_bridge_V", "i_l1_A"),
                                  title="switching waveforms"))
        return 0
    if command == "sweep-k":
        table = runner.run_sweep_k(config)
        _print_table_summary(table)
        _write_artifacts(config, out_dir, "sweep_k", table,
                         PlotSpec(x="k", ys=("pout_W", "i1_Arms"),
                                  title="output power vs coupling"))
        return 0
    if command == "sweep-misalign":
        table = runner.run_sweep_misalign(config)
        _print_table_summary(table)
        _write_artifacts(config, out_dir, "misalignment", table,
                         PlotSpec(x="dx_m", ys=("k",),
                                  title="coupling vs misalignment"))
        return 0
    if command == "coupler":
        s = runner.run_coupler(config)
        _print_coupler(s)
        return 0
    if command == "design":
        result = runner.run_design(config)
        _print_design(result)
        return 0 if result.feasible else 1
    if command == "calibrate":
        result = runner.run_calibrate(config)
        _print_calibration(result)
        return 0
    raise ConfigError(f"unknown command {command}")  # unreachable via argparse


def _print_analyze(out):
    op, d, b = out.op, out.derived, out.budget
    print("operating point")
    print(f"  f1          : {_fmt(d.f1 / 1e3)} kHz")
    print(f"  f2          : {_fmt(d.f2 / 1e3)} kHz")
    print(f"  X1 / X2     : {_fmt(d.x1)} / {_fmt(d.x2)} ohm")
    print(f"  M           : {_fmt(d.m * 1e6)} uH")
    print(f"  |I1| / |I2| : {_fmt(abs(op.i1))} / {_fmt(abs(op.i2))} Arms")
    print(f"  Pout / Pin  : {_fmt(op.pout)} / {_fmt(op.pin)} W")
    print(f"  efficiency  : {_fmt(op.eta * 100)} %")
    zin = "n/a" if math.isnan(op.zin.real) else \
        f"{_fmt(op.zin.real)} {'+' if op.zin.imag >= 0 else '-'} j{_fmt(abs(op.zin.imag))}"
    print(f"  Zin         : {zin} ohm")
    print(f"  ZVS capable : {'yes' if op.zvs else 'no'}")
    print(f"  losses      : copper1 {_fmt(b.copper_primary)} W, "
          f"copper2 {_fmt(b.copper_secondary)} W, "
          f"rectifier {_fmt(b.rectifier)} W")


def _print_simulate(result, zvs):
    m = result.metrics
    print("transient run")
    print(f"  steady      : {'yes' if result.steady else 'no'} "
          f"({result.cycles_run} cycles)")
    print(f"  I1 / I2 rms : {_fmt(m.i1_rms)} / {_fmt(m.i2_rms)} Arms")
    print(f"  Pout / Pin  : {_fmt(m.pout)} / {_fmt(m.pin)} W")
    print(f"  loss        : {_fmt(m.ploss)} W")
    print(f"  efficiency  : {_fmt(m.eta * 100)} %")
    print(f"  ZVS margin  : {_fmt(m.zvs_margin_a)} A -> "
          f"{'ZVS' if zvs else 'no ZVS'}")
    print(f"  THD(i1)     : {_fmt(m.thd_i1 * 100)} %")


def _print_table_summary(table: SweepTable):
    ok = sum(1 for r in table.rows if r[-1] == "ok")
    print(f"sweep finished: {len(table.rows)} rows, {ok} ok")


def _print_coupler(s):
    print("coupler")
    print(f"  k           : {_fmt(s.k)}")
    print(f"  L1 / L2     : {_fmt(s.l1 * 1e6)} / {_fmt(s.l2 * 1e6)} uH")
    print(f"  M           : {_fmt(s.m * 1e6)} uH")
    print(f"  air core    : L1a {_fmt(s.l1_air * 1e6)} uH, "
          f"L2a {_fmt(s.l2_air * 1e6)} uH, Ma {_fmt(s.m_air * 1e9)} nH")


def _print_design(result):
    print("design result")
    print(f"  C1          : {_fmt(result.c1 * 1e9)} nF")
    print(f"  f1          : {_fmt(result.f1 / 1e3)} kHz")
    print(f"  I1 at k=0   : {_fmt(result.i1_zero_k)} Arms")
    print(f"  Pout nominal: {_fmt(result.pout_nominal)} W")
    print(f"  ZVS range   : {'held' if result.zvs_all else 'lost'}")
    print(f"  feasible    : {'yes' if result.feasible else 'no'}")
    for reason in result.reasons:
        print(f"    - {reason}")


def _print_calibration(result):
    print("calibration")
    print(f"  mu_eff_tx   : {_fmt(result.mu_eff_tx, 6)}")
    print(f"  mu_eff_rx   : {_fmt(result.mu_eff_rx, 6)}")
    print(f"  residual    : {result.residual:.3e}")
    print(f"  iterations  : {result.iterations}")
    print(f"  anchor errs : {', '.join(f'{e:+.4f}' for e in result.anchor_errors)}")


# ---------------------------------------------------------------------------
# remote execution against a running service


def _post(server: str, path: str, payload: dict) -> dict:
    import httpx

    response = httpx.post(server.rstrip("/") + path, json=payload,
                          timeout=600.0)
    if response.status_code == 400:
        raise WorkbenchError(response.json().get("detail", "domain error"))
    if response.status_code == 422:
        raise ConfigError(f"service rejected the request: {response.text}")
    response.raise_for_status()
    return response.json()


def _table_from_json(data: dict) -> SweepTable:
    rows = [tuple(math.nan if v is None else v for v in row)
            for row in data["rows"]]
    return SweepTable(columns=list(data["columns"]), rows=rows)


def _run_remote(command: str, config: WorkbenchConfig, server: str,
                out_dir: str) -> int:
    from .service.schemas import CircuitModel, GeometryModel, SimOptionsModel

    circuit = CircuitModel.from_params(config.circuit).model_dump()
    if command == "analyze":
        data = _post(server, "/analyze", {"circuit": circuit})
        op = data["operating_point"]
        print("operating point (remote)")
        print(f"  |I1| / |I2| : {_fmt(op['i1_mag'])} / {_fmt(op['i2_mag'])} Arms")
        print(f"  Pout / Pin  : {_fmt(op['pout'])} / {_fmt(op['pin'])} W")
        print(f"  efficiency  : {_fmt(op['eta'] * 100)} %")
        print(f"  ZVS capable : {'yes' if op['zvs'] else 'no'}")
        return 0
    if command == "simulate":
        sim = SimOptionsModel(
            max_cycles=config.sim.max_cycles,
            steps_per_cycle=config.sim.steps_per_cycle,
            steady_rel_tol=config.sim.steady_rel_tol,
            keep_cycles=config.sim.keep_cycles,
        ).model_dump()
        data = _post(server, "/simulate",
                     {"circuit": circuit, "sim": sim, "last_n_cycles": 2})
        m = data["metrics"]
        print("transient run (remote)")
        print(f"  steady      : {'yes' if data['steady'] else 'no'} "
              f"({data['cycles_run']} cycles)")
        print(f"  Pout        : {_fmt(m['pout'])} W, eta {_fmt(m['eta'] * 100)} %")
        print(f"  ZVS         : {'yes' if data['zvs'] else 'no'}")
        if data.get("waveform"):
            table = _table_from_json(data["waveform"])
            _write_artifacts(config, out_dir, "waveform", table,
                             PlotSpec(x="t_s", ys=("v_bridge_V", "i_l1_A"),
                                      title="switching waveforms"))
        return 0
    if command == "sweep-k":
        data = _post(server, "/sweep/coupling",
                     {"circuit": circuit,
                      "k_values": list(config.sweeps.k_values)})
        table = _table_from_json(data)
        _print_table_summary(table)
        _write_artifacts(config, out_dir, "sweep_k", table,
                         PlotSpec(x="k", ys=("pout_W", "i1_Arms"),
                                  title="output power vs coupling"))
        return 0
    if command == "sweep-misalign":
        geometry = _require(config.geometry, "[geometry]")
        design = _require(config.design, "[design]")
        data = _post(server, "/sweep/misalignment", {
            "circuit": circuit,
            "geometry": GeometryModel.from_geometry(geometry).model_dump(),
            "design": _design_payload(design),
            "dx_values": list(config.sweeps.dx_values),
            "dy_values": list(config.sweeps.dy_values),
        })
        table = _table_from_json(data)
        _print_table_summary(table)
        _write_artifacts(config, out_dir, "misalignment", table,
                         PlotSpec(x="dx_m", ys=("k",),
                                  title="coupling vs misalignment"))
        return 0
    if command == "coupler":
        geometry = _require(config.geometry, "[geometry]")
        data = _post(server, "/coupler", {
            "geometry": GeometryModel.from_geometry(geometry).model_dump()})
        print("coupler (remote)")
        print(f"  k           : {_fmt(data['k'])}")
        print(f"  L1 / L2     : {_fmt(data['l1'] * 1e6)} / "
              f"{_fmt(data['l2'] * 1e6)} uH")
        return 0
    if command == "design":
        design = _require(config.design, "[design]")
        data = _post(server, "/design",
                     {"circuit": circuit, "design": _design_payload(design)})
        print("design result (remote)")
        print(f"  C1          : {_fmt(data['c1'] * 1e9)} nF")
        print(f"  feasible    : {'yes' if data['feasible'] else 'no'}")
        for reason in data["reasons"]:
            print(f"    - {reason}")
        return 0 if data["feasible"] else 1
    if command == "calibrate":
        geometry = _require(config.geometry, "[geometry]")
        targets = config.calibration
        anchors = [{"dx": 0.0, "dy": 0.0, "k_target": targets.aligned_k}]
        if targets.misaligned_k is not None:
            anchors.append({"dx": targets.misaligned_dx,
                            "dy": targets.misaligned_dy,
                            "k_target": targets.misaligned_k})
        data = _post(server, "/calibrate", {
            "geometry": GeometryModel.from_geometry(geometry).model_dump(),
            "anchors": anchors,
        })
        print("calibration (remote)")
        print(f"  mu_eff_tx   : {_fmt(data['mu_eff_tx'], 6)}")
        print(f"  mu_eff_rx   : {_fmt(data['mu_eff_rx'], 6)}")
        print(f"  residual    : {data['residual']:.3e}")
        return 0
    raise ConfigError(f"unknown command {command}")  # unreachable via argparse


def _design_payload(design) -> dict:
    return {
        "i1_max_zero_k": design.i1_max_zero_k,
        "target_pout": design.target_pout,
        "k_nominal": design.k_nominal,
        "k_min": design.k_min,
        "k_max": design.k_max,
        "zvs_required": design.zvs_required,
        "power_band": list(design.power_band),
    }


def _require(value, what):
    if value is None:
        raise ConfigError(f"this command needs a {what} section")
    return value


if __name__ == "__main__":
    sys.exit(main())
