"""Command orchestration shared by the CLI and the HTTP service.

Each runner takes a WorkbenchConfig, drives the compute modules, and
returns plain result objects; rendering (text, JSON, CSV, SVG) stays with
the callers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import DerivedParams, derive
from .config import WorkbenchConfig
from .design import DesignResult, design_detuning, misalignment_envelope
from .errors import ConfigError, InfeasibleDesignError
from .fha import LossBudget, OperatingPoint, loss_budget, solve_operating_point, sweep_coupling
from .magnetics import (
    CalibrationResult,
    CouplerSummary,
    calibrate,
    coupler_summary,
)
from .table import SweepTable
from .transient import TransientResult, simulate, waveform_export, zvs_check


@dataclass(frozen=True)
class AnalyzeOutcome:
    op: OperatingPoint
    derived: DerivedParams
    budget: LossBudget


def run_analyze(config: WorkbenchConfig) -> AnalyzeOutcome:
    op = solve_operating_point(config.circuit)
    return AnalyzeOutcome(
        op=op, derived=derive(config.circuit),
        budget=loss_budget(config.circuit, op),
    )


@dataclass(frozen=True)
class SimulateOutcome:
    result: TransientResult
    zvs: bool
    waveform: SweepTable


def run_simulate(config: WorkbenchConfig, last_n_cycles: int = 2) -> SimulateOutcome:
    sim = config.sim
    result = simulate(
        config.circuit,
        max_cycles=sim.max_cycles,
        steps_per_cycle=sim.steps_per_cycle,
        steady_rel_tol=sim.steady_rel_tol,
        keep_cycles=sim.keep_cycles,
    )
    zvs = zvs_check(result) if result.steady else False
    n = min(last_n_cycles, result.stored_cycles, result.cycles_run)
    return SimulateOutcome(result=result, zvs=zvs,
                           waveform=waveform_export(result, n))


def run_sweep_k(config: WorkbenchConfig) -> SweepTable:
    return sweep_coupling(config.circuit, list(config.sweeps.k_values))


def _require_geometry(config: WorkbenchConfig):
    if config.geometry is None:
        raise ConfigError("this command needs a [geometry] section")
    return config.geometry


def _require_design(config: WorkbenchConfig):
    if config.design is None:
        raise ConfigError("this command needs a [design] section")
    return config.design


def run_sweep_misalign(config: WorkbenchConfig) -> SweepTable:
    geometry = _require_geometry(config)
    design = _require_design(config)
    return misalignment_envelope(
        config.circuit, geometry,
        list(config.sweeps.dx_values), list(config.sweeps.dy_values), design,
    )


def run_coupler(config: WorkbenchConfig) -> CouplerSummary:
    return coupler_summary(_require_geometry(config))


def run_design(config: WorkbenchConfig) -> DesignResult:
    design = _require_design(config)
    try:
        return design_detuning(config.circuit, design)
    except InfeasibleDesignError as e:
        return DesignResult(
            c1=config.circuit.c1, f1=derive(config.circuit).f1,
            i1_zero_k=float("inf"), pout_nominal=0.0, zvs_all=False,
            feasible=False, reasons=(str(e),),
        )


def run_calibrate(config: WorkbenchConfig) -> CalibrationResult:
    geometry = _require_geometry(config)
    targets = config.calibration
    anchors = [(geometry.with_(dx=0.0, dy=0.0), targets.aligned_k)]
    if targets.misaligned_k is not None:
        anchors.append((
            geometry.with_(dx=targets.misaligned_dx, dy=targets.misaligned_dy),
            targets.misaligned_k,
        ))
    return calibrate(anchors)
