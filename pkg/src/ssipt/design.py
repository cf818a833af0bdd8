"""Detuning design: cap the zero-coupling current, check the power band.

The one-degree-of-freedom problem is analytically invertible: the
zero-coupling transmitter current is V1/|R1 + jX1|, so a current cap
I1max fixes the required residual reactance

    X1req = sqrt((V1/I1max)^2 - R1^2),
    C1 = 1/(ws*(ws*L1 - X1req)),

always on the inductive side (f1 < fs) so the input stays ZVS-capable.
Capacitive detuning is rejected as infeasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit import CircuitParams, fundamental_rms, resonant_frequency
from .errors import DomainError, InfeasibleDesignError
from .fha import solve_operating_point
from .magnetics import CouplerGeometry, coupling_coefficient
from .table import SweepTable


@dataclass(frozen=True)
class DesignSpec:
    """Constraints a detuned design must satisfy."""

    i1_max_zero_k: float      # transmitter current cap at k = 0 [Arms]
    target_pout: float        # nominal delivered power [W]
    k_nominal: float
    k_min: float
    k_max: float
    zvs_required: bool = True
    power_band: tuple = (0.9, 1.5)   # acceptable pout/target window

    def __post_init__(self):
        if self.i1_max_zero_k <= 0:
            raise DomainError("current cap must be positive")
        if self.target_pout <= 0:
            raise DomainError("target power must be positive")
        if not 0.0 <= self.k_min <= self.k_nominal <= self.k_max < 1.0:
            raise DomainError("need 0 <= k_min <= k_nominal <= k_max < 1")
        lo, hi = self.power_band
        if not 0.0 < lo <= hi:
            raise DomainError("power band must be 0 < low <= high")


@dataclass(frozen=True)
class DesignResult:
    c1: float                # chosen primary capacitor [F]
    f1: float                # resulting primary resonance [Hz]
    i1_zero_k: float         # predicted cap-point current [Arms]
    pout_nominal: float      # predicted power at k_nominal [W]
    zvs_all: bool            # ZVS flag held across the coupling range
    feasible: bool
    reasons: tuple           # violated constraints, empty when feasible


def min_detuning_for_current_cap(params: CircuitParams, i1_max: float):
    """Smallest inductive detuning that caps the zero-coupling current.

    Returns (c1, f1). Infeasible when the cap demands more reactance
    than the coil can supply at fs (the capacitor would vanish or flip
    the tank to the capacitive side).
    """
    if i1_max <= 0:
        raise DomainError("current cap must be positive")
    v1 = fundamental_rms(params.vdc)
    if v1 / i1_max <= params.r1:
        # resistance alone already limits the current: no detuning needed,
        # but "no detuning" means a resonant primary, which this design
        # style rejects; report the resonant limit
        x1_req = 0.0
    else:
        x1_req = math.sqrt((v1 / i1_max) ** 2 - params.r1**2)
    ws = 2.0 * math.pi * params.fs
    if x1_req >= ws * params.l1:
        raise InfeasibleDesignError(
            f"current cap {i1_max} A needs X1 = {x1_req:.2f} ohm, beyond the "
            f"coil's {ws * params.l1:.2f} ohm at fs: no positive capacitor exists"
        )
    c1 = 1.0 / (ws * (ws * params.l1 - x1_req))
    return c1, resonant_frequency(params.l1, c1)


def evaluate_design(params: CircuitParams, spec: DesignSpec,
                    k_grid_points: int = 7) -> DesignResult:
    """Judge the given tank values against the design constraints.

    Solves the fundamental model at k = 0, k_nominal and a grid across
    [k_min, k_max]; feasible iff the zero-coupling current respects the
    cap, nominal power lands inside the power band, and (if required)
    the ZVS flag holds across the whole grid.
    """
    reasons = []
    try:
        op0 = solve_operating_point(params.with_(k=0.0))
    except DomainError as e:
        return DesignResult(
            c1=params.c1, f1=resonant_frequency(params.l1, params.c1),
            i1_zero_k=math.inf, pout_nominal=0.0, zvs_all=False,
            feasible=False, reasons=(f"zero-coupling solve failed: {e}",),
        )
    i1_zero = abs(op0.i1)
    # a cap-derived design lands exactly on the cap; don't let the last
    # float ulp flip the verdict
    if i1_zero > spec.i1_max_zero_k * (1.0 + 1e-9):
        reasons.append(
            f"zero-coupling current {i1_zero:.3f} A exceeds cap "
            f"{spec.i1_max_zero_k:.3f} A"
        )
    op_nom = solve_operating_point(params.with_(k=spec.k_nominal))
    lo, hi = spec.power_band
    if not lo * spec.target_pout <= op_nom.pout <= hi * spec.target_pout:
        reasons.append(
            f"nominal power {op_nom.pout:.2f} W outside "
            f"[{lo * spec.target_pout:.2f}, {hi * spec.target_pout:.2f}] W"
        )
    zvs_all = op0.zvs and op_nom.zvs
    if spec.k_max > spec.k_min:
        n = max(2, k_grid_points)
        grid = [spec.k_min + (spec.k_max - spec.k_min) * i / (n - 1)
                for i in range(n)]
    else:
        grid = [spec.k_min]
    for k in grid:
        if not solve_operating_point(params.with_(k=k)).zvs:
            zvs_all = False
            break
    if spec.zvs_required and not zvs_all:
        reasons.append("ZVS lost somewhere in the coupling range")
    return DesignResult(
        c1=params.c1,
        f1=resonant_frequency(params.l1, params.c1),
        i1_zero_k=i1_zero,
        pout_nominal=op_nom.pout,
        zvs_all=zvs_all,
        feasible=not reasons,
        reasons=tuple(reasons),
    )


def design_detuning(params: CircuitParams, spec: DesignSpec) -> DesignResult:
    """Pick C1 from the current cap, then evaluate the full spec."""
    c1, _ = min_detuning_for_current_cap(params, spec.i1_max_zero_k)
    return evaluate_design(params.with_(c1=c1), spec)


ENVELOPE_COLUMNS = ["dx_m", "dy_m", "k", "pout_W", "i1_Arms", "zvs",
                    "feasible", "status"]


def misalignment_envelope(params: CircuitParams, geometry: CouplerGeometry,
                          dx_grid, dy_grid, spec: DesignSpec) -> SweepTable:
    """Feasibility map over the misalignment plane.

    For each (dx, dy): coupling from the calibrated coupler model, the
    electrical operating point, and the design constraints collapsed to
    that single coupling value (so a feasible row is exactly a design
    that evaluate_design accepts with a point coupling range).
    """
    from dataclasses import replace

    table = SweepTable(columns=list(ENVELOPE_COLUMNS))
    nan = math.nan
    for dy in dy_grid:
        for dx in dx_grid:
            try:
                k = coupling_coefficient(geometry.with_(dx=dx, dy=dy))
                op = solve_operating_point(params.with_(k=k))
                point_spec = replace(spec, k_nominal=k, k_min=k, k_max=k)
                verdict = evaluate_design(params, point_spec)
            except DomainError as e:
                table.append((dx, dy, nan, nan, nan, False, False,
                              f"error: {e}"))
                continue
            table.append((dx, dy, k, op.pout, abs(op.i1), op.zvs,
                          verdict.feasible, "ok"))
    return table
