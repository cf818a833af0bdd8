"""First-harmonic (phasor) analysis of the detuned series-series stage.

The two coupled meshes are solved with the rectifier replaced by a
fundamental voltage source of magnitude (2*sqrt(2)/pi)*(Vb + 2*Vd) held
in phase with the receiver current (unity displacement factor, continuous
conduction):

    V1 = Z1*I1 + j*w*M*I2
    0  = j*w*M*I1 + Z2*I2 + Vac2,   Vac2 = V2 * I2/|I2|

Eliminating I1 gives one complex equation in |I2| and its angle; taking
magnitudes yields a real quadratic in |I2|, which is the closed-form path.
A damped fixed-point iteration on the angle is kept as an independent
cross-check. Conduction requires the open-circuit secondary EMF to exceed
the clamp fundamental; otherwise the no-load solution (I2 = 0) applies.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .circuit import CircuitParams, SQUARE_WAVE_FUNDAMENTAL, derive, fundamental_rms
from .errors import DomainError, ResonantShortCircuitError, UndefinedImpedanceError
from .table import SweepTable

_Z_FLOOR = 1e-12          # ohms; below this the primary mesh is a short
_THETA_TOL = 1e-10        # rad, fixed-point convergence
_THETA_DAMPING = 0.5
_THETA_MAX_ITER = 10_000


@dataclass(frozen=True)
class OperatingPoint:
    """Solved phasor state of the converter at one coupling value."""

    i1: complex        # transmitter coil current [Arms], phasor
    i2: complex        # receiver coil current [Arms], phasor
    pout: float        # DC power into the battery [W]
    pin: float         # DC power drawn from the source [W]
    eta: float         # pout/pin, 0 when pin == 0
    zin: complex       # impedance seen by the inverter fundamental [ohm]
    zvs: bool          # inductive input (Im zin > 0) => ZVS-capable
    idc_out: float     # battery DC current [A]

    @property
    def conducting(self) -> bool:
        return abs(self.i2) > 0.0


def _conduction_closed_form(v1, v2, z1, z2, wm):
    """Exact solution of the phase-constrained mesh system.

    Returns (i1, i2) or None when the rectifier cannot conduct.
    """
    e = -1j * wm * v1 / z1            # Thevenin EMF driving the secondary mesh
    if abs(e) <= v2:
        return None                   # clamp never forward-biases
    zeq = z2 + wm * wm / z1           # secondary mesh + reflected primary
    req = zeq.real
    zeq2 = abs(zeq) ** 2
    disc = (req * v2) ** 2 - zeq2 * (v2 * v2 - abs(e) ** 2)
    amp = (-req * v2 + math.sqrt(disc)) / zeq2
    theta = cmath.phase(e) - cmath.phase(amp * zeq + v2)
    i2 = amp * cmath.exp(1j * theta)
    i1 = (v1 - 1j * wm * i2) / z1
    return i1, i2


def _conduction_iterative(v1, v2, z1, z2, wm):
    """Damped fixed point on the receiver-current angle; cross-check path."""
    e = -1j * wm * v1 / z1
    zeq = z2 + wm * wm / z1
    theta = cmath.phase(e) - math.pi / 2.0
    i2 = 0j
    for _ in range(_THETA_MAX_ITER):
        i2 = (e - v2 * cmath.exp(1j * theta)) / zeq
        delta = _wrap_angle(cmath.phase(i2) - theta)
        theta += _THETA_DAMPING * delta
        if abs(delta) < _THETA_TOL:
            break
    else:
        raise DomainError("rectifier phase iteration did not converge")
    # post-solve consistency: current must actually flow into the clamp
    amp = (i2 * cmath.exp(-1j * theta)).real
    if amp <= 0.0 or abs((i2 * cmath.exp(-1j * theta)).imag) > 1e-6 * max(amp, 1.0):
        return None
    i1 = (v1 - 1j * wm * i2) / z1
    return i1, i2


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def solve_operating_point(params: CircuitParams, method: str = "closed-form") -> OperatingPoint:
    """Solve the fundamental-frequency operating point.

    method: "closed-form" (default) or "iterative" (damped angle fixed
    point). Both return the same solution to solver tolerance.

    Raises ResonantShortCircuitError when the unloaded primary mesh has no
    impedance left to limit the current (resonant primary, no resistance,
    zero coupling).
    """
    d = derive(params)
    v1 = d.v1_rms
    v2 = fundamental_rms(params.vb + 2.0 * params.vd)
    z1 = complex(params.r1, d.x1)
    z2 = complex(params.r2, d.x2)
    wm = d.omega_s * d.m

    if abs(z1) < _Z_FLOOR:
        if wm < _Z_FLOOR:
            raise ResonantShortCircuitError(
                "primary series impedance is zero with zero coupling: "
                "series LC resonant short-circuit on the transmitter side"
            )
        # degenerate limit: source impedance vanishes, source fixes I2
        i2 = v1 / (1j * wm)
        theta = cmath.phase(i2) if abs(i2) > 0 else 0.0
        i1 = -(z2 * i2 + v2 * cmath.exp(1j * theta)) / (1j * wm)
        return _assemble(params, v1, i1, i2)

    if wm < _Z_FLOOR:
        return _assemble(params, v1, v1 / z1, 0j)

    solver = _conduction_closed_form if method == "closed-form" else _conduction_iterative
    solution = solver(v1, v2, z1, z2, wm)
    if solution is None:
        # rectifier blocked: open secondary, single-mesh primary
        return _assemble(params, v1, v1 / z1, 0j)
    i1, i2 = solution
    return _assemble(params, v1, i1, i2)


def _assemble(params, v1, i1, i2) -> OperatingPoint:
    idc = SQUARE_WAVE_FUNDAMENTAL * abs(i2)
    pout = params.vb * idc
    pin = (
        pout
        + abs(i1) ** 2 * params.r1
        + abs(i2) ** 2 * params.r2
        + 2.0 * params.vd * idc
    )
    eta = pout / pin if pin > 0.0 else 0.0
    if abs(i1) > 0.0:
        zin = v1 / i1
        zvs = zin.imag > 0.0
    else:
        zin = complex(math.nan, math.nan)
        zvs = False
    return OperatingPoint(
        i1=i1, i2=i2, pout=pout, pin=pin, eta=eta, zin=zin, zvs=zvs, idc_out=idc
    )


def input_impedance(params: CircuitParams, op: OperatingPoint) -> complex:
    """Impedance seen by the inverter fundamental, V1/I1."""
    if abs(op.i1) == 0.0:
        raise UndefinedImpedanceError("input impedance undefined: coil current is zero")
    return derive(params).v1_rms / op.i1


@dataclass(frozen=True)
class LossBudget:
    """Component losses of one operating point; sums to pin - pout."""

    copper_primary: float
    copper_secondary: float
    rectifier: float

    @property
    def total(self) -> float:
        return self.copper_primary + self.copper_secondary + self.rectifier


def loss_budget(params: CircuitParams, op: OperatingPoint) -> LossBudget:
    return LossBudget(
        copper_primary=abs(op.i1) ** 2 * params.r1,
        copper_secondary=abs(op.i2) ** 2 * params.r2,
        rectifier=2.0 * params.vd * op.idc_out,
    )


SWEEP_COLUMNS = ["k", "pout_W", "i1_Arms", "i2_Arms", "eta", "zvs", "status"]


def sweep_coupling(params: CircuitParams, k_grid) -> SweepTable:
    """Operating point vs coupling coefficient; error rows carry status."""
    k_grid = list(k_grid)
    if any(not 0.0 <= k < 1.0 for k in k_grid):
        raise DomainError("sweep coupling values must lie in [0, 1)")
    if any(b < a for a, b in zip(k_grid, k_grid[1:])):
        raise DomainError("sweep coupling values must be ascending")
    table = SweepTable(columns=list(SWEEP_COLUMNS))
    nan = math.nan
    for k in k_grid:
        try:
            op = solve_operating_point(params.with_(k=k))
        except DomainError as e:
            table.append((k, nan, nan, nan, nan, False, f"error: {e}"))
        else:
            table.append(
                (k, op.pout, abs(op.i1), abs(op.i2), op.eta, op.zvs, "ok")
            )
    return table
