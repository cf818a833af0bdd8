"""Electrical domain types and closed-form tank parameter relations.

All quantities are SI base units (hertz, henries, farads, volts, ohms).
Display formatting to kHz / uH / nF is the config layer's job.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError

# rms fundamental of a +/-V square wave is (2*sqrt(2)/pi)*V
SQUARE_WAVE_FUNDAMENTAL = 2.0 * math.sqrt(2.0) / math.pi


def resonant_frequency(L: float, C: float) -> float:
    """Series-tank resonant frequency 1/(2*pi*sqrt(L*C)) in Hz."""
    if L <= 0 or C <= 0:
        raise DomainError(f"resonant_frequency needs L, C > 0 (got L={L}, C={C})")
    return 1.0 / (2.0 * math.pi * math.sqrt(L * C))


def mutual_inductance(k: float, L1: float, L2: float) -> float:
    """Mutual inductance k*sqrt(L1*L2) in henries."""
    if not 0.0 <= k < 1.0:
        raise DomainError(f"coupling coefficient must be in [0, 1), got {k}")
    if L1 <= 0 or L2 <= 0:
        raise DomainError(f"inductances must be positive (got {L1}, {L2})")
    return k * math.sqrt(L1 * L2)


def series_reactance(L: float, C: float, f: float) -> float:
    """Signed residual reactance w*L - 1/(w*C) at f, in ohms.

    Positive means inductive (tank resonance below f), the detuning
    direction that supports ZVS.
    """
    if L <= 0 or C <= 0 or f <= 0:
        raise DomainError(f"series_reactance needs L, C, f > 0 (got {L}, {C}, {f})")
    w = 2.0 * math.pi * f
    return w * L - 1.0 / (w * C)


def fundamental_rms(Vsquare: float) -> float:
    """rms of the first harmonic of a +/-Vsquare square wave."""
    if Vsquare < 0:
        raise DomainError(f"square-wave amplitude must be >= 0, got {Vsquare}")
    return SQUARE_WAVE_FUNDAMENTAL * Vsquare


@dataclass(frozen=True)
class CircuitParams:
    """Full electrical description of the series-series IPT stage.

    Defaults for the parasitics are calibrated values, documented in the
    README: r1 reproduces the measured 4.2 W zero-coupling loss at the
    analyzer's predicted coil current, vd is a Schottky-class drop.
    """

    vdc: float          # DC input voltage [V]
    vb: float           # battery voltage [V]
    fs: float           # switching frequency [Hz]
    l1: float           # transmitter coil [H]
    l2: float           # receiver coil [H]
    c1: float           # primary series capacitor [F]
    c2: float           # secondary series capacitor [F]
    k: float            # coupling coefficient [-]
    r1: float = 0.156   # primary ESR [ohm]
    r2: float = 0.1     # secondary ESR [ohm]
    vd: float = 0.4     # per-diode rectifier drop [V]
    dead_time: float = 0.0  # inverter dead time [s], transient use only

    def __post_init__(self):
        for name in ("vdc", "vb", "fs", "l1", "l2", "c1", "c2"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("r1", "r2", "vd", "dead_time"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 0.0 <= self.k < 1.0:
            raise DomainError(f"k must be in [0, 1), got {self.k}")

    def with_(self, **changes) -> "CircuitParams":
        return replace(self, **changes)

    def lossless(self) -> "CircuitParams":
        """Copy with parasitics removed (r1 = r2 = vd = 0)."""
        return self.with_(r1=0.0, r2=0.0, vd=0.0)


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from CircuitParams, evaluated at fs."""

    omega_s: float  # switching angular frequency [rad/s]
    f1: float       # primary resonance [Hz]
    f2: float       # secondary resonance [Hz]
    m: float        # mutual inductance [H]
    x1: float       # primary residual reactance at fs [ohm], signed
    x2: float       # secondary residual reactance at fs [ohm], signed
    v1_rms: float   # inverter fundamental [Vrms]
    v2_rms: float   # rectifier-input fundamental for the bare battery [Vrms]


def derive(p: CircuitParams) -> DerivedParams:
    """Evaluate resonances, mutual inductance and residual reactances."""
    return DerivedParams(
        omega_s=2.0 * math.pi * p.fs,
        f1=resonant_frequency(p.l1, p.c1),
        f2=resonant_frequency(p.l2, p.c2),
        m=mutual_inductance(p.k, p.l1, p.l2),
        x1=series_reactance(p.l1, p.c1, p.fs),
        x2=series_reactance(p.l2, p.c2, p.fs),
        v1_rms=fundamental_rms(p.vdc),
        v2_rms=fundamental_rms(p.vb),
    )


def table1_params(**overrides) -> CircuitParams:
    """The shipped reference operating point (29 V in, 11.1 V battery,
    245 kHz switching, primary detuned to 223.5 kHz), with calibrated
    default parasitics. Keyword overrides are applied on top."""
    base = dict(
        vdc=29.0, vb=11.1, fs=245e3,
        l1=19.5e-6, l2=5.5e-6, c1=26e-9, c2=80e-9,
        k=0.38,
    )
    base.update(overrides)
    return CircuitParams(**base)
