"""Pydantic request/response models for the workbench service.

All quantities are SI base units, matching the core dataclasses; the
unit-suffixed display names exist only in the config-file format.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..circuit import CircuitParams
from ..design import DesignSpec
from ..magnetics import CouplerGeometry


class CircuitModel(BaseModel):
    vdc: float = Field(gt=0)
    vb: float = Field(gt=0)
    fs: float = Field(gt=0)
    l1: float = Field(gt=0)
    l2: float = Field(gt=0)
    c1: float = Field(gt=0)
    c2: float = Field(gt=0)
    k: float = Field(ge=0, lt=1)
    r1: float = Field(default=0.156, ge=0)
    r2: float = Field(default=0.1, ge=0)
    vd: float = Field(default=0.4, ge=0)
    dead_time: float = Field(default=0.0, ge=0)

    def to_params(self) -> CircuitParams:
        return CircuitParams(**self.model_dump())

    @classmethod
    def from_params(cls, p: CircuitParams) -> "CircuitModel":
        return cls(vdc=p.vdc, vb=p.vb, fs=p.fs, l1=p.l1, l2=p.l2, c1=p.c1,
                   c2=p.c2, k=p.k, r1=p.r1, r2=p.r2, vd=p.vd,
                   dead_time=p.dead_time)


class GeometryModel(BaseModel):
    tx_rod_diameter: float = Field(gt=0)
    tx_rod_length: float = Field(gt=0)
    tx_turns_per_rod: int = Field(ge=1)
    tx_rod_spacing: float = Field(gt=0)
    rx_ferrite_diameter: float = Field(gt=0)
    rx_ferrite_length: float = Field(gt=0)
    rx_turns_per_leg: int = Field(ge=1)
    rx_leg_spacing: float = Field(gt=0)
    air_gap: float = Field(gt=0)
    dx: float = 0.0
    dy: float = 0.0
    mu_eff_tx: float = Field(default=1.0, ge=1.0)
    mu_eff_rx: float = Field(default=1.0, ge=1.0)
    tx_wire_radius: float = Field(default=5e-4, gt=0)
    rx_wire_radius: float = Field(default=4e-4, gt=0)

    def to_geometry(self) -> CouplerGeometry:
        return CouplerGeometry(**self.model_dump())

    @classmethod
    def from_geometry(cls, g: CouplerGeometry) -> "GeometryModel":
        return cls(**{f: getattr(g, f) for f in cls.model_fields})


class DesignSpecModel(BaseModel):
    i1_max_zero_k: float = Field(gt=0)
    target_pout: float = Field(gt=0)
    k_nominal: float = Field(ge=0, lt=1)
    k_min: float = Field(ge=0, lt=1)
    k_max: float = Field(ge=0, lt=1)
    zvs_required: bool = True
    power_band: tuple[float, float] = (0.9, 1.5)

    def to_spec(self) -> DesignSpec:
        return DesignSpec(**self.model_dump())


class SimOptionsModel(BaseModel):
    max_cycles: int = Field(default=2000, ge=1)
    steps_per_cycle: int = Field(default=1000, ge=200)
    steady_rel_tol: float = Field(default=1e-4, ge=0)
    keep_cycles: int = Field(default=16, ge=1)


class ComplexModel(BaseModel):
    re: float
    im: float

    @classmethod
    def of(cls, z: complex) -> "ComplexModel":
        return cls(re=z.real, im=z.imag)


class TableModel(BaseModel):
    columns: list[str]
    rows: list[list]


class DerivedModel(BaseModel):
    omega_s: float
    f1: float
    f2: float
    m: float
    x1: float
    x2: float
    v1_rms: float
    v2_rms: float


class LossBudgetModel(BaseModel):
    copper_primary: float
    copper_secondary: float
    rectifier: float
    total: float


class OperatingPointModel(BaseModel):
    i1: ComplexModel
    i2: ComplexModel
    i1_mag: float
    i2_mag: float
    pout: float
    pin: float
    eta: float
    zin: ComplexModel
    zvs: bool
    idc_out: float


class AnalyzeRequest(BaseModel):
    circuit: CircuitModel


class AnalyzeResponse(BaseModel):
    operating_point: OperatingPointModel
    derived: DerivedModel
    losses: LossBudgetModel


class SimulateRequest(BaseModel):
    circuit: CircuitModel
    sim: SimOptionsModel = SimOptionsModel()
    last_n_cycles: int = Field(default=2, ge=1)
    include_waveform: bool = True


class TransientMetricsModel(BaseModel):
    i1_rms: float
    i2_rms: float
    pout: float
    pin: float
    ploss: float
    eta: float
    zvs_margin_a: float
    thd_i1: float


class SimulateResponse(BaseModel):
    steady: bool
    cycles_run: int
    zvs: bool
    metrics: TransientMetricsModel
    waveform: TableModel | None = None


class SweepCouplingRequest(BaseModel):
    circuit: CircuitModel
    k_values: list[float]


class SweepMisalignmentRequest(BaseModel):
    circuit: CircuitModel
    geometry: GeometryModel
    design: DesignSpecModel
    dx_values: list[float]
    dy_values: list[float]


class CouplerRequest(BaseModel):
    geometry: GeometryModel


class CouplerResponse(BaseModel):
    k: float
    k_raw: float
    m_air: float
    l1_air: float
    l2_air: float
    l1: float
    l2: float
    m: float


class DesignRequest(BaseModel):
    circuit: CircuitModel
    design: DesignSpecModel
    evaluate_only: bool = False


class DesignResponse(BaseModel):
    c1: float
    f1: float
    i1_zero_k: float
    pout_nominal: float
    zvs_all: bool
    feasible: bool
    reasons: list[str]


class CalibrationAnchorModel(BaseModel):
    dx: float = 0.0
    dy: float = 0.0
    k_target: float = Field(gt=0, lt=1)


class CalibrateRequest(BaseModel):
    geometry: GeometryModel
    anchors: list[CalibrationAnchorModel]


class CalibrateResponse(BaseModel):
    mu_eff_tx: float
    mu_eff_rx: float
    residual: float
    iterations: int
    anchor_errors: list[float]
