"""HTTP face of the workbench: one endpoint per study type.

Domain failures (fault modes, infeasible designs, bad physics) map to
HTTP 400 with the error text; schema violations are FastAPI's usual 422.
Design infeasibility is not an error: the response carries the verdict.
"""

from __future__ import annotations

import math

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..design import design_detuning, evaluate_design, misalignment_envelope
from ..errors import InfeasibleDesignError, WorkbenchError
from ..fha import loss_budget, solve_operating_point, sweep_coupling
from ..circuit import derive
from ..magnetics import calibrate, coupler_summary
from ..transient import simulate, waveform_export, zvs_check
from .schemas import (
    AnalyzeRequest,
    AnalyzeResponse,
    CalibrateRequest,
    CalibrateResponse,
    ComplexModel,
    CouplerRequest,
    CouplerResponse,
    DerivedModel,
    DesignRequest,
    DesignResponse,
    LossBudgetModel,
    OperatingPointModel,
    SimulateRequest,
    SimulateResponse,
    SweepCouplingRequest,
    SweepMisalignmentRequest,
    TableModel,
    TransientMetricsModel,
)

def _cell(v):
    # JSON has no NaN: error-row placeholders travel as null
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def _table_model(table) -> TableModel:
    return TableModel(columns=list(table.columns),
                      rows=[[_cell(v) for v in r] for r in table.rows])


def _op_model(op) -> OperatingPointModel:
    return OperatingPointModel(
        i1=ComplexModel.of(op.i1), i2=ComplexModel.of(op.i2),
        i1_mag=abs(op.i1), i2_mag=abs(op.i2),
        pout=op.pout, pin=op.pin, eta=op.eta,
        zin=ComplexModel.of(op.zin if op.zin == op.zin else 0j),
        zvs=op.zvs, idc_out=op.idc_out,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="ssipt workbench",
        description="Detuned series-series IPT design and analysis service",
        version=__version__,
    )

    @app.exception_handler(WorkbenchError)
    async def _domain_error(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/analyze", response_model=AnalyzeResponse)
    def analyze(req: AnalyzeRequest):
        params = req.circuit.to_params()
        op = solve_operating_point(params)
        d = derive(params)
        b = loss_budget(params, op)
        return AnalyzeResponse(
            operating_point=_op_model(op),
            derived=DerivedModel(omega_s=d.omega_s, f1=d.f1, f2=d.f2, m=d.m,
                                 x1=d.x1, x2=d.x2, v1_rms=d.v1_rms,
                                 v2_rms=d.v2_rms),
            losses=LossBudgetModel(copper_primary=b.copper_primary,
                                   copper_secondary=b.copper_secondary,
                                   rectifier=b.rectifier, total=b.total),
        )

    @app.post("/simulate", response_model=SimulateResponse)
    def run_simulation(req: SimulateRequest):
        params = req.circuit.to_params()
        result = simulate(
            params,
            max_cycles=req.sim.max_cycles,
            steps_per_cycle=req.sim.steps_per_cycle,
            steady_rel_tol=req.sim.steady_rel_tol,
            keep_cycles=req.sim.keep_cycles,
        )
        m = result.metrics
        waveform = None
        if req.include_waveform:
            n = min(req.last_n_cycles, result.stored_cycles, result.cycles_run)
            waveform = _table_model(waveform_export(result, n))
        return SimulateResponse(
            steady=result.steady,
            cycles_run=result.cycles_run,
            zvs=zvs_check(result) if result.steady else False,
            metrics=TransientMetricsModel(
                i1_rms=m.i1_rms, i2_rms=m.i2_rms, pout=m.pout, pin=m.pin,
                ploss=m.ploss, eta=m.eta, zvs_margin_a=m.zvs_margin_a,
                thd_i1=m.thd_i1,
            ),
            waveform=waveform,
        )

    @app.post("/sweep/coupling", response_model=TableModel)
    def sweep_coupling_endpoint(req: SweepCouplingRequest):
        return _table_model(sweep_coupling(req.circuit.to_params(),
                                           req.k_values))

    @app.post("/sweep/misalignment", response_model=TableModel)
    def sweep_misalignment(req: SweepMisalignmentRequest):
        return _table_model(misalignment_envelope(
            req.circuit.to_params(), req.geometry.to_geometry(),
            req.dx_values, req.dy_values, req.design.to_spec(),
        ))

    @app.post("/coupler", response_model=CouplerResponse)
    def coupler(req: CouplerRequest):
        s = coupler_summary(req.geometry.to_geometry())
        return CouplerResponse(k=s.k, k_raw=s.k_raw, m_air=s.m_air,
                               l1_air=s.l1_air, l2_air=s.l2_air,
                               l1=s.l1, l2=s.l2, m=s.m)

    @app.post("/design", response_model=DesignResponse)
    def design(req: DesignRequest):
        params = req.circuit.to_params()
        spec = req.design.to_spec()
        try:
            if req.evaluate_only:
                result = evaluate_design(params, spec)
            else:
                result = design_detuning(params, spec)
        except InfeasibleDesignError as e:
            return DesignResponse(
                c1=params.c1, f1=derive(params).f1, i1_zero_k=-1.0,
                pout_nominal=0.0, zvs_all=False, feasible=False,
                reasons=[str(e)],
            )
        return DesignResponse(
            c1=result.c1, f1=result.f1, i1_zero_k=result.i1_zero_k,
            pout_nominal=result.pout_nominal, zvs_all=result.zvs_all,
            feasible=result.feasible, reasons=list(result.reasons),
        )

    @app.post("/calibrate", response_model=CalibrateResponse)
    def calibrate_endpoint(req: CalibrateRequest):
        geometry = req.geometry.to_geometry()
        anchors = [
            (geometry.with_(dx=a.dx, dy=a.dy), a.k_target)
            for a in req.anchors
        ]
        result = calibrate(anchors)
        return CalibrateResponse(
            mu_eff_tx=result.mu_eff_tx, mu_eff_rx=result.mu_eff_rx,
            residual=result.residual, iterations=result.iterations,
            anchor_errors=list(result.anchor_errors),
        )

    return app


app = create_app()
