"""Time-domain switched simulation of the series-series stage.

Full-bridge square wave, coupled series tanks, diode bridge into a
constant-voltage battery. State x = [iL1, iL2, vC1, vC2]; within one
rectifier/bridge topology the system is affine, x' = A x + b, so the
classical RK4 update is an exact affine map

    x(t+h) = S(h) x(t) + d(h),
    S = sum_{i<=4} (hA)^i / i!,   d = h * (sum_{i<=3} (hA)^i/(i+1)!) b.

Whole half-cycles advance through precomputed powers of S (one vectorized
contraction per smooth segment); this reproduces the fixed-step RK4
recurrence exactly, without the per-step Python loop. Bridge switching
lands on grid points; diode commutations are located by bisection on the
in-step RK4 map to 1e-12 s. A bridge edge that forward-biases the
rectifier is processed inverter-first, then the diode state updates.

Rectifier states: conducting (+/-), which clamps the rectifier input to
sign(iL2)*(Vb + 2*Vd) and ends at the iL2 zero crossing, and blocked,
which ends when the open-circuit rectifier voltage exceeds the clamp.

Cycle integrals (rms, powers) use composite Simpson over the uniform
samples of each smooth run, trapezoid only on sub-step slivers, keeping
quadrature order consistent with RK4.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitParams, derive
from .errors import DivergenceError, DomainError
from .table import SweepTable

_DIVERGENCE_LIMIT = 1e6   # amps or volts: beyond this the run is runaway
_EVENT_TIME_TOL = 1e-12   # seconds, diode-event bisection window
_STATE_FLOOR = 1e-9       # steady-detection scale floor
_POS_TOL = 1e-9           # step-fraction tolerance for grid alignment

BLOCKED, COND_POS, COND_NEG = 0, 1, -1


@dataclass(frozen=True)
class StateVector:
    """Tank state at one instant."""

    i_l1: float
    i_l2: float
    v_c1: float
    v_c2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.i_l1, self.i_l2, self.v_c1, self.v_c2])


def tank_energy(params: CircuitParams, state: StateVector) -> float:
    """Stored tank energy; positive definite because k < 1."""
    m = derive(params).m
    return 0.5 * (
        params.l1 * state.i_l1**2
        + 2.0 * m * state.i_l1 * state.i_l2
        + params.l2 * state.i_l2**2
        + params.c1 * state.v_c1**2
        + params.c2 * state.v_c2**2
    )


@dataclass(frozen=True)
class TransientMetrics:
    i1_rms: float
    i2_rms: float
    pout: float
    pin: float
    ploss: float
    eta: float
    zvs_margin_a: float   # min correctly-signed bridge current at switching
    thd_i1: float


@dataclass
class TransientResult:
    """Waveforms of the last stored cycles plus steady-state metrics."""

    steady: bool
    cycles_run: int
    steps_per_cycle: int
    stored_cycles: int
    metrics: TransientMetrics
    final_state: StateVector
    time: np.ndarray
    i_l1: np.ndarray
    i_l2: np.ndarray
    v_c1: np.ndarray
    v_c2: np.ndarray
    v_bridge: np.ndarray
    v_rect: np.ndarray
    cycle_energy: dict   # final-cycle energy ledger for the audit


def _rk4_maps(a: np.ndarray, b: np.ndarray, h: float):
    """Exact RK4 step matrix S and offset d for x' = A x + b."""
    eye = np.eye(4)
    ha = h * a
    ha2 = ha @ ha
    ha3 = ha2 @ ha
    ha4 = ha3 @ ha
    s = eye + ha + ha2 / 2.0 + ha3 / 6.0 + ha4 / 24.0
    d = h * ((eye + ha / 2.0 + ha2 / 6.0 + ha3 / 24.0) @ b)
    return s, d


class _Stepper:
    """Step maps and cumulative power stacks per rectifier topology."""

    def __init__(self, params: CircuitParams, h: float, m_steps: int):
        self.params = params
        self.h = h
        self.m_steps = m_steps
        self.m = derive(params).m
        det = params.l1 * params.l2 - self.m**2
        self.linv = np.array([[params.l2, -self.m], [-self.m, params.l1]]) / det
        self.v_clamp = params.vb + 2.0 * params.vd
        self._a: dict = {}
        self._stacks: dict = {}

    def a_matrix(self, mode: int) -> np.ndarray:
        conducting = mode != BLOCKED
        if conducting not in self._a:
            p = self.params
            a = np.zeros((4, 4))
            if conducting:
                li = self.linv
                a[0] = [-li[0, 0] * p.r1, -li[0, 1] * p.r2, -li[0, 0], -li[0, 1]]
                a[1] = [-li[1, 0] * p.r1, -li[1, 1] * p.r2, -li[1, 0], -li[1, 1]]
                a[2, 0] = 1.0 / p.c1
                a[3, 1] = 1.0 / p.c2
            else:
                a[0, 0] = -p.r1 / p.l1
                a[0, 2] = -1.0 / p.l1
                a[2, 0] = 1.0 / p.c1
            self._a[conducting] = a
        return self._a[conducting]

    def b_vector(self, mode: int, bv: float) -> np.ndarray:
        b = np.zeros(4)
        if mode != BLOCKED:
            li = self.linv
            vr = mode * self.v_clamp
            b[0] = li[0, 0] * bv - li[0, 1] * vr
            b[1] = li[1, 0] * bv - li[1, 1] * vr
        else:
            b[0] = bv / self.params.l1
        return b

    def stacks(self, mode: int, bv: float):
        """(S^k, sum_{j<k} S^j d) for k = 1..m_steps at the grid step."""
        key = (mode, bv)
        if key not in self._stacks:
            s, d = _rk4_maps(self.a_matrix(mode), self.b_vector(mode, bv), self.h)
            pows = np.empty((self.m_steps, 4, 4))
            offs = np.empty((self.m_steps, 4))
            pows[0] = s
            offs[0] = d
            for k in range(1, self.m_steps):
                pows[k] = s @ pows[k - 1]
                offs[k] = s @ offs[k - 1] + d
            self._stacks[key] = (pows, offs)
        return self._stacks[key]

    def single_step(self, x, mode: int, bv: float, h: float):
        s, d = _rk4_maps(self.a_matrix(mode), self.b_vector(mode, bv), h)
        return s @ x + d

    def v_rect_open(self, x, bv: float) -> float:
        """Rectifier terminal voltage while blocked (iL2 = 0)."""
        p = self.params
        di1 = (bv - x[2] - p.r1 * x[0]) / p.l1
        return -self.m * di1 - x[3]

    def v_rect(self, x, mode: int, bv: float) -> float:
        if mode == BLOCKED:
            return self.v_rect_open(x, bv)
        return mode * self.v_clamp


def _simpson(values: np.ndarray, h: float) -> float:
    """Composite Simpson on uniform samples, trapezoid for a ragged tail."""
    n = len(values) - 1
    if n <= 0:
        return 0.0
    total = 0.0
    n_even = n if n % 2 == 0 else n - 1
    if n_even >= 2:
        v = values[: n_even + 1]
        total += h / 3.0 * (
            v[0] + v[-1] + 4.0 * float(np.sum(v[1:-1:2])) + 2.0 * float(np.sum(v[2:-2:2]))
        )
    if n != n_even:
        total += 0.5 * h * (values[-2] + values[-1])
    return float(total)


class _CycleAccumulator:
    """Per-cycle integrals: i1^2, i2^2, |i2|, bridge power."""

    def __init__(self):
        self.reset()

    def reset(self):
        self.i1_sq = 0.0
        self.i2_sq = 0.0
        self.abs_i2 = 0.0
        self.e_bridge = 0.0

    def add_uniform(self, xs: np.ndarray, bv: float, h: float):
        # xs includes both endpoints of the uniform run; |i2| has no
        # interior kink because zero crossings terminate the run
        self.i1_sq += _simpson(xs[:, 0] ** 2, h)
        self.i2_sq += _simpson(xs[:, 1] ** 2, h)
        self.abs_i2 += _simpson(np.abs(xs[:, 1]), h)
        self.e_bridge += bv * _simpson(xs[:, 0], h)

    def add_sliver(self, x0, x1, bv: float, dt: float):
        if dt <= 0.0:
            return
        self.i1_sq += 0.5 * dt * (x0[0] ** 2 + x1[0] ** 2)
        self.i2_sq += 0.5 * dt * (x0[1] ** 2 + x1[1] ** 2)
        self.abs_i2 += 0.5 * dt * (abs(x0[1]) + abs(x1[1]))
        self.e_bridge += 0.5 * dt * bv * (x0[0] + x1[0])


class _Sim:
    """One simulation run: event loop, sampling, per-cycle bookkeeping."""

    def __init__(self, params, steps_per_cycle):
        self.params = params
        self.period = 1.0 / params.fs
        self.h = self.period / steps_per_cycle
        self.spc = steps_per_cycle
        self.m_half = steps_per_cycle // 2
        self.stepper = _Stepper(params, self.h, self.m_half)
        self.x = np.zeros(4)
        self.mode = BLOCKED
        self.acc = _CycleAccumulator()
        self.rows = np.full((steps_per_cycle, 7), np.nan)
        self.cycle_index = 0

    def _record(self, x, mode, bv, global_idx: int):
        j = global_idx - 1  # grid samples 1..spc map to rows 0..spc-1
        t = (self.cycle_index * self.spc + global_idx) * self.h
        self.rows[j] = (t, x[0], x[1], x[2], x[3], bv,
                        self.stepper.v_rect(x, mode, bv))

    def run_cycle(self, margins: list):
        """Advance one full period; returns the filled sample buffer."""
        self.rows[:] = np.nan
        self.acc.reset()
        dead_steps = self.params.dead_time / self.h
        for half in range(2):
            polarity = 1.0 if half == 0 else -1.0
            bv_drive = polarity * self.params.vdc
            if self.cycle_index or half:
                # commutation is favorable while the current still flows
                # in the outgoing direction at the switching instant
                margins.append(-polarity * float(self.x[0]))
            base = half * self.m_half
            if dead_steps > 0.0:
                self._window(0.0, dead_steps, 0.0, base)
                self._window(dead_steps, float(self.m_half), bv_drive, base)
            else:
                self._window(0.0, float(self.m_half), bv_drive, base)
        if np.isnan(self.rows).any():
            raise DomainError("internal error: sample grid has gaps")
        self.cycle_index += 1
        return self.rows

    def _window(self, q_start: float, q_end: float, bv: float, base: int):
        """Advance from step-fraction q_start to q_end under constant bv."""
        st = self.stepper
        x, mode = self.x, self.mode
        mode = _refresh_mode(st, x, mode, bv)
        pos = q_start
        while q_end - pos > _POS_TOL:
            on_grid = abs(pos - round(pos)) < _POS_TOL
            whole_left = int(math.floor(q_end + _POS_TOL)) - int(round(pos)) \
                if on_grid else 0
            if on_grid and whole_left >= 1:
                n = min(whole_left, st.m_steps)
                pows, offs = st.stacks(mode, bv)
                xs = np.einsum("kij,j->ki", pows[:n], x) + offs[:n]
                idx = _scan_events(st, xs, mode, bv)
                commit = n if idx is None else idx
                if commit > 0:
                    self.acc.add_uniform(np.vstack([x[None, :], xs[:commit]]),
                                         bv, self.h)
                    start = int(round(pos))
                    for j in range(commit):
                        self._record(xs[j], mode, bv, base + start + j + 1)
                    x = xs[commit - 1]
                    pos = float(start + commit)
                if idx is None:
                    continue
                x, mode, consumed = _step_with_event(st, x, mode, bv,
                                                     self.h, self.acc)
                pos += consumed / self.h
                if abs(pos - round(pos)) < _POS_TOL:
                    pos = float(round(pos))
                    self._record(x, mode, bv, base + int(pos))
                continue
            # partial step to the next grid point or the window end
            target = min(math.floor(pos + _POS_TOL) + 1.0, q_end)
            dt = (target - pos) * self.h
            x_new, mode_new, consumed = _step_with_event(st, x, mode, bv,
                                                         dt, self.acc)
            if consumed >= dt - _EVENT_TIME_TOL:
                pos = target
            else:
                pos += consumed / self.h
            x, mode = x_new, mode_new
            if abs(pos - round(pos)) < _POS_TOL:
                pos = float(round(pos))
                if pos <= q_end + _POS_TOL and pos >= 1.0:
                    self._record(x, mode, bv, base + int(pos))
        self.x, self.mode = x, mode


def _refresh_mode(st, x, mode, bv) -> int:
    if mode == BLOCKED:
        vr = st.v_rect_open(x, bv)
        if vr > st.v_clamp:
            return COND_POS
        if vr < -st.v_clamp:
            return COND_NEG
    return mode


def _event_occurred(st, x1, mode, bv):
    """Event descriptor if the step endpoint x1 lies past an event."""
    if mode == BLOCKED:
        vr = st.v_rect_open(x1, bv)
        if vr > st.v_clamp:
            return ("turn_on", COND_POS)
        if vr < -st.v_clamp:
            return ("turn_on", COND_NEG)
        return None
    if mode * x1[1] < 0.0:
        return ("zero_cross", BLOCKED)
    return None


def _scan_events(st, xs, mode, bv):
    """Index of the first sample lying past an event, else None."""
    if mode == BLOCKED:
        p = st.params
        di1 = (bv - xs[:, 2] - p.r1 * xs[:, 0]) / p.l1
        vr = -st.m * di1 - xs[:, 3]
        hits = np.nonzero(np.abs(vr) > st.v_clamp)[0]
    else:
        hits = np.nonzero(mode * xs[:, 1] < 0.0)[0]
    return int(hits[0]) if hits.size else None


def _step_with_event(st, x, mode, bv, dt, acc):
    """One step of length dt; on an interior event, stop at the event.

    Returns (state, mode, time consumed). The event time is located by
    bisection on the RK4 map from the step start, to 1e-12 s.
    """
    x_new = st.single_step(x, mode, bv, dt)
    if _event_occurred(st, x_new, mode, bv) is None:
        acc.add_sliver(x, x_new, bv, dt)
        return x_new, mode, dt
    lo, hi = 0.0, dt
    while hi - lo > _EVENT_TIME_TOL:
        mid = 0.5 * (lo + hi)
        x_mid = st.single_step(x, mode, bv, mid)
        if _event_occurred(st, x_mid, mode, bv) is None:
            lo = mid
        else:
            hi = mid
    x_event = st.single_step(x, mode, bv, lo) if lo > 0.0 else x.copy()
    acc.add_sliver(x, x_event, bv, lo)
    prev_mode = mode
    event = _event_occurred(st, st.single_step(x, mode, bv, hi), mode, bv)
    mode = event[1]
    if event[0] == "zero_cross":
        x_event[1] = 0.0  # commutation leaves exactly zero receiver current
        mode = _refresh_mode(st, x_event, BLOCKED, bv)
        if mode == prev_mode:
            # cannot sustain the same polarity it just left; block instead
            mode = BLOCKED
    return x_event, mode, lo


def simulate(params: CircuitParams, max_cycles: int = 2000,
             steps_per_cycle: int = 1000, steady_rel_tol: float = 1e-4,
             keep_cycles: int = 16) -> TransientResult:
    """Run the switched simulation until periodic steady state.

    steps_per_cycle must be even and >= 200. Steady state is declared
    when every state component changes by less than steady_rel_tol
    (relative to its in-cycle swing) across three consecutive cycle
    boundaries; steady_rel_tol = 0 disables early stopping. The last
    keep_cycles cycles of waveform are retained for export. Raises
    DivergenceError once any state magnitude exceeds 1e6 (the undamped
    resonant-primary runaway).
    """
    if steps_per_cycle < 200:
        raise DomainError("steps_per_cycle must be >= 200")
    if steps_per_cycle % 2:
        raise DomainError("steps_per_cycle must be even")
    if max_cycles < 1:
        raise DomainError("max_cycles must be >= 1")
    if params.dead_time >= 0.5 / params.fs:
        raise DomainError("dead time must be shorter than a half cycle")

    sim = _Sim(params, steps_per_cycle)
    period = sim.period
    store: deque = deque(maxlen=max(1, keep_cycles))
    prev_boundary = sim.x.copy()
    steady = False
    streak = 0
    cycles_run = 0

    for _ in range(max_cycles):
        margins: list = []
        e0 = tank_energy(params, StateVector(*sim.x))
        rows = sim.run_cycle(margins)
        cycles_run += 1
        energy = {
            "source": sim.acc.e_bridge,
            "battery": params.vb * sim.acc.abs_i2,
            "copper": params.r1 * sim.acc.i1_sq + params.r2 * sim.acc.i2_sq,
            "rectifier": 2.0 * params.vd * sim.acc.abs_i2,
            "stored_delta": tank_energy(params, StateVector(*sim.x)) - e0,
        }
        integrals = dict(i1_sq=sim.acc.i1_sq, i2_sq=sim.acc.i2_sq)
        store.append((rows.copy(), energy, margins, integrals))
        peak = np.max(np.abs(rows[:, 1:5]), axis=0)
        if float(peak.max()) > _DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"state magnitude exceeded {_DIVERGENCE_LIMIT:g} in cycle "
                f"{cycles_run}: undamped resonant runaway"
            )
        if steady_rel_tol > 0.0:
            scale = np.maximum(peak, _STATE_FLOOR)
            if np.all(np.abs(sim.x - prev_boundary) / scale < steady_rel_tol):
                streak += 1
                if streak >= 3:
                    steady = True
                    break
            else:
                streak = 0
        prev_boundary = sim.x.copy()

    rows_final, energy_final, margins_final, integrals_final = store[-1]
    metrics = _build_metrics(rows_final, energy_final, margins_final,
                             integrals_final, period, steps_per_cycle)
    all_rows = np.vstack([rows for rows, _, _, _ in store])
    return TransientResult(
        steady=steady,
        cycles_run=cycles_run,
        steps_per_cycle=steps_per_cycle,
        stored_cycles=len(store),
        metrics=metrics,
        final_state=StateVector(*sim.x),
        time=all_rows[:, 0],
        i_l1=all_rows[:, 1],
        i_l2=all_rows[:, 2],
        v_c1=all_rows[:, 3],
        v_c2=all_rows[:, 4],
        v_bridge=all_rows[:, 5],
        v_rect=all_rows[:, 6],
        cycle_energy=energy_final,
    )


def _build_metrics(rows, energy, margins, integrals, period, spc):
    i1_rms = math.sqrt(max(integrals["i1_sq"], 0.0) / period)
    i2_rms = math.sqrt(max(integrals["i2_sq"], 0.0) / period)
    pin = energy["source"] / period
    pout = energy["battery"] / period
    eta = pout / pin if pin > 0.0 else 0.0
    return TransientMetrics(
        i1_rms=i1_rms,
        i2_rms=i2_rms,
        pout=pout,
        pin=pin,
        ploss=pin - pout,
        eta=eta,
        zvs_margin_a=min(margins) if margins else 0.0,
        thd_i1=_thd(rows[:, 1]),
    )


def _thd(i1_cycle: np.ndarray) -> float:
    spec = np.abs(np.fft.rfft(i1_cycle))
    if len(spec) < 3 or spec[1] == 0.0:
        return 0.0
    return math.sqrt(float(np.sum(spec[2:] ** 2))) / float(spec[1])


def zvs_check(result: TransientResult) -> bool:
    """True if every commutation saw favorable current, margin >= 1% rms."""
    if not result.steady:
        raise DomainError("ZVS check requires a steady result")
    return result.metrics.zvs_margin_a >= 0.01 * result.metrics.i1_rms


WAVEFORM_COLUMNS = ["t_s", "v_bridge_V", "i_l1_A", "v_c1_V", "i_l2_A", "v_rect_V"]


def waveform_export(result: TransientResult, last_n_cycles: int) -> SweepTable:
    """Fixed-grid samples of the last n cycles as a table."""
    if last_n_cycles < 1:
        raise DomainError("last_n_cycles must be >= 1")
    available = min(result.stored_cycles, result.cycles_run)
    if last_n_cycles > available:
        raise DomainError(
            f"only {available} cycles stored, cannot export {last_n_cycles}"
        )
    n = last_n_cycles * result.steps_per_cycle
    table = SweepTable(columns=list(WAVEFORM_COLUMNS))
    for i in range(-n, 0):
        table.append((
            float(result.time[i]), float(result.v_bridge[i]),
            float(result.i_l1[i]), float(result.v_c1[i]),
            float(result.i_l2[i]), float(result.v_rect[i]),
        ))
    return table
