"""The zeta-decreasing deformation flow d(alpha)/d(tau) = B(alpha).

B(b) = -b (Lambda b) + (H b)(D b).  For real b of degree d this is again of
degree d, so the flow is a finite system of ODEs for the Fourier
coefficients.  We integrate it with classical RK4, monitor (but never
re-impose) the normalization, and record diagnostics along the way.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import zeta
from .errors import NonPositiveSample, NormalizationError, PositivityLost, StepCollapse
from .harmonics import (
    ConformalFactor,
    TrigPolynomial,
    default_grid,
    derivative_D,
    hilbert_H,
    lambda_op,
    real_derivative,
    to_json,
)

MONOTONE_TOL = 1e-9
MAX_HALVINGS = 20


def positive_part(b: TrigPolynomial) -> TrigPolynomial:
    """b_+ : modes k > 0 plus half of the mean, so that b = b_+ + conj(b_+)."""
    n = b.degree
    arr = b.full.copy()
    arr[:n] = 0
    arr[n] *= 0.5
    return TrigPolynomial(arr)


def _direct_B(b: TrigPolynomial) -> TrigPolynomial:
    return (-(b * lambda_op(b)) + hilbert_H(b) * derivative_D(b)).truncate(b.degree)


def quadratic_form_B(b: TrigPolynomial, check: bool = False) -> TrigPolynomial:
    """B(b) = -4 Re(b_+ Lambda conj(b_+)), truncated to deg b (exact).

    With ``check=True`` the result is compared against the direct
    definition -b Lambda b + (Hb)(Db).
    """
    p = positive_part(b)
    prod = p * lambda_op(p.conj())
    out = (-2.0 * (prod + prod.conj())).truncate(b.degree)
    if check:
        ref = _direct_B(b)
        err = float(np.max(np.abs(out.full - ref.full)))
        scale = max(1.0, float(np.max(np.abs(b.full))) ** 2)
        if err > 1e-12 * scale * max(b.degree, 1):
            raise AssertionError(f"B(b) mismatch against direct definition: {err:.3e}")
    return out


def mean_rate(b: TrigPolynomial) -> float:
    """-4 <b_+, Lambda b_+> / (2 pi), the mean of B(b) predicted by the identity."""
    c = positive_part(b).full[b.degree + 1:]
    k = np.arange(1, b.degree + 1)
    return float(-4.0 * np.sum(k * np.abs(c) ** 2))


@dataclass(frozen=True)
class FlowDiagnostics:
    mean_integral: float
    normalization_residual: float
    zeta_probes: dict = field(default_factory=dict)
    snapshot: zeta.CompactSetSnapshot | None = None


@dataclass(frozen=True)
class FlowState:
    tau: float
    factor: ConformalFactor
    diagnostics: FlowDiagnostics
    step: int = 0

    @property
    def series(self) -> TrigPolynomial:
        return self.factor.series

    def distance_to_one(self, grid_size: int | None = None) -> float:
        m = grid_size or 2 * default_grid(self.factor.degree)
        return float(np.max(np.abs(self.series.samples(m) - 1.0)))


def flow_rhs(state: FlowState | TrigPolynomial, check: bool = False) -> TrigPolynomial:
    series = state.series if isinstance(state, FlowState) else state
    return quadratic_form_B(series, check)


def c1_norm(b: TrigPolynomial, grid_size: int | None = None) -> float:
    m = grid_size or 2 * default_grid(b.degree)
    return float(np.max(np.abs(b.samples(m))) + np.max(np.abs(real_derivative(b).samples(m))))


def dt_max(b: TrigPolynomial) -> float:
    return 0.5 / c1_norm(b)


def rk4_coefficients(b: TrigPolynomial, dt: float) -> TrigPolynomial:
    """One classical RK4 step on the coefficients (dt may be negative)."""
    k1 = quadratic_form_B(b)
    k2 = quadratic_form_B(b + k1 * (dt / 2))
    k3 = quadratic_form_B(b + k2 * (dt / 2))
    k4 = quadratic_form_B(b + k3 * dt)
    arr = (b + (k1 + 2 * k2 + 2 * k3 + k4) * (dt / 6)).full.copy()
    arr[b.degree] = arr[b.degree].real
    return TrigPolynomial(arr)


def diagnose(factor: ConformalFactor, probes=(), N: int = zeta.DEFAULT_N,
             snapshot_m: int = 0) -> FlowDiagnostics:
    probe_values = {float(s): zeta.zeta_diff(factor, s, N).diff for s in probes}
    snap = zeta.compact_set_snapshot(factor, snapshot_m) if snapshot_m else None
    return FlowDiagnostics(2 * math.pi * factor.series.mean, factor.residual, probe_values, snap)


def _as_factor(b: TrigPolynomial, grid_size: int, tolerance: float) -> ConformalFactor:
    try:
        return ConformalFactor.validate(b, grid_size, tolerance)
    except NonPositiveSample as exc:
        raise PositivityLost(str(exc)) from exc


def step_rk4(state: FlowState, dt: float, probes=(), N: int = zeta.DEFAULT_N,
             snapshot_m: int = 0) -> FlowState:
    """Advance by dt, re-validate positivity and normalization, recompute diagnostics."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    limit = dt_max(state.series)
    if dt > limit:
        raise ValueError(f"dt = {dt:.3e} exceeds the stability limit {limit:.3e}")
    b = rk4_coefficients(state.series, dt)
    factor = _as_factor(b, state.factor.grid_size, state.factor.tolerance)
    return FlowState(state.tau + dt, factor, diagnose(factor, probes, N, snapshot_m), state.step + 1)


@dataclass
class FlowTrajectory:
    states: list
    converged: bool
    final_distance: float
    probes: tuple = ()
    failed: bool = False
    failure: dict | None = None
    halvings: int = 0

    @property
    def final(self) -> FlowState:
        return self.states[-1]

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", "hat_a0", "mean_integral", "normalization_residual", "dist_to_one"]
                   + [f"zeta_diff@{s:g}" for s in self.probes])
        for st in self.states:
            d = st.diagnostics
            w.writerow([repr(st.tau), repr(st.series.mean), repr(d.mean_integral),
                        repr(d.normalization_residual), repr(st.distance_to_one())]
                       + [repr(d.zeta_probes[s]) for s in self.probes])
        return buf.getvalue()

    def sidecar(self, stride: int = 1) -> dict:
        return {
            "converged": self.converged,
            "final_distance": self.final_distance,
            "failed": self.failed,
            "failure": self.failure,
            "halvings": self.halvings,
            "probes": list(self.probes),
            "states": [
                {"tau": st.tau, "step": st.step, **to_json(st.series),
                 "snapshot": st.diagnostics.snapshot.to_json() if st.diagnostics.snapshot else None}
                for st in self.states[::max(stride, 1)]
            ],
        }

    def summary(self) -> dict:
        return {"converged": self.converged, "final_distance": self.final_distance,
                "tau": self.final.tau, "states": len(self.states), "failed": self.failed,
                "failure": self.failure, "monitors": monitor_report(self)}


def _violations(prev: FlowState, new: FlowState, steps: int) -> dict | None:
    tol = MONOTONE_TOL * max(steps, 1)
    dp, dn = prev.diagnostics, new.diagnostics
    if dn.mean_integral > dp.mean_integral + tol:
        return {"quantity": "mean_integral", "increase": dn.mean_integral - dp.mean_integral}
    for s, v in dn.zeta_probes.items():
        if v > dp.zeta_probes[s] + tol:
            return {"quantity": f"zeta_diff@{s:g}", "increase": v - dp.zeta_probes[s]}
    return None


def integrate(a: ConformalFactor, dt: float = 1e-3, tau_max: float = 100.0,
              convergence_tol: float = 1e-6, zeta_probes=(), N: int = zeta.DEFAULT_N,
              record_every: int = 10, snapshot_m: int = 0) -> FlowTrajectory:
    """Integrate the flow from a until ||alpha - 1||_inf < convergence_tol or tau >= tau_max.

    Diagnostics are recorded every ``record_every`` steps.  A chunk of steps
    that loses positivity or breaks monotonicity between records is retried
    with half the step; after a clean chunk the step grows back towards dt.
    """
    probes = tuple(float(s) for s in zeta_probes)
    if any(not math.isfinite(s) for s in probes):
        raise ValueError("probe values must be finite")
    state = FlowState(0.0, a, diagnose(a, probes, N, snapshot_m))
    states = [state]
    h = dt
    total_halvings = 0
    while True:
        dist = state.distance_to_one()
        if dist < convergence_tol:
            return FlowTrajectory(states, True, dist, probes, halvings=total_halvings)
        if state.tau >= tau_max - 1e-12:
            return FlowTrajectory(states, False, dist, probes, halvings=total_halvings)
        halvings = 0
        while True:
            try:
                new, steps = _chunk(state, h, record_every, tau_max, convergence_tol)
                new = FlowState(new.tau, new.factor, diagnose(new.factor, probes, N, snapshot_m), new.step)
                bad = _violations(state, new, steps)
            except PositivityLost as exc:
                bad, err = None, exc
            else:
                err = None
            if err is None and bad is None:
                break
            halvings += 1
            total_halvings += 1
            h /= 2
            if halvings > MAX_HALVINGS:
                if err is not None:
                    raise StepCollapse(f"positivity not recovered after {MAX_HALVINGS} halvings at tau={state.tau}") from err
                bad.update(step=state.step, tau=state.tau)
                return FlowTrajectory(states, False, dist, probes, True, bad, total_halvings)
        states.append(new)
        state = new
        h = min(dt, 2 * h)


def _chunk(state: FlowState, h: float, steps: int, tau_max: float, tol: float):
    b = state.series
    tau = state.tau
    n = 0
    m = 2 * default_grid(b.degree)
    for _ in range(steps):
        step = min(h, dt_max(b), tau_max - tau)
        b = rk4_coefficients(b, step)
        tau += step
        n += 1
        if np.min(b.samples(m)) <= 0:
            raise PositivityLost(f"factor not positive at tau={tau:.6g}")
        if tau >= tau_max - 1e-12 or np.max(np.abs(b.samples(m) - 1.0)) < tol:
            break
    try:
        factor = _as_factor(b, state.factor.grid_size, state.factor.tolerance)
    except NormalizationError:
        factor = ConformalFactor.validate(b, state.factor.grid_size, math.inf)
    return FlowState(tau, factor, state.diagnostics, state.step + n), n


def monitor_report(traj: FlowTrajectory) -> dict:
    """Worst-case monitors along a trajectory."""
    st = traj.states
    drift = max(s.diagnostics.normalization_residual for s in st)
    mean_inc = 0.0
    probe_inc = 0.0
    snap_inc = 0.0
    for p, q in zip(st, st[1:]):
        mean_inc = max(mean_inc, q.diagnostics.mean_integral - p.diagnostics.mean_integral)
        for s, v in q.diagnostics.zeta_probes.items():
            probe_inc = max(probe_inc, v - p.diagnostics.zeta_probes[s])
    if st[0].diagnostics.snapshot is not None:
        first = st[0].diagnostics.snapshot.as_vector()
        for s in st[1:]:
            snap_inc = max(snap_inc, float(np.max(s.diagnostics.snapshot.as_vector() - first)))
    return {
        "normalization_drift": drift,
        "mean_increase": mean_inc,
        "zeta_probe_increase": probe_inc,
        "snapshot_increase": snap_inc,
        "mean_identity_residual": mean_identity_residual(traj),
    }


def mean_identity_residuals(traj: FlowTrajectory) -> tuple[np.ndarray, np.ndarray]:
    """|d/dtau hat_a0 - mean_rate(alpha)| at interior states, by centered differences.

    Only states with equal spacing on both sides are used.  Returns the
    times and the residuals.
    """
    st = traj.states
    taus, res = [], []
    for p, q, r in zip(st, st[1:], st[2:]):
        h1, h2 = q.tau - p.tau, r.tau - q.tau
        if abs(h1 - h2) > 1e-9 * max(h1, 1.0):
            continue
        deriv = (r.series.mean - p.series.mean) / (h1 + h2)
        taus.append(q.tau)
        res.append(abs(deriv - mean_rate(q.series)))
    return np.array(taus), np.array(res)


def mean_identity_residual(traj: FlowTrajectory) -> float:
    return float(np.max(mean_identity_residuals(traj)[1], initial=0.0))


def export(traj: FlowTrajectory, csv_path, sidecar_path=None, stride: int = 1) -> None:
    from .cli import atomic_write

    atomic_write(csv_path, traj.csv_text())
    if sidecar_path is not None:
        atomic_write(sidecar_path, json.dumps(traj.sidecar(stride), indent=2))
