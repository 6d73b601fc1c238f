import json

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from steklov import flow
from steklov.errors import PositivityLost, StepCollapse
from steklov.fixtures import random_factor, trivial_factor
from steklov.harmonics import TrigPolynomial, normalize, unit_factor

small_coef = st.complex_numbers(max_magnitude=0.15, allow_nan=False, allow_infinity=False)


@st.composite
def positive_polys(draw):
    cs = draw(st.lists(small_coef, min_size=1, max_size=6))
    return TrigPolynomial.from_coeffs([1.0] + cs)


def test_B_fixed_points():
    assert np.all(flow.quadratic_form_B(TrigPolynomial.constant(1.0)).full == 0)
    assert np.all(flow.quadratic_form_B(TrigPolynomial.constant(3.7)).full == 0)


def test_B_pinned_value():
    # -(1 + cos) Lambda(1 + cos) + H(1 + cos) D(1 + cos) = -1 - cos
    out = flow.quadratic_form_B(TrigPolynomial.from_coeffs([1.0, 0.5]), check=True)
    np.testing.assert_allclose(out.full, [-0.5, -1.0, -0.5], atol=1e-15)


@given(positive_polys())
def test_B_matches_definition_and_keeps_degree(b):
    out = flow.quadratic_form_B(b, check=True)
    assert out.degree == b.degree
    assert out.is_real()
    # the direct product has degree 2d; everything above d cancels
    direct = -(b * flow.lambda_op(b)) + flow.hilbert_H(b) * flow.derivative_D(b)
    assert np.max(np.abs(direct.full[np.abs(np.arange(-2 * b.degree, 2 * b.degree + 1)) > b.degree]), initial=0) < 1e-14


@given(positive_polys())
def test_mean_identity(b):
    assert flow.quadratic_form_B(b).mean == pytest.approx(flow.mean_rate(b), abs=1e-14)
    assert flow.mean_rate(b) <= 0


@given(positive_polys())
def test_normalization_is_conserved_infinitesimally(b):
    # d/dtau mean(1/alpha) = -mean(B(alpha) / alpha^2) = 0
    m = 2048
    vals = b.samples(m)
    assume(vals.min() > 0.3)
    assert np.mean(flow.quadratic_form_B(b).samples(m) / vals ** 2) == pytest.approx(0, abs=1e-13)


def test_rhs_on_trivial_class_stays_low():
    rhs = flow.flow_rhs(trivial_factor(0.3).series)
    assert rhs.degree == 1


def test_step_from_one_is_stationary():
    state = flow.FlowState(0.0, unit_factor(), flow.diagnose(unit_factor()))
    new = flow.step_rk4(state, 0.01)
    assert new.tau == 0.01 and np.array_equal(new.series.full, state.series.full)


def test_step_validates_dt():
    state = flow.FlowState(0.0, unit_factor(), flow.diagnose(unit_factor()))
    with pytest.raises(ValueError):
        flow.step_rk4(state, -0.1)
    with pytest.raises(ValueError):
        flow.step_rk4(state, 10.0)


def test_positivity_guard():
    with pytest.raises(PositivityLost):
        flow._as_factor(TrigPolynomial.from_coeffs([0.1, 0.5]), 64, 1.0)


def test_euler_direction():
    b = TrigPolynomial.from_coeffs([1.0, 0.5])
    h = 1e-6
    direction = (flow.rk4_coefficients(b, h) - b) / h
    np.testing.assert_allclose(direction.full, [-0.5, -1.0, -0.5], atol=1e-5)


def _endpoint(a, dt, horizon=0.5):
    b = a.series
    for _ in range(int(round(horizon / dt))):
        b = flow.rk4_coefficients(b, dt)
    return b.full


def test_rk4_global_order():
    a = normalize(TrigPolynomial.from_coeffs([1.0, 0.2]))
    ref = _endpoint(a, 0.1 / 8)
    e1 = np.max(np.abs(_endpoint(a, 0.1) - ref))
    e2 = np.max(np.abs(_endpoint(a, 0.05) - ref))
    assert 12 < e1 / e2 < 20


def test_integrate_from_one():
    traj = flow.integrate(unit_factor(), zeta_probes=(-2, 2))
    assert traj.converged and len(traj.states) == 1
    assert all(v == 0 for v in flow.monitor_report(traj).values())


def test_trivial_data_keeps_equality():
    traj = flow.integrate(trivial_factor(0.3), dt=5e-3, tau_max=50, zeta_probes=(-2.0, 2.0), record_every=50)
    assert traj.converged
    for st_ in traj.states:
        assert max(abs(v) for v in st_.diagnostics.zeta_probes.values()) < 1e-7


def test_random_data_converges_monotonically():
    traj = flow.integrate(random_factor(3), dt=5e-3, tau_max=50, zeta_probes=(2.0,), record_every=40, snapshot_m=2)
    assert traj.converged and traj.final_distance < 1e-6
    rep = flow.monitor_report(traj)
    assert rep["normalization_drift"] < 1e-8
    assert rep["mean_increase"] <= 0
    assert rep["zeta_probe_increase"] < 1e-9
    assert rep["snapshot_increase"] < 1e-7


def test_mean_identity_residual_is_second_order():
    a = random_factor(4)
    at = {}
    for dt in (0.01, 0.005):
        taus, res = flow.mean_identity_residuals(flow.integrate(a, dt=dt, tau_max=1.0, record_every=10))
        at[dt] = dict(zip(np.round(taus, 9), res))
    common = [t for t in at[0.01] if t in at[0.005]]
    assert len(common) >= 5
    ratios = [at[0.01][t] / at[0.005][t] for t in common]
    assert min(ratios) > 3.5


def test_monotonicity_violation_marks_failure(monkeypatch):
    monkeypatch.setattr(flow, "MONOTONE_TOL", -1.0)
    traj = flow.integrate(random_factor(1), dt=0.01, tau_max=1.0, record_every=5)
    assert traj.failed and not traj.converged
    assert traj.failure["quantity"] == "mean_integral" and traj.failure["step"] == 0


def test_step_collapse(monkeypatch):
    def broken(b, dt):
        return TrigPolynomial.from_coeffs([0.1, 0.5])
    monkeypatch.setattr(flow, "rk4_coefficients", broken)
    with pytest.raises(StepCollapse):
        flow.integrate(random_factor(1), dt=0.01, tau_max=1.0)


def test_export(tmp_path):
    traj = flow.integrate(random_factor(2), dt=0.01, tau_max=0.2, zeta_probes=(2.0,), record_every=5)
    flow.export(traj, tmp_path / "t.csv", tmp_path / "t.json")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "tau,hat_a0,mean_integral,normalization_residual,dist_to_one,zeta_diff@2"
    assert len(lines) == len(traj.states) + 1
    side = json.loads((tmp_path / "t.json").read_text())
    assert side["states"][0]["tau"] == 0.0 and not side["converged"]


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 1000))
def test_short_flow_decreases_mean(seed):
    traj = flow.integrate(random_factor(seed), dt=0.01, tau_max=0.3, record_every=10)
    means = [s.diagnostics.mean_integral for s in traj.states]
    assert all(b <= a for a, b in zip(means, means[1:]))
