import io

import numpy as np
import pytest

from combphase._su2 import rot_x, rot_z, unitarity_defect
from combphase.raman import (
    LambdaSpec,
    RamanEffective,
    effective_qubit_unitary,
    integrate_lambda,
    measured_phase_step,
    pair_phase_gate,
    phase_map,
    phase_map_to_csv,
    visibility_budget,
)

W_AT = 2.0 * np.pi * 100.0


def _spec(detuning_fraction, rabi=12.0, **kw):
    return LambdaSpec(
        rabi=rabi,
        duration=1.0,
        laser_freq=W_AT * (1.0 - detuning_fraction),
        excited_energy=W_AT,
        **kw,
    )


def test_lambda_spec_validation():
    with pytest.raises(ValueError):
        _spec(0.0)  # resonant: not a Raman configuration
    with pytest.raises(ValueError):
        LambdaSpec(rabi=-1.0, duration=1.0, laser_freq=1.0, excited_energy=2.0)
    with pytest.raises(ValueError):
        _spec(0.1, envelope_kind="sinc")


def test_strongly_detuned_pulse_empties_excited_state():
    u, pop_c = integrate_lambda(_spec(0.2))
    assert pop_c < 1e-3
    assert unitarity_defect(u.matrix) < 1e-8


def test_rwa_phase_map_is_identity():
    grid = np.linspace(0.0, 2.0 * np.pi, 9)
    pm = phase_map(_spec(0.2), grid, rwa=True)
    assert pm.max_curve_deviation < 1e-9
    assert pm.monotone


def test_full_model_phase_map_small_detuning():
    grid = np.linspace(0.0, 2.0 * np.pi, 13)
    pm = phase_map(_spec(0.02), grid)
    assert pm.monotone
    # deviation from the identity map is well under 1% of a full turn,
    # but genuinely nonzero for the carrier-resolved model
    assert pm.max_curve_deviation / (2.0 * np.pi) < 0.01
    assert pm.max_curve_deviation > 1e-4


def test_phase_map_deviation_grows_with_detuning():
    grid = np.linspace(0.0, 2.0 * np.pi, 9)
    small = phase_map(_spec(0.02), grid)
    large = phase_map(_spec(0.2), grid)
    assert large.max_curve_deviation > small.max_curve_deviation


def test_phase_map_csv_format():
    grid = np.linspace(0.0, 2.0 * np.pi, 5)
    pm = phase_map(_spec(0.2), grid, rwa=True)
    buf = io.StringIO()
    phase_map_to_csv(pm, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "phi_l,phi_s,dphi_s_dphi_l"
    assert len(lines) == 6


def test_measured_phase_step_delay_mismatch():
    assert measured_phase_step(0.01, 0.0, 0.0) == 0.01
    # a residual path mismatch shifts the apparent step by omega * delta_T
    assert measured_phase_step(0.01, 2.0e15, 1.0e-18) == pytest.approx(0.012)


def test_effective_qubit_unitary_structure():
    r = RamanEffective(theta_eff=0.02, phase_eff=0.5)
    u = effective_qubit_unitary(r, n=10).matrix
    expected = rot_z(0.5) @ rot_x(0.2) @ rot_z(-0.5)
    assert np.allclose(u, expected, atol=1e-12)
    with pytest.raises(ValueError):
        effective_qubit_unitary(r, 0)


def test_pair_phase_gate():
    u = pair_phase_gate(0.3).matrix
    assert u[0, 0] == 1.0
    assert u[1, 1] == pytest.approx(-np.exp(0.3j))
    assert unitarity_defect(u) < 1e-12


def test_visibility_budget_number():
    assert visibility_budget(gamma=1.0 / 8e-9, t_e=100e-12, epsilon=0.1) == 184
    with pytest.raises(ValueError):
        visibility_budget(1.0, 1.0, 1.5)
