import numpy as np
import pytest

from combphase.comb import fiber_comb_preset, generate_train
from combphase.noise import (
    DephasingSpec,
    ThermalSpec,
    ac_stark_preset,
    be_doppler_preset,
    dephase_train,
    doppler_phase_error,
    doppler_velocity,
    expected_dephasing_error,
    spin_echo_residual,
)


def test_spec_validation():
    with pytest.raises(ValueError):
        DephasingSpec(sigma_eps=-1.0, correlation_time=1.0)
    with pytest.raises(ValueError):
        DephasingSpec(sigma_eps=1.0, correlation_time=0.0)
    with pytest.raises(ValueError):
        ThermalSpec(linewidth=-1.0, mass=1e-26, wavelength=3e-7)


def test_dephasing_deterministic_and_scales_with_sigma():
    t = generate_train(fiber_comb_preset(), 50)
    d = DephasingSpec(sigma_eps=2.0 * np.pi * 100.0, correlation_time=1e-3, seed=4)
    a = dephase_train(t, d)
    b = dephase_train(t, d)
    assert np.array_equal(a.phases, b.phases)
    # doubling the field std doubles every phase perturbation exactly
    d2 = DephasingSpec(sigma_eps=2.0 * d.sigma_eps, correlation_time=1e-3, seed=4)
    c = dephase_train(t, d2)
    assert np.allclose(c.phases - t.phases, 2.0 * (a.phases - t.phases))


def test_dephasing_zero_sigma_is_identity():
    t = generate_train(fiber_comb_preset(), 5)
    d = DephasingSpec(sigma_eps=0.0, correlation_time=1e-3)
    assert dephase_train(t, d) is t


def test_dephasing_requires_slow_field():
    t = generate_train(fiber_comb_preset(), 5)
    with pytest.raises(ValueError):
        dephase_train(t, DephasingSpec(sigma_eps=1.0, correlation_time=1e-12))


def test_closely_paired_pulses_suppress_dephasing():
    # 100 Hz-class shift over a 10 ps pair: phase error in the 1e-9 rad range
    err = expected_dephasing_error(ac_stark_preset(), 10e-12)
    assert 1e-10 < err < 1e-8
    # versus the full 10 ns repetition period: a thousand times worse
    assert expected_dephasing_error(ac_stark_preset(), 10e-9) / err == pytest.approx(1e3)


def test_doppler_velocity_and_phase_error():
    th = be_doppler_preset()
    v = doppler_velocity(th)
    assert v == pytest.approx(5.0, rel=0.2)
    err = doppler_phase_error(th, 10e-12)
    assert err == pytest.approx(1e-3, rel=0.5)


def test_copropagating_geometry_cancels_exactly():
    th = be_doppler_preset(copropagating=True)
    assert doppler_phase_error(th, 10e-12) == 0.0
    assert doppler_phase_error(th, 1.0) == 0.0


def test_doppler_rejects_negative_gap():
    with pytest.raises(ValueError):
        doppler_phase_error(be_doppler_preset(), -1.0)


def test_spin_echo_cancels_constant_field():
    assert spin_echo_residual([2.5] * 8, [1e-9] * 8) == 0.0


def test_spin_echo_residual_matches_signed_sum():
    rng = np.random.default_rng(0)
    eps = rng.normal(size=6)
    gaps = rng.uniform(1e-9, 2e-9, size=6)
    expected = sum((-1.0) ** k * eps[k] * gaps[k] for k in range(6))
    assert spin_echo_residual(eps, gaps) == pytest.approx(expected)
    with pytest.raises(ValueError):
        spin_echo_residual([1.0, 2.0], [1.0])
