import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combphase.comb import (
    BsdSpec,
    CombSpec,
    JitterSpec,
    PulseTrain,
    apply_phase_jitter,
    bsd_replicate,
    fiber_comb_preset,
    generate_train,
    max_replicas,
    split_delay_interleave,
    train_from_csv,
    train_to_csv,
    wrap_pulse_count,
)
from combphase.errors import OverlapError, ReplicaBudgetError
from combphase.pulses import PulseSpec

W = 2.0 * np.pi * 3.5e14


def _comb(offset=200e3, period=10e-9, convention="angular"):
    template = PulseSpec("gaussian", np.pi / 2, 10e-12, W, W)
    return CombSpec(period, offset, template, convention)


def test_phase_step_conventions():
    ang = _comb(convention="angular")
    cyc = _comb(convention="cyclic")
    assert ang.phase_step == pytest.approx(2.0 * np.pi * 200e3 * 10e-9)
    assert ang.phase_step == pytest.approx(2.0 * np.pi * cyc.phase_step)


def test_comb_validation():
    with pytest.raises(ValueError):
        _comb(period=-1.0)
    with pytest.raises(ValueError):
        _comb(period=5e-12)  # shorter than the pulse
    with pytest.raises(ValueError):
        _comb(convention="radians")


def test_generate_train_phases_are_linear():
    c = _comb()
    t = generate_train(c, 5, start_index=3)
    m = 3 + np.arange(5)
    assert np.allclose(t.times, m * c.rep_period)
    assert np.allclose(t.phases, m * c.phase_step)
    assert np.all(t.thetas == np.pi / 2)
    assert np.array_equal(t.indices, m)


def test_wrap_pulse_count_fiber_preset():
    assert wrap_pulse_count(fiber_comb_preset()) == 500


def test_train_rejects_unsorted_times():
    with pytest.raises(ValueError):
        PulseTrain(np.array([0.0, 2.0, 1.0]), np.zeros(3), np.zeros(3))


def test_train_overlap_check():
    with pytest.raises(OverlapError):
        PulseTrain(
            np.array([0.0, 8e-12]), np.zeros(2), np.zeros(2), pulse_duration=10e-12
        )


def test_split_delay_interleave_pair_phase_difference():
    c = _comb()
    n_delay = 4
    t = generate_train(c, 12)
    out = split_delay_interleave(t, n_delay)
    # pair k: delayed pulse k first, direct pulse k + n_delay second
    diffs = out.phases[1::2] - out.phases[0::2]
    assert np.allclose(diffs, n_delay * c.phase_step)
    # single use of every source pulse
    assert len(np.unique(out.indices)) == len(out.indices)
    # delayed member arrives first, 10 ps before its partner
    assert np.allclose(out.times[1::2] - out.times[0::2], 10e-12)


def test_split_delay_caps_pairs_at_n_delay():
    t = generate_train(_comb(), 20)
    with pytest.raises(ValueError):
        split_delay_interleave(t, 4, n_pairs=5)
    out = split_delay_interleave(t, 4, n_pairs=4)
    assert len(out) == 8


def test_split_delay_overlap_guard():
    t = generate_train(_comb(), 12)
    with pytest.raises(OverlapError):
        split_delay_interleave(t, 4, intra_pair_gap=5e-12)


def test_split_delay_degenerate_no_delay():
    t = generate_train(_comb(), 6)
    out = split_delay_interleave(t, 0)
    assert len(out) == 12
    assert np.allclose(out.phases[0::2], out.phases[1::2])


def test_max_replicas_lifetime_budget():
    # 7 ns usable lifetime and 10 ps pulses: 350 replicas
    assert max_replicas(10e-12, 7e-9, None) == 350
    assert max_replicas(10e-12, 7e-9, 2e-9) == 100
    with pytest.raises(ValueError):
        max_replicas(10e-12, None, None)


def test_bsd_replicate_preserves_area():
    t = generate_train(_comb(), 3)
    out = bsd_replicate(t, BsdSpec(replicas=5, spacing=25e-12))
    assert len(out) == 15
    assert np.sum(out.thetas) == pytest.approx(np.sum(t.thetas))
    # equal rule: all replicas share the area evenly
    assert np.allclose(out.thetas, np.pi / 2 / 5)


def test_bsd_geometric_weights():
    t = generate_train(_comb(), 1)
    out = bsd_replicate(t, BsdSpec(replicas=3, spacing=25e-12, amplitude_rule="geometric", ratio=0.5))
    w = np.array([1.0, 0.5, 0.25])
    assert np.allclose(out.thetas, np.pi / 2 * w / w.sum())


def test_bsd_budget_and_overlap_errors():
    t = generate_train(_comb(), 2)
    with pytest.raises(ReplicaBudgetError):
        bsd_replicate(t, BsdSpec(replicas=400, spacing=25e-12), tau_rad=7e-9)
    with pytest.raises(OverlapError):
        bsd_replicate(t, BsdSpec(replicas=2, spacing=5e-12))
    with pytest.raises(OverlapError):
        # replica fan longer than the repetition period
        bsd_replicate(t, BsdSpec(replicas=500, spacing=25e-12))


def test_phase_jitter_deterministic_and_flagging():
    t = generate_train(_comb(), 100)
    a = apply_phase_jitter(t, JitterSpec("random_walk", 0.01), seed=5)
    b = apply_phase_jitter(t, JitterSpec("random_walk", 0.01), seed=5)
    assert np.array_equal(a.phases, b.phases)
    assert not a.wrap_risk  # 0.01 * sqrt(100) = 0.1 rad, safe
    c = apply_phase_jitter(t, JitterSpec("random_walk", 0.2), seed=5)
    assert c.wrap_risk  # 0.2 * sqrt(100) = 2.0 >= pi/2
    d = apply_phase_jitter(t, JitterSpec("white", 0.0), seed=5)
    assert d is t


@given(n=st.integers(1, 30), seed=st.integers(0, 1000))
@settings(max_examples=25, deadline=None)
def test_train_csv_round_trip_exact(n, seed):
    rng = np.random.default_rng(seed)
    t = PulseTrain(
        times=np.sort(rng.uniform(0.0, 1.0, n)) + np.arange(n),  # strictly increasing
        phases=rng.normal(size=n),
        thetas=rng.uniform(0.0, np.pi, n),
        indices=np.arange(n),
    )
    buf = io.StringIO()
    train_to_csv(t, buf)
    back = train_from_csv(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.times, t.times)  # repr round-trips exactly
    assert np.array_equal(back.phases, t.phases)
    assert np.array_equal(back.thetas, t.thetas)


def test_train_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        train_from_csv(io.StringIO("a,b,c,d\n1,2,3,4\n"))
