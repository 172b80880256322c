"""Marker rotation, phase reduction, and overlap amplitudes."""

import math

import numpy as np
import pytest

from hoamp.dynamics import (MarkerAmplitude, OscillatorParams, PhaseDelta,
                            epsilon_batch, epsilon_overlap, eps_squared_batch,
                            evolve_marker, phase_delta, phase_delta_batch,
                            reduce_angle, rotation_frequency)

PI = math.pi


def test_params_validation():
    with pytest.raises(ValueError):
        OscillatorParams(couplings=())
    with pytest.raises(ValueError):
        OscillatorParams(couplings=(1.0, 0.5, 0.1, 0.2, 0.3))   # K > 4
    with pytest.raises(ValueError):
        OscillatorParams(couplings=(1.0, 0.0))                  # g_K = 0
    with pytest.raises(ValueError):
        OscillatorParams(couplings=(float("nan"),))
    p = OscillatorParams(couplings=(0.5, 0.25), order=2)
    assert p.order == 2


def test_rotation_frequency_linear():
    p = OscillatorParams(omega=(0.0, 0.0, 1.5), couplings=(2.0,))
    assert rotation_frequency(p, 10).value == pytest.approx(1.5 + 20.0, rel=0, abs=0)


def test_rotation_frequency_higher_order():
    p = OscillatorParams(couplings=(0.5, 0.25, 0.125))
    # 0.5*4 + 0.25*16 + 0.125*64 with exact dyadic coefficients
    assert rotation_frequency(p, 4).value == 2.0 + 4.0 + 8.0


def test_phase_delta_zero_at_target():
    p = OscillatorParams()
    d = phase_delta(p, 35, 35, 0.731)
    assert d.angle == 0.0
    assert d.raw_integer == 0


def test_phase_delta_sign_convention():
    # Delta = (Omega_target - Omega_trial) t: a trial above the target
    # rotates ahead, so the difference comes out negative
    p = OscillatorParams()
    d = phase_delta(p, 35, 36, 0.5)
    assert d.raw_integer == 1
    assert d.angle == pytest.approx(-0.5)


def test_phase_delta_reduces_into_half_open_interval():
    p = OscillatorParams()
    for trial in (36, 40, 100, 10_000):
        for t in (0.1, 1.0, 2.9, 6.2, 100.37):
            a = phase_delta(p, 35, trial, t).angle
            assert -PI <= a <= PI   # float(pi) rounds the open endpoint in


def test_phase_delta_mod_two_pi():
    # an angle past -pi comes back as its (-pi, pi] representative
    p = OscillatorParams()
    got = phase_delta(p, 0, 1, 3.491853071795859).angle
    assert got == pytest.approx(2 * PI - 3.491853071795859, abs=1e-15)


def test_phase_delta_exact_multiple_of_two_pi():
    # raw = 2^20 * (2 pi / 2^20) accumulates no representable residue > tiny
    p = OscillatorParams()
    t = 2.0 * PI
    a = phase_delta(p, 0, 1, t).angle
    b = reduce_angle(t)
    assert abs(a) < 3e-16          # |fl(2pi) - 2pi|
    assert abs(b) < 3e-16
    assert a == -b                 # same residual, opposite orientation


def test_phase_delta_batch_matches_scalar():
    p = OscillatorParams(couplings=(0.7, 0.3))
    trials = np.array([3, 5, 8, 34, 35, 36, 1000, 44721], dtype=np.int64)
    for t in (0.013, 1.704, 5.0, 6.046):
        batch = phase_delta_batch(p, 35, trials, t)
        for i, trial in enumerate(trials):
            exact = phase_delta(p, 35, int(trial), t).angle
            # circle distance: both are (-pi, pi] representatives
            diff = abs(batch[i] - exact)
            assert min(diff, 2 * PI - diff) < 1e-12


def test_phase_delta_batch_large_terms():
    p = OscillatorParams()
    trials = np.array([1_030_189, 348_547_955, 123_456_789], dtype=np.int64)
    batch = phase_delta_batch(p, 1_030_189, trials, 6.046)
    for i, trial in enumerate(trials):
        exact = phase_delta(p, 1_030_189, int(trial), 6.046).angle
        diff = abs(batch[i] - exact)
        assert min(diff, 2 * PI - diff) < 1e-11


def test_phase_delta_ignores_register_omegas():
    a = OscillatorParams(omega=(0.0,), couplings=(1.0,))
    b = OscillatorParams(omega=(123.456,), couplings=(1.0,))
    assert phase_delta(a, 10, 14, 2.2).angle == phase_delta(b, 10, 14, 2.2).angle


def test_epsilon_overlap_exact_one_cases():
    assert epsilon_overlap(MarkerAmplitude(2.0), 0.0) == 1.0 + 0.0j
    assert epsilon_overlap(MarkerAmplitude(0.0), 1.3) == 1.0 + 0.0j


def test_epsilon_overlap_closed_form():
    alpha = MarkerAmplitude(1.7)
    for ang in (0.2, -2.9, PI, 1e-8):
        eps = epsilon_overlap(alpha, ang)
        a2 = 1.7 * 1.7
        want = np.exp(-a2 * (1 - np.exp(1j * ang)))
        assert abs(eps - want) < 1e-15
        assert abs(abs(eps) ** 2 - math.exp(-2 * a2 * (1 - math.cos(ang)))) < 1e-15


def test_epsilon_magnitude_strictly_below_one_off_resonance():
    alpha = MarkerAmplitude(2.0)
    for ang in (0.05, 0.5, 1.0, 3.0):
        assert abs(epsilon_overlap(alpha, ang)) < 1.0


def test_epsilon_batch_agrees_with_scalar():
    angles = np.array([0.0, 0.3, -1.2, PI, -PI + 1e-12])
    eb = epsilon_batch(1.3, angles)
    sq = eps_squared_batch(1.3, angles)
    for i, a in enumerate(angles):
        s = epsilon_overlap(MarkerAmplitude(1.3), float(a))
        assert abs(eb[i] - s) < 1e-15
        assert abs(sq[i] - abs(s) ** 2) < 1e-15
    assert eb[0] == 1.0 + 0.0j         # exact at zero


def test_eps_squared_batch_reuses_buffer():
    angles = np.array([0.1, 0.2, 0.3])
    out = np.empty(3)
    res = eps_squared_batch(2.0, angles, out=out)
    assert res is out


def test_evolve_marker_rotates_phase():
    alpha = MarkerAmplitude(2.0, 0.0)
    omega = rotation_frequency(OscillatorParams(), 35)   # 35.0
    moved = evolve_marker(alpha, omega, 0.1)
    assert moved.magnitude == 2.0
    assert moved.phase == pytest.approx(reduce_angle(-3.5), abs=1e-15)


def test_evolve_marker_example_value():
    # Omega = 35, t = 0.1: phase -3.5 wraps to 2*pi - 3.5 = 2.7831853...
    moved = evolve_marker(MarkerAmplitude(1.0, 0.0),
                          rotation_frequency(OscillatorParams(), 35), 0.1)
    assert moved.phase == pytest.approx(2 * PI - 3.5, abs=1e-14)


def test_evolve_marker_full_turn_is_identity():
    omega = rotation_frequency(OscillatorParams(), 1)
    moved = evolve_marker(MarkerAmplitude(1.5, 0.25), omega, 2 * PI)
    assert moved.phase == pytest.approx(0.25, abs=1e-14)


def test_reduce_angle_boundary():
    assert reduce_angle(PI) == PI       # pi stays pi, not -pi
    # -float(pi) sits strictly inside (-pi, pi] because float(pi) < pi,
    # so it must come back unchanged rather than folded to +pi
    assert reduce_angle(-PI) == -PI
    assert reduce_angle(0.0) == 0.0


def test_phase_delta_overflow_guard():
    p = OscillatorParams(couplings=(0.0, 0.0, 0.0, 1.0))
    with pytest.raises(OverflowError):
        phase_delta(p, 0, 1 << 32, 1.0)           # (2^32)^4 = 2^128 overflows
