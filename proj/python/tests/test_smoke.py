import math

import numpy as np
import pytest

import kpo_gate


def test_spectrum_degeneracy_and_parity():
    s = kpo_gate.spectrum(2.9)
    assert s.dim == kpo_gate.DEFAULT_DIM
    assert s.energies[0] == pytest.approx(2.9**2 / 2, abs=1e-8)
    assert s.energies[1] == pytest.approx(2.9**2 / 2, abs=1e-8)
    assert list(s.parities[:6]) == [1, -1, 1, -1, 1, -1]
    assert np.all(np.diff(s.energies) <= 1e-12)


def test_states_are_numpy():
    a = kpo_gate.annihilation_operator(5)
    assert a.shape == (5, 5) and a.dtype == np.complex128
    assert a[1, 2] == pytest.approx(math.sqrt(2))
    alpha = math.sqrt(2.9)
    ov = abs(np.vdot(kpo_gate.coherent_state(alpha), kpo_gate.coherent_state(-alpha))) ** 2
    assert ov == pytest.approx(9.2e-6, abs=1e-7)


def test_selection_rule():
    s = kpo_gate.spectrum(2.9)
    assert abs(s.matrix_element("single", 0, 2)) < 1e-10
    assert abs(s.matrix_element("two", 1, 4)) < 1e-10
    assert abs(s.matrix_element("two", 1, 5)) > 0.1


def test_pulse():
    assert kpo_gate.pulse_amplitude(0.0, 0.865, 3.9, 10.0) == 0.0
    assert kpo_gate.pulse_amplitude(5.0, 0.865, 3.9, 10.0) == pytest.approx(0.865)


def test_reference_gate():
    r = kpo_gate.simulate_gate(2.9, "single", 7.79, 0.865, 3.9, 10.0)
    assert r["theta_star"] == pytest.approx(-math.pi / 2, abs=0.02)
    assert r["one_minus_F"] == pytest.approx(5.1e-4, abs=2e-4)
    assert r["stats"]["accepted_steps"] > 0


def test_evolve_matches_simulate():
    s = kpo_gate.spectrum(4.7)
    zero, _ = s.computational_basis()
    times, states, stats = kpo_gate.evolve(zero, 4.7, "two", 16.55, 0.383, 2.4, 10.0, [0.0, 5.0, 10.0])
    assert list(times) == [0.0, 5.0, 10.0]
    assert states.shape == (31, 3)
    assert np.linalg.norm(states[:, -1]) == pytest.approx(1.0, abs=1e-7)
    gate = kpo_gate.extract_gate(states[:, -1], s, zero)
    ref = kpo_gate.simulate_gate(4.7, "two", 16.55, 0.383, 2.4, 10.0)
    assert gate["theta_star"] == pytest.approx(ref["theta_star"], abs=1e-9)


def test_prediction_and_errors():
    p = kpo_gate.predict_rotation(4.7, "two", 16.55, 0.383, 2.4, 10.0)
    assert p["partner1"] == 5
    assert p["rotation"] > 0
    with pytest.raises(kpo_gate.KpoError):
        kpo_gate.spectrum(9.0)
    with pytest.raises(kpo_gate.KpoError):
        kpo_gate.simulate_gate(2.9, "three", 7.79, 0.865, 3.9, 10.0)
