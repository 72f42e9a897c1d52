"""Kerr parametric oscillator cat-qubit gate simulation (C++ core)."""

from ._core import (
    DEFAULT_DIM,
    KpoError,
    Spectrum,
    annihilation_operator,
    coherent_state,
    evolve,
    extract_gate,
    kpo_hamiltonian,
    parity_operator,
    predict_rotation,
    pulse_amplitude,
    simulate_gate,
    spectrum,
)

__all__ = [
    "DEFAULT_DIM",
    "KpoError",
    "Spectrum",
    "annihilation_operator",
    "coherent_state",
    "evolve",
    "extract_gate",
    "kpo_hamiltonian",
    "parity_operator",
    "predict_rotation",
    "pulse_amplitude",
    "simulate_gate",
    "spectrum",
]
