"""Numeric checks of the effective two-photon model against the full cascade."""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import curve_fit

from .effective_dynamics import two_photon_rabi_frequency
from .fock_space import DopantLevelSet, ModeSet, basis_state, enumerate_basis
from .hamiltonians import DopantSpec, EffectiveParams, cascade_dopant_h, effective_h
from .propagator import sample_trajectory


def single_mode_basis(n_max: int = 2):
    return enumerate_basis(ModeSet(1, n_max), [DopantLevelSet.cascade()])


def model_hamiltonian(model: str, g1: float, g2: float, delta: float, *, n_dopants: int = 1, sign: int = 1,
                      basis=None):
    """One mode, one collective dopant, under ``"effective"`` or ``"cascade"``.

    With ``sign=+1`` (intermediate level above the carrier) eliminating h
    gives the negative of the effective Hamiltonian; ``sign=-1`` gives it
    with the same signs. Rates and populations do not depend on the choice.
    """
    basis = basis or single_mode_basis()
    if model == "effective":
        scale = math.sqrt(n_dopants)
        return effective_h(basis, EffectiveParams(g1 * scale, g2 * scale, delta))
    if model == "cascade":
        return cascade_dopant_h(basis, DopantSpec.symmetric(delta, g1, g2, n_dopants=n_dopants, sign=sign))
    raise ValueError(f"model must be 'effective' or 'cascade', got {model!r}")


def _sin2(t, amp, freq, offset):
    return amp * np.sin(freq * t) ** 2 + offset


def fit_rabi_frequency(times: np.ndarray, population: np.ndarray, guess: float | None = None) -> float:
    """Fit population = A sin^2(W t) + c and return W.

    The starting frequency comes from the FFT peak unless ``guess`` is given.
    """
    times = np.asarray(times, dtype=float)
    population = np.asarray(population, dtype=float)
    if guess is None:
        dt = times[1] - times[0]
        spec = np.abs(np.fft.rfft(population - population.mean()))
        freqs = np.fft.rfftfreq(len(times), dt) * 2 * np.pi
        guess = freqs[int(np.argmax(spec[1:])) + 1] / 2
    p0 = [max(population.max() - population.min(), 1e-3), guess, population.min()]
    popt, _ = curve_fit(_sin2, times, population, p0=p0, maxfev=20000)
    return abs(float(popt[1]))


def two_photon_rabi_trace(model: str, g1: float, g2: float, delta: float, *, periods: float = 4.0,
                          points: int = 1601, n_dopants: int = 1, sign: int = 1):
    """Populations of |g,2> and |e,0> starting from |g,2>."""
    basis = single_mode_basis()
    H = model_hamiltonian(model, g1, g2, delta, n_dopants=n_dopants, sign=sign, basis=basis)
    scale = math.sqrt(n_dopants)
    omega_r = two_photon_rabi_frequency(g1 * scale, g2 * scale, delta)
    times = np.linspace(0.0, periods * math.pi / omega_r, points)
    traj = sample_trajectory(H, basis_state(basis, (2,), ("g",)), times)
    p_g2 = np.abs(traj[:, basis.index((2,), ("g",))]) ** 2
    p_e0 = np.abs(traj[:, basis.index((0,), ("e",))]) ** 2
    return times, p_g2, p_e0


def dispersive_phase_rate(model: str, g1: float, g2: float, delta: float, *, n_dopants: int = 1, sign: int = 1,
                          duration: float | None = None, points: int = 801) -> float:
    """Slope of -arg<g,1|psi(t)> for a single photon starting in |g,1>."""
    basis = single_mode_basis()
    H = model_hamiltonian(model, g1, g2, delta, n_dopants=n_dopants, sign=sign, basis=basis)
    rate_guess = n_dopants * g1**2 / abs(delta)
    if duration is None:
        duration = 4 * math.pi / rate_guess
    times = np.linspace(0.0, duration, points)
    traj = sample_trajectory(H, basis_state(basis, (1,), ("g",)), times)
    phase = np.unwrap(np.angle(traj[:, basis.index((1,), ("g",))]))
    return float(-np.polyfit(times, phase, 1)[0])


def effective_vs_cascade(g1: float, g2: float, delta: float, *, n_dopants: int = 1, sign: int = 1) -> dict:
    """Two-photon Rabi frequency and single-photon phase rate, both models."""
    out = {}
    scale = math.sqrt(n_dopants)
    out["kappa_theory"] = math.sqrt(2) * g1 * g2 * n_dopants / delta
    out["rabi_theory"] = two_photon_rabi_frequency(g1 * scale, g2 * scale, delta)
    out["phi_rate_theory"] = n_dopants * g1**2 / delta
    for model in ("effective", "cascade"):
        times, _, p_e0 = two_photon_rabi_trace(model, g1, g2, delta, n_dopants=n_dopants, sign=sign)
        out[f"rabi_{model}"] = fit_rabi_frequency(times, p_e0, guess=out["rabi_theory"])
        out[f"phi_rate_{model}"] = dispersive_phase_rate(model, g1, g2, delta, n_dopants=n_dopants, sign=sign)
    out["rabi_rel_error"] = abs(out["rabi_cascade"] - out["kappa_theory"]) / abs(out["kappa_theory"])
    out["phi_rate_rel_error"] = abs(abs(out["phi_rate_cascade"]) - abs(out["phi_rate_theory"])) / abs(
        out["phi_rate_theory"])
    return out
