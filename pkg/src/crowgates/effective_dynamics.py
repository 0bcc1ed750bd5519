"""Closed-form two-photon dynamics and gate-condition algebra.

``paper_evolution`` reproduces the printed single-dopant evolutions of the
six hybrid states {g00, g01, g10, g20, g02, e00} literally, including the
real ``sin(kappa t)`` coefficient on the |e00> branch.  Passing
``unitary=True`` uses ``-i sin(kappa t)`` instead, which is what a
Hermitian generator would produce.

``exact_two_photon_oracle`` exponentiates the {|g,2>, |e,0>} block of the
effective Hamiltonian in closed form and is the reference the numeric
propagator is checked against.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .hamiltonians import EffectiveParams

PAPER_STATES = ("g00", "g01", "g10", "g20", "g02", "e00")
SQRT2 = math.sqrt(2.0)


def wrap_phase(phase):
    """Representative of ``phase`` modulo 2 pi in (-pi, pi]."""
    wrapped = np.mod(-np.asarray(phase, dtype=float) + np.pi, 2 * np.pi)
    out = np.pi - wrapped
    return float(out) if np.ndim(out) == 0 else out


def _functions(symbolic: bool):
    if symbolic:
        import sympy

        return sympy.exp, sympy.cos, sympy.sin, sympy.I
    return cmath.exp, math.cos, math.sin, 1j


def paper_amplitudes(initial: str, kappa_t, phi, *, unitary: bool = False, symbolic: bool = False) -> dict:
    """Map one of the six supported states to ``{state: amplitude}``.

    With ``symbolic=True`` the angles may be sympy expressions and the
    amplitudes are returned unevaluated.
    """
    if initial not in PAPER_STATES:
        raise ValueError(f"initial state {initial!r} not in {PAPER_STATES}")
    exp, cos, sin, I = _functions(symbolic)
    if initial == "g00":
        return {"g00": 1}
    if initial in ("g01", "g10"):
        return {initial: exp(-I * phi)}
    if initial == "e00":
        # not covered by the printed evolutions
        raise ValueError("the closed-form evolutions start from the dopant ground state")
    pref = exp(2 * I * phi)
    branch = -I * sin(kappa_t) if unitary else sin(kappa_t)
    return {initial: pref * cos(kappa_t), "e00": pref * branch}


@dataclass(frozen=True)
class PaperEvolutionResult:
    amplitudes: np.ndarray  # ordered as PAPER_STATES
    phi: float
    kappa_t: float

    def amplitude(self, label: str) -> complex:
        return complex(self.amplitudes[PAPER_STATES.index(label)])

    @property
    def total_probability(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def paper_evolution(initial: str, params: EffectiveParams, t: float, *, unitary: bool = False) -> PaperEvolutionResult:
    """Evolve one supported state for time ``t`` with the closed forms."""
    phi = params.phi_rate * t
    kappa_t = params.kappa * t
    amps = paper_amplitudes(initial, kappa_t, phi, unitary=unitary)
    vec = np.zeros(len(PAPER_STATES), dtype=complex)
    for label, amp in amps.items():
        vec[PAPER_STATES.index(label)] = amp
    return PaperEvolutionResult(vec, phi, kappa_t)


def two_photon_block(g1: float, g2: float, delta: float) -> np.ndarray:
    """Effective Hamiltonian restricted to {|g,2>, |e,0>}."""
    return np.array([[2 * g1**2, SQRT2 * g1 * g2], [SQRT2 * g1 * g2, g2**2]], dtype=float) / delta


def exact_two_photon_oracle(g1: float, g2: float, delta: float, t: float) -> np.ndarray:
    """exp(-iHt) of the two-photon block, via its closed-form 2x2 eigensystem.

    With H = m*I + d*Z + c*X, exp(-iHt) = exp(-imt)[cos(st) I - i sin(st)/s (dZ + cX)],
    s = sqrt(d^2 + c^2).
    """
    if delta == 0:
        raise ValueError("detuning delta must be non-zero")
    a = 2 * g1**2 / delta
    b = g2**2 / delta
    c = SQRT2 * g1 * g2 / delta
    m = 0.5 * (a + b)
    d = 0.5 * (a - b)
    s = math.hypot(d, c)
    pref = cmath.exp(-1j * m * t)
    if s == 0:
        return pref * np.eye(2, dtype=complex)
    cs, sn = math.cos(s * t), math.sin(s * t)
    gen = np.array([[d, c], [c, -d]], dtype=float) / s
    return pref * (cs * np.eye(2) - 1j * sn * gen)


def two_photon_rabi_frequency(g1: float, g2: float, delta: float) -> float:
    """Half the eigenvalue splitting of the two-photon block.

    Equals kappa when the diagonal shifts coincide (g2 = sqrt(2) g1); the
    return probability of |g,2> is periodic with period pi over this.
    """
    d = (2 * g1**2 - g2**2) / (2 * delta)
    return math.hypot(d, SQRT2 * g1 * g2 / delta)


def dispersive_phase(coupling: float, delta: float, duration: float) -> float:
    """Phase coupling^2 * T / delta picked up by a dispersively coupled photon."""
    if delta == 0:
        raise ValueError("detuning delta must be non-zero")
    return coupling**2 * duration / delta


@dataclass(frozen=True)
class GateCondition:
    label: str
    ratio: float  # g1 / g2
    g1: float
    g2: float
    delta: float
    t: float
    kappa: float
    single_photon_phase: float
    two_photon_phase: float
    local_phase_correction: float = 0.0

    @property
    def params(self) -> EffectiveParams:
        return EffectiveParams(self.g1, self.g2, self.delta)

    @property
    def kappa_t(self) -> float:
        return self.kappa * self.t

    @property
    def conditional_phase(self) -> float:
        """Two-photon phase relative to twice the single-photon phase, wrapped."""
        return wrap_phase(self.two_photon_phase - 2 * self.single_photon_phase)


def gate_condition(g2: float, delta: float) -> GateCondition:
    """Closed-form CZ condition: g1/g2 = 2 sqrt(2) and kappa t = pi.

    Phases follow the closed forms: single photon exp(-i phi), two photons
    pi + 2 phi, with phi = g1 pi / (g2 sqrt 2) = 2 pi.
    """
    if g2 <= 0:
        raise ValueError("g2 must be positive")
    if delta == 0:
        raise ValueError("detuning delta must be non-zero")
    ratio = 2 * SQRT2
    g1 = ratio * g2
    params = EffectiveParams(g1, g2, delta)
    t = math.pi / params.kappa
    phi = g1 * math.pi / (g2 * SQRT2)
    return GateCondition(
        label="paper",
        ratio=ratio,
        g1=g1,
        g2=g2,
        delta=delta,
        t=t,
        kappa=params.kappa,
        single_photon_phase=-phi,
        two_photon_phase=math.pi + 2 * phi,
    )


def calibrated_gate_condition(delta: float, g1: float | None = None) -> GateCondition:
    """CZ condition that is exact under the effective Hamiltonian.

    Equal diagonal shifts (g2 = sqrt(2) g1) turn the two-photon block into
    a resonant Rabi problem; at kappa t = pi the pair returns to |g,2>
    with phase 0 while each single photon picks up -pi/2. A +pi/2 local
    phase per rail restores diag(1, 1, 1, -1). ``g1`` defaults to delta/50.
    """
    if delta == 0:
        raise ValueError("detuning delta must be non-zero")
    if g1 is None:
        g1 = abs(delta) / 50.0
    g2 = SQRT2 * g1
    params = EffectiveParams(g1, g2, delta)
    t = math.pi / abs(params.kappa)
    block = exact_two_photon_oracle(g1, g2, delta, t)
    theta2 = cmath.phase(block[0, 0])
    theta1 = -params.phi_rate * t
    return GateCondition(
        label="calibrated",
        ratio=g1 / g2,
        g1=g1,
        g2=g2,
        delta=delta,
        t=t,
        kappa=params.kappa,
        single_photon_phase=wrap_phase(theta1),
        two_photon_phase=wrap_phase(theta2),
        local_phase_correction=wrap_phase(-theta1),
    )
