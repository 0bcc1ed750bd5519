"""Order-of-magnitude device estimates in SI units (angular frequencies)."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from scipy.constants import c as SPEED_OF_LIGHT

# values quoted for a Q = 1e6 defect and the gate times, for side-by-side output
QUOTED_T1 = 1e-9
QUOTED_GATE_TIME = 1e-10


def omega_from_wavelength(wavelength: float) -> float:
    return 2 * math.pi * SPEED_OF_LIGHT / wavelength


@dataclass(frozen=True)
class DeviceParams:
    Q: float = 1e6
    omega: float = omega_from_wavelength(852e-9)
    g: float = 3e9
    N: int = 100
    Delta: float = 3e10
    v_g: float = 1e-4  # fraction of c
    length: float = 30  # lattice constants
    lattice_constant: float = 0.5e-6  # m
    g1: float | None = None
    g2: float | None = None

    def __post_init__(self):
        for name in ("Q", "omega", "g", "N", "Delta", "v_g", "length", "lattice_constant"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def params_estimate(d: DeviceParams) -> dict:
    """Coherence window, gate times and photon crossing time.

    Gate and phase times pass when at least ten times shorter than T1.
    Both collective-coupling conventions are reported: coupling sqrt(N) g
    (rates scale with N) and rates scaling with sqrt(N).
    """
    g1 = d.g if d.g1 is None else d.g1
    g2 = d.g if d.g2 is None else d.g2
    t1 = d.Q / d.omega
    phase_n = math.pi * d.Delta / (d.N * d.g**2)
    phase_sqrt = math.pi * d.Delta / (math.sqrt(d.N) * d.g**2)
    gate_n = math.pi * d.Delta / (math.sqrt(2) * d.N * g1 * g2)
    gate_sqrt = math.pi * d.Delta / (math.sqrt(2) * math.sqrt(d.N) * g1 * g2)
    crossing = d.length * d.lattice_constant / (d.v_g * SPEED_OF_LIGHT)

    def flag(time):
        return "pass" if time <= t1 / 10 else "warn"

    return {
        "inputs": asdict(d),
        "loss_rate": d.omega / d.Q,
        "T1": t1,
        "T1_quoted": QUOTED_T1,
        "T1_formula": "Q / omega",
        "pi_phase_time_N": phase_n,
        "pi_phase_time_sqrtN": phase_sqrt,
        "two_photon_gate_time_N": gate_n,
        "two_photon_gate_time_sqrtN": gate_sqrt,
        "gate_time_quoted": QUOTED_GATE_TIME,
        "crossing_time": crossing,
        "flags": {
            "pi_phase_time_N": flag(phase_n),
            "pi_phase_time_sqrtN": flag(phase_sqrt),
            "two_photon_gate_time_N": flag(gate_n),
            "two_photon_gate_time_sqrtN": flag(gate_sqrt),
            "crossing_time": "pass" if crossing <= t1 else "warn",
        },
    }
