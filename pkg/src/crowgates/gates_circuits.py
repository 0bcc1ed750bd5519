"""Dual-rail circuits: couplers, phase shifters and the doped two-qubit device.

A circuit is a list of :class:`CircuitElement` acting on global rail
indices. Only rails touched by some element are simulated; the others are
spectators whose occupation is carried through unchanged. Each qubit holds
exactly one photon, so the simulated photon cap equals the number of
qubits with at least one simulated rail.

Computational labels are bit strings with the first qubit leftmost, and
truth-table columns follow that order.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from .effective_dynamics import (
    SQRT2,
    paper_amplitudes,
    wrap_phase,
)
from .fock_space import (
    DopantLevelSet,
    ModeSet,
    OperatorMatrix,
    StateVector,
    basis_state,
    enumerate_basis,
    number_op,
)
from .hamiltonians import (
    DopantSpec,
    EffectiveParams,
    ModeGraph,
    cascade_dopant_h,
    crow_hopping_h,
    effective_h,
    loss_term,
    two_level_dispersive_h,
    zero_h,
)
from .propagator import DENSE_CAP, EvolutionReport, evolve, propagator_matrix

MODELS = ("paper", "effective", "cascade", "dispersive")

CZ = np.diag([1, 1, 1, -1]).astype(complex)


@dataclass(frozen=True)
class DualRailQubit:
    rail0: int
    rail1: int

    def __post_init__(self):
        if self.rail0 == self.rail1:
            raise ValueError("a dual-rail qubit needs two distinct rails")

    @property
    def rails(self) -> tuple[int, int]:
        return (self.rail0, self.rail1)


@dataclass(frozen=True)
class CircuitElement:
    kind: str
    modes: tuple[int, ...]
    J: float = 0.0
    t: float = 0.0
    theta: float = 0.0
    inverse: bool = False
    model: str | None = None
    params: EffectiveParams | None = None
    n_dopants: int = 1
    unitary: bool = True
    include_vacuum_shift: bool = True
    detuning_sign: int = 1
    collective: str = "N"

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))
        for name in ("J", "t", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.kind == "coupler" and (len(self.modes) != 2 or self.modes[0] == self.modes[1]):
            raise ValueError("a coupler acts on exactly two distinct modes")
        if self.kind == "dopant_interaction" and self.model not in MODELS:
            raise ValueError(f"unknown dopant model {self.model!r}; choose from {MODELS}")
        if self.t < 0:
            raise ValueError("durations must be non-negative")


def hadamard_coupler(J: float, t: float, modes: Sequence[int] = (0, 1), *, inverse: bool = False) -> CircuitElement:
    """Evanescent coupler between two rails. Jt = pi/4 is a 50/50 splitter.

    A photon entering ``modes[0]`` leaves as (cos Jt, -i sin Jt); the
    inverse coupler runs the hopping backwards (J -> -J).
    """
    if J < 0 or t < 0:
        raise ValueError("J and t must be non-negative")
    return CircuitElement("coupler", tuple(modes), J=J, t=t, inverse=inverse)


def phase_shift(theta: float, rail: int, duration: float = 1.0) -> CircuitElement:
    """exp(-i theta n) on one rail, realised as a delay of length ``duration``."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    return CircuitElement("phase", (rail,), theta=theta, t=duration)


def idle(t: float, modes: Sequence[int] = ()) -> CircuitElement:
    return CircuitElement("idle", tuple(modes), t=t)


def dopant_interaction(
    model: str,
    params: EffectiveParams,
    t: float,
    modes: Sequence[int],
    *,
    n_dopants: int = 1,
    unitary: bool = True,
    include_vacuum_shift: bool = True,
    detuning_sign: int = 1,
    collective: str = "N",
) -> CircuitElement:
    """Doped region on ``modes`` (one collective dopant per mode), active for ``t``.

    ``model`` selects the closed forms (``"paper"``), the effective
    Hamiltonian (``"effective"``), the full cascade (``"cascade"``) or a
    two-level dispersive phase (``"dispersive"``, coupling ``params.g1``).
    """
    return CircuitElement(
        "dopant_interaction",
        tuple(modes),
        t=t,
        model=model,
        params=params,
        n_dopants=n_dopants,
        unitary=unitary,
        include_vacuum_shift=include_vacuum_shift,
        detuning_sign=detuning_sign,
        collective=collective,
    )


def mzi_probabilities(phi: float) -> tuple[float, float]:
    """Output-port probabilities (sin^2(phi/2), cos^2(phi/2)) of a balanced interferometer."""
    return math.sin(phi / 2) ** 2, math.cos(phi / 2) ** 2


def computational_labels(n_qubits: int) -> list[str]:
    return ["".join(bits) for bits in itertools.product("01", repeat=n_qubits)]


@dataclass
class TruthTable:
    matrix: np.ndarray
    labels: list[str]
    success_probability: np.ndarray
    leakage: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass
class CircuitResult:
    output: np.ndarray  # amplitudes over computational labels
    labels: list[str]
    success_probability: float
    survival_probability: float
    reports: dict[str, EvolutionReport] = field(default_factory=dict)

    @property
    def leakage(self) -> float:
        """Population still present but outside the computational subspace."""
        return max(self.survival_probability - self.success_probability, 0.0)


class CompiledCircuit:
    """Elements compiled onto a shared basis; step propagators are cached."""

    def __init__(self, elements: Sequence[CircuitElement], qubits: Sequence[DualRailQubit], *, loss_rate: float = 0.0):
        self.elements = list(elements)
        self.qubits = list(qubits)
        rails = [r for q in self.qubits for r in q.rails]
        if len(set(rails)) != len(rails):
            raise ValueError("qubits share a rail")
        touched = sorted({m for el in self.elements for m in el.modes})
        unknown = set(touched) - set(rails)
        if unknown:
            raise ValueError(f"elements act on rails {sorted(unknown)} outside the declared qubits")
        self.active = touched
        self.local = {m: k for k, m in enumerate(touched)}
        self.labels = computational_labels(len(self.qubits))
        self.loss_rate = loss_rate
        self.basis = None
        self.steps: list = []
        self._cache: dict[int, np.ndarray] = {}
        if touched:
            self._build()

    def _build(self):
        dopant_modes: dict[int, str] = {}
        for el in self.elements:
            if el.kind != "dopant_interaction":
                continue
            for m in el.modes:
                kind = "two" if el.model == "dispersive" else "cascade"
                if dopant_modes.get(m, kind) != kind:
                    raise ValueError(f"rail {m} carries both two-level and cascade dopant models")
                dopant_modes[m] = kind
        self.dopant_slot = {m: k for k, m in enumerate(sorted(dopant_modes))}
        dopants = [
            DopantLevelSet.two_level() if dopant_modes[m] == "two" else DopantLevelSet.cascade()
            for m in sorted(dopant_modes)
        ]
        n_photons = sum(1 for q in self.qubits if any(r in self.local for r in q.rails))
        self.basis = enumerate_basis(ModeSet(len(self.active), n_photons), dopants)
        self.ground = ("g",) * len(dopants)
        for el in self.elements:
            self.steps.append(self._compile(el))

    def _with_loss(self, H: OperatorMatrix) -> OperatorMatrix:
        if self.loss_rate <= 0:
            return H
        return H + loss_term(self.basis, [self.loss_rate] * self.basis.mode_count)

    def _compile(self, el: CircuitElement):
        b = self.basis
        loc = [self.local[m] for m in el.modes]
        if el.kind == "coupler":
            J = -el.J if el.inverse else el.J
            graph = ModeGraph((0.0,) * b.mode_count, ((loc[0], loc[1], J),))
            return ("H", el.t, self._with_loss(crow_hopping_h(b, graph)))
        if el.kind == "phase":
            return ("H", el.t, self._with_loss((el.theta / el.t) * number_op(b, loc[0])))
        if el.kind == "idle":
            return ("H", el.t, self._with_loss(zero_h(b)))
        # dopant interaction
        p = el.params
        if el.model == "paper":
            if len(loc) > 2:
                raise ValueError("the closed-form interaction covers at most two rails")
            return ("map", el, loc)
        H = zero_h(b)
        for m, k in zip(el.modes, loc):
            slot = self.dopant_slot[m]
            if el.model == "effective":
                if el.n_dopants != 1:
                    scale = math.sqrt(el.n_dopants)
                    p = EffectiveParams(el.params.g1 * scale, el.params.g2 * scale, el.params.delta)
                H = H + effective_h(b, p, mode_index=k, dopant_index=slot,
                                    include_vacuum_shift=el.include_vacuum_shift)
            elif el.model == "cascade":
                spec = DopantSpec.symmetric(p.delta, p.g1, p.g2, attached_mode=k, n_dopants=el.n_dopants,
                                            sign=el.detuning_sign, dopant_index=slot)
                H = H + cascade_dopant_h(b, spec)
            else:
                H = H + two_level_dispersive_h(b, p.g1, p.delta, el.n_dopants, mode_index=k,
                                               dopant_index=slot, collective=el.collective)
        return ("H", el.t, self._with_loss(H))

    def _apply_paper(self, el: CircuitElement, loc: list[int], state: StateVector) -> StateVector:
        b = self.basis
        p = el.params
        kappa_t = p.kappa * el.t
        phi = p.phi_rate * el.t
        out = np.zeros(b.dimension, dtype=complex)
        names1 = ("g10", "g01")
        names2 = ("g20", "g02")
        for k in np.flatnonzero(np.abs(state.amplitudes) > 1e-14):
            amp = state.amplitudes[k]
            occ, levels = b.states[k]
            slots = [self.dopant_slot[m] for m in el.modes]
            sub = [occ[i] for i in loc]
            if any(levels[s] != "g" for s in slots) or sum(sub) > 2 or sorted(sub)[-2:] == [1, 1]:
                raise ValueError(f"state {b.label(k)} is outside the closed-form evolution set")
            if sum(sub) == 0:
                out[k] += amp
                continue
            which = sub.index(max(sub))
            name = (names1 if sum(sub) == 1 else names2)[which]
            for label, coeff in paper_amplitudes(name, kappa_t, phi, unitary=el.unitary).items():
                if label == "e00":
                    new_occ = list(occ)
                    new_occ[loc[which]] = 0
                    new_levels = list(levels)
                    new_levels[slots[which]] = "e"
                    out[b.index(new_occ, new_levels)] += coeff * amp
                else:
                    out[k] += coeff * amp
        return StateVector(b, out)

    def _step_matrix(self, idx: int, H: OperatorMatrix, t: float) -> np.ndarray:
        if idx not in self._cache:
            self._cache[idx] = propagator_matrix(H, t)
        return self._cache[idx]

    def _input_state(self, label: str) -> StateVector:
        occ = [0] * len(self.active)
        for bit, q in zip(label, self.qubits):
            rail = q.rail1 if bit == "1" else q.rail0
            if rail in self.local:
                occ[self.local[rail]] = 1
        return basis_state(self.basis, occ, self.ground)

    def _spectators(self, label: str) -> tuple:
        return tuple(
            (q.rail1 if bit == "1" else q.rail0)
            for bit, q in zip(label, self.qubits)
            if (q.rail1 if bit == "1" else q.rail0) not in self.local
        )

    def run_label(self, label: str) -> tuple[np.ndarray, EvolutionReport]:
        """Evolve one computational input; returns output column and report."""
        if len(label) != len(self.qubits) or set(label) - {"0", "1"}:
            raise ValueError(f"label {label!r} does not match {len(self.qubits)} qubits (one photon each)")
        column = np.zeros(len(self.labels), dtype=complex)
        if self.basis is None:
            column[self.labels.index(label)] = 1.0
            return column, EvolutionReport(None, [], 0.0)
        state = self._input_state(label)
        norms = []
        for idx, step in enumerate(self.steps):
            if step[0] == "map":
                state = self._apply_paper(step[1], step[2], state)
            else:
                _, t, H = step
                if t > 0:
                    if self.basis.dimension <= DENSE_CAP:
                        state = StateVector(self.basis, self._step_matrix(idx, H, t) @ state.amplitudes)
                    else:
                        state = evolve(H, state, t)
            norms.append(state.norm_squared())
        spect = self._spectators(label)
        for j, out_label in enumerate(self.labels):
            if self._spectators(out_label) != spect:
                continue
            column[j] = np.vdot(self._input_state(out_label).amplitudes, state.amplitudes)
        return column, EvolutionReport(state, norms, 0.0)


def run_circuit(
    elements: Sequence[CircuitElement],
    qubits: Sequence[DualRailQubit],
    input,
    *,
    loss_rate: float = 0.0,
    compiled: CompiledCircuit | None = None,
) -> CircuitResult:
    """Run a circuit on a computational label (``"01"``) or on amplitudes over all labels."""
    circ = compiled or CompiledCircuit(elements, qubits, loss_rate=loss_rate)
    if isinstance(input, str):
        weights = {input: 1.0}
    else:
        amps = np.asarray(input, dtype=complex)
        if amps.shape != (len(circ.labels),):
            raise ValueError(f"need {len(circ.labels)} input amplitudes, got shape {amps.shape}")
        weights = {lab: a for lab, a in zip(circ.labels, amps) if a != 0}
    output = np.zeros(len(circ.labels), dtype=complex)
    reports = {}
    survival = 0.0
    for label, w in weights.items():
        column, report = circ.run_label(label)
        output += w * column
        reports[label] = report
        # distinct labels stay orthogonal under the (possibly lossy) evolution
        # only in the lossless case; survival is reported per input weight
        survival += abs(w) ** 2 * (report.survival_probability if report.final is not None else 1.0)
    success = float(np.sum(np.abs(output) ** 2))
    return CircuitResult(output, circ.labels, success, survival, reports)


def truth_table(
    elements: Sequence[CircuitElement],
    qubits: Sequence[DualRailQubit],
    *,
    loss_rate: float = 0.0,
) -> TruthTable:
    """Output amplitudes (columns) for every computational input."""
    circ = CompiledCircuit(elements, qubits, loss_rate=loss_rate)
    cols = []
    leak = []
    for label in circ.labels:
        column, report = circ.run_label(label)
        cols.append(column)
        surv = report.survival_probability if report.final is not None else 1.0
        leak.append(max(surv - float(np.sum(np.abs(column) ** 2)), 0.0))
    mat = np.array(cols).T
    success = np.sum(np.abs(mat) ** 2, axis=0)
    return TruthTable(mat, circ.labels, success, np.array(leak))


# --------------------------------------------------------------------------- #
#                               standard devices                              #
# --------------------------------------------------------------------------- #

def mzi_circuit(phi: float, J: float = 1.0, phase_rail: int = 1) -> tuple[list[CircuitElement], list[DualRailQubit]]:
    """Coupler (Jt = pi/4), phase phi on one arm, same coupler again."""
    t = math.pi / (4 * J)
    elements = [hadamard_coupler(J, t, (0, 1)), phase_shift(phi, phase_rail), hadamard_coupler(J, t, (0, 1))]
    return elements, [DualRailQubit(0, 1)]


def cz_device_qubits() -> list[DualRailQubit]:
    """Four rails top to bottom: |0>_1, |1>_1, |1>_2, |0>_2. Rails 1 and 2 enter the device."""
    return [DualRailQubit(0, 1), DualRailQubit(3, 2)]


def cz_device(
    model: str,
    params: EffectiveParams,
    t: float,
    *,
    J: float = 1.0,
    second_coupler: str = "inverse",
    **interaction_kwargs,
) -> tuple[list[CircuitElement], list[DualRailQubit]]:
    """Two-qubit device: coupler, doped interaction region on both arms, coupler.

    ``second_coupler="inverse"`` undoes the first splitter so the device is
    the identity when the dopants are off; ``"same"`` repeats it.
    """
    if second_coupler not in ("inverse", "same"):
        raise ValueError("second_coupler must be 'inverse' or 'same'")
    tc = math.pi / (4 * J)
    arms = (1, 2)
    elements = [
        hadamard_coupler(J, tc, arms),
        dopant_interaction(model, params, t, arms, **interaction_kwargs),
        hadamard_coupler(J, tc, arms, inverse=second_coupler == "inverse"),
    ]
    return elements, cz_device_qubits()


def paper_cz_truth_table(kappa_t=None, phi=None, *, symbolic: bool = False, unitary: bool = False):
    """Analytic device table: printed splitter signs, closed-form interaction, inverse splitter.

    Defaults to kappa t = pi and phi = 2 pi. With ``symbolic=True`` the
    result is an exact sympy Matrix.
    """
    if symbolic:
        import sympy

        root2 = sympy.sqrt(2)
        kappa_t = sympy.pi if kappa_t is None else kappa_t
        phi = 2 * sympy.pi if phi is None else phi
        mat = sympy.zeros(4, 4)
    else:
        root2 = SQRT2
        kappa_t = math.pi if kappa_t is None else kappa_t
        phi = 2 * math.pi if phi is None else phi
        mat = np.zeros((4, 4), dtype=complex)
    first = {
        "00": {"g00": 1},
        "01": {"g01": 1 / root2, "g10": -1 / root2},
        "10": {"g01": 1 / root2, "g10": 1 / root2},
        "11": {"g20": 1 / root2, "g02": -1 / root2},
    }
    labels = computational_labels(2)
    for col, label in enumerate(labels):
        mid: dict = {}
        for name, amp in first[label].items():
            for out, coeff in paper_amplitudes(name, kappa_t, phi, unitary=unitary, symbolic=symbolic).items():
                mid[out] = mid.get(out, 0) + amp * coeff
        # inverse splitter; |e00> stays outside the computational subspace
        x, y = mid.get("g01", 0), mid.get("g10", 0)
        outs = {
            "00": mid.get("g00", 0),
            "01": (x - y) / root2,
            "10": (x + y) / root2,
            "11": (mid.get("g20", 0) - mid.get("g02", 0)) / root2,
        }
        for row, out_label in enumerate(labels):
            mat[row, col] = outs[out_label]
    if symbolic:
        return mat.applyfunc(sympy.simplify)
    return mat


# --------------------------------------------------------------------------- #
#                                   fidelity                                  #
# --------------------------------------------------------------------------- #

@dataclass
class GateReport:
    fidelity: float
    local_phases: tuple[float, ...]
    leakage: np.ndarray
    parameters: dict = field(default_factory=dict)


def _best_local_phases(c: np.ndarray, grid: int) -> tuple[float, tuple[float, ...]]:
    """Maximise |sum_i L_i c_i| over L = diag(1, e^ia) (x) diag(1, e^ib)."""
    if c.shape[0] == 2:
        alpha = np.angle(c[0]) - np.angle(c[1])
        return abs(c[0]) + abs(c[1]), (wrap_phase(alpha),)
    if c.shape[0] != 4:
        raise ValueError("local phases are defined for one or two qubits")

    # for fixed alpha the optimal beta aligns the two partial sums exactly
    def partial(alpha):
        e = np.exp(1j * alpha)
        return c[0] + c[2] * e, c[1] + c[3] * e

    def value(alpha):
        A, B = partial(alpha)
        return np.abs(A) + np.abs(B)

    def slope(alpha):
        e = np.exp(1j * alpha)
        A, B = partial(alpha)
        dA, dB = 1j * c[2] * e, 1j * c[3] * e
        out = 0.0
        if abs(A) > 0:
            out += np.real(np.conj(A) * dA) / abs(A)
        if abs(B) > 0:
            out += np.real(np.conj(B) * dB) / abs(B)
        return out

    alphas = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    vals = value(alphas)
    k = int(np.argmax(vals))
    step = 2 * np.pi / grid
    lo, hi = alphas[k] - step, alphas[k] + step
    alpha = alphas[k]
    if slope(lo) > 0 > slope(hi):
        alpha = brentq(slope, lo, hi, xtol=1e-15)
    else:
        res = minimize_scalar(lambda a: -value(a), bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        if -res.fun >= vals[k]:
            alpha = res.x
    A, B = partial(alpha)
    beta = np.angle(A) - np.angle(B) if abs(B) > 0 else 0.0
    return float(np.abs(A) + np.abs(B)), (wrap_phase(alpha), wrap_phase(beta))


def local_phase_matrix(phases: Sequence[float]) -> np.ndarray:
    mats = [np.diag([1.0, np.exp(1j * a)]) for a in phases]
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def gate_fidelity(achieved, target, local_phase_freedom: bool = True, *, grid: int = 1024) -> GateReport:
    """Average gate fidelity of a (possibly trace-decreasing) map M against unitary T.

    F = (|Tr(T^+ M)|^2 + Tr(M^+ M)) / (d^2 + d). With ``local_phase_freedom``
    the single-qubit phases diag(1, e^{ia}) applied after M are optimised.
    """
    M = np.asarray(achieved.matrix if isinstance(achieved, TruthTable) else achieved, dtype=complex)
    T = np.asarray(target, dtype=complex)
    if M.shape != T.shape or M.shape[0] != M.shape[1]:
        raise ValueError(f"shape mismatch: achieved {M.shape}, target {T.shape}")
    d = M.shape[0]
    c = np.sum(T.conj() * M, axis=1)
    if local_phase_freedom:
        overlap, phases = _best_local_phases(c, grid)
    else:
        overlap, phases = abs(np.sum(c)), tuple(0.0 for _ in range(int(round(math.log2(d)))))
    norm_term = float(np.real(np.trace(M.conj().T @ M)))
    fid = (overlap**2 + norm_term) / (d * d + d)
    leakage = np.clip(1.0 - np.sum(np.abs(M) ** 2, axis=0), 0.0, None)
    return GateReport(float(fid), phases, leakage)


# --------------------------------------------------------------------------- #
#                                 calibration                                 #
# --------------------------------------------------------------------------- #

@dataclass
class CalibrationResult:
    report: GateReport
    ratio: float  # g1 / g2
    kappa_t: float
    g1: float
    g2: float
    delta: float
    t: float
    evaluations: int

    @property
    def g2_over_g1(self) -> float:
        return self.g2 / self.g1 if self.g1 else math.inf


def cz_fidelity(ratio: float, kappa_t: float, delta: float, g2: float, *, model: str = "effective",
                local_phase_freedom: bool = True, **device_kwargs) -> tuple[float, GateReport, TruthTable]:
    """Fidelity of the device against CZ for g1 = ratio * g2 and kappa t."""
    g1 = ratio * g2
    params = EffectiveParams(g1, g2, delta)
    kappa = abs(params.kappa)
    t = kappa_t / kappa if kappa > 0 else 0.0
    elements, qubits = cz_device(model, params, t, **device_kwargs)
    table = truth_table(elements, qubits)
    report = gate_fidelity(table, CZ, local_phase_freedom)
    report.parameters = {"ratio": ratio, "kappa_t": kappa_t, "g1": g1, "g2": g2, "delta": delta, "t": t,
                         "model": model}
    return report.fidelity, report, table


def optimize_cz(
    delta: float = 1.0,
    ratio_range: tuple[float, float] = (0.35, 3.0),
    kappa_t_range: tuple[float, float] = (0.5 * math.pi, 1.5 * math.pi),
    *,
    g2: float | None = None,
    model: str = "effective",
    grid: tuple[int, int] = (25, 25),
    local_phase_freedom: bool = True,
    refine: bool = True,
    threads: int = 1,
) -> CalibrationResult:
    """Coarse grid over (g1/g2, kappa t) followed by a bounded Nelder-Mead polish.

    ``g2`` sets the coupling scale (default |delta|/50). Ties on the grid go
    to the lowest (ratio, kappa_t) index.
    """
    if ratio_range[0] > ratio_range[1] or kappa_t_range[0] > kappa_t_range[1]:
        raise ValueError("ranges must be (low, high)")
    g2 = abs(delta) / 50.0 if g2 is None else g2
    n_r = 1 if ratio_range[0] == ratio_range[1] else grid[0]
    n_k = 1 if kappa_t_range[0] == kappa_t_range[1] else grid[1]
    ratios = np.linspace(*ratio_range, n_r)
    kts = np.linspace(*kappa_t_range, n_k)
    points = [(float(r), float(k)) for r in ratios for k in kts]

    def score(point):
        return cz_fidelity(point[0], point[1], delta, g2, model=model, local_phase_freedom=local_phase_freedom)[0]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            scores = list(pool.map(score, points))
    else:
        scores = [score(p) for p in points]
    evaluations = len(points)
    best = int(np.argmax(scores))  # first maximum wins ties
    best_point = points[best]
    if refine and len(points) > 1:
        bounds = [ratio_range, kappa_t_range]
        res = minimize(lambda x: -score(x), np.array(best_point), method="Nelder-Mead", bounds=bounds,
                       options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 2000})
        evaluations += res.nfev
        if -res.fun > scores[best]:
            best_point = (float(res.x[0]), float(res.x[1]))
    _, report, _ = cz_fidelity(best_point[0], best_point[1], delta, g2, model=model,
                               local_phase_freedom=local_phase_freedom)
    p = report.parameters
    return CalibrationResult(report, best_point[0], best_point[1], p["g1"], p["g2"], delta, p["t"], evaluations)
