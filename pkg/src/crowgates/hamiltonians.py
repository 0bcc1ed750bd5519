"""Hamiltonian builders for doped coupled-cavity waveguides.

All builders work in the frame rotating at the photon carrier frequency
unless a different ``frame_frequency`` is passed, and return an
:class:`~crowgates.fock_space.OperatorMatrix` with its Hermiticity flag set.

Hopping convention: +J on the off-diagonal, so a single photon on two
coupled modes evolves as (cos Jt, -i sin Jt).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .fock_space import (
    DopantLevelSet,
    HybridBasis,
    OperatorMatrix,
    annihilation_op,
    creation_op,
    dopant_transition_op,
    identity_op,
    number_op,
    zero_op,
)

# regime flag threshold: detuning must exceed this multiple of the couplings
DISPERSIVE_REGIME_FACTOR = 10.0


@dataclass(frozen=True)
class ModeGraph:
    mode_frequencies: tuple[float, ...]
    hops: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mode_frequencies", tuple(float(w) for w in self.mode_frequencies))
        hops = tuple((int(i), int(j), float(J)) for i, j, J in self.hops)
        seen = set()
        n = len(self.mode_frequencies)
        for i, j, _ in hops:
            if i == j:
                raise ValueError(f"self-hop on mode {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"hop ({i}, {j}) outside {n} modes")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate hop {key}")
            seen.add(key)
        object.__setattr__(self, "hops", hops)

    @property
    def mode_count(self) -> int:
        return len(self.mode_frequencies)

    @classmethod
    def chain(cls, length: int, J: float, omega: float = 0.0, shifts: Sequence[float] | None = None) -> "ModeGraph":
        """Open nearest-neighbour chain with optional on-site frequency shifts."""
        freqs = [omega] * length if shifts is None else [omega + s for s in shifts]
        return cls(tuple(freqs), tuple((k, k + 1, J) for k in range(length - 1)))


@dataclass(frozen=True)
class DopantSpec:
    """Collective dopant attached to one cavity mode.

    For a two-level dopant (levels g, e) ``omega_gh`` is the single
    transition frequency and ``g1`` its coupling; ``omega_he`` and ``g2``
    are ignored.
    """

    attached_mode: int
    omega_gh: float
    omega_he: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    n_dopants: int = 1
    levels: DopantLevelSet = field(default_factory=DopantLevelSet.cascade)
    dopant_index: int | None = None

    def __post_init__(self):
        if self.g1 < 0 or self.g2 < 0:
            raise ValueError("couplings must be non-negative")
        if self.n_dopants < 1:
            raise ValueError("n_dopants must be a positive integer")

    @property
    def is_cascade(self) -> bool:
        return len(self.levels) == 3

    @classmethod
    def symmetric(
        cls,
        delta: float,
        g1: float,
        g2: float,
        omega: float = 0.0,
        *,
        attached_mode: int = 0,
        n_dopants: int = 1,
        sign: int = +1,
        dopant_index: int | None = None,
    ) -> "DopantSpec":
        """Cascade dopant two-photon resonant with carrier ``omega``.

        ``sign=+1`` puts omega_gh - omega = +delta and omega_he - omega = -delta;
        ``sign=-1`` swaps them.
        """
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        return cls(
            attached_mode=attached_mode,
            omega_gh=omega + sign * delta,
            omega_he=omega - sign * delta,
            g1=g1,
            g2=g2,
            n_dopants=n_dopants,
            dopant_index=dopant_index,
        )


@dataclass(frozen=True)
class EffectiveParams:
    g1: float
    g2: float
    delta: float

    def __post_init__(self):
        if self.delta == 0:
            raise ValueError("detuning delta must be non-zero")

    @property
    def kappa(self) -> float:
        """Two-photon Rabi frequency sqrt(2) g1 g2 / delta."""
        return math.sqrt(2.0) * self.g1 * self.g2 / self.delta

    @property
    def phi_rate(self) -> float:
        """Single-photon dispersive phase rate g1^2 / delta."""
        return self.g1**2 / self.delta

    @property
    def valid_regime(self) -> bool:
        return abs(self.delta) >= DISPERSIVE_REGIME_FACTOR * max(self.g1, self.g2)


@dataclass(frozen=True)
class Schedule:
    segments: tuple[tuple[float, Mapping[str, float]], ...]

    def __post_init__(self):
        segs = tuple((float(d), dict(over)) for d, over in self.segments)
        if not segs:
            raise ValueError("a schedule needs at least one segment")
        for d, _ in segs:
            if not (d > 0 and math.isfinite(d)):
                raise ValueError(f"segment durations must be finite and positive, got {d}")
        object.__setattr__(self, "segments", segs)

    @property
    def total_duration(self) -> float:
        return sum(d for d, _ in self.segments)

    @classmethod
    def stark_switch(cls, t_before: float, t_on: float, t_after: float, delta_on: float, delta_far: float,
                     name: str = "delta") -> "Schedule":
        """Off/on/off detuning timeline: far-detuned, near-resonant, far-detuned."""
        return cls(((t_before, {name: delta_far}), (t_on, {name: delta_on}), (t_after, {name: delta_far})))


class ScheduleError(KeyError):
    pass


def crow_hopping_h(basis: HybridBasis, graph: ModeGraph, frame_frequency: float = 0.0) -> OperatorMatrix:
    """H = sum_i (w_i - w_frame) n_i + sum_<ij> J_ij (a_i^+ a_j + a_j^+ a_i)."""
    if graph.mode_count != basis.mode_count:
        raise ValueError(f"graph has {graph.mode_count} modes, basis has {basis.mode_count}")
    d = basis.dimension
    diag = basis.occupations.astype(float) @ (np.asarray(graph.mode_frequencies) - frame_frequency)
    mat = sp.diags(diag.astype(complex)).tocsr()
    if graph.hops:
        ann = [annihilation_op(basis, k).entries for k in range(basis.mode_count)]
        for i, j, J in graph.hops:
            term = ann[i].conj().T @ ann[j]
            mat = mat + J * (term + term.conj().T)
    return OperatorMatrix(basis, sp.csr_matrix(mat, shape=(d, d)), True)


def _dopant_slot(basis: HybridBasis, spec: DopantSpec) -> int:
    if spec.dopant_index is not None:
        return spec.dopant_index
    if len(basis.dopants) == 1:
        return 0
    raise ValueError("basis holds several dopants; set DopantSpec.dopant_index")


def cascade_dopant_h(basis: HybridBasis, spec: DopantSpec, photon_frequency: float = 0.0) -> OperatorMatrix:
    """Full g-h-e cascade dopant coupled to one mode, in the frame at ``photon_frequency``.

    H = (w_gh - w) s_hh + (w_gh + w_he - 2w) s_ee
        + sqrt(N) g1 (s_hg a + s_gh a^+) + sqrt(N) g2 (s_eh a + s_he a^+)
    """
    if not spec.is_cascade:
        raise ValueError("cascade_dopant_h needs a three-level (g, h, e) dopant spec")
    slot = _dopant_slot(basis, spec)
    if basis.dopants[slot].level_labels != ("g", "h", "e"):
        raise ValueError(f"basis dopant {slot} is not a g-h-e cascade")
    w = photon_frequency
    a = annihilation_op(basis, spec.attached_mode)
    ad = creation_op(basis, spec.attached_mode)
    s = lambda i, j: dopant_transition_op(basis, slot, i, j)
    root_n = math.sqrt(spec.n_dopants)
    h = (spec.omega_gh - w) * s("h", "h") + (spec.omega_gh + spec.omega_he - 2 * w) * s("e", "e")
    h = h + (root_n * spec.g1) * (s("h", "g") @ a + s("g", "h") @ ad)
    h = h + (root_n * spec.g2) * (s("e", "h") @ a + s("h", "e") @ ad)
    return OperatorMatrix(basis, h.entries, True)


def effective_h(
    basis: HybridBasis,
    params: EffectiveParams,
    *,
    mode_index: int = 0,
    dopant_index: int = 0,
    include_vacuum_shift: bool = True,
) -> OperatorMatrix:
    """Adiabatically eliminated two-photon Hamiltonian.

    H = (g1^2/d) s_gg a^+a + (g2^2/d) s_ee a a^+ + (g1 g2/d)(s_ge a^+^2 + s_eg a^2)

    The a a^+ ordering gives |e,0> a g2^2/d shift; ``include_vacuum_shift=False``
    replaces it by a^+ a.
    """
    if not 0 <= mode_index < basis.mode_count or not 0 <= dopant_index < len(basis.dopants):
        raise ValueError("effective_h needs a basis with the requested mode and dopant")
    labels = basis.dopants[dopant_index].level_labels
    if "e" not in labels:
        raise ValueError("effective_h needs a dopant with levels g and e")
    g1, g2, delta = params.g1, params.g2, params.delta
    a = annihilation_op(basis, mode_index)
    n = number_op(basis, mode_index)
    s = lambda i, j: dopant_transition_op(basis, dopant_index, i, j)
    # a a^+ taken as n + 1 so the top photon layer is not corrupted by truncation
    upper = n + identity_op(basis) if include_vacuum_shift else n
    a2 = a @ a
    h = (g1**2 / delta) * (s("g", "g") @ n)
    h = h + (g2**2 / delta) * (s("e", "e") @ upper)
    h = h + (g1 * g2 / delta) * (s("g", "e") @ a2.dag() + s("e", "g") @ a2)
    return OperatorMatrix(basis, h.entries, True)


def two_level_dispersive_h(
    basis: HybridBasis,
    coupling: float,
    delta: float,
    n_dopants: int = 1,
    *,
    mode_index: int = 0,
    dopant_index: int = 0,
    collective: str = "N",
) -> OperatorMatrix:
    """Dispersive limit of a two-level dopant: rate * s_gg a^+a.

    ``collective="N"`` puts sqrt(N) in the coupling (rate N*coupling^2/delta);
    ``collective="sqrtN"`` gives rate sqrt(N)*coupling^2/delta.
    """
    if delta == 0:
        raise ValueError("detuning delta must be non-zero")
    if collective == "N":
        factor = float(n_dopants)
    elif collective == "sqrtN":
        factor = math.sqrt(n_dopants)
    else:
        raise ValueError(f"collective must be 'N' or 'sqrtN', got {collective!r}")
    rate = factor * coupling**2 / delta
    h = rate * (dopant_transition_op(basis, dopant_index, "g", "g") @ number_op(basis, mode_index))
    return OperatorMatrix(basis, h.entries, True)


def loss_rate_from_q(omega: float, quality_factor: float) -> float:
    """Photon energy decay rate gamma = omega / Q."""
    return omega / quality_factor


def loss_term(basis: HybridBasis, rates: Sequence[float]) -> OperatorMatrix:
    """Anti-Hermitian no-jump term -(i/2) sum_i gamma_i n_i."""
    rates = list(rates)
    if len(rates) != basis.mode_count:
        raise ValueError(f"need one rate per mode ({basis.mode_count}), got {len(rates)}")
    if any(r < 0 for r in rates):
        raise ValueError("loss rates must be non-negative")
    diag = basis.occupations.astype(float) @ np.asarray(rates, dtype=float)
    return OperatorMatrix(basis, sp.diags(-0.5j * diag).tocsr(), False)


def schedule_h(
    basis: HybridBasis,
    schedule: Schedule,
    build: Callable[..., OperatorMatrix],
    defaults: Mapping[str, float],
    *,
    merge: bool = True,
) -> list[tuple[float, OperatorMatrix]]:
    """Piecewise-constant Hamiltonian timeline.

    Each segment calls ``build(basis, **params)`` with ``defaults`` updated
    by the segment overrides. Neighbouring segments with identical
    parameters are merged when ``merge`` is true.
    """
    timeline: list[tuple[float, OperatorMatrix]] = []
    last_params = None
    for duration, overrides in schedule.segments:
        unknown = sorted(set(overrides) - set(defaults))
        if unknown:
            raise ScheduleError(f"no builder parameter named {unknown}")
        params = {**defaults, **overrides}
        if merge and timeline and params == last_params:
            prev_d, prev_h = timeline[-1]
            timeline[-1] = (prev_d + duration, prev_h)
            continue
        timeline.append((duration, build(basis, **params)))
        last_params = params
    return timeline


def zero_h(basis: HybridBasis) -> OperatorMatrix:
    return zero_op(basis)
